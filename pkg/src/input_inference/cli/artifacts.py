"""Plot-ready artifact files: CSV with full-precision floats and sorted-key JSON."""

from __future__ import annotations

import csv
import json
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from input_inference.controller.policy import LinearGaussianController
from input_inference.engine.em import ConvergenceRecord
from input_inference.errors import ConfigError, ContractViolationError
from input_inference.evaluation.monte_carlo import EvalReport


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return Path(path)


def write_json(path: Path, data: Any) -> Path:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n")
    return Path(path)


def gain_rows(controller: LinearGaussianController, horizon: int) -> list[list[Any]]:
    """Rows ``t, K_i_j..., k_i`` for ``t < horizon``."""
    rows = []
    for t in range(horizon):
        rows.append(
            [t, *map(float, controller.gains[t].ravel()), *map(float, controller.offsets[t])]
        )
    return rows


def gain_header(d_u: int, d_x: int) -> list[str]:
    return (
        ["t"]
        + [f"K_{i}_{j}" for i in range(d_u) for j in range(d_x)]
        + [f"k_{i}" for i in range(d_u)]
    )


def write_gains(path: Path, controller: LinearGaussianController, horizon: int) -> Path:
    return write_csv(
        path, gain_header(controller.d_u, controller.d_x), gain_rows(controller, horizon)
    )


def gain_errors(
    candidate: LinearGaussianController, reference: LinearGaussianController, horizon: int
) -> list[float]:
    """Per-step relative error, the larger of the feedback gain's and the offset's.

    Each is ``||X - X_ref||_inf / max(||X_ref||_inf, 1e-12)`` on its own, so a large offset
    does not hide an error in ``K``.
    """

    def relative(ours: np.ndarray, ref: np.ndarray) -> float:
        return float(np.abs(ours - ref).max() / max(np.abs(ref).max(), 1e-12))

    return [
        max(
            relative(candidate.gains[t], reference.gains[t]),
            relative(candidate.offsets[t], reference.offsets[t]),
        )
        for t in range(horizon)
    ]


def write_convergence(path: Path, trace: Sequence[ConvergenceRecord]) -> Path:
    return write_csv(
        path,
        ["iteration", "predicted_cost", "alpha", "nll"],
        ([r.iteration, float(r.predicted_cost), float(r.alpha), float(r.nll)] for r in trace),
    )


def read_predicted_cost(path: Path) -> float | None:
    """Last ``predicted_cost`` of a convergence trace, ``None`` without a trace or its rows."""
    try:
        with Path(path).open(newline="") as fh:
            rows = list(csv.DictReader(fh))
    except FileNotFoundError:
        return None
    if not rows:
        return None
    try:
        return float(rows[-1]["predicted_cost"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read the predicted cost from {path}: {exc}") from exc


def write_trajectory(
    path: Path, states: np.ndarray, inputs: np.ndarray, increments: np.ndarray
) -> Path:
    d_x, d_u = states.shape[1], inputs.shape[1]
    header = ["t", *(f"x_{i}" for i in range(d_x)), *(f"u_{j}" for j in range(d_u))]
    rows = (
        [t, *map(float, states[t]), *map(float, inputs[t]), float(increments[t])]
        for t in range(states.shape[0])
    )
    return write_csv(path, [*header, "cost_increment"], rows)


def write_controller(path: Path, controller: LinearGaussianController) -> Path:
    return write_json(path, controller.to_records())


def read_controller(path: Path) -> LinearGaussianController:
    try:
        records = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"controller file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse controller file {path}: {exc}") from exc
    if not isinstance(records, list):
        raise ContractViolationError("controller file must hold a list of timestep records")
    return LinearGaussianController.from_records(records)


def write_report(path: Path, report: EvalReport) -> Path:
    return write_json(path, report.model_dump(mode="json"))


def write_trial_costs(path: Path, report: EvalReport) -> Path:
    return write_csv(
        path, ["trial", "cost"], ([i, float(c)] for i, c in enumerate(report.evaluated_costs))
    )
