"""Experiment configuration: registry defaults < config file < command-line flags.

All layers are flattened to dotted keys (``em.alpha_init``) before they are merged and
validated into an :class:`ExperimentConfig`.
"""

from __future__ import annotations

import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from input_inference.engine.state import EmConfig
from input_inference.errors import ConfigError
from input_inference.models.registry import registry_defaults

ExperimentKind = Literal["lqr", "lqr_equiv", "trajopt", "eval"]

RESOLVED_CONFIG_NAME = "resolved_config.json"


class EnvSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    horizon: int | None = Field(default=None, ge=1)
    dt: float | None = Field(default=None, gt=0)
    process_noise_scale: float = Field(default=1.0, ge=0)


class PriorsSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    input_cov: float = Field(default=1.0, gt=0)
    input_mean: float = 0.0
    x0_cov: float = Field(default=1e-8, gt=0)


class CostSection(BaseModel):
    """Cost weights; ``None`` falls back to the environment's own features and weights.

    ``theta`` and ``terminal_weight`` are diagonals.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    theta: list[float] | None = None
    z_goal: list[float] | None = None
    terminal_weight: list[float] | None = None
    x_goal: list[float] | None = None


class EvalSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_trials: int = Field(default=100, ge=1)
    stochastic: bool = True
    zero_noise: bool = False
    sample_policy: bool = False
    strict: bool = False


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    kind: ExperimentKind
    env: EnvSection
    priors: PriorsSection = Field(default_factory=PriorsSection)
    em: EmConfig
    cost: CostSection = Field(default_factory=CostSection)
    evaluation: EvalSection = Field(default_factory=EvalSection, alias="eval")
    seed: int = 0
    out: Path | None = None


def flatten(values: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    """``{"em": {"alpha_init": 1}}`` -> ``{"em.alpha_init": 1}``; dotted keys pass through."""
    flat: dict[str, Any] = {}
    for key, value in values.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def unflatten(values: dict[str, Any]) -> dict[str, Any]:
    nested: dict[str, Any] = {}
    for dotted, value in values.items():
        *parents, leaf = dotted.split(".")
        node = nested
        for part in parents:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"configuration key {dotted!r} conflicts with {part!r}")
            node = child
        if isinstance(node.get(leaf), dict):
            raise ConfigError(f"configuration key {dotted!r} names a whole section")
        node[leaf] = value
    return nested


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a TOML or JSON config file into dotted keys; ``kind`` is dropped."""
    path = Path(path)
    try:
        if path.suffix == ".json":
            data = json.loads(path.read_text())
        else:
            with path.open("rb") as fh:
                data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a table of settings")
    flat = flatten(data)
    flat.pop("kind", None)
    return flat


def parse_value(raw: str) -> Any:
    """JSON literal when it parses (numbers, booleans, lists), the raw string otherwise."""
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_overrides(args: list[str]) -> dict[str, Any]:
    """``--em.alpha_init 0.01`` or ``--em.alpha_init=0.01`` pairs into dotted keys."""
    overrides: dict[str, Any] = {}
    i = 0
    while i < len(args):
        token = args[i]
        if not token.startswith("--") or len(token) == 2:
            raise ConfigError(f"unexpected argument {token!r}")
        key = token[2:]
        if "=" in key:
            key, raw = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(args):
                raise ConfigError(f"missing value for --{key}")
            raw = args[i + 1]
            i += 2
        overrides[key.replace("-", "_")] = parse_value(raw)
    return overrides


def resolve_config(
    kind: str,
    env_name: str,
    file_values: dict[str, Any] | None = None,
    overrides: dict[str, Any] | None = None,
) -> ExperimentConfig:
    """Merge registry defaults, file values and flags (later wins) and validate."""
    values = registry_defaults(env_name)
    values.update(file_values or {})
    values.update(overrides or {})
    values.pop("kind", None)
    values["env.name"] = env_name

    nested = unflatten(values)
    nested["kind"] = kind
    try:
        return ExperimentConfig.model_validate(nested)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        raise ConfigError(f"invalid configuration: {problems}") from exc


def config_to_json(config: ExperimentConfig) -> str:
    data = config.model_dump(mode="json", by_alias=True, exclude={"out"})
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def echo_config(config: ExperimentConfig, out_dir: Path) -> Path:
    """Write ``resolved_config.json``; loading it with ``--config`` reproduces the run."""
    path = Path(out_dir) / RESOLVED_CONFIG_NAME
    path.write_text(config_to_json(config))
    return path
