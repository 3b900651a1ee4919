"""Command-line entry point.

Subcommands::

    i2c lqr [ENV]                         dynamic-programming LQR gains
    i2c lqr-equiv [ENV]                   i2c gains against LQR gains
    i2c trajopt ENV                       EM trajectory optimization
    i2c eval ENV CONTROLLER_JSON          Monte-Carlo evaluation of a controller

Any configuration key can be overridden as ``--section.key VALUE``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any

from dotenv import load_dotenv
from pydantic import ValidationError

from input_inference.cli import experiments
from input_inference.cli.artifacts import write_json
from input_inference.cli.config import (
    ExperimentConfig,
    echo_config,
    load_config_file,
    parse_overrides,
    resolve_config,
)
from input_inference.errors import EMAbortedError, I2CError
from input_inference.logging.logger import setup_logger
from input_inference.settings import get_settings

logger = logging.getLogger("input_inference")

_KINDS = {"lqr": "lqr", "lqr-equiv": "lqr_equiv", "trajopt": "trajopt", "eval": "eval"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="i2c", description="Input inference for control: experiments and evaluation."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML or JSON configuration file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--trials", type=int, help="number of evaluation trials")
    common.add_argument("--max-iters", type=int, help="maximum EM iterations")

    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("lqr", "lqr-equiv"):
        cmd = sub.add_parser(name, parents=[common])
        cmd.add_argument("env", nargs="?", default="linear_c1")
    sub.add_parser("trajopt", parents=[common]).add_argument("env")
    cmd = sub.add_parser("eval", parents=[common])
    cmd.add_argument("env")
    cmd.add_argument("controller", type=Path)
    return parser


def split_overrides(argv: list[str]) -> tuple[list[str], list[str]]:
    """Separate dotted ``--section.key VALUE`` tokens from the regular arguments."""
    regular: list[str] = []
    dotted: list[str] = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token.startswith("--") and "." in token[2:].split("=", 1)[0]:
            take = 1 if "=" in token else 2
            dotted.extend(argv[i : i + take])
            i += take
        else:
            regular.append(token)
            i += 1
    return regular, dotted


def _named_overrides(args: argparse.Namespace) -> dict[str, Any]:
    named = {
        "seed": args.seed,
        "out": None if args.out is None else str(args.out),
        "eval.n_trials": args.trials,
        "em.max_iters": args.max_iters,
    }
    return {key: value for key, value in named.items() if value is not None}


def _dispatch(args: argparse.Namespace, config: ExperimentConfig, out: Path) -> None:
    if config.kind == "lqr":
        experiments.run_lqr(config, out)
    elif config.kind == "lqr_equiv":
        experiments.run_lqr_equiv(config, out)
    elif config.kind == "trajopt":
        experiments.run_trajopt(config, out)
    else:
        experiments.run_eval(config, args.controller, out)


def main(argv: list[str] | None = None) -> int:
    """Run one experiment and return the process exit status."""
    load_dotenv()
    try:
        settings = get_settings()
    except ValidationError as exc:
        setup_logger()
        logger.error("invalid runtime settings: %s", exc)
        return 2
    setup_logger(level=settings.log_level)

    regular, dotted = split_overrides(sys.argv[1:] if argv is None else list(argv))
    args = build_parser().parse_args(regular)
    kind = _KINDS[args.command]
    try:
        overrides = parse_overrides(dotted)
        overrides.update(_named_overrides(args))
        file_values = load_config_file(args.config) if args.config else {}
        config = resolve_config(kind, args.env, file_values, overrides)
    except I2CError as exc:
        logger.error("%s", exc)
        return exc.exit_code

    out = config.out or settings.output_dir / f"{kind}_{config.env.name}"
    out.mkdir(parents=True, exist_ok=True)
    echo_config(config, out)

    status: dict[str, Any] = {"kind": kind, "env": config.env.name}
    try:
        _dispatch(args, config, out)
    except I2CError as exc:
        logger.error("%s", exc)
        status.update(status="error", exit_code=exc.exit_code, error=str(exc))
        if isinstance(exc, EMAbortedError):
            status.update(status="aborted", iteration=exc.iteration)
        write_json(out / "status.json", status)
        return exc.exit_code

    status.update(status="ok", exit_code=0)
    write_json(out / "status.json", status)
    return 0
