from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from .config import settings
from .errors import ConfigError, IsothermicError, SurfaceSpecError
from .models import RunConfig
from .runner import COMMAND_GROUPS, SurfaceRunner
from .stores import report_json

logger = logging.getLogger(__name__)

EXIT_CONFIG_ERROR = 3


def configure_logging(level: str | None = None) -> None:
    """Send diagnostics to stderr at the configured level."""
    resolved = getattr(logging, (level or settings.log_level).upper(), logging.INFO)
    root_logger = logging.getLogger()
    if root_logger.handlers:
        root_logger.setLevel(resolved)
    else:  # pragma: no cover - depends on runtime environment
        logging.basicConfig(
            level=resolved,
            format="%(levelname)-7s [%(name)s] %(message)s",
            stream=sys.stderr,
        )


def apply_overrides(raw: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """Fold command-line flags into a raw config mapping."""
    raw = dict(raw)
    if overrides.get("depth") is not None:
        raw["depth"] = overrides["depth"]
    if overrides.get("grid_n") is not None:
        surface = raw.get("surface") if isinstance(raw.get("surface"), dict) else {}
        grid = dict(raw.get("grid") or surface.get("grid") or {})
        grid["n"] = overrides["grid_n"]
        raw["grid"] = grid
    if overrides.get("tol") is not None:
        raw["tolerances"] = {**(raw.get("tolerances") or {}), "detection": overrides["tol"]}
    if overrides.get("out") is not None:
        raw["output"] = {**(raw.get("output") or {}), "dir": overrides["out"]}
    return raw


def load_config(config_path: str | Path, overrides: dict[str, Any] | None = None) -> RunConfig:
    try:
        raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {config_path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {config_path} must be a JSON object")
    try:
        return RunConfig.model_validate(apply_overrides(raw, overrides or {}))
    except ValidationError as exc:
        raise ConfigError(f"invalid config {config_path}:\n{exc}") from exc


def run(
    config_path: str | Path,
    command: str = "report",
    overrides: dict[str, Any] | None = None,
    emit_json: bool = False,
) -> int:
    """Run one configuration; returns the process exit code."""
    try:
        config = load_config(config_path, overrides)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG_ERROR

    runner = SurfaceRunner(config)
    try:
        report = runner.run(command)
    except SurfaceSpecError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except IsothermicError as exc:
        logger.error("Run failed: %s", exc)
        print(str(exc), file=sys.stderr)
        return 1

    runner.write_outputs(report)
    if emit_json:
        sys.stdout.write(report_json(report))
    for check in report.checks:
        logger.info("%-32s %-12s %s", check.check, check.verdict.value, check.residual)
    return report.exit_code()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isothermic",
        description="Formal conserved quantities and special isothermic detection for profile-curve surfaces.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMAND_GROUPS:
        sub = subparsers.add_parser(command)
        sub.add_argument("--config", required=True, help="path to a run configuration (JSON)")
        sub.add_argument("--depth", type=int, help="series depth D")
        sub.add_argument("--grid-n", type=int, dest="grid_n", help="number of grid samples")
        sub.add_argument("--tol", type=float, help="detection tolerance")
        sub.add_argument("--out", help="output directory")
        sub.add_argument("--json", action="store_true", dest="emit_json", help="also print the report to stdout")
        sub.add_argument("--log-level", dest="log_level", help="logging level (default from settings)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    overrides = {"depth": args.depth, "grid_n": args.grid_n, "tol": args.tol, "out": args.out}
    return run(args.config, args.command, overrides, emit_json=args.emit_json)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
