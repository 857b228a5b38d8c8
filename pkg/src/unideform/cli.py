"""Command line: ``unideform run|validate|list-scenarios``.

Exit codes: 0 all tolerances pass, 1 a tolerance failed, 2 configuration
error, 3 numerical error (singularity, non-convergence, ...).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import (
    KINDS,
    ConfigError,
    ConfigSyntaxError,
    ScenarioConfig,
    Violation,
    apply_overrides,
    load_raw,
    validate_config,
)
from .errors import DeformationError

__all__ = ["RunReport", "run_scenario", "write_csv", "main"]

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("unideform")


@dataclass(frozen=True)
class RunReport:
    scenario: dict
    metrics: dict
    files: list = field(default_factory=list)
    exit_status: int = EXIT_OK
    error: dict = None

    def to_dict(self) -> dict:
        out = {
            "scenario": self.scenario,
            "metrics": self.metrics,
            "files": list(self.files),
            "status": {0: "pass", 1: "tolerance-failed", 2: "config-error", 3: "numerical-error"}[self.exit_status],
            "exit_status": self.exit_status,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path: Path, columns: dict) -> Path:
    """Write equally long columns with a header row, LF line endings and
    17 significant digits."""
    names = list(columns)
    data = [np.asarray(columns[k]) for k in names]
    lengths = {len(c) for c in data}
    if len(lengths) != 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*data):
            w.writerow([_fmt(v) for v in row])
    return path


def run_scenario(config: ScenarioConfig, out_dir=None) -> RunReport:
    """Execute one scenario, write its CSV tables and ``report.json``."""
    from .scenarios import run_config

    out = Path(out_dir if out_dir is not None else config.output["dir"])
    out.mkdir(parents=True, exist_ok=True)
    prefix = config.output["prefix"]
    echo = config.to_dict()
    try:
        result = run_config(config)
    except DeformationError as exc:
        report = RunReport(
            echo,
            {},
            [],
            EXIT_NUMERICAL,
            {"type": type(exc).__name__, "message": f"{config.kind}: {exc}"},
        )
        (out / f"{prefix}_report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        return report
    files = []
    for name, cols in result.tables.items():
        files.append(str(write_csv(out / f"{prefix}_{name}.csv", cols)))
    status = EXIT_OK if result.report.passed else EXIT_TOLERANCE
    report = RunReport(echo, result.report.to_dict(), files, status)
    path = out / f"{prefix}_report.json"
    report_dict = report.to_dict()
    report_dict["files"].append(str(path))
    path.write_text(json.dumps(report_dict, indent=2) + "\n")
    return RunReport(echo, report.metrics, report_dict["files"], status)


def _config_error_json(exc: ConfigError) -> str:
    body = {"error": "config", "violations": [v.to_dict() for v in exc.violations]}
    if isinstance(exc, ConfigSyntaxError):
        body["line"] = exc.line
    return json.dumps(body)


def _load(path: str, overrides=()) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([Violation("config", f"cannot read {path}: {exc.strerror}")]) from None
    raw = load_raw(text)
    return validate_config(apply_overrides(raw, overrides))


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="unideform", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario and write CSV series plus a JSON report")
    run.add_argument("config")
    run.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE", help="e.g. c=2 or numerics.dt=1e-3")
    val = sub.add_parser("validate", help="check a config and print the defaulted result")
    val.add_argument("config")
    sub.add_parser("list-scenarios", help="list scenario kinds")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "list-scenarios":
        for kind, desc in KINDS.items():
            print(f"{kind:16s} {desc}")
        return EXIT_OK
    try:
        config = _load(args.config, getattr(args, "override", ()))
    except ConfigError as exc:
        print(_config_error_json(exc))
        return EXIT_CONFIG
    if args.command == "validate":
        print(json.dumps(config.to_dict(), indent=2))
        return EXIT_OK
    log.info("running %s", config.kind)
    report = run_scenario(config, args.out)
    print(json.dumps(report.to_dict(), indent=2))
    return report.exit_status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
