"""Command-line entry point: ``ctev <subcommand> --config <path> [--out DIR] [--seed N]``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import EXPERIMENTS, load_config
from .exceptions import ConfigError
from .experiments import ExperimentOutput, run_experiment

log = logging.getLogger("ctev")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctev", description="Conductive transmission eigenvalue experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the '{name}' experiment")
        p.add_argument("--config", required=True, help="TOML experiment file")
        p.add_argument("--out", default=None, help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, default=0, help="seed for noisy runs")
    return parser


def write_outputs(result: ExperimentOutput, out_dir: Path, cfg) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for t in result.tables:
        path = out_dir / f"{t.name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(t.header)
            w.writerows(t.formatted())
        written.append(path.name)
    for name, writer in sorted(result.files.items()):
        writer(out_dir / name)
        written.append(name)
    (out_dir / "summary.json").write_text(json.dumps(result.summary, indent=2, sort_keys=True, default=str) + "\n")
    manifest = {
        "experiment": cfg.experiment,
        "config": cfg.source,
        "config_sha256": cfg.sha256,
        "version": __version__,
        "passed": result.passed,
        "outputs": written + ["summary.json"],
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return written


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    if cfg.experiment != args.command:
        print(f"config error: experiment: file is for '{cfg.experiment}', not '{args.command}'", file=sys.stderr)
        return 2
    out_dir = Path(args.out or cfg.output_dir)
    try:
        result = run_experiment(cfg, seed=args.seed)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, ValueError) as err:
        print(f"{cfg.experiment} ({cfg.source}): {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    write_outputs(result, out_dir, cfg)
    for t in result.tables:
        log.info("wrote %s.csv (%d rows)", t.name, len(t.rows))
    status = "ok" if result.passed else "FAILED"
    print(f"{cfg.experiment}: {status} -> {out_dir}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
