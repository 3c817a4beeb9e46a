"""Command line entry point: run, validate, list-experiments."""

from __future__ import annotations

import argparse
import sys

from .basis import GaugeConstraintError
from .experiments import (
    EXPERIMENTS,
    ConfigError,
    ExperimentError,
    parse_config_text,
    run_experiment,
)


def _read_config(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="schwinger-qlm",
        description="Constrained-chain circuit experiments driven by config files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute the experiment named in a config file")
    p_run.add_argument("config", help="path to a key = value config file")
    p_val = sub.add_parser("validate", help="check a config file without running it")
    p_val.add_argument("config", help="path to a key = value config file")
    sub.add_parser("list-experiments", help="print the available experiment names")
    args = parser.parse_args(argv)

    if args.command == "list-experiments":
        for name in sorted(EXPERIMENTS):
            print(f"{name:24s} {EXPERIMENTS[name]}")
        return 0

    try:
        text = _read_config(args.config)
        config = parse_config_text(text)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        print(f"OK: {config.experiment} (L={config.length}, tau={config.tau}, "
              f"T={config.total_time}, seed={config.seed})")
        return 0

    try:
        manifest = run_experiment(config, config_text=text)
    except (ExperimentError, GaugeConstraintError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{config.experiment}: wrote {len(manifest['outputs'])} output file(s) "
          f"+ manifest.json in {config.output_dir}")
    for entry in manifest["outputs"]:
        print(f"  {entry['path']}  sha256={entry['sha256'][:12]}…")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
