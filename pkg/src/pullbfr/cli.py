"""Command-line entry point: ``pullbfr run|sweep|validate|fixtures``.

Exit status is 0 on success, 2 for an invalid config or topology, and 1
for any other failure (for example an unwritable output directory).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .config import Config, ConfigError, SweepCfg, load_config
from .harness import run_experiment, sweep_points
from .topology import TopologyError, bundled_topology_path

__all__ = ["main", "build_parser"]

EXAMPLE_CONFIG = """\
# Example experiment: pull-bfr against push-bfr over three Zipf exponents.
strategy = "pull-bfr"
seed = 1

[topology]
path = "geant40.topo"
capacity_scale = 1.0

[catalog]
path = "catalog1000.cat"
segments_per_file = 10

[workload]
alpha = 1.2
files_per_client = 8
think_time_s = 2.0

[bloom]
n = 1000
p = 0.0638

[pull]
delta_ms = 0.4

[push]
f_r = 0.017

[sim]
duration_s = 60

[sweep]
axis = "alpha"
values = [0.6, 1.2, 2.0]
strategies = ["pull-bfr", "push-bfr"]
repetitions = 1

[output]
dir = "out"
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pullbfr",
        description="Simulate pull-based BFR, push-based BFR and flooding-assisted routing on an NDN topology.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add_overrides(p: argparse.ArgumentParser) -> None:
        p.add_argument("config", type=Path, help="TOML experiment file")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--out-dir", type=Path, default=None, help="override [output] dir")

    p_run = sub.add_parser("run", help="run the config's single base point")
    add_overrides(p_run)

    p_sweep = sub.add_parser("sweep", help="run every sweep point and write results.csv")
    add_overrides(p_sweep)
    p_sweep.add_argument("--jobs", type=int, default=None, help="worker processes (default: [sweep] jobs)")

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config", type=Path, help="TOML experiment file")
    p_val.add_argument("--seed", type=int, default=None, help="override the master seed")

    p_fix = sub.add_parser("fixtures", help="write the bundled topology, catalogue and an example config")
    p_fix.add_argument("--out-dir", type=Path, default=Path("fixtures"), help="destination (default: ./fixtures)")
    return parser


def _load(path: Path, seed: Optional[int]) -> Config:
    cfg = load_config(path)
    if seed is not None:
        if seed < 0:
            raise ConfigError(["--seed must be >= 0"], str(path))
        cfg = replace(cfg, seed=seed)
    return cfg


def _cmd_run(args) -> int:
    cfg = replace(_load(args.config, args.seed), sweep=SweepCfg())
    csv_path = run_experiment(cfg, args.out_dir, jobs=1)
    print(f"wrote {csv_path}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args.config, args.seed)
    if args.jobs is not None and args.jobs < 1:
        raise ConfigError(["--jobs must be >= 1"], str(args.config))
    csv_path = run_experiment(cfg, args.out_dir, jobs=args.jobs)
    print(f"wrote {csv_path} ({len(sweep_points(cfg))} points)")
    return 0


def _cmd_validate(args) -> int:
    cfg = _load(args.config, args.seed)
    n = len(sweep_points(cfg))
    print(f"{args.config}: ok ({n} point{'s' if n != 1 else ''})")
    return 0


def _cmd_fixtures(args) -> int:
    out: Path = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    for name in ("geant40.topo", "catalog1000.cat"):
        (out / name).write_text(bundled_topology_path(name).read_text())
    (out / "example.toml").write_text(EXAMPLE_CONFIG)
    for name in ("geant40.topo", "catalog1000.cat", "example.toml"):
        print(out / name)
    return 0


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "validate": _cmd_validate, "fixtures": _cmd_fixtures}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"pullbfr: invalid config: {exc}", file=sys.stderr)
        return 2
    except TopologyError as exc:
        print(f"pullbfr: invalid topology or catalogue: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        where = f" ({exc.filename})" if getattr(exc, "filename", None) else ""
        print(f"pullbfr: {exc.strerror or exc}{where}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print("pullbfr: interrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
