"""Command-line entry point.

Exit codes: 0 success, 1 runtime failure (see ``errors.log`` in the output
directory), 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from magres.errors import ConfigError
from magres.experiments import MODES, RESERVOIRS, TASKS, ExperimentConfig, load_config_file, run_experiment
from magres.tasks import write_laser_file

log = logging.getLogger("magres")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magres", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON config file, or a result file with an embedded config")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--reservoir", choices=RESERVOIRS)
    p.add_argument("--material")
    p.add_argument("--grid-side", type=int)
    p.add_argument("--task", choices=TASKS)
    p.add_argument("--temp-k", type=float)
    p.add_argument("--thickness-nm", type=float)
    p.add_argument("--dt", dest="dt_fs", type=float, help="integrator step in fs (1 or 100)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--laser-file")
    p.add_argument("--budget", choices=("desk", "paper"))
    p.add_argument("--paper-scale", action="store_const", const="paper", dest="budget",
                   help="full protocol: pop 100, 2000 tournaments, 20 runs")
    p.add_argument("--pop", type=int)
    p.add_argument("--tournaments", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--batches", type=int)
    p.add_argument("--configs", type=int, help="random configs per timestep comparison")
    p.add_argument("--jobs", type=int)
    p.add_argument("--narma-length", type=int, help="NARMA sequence length (default 5000)")
    p.add_argument("--temperatures", type=_floats, help="comma list in K")
    p.add_argument("--thicknesses", type=_floats, help="comma list in nm")
    p.add_argument("--sides", type=_ints, help="comma list of grid sides for sweep-scaling")
    p.add_argument("--genome-file")
    p.add_argument("--with-metrics", action="store_true", default=None)
    p.add_argument("--literal-delta", action="store_true", default=None)
    p.add_argument("--evolve-weights", action="store_true", default=None)
    p.add_argument("--snapshot-components")
    p.add_argument("--write-synthetic-laser", metavar="PATH",
                   help="write a synthetic stand-in laser file and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    data = load_config_file(args.config) if args.config else {}
    skip = {"config", "verbose", "write_synthetic_laser"}
    for key, value in vars(args).items():
        if key not in skip and value is not None:
            data[key] = value
    # budget-dependent counts are re-derived unless given explicitly
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.write_synthetic_laser:
        write_laser_file(args.write_synthetic_laser)
        return 0
    try:
        cfg = resolve_config(args).validate()
    except (ConfigError, TypeError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        errors = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        log.exception("experiment failed")
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1
    if errors:
        print(f"{len(errors)} run(s) failed; see {cfg.out}/errors.log", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
