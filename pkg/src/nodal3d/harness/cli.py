"""Command line: ``nodal3d <experiment> --config <path> [--seed N] [--out DIR] [--threads K]``.

Exit codes: 0 pass, 1 acceptance failure, 2 configuration error,
3 runtime, numerical or I/O error.
"""

import argparse
import sys

from ..errors import ConfigError, Nodal3DError
from .config import EXPERIMENTS, ExperimentConfig, load_config
from .experiments import run_experiment

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def build_parser():
    p = argparse.ArgumentParser(prog="nodal3d", description="Nodal lines of 3-D random waves: experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--out", help="existing output directory for JSON/CSV reports")
    p.add_argument("--threads", type=int, help="worker threads (default: NODAL3D_THREADS or 1)")
    return p




def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        over = {"experiment": args.experiment}
        if args.seed is not None:
            over["master_seed"] = args.seed
        if args.threads is not None:
            over["threads"] = args.threads
        if args.out is not None:
            over["out_dir"] = args.out
        cfg = cfg.replace(**over)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rep = run_experiment(cfg, log=print)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (Nodal3DError, ArithmeticError, OSError, MemoryError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    status = "PASS" if rep["passed"] else "FAIL"
    print(f"{cfg.experiment}: {status} ({rep['seconds']:.1f} s)")
    return EXIT_PASS if rep["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
