"""habitmfg solve|figures|converge|nashgap --config <path> [--out DIR] [--seed N] [--threads K]"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import experiments
from .config import parse_config
from .errors import ConfigurationError, DomainError, InfeasibilityError, SolverError

log = logging.getLogger("habitmfg")

EXIT_CONFIG, EXIT_SOLVER, EXIT_INFEASIBLE = 2, 3, 4


def build_parser():
    ap = argparse.ArgumentParser(prog="habitmfg", description="Mean field habit-formation games")
    ap.add_argument("command", choices=("solve", "figures", "converge", "nashgap"))
    ap.add_argument("--config", required=True, help="key = value config file")
    ap.add_argument("--out", default=None, help="output directory (default: config 'out' or .)")
    ap.add_argument("--seed", type=int, default=None, help="master seed (unsigned 64-bit)")
    ap.add_argument("--threads", type=int, default=None, help="worker threads for simulation")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    threads = args.threads or 1
    if os.environ.get("HABITMFG_THREADS"):
        threads = int(os.environ["HABITMFG_THREADS"])
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigurationError("--seed must be an unsigned 64-bit integer", key="seed")
        cfg = parse_config(args.config, overrides={"seed": args.seed})
        out = args.out
        if args.command == "solve":
            paths = experiments.cmd_solve(cfg, out)
        elif args.command == "figures":
            paths = experiments.cmd_figures(cfg, out)
        elif args.command == "converge":
            paths, _ = experiments.cmd_converge(cfg, out, threads)
        else:
            paths, _ = experiments.cmd_nashgap(cfg, out, threads)
    except (ConfigurationError, DomainError) as exc:
        print(f"habitmfg: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"habitmfg: solver did not converge: {exc} (residual={exc.residual:.3e}, "
              f"iterations={exc.iterations})", file=sys.stderr)
        return EXIT_SOLVER
    except InfeasibilityError as exc:
        print(f"habitmfg: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
