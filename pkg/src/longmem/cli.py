"""``longmem`` command line: simulate, estimate, expected.

Exit status: 0 on success, 1 on usage or validation errors, 2 on runtime failures.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

from . import __version__
from .baselines import FORMULAS, SUMMANDS, DEFAULT_SUMMAND, expected_curve, expected_hurst
from .distributions import ParameterError
from .estimators import DEFAULT_DDOF, METHODS, EstimationError, build_grid, estimate_hurst
from .harness import ConfigError, resolve_workers, run_experiment, summarize
from .io import SeriesFormatError, load_series, parse_config, write_outputs

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _min_power(min_scale: int) -> int:
    if min_scale < 2 or min_scale & (min_scale - 1):
        raise ValueError(f"--min-scale must be a power of two >= 2, got {min_scale}")
    return min_scale.bit_length() - 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="longmem", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run a Monte Carlo experiment grid")
    sim.add_argument("--config", required=True, help="experiment config (JSON)")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--dump-estimates", action="store_true", help="also write per-replication estimates.csv")
    sim.add_argument("--paper-format", action="store_true", help="round summary values to 4 decimals")
    sim.add_argument("--workers", type=int, default=None,
                     help="worker processes (default: $LONGMEM_WORKERS or CPU count)")

    est = sub.add_parser("estimate", help="estimate H for a series stored in a text file")
    est.add_argument("--input", required=True)
    est.add_argument("--kind", choices=("levels", "increments"), default="increments")
    est.add_argument("--method", choices=METHODS, default="rs")
    est.add_argument("--min-scale", type=int, default=32)
    est.add_argument("--ddof", type=int, choices=(0, 1), default=DEFAULT_DDOF,
                     help="variance denominator is window - ddof (default %(default)s)")

    exp = sub.add_parser("expected", help="finite-sample expected R/S and E(H) under independence")
    exp.add_argument("--length", type=int, required=True)
    exp.add_argument("--formula", choices=FORMULAS, default="anis-lloyd")
    exp.add_argument("--summand", choices=SUMMANDS, default=DEFAULT_SUMMAND)
    exp.add_argument("--min-scale", type=int, default=32)
    return parser


def _simulate(args) -> int:
    config = parse_config(args.config)
    workers = resolve_workers(args.workers)
    log = logging.getLogger("longmem")
    log.info("running %d cells x %d replications on %d workers",
             len(config.cells()), config.replications, workers)
    start = time.perf_counter()
    results = run_experiment(config, workers=workers)
    rows = summarize(results, config.p_min, config.baseline, config.summand)
    wall = time.perf_counter() - start
    paths = write_outputs(rows, args.out, config=config, results=results,
                          dump_estimates=args.dump_estimates, paper_format=args.paper_format,
                          wall_time=round(wall, 3), extra={"workers": workers})
    print(f"wrote {', '.join(str(p) for p in paths.values())} in {wall:.1f}s")
    failed = [r.cell.labels for r in results if r.failed]
    if failed:
        print(f"{len(failed)} cell(s) exceeded the failure limit: {failed}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _estimate(args) -> int:
    x = load_series(args.input, args.kind)
    est = estimate_hurst(x, method=args.method, p_min=_min_power(args.min_scale), ddof=args.ddof)
    print(f"method\t{est.method}")
    print(f"H\t{est.hurst!r}")
    print(f"intercept\t{est.intercept!r}")
    print(f"scales\t{' '.join(str(s) for s in est.scales)}")
    print(f"analysed\t{est.analysed_length}")
    if est.analysed_length != est.truncated_from:
        print(f"truncated\t{est.truncated_from} -> {est.analysed_length}")
    return EXIT_OK


def _expected(args) -> int:
    p_min = _min_power(args.min_scale)
    try:
        build_grid(args.length, p_min)
    except EstimationError as exc:
        raise ValueError(f"--length: {exc}") from None
    print("scale\texpected_rs")
    for scale, value in expected_curve(args.length, p_min, args.formula, args.summand):
        print(f"{scale}\t{value!r}")
    print(f"E(H)\t{expected_hurst(args.length, p_min, args.formula, args.summand)!r}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"simulate": _simulate, "estimate": _estimate, "expected": _expected}[args.command]
    try:
        return handler(args)
    except (ConfigError, ParameterError, SeriesFormatError, FileNotFoundError, ValueError) as exc:
        # EstimationError subclasses ValueError but is a runtime condition
        if isinstance(exc, EstimationError):
            print(f"longmem: estimation failed: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"longmem: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"longmem: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
