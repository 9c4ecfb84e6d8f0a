"""Command-line entry point.

Subcommands: ``accuracy``, ``scaling``, ``convergence``, ``gen-scenario``.
CSV goes to ``--out`` (or stdout); a short summary goes to stderr.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure,
3 I/O failure.
"""

import argparse
import logging
import sys

from tosecap import bench
from tosecap.config import ScenarioConfig, load_config
from tosecap.errors import (
    DegenerateSpectrumError,
    GenerationError,
    InvalidParameterError,
    NumericalFailure,
    ReportIOError,
)
from tosecap.geometry import build_scenario
from tosecap.reports import dump_scenario, emit_csv, format_csv

log = logging.getLogger("tosecap")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


def _grid(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _cluster(text):
    if text == "central":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--cluster takes 'central' or a cluster index")


def _common(p):
    p.add_argument("--config", help="key=value file; flags override its values")
    p.add_argument("--beta", type=float)
    p.add_argument("--area", choices=["square", "disk"])
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("-J", "--J", dest="J", type=int, help="total BS count")
    p.add_argument("-M", "--M", dest="M", type=int, help="cluster count")
    p.add_argument("--spike-ratio", type=float)
    p.add_argument("--redraw", choices=["fading", "all"])
    p.add_argument("--out", help="CSV/scenario output path (default: stdout)")
    p.add_argument("--log-base", choices=["e", "2"], default="e")
    p.add_argument("--cluster", type=_cluster, default="central",
                   help="'central' or a cluster index")
    p.add_argument("--form", choices=["full", "gram", "auto"], default="full",
                   help="Cholesky on I+AA* (full) or the smaller Gram form")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="tosecap", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("accuracy", help="TOSE vs Cholesky on one cluster"))
    p = sub.add_parser("scaling", help="runtime vs cluster size")
    _common(p)
    p.add_argument("--jm-grid", type=_grid, default=[100, 200, 400, 800, 1600])
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--include-trace", action="store_true",
                   help="time the trace pass together with the spike arithmetic")
    p = sub.add_parser("convergence", help="entrywise capacity vs TOSE as M grows")
    _common(p)
    p.add_argument("--m-grid", type=_grid, default=[4, 9, 16, 25])
    _common(sub.add_parser("gen-scenario", help="write a clustered layout"))
    return parser


def make_config(args) -> ScenarioConfig:
    base = load_config(args.config) if args.config else ScenarioConfig()
    cfg = base.with_overrides(beta=args.beta, area_shape=args.area, trials=args.trials,
                              seed=args.seed, J=args.J, M=args.M, spike_ratio=args.spike_ratio,
                              redraw_mode=args.redraw)
    return cfg.validate()


def _summarize(records):
    for r in records:
        extra = "" if r.rel_error is None else f" rel_error={r.rel_error:.4f}"
        log.info("%-18s J_m=%-5d K_m=%-5d C=%.6f±%.2g t=%.3gs%s", r.method, r.j_m, r.k_m,
                 r.capacity_mean, r.capacity_std, r.wall_time_s, extra)


def run(args):
    cfg = make_config(args)
    if args.command == "gen-scenario":
        scenario = build_scenario(cfg)
        if args.out:
            dump_scenario(scenario, args.out)
        else:
            sys.stdout.write(f"# central cluster {scenario.central_cluster()}\n")
        return EXIT_OK
    if args.command == "accuracy":
        records = bench.run_accuracy(cfg, args.cluster, args.form)
    elif args.command == "scaling":
        records = bench.run_scaling(cfg, args.jm_grid, args.repeats, args.include_trace,
                                    args.form)
        by_method = {}
        for r in records:
            by_method.setdefault(r.method, []).append(r)
        for method, rs in by_method.items():
            if len(rs) > 1:
                slope = bench.loglog_slope([r.j_m for r in rs], [r.wall_time_s for r in rs])
                log.info("%s log-log slope %.3f", method, slope)
    else:
        records = bench.run_convergence(cfg, args.m_grid, args.cluster, args.form)
    if args.log_base == "2":
        records = bench.to_bits(records)
    _summarize(records)
    if args.out:
        emit_csv(records, args.out)
    else:
        sys.stdout.write(format_csv(records))
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return run(args)
    except (InvalidParameterError, GenerationError) as exc:
        print(f"tosecap: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, DegenerateSpectrumError) as exc:
        print(f"tosecap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ReportIOError as exc:
        print(f"tosecap: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
