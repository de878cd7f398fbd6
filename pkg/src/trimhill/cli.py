"""
Command line interface: ``trimhill <command> ...``.

Exit status: 0 success, 2 usage error, 3 data error, 4 numerical
non-convergence (outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .estimators import averaged_trimmed, hill, log_excesses, trimmed_hill, upper_trimmed_hill
from .io import DataError, ingest, lth_tables, write_values
from .ratio import calibrate, ratio_test
from .samplers import parse_spec, sample
from .simulation import load_config, run_study
from .special import ConvergenceError
from .threshold import CANONICAL_P, select_threshold

LOG = logging.getLogger("trimhill")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NONCONVERGENCE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _data_args(p):
    p.add_argument("data", help="file with one value per line, or a CSV (see --column)")
    p.add_argument("--column", help="CSV column holding the values")
    p.add_argument("--drop-nonpositive", action="store_true", help="discard values <= 0 with a warning")


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _load(args):
    ds = ingest(args.data, column=args.column, drop_nonpositive=args.drop_nonpositive)
    return ds.sample


def cmd_lth_plot(args):
    s = _load(args)
    traj, diag = lth_tables(s, k_list=args.k_list)
    prefix = args.out or "lth"
    Path(f"{prefix}_trajectories.csv").write_text(traj)
    Path(f"{prefix}_diagnostics.csv").write_text(diag)
    LOG.info("wrote %s_trajectories.csv and %s_diagnostics.csv", prefix, prefix)
    return EXIT_OK


def cmd_select(args):
    s = _load(args)
    rep = select_threshold(s, p=args.p, lower_frac=args.lower_frac, lower=args.search_lo, upper=args.search_hi)
    _emit(rep.to_json(indent=2), args.out)
    return EXIT_OK


def cmd_estimate(args):
    s = _load(args)
    result = {}
    k = args.k
    if k is None:
        rep = select_threshold(s, p=args.p, lower_frac=args.lower_frac)
        k = rep.k0_star
        result["k_star"] = rep.k_star
        result["p"] = args.p
    z = log_excesses(s, k)
    if args.estimator == "hill":
        xi = hill(z)
    elif args.estimator == "averaged":
        xi = averaged_trimmed(s, k)
    elif args.estimator == "trimmed":
        if args.b is None:
            raise UsageError("--estimator trimmed needs --b")
        xi = trimmed_hill(z, args.b)
        result["b"] = args.b
    else:
        xi = upper_trimmed_hill(s, args.k0, k)
        result["k0"] = args.k0
    result = {"xi_hat": xi, "k": int(k), "estimator": args.estimator, **result}
    _emit(json.dumps(result, indent=2), args.out)
    return EXIT_OK


def cmd_ratio_test(args):
    s = _load(args)
    cal = calibrate(args.k, n_mc=args.nmc, target=args.alpha, tol=args.tol, seed=args.seed)
    rep = ratio_test(s, args.k, calibration=cal)
    if args.out:
        Path(f"{args.out}.json").write_text(rep.to_json(indent=2) + "\n")
        Path(f"{args.out}.csv").write_text(rep.to_csv())
    else:
        _emit(rep.to_json(indent=2), None)
    if not cal.converged:
        print(
            f"warning: calibration stopped at global level {cal.alpha_global:.4f} (target {cal.target})",
            file=sys.stderr,
        )
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_simulate(args):
    spec = parse_spec(args.spec)
    s = sample(spec, args.n, args.seed)
    if args.out is None or args.out == "-":
        sys.stdout.write("".join(f"{v!r}\n" for v in s.values.tolist()))
    else:
        write_values(args.out, s.values)
    return EXIT_OK


def cmd_study(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    res = run_study(cfg)
    prefix = args.out or Path(args.config).with_suffix("").name
    Path(f"{prefix}.csv").write_text(res.to_csv())
    Path(f"{prefix}_selected.csv").write_text(res.selected_csv())
    Path(f"{prefix}.json").write_text(res.to_json(indent=2) + "\n")
    if res.failures:
        print(f"warning: {len(res.failures)} replicate(s) failed; see {prefix}.json", file=sys.stderr)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="trimhill", description="Lower-trimmed Hill tail-index tools.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lth-plot", help="trajectory and diagnostics tables for LTH plots")
    _data_args(p)
    p.add_argument("--k-list", type=_int_list, help="k values for trajectories (default: 1 to n-1 in n/20 steps)")
    p.add_argument("--out", help="output prefix (default: lth)")
    p.set_defaults(func=cmd_lth_plot)

    p = sub.add_parser("select", help="empirical-variance threshold selection")
    _data_args(p)
    p.add_argument("--p", type=float, default=CANONICAL_P, help="second-order parameter (default -1)")
    p.add_argument("--lower-frac", type=float, default=0.2, help="scan starts at floor(frac * n)")
    p.add_argument("--search-lo", type=int, help="explicit lower end of the k scan (overrides --lower-frac)")
    p.add_argument("--search-hi", type=int, help="upper end of the k scan (default n-1)")
    p.add_argument("--out", help="JSON output file (default stdout)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("estimate", help="tail index estimate at a given k")
    _data_args(p)
    p.add_argument("--k", type=int, help="threshold rank; omitted = selected k0*")
    p.add_argument(
        "--estimator", choices=["hill", "averaged", "trimmed", "upper-trimmed"], default="averaged"
    )
    p.add_argument("--b", type=int, help="trimming level for --estimator trimmed")
    p.add_argument("--k0", type=int, default=0, help="number of top values removed for upper-trimmed")
    p.add_argument("--p", type=float, default=CANONICAL_P)
    p.add_argument("--lower-frac", type=float, default=0.2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("ratio-test", help="Monte Carlo ratio test of a chosen threshold")
    _data_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--nmc", type=int, default=10_000)
    p.add_argument("--alpha", type=float, default=0.05, help="target global level")
    p.add_argument("--tol", type=float, default=0.005)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="prefix for <out>.json and <out>.csv (default: JSON to stdout)")
    p.set_defaults(func=cmd_ratio_test)

    p = sub.add_parser("simulate", help="draw a sample from a distribution spec")
    p.add_argument("spec", help='e.g. "burr:eta=1,tau=0.5,lam=2" or "spliced:xi0=0.25,xi=1,c=1.3"')
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("study", help="replicated simulation study from a config file")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output prefix")
    p.set_defaults(func=cmd_study)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (DataError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"trimhill: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConvergenceError as exc:
        print(f"trimhill: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (UsageError, ValueError, IndexError) as exc:
        print(f"trimhill: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
