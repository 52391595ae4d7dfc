"""
Command-line entry point.

    risbeam run          train and/or solve one scenario
    risbeam sweep-users  sum rate against the number of ground users
    risbeam compare      alpha-fair throughput table across RIS sizes
    risbeam gradcheck    backprop against finite differences
    risbeam selftest     zero-forcing and RIS oracle checks

Exit codes: 0 success, 1 failed check, 2 configuration error,
3 infeasible scenario, 4 numerical failure.
"""

import argparse
import logging
import sys

from . import checks, experiments
from . import config as config_mod
from .errors import ConfigError, InfeasibleError, NumericalError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4

log = logging.getLogger("risbeam")


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="risbeam", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="YAML configuration file")
        p.add_argument("--seed", type=_seed)
        p.add_argument("--out", help="output directory")
        p.add_argument("--scheme", choices=config_mod.SCHEMES)
        p.add_argument("--svg", action="store_true", help="also render SVG figures")
        return p

    experiment("run", "train and/or solve one scenario")
    experiment("sweep-users", "sum rate versus number of ground users")
    experiment("compare", "alpha-fair throughput table")

    g = sub.add_parser("gradcheck", help="finite-difference gradient check")
    g.add_argument("--instances", type=int, default=50)
    g.add_argument("--seed", type=_seed, default=0)
    g.add_argument("--tol", type=float, default=1e-4)

    s = sub.add_parser("selftest", help="zero-forcing and RIS oracle checks")
    s.add_argument("--seed", type=_seed, default=0)
    return parser


def load_experiment(args):
    exp = config_mod.load(args.config) if args.config else config_mod.ExperimentConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.scheme is not None:
        changes["scheme"] = args.scheme
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.svg:
        changes["svg"] = True
    try:
        return exp.replace(**changes) if changes else exp
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _progress(total):
    def report(step, reward):
        if step % 1000 == 0 or step == total:
            log.info("step %d/%d reward %.4f", step, total, reward)
    return report


def _run_experiment(args):
    exp = load_experiment(args)
    if args.command == "run":
        out = experiments.run(exp, progress=_progress(exp.agent.total_steps))
        for scheme, res in out["results"].items():
            print(f"{scheme}: sum rate {res.sum_rate:.6g} bit/s")
    elif args.command == "sweep-users":
        for row in experiments.sweep_users(exp):
            print(",".join(experiments.fmt(v) for v in row))
    else:
        for row in experiments.compare_throughput(exp):
            print(",".join(experiments.fmt(v) for v in row))
    print(f"artifacts written to {exp.output_dir}")
    return EXIT_OK


def _gradcheck(args):
    errors = checks.gradcheck_suite(args.instances, args.seed)
    worst = float(errors.max())
    ok = worst <= args.tol
    print(f"gradcheck: {len(errors)} networks, max relative error {worst:.3e} "
          f"(tolerance {args.tol:g}) {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _selftest(args):
    ok = True
    for name, (value, passed) in checks.selftest(seed=args.seed).items():
        print(f"{name}: {value:.3e} {'PASS' if passed else 'FAIL'}")
        ok &= bool(passed)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gradcheck":
            return _gradcheck(args)
        if args.command == "selftest":
            return _selftest(args)
        return _run_experiment(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
