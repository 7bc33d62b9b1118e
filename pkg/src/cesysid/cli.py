"""Command-line interface: ``cesysid {simulate,identify,ce,version}``."""

from __future__ import annotations

import argparse
import hashlib
import logging
import os
import sys
from fractions import Fraction

from . import __version__
from .copula import DEFAULT_K, copula_entropy
from .dynsys import get_system, random_initial_state, SimConfig, integrate_rk4, available_systems
from .errors import CESysIdError
from .identify import PermutationConfig, identify
from .io import (
    read_config_file,
    read_matrix_csv,
    read_trajectory_csv,
    write_report,
    write_trajectory_csv,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3
SEED_ENV = "CESYSID_SEED"

log = logging.getLogger("cesysid")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def real(text):
    """Decimal or exact fraction such as ``8/3``."""
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a real number: {text!r}") from None


def seed_int(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits: {text!r}")
    return value


def real_list(text):
    return [real(s) for s in text.split(",") if s.strip()]


def key_value(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), real(value)


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return seed_int(raw)
    except argparse.ArgumentTypeError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not a valid seed") from None


def _add_sim_args(p):
    g = p.add_argument_group("simulation")
    g.add_argument("--system", default="lorenz", help=f"built-in system ({', '.join(available_systems())})")
    g.add_argument("--sigma", type=real, help="Lorenz sigma (default 10)")
    g.add_argument("--rho", type=real, help="Lorenz rho (default 28)")
    g.add_argument("--beta", type=real, help="Lorenz beta, decimal or fraction like 8/3")
    g.add_argument("--param", type=key_value, action="append", default=[], metavar="NAME=VALUE",
                   help="any system parameter; repeatable")
    g.add_argument("--horizon", type=real, default=30.0)
    g.add_argument("--rate", type=int, default=100, help="samples per unit time")
    g.add_argument("--t0", type=real, default=0.0)
    g.add_argument("--burn-in", type=real, default=0.0)
    g.add_argument("--x0", type=real_list, help="initial state, comma separated")
    g.add_argument("--low", type=real, default=-10.0, help="lower bound for random start")
    g.add_argument("--high", type=real, default=10.0, help="upper bound for random start")
    g.add_argument("--seed", type=seed_int, default=None, help=f"RNG seed (default ${SEED_ENV} or 0)")


def build_parser():
    parser = _Parser(prog="cesysid", description="Identify governing-equation terms by copula entropy.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("simulate", help="simulate a system to a trajectory CSV")
    _add_sim_args(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--figures", metavar="DIR", help="also render trajectory figures into DIR")
    p.add_argument("--config", metavar="FILE", help="key=value defaults; flags override")

    p = sub.add_parser("identify", help="rank candidate terms for each derivative")
    p.add_argument("-i", "--input", help="trajectory CSV (time first); simulate inline if omitted")
    _add_sim_args(p)
    p.add_argument("--terms", default="paper", help='"paper", "degree:N" or a list like "x,y,xz"')
    p.add_argument("-k", type=int, default=DEFAULT_K, help="neighbour count")
    p.add_argument("--permutations", "-B", type=int, default=0,
                   help="permutation count for p-values (0 disables)")
    p.add_argument("--alpha", type=real, default=0.05)
    p.add_argument("--perm-seed", type=seed_int, default=None, help="permutation seed (default --seed)")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for scoring")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", choices=("json", "csv"), help="default from the output extension")
    p.add_argument("--csv", metavar="FILE", help="also write the long-format CSV here")
    p.add_argument("--figures", metavar="DIR", help="also render the MI bar chart into DIR")
    p.add_argument("--config", metavar="FILE", help="key=value defaults; flags override")

    p = sub.add_parser("ce", help="copula entropy of the columns of a CSV matrix")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-k", type=int, default=DEFAULT_K)
    p.add_argument("--columns", help="comma-separated column names (default all)")
    p.add_argument("--config", metavar="FILE", help="key=value defaults; flags override")

    sub.add_parser("version", help="print the version")
    return parser, sub


def parse_args(argv):
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sp = sub.choices[args.command]
        values = read_config_file(args.config)
        dests = {a.dest: a for a in sp._actions}
        unknown = sorted(set(values) - set(dests) - {"config"})
        if unknown:
            raise UsageError(f"unknown config keys in {args.config}: {', '.join(unknown)}")
        defaults = {}
        for key, value in values.items():
            action = dests.get(key)
            if action is None:
                continue
            if isinstance(action, argparse._StoreTrueAction):
                defaults[key] = value.lower() in ("1", "true", "yes", "on")
            elif isinstance(action, argparse._AppendAction):
                defaults[key] = [action.type(v) for v in value.split(";") if v.strip()]
            else:
                defaults[key] = value
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    if getattr(args, "seed", "absent") is None:
        args.seed = _default_seed()
    return args


def effective_config(args):
    cfg = {}
    for key, value in sorted(vars(args).items()):
        if key == "param":
            value = {k: v for k, v in value}
        cfg[key] = value
    return cfg


def _system_params(args):
    params = dict(args.param)
    for name in ("sigma", "rho", "beta"):
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    return params


def _simulate(args):
    spec = get_system(args.system, **_system_params(args))
    x0 = args.x0 if args.x0 is not None else random_initial_state(args.seed, spec.dim, args.low, args.high)
    config = SimConfig(x0, args.horizon, args.rate, args.t0, args.seed, args.burn_in)
    traj = integrate_rk4(spec, config)
    sim_meta = {
        "system": spec.name,
        "params": dict(spec.params),
        "initial_state": list(config.initial_state),
        "t0": config.t0,
        "horizon": config.horizon,
        "sample_rate": config.sample_rate,
        "burn_in": config.burn_in,
        "seed": config.seed,
    }
    return traj, sim_meta


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def cmd_simulate(args, argv):
    traj, _ = _simulate(args)
    write_trajectory_csv(traj, args.output)
    if args.figures:
        from .plotting import render_trajectory_figures

        render_trajectory_figures(traj, args.figures)
    print(f"wrote {len(traj)} samples to {args.output}")
    return EXIT_OK


def cmd_identify(args, argv):
    if args.input:
        traj = read_trajectory_csv(args.input)
        source = {"input": args.input, "sha256": _sha256(args.input)}
    else:
        traj, sim_meta = _simulate(args)
        source = {"simulation": sim_meta}
    perm = None
    if args.permutations:
        perm = PermutationConfig(args.permutations, args.alpha,
                                 args.seed if args.perm_seed is None else args.perm_seed)
    meta = {
        "source": source,
        "command_line": ["cesysid", *argv],
        "config": effective_config(args),
        "version": __version__,
    }
    report = identify(traj, args.terms, args.k, perm, metadata=meta, n_jobs=args.jobs)
    fmt = args.format or ("csv" if args.output.lower().endswith(".csv") else "json")
    write_report(report, args.output, fmt)
    if args.csv:
        write_report(report, args.csv, "csv")
    if args.figures:
        from .plotting import render_report_figures

        render_report_figures(report, args.figures)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for name, ranked in report.rankings.items():
        top = ", ".join(r.term for r in ranked[:3] if r.rank is not None) or "n/a"
        print(f"{name}: {top}")
    return EXIT_OK


def cmd_ce(args, argv):
    header, data, _ = read_matrix_csv(args.input)
    if args.columns:
        wanted = [c.strip() for c in args.columns.split(",") if c.strip()]
        missing = [c for c in wanted if c not in header]
        if missing:
            raise UsageError(f"unknown columns: {', '.join(missing)}")
        data = data[:, [header.index(c) for c in wanted]]
    est = copula_entropy(data, args.k)
    print(f"ce_nats={est.ce_nats!r}")
    print(f"mi_nats={est.mi_nats!r}")
    print(f"k={est.k}")
    print(f"n_samples={est.n_samples}")
    print(f"dims={est.dims}")
    return EXIT_OK


def cmd_version(args, argv):
    print(f"cesysid {__version__}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "identify": cmd_identify, "ce": cmd_ce, "version": cmd_version}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args, argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help exits 0 through argparse
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except CESysIdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL if exc.category == "numerical" else EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
