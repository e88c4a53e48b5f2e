"""Command-line front end: ``harmonic-chain <command> [flags]``.

Exit codes: 0 success (or member verdict), 2 non-member, 3 inconclusive,
64 malformed input, 65 solver not applicable, 1 a failed verification.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import acceptance, bounds, dynamics, spectral
from .bessel import bessel_j_table, integral_G_table
from .lattice import parse_ic
from .reports import dumps, write_csv, write_json

EXIT_OK, EXIT_FAIL, EXIT_NONMEMBER, EXIT_INCONCLUSIVE = 0, 1, 2, 3
EXIT_USAGE, EXIT_DATAERR = 64, 65

_VERDICT_EXIT = {"MemberByFiniteSupport": EXIT_OK, "MemberBySufficientCondition": EXIT_OK,
                 "NonMember": EXIT_NONMEMBER, "Inconclusive": EXIT_INCONCLUSIVE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_range(text, integer=False):
    """``a:b[:step]`` (inclusive) or a comma list into an array."""
    text = str(text).strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) == 2:
            parts.append(1.0)
        a, b, step = parts
        if step <= 0:
            raise ValueError("range step must be positive")
        vals = np.arange(a, b + step * 1e-9, step)
    else:
        vals = np.array([float(p) for p in text.split(",") if p.strip()])
    return vals.astype(np.int64) if integer else vals


def _emit(args, payload, csv_columns=None, csv_rows=None, default_name="report"):
    """Write ``payload`` as JSON (or rows as CSV) to --out, stdout if unset."""
    header = effective_config(args)
    out = args.out
    if out not in (None, "-") and os.path.isdir(out):
        out = os.path.join(out, default_name + (".csv" if args.format == "csv" else ".json"))
    if args.format == "csv" and csv_columns is not None:
        text = write_csv(out, csv_columns, csv_rows, header)
    else:
        text = write_json(out, {"config": header, "result": payload})
    if out in (None, "-"):
        sys.stdout.write(text)


def effective_config(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "config", "out") and v is not None}
    return cfg


# ----------------------------------------------------------------------
# commands

def cmd_classify(args):
    ic = parse_ic(args.ic)
    rep = spectral.classify(ic)
    rows = [(d, v) for d, v in rep.integrability_trace]
    _emit(args, rep.to_dict(), ("delta", "int_phi"), rows, "classification")
    return _VERDICT_EXIT[rep.verdict]


def cmd_simulate(args):
    ic = parse_ic(args.ic)
    solver = dynamics.canonical_solver(args.solver)
    idx = parse_range(args.indices, integer=True)
    times = np.linspace(0.0, args.T, max(1, int(round(args.T / args.dt_report))) + 1)
    applicable = dynamics.applicable_solvers(ic)
    if solver not in applicable:
        raise dynamics.SolverNotApplicable(
            f"solver {solver} does not apply to {ic.rule}", alternatives=applicable)
    traj = dynamics.solve(ic, args.omega, times, idx, solver, dt=args.dt)
    header = dict(effective_config(args), run=traj.header())
    if args.out in (None, "-"):
        if args.format == "json":
            sys.stdout.write(dumps({"config": header, "times": traj.times,
                                    "indices": traj.indices, "q": traj.q}))
        else:
            sys.stdout.write(traj.to_csv(None, header))
        return EXIT_OK
    os.makedirs(args.out, exist_ok=True)
    traj.to_csv(os.path.join(args.out, "trajectory.csv"), header)
    for k in traj.indices:
        traj.plot_text(int(k), os.path.join(args.out, f"q_{int(k)}.txt"), header)
    write_json(os.path.join(args.out, "meta.json"), header)
    return EXIT_OK


def cmd_limits(args):
    ic = parse_ic(args.ic)
    res = spectral.limits_for_ic(ic)
    _emit(args, res.to_dict(), ("L_plus", "L_minus", "nu", "c", "A"),
          [(res.L_plus, res.L_minus, res.nu, res.c, res.A)], "limits")
    return EXIT_OK


def _n_values(args, default_lo=0):
    if args.n_range is not None:
        return parse_range(args.n_range, integer=True)
    return np.arange(default_lo, args.n_max + 1)


def _t_values(args):
    if args.t_range is not None:
        return parse_range(args.t_range)
    return np.arange(0.0, args.t_max + 1e-9, args.step)


def cmd_bounds(args):
    target = args.target
    if target == "RegimeC":
        if args.regime is None:
            raise UsageError("--target RegimeC needs --regime")
        gammas = parse_range(args.gamma) if args.gamma else acceptance.REGIME_GRIDS[args.regime]
        ns = _n_values(args, 10)
        ns = ns[ns > 0]
        rep = bounds.regime_sweep(args.regime, ns, gammas, quantity=args.quantity)
    elif target == "V_n":
        ns = _n_values(args, 2)
        rep = bounds.sweep("V_n", ns[ns >= 2])
    else:
        lo = 1 if target == "AltSums" else 0
        ns = _n_values(args, lo)
        if target == "AltSums":
            ns = ns[ns >= 1]
        second = parse_range(args.gamma) - 1.0 if target == "L_n" and args.gamma else _t_values(args)
        rep = bounds.sweep(target, ns, second)
    _emit(args, rep.to_dict(include_grid=args.full), ("n", "t", "value"), rep.csv_rows(),
          "bounds")
    return EXIT_OK if rep.verdict in ("PASS", "INFORMATIONAL") else EXIT_FAIL


def cmd_bessel(args):
    ns = _n_values(args, 0)
    ts = _t_values(args)
    if ts[0] != 0.0:
        raise UsageError("the t range must start at 0 (G_n accumulates from 0)")
    J = bessel_j_table(int(ns.max()), ts)[ns]
    G = integral_G_table(int(ns.max()), ts)[ns]
    summary = {"J_sup": float(np.max(np.abs(J))), "G_sup": float(np.max(np.abs(G)))}
    i, j = np.unravel_index(int(np.argmax(np.abs(G))), G.shape)
    summary["G_argmax"] = [int(ns[i]), float(ts[j])]
    if args.format == "csv":
        rows = [(int(n), t, J[a, b], G[a, b]) for a, n in enumerate(ns) for b, t in enumerate(ts)]
        _emit(args, summary, ("n", "t", "J_n", "G_n"), rows, "bessel")
    else:
        _emit(args, summary, default_name="bessel")
    return EXIT_OK


def cmd_verify(args):
    only = [int(v) for v in parse_range(args.only, integer=True)] if args.only else None
    results = acceptance.run_criteria(only)
    table = acceptance.format_table(results)
    payload = {"all_passed": all(r.passed for r in results),
               "criteria": [r.to_dict() for r in results]}
    if args.out not in (None, "-"):
        _emit(args, payload, default_name="verify")
    sys.stdout.write(table + "\n")
    return EXIT_OK if payload["all_passed"] else EXIT_FAIL


# ----------------------------------------------------------------------
# parser

def _common(p):
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--out", default=None, help="output file or directory (default stdout)")
    p.add_argument("--config", default=None, help="JSON file of defaults; flags override it")


def build_parser():
    parser = _Parser(prog="harmonic-chain",
                     description="Infinite harmonic chain: trajectories, spectral "
                                 "classification and oscillatory bound sweeps.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("classify", help="l^Delta membership evidence for an initial condition")
    p.add_argument("--ic")
    _common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="trajectory of the chain")
    p.add_argument("--ic")
    p.add_argument("--omega", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float, help="ODE time step")
    p.add_argument("--dt-report", dest="dt_report", type=float)
    p.add_argument("--solver")
    p.add_argument("--indices")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("limits", help="A, L+, L- and nu of a member sequence")
    p.add_argument("--ic")
    _common(p)
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("bounds", help="supremum sweeps of the oscillatory integrals")
    p.add_argument("--target", choices=bounds.TARGETS)
    p.add_argument("--regime", choices=bounds.REGIMES)
    p.add_argument("--quantity", choices=("C", "L"))
    p.add_argument("--n-range", dest="n_range")
    p.add_argument("--t-range", dest="t_range")
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--gamma", help="gamma values a:b:step or a comma list")
    p.add_argument("--full", action="store_const", const=True, default=None,
                   help="include every grid point in the JSON")
    _common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("bessel", help="table of J_n(t) and G_n(t)")
    p.add_argument("--n-range", dest="n_range")
    p.add_argument("--t-range", dest="t_range")
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--step", type=float)
    _common(p)
    p.set_defaults(func=cmd_bessel)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", help="criterion numbers, e.g. 1,2,5 or 1:4")
    _common(p)
    p.set_defaults(func=cmd_verify)
    return parser


DEFAULTS = {
    "classify": {"ic": "sign", "format": "json"},
    "simulate": {"ic": "sign", "omega": 0.5, "T": 100.0, "dt_report": 0.1,
                 "solver": "ode", "indices": "10,20", "format": "csv"},
    "limits": {"ic": "sign", "format": "json"},
    "bounds": {"target": "G_n", "n_max": 200, "t_max": 400.0, "step": 0.5,
               "full": False, "format": "json"},
    "bessel": {"n_max": 20, "t_max": 50.0, "step": 0.5, "format": "csv"},
    "verify": {"format": "json"},
}


# config-file spellings accepted besides the flag names
_CONFIG_ALIASES = {"gamma_list": "gamma"}


def parse_args(argv):
    """Parse flags over config-file values over built-in defaults."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError(parser.format_usage().strip())
    merged = dict(DEFAULTS[args.command])
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if "config" in cfg and isinstance(cfg["config"], dict):
            cfg = cfg["config"]  # a JSON report: replay its effective config
        known = set(vars(args)) - {"func", "config", "command"}
        for key, value in cfg.items():
            key = _CONFIG_ALIASES.get(key, key.replace("-", "_"))
            if key in known:
                merged[key] = value
    for key, value in merged.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    for key in ("indices", "n_range", "t_range", "gamma"):
        value = getattr(args, key, None)
        if isinstance(value, (list, tuple)):
            setattr(args, key, ",".join(str(v) for v in value))
    return args


def main(argv=None):
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except dynamics.SolverNotApplicable as exc:
        alt = ", ".join(exc.alternatives) if exc.alternatives else "OdeTruncated"
        print(f"error: {exc}; try one of: {alt}", file=sys.stderr)
        return EXIT_DATAERR
    except spectral.NotMemberError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _VERDICT_EXIT[exc.verdict]
    except spectral.InconclusiveError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (UsageError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
