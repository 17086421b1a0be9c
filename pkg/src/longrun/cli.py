"""Command line front end.

Subcommands: ``dstar`` (belief metrics on a distribution pair), ``value``
(theta-values of a house or MDP file), ``limit-value`` (the limit-value LP
with an optional dual audit), ``examples`` (built-in model curves as CSV,
optionally rendered to a PNG next to the delimited output).

Exit codes: 0 success, 1 a tolerance check of ``examples`` failed,
2 input error, 3 solver failure.  Identical invocations (including
``--seed``) produce byte-identical stdout.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .core import (
    Evaluation,
    InvalidArgumentError,
    impatience,
    make_evaluation_cesaro,
    make_evaluation_discounted,
)
from .dp import (
    excessive_check,
    limit_value_lp,
    max_invariant_payoff,
    value_theta_house,
    value_theta_mdp,
)
from .lp import LpSolverError
from . import gallery
from .metric import (
    disintegration_pair,
    dstar_distance,
    dstar_lower_bound,
    joint_l1_distance,
    kr_distance,
    random_matrix_families,
)
from .modelio import ModelFileError, load_evaluation_file, load_model_file

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _emit(line: str):
    sys.stdout.write(line + "\n")


def parse_theta_spec(spec: str) -> Evaluation:
    kind, sep, arg = spec.partition(":")
    if not sep:
        raise InvalidArgumentError(
            f"theta spec {spec!r} must look like cesaro:N, discounted:LAMBDA or custom:PATH"
        )
    if kind == "cesaro":
        try:
            return make_evaluation_cesaro(int(arg))
        except ValueError:
            raise InvalidArgumentError(f"bad cesaro horizon {arg!r}") from None
    if kind == "discounted":
        try:
            lam = float(arg)
        except ValueError:
            raise InvalidArgumentError(f"bad discount factor {arg!r}") from None
        return make_evaluation_discounted(lam)
    if kind == "custom":
        return load_evaluation_file(arg)
    raise InvalidArgumentError(f"unknown theta kind {kind!r}")


# -- dstar -------------------------------------------------------------------

def run_dstar(args) -> int:
    kind, payload = load_model_file(args.file)
    if kind != "belief_dist_pair":
        raise ModelFileError("kind", f"dstar needs a belief_dist_pair file, got {kind!r}")
    u, v = payload

    fams = []
    if args.families:
        fam_kind, fam = load_model_file(args.families)
        if fam_kind != "matrix_family":
            raise ModelFileError("kind", f"--families needs a matrix_family file, got {fam_kind!r}")
        fams.append(fam)
    fams.extend(random_matrix_families(u.dim, args.certificates, args.seed))

    d_star, witness = dstar_distance(u, v)
    d_kr, _plan = kr_distance(u, v)
    lb = dstar_lower_bound(u, v, fams)
    pi, pi_prime = disintegration_pair(u, v, witness)
    pair_l1 = joint_l1_distance(pi, pi_prime)

    _emit(f"d_star = {_fmt(d_star)}")
    _emit(f"d_kr = {_fmt(d_kr)}")
    _emit(f"certificate_lb = {_fmt(lb)}")
    _emit(f"pair_l1 = {_fmt(pair_l1)}")
    if args.witness:
        for i in range(len(u)):
            for j in range(len(v)):
                _emit(f"alpha[{i},{j}] = {_fmt(witness.alpha[i, j])}")
        for i in range(len(u)):
            for j in range(len(v)):
                _emit(f"beta[{i},{j}] = {_fmt(witness.beta[i, j])}")
    return EXIT_OK


# -- value -------------------------------------------------------------------

def run_value(args) -> int:
    kind, model = load_model_file(args.file)
    theta = parse_theta_spec(args.theta)
    if kind == "gambling_house":
        values = value_theta_house(model, theta)
    elif kind == "finite_mdp":
        values = value_theta_mdp(model, theta)
    else:
        raise ModelFileError("kind", f"value needs a gambling_house or finite_mdp file, got {kind!r}")
    states = model.states
    if args.start is not None:
        idx = model.state_index(args.start)
        _emit(f"v_theta[{states[idx]}] = {_fmt(values[idx])}")
    else:
        for idx, s in enumerate(states):
            _emit(f"v_theta[{s}] = {_fmt(values[idx])}")
    return EXIT_OK


# -- limit-value --------------------------------------------------------------

def run_limit_value(args) -> int:
    kind, mdp = load_model_file(args.file)
    if kind != "finite_mdp":
        raise ModelFileError("kind", f"limit-value needs a finite_mdp file, got {kind!r}")
    starts = [args.start] if args.start is not None else list(mdp.states)
    for start in starts:
        v_star, cert = limit_value_lp(mdp, start)
        _emit(f"v_star[{start}] = {_fmt(v_star)}")
        for s, w_k, h_k in zip(mdp.states, cert.w, cert.h):
            _emit(f"w[{s}] = {_fmt(w_k)}")
            _emit(f"h[{s}] = {_fmt(h_k)}")
        if args.audit:
            residual = max_invariant_payoff(mdp, cert.w)
            _emit(f"audit_separation[{start}] = {_fmt(residual)}")
            _emit(f"audit_excessive[{start}] = {str(excessive_check(mdp, cert.w)).lower()}")
    return EXIT_OK


# -- examples ------------------------------------------------------------------

def _ns_up_to(n_max: int):
    base = [1, 2, 3, 4, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000]
    ns = [n for n in base if n <= n_max]
    if n_max not in ns:
        ns.append(n_max)
    return ns


def _example_ex39(args):
    house = gallery.ex39_house()
    rows, checks = [], []
    for n in _ns_up_to(args.n):
        v = value_theta_house(house, make_evaluation_cesaro(n))
        rows.append([n, v[0], v[1], 0.5])
        ok = abs(v[0] - 0.5) <= 0.5 / n + 1e-12 and abs(v[1] - 0.5) <= 0.5 / n + 1e-12
        checks.append((f"|v_{n} - 1/2| <= 1/(2*{n})", ok))
    v_star0, _ = limit_value_lp(gallery.ex39_mdp(), "0")
    v_star1, _ = limit_value_lp(gallery.ex39_mdp(), "1")
    checks.append(("v_star = 1/2 (limit-value LP)", abs(v_star0 - 0.5) <= 1e-9 and abs(v_star1 - 0.5) <= 1e-9))
    v_even = value_theta_house(house, gallery.even_stage_evaluation(7))
    checks.append(("even-stage evaluation returns the start state", abs(v_even[0]) <= 1e-12 and abs(v_even[1] - 1.0) <= 1e-12))
    return ["n", "v_n_start0", "v_n_start1", "reference"], rows, checks, False


def _example_circle(args):
    rows, checks = [], []
    for start in args.starts:
        v = gallery.circle_value(start, args.n)
        err = abs(v - gallery.CIRCLE_REFERENCE)
        rows.append([start, args.n, v, gallery.CIRCLE_REFERENCE, err])
        checks.append((f"|v_n({_fmt(start)}) - 1/2| <= 1e-2", err <= 1e-2))
    return ["start", "n", "value", "reference", "abs_err"], rows, checks, False


def _example_infini(args):
    lambdas = args.lam or [0.1, 0.05, 0.01]
    rows, checks = [], []
    for lam in lambdas:
        v = gallery.infini_value(lam, l=args.l)
        ref = gallery.infini_closed_form(lam, l=args.l)
        err = abs(v - ref)
        rows.append([lam, v, ref, err])
        if args.l == 2:
            checks.append((f"|v_{_fmt(lam)} - closed form| <= 2e-3", err <= 2e-3))
    if args.fit:
        fit_lambdas = np.logspace(-4, -2, 7)
        slope, _ = gallery.infini_exponent_fit(fit_lambdas, l=args.l)
        target = (args.l - 1.0) / args.l
        checks.append(
            (f"fitted exponent {_fmt(slope)} within 0.05 of {_fmt(target)}",
             abs(slope - target) <= 0.05)
        )
    return ["lambda", "value", "closed_form", "abs_err"], rows, checks, True


def _example_dark(args):
    lambdas = args.lam or [1e-2, 1e-3, 1e-4]
    rows, checks = [], []
    for lam in lambdas:
        v = gallery.dark_value(lam, grid_points=args.grid)
        oracle = gallery.dark_oracle(lam)
        ratio = gallery.dark_gap_ratio(lam, v)
        rows.append([lam, v, oracle, ratio])
        checks.append((f"grid value >= plan oracle - 1e-3 at lambda={_fmt(lam)}", v >= oracle - 1e-3))
        if lam == 1e-4:
            checks.append(
                ("(1 - v) / (lambda log2(1/lambda)) in [0.85, 1.15] at lambda=1e-4",
                 0.85 <= ratio <= 1.15)
            )
    return ["lambda", "value", "oracle_lb", "gap_ratio"], rows, checks, True


def _example_am(args):
    grid, values, reference = gallery.am_values(
        n=args.n, grid_res=args.grid, action_res=args.actiongrid
    )
    rows = []
    worst = 0.0
    for p, v, ref in zip(grid.points[:, 0], values, reference):
        err = abs(v - ref)
        worst = max(worst, err)
        rows.append([p, v, ref, err])
    checks = [(f"max |grid value - cav| = {_fmt(worst)} <= 5e-2", worst <= 5e-2)]
    return ["p", "value", "cav_reference", "abs_err"], rows, checks, False


def _example_horner(args):
    v = gallery.horner_value(args.p, n=args.n, grid_res=args.grid, action_res=args.actiongrid)
    ref = gallery.horner_closed_form(args.p)
    checks = []
    if ref is None:
        rows = [[args.p, v, float("nan"), float("nan")]]
    else:
        err = abs(v - ref)
        rows = [[args.p, v, ref, err]]
        checks.append((f"|value - p/(4p-1)| = {_fmt(err)} <= 0.02", err <= 0.02))
    return ["p", "value", "closed_form", "abs_err"], rows, checks, False


_EXAMPLES = {
    "ex39": _example_ex39,
    "circle": _example_circle,
    "infini": _example_infini,
    "dark": _example_dark,
    "am": _example_am,
    "horner": _example_horner,
}


def run_examples(args) -> int:
    if args.name not in _EXAMPLES:
        raise InvalidArgumentError(
            f"unknown example {args.name!r}; choose from {', '.join(gallery.EXAMPLE_NAMES)}"
        )
    header, rows, checks, logx = _EXAMPLES[args.name](args)

    formatted = [[_fmt(v) if isinstance(v, float) else str(v) for v in row] for row in rows]
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(formatted)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(formatted)

    if args.plot:
        from .plotting import render_curve

        if args.out:
            png = args.out[:-4] + ".png" if args.out.endswith(".csv") else args.out + ".png"
        else:
            png = f"{args.name}.png"
        render_curve(header, rows, png, title=args.name, logx=logx)
        print(f"figure written to {png}", file=sys.stderr)

    failed = [label for label, ok in checks if not ok]
    for label, ok in checks:
        print(f"check: {label}: {'pass' if ok else 'FAIL'}", file=sys.stderr)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="longrun",
        description="Belief-space metrics and long-run values of decision processes and games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dstar", help="metrics between two belief distributions")
    p.add_argument("file", help="belief_dist_pair model file")
    p.add_argument("--certificates", type=int, default=64,
                   help="number of random certificate families (default 64)")
    p.add_argument("--seed", type=int, default=0, help="seed for the certificate search")
    p.add_argument("--families", help="matrix_family model file with an extra certificate")
    p.add_argument("--witness", action="store_true", help="dump the optimal witness pair")
    p.set_defaults(func=run_dstar)

    p = sub.add_parser("value", help="theta-value of a gambling house or MDP")
    p.add_argument("file", help="gambling_house or finite_mdp model file")
    p.add_argument("--theta", required=True,
                   help="cesaro:N | discounted:LAMBDA | custom:PATH")
    p.add_argument("--start", help="report only this start state")
    p.set_defaults(func=run_value)

    p = sub.add_parser("limit-value", help="limit value of a finite MDP by LP")
    p.add_argument("file", help="finite_mdp model file")
    p.add_argument("--start", help="start state (default: all states)")
    p.add_argument("--audit", action="store_true",
                   help="run the invariant-measure separation oracle on the certificate")
    p.set_defaults(func=run_limit_value)

    p = sub.add_parser("examples", help="built-in example curves as CSV")
    p.add_argument("name", help="|".join(gallery.EXAMPLE_NAMES))
    p.add_argument("--lambda", dest="lam", type=float, action="append",
                   help="discount factor (repeatable)")
    p.add_argument("--n", type=int, default=None, help="horizon / stage count")
    p.add_argument("--grid", type=int, default=None, help="belief grid points")
    p.add_argument("--actiongrid", type=int, default=41,
                   help="mixed-action grid points per coordinate")
    p.add_argument("--l", type=float, default=2.0, help="exponent of the infini example")
    p.add_argument("--p", type=float, default=0.6, help="persistence of the horner example")
    p.add_argument("--starts", type=float, nargs="*",
                   default=[0.0, 0.7, 1.4, 2.1, 2.8], help="circle start angles")
    p.add_argument("--fit", action="store_true",
                   help="infini only: also fit the 1 - v_lambda exponent")
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.add_argument("--plot", action="store_true",
                   help="render a PNG figure next to the CSV output")
    p.set_defaults(func=run_examples)
    return parser


_DEFAULTS = {
    "ex39": {"n": 1000},
    "circle": {"n": 10000},
    "infini": {"n": 0},
    "dark": {"grid": 2001},
    "am": {"n": 2000, "grid": 201},
    "horner": {"n": 2000, "grid": 201},
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "examples" and args.name in _DEFAULTS:
        for key, value in _DEFAULTS[args.name].items():
            if getattr(args, key, None) is None:
                setattr(args, key, value)
    try:
        return args.func(args)
    except ModelFileError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvalidArgumentError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LpSolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
