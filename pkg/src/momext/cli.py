"""``momext`` command line: factorization, extension and moment pipelines.

Exit codes: 0 success, 1 malformed input, 2 mathematical precondition failure.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import serialization as io
from .cayley_extension import build_extension
from .errors import ConditionBFailed, HypothesisViolation, InputError, MathError, NotPSD
from .godic_lucenko import factor_common_left, factor_common_right, factorization_residuals
from .moment_problem import (
    check_condition_B,
    check_positivity,
    moments_from_measure,
    reachable_indices,
    solve_detailed,
    verify_solution,
)
from .numerics import DEFAULT_TOL

EXIT_OK, EXIT_INPUT, EXIT_MATH = 0, 1, 2


def default_tol() -> float:
    raw = os.environ.get("MOMEXT_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise InputError(f"MOMEXT_TOL={raw!r} is not a number") from None
    if not tol > 0:
        raise InputError("MOMEXT_TOL must be positive")
    return tol


def _parse_complex(text: str) -> complex:
    try:
        re_, im = text.split(",")
        return complex(float(re_), float(im))
    except ValueError:
        raise InputError(f"expected RE,IM, got {text!r}") from None


def _parse_box(text: str | None, length: int, what: str):
    if text is None or text == "":
        vals = ()
    else:
        try:
            vals = tuple(int(v) for v in text.split(","))
        except ValueError:
            raise InputError(f"{what} must be comma-separated integers, got {text!r}") from None
    if len(vals) != length:
        raise InputError(f"{what} needs {length} entries, got {len(vals)}")
    return vals


def _fmt(x: float) -> str:
    return f"{x:.3e}"


# ---------------------------------------------------------------------------
# Commands


def cmd_factorize(args) -> int:
    data = io.read_json(args.input)
    family = [io.matrix_from_json(m) for m in io.require_key(data, "unitaries", list)]
    if args.mode == "right":
        Js, C = factor_common_right(family, tol=args.tol, seed=args.seed)
        res = factorization_residuals(family, Js, [C] * len(Js))
        out = {"C": io.conjugation_to_json(C), "J": [io.conjugation_to_json(J) for J in Js]}
    else:
        K, Ls = factor_common_left(family, tol=args.tol, seed=args.seed)
        res = factorization_residuals(family, [K] * len(Ls), Ls)
        out = {"K": io.conjugation_to_json(K), "L": [io.conjugation_to_json(L) for L in Ls]}
    io.write_json(args.output, out)
    for k, r in enumerate(res):
        print(f"residual[{k}] = {_fmt(r)}")
    return EXIT_OK


def cmd_extend(args) -> int:
    T = io.tuple_from_json(io.read_json(args.tuple))
    if args.z0 is not None:
        from dataclasses import replace

        T = replace(T, z0=_parse_complex(args.z0))
    result = build_extension(T, tol=args.tol, seed=args.seed)
    d = result.defects
    out = {
        "A1_hat": io.matrix_to_json(result.A1_hat),
        "verification": {
            "extension": d["extension"],
            "self_adjointness": d["self_adjointness"],
            "commutation": d["commutation"],
        },
    }
    io.write_json(args.output, out)
    print(f"extension defect = {_fmt(d['extension'])}")
    print(f"self-adjointness defect = {_fmt(d['self_adjointness'])}")
    for k, c in enumerate(d["commutation"]):
        print(f"commutation defect[{k}] = {_fmt(c)}")
    return EXIT_OK


def cmd_gen_moments(args) -> int:
    mu = io.measure_from_json(io.read_json(args.measure))
    m_box = _parse_box(args.m_box, mu.r, "--m-box")
    n_box = _parse_box(args.n_box, mu.l, "--n-box")
    if any(b < 0 for b in m_box + n_box):
        raise InputError("box bounds must be nonnegative")
    io.write_json(args.output, io.moments_to_json(moments_from_measure(mu, m_box, n_box)))
    return EXIT_OK


def _print_certificate(report):
    for (m, n), c in report.certificate_terms().items():
        print(f"  alpha[m={list(m)}, n={list(n)}] = {c.real:+.6e}{c.imag:+.6e}j")


def cmd_verify(args) -> int:
    S = io.moments_from_json(io.read_json(args.moments))
    pos = check_positivity(S, args.tol)
    print(f"positivity: {'pass' if pos.passed else 'FAIL'} (min eigenvalue {_fmt(pos.min_eigenvalue)}, "
          f"max eigenvalue {_fmt(pos.max_eigenvalue)})")
    if not pos.passed:
        print("violation certificate:")
        _print_certificate(pos)
        return EXIT_MATH
    cb = check_condition_B(S, args.j0, args.tol)
    if S.r == 1:
        print("condition (B): pass (vacuous for r = 1)")
    else:
        consts = ", ".join(f"C_{j} = {c:.6g}" for j, c in cb.constants.items())
        print(f"condition (B): {'pass' if cb.passed else 'FAIL'} (j0 = {args.j0}; {consts})")
    return EXIT_OK if cb.passed else EXIT_MATH


def cmd_solve(args) -> int:
    S = io.moments_from_json(io.read_json(args.moments))
    res = solve_detailed(S, j0=args.j0, tol=args.tol, seed=args.seed)
    mu = res.measure
    flat = res.extension is None
    indices = None if flat else reachable_indices(S)
    rep = verify_solution(mu, S, tol=max(args.tol, 1e-8), indices=indices)
    out = io.measure_to_json(mu)
    out["verification"] = {
        "max_deviation": rep.max_deviation,
        "checked_entries": rep.checked,
        "scope": "table" if flat else "reachable",
        "passed": rep.passed,
    }
    io.write_json(args.output, out)
    print(f"atoms: {mu.n_atoms}")
    print(f"moment deviation ({out['verification']['scope']}) = {_fmt(rep.max_deviation)}")
    return EXIT_OK if rep.passed else EXIT_MATH


# ---------------------------------------------------------------------------
# Entry point


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors: exit 1 rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="momext", description=__doc__.splitlines()[0])
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="tolerance (default: $MOMEXT_TOL or 1e-10)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized joint diagonalization")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("factorize", parents=[common], help="factor commuting unitaries into conjugations")
    f.add_argument("--input", required=True)
    f.add_argument("--mode", choices=["right", "left"], default="right")
    f.add_argument("--output", default="-")
    f.set_defaults(func=cmd_factorize)

    e = sub.add_parser("extend", parents=[common], help="commuting self-adjoint extension of a tuple")
    e.add_argument("--tuple", required=True)
    e.add_argument("--z0", default=None, help="Cayley point as RE,IM")
    e.add_argument("--output", default="-")
    e.set_defaults(func=cmd_extend)

    g = sub.add_parser("gen-moments", parents=[common], help="moment table of an atomic measure")
    g.add_argument("--measure", required=True)
    g.add_argument("--m-box", required=True, help="comma-separated power degrees")
    g.add_argument("--n-box", default="", help="comma-separated frequency bounds")
    g.add_argument("--output", default="-")
    g.set_defaults(func=cmd_gen_moments)

    v = sub.add_parser("verify", parents=[common], help="positivity and condition (B) report")
    v.add_argument("--moments", required=True)
    v.add_argument("--j0", type=int, default=1)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve", parents=[common], help="atomic representing measure")
    s.add_argument("--moments", required=True)
    s.add_argument("--j0", type=int, default=1)
    s.add_argument("--output", default="-")
    s.set_defaults(func=cmd_solve)
    return p


def _report_math_error(exc: MathError):
    name = type(exc).__name__
    print(f"error: {name}: {exc}", file=sys.stderr)
    if isinstance(exc, HypothesisViolation) and exc.report is not None:
        for c in exc.report.failures:
            print(f"  failed check {c.name}: defect {_fmt(c.defect)} > {_fmt(c.threshold)}", file=sys.stderr)
    if isinstance(exc, NotPSD) and exc.certificate is not None:
        cert = np.asarray(exc.certificate)
        print(f"  certificate: {np.array2string(cert, precision=6)}", file=sys.stderr)
    if isinstance(exc, ConditionBFailed) and exc.constants:
        for j, c in exc.constants.items():
            print(f"  C_{j} = {c:.6g}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol is None:
            args.tol = default_tol()
        return args.func(args)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MathError as exc:
        _report_math_error(exc)
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
