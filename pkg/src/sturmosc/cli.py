"""Command-line front end.

Every verb runs one library operation and prints one JSON object on stdout.
Exit codes: 0 success, 2 usage or validation error, 3 non-convergence.
``STURM_MAX_WORK`` caps the truncation sizes and interval lengths that the
growing-truncation policies may reach.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace

from . import io
from .applications import bargmann_bound, sign_change_profile
from .counting import InfiniteCountPolicy, count_above, count_above_infinite, eig_bisect
from .errors import ConvergenceError, SturmError, ValidationError
from .mfunction import m_function
from .prufer import (
    HalflinePolicy,
    count_below_halfline,
    count_zeros,
    dirichlet_eigs,
    shoot,
    shoot_trace,
)
from .renormalized import (
    RenormPolicy,
    count_renormalized_box,
    count_renormalized_halfline,
    wronskian_trace,
)

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED = 0, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _work_cap() -> float | None:
    raw = os.environ.get("STURM_MAX_WORK")
    if raw is None or raw == "":
        return None
    cap = io.parse_real(raw, "STURM_MAX_WORK")
    if cap <= 0:
        raise ValidationError("STURM_MAX_WORK must be positive")
    return cap


def _capped(policy, **limits):
    cap = _work_cap()
    if cap is None:
        return policy
    changes = {}
    for name, floor in limits.items():
        value = min(getattr(policy, name), cap)
        changes[name] = max(type(floor)(value), floor)
    return replace(policy, **changes)


def _count_json(res) -> dict:
    return {
        "count": res.count,
        "boundary_hit": res.boundary_hit,
        "converged": res.converged,
        "n_used": res.n_used,
        "intermediate_zeros": list(res.intermediate_zeros),
        "evidence": list(res.evidence),
        "history": list(res.history),
    }


def _write_csv(path, header, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow(["%.17g" % v for v in row])


# -- verbs --------------------------------------------------------------------

def _jacobi_count(args):
    J = io.load_jacobi(args.file)
    E0 = io.parse_real(args.energy, "--energy")
    if args.size is None and J.kind == "infinite":
        policy = _capped(InfiniteCountPolicy(), n_max=1, n_start=1)
        res = count_above_infinite(J, E0, policy)
        summary = f"{res.count} eigenvalue(s) of J above {E0} (n_used={res.n_used})"
    else:
        n = args.size if args.size is not None else J.size
        res = count_above(J, n, E0)
        summary = f"{res.count} eigenvalue(s) of J_{n} above {E0}"
    return _count_json(res), summary


def _jacobi_size(J, size):
    if size is not None:
        return size
    if J.kind == "finite":
        return J.size
    raise ValidationError("--size is required for an infinite Jacobi operator")


def _jacobi_eigs(args):
    J = io.load_jacobi(args.file)
    n = _jacobi_size(J, args.size)
    window = io.parse_pair(args.window, "--window")
    tol = io.parse_real(args.tol, "--tol")
    found = eig_bisect(J, n, window, tol)
    out = {
        "n": n,
        "eigenvalues": [e for e, _ in found],
        "intervals": [{"lo": iv.lo, "hi": iv.hi, "count": iv.count_in} for _, iv in found],
    }
    return out, f"{len(found)} eigenvalue(s) of J_{n} in ({window[0]}, {window[1]})"


def _jacobi_mfunc(args):
    J = io.load_jacobi(args.file)
    z = io.parse_complex(args.z)
    tol = io.parse_real(args.tol, "--tol")
    n_max = args.depth if args.depth is not None else 2 ** 16
    cap = _work_cap()
    if cap is not None:
        n_max = max(1, min(n_max, int(cap)))
    try:
        res = m_function(J, z, tol=tol, n_max=n_max, tail_seed=args.tail_seed)
    except ConvergenceError as exc:
        if exc.partial is None:
            raise
        res = exc.partial
    out = {"m": io.complex_json(res.value), "n_used": res.n_used, "converged": res.converged}
    return out, f"m({z}) = {res.value} (depth {res.n_used})"


def _jacobi_profile(args):
    J = io.load_jacobi(args.file)
    E0 = io.parse_real(args.energy, "--energy")
    prof = sign_change_profile(J, E0, args.depth)
    out = {
        "above_changes": list(prof.above_changes),
        "below_matches": list(prof.below_matches),
        "total_above": prof.total_above,
        "boundary_hit": prof.boundary_hit,
    }
    last = prof.above_changes[-1] if prof.above_changes else None
    return out, f"{prof.total_above} sign change(s) up to depth {args.depth}; last at {last}"


def _halfline_policy():
    return _capped(HalflinePolicy(), a_max=1.0, a_start=1e-3)


def _renorm_policy():
    return _capped(RenormPolicy(), a_max=1.0, a_start=1e-3)


def _schrodinger_count(args):
    V = io.load_potential(args.potential)
    E = io.parse_real(args.energy, "--energy")
    if args.halfline:
        res = count_below_halfline(V, E, _halfline_policy())
        where = "[0, inf)"
    else:
        a = io.parse_real(args.length, "--length")
        res = count_zeros(V, E, a)
        where = f"[0, {a}]"
    out = {
        "count": res.count,
        "boundary_hit": res.boundary_hit,
        "converged": res.converged,
        "length_used": res.length_used,
        "history": list(res.history),
    }
    return out, f"{res.count} eigenvalue(s) below {E} on {where}"


def _schrodinger_eigs(args):
    V = io.load_potential(args.potential)
    a = io.parse_real(args.length, "--length")
    window = io.parse_pair(args.window, "--window")
    tol = io.parse_real(args.tol, "--tol")
    eigs = dirichlet_eigs(V, a, window, tol)
    return {"length": a, "eigenvalues": list(eigs)}, f"{len(eigs)} Dirichlet eigenvalue(s) in {window}"


def _schrodinger_shoot(args):
    V = io.load_potential(args.potential)
    E = io.parse_real(args.energy, "--energy")
    a = io.parse_real(args.length, "--length")
    st = shoot(V, E, a)
    if args.trace:
        tr = shoot_trace(V, E, a)
        _write_csv(args.trace, ["x", "u", "du", "theta", "log_scale"],
                   [tr.x, tr.u, tr.du, tr.theta, tr.log_scale])
    out = {
        "x": st.x, "u": st.u, "du": st.du, "theta": st.theta,
        "zeros_so_far": st.zeros_so_far, "log_scale": st.log_scale,
        "at_zero": st.at_zero, "u_squared_integral": st.u_squared_integral,
    }
    return out, f"theta({a}) = {st.theta}, {st.zeros_so_far} zero(s) in (0, {a})"


def _renorm_count(args):
    V = io.load_potential(args.potential)
    E1 = io.parse_real(args.e1, "--e1")
    E2 = io.parse_real(args.e2, "--e2")
    if args.halfline:
        res = count_renormalized_halfline(V, E1, E2, _renorm_policy())
        where = "[0, inf)"
    else:
        a = io.parse_real(args.length, "--length")
        res = count_renormalized_box(V, E1, E2, a)
        where = f"[0, {a}]"
    if args.trace:
        tr = wronskian_trace(V, E1, E2, res.length_used)
        _write_csv(args.trace,
                   ["x", "u", "du", "theta", "u2", "du2", "theta2", "w", "delta_theta", "log_scale"],
                   [tr.x, tr.u1, tr.du1, tr.theta1, tr.u2, tr.du2, tr.theta2, tr.w,
                    tr.delta_theta, tr.log_scale])
    out = {
        "count": res.count,
        "converged": res.converged,
        "boundary_hit": res.boundary_hit,
        "crossings": list(res.evidence),
        "length_used": res.length_used,
        "history": list(res.history),
    }
    return out, f"{res.count} eigenvalue(s) in ({E1}, {E2}) on {where}"


def _bargmann(args):
    V = io.load_potential(args.potential)
    rep = bargmann_bound(V, _halfline_policy())
    out = {"bound": rep.bound, "computed_count": rep.computed_count,
           "margin": rep.margin, "converged": rep.converged}
    return out, f"bound {rep.bound} vs {rep.computed_count} bound state(s)"


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-q", "--quiet", action="store_true", help="no summary line on stderr")
    p = _Parser(prog="sturmosc", description="Oscillation-theoretic eigenvalue counting.")
    top = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    jac = top.add_parser("jacobi", help="Jacobi matrices").add_subparsers(dest="verb", required=True)

    c = jac.add_parser("count", parents=[common], help="eigenvalues above an energy")
    c.add_argument("--file", required=True)
    c.add_argument("--energy", required=True)
    c.add_argument("--size", type=int, help="truncation size (omit for the full operator)")
    c.set_defaults(func=_jacobi_count, schema="result_jacobi_count")

    e = jac.add_parser("eigs", parents=[common], help="bisection eigenvalues in a window")
    e.add_argument("--file", required=True)
    e.add_argument("--size", type=int)
    e.add_argument("--window", required=True, help="lo,hi")
    e.add_argument("--tol", default="1e-10")
    e.set_defaults(func=_jacobi_eigs, schema="result_jacobi_eigs")

    m = jac.add_parser("mfunc", parents=[common], help="m-function by continued fraction")
    m.add_argument("--file", required=True)
    m.add_argument("--z", required=True, help="re,im")
    m.add_argument("--tol", default="1e-12")
    m.add_argument("--depth", type=int, help="maximum continued-fraction depth")
    m.add_argument("--tail-seed", action="store_true", help="seed with the constant tail's m-function")
    m.set_defaults(func=_jacobi_mfunc, schema="result_jacobi_mfunc")

    pr = jac.add_parser("profile", parents=[common], help="sign changes of P_l(E0) up to a depth")
    pr.add_argument("--file", required=True)
    pr.add_argument("--energy", required=True)
    pr.add_argument("--depth", type=int, required=True)
    pr.set_defaults(func=_jacobi_profile, schema="result_jacobi_profile")

    sch = top.add_parser("schrodinger", help="half-line Schrodinger operators").add_subparsers(
        dest="verb", required=True)

    sc = sch.add_parser("count", parents=[common], help="eigenvalues below an energy")
    sc.add_argument("--potential", required=True)
    sc.add_argument("--energy", required=True)
    g = sc.add_mutually_exclusive_group(required=True)
    g.add_argument("--length")
    g.add_argument("--halfline", action="store_true")
    sc.set_defaults(func=_schrodinger_count, schema="result_schrodinger_count")

    se = sch.add_parser("eigs", parents=[common], help="Dirichlet eigenvalues of [0, a] in a window")
    se.add_argument("--potential", required=True)
    se.add_argument("--length", required=True)
    se.add_argument("--window", required=True, help="lo,hi")
    se.add_argument("--tol", default="1e-8")
    se.set_defaults(func=_schrodinger_eigs, schema="result_schrodinger_eigs")

    ss = sch.add_parser("shoot", parents=[common], help="integrate u(., E) to x = a")
    ss.add_argument("--potential", required=True)
    ss.add_argument("--energy", required=True)
    ss.add_argument("--length", required=True)
    ss.add_argument("--trace", metavar="CSV")
    ss.set_defaults(func=_schrodinger_shoot, schema="result_schrodinger_shoot")

    ren = top.add_parser("renorm", help="renormalized oscillation").add_subparsers(dest="verb", required=True)
    rc = ren.add_parser("count", parents=[common], help="eigenvalues in (E1, E2) from Wronskian zeros")
    rc.add_argument("--potential", required=True)
    rc.add_argument("--e1", required=True)
    rc.add_argument("--e2", required=True)
    g = rc.add_mutually_exclusive_group(required=True)
    g.add_argument("--length")
    g.add_argument("--halfline", action="store_true")
    rc.add_argument("--trace", metavar="CSV")
    rc.set_defaults(func=_renorm_count, schema="result_renorm_count")

    b = top.add_parser("bargmann", parents=[common], help="Bargmann bound against the bound-state count")
    b.add_argument("--potential", required=True)
    b.set_defaults(func=_bargmann, schema="result_bargmann")
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        stdout.write(io.dumps({"error": f"usage: {exc}"}) + "\n")
        return EXIT_USAGE
    try:
        out, summary = args.func(args)
    except ConvergenceError as exc:
        stdout.write(io.dumps({"error": str(exc), "converged": False}) + "\n")
        return EXIT_NONCONVERGED
    except (SturmError, ValueError, OSError) as exc:
        stdout.write(io.dumps({"error": str(exc)}) + "\n")
        return EXIT_USAGE
    stdout.write(io.dumps(out) + "\n")
    if not args.quiet:
        stderr.write(summary + "\n")
    return EXIT_OK if out.get("converged", True) else EXIT_NONCONVERGED


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
