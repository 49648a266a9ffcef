"""Eigenvalue counts in ``(E1, E2)`` from zeros of the Wronskian of ``u(., E1)`` and ``u(., E2)``.

With ``W(x) = u1 u2' - u1' u2``, ``W`` vanishes exactly where the Pruefer
angles satisfy ``theta2 - theta1 = k pi``, and the difference can only pass
those values upward.  Crossings are therefore counted on the angle difference,
which stays well scaled where ``W`` itself is exponentially small.  For this
sign convention ``W' = -(E2 - E1) u1 u2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .counting import CountResult
from .errors import SturmError, ValidationError
from .prufer import (
    ANGLE_TOL,
    Potential,
    StepControl,
    _check_energy,
    _check_length,
    _refined,
    _rk4_partial,
    _Run,
    _zeros_from_run,
    angle_count,
    shoot,
)

# relative distance to a Dirichlet eigenvalue accepted for E2
EIGEN_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class WronskianTrace:
    """Joint record of both solutions on a shared grid.

    ``w`` is the Wronskian of the normalized solutions; the true value is
    ``w * exp(log_scale)``.  ``crossings`` are the positions in ``(0, a]`` where
    ``delta_theta = theta2 - theta1`` passes a positive multiple of ``pi``.
    """

    e1: float
    e2: float
    x: np.ndarray
    w: np.ndarray
    log_scale: np.ndarray
    delta_theta: np.ndarray
    crossings: np.ndarray
    u1: np.ndarray
    du1: np.ndarray
    u2: np.ndarray
    du2: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray
    log1: np.ndarray
    log2: np.ndarray
    _run: _Run = field(repr=False, default=None)

    def true_wronskian(self) -> np.ndarray:
        """``W(x)`` without normalization; may overflow deep in forbidden regions."""
        return self.w * np.exp(self.log_scale)


def _levels(delta: np.ndarray) -> np.ndarray:
    # delta ~ (E2 - E1) x^3 / 3 near 0 and can dip below 0 by round-off there
    return np.maximum(np.floor(delta / math.pi), 0)


def _joint_summary(run):
    th = run.theta[-1]
    delta = run.theta[:, 1] - run.theta[:, 0]
    lev = _levels(delta)
    downward = int(np.sum(lev[1:] < lev[:-1]))
    ints = (angle_count(th[0])[0], angle_count(th[1])[0], angle_count(delta[-1])[0], downward)
    return ints, (th[0], th[1], delta[-1])


def _joint_run(V, E1, E2, a, control) -> _Run:
    run = _refined(V, [E1, E2], a, control, record=True, summary=_joint_summary)
    delta = run.theta[:, 1] - run.theta[:, 0]
    lev = _levels(delta)
    if np.any(lev[1:] < lev[:-1]):
        raise SturmError("relative Pruefer angle crossed a multiple of pi downward")
    return run


def _crossing_positions(run: _Run, E1: float, E2: float) -> np.ndarray:
    delta = run.theta[:, 1] - run.theta[:, 0]
    lev = _levels(delta)
    idx = np.nonzero(lev[1:] > lev[:-1])[0]
    out = []
    for i in idx:
        xl, xr = run.x[i], run.x[i + 1]
        y1 = (run.u[i, 0], run.du[i, 0])
        y2 = (run.u[i, 1], run.du[i, 1])

        def w(s):
            a1, b1 = _rk4_partial(run.segments, xl, y1, E1, s)
            a2, b2 = _rk4_partial(run.segments, xl, y2, E2, s)
            return a1 * b2 - b1 * a2

        wa, wb = w(0.0), w(xr - xl)
        if wa == 0.0:
            out.append(xl)
        elif wa * wb < 0:
            out.append(xl + brentq(w, 0.0, xr - xl, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        else:
            out.append(xr)
    return np.array(out)


def wronskian_trace(V: Potential, E1: float, E2: float, a: float,
                    control: StepControl = StepControl()) -> WronskianTrace:
    """Integrate ``u(., E1)`` and ``u(., E2)`` together on ``[0, a]``."""
    E1, E2 = _check_energy(E1), _check_energy(E2)
    a = _check_length(a)
    if not E1 < E2:
        raise ValidationError(f"wronskian_trace needs E1 < E2, got {E1} >= {E2}")
    run = _joint_run(V, E1, E2, a, control)
    u1, u2 = run.u[:, 0], run.u[:, 1]
    d1, d2 = run.du[:, 0], run.du[:, 1]
    th1, th2 = run.theta[:, 0], run.theta[:, 1]
    l1, l2 = run.log_scale[:, 0], run.log_scale[:, 1]
    return WronskianTrace(
        e1=E1, e2=E2, x=run.x,
        w=u1 * d2 - d1 * u2,
        log_scale=l1 + l2,
        delta_theta=th2 - th1,
        crossings=_crossing_positions(run, E1, E2),
        u1=u1, du1=d1, u2=u2, du2=d2, theta1=th1, theta2=th2, log1=l1, log2=l2,
        _run=run,
    )


def derivative_residual(trace: WronskianTrace, n_points: int = 100) -> float:
    """Largest ``|W' - (-(E2 - E1) u1 u2)|`` over sampled points, relative to the
    larger magnitude of the two terms over those points.

    ``W'`` comes from a five-point central difference of the recorded ``W``;
    each stencil is brought to a common normalization first.
    """
    x = trace.x
    n = x.size
    cand = np.arange(2, n - 2)
    h = np.diff(x)
    uniform = np.abs(h[cand - 2] - h[cand + 1]) <= 1e-9 * h[cand] if cand.size else cand
    uniform &= np.abs(h[cand - 1] - h[cand]) <= 1e-9 * h[cand]
    cand = cand[uniform]
    if cand.size == 0:
        raise ValidationError("trace too short for a five-point stencil")
    pick = cand[np.linspace(0, cand.size - 1, min(n_points, cand.size)).astype(int)]
    de = trace.e2 - trace.e1
    lhs, rhs = [], []
    for c in pick:
        st = np.arange(c - 2, c + 3)
        scale = np.exp(trace.log_scale[st] - trace.log_scale[c])
        wv = trace.w[st] * scale
        step = h[c]
        lhs.append((wv[0] - 8 * wv[1] + 8 * wv[3] - wv[4]) / (12 * step))
        rhs.append(-de * trace.u1[c] * trace.u2[c])
    lhs, rhs = np.array(lhs), np.array(rhs)
    ref = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)))
    return float(np.max(np.abs(lhs - rhs)) / ref)


def _eigenvalue_with_index(V: Potential, a: float, k: int, E_guess: float,
                           control: StepControl, tol: float = 1e-10) -> float:
    """The Dirichlet eigenvalue of ``[0, a]`` with ``theta(a) = k pi``."""
    target = k * math.pi

    def f(E):
        return shoot(V, E, a, control).theta - target

    step = 1.0
    lo = hi = E_guess
    while f(lo) > 0:
        lo -= step
        step *= 2
    step = 1.0
    while f(hi) < 0:
        hi += step
        step *= 2
    return brentq(f, lo, hi, xtol=tol)


def nearest_dirichlet_eigenvalue(V: Potential, a: float, E: float,
                                 control: StepControl = StepControl()) -> float:
    theta = shoot(V, E, a, control).theta
    k = math.floor(theta / math.pi)
    candidates = [_eigenvalue_with_index(V, a, k + 1, E, control)]
    if k >= 1:
        candidates.append(_eigenvalue_with_index(V, a, k, E, control))
    return min(candidates, key=lambda c: abs(c - E))


def _angles_at(run: _Run, x: float) -> tuple[float, float]:
    """Both Pruefer angles at ``x`` via a partial step from the last grid point before it."""
    i = int(np.searchsorted(run.x, x, side="right")) - 1
    i = min(max(i, 0), run.x.size - 1)
    s = x - run.x[i]
    out = []
    for j in range(2):
        th = run.theta[i, j]
        if s > 0:
            y = _rk4_partial(run.segments, run.x[i], (run.u[i, j], run.du[i, j]), run.energies[j], s)
            inc = math.atan2(y[0], y[1]) - math.atan2(run.u[i, j], run.du[i, j])
            inc = (inc + math.pi) % (2 * math.pi) - math.pi
            th += inc
        out.append(th)
    return out[0], out[1]


def count_renormalized_box(V: Potential, E1: float, E2: float, a: float,
                           control: StepControl = StepControl(),
                           angle_tol: float = ANGLE_TOL) -> CountResult:
    """``dim P_(E1, E2)(H_a)`` for the Dirichlet problem on ``[0, a]``.

    Requires ``u(a, E2) = 0`` (``E2`` a Dirichlet eigenvalue of ``[0, a]``);
    otherwise raises :class:`ValidationError` naming the nearest one.
    """
    trace = wronskian_trace(V, E1, E2, a, control)
    th2 = float(trace.theta2[-1])
    k = round(th2 / math.pi)
    if k < 1 or abs(th2 - k * math.pi) > angle_tol:
        # theta(a) is ill conditioned in E when u decays towards a, so fall back
        # to an energy test before rejecting
        nearest = nearest_dirichlet_eigenvalue(V, a, trace.e2, control)
        if k < 1 or abs(nearest - trace.e2) > EIGEN_TOL * max(1.0, abs(trace.e2)):
            raise ValidationError(
                f"u(a, E2) != 0 for E2 = {trace.e2} on [0, {a}]; "
                f"nearest Dirichlet eigenvalue is {nearest!r}"
            )
    count, hit = angle_count(float(trace.delta_theta[-1]), angle_tol)
    return CountResult(count=count, boundary_hit=hit, length_used=float(trace.x[-1]),
                       evidence=tuple(float(c) for c in trace.crossings[:count]))


@dataclass(frozen=True)
class RenormPolicy:
    """Truncation rule for the half line.

    Lengths ``a_j`` are the successive zeros of ``u(., E2)`` beyond ``a_start``.
    If ``u(., E2)`` has fewer than ``window`` zeros there, the checkpoints
    ``a_start * 2**i`` are used instead.  The count is reported once
    ``window`` successive checkpoints agree.
    """

    a_start: float = 10.0
    window: int = 3
    a_max: float = 1280.0


def count_renormalized_halfline(V: Potential, E1: float, E2: float,
                                policy: RenormPolicy = RenormPolicy(),
                                control: StepControl = StepControl()) -> CountResult:
    """``dim P_(E1, E2)(H)`` on ``[0, inf)`` as the number of zeros of ``W`` in ``(0, inf)``."""
    E1, E2 = _check_energy(E1), _check_energy(E2)
    if not E1 < E2:
        raise ValidationError(f"needs E1 < E2, got {E1} >= {E2}")
    if policy.a_start <= 0 or policy.window < 1 or policy.a_max < policy.a_start:
        raise ValidationError(f"invalid policy {policy}")
    K = policy.window
    L = min(2 * policy.a_start, policy.a_max)
    while True:
        trace = wronskian_trace(V, E1, E2, L, control)
        run = trace._run
        zeros2 = _zeros_from_run(run, 1)
        points = zeros2[(zeros2 > policy.a_start) & (zeros2 <= L)]
        if points.size < K:
            points = policy.a_start * 2.0 ** np.arange(0, 64)
            points = points[points <= L * (1 + 1e-12)]
        counts = []
        for p in points:
            t1, t2 = _angles_at(run, float(p))
            counts.append(angle_count(t2 - t1)[0])
            if len(counts) >= K and len(set(counts[-K:])) == 1:
                c = counts[-1]
                return CountResult(count=c, converged=True, length_used=float(p),
                                   evidence=tuple(float(x) for x in trace.crossings[:c]),
                                   history=tuple(counts))
        if L >= policy.a_max:
            c = angle_count(float(trace.delta_theta[-1]))[0]
            return CountResult(count=c, converged=False, length_used=float(L),
                               evidence=tuple(float(x) for x in trace.crossings[:c]),
                               history=tuple(counts))
        L = min(2 * L, policy.a_max)
