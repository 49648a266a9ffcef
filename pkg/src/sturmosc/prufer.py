"""Shooting for ``-u'' + V u = E u`` on the half line with ``u(0) = 0``, ``u'(0) = 1``.

Zeros are counted through the Pruefer angle ``theta`` (``tan theta = u / u'``,
``theta(0) = 0``, continuous): ``u`` vanishes exactly where ``theta`` is a
multiple of ``pi`` and ``theta`` only ever passes those values upward, so the
number of zeros in ``(0, a)`` is the number of ``k >= 1`` with ``k pi < theta(a)``.

Integration is classical RK4 at a fixed step, halved until the zero count and
``theta(a)`` agree between two successive step sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .counting import CountResult
from .errors import BoundaryError, ConvergenceError, SturmError, ValidationError

ANGLE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Potential:
    """A bounded potential sampled on ``x_j = j * grid_step``, ``j = 0..N-1``.

    Between samples ``V`` is linear.  Beyond the last sample ``x_{N-1}`` the
    tail applies: ``tail="zero"`` sets ``V = 0`` there (a jump is allowed at the
    join); ``tail="periodic"`` continues the sample sequence with ``period``
    repeated, ``period[0]`` being the value at ``x_N``.
    """

    grid_step: float
    samples: np.ndarray
    tail: str = "zero"
    period: np.ndarray | None = None
    sup_norm: float | None = None

    def __post_init__(self):
        h = float(self.grid_step)
        if not (math.isfinite(h) and h > 0):
            raise ValidationError("grid_step must be positive")
        object.__setattr__(self, "grid_step", h)
        samples = np.asarray(self.samples, dtype=float).ravel()
        if samples.size < 1:
            raise ValidationError("a potential needs at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("potential samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if self.tail == "zero":
            if self.period is not None:
                raise ValidationError("a zero tail takes no period block")
            values = samples
        elif self.tail == "periodic":
            period = np.asarray(self.period, dtype=float).ravel()
            if period.size < 1 or not np.all(np.isfinite(period)):
                raise ValidationError("periodic tail needs a non-empty finite block")
            period.setflags(write=False)
            object.__setattr__(self, "period", period)
            values = np.concatenate((samples, period))
        else:
            raise ValidationError(f"unknown tail {self.tail!r}")
        sup = float(np.max(np.abs(values)))
        if self.sup_norm is None:
            object.__setattr__(self, "sup_norm", sup)
        elif not float(self.sup_norm) >= sup:
            raise ValidationError(f"declared sup_norm {self.sup_norm} is below max |V| = {sup}")
        else:
            object.__setattr__(self, "sup_norm", float(self.sup_norm))

    @classmethod
    def zero(cls, grid_step: float = 1.0) -> "Potential":
        return cls(grid_step, np.zeros(1))

    @classmethod
    def square_well(cls, depth: float, width: float, grid_step: float = 0.01) -> "Potential":
        """``V = -depth`` on ``[0, width]`` and 0 beyond."""
        n = int(round(width / grid_step))
        if abs(n * grid_step - width) > 1e-9 * max(1.0, width):
            raise ValidationError("width must be a multiple of grid_step")
        return cls(grid_step, np.full(n + 1, -float(depth)))

    @classmethod
    def from_function(cls, f, length: float, grid_step: float, tail: str = "zero",
                      period_length: float | None = None) -> "Potential":
        """Sample ``f`` on ``[0, length]``; a periodic tail samples ``f`` over one more period."""
        n = int(round(length / grid_step))
        xs = np.arange(n + 1) * grid_step
        samples = np.array([f(x) for x in xs], dtype=float)
        period = None
        if tail == "periodic":
            p = int(round(period_length / grid_step))
            period = np.array([f(xs[-1] + (j + 1) * grid_step) for j in range(p)], dtype=float)
        return cls(grid_step, samples, tail, period)

    @property
    def extent(self) -> float:
        """Position of the last explicit sample."""
        return (self.samples.size - 1) * self.grid_step

    def _knot_values(self, j: np.ndarray) -> np.ndarray:
        n = self.samples.size
        out = np.zeros(j.shape)
        inside = j < n
        out[inside] = self.samples[j[inside]]
        if self.tail == "periodic":
            out[~inside] = self.period[(j[~inside] - n) % self.period.size]
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        h = self.grid_step
        if self.tail == "zero":
            knots = np.arange(self.samples.size) * h
            return np.where(x <= self.extent, np.interp(x, knots, self.samples), 0.0)
        j = np.clip(np.floor(x / h).astype(np.int64), 0, None)
        t = x / h - j
        return self._knot_values(j) * (1 - t) + self._knot_values(j + 1) * t

    def segments(self, a: float):
        """Linear pieces ``(x0, length, v_left, v_right)`` covering ``[0, a]``."""
        h = self.grid_step
        n = self.samples.size
        if self.tail == "zero":
            grid_end = min(a, self.extent)
            nseg = int(math.ceil(grid_end / h - 1e-12)) if grid_end > 0 else 0
        else:
            grid_end = a
            nseg = int(math.ceil(a / h - 1e-12))
        nseg = max(nseg, 0)
        j = np.arange(nseg, dtype=np.int64)
        x0 = j * h
        length = np.full(nseg, h)
        v0 = self._knot_values(j)
        v1 = self._knot_values(j + 1)
        if nseg:
            last = grid_end - x0[-1]
            frac = last / h
            v1[-1] = v0[-1] + (v1[-1] - v0[-1]) * frac
            length[-1] = last
        if self.tail == "zero" and a > grid_end + 1e-12 * h:
            x0 = np.append(x0, grid_end)
            length = np.append(length, a - grid_end)
            v0 = np.append(v0, 0.0)
            v1 = np.append(v1, 0.0)
        if x0.size == 0:
            raise ValidationError("integration length must be positive")
        keep = length > 0
        return x0[keep], length[keep], v0[keep], v1[keep]

    def to_dict(self) -> dict:
        tail = "zero" if self.tail == "zero" else {"periodic": [float(v) for v in self.period]}
        return {
            "grid_step": self.grid_step,
            "samples": [float(v) for v in self.samples],
            "tail": tail,
            "sup_norm": self.sup_norm,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Potential":
        tail = data.get("tail", "zero")
        if isinstance(tail, dict):
            return cls(data["grid_step"], data["samples"], "periodic", tail["periodic"], data.get("sup_norm"))
        return cls(data["grid_step"], data["samples"], tail, None, data.get("sup_norm"))


@dataclass(frozen=True)
class StepControl:
    """``h0=None`` picks ``min(grid_step, 0.01 / sqrt(1 + |E| + sup_norm))``."""

    h0: float | None = None
    max_refinements: int = 8
    theta_rtol: float = 1e-6


@dataclass(frozen=True)
class ShootingState:
    """Solution data at ``x``.  ``u`` and ``du`` are normalized; the true values
    are ``u * exp(log_scale)`` and ``du * exp(log_scale)``."""

    x: float
    u: float
    du: float
    theta: float
    zeros_so_far: int
    log_scale: float = 0.0
    at_zero: bool = False
    u_squared_integral: float = 0.0


@dataclass
class _Run:
    energies: np.ndarray
    step: float
    status: int
    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    theta: np.ndarray
    integral: np.ndarray
    log_scale: np.ndarray
    segments: tuple


def default_step(V: Potential, energies) -> float:
    e = float(np.max(np.abs(np.asarray(energies, dtype=float))))
    return min(V.grid_step, 0.01 / math.sqrt(1.0 + e + V.sup_norm))


def _check_length(a) -> float:
    a = float(a)
    if not (math.isfinite(a) and a > 0):
        raise ValidationError(f"interval length must be positive, got {a}")
    return a


def _check_energy(E) -> float:
    E = float(E)
    if not math.isfinite(E):
        raise ValidationError("energy must be finite")
    return E


def _integrate(V: Potential, energies, a: float, h: float, record: bool, segs=None) -> _Run:
    if segs is None:
        segs = V.segments(a)
    x0, length, v0, v1 = segs
    nsub = np.maximum(1, np.ceil(length / h - 1e-9)).astype(np.int64)
    energies = np.ascontiguousarray(energies, dtype=float)
    status, xs, us, dus, ths, ints, lss = _kernels.integrate(x0, length, v0, v1, nsub, energies, record)
    return _Run(energies, h, int(status), xs, us, dus, ths, ints, lss, segs)


def angle_count(theta: float, tol: float = ANGLE_TOL) -> tuple[int, bool]:
    """Zeros in the open interval implied by a final angle, and whether ``u(a) = 0``."""
    k = math.floor(theta / math.pi)
    if k >= 1 and theta - k * math.pi <= tol:
        return k - 1, True
    if (k + 1) * math.pi - theta <= tol:
        return k, True
    return max(k, 0), False


def _refined(V: Potential, energies, a: float, control: StepControl, record: bool,
             summary=None) -> _Run:
    """Halve the step until two successive runs agree.

    ``summary(run)`` returns ``(ints, floats)``; ints must match exactly and
    floats to ``theta_rtol``.  The default compares every solution's zero
    count and final angle.
    """
    if summary is None:
        def summary(run):
            th = run.theta[-1]
            return tuple(angle_count(t)[0] for t in th), th

    h = control.h0 if control.h0 is not None else default_step(V, energies)
    segs = V.segments(a)
    prev = _integrate(V, energies, a, h, record, segs)
    for _ in range(control.max_refinements):
        h *= 0.5
        cur = _integrate(V, energies, a, h, record, segs)
        if prev.status == 0 and cur.status == 0:
            ip, fp = summary(prev)
            ic, fc = summary(cur)
            fp, fc = np.asarray(fp, dtype=float), np.asarray(fc, dtype=float)
            if ip == ic and np.all(np.abs(fc - fp) <= control.theta_rtol * (1 + np.abs(fc))):
                return cur
        prev = cur
    raise ConvergenceError(
        f"step refinement limit ({control.max_refinements}) reached without a stable count "
        f"for E={list(np.atleast_1d(energies))} on [0, {a}]"
    )


def _state(run: _Run, i: int = 0, angle_tol: float = ANGLE_TOL) -> ShootingState:
    theta = float(run.theta[-1, i])
    zeros, at_zero = angle_count(theta, angle_tol)
    return ShootingState(
        x=float(run.x[-1]),
        u=float(run.u[-1, i]),
        du=float(run.du[-1, i]),
        theta=theta,
        zeros_so_far=zeros,
        log_scale=float(run.log_scale[-1, i]),
        at_zero=at_zero,
        u_squared_integral=float(run.integral[-1, i]),
    )


def shoot(V: Potential, E: float, a: float, control: StepControl = StepControl()) -> ShootingState:
    """Integrate from 0 to ``a`` and return the state there."""
    E = _check_energy(E)
    a = _check_length(a)
    return _state(_refined(V, [E], a, control, record=False))


@dataclass(frozen=True, eq=False)
class ShootingTrace:
    """Grid-level record of one solution (normalized ``u``, ``du``; see ``log_scale``)."""

    energy: float
    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    theta: np.ndarray
    log_scale: np.ndarray
    u_squared_integral: np.ndarray


def shoot_trace(V: Potential, E: float, a: float, control: StepControl = StepControl()) -> ShootingTrace:
    E = _check_energy(E)
    a = _check_length(a)
    run = _refined(V, [E], a, control, record=True)
    return ShootingTrace(E, run.x, run.u[:, 0], run.du[:, 0], run.theta[:, 0],
                         run.log_scale[:, 0], run.integral[:, 0])


def count_zeros(V: Potential, E: float, a: float, control: StepControl = StepControl(),
                angle_tol: float = ANGLE_TOL) -> CountResult:
    """Zeros of ``u(., E)`` in ``(0, a)``; equals the number of Dirichlet
    eigenvalues of ``[0, a]`` strictly below ``E``.

    ``boundary_hit`` means ``u(a, E) = 0`` to within ``angle_tol``, i.e. ``E``
    is itself a Dirichlet eigenvalue.
    """
    state = shoot(V, E, a, control)
    count, hit = angle_count(state.theta, angle_tol)
    return CountResult(count=count, boundary_hit=hit, length_used=state.x,
                       evidence=(state.theta / math.pi,))


# -- zero location ------------------------------------------------------------

def _rk4_partial(segs, x_start, y, energy, s):
    """One RK4 step of length ``s`` from ``x_start``; ``y = (u, du)``."""
    x0, length, v0, v1 = segs
    k = int(np.searchsorted(x0, x_start, side="right")) - 1
    slope = (v1[k] - v0[k]) / length[k] if length[k] > 0 else 0.0

    def pot(x):
        return v0[k] + slope * (x - x0[k])

    u, d = y
    vl, vm, vr = pot(x_start), pot(x_start + 0.5 * s), pot(x_start + s)
    k1u, k1d = d, (vl - energy) * u
    k2u, k2d = d + 0.5 * s * k1d, (vm - energy) * (u + 0.5 * s * k1u)
    k3u, k3d = d + 0.5 * s * k2d, (vm - energy) * (u + 0.5 * s * k2u)
    k4u, k4d = d + s * k3d, (vr - energy) * (u + s * k3u)
    return (u + s * (k1u + 2 * k2u + 2 * k3u + k4u) / 6,
            d + s * (k1d + 2 * k2d + 2 * k3d + k4d) / 6)


def _crossing_steps(theta: np.ndarray) -> np.ndarray:
    """Indices ``i`` such that ``theta`` passes a positive multiple of pi in step ``i -> i+1``."""
    lev = np.floor(theta / math.pi)
    return np.nonzero(lev[1:] > lev[:-1])[0]


def _zeros_from_run(run: _Run, i: int = 0) -> np.ndarray:
    theta = run.theta[:, i]
    out = []
    for idx in _crossing_steps(theta):
        xl, xr = run.x[idx], run.x[idx + 1]
        y = (run.u[idx, i], run.du[idx, i])
        E = run.energies[i]
        if run.u[idx, i] == 0.0:
            if xl > 0:
                out.append(xl)
            continue

        def f(s):
            return _rk4_partial(run.segments, xl, y, E, s)[0]

        span = xr - xl
        fa, fb = f(0.0), f(span)
        if fb == 0.0:
            out.append(xr)
        elif fa * fb < 0:
            out.append(xl + brentq(f, 0.0, span, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        else:
            out.append(xr)
    return np.array(out)


def locate_zeros(V: Potential, E: float, a: float, control: StepControl = StepControl()) -> np.ndarray:
    """Positions of the zeros of ``u(., E)`` in ``(0, a]``, ascending."""
    E = _check_energy(E)
    a = _check_length(a)
    run = _refined(V, [E], a, control, record=True)
    return _zeros_from_run(run)


def zero_trajectory_derivative(V: Potential, E: float, x0: float,
                               control: StepControl = StepControl(),
                               locator_tol: float = 1e-6) -> float:
    """``dx0/dE = -|u'(x0)|^-2 int_0^x0 u^2`` for a zero ``x0`` of ``u(., E)``.

    Always negative: zeros move toward the origin as ``E`` increases.
    """
    E = _check_energy(E)
    x0 = _check_length(x0)
    state = shoot(V, E, x0, control)
    k = round(state.theta / math.pi)
    if k < 1 or abs(state.theta - k * math.pi) > locator_tol:
        raise ValidationError(
            f"x0 = {x0} is not a zero of u(., {E}): theta(x0)/pi = {state.theta / math.pi:.9f}"
        )
    return -state.u_squared_integral / state.du ** 2


# -- Dirichlet eigenvalues ----------------------------------------------------

def _theta_at(V, E, a, control):
    try:
        return shoot(V, E, a, control).theta
    except ConvergenceError:
        # Close to an eigenvalue with a deep in a forbidden region, theta(a)
        # amplifies round-off by exp(2 kappa L) and cannot settle to theta_rtol.
        # Bisection only needs the side of k pi, so a stable zero count and a
        # looser angle agreement suffice there.
        return shoot(V, E, a, replace(control, theta_rtol=1e-3)).theta


def dirichlet_eigs(V: Potential, a: float, window, tol: float = 1e-8,
                   control: StepControl | None = None, angle_tol: float = ANGLE_TOL) -> list[float]:
    """Eigenvalues of ``-d^2/dx^2 + V`` on ``[0, a]`` with ``u(0) = u(a) = 0`` in ``(lo, hi)``.

    Bisection on the strictly increasing ``theta(a, E)``: the ``k``-th
    eigenvalue solves ``theta(a, E) = k pi``.  Each returned value is the
    midpoint of a bracket of width ``<= tol`` and is checked afterwards to have
    an eigenfunction with ``k - 1`` interior zeros.  One step size, fixed from
    the larger window endpoint, is used for every energy so that the computed
    ``theta(a, .)`` is a smooth function.
    """
    a = _check_length(a)
    lo, hi = (float(w) for w in window)
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise ValidationError(f"window must satisfy lo < hi, got ({lo}, {hi})")
    if not tol > 0:
        raise ValidationError("tol must be positive")
    if control is None:
        control = StepControl(h0=default_step(V, [lo, hi]))

    def theta(E):
        return _theta_at(V, E, a, control)

    # an endpoint eigenvalue is pulled into the window by moving the endpoint
    # outward by tol; that step need not clear angle_tol, only cross k pi
    t_lo = theta(lo)
    if angle_count(t_lo, angle_tol)[1] and t_lo > math.pi / 2:
        k = round(t_lo / math.pi)
        lo -= tol
        t_lo = theta(lo)
        if not t_lo < k * math.pi:
            raise BoundaryError(f"window endpoint {lo + tol} is a Dirichlet eigenvalue")
    t_hi = theta(hi)
    if angle_count(t_hi, angle_tol)[1] and t_hi > math.pi / 2:
        k = round(t_hi / math.pi)
        hi += tol
        t_hi = theta(hi)
        if not t_hi > k * math.pi:
            raise BoundaryError(f"window endpoint {hi - tol} is a Dirichlet eigenvalue")

    def multiples(tl, th):
        # k pi in (tl, th]: a midpoint landing exactly on k pi keeps k on its left
        k_lo = max(1, math.floor(tl / math.pi) + 1)
        k_hi = math.floor(th / math.pi)
        return k_lo, k_hi

    found: list[tuple[float, int]] = []
    stack = [(lo, hi, t_lo, t_hi)]
    while stack:
        l, h, tl, th = stack.pop()
        k_lo, k_hi = multiples(tl, th)
        if k_hi < k_lo:
            continue
        mid = 0.5 * (l + h)
        if k_lo == k_hi and (h - l <= tol or not l < mid < h):
            found.append((mid, k_lo))
            continue
        if not l < mid < h:
            raise SturmError(f"unresolvable eigenvalue cluster near E = {mid}")
        tm = theta(mid)
        stack.append((mid, h, tm, th))
        stack.append((l, mid, tl, tm))
    found.sort()

    # theta(a, .) can rise by pi over an energy range far below tol when a
    # sits deep in a forbidden region, so the midpoint may carry the k-th zero
    # just inside a
    ks = [k for _, k in found]
    if ks and ks != list(range(ks[0], ks[0] + len(ks))):
        raise SturmError(f"eigenvalue indices are not consecutive: {ks}")
    for E, k in found:
        zeros = angle_count(theta(E), angle_tol)[0]
        if zeros not in (k - 1, k):
            raise SturmError(f"eigenvalue {E}: eigenfunction has {zeros} interior zeros, expected {k - 1}")
    return [E for E, _ in found]


# -- half line ----------------------------------------------------------------

@dataclass(frozen=True)
class HalflinePolicy:
    a_start: float = 10.0
    growth: float = 2.0
    window: int = 3
    a_max: float = 1280.0


def count_below_halfline(V: Potential, E: float, policy: HalflinePolicy = HalflinePolicy(),
                         control: StepControl = StepControl()) -> CountResult:
    """``dim P_(-inf, E)(H)`` on ``[0, inf)`` as the stable zero count on growing intervals.

    Non-convergence (zero counts still growing at ``a_max``, as inside the
    essential spectrum) is reported through ``converged=False``.
    """
    E = _check_energy(E)
    if policy.a_start <= 0 or policy.growth <= 1 or policy.window < 1 or policy.a_max < policy.a_start:
        raise ValidationError(f"invalid policy {policy}")
    history: list[int] = []
    a = policy.a_start
    last = None
    while a <= policy.a_max * (1 + 1e-12):
        last = count_zeros(V, E, a, control)
        if history and last.count < history[-1]:
            raise SturmError(f"zero counts decreased with interval length at a={a}")
        history.append(last.count)
        if len(history) >= policy.window and len(set(history[-policy.window:])) == 1:
            return CountResult(last.count, last.boundary_hit, converged=True, length_used=a,
                               evidence=last.evidence, history=tuple(history))
        a *= policy.growth
    return CountResult(last.count, last.boundary_hit, converged=False, length_used=last.length_used,
                       evidence=last.evidence, history=tuple(history))


# -- comparison ---------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    holds: bool
    violation: tuple[float, float] | None


def comparison_check(V: Potential, E1: float, E2: float, a: float,
                     control: StepControl = StepControl(), gap: float = 1e-9) -> ComparisonReport:
    """Check that ``u(., E2)`` vanishes strictly between consecutive zeros of ``u(., E1)``
    (the origin included) inside ``(0, a)``."""
    E1, E2 = _check_energy(E1), _check_energy(E2)
    a = _check_length(a)
    if not E1 < E2:
        raise ValidationError("comparison_check needs E1 < E2")
    z1 = locate_zeros(V, E1, a, control)
    z1 = np.concatenate(([0.0], z1[z1 < a - gap]))
    z2 = locate_zeros(V, E2, a, control)
    for left, right in zip(z1[:-1], z1[1:]):
        if not np.any((z2 > left + gap) & (z2 < right - gap)):
            return ComparisonReport(False, (float(left), float(right)))
    return ComparisonReport(True, None)
