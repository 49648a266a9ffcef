"""Eigenvalue counting for Jacobi matrices from sign changes of ``P_l(E0)``.

For a truncation ``J_n`` the number of eigenvalues above ``E0`` equals the
number of ``l in 1..n`` with ``sgn P_{l-1}(E0) != sgn P_l(E0)``, where
``sgn(0) = +1``.  If ``P_n(E0) = 0`` the ``l = n`` term is dropped and the
result reports ``boundary_hit``; the count is then the number of eigenvalues
strictly above (or, for :func:`count_below`, strictly below) ``E0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BoundaryError, SturmError, ValidationError
from .jacobi import (
    DEFAULT_ZERO_THRESHOLD,
    JacobiOperator,
    MonicRecurrence,
    _check_n,
)


@dataclass(frozen=True)
class CountResult:
    """A nonnegative count together with the flags and evidence behind it.

    ``evidence`` holds the indices ``l`` (discrete side) or positions ``x``
    (continuum side) that contributed to ``count``.  ``n_used`` is the
    truncation size of the last evaluated Jacobi problem; ``length_used`` the
    last interval length on the continuum side.
    """

    count: int
    boundary_hit: bool = False
    intermediate_zeros: tuple[int, ...] = ()
    converged: bool = True
    n_used: int | None = None
    length_used: float | None = None
    evidence: tuple = ()
    history: tuple[int, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class EigenvalueInterval:
    lo: float
    hi: float
    count_in: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValidationError("EigenvalueInterval needs lo < hi")
        if self.count_in < 1:
            raise ValidationError("EigenvalueInterval must contain an eigenvalue")


@dataclass(frozen=True)
class InfiniteCountPolicy:
    n_start: int = 64
    growth: float = 2.0
    window: int = 3
    n_max: int = 2 ** 16


@dataclass(frozen=True)
class BoundsReport:
    holds: bool
    witness: int | None
    side: str | None
    certificate: bool


def _sign_array(rec: MonicRecurrence, n: int) -> np.ndarray:
    vals = np.asarray(rec.scaled[: n + 1])
    return np.where(vals < 0, -1, 1)


def _count_at(rec: MonicRecurrence, n: int, above: bool) -> CountResult:
    s = _sign_array(rec, n)
    differ = s[1:] != s[:-1]
    hits = np.nonzero(differ if above else ~differ)[0] + 1
    boundary = rec.is_zero(n)
    if boundary:
        hits = hits[hits != n]
    return CountResult(
        count=int(hits.size),
        boundary_hit=bool(boundary),
        intermediate_zeros=tuple(z for z in rec.zeros if z < n),
        converged=True,
        n_used=n,
        evidence=tuple(int(h) for h in hits),
    )


def count_above(J: JacobiOperator, n: int, E0: float,
                zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> CountResult:
    """Number of eigenvalues of ``J_n`` greater than ``E0``."""
    n = _check_n(J, n)
    rec = MonicRecurrence(J, E0, zero_threshold).extend(n)
    return _count_at(rec, n, above=True)


def count_below(J: JacobiOperator, n: int, E0: float,
                zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> CountResult:
    """Number of eigenvalues of ``J_n`` less than ``E0``."""
    n = _check_n(J, n)
    rec = MonicRecurrence(J, E0, zero_threshold).extend(n)
    return _count_at(rec, n, above=False)


def count_above_infinite(J: JacobiOperator, E0: float,
                         policy: InfiniteCountPolicy = InfiniteCountPolicy(),
                         zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> CountResult:
    """``dim P_(E0, inf)(J)`` for a semi-infinite ``J`` by growing truncations.

    Truncation sizes grow geometrically from ``policy.n_start``; the count is
    reported as converged once ``policy.window`` successive sizes agree.  Inside
    the essential spectrum the counts keep growing and the result comes back
    with ``converged=False`` after ``policy.n_max``.
    """
    if J.kind != "infinite":
        raise ValidationError("count_above_infinite needs an infinite Jacobi operator")
    if policy.n_start < 1 or policy.growth <= 1 or policy.window < 1 or policy.n_max < policy.n_start:
        raise ValidationError(f"invalid policy {policy}")
    rec = MonicRecurrence(J, E0, zero_threshold)
    history: list[int] = []
    n = policy.n_start
    last = None
    while n <= policy.n_max:
        rec.extend(n)
        last = _count_at(rec, n, above=True)
        if history and last.count < history[-1]:
            raise SturmError(
                f"truncation counts decreased ({history[-1]} -> {last.count} at n={n}); "
                "numerical breakdown"
            )
        history.append(last.count)
        if len(history) >= policy.window and len(set(history[-policy.window:])) == 1:
            return _with(last, converged=True, history=tuple(history))
        n = max(n + 1, math.ceil(n * policy.growth))
    return _with(last, converged=False, history=tuple(history))


def _with(result: CountResult, **changes) -> CountResult:
    return replace(result, **changes)


def eig_bisect(J: JacobiOperator, n: int, window, tol: float = 1e-10,
               zero_threshold: float = DEFAULT_ZERO_THRESHOLD):
    """All eigenvalues of ``J_n`` in the open window ``(lo, hi)``, by bisection.

    Returns ``[(approx, EigenvalueInterval), ...]`` sorted ascending; each
    bracket has width ``<= tol`` and ``approx`` is its midpoint.  An endpoint
    that is itself an eigenvalue is pushed outward by ``tol`` once (so that
    eigenvalue is then included); if the pushed endpoint still hits an
    eigenvalue, :class:`BoundaryError` is raised.
    """
    n = _check_n(J, n)
    lo, hi = (float(w) for w in window)
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise ValidationError(f"window must satisfy lo < hi, got ({lo}, {hi})")
    if not tol > 0:
        raise ValidationError("tol must be positive")

    def above(E):
        return count_above(J, n, E, zero_threshold)

    r_lo = above(lo)
    if r_lo.boundary_hit:
        lo -= tol
        r_lo = above(lo)
        if r_lo.boundary_hit:
            raise BoundaryError(f"window endpoint {lo} is an eigenvalue of J_{n}")
    r_hi = above(hi)
    if r_hi.boundary_hit:
        hi += tol
        r_hi = above(hi)
        if r_hi.boundary_hit:
            raise BoundaryError(f"window endpoint {hi} is an eigenvalue of J_{n}")

    found = []
    stack = [(lo, hi, r_lo.count, r_hi.count)]
    while stack:
        l, h, cl, ch = stack.pop()
        k = cl - ch
        if k <= 0:
            continue
        if k == 1 and h - l <= tol:
            found.append((0.5 * (l + h), EigenvalueInterval(l, h, 1)))
            continue
        mid = 0.5 * (l + h)
        if not l < mid < h:
            # eigenvalues closer than floating-point resolution
            found.extend([(mid, EigenvalueInterval(l, h, k))] * k)
            continue
        r = above(mid)
        if r.boundary_hit:
            mid = mid + (h - l) * 2.0 ** -20
            r = above(mid)
        stack.append((mid, h, r.count, ch))
        stack.append((l, mid, cl, r.count))
    found.sort(key=lambda item: item[0])
    return found


def bounds_check(J: JacobiOperator, n_max: int, a_minus: float, a_plus: float,
                 zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> BoundsReport:
    """Check ``P_l(a_plus) > 0`` and ``(-1)^l P_l(a_minus) > 0`` for ``l = 1..n_max``.

    For a finite ``J`` with ``n_max == size`` a passing check certifies
    ``a_minus <= J <= a_plus``; otherwise it is only a necessary condition and
    ``certificate`` is False.
    """
    n_max = _check_n(J, n_max)
    if not a_minus < a_plus:
        raise ValidationError("bounds_check needs a_minus < a_plus")
    upper = MonicRecurrence(J, a_plus, zero_threshold).extend(n_max)
    lower = MonicRecurrence(J, a_minus, zero_threshold).extend(n_max)
    for ell in range(1, n_max + 1):
        if upper.is_zero(ell) or upper.scaled[ell] < 0:
            return BoundsReport(False, ell, "upper", False)
        v = lower.scaled[ell] * (-1) ** ell
        if lower.is_zero(ell) or v < 0:
            return BoundsReport(False, ell, "lower", False)
    certificate = J.kind == "finite" and n_max == J.size
    return BoundsReport(True, None, None, certificate)
