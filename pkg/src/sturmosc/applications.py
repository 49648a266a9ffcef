"""Bargmann's bound on half-line bound states, and the sign-change profile of ``P_l(E0)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .counting import _count_at
from .errors import ValidationError
from .jacobi import DEFAULT_ZERO_THRESHOLD, JacobiOperator, MonicRecurrence, _check_n
from .prufer import HalflinePolicy, Potential, StepControl, count_below_halfline

BOUND_STATE_ENERGY = -1e-9


@dataclass(frozen=True)
class BargmannReport:
    bound: float
    computed_count: int
    margin: float
    converged: bool


def bargmann_integral(V: Potential) -> float:
    """Trapezoid value of ``int_0^inf x |V_-(x)| dx`` on the sample grid, ``V_- = min(V, 0)``."""
    if V.tail != "zero":
        raise ValidationError("Bargmann's bound needs a zero tail; the integral diverges otherwise")
    x = np.arange(V.samples.size) * V.grid_step
    f = x * np.abs(np.minimum(V.samples, 0.0))
    return float(trapezoid(f, x)) if f.size > 1 else 0.0


def bargmann_bound(V: Potential, policy: HalflinePolicy = HalflinePolicy(),
                   control: StepControl = StepControl()) -> BargmannReport:
    """Compare ``int x |V_-|`` with the number of eigenvalues below 0.

    Using the negative part keeps the bound valid for sign-changing ``V``,
    since replacing ``V`` by ``V_-`` can only add bound states.  The count is
    taken at ``E = -1e-9`` to stay off the zero-energy threshold.
    """
    bound = bargmann_integral(V)
    res = count_below_halfline(V, BOUND_STATE_ENERGY, policy, control)
    return BargmannReport(bound, res.count, bound - res.count, res.converged)


@dataclass(frozen=True)
class SignChangeProfile:
    above_changes: tuple[int, ...]
    below_matches: tuple[int, ...]
    total_above: int
    boundary_hit: bool = False


def sign_change_profile(J: JacobiOperator, E0: float, N: int,
                        zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> SignChangeProfile:
    """Indices ``l <= N`` where ``sgn P_{l-1}(E0)`` and ``sgn P_l(E0)`` differ, and where they agree.

    Uses ``sgn(0) = +1`` and, like :func:`count_above`, drops ``l = N`` when
    ``P_N(E0)`` vanishes.  For a compact perturbation of the free operator and
    ``|E0| > 2`` the differing indices stop after some ``N0``.
    """
    N = _check_n(J, N)
    rec = MonicRecurrence(J, float(E0), zero_threshold).extend(N)
    above = _count_at(rec, N, above=True)
    below = _count_at(rec, N, above=False)
    return SignChangeProfile(above.evidence, below.evidence, above.count, above.boundary_hit)
