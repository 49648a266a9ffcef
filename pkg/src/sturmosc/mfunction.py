"""Corner resolvent entries of Jacobi matrices and the Stieltjes continued fraction.

Sign convention: ``m(z; J) = -(z - J)^{-1}_{11}``, which maps the upper half
plane into itself, and

    m(z; J) = 1 / (b_1 - z - a_1^2 m(z; J^(1))).

Complex energies are plain Python ``complex`` values (the CLI spells them
``"re,im"``).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ConvergenceError, PoleError, ValidationError
from .jacobi import ConstantTail, JacobiOperator, _check_n, strip_leading

DEFAULT_POLE_THRESHOLD = 1e-12


@dataclass(frozen=True)
class MFunctionResult:
    value: complex
    n_used: int
    converged: bool = True


def _as_complex(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError("energy must have finite components")
    return z


def _monic_last(J: JacobiOperator, z: complex, n: int):
    """Return ``(v, e, rel)`` with ``P_n(z) = v * 2**e``.

    ``rel`` is ``|P_n|`` relative to the larger of the two recurrence terms
    that produced it, a scale-free measure of closeness to a zero.
    """
    a, b = J.coefficients(n)
    prev, cur, e = 0j, 1 + 0j, 0
    rel = 1.0
    for ell in range(1, n + 1):
        t1 = (z - b[ell - 1]) * cur
        t2 = a[ell - 2] ** 2 * prev if ell >= 2 else 0j
        nxt = t1 - t2
        ref = max(abs(cur), abs(t1), abs(t2))
        rel = abs(nxt) / ref if ref > 0 else 0.0
        prev, cur = cur, nxt
        f = math.frexp(max(abs(prev), abs(cur)))[1]
        if f:
            scale = 2.0 ** -f
            prev *= scale
            cur *= scale
            e += f
    return cur, e, rel


def green_corner(J: JacobiOperator, n: int, z, pole_threshold: float = DEFAULT_POLE_THRESHOLD) -> complex:
    """``(z - J_n)^{-1}_{11} = P_{n-1}(z; J^(1)) / P_n(z; J)``."""
    n = _check_n(J, n)
    z = _as_complex(z)
    den, e_den, rel = _monic_last(J, z, n)
    if den == 0 or rel <= pole_threshold:
        raise PoleError(f"z = {z} is (numerically) an eigenvalue of J_{n}")
    if n == 1:
        num, e_num = 1 + 0j, 0
    else:
        num, e_num, _ = _monic_last(strip_leading(J, 1), z, n - 1)
    return complex(num / den * 2.0 ** (e_num - e_den))


def tail_m_function(a_inf: float, b_inf: float, z) -> complex:
    """m-function of the constant operator ``a_k = a_inf``, ``b_k = b_inf``.

    Root of ``a^2 m^2 + (z - b) m + 1 = 0`` with ``|a m| < 1``.
    """
    z = _as_complex(z)
    w = z - b_inf
    disc = cmath.sqrt(w * w - 4 * a_inf * a_inf)
    r1 = (-w + disc) / (2 * a_inf * a_inf)
    r2 = (-w - disc) / (2 * a_inf * a_inf)
    return r1 if abs(a_inf * r1) < abs(a_inf * r2) else r2


def _truncated(J: JacobiOperator, z: complex, depth: int, seed: complex) -> complex:
    a, b = J.coefficients(depth)
    m = seed
    for k in range(depth - 1, -1, -1):
        m = 1.0 / (b[k] - z - a[k] * a[k] * m)
    return complex(m)


def m_function(J: JacobiOperator, z, tol: float = 1e-12, n_max: int = 2 ** 16,
               tail_seed: bool = False, n_start: int = 1) -> MFunctionResult:
    """Evaluate ``m(z; J)`` by backward recursion of the continued fraction.

    The fraction is truncated at depth ``n`` (tail seeded with 0, which is
    exactly ``-(z - J_n)^{-1}_{11}``) and ``n`` is doubled until two successive
    values differ by less than ``tol``.  With ``tail_seed=True`` and a constant
    tail, the tail is seeded with its closed-form m-function instead, which is
    exact as soon as the depth covers the explicit prefix.

    Real ``z`` must lie outside ``[-J.spectral_bound, J.spectral_bound]``.
    """
    z = _as_complex(z)
    if z.imag == 0 and abs(z.real) <= J.spectral_bound:
        raise ValidationError(
            f"real z = {z.real} lies inside [-{J.spectral_bound}, {J.spectral_bound}], "
            "which may contain spectrum"
        )
    if not tol > 0:
        raise ValidationError("tol must be positive")
    use_seed = tail_seed and J.kind == "infinite" and isinstance(J.tail, ConstantTail)
    if tail_seed and not use_seed:
        raise ValidationError("analytic tail seeding needs an infinite operator with a constant tail")
    seed = tail_m_function(J.tail.a, J.tail.b, z) if use_seed else 0j
    prefix = max(len(J.a), len(J.b)) if use_seed else 0

    depth = max(int(n_start), 1, prefix)
    if J.kind == "finite":
        depth = min(depth, J.size)
    prev = _truncated(J, z, depth, seed)
    while True:
        if J.kind == "finite" and depth == J.size:
            return MFunctionResult(prev, depth, True)
        nxt_depth = 2 * depth
        if J.kind == "finite":
            nxt_depth = min(nxt_depth, J.size)
        if nxt_depth > n_max:
            raise ConvergenceError(
                f"m-function did not converge to tol={tol} by depth {depth}",
                partial=MFunctionResult(prev, depth, False),
            )
        cur = _truncated(J, z, nxt_depth, seed)
        if abs(cur - prev) < tol:
            return MFunctionResult(cur, nxt_depth, True)
        prev, depth = cur, nxt_depth
