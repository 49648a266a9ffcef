"""Jacobi operators and overflow-safe evaluation of their monic polynomials.

Coefficients are indexed from 1, as in ``(h u)_n = a_n u_{n+1} + b_n u_n +
a_{n-1} u_{n-1}``.  Python sequences ``a`` and ``b`` hold ``a_1, a_2, ...`` and
``b_1, b_2, ...`` at positions 0, 1, ...; the accessors :meth:`JacobiOperator.a_at`
and :meth:`JacobiOperator.b_at` take the 1-based index.

The monic polynomials obey ``P_0 = 1``, ``P_{-1} = 0`` and

    P_{l}(E) = (E - b_l) P_{l-1}(E) - a_{l-1}^2 P_{l-2}(E),

so that ``P_n(E) = det(E - J_n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError

DEFAULT_ZERO_THRESHOLD = 1e-12


@dataclass(frozen=True)
class ConstantTail:
    """Coefficients ``a_k = a``, ``b_k = b`` beyond the explicit prefix."""

    a: float
    b: float


@dataclass(frozen=True)
class PeriodicTail:
    """Coefficients cycling through ``period_a`` / ``period_b`` beyond the prefix."""

    period_a: tuple[float, ...]
    period_b: tuple[float, ...]


@dataclass(frozen=True)
class JacobiOperator:
    """A finite or (tail-ruled) semi-infinite Jacobi matrix.

    ``kind == "finite"``: ``b`` has ``n`` entries and ``a`` has ``n - 1``.
    ``kind == "infinite"``: ``a`` and ``b`` are explicit prefixes (possibly of
    different lengths, possibly empty) continued by ``tail``.

    ``bound`` is a constant ``M`` with ``|a_k| + |b_k| <= M`` for every ``k``.
    When omitted it is computed exactly from the coefficients.
    """

    kind: str
    a: tuple[float, ...]
    b: tuple[float, ...]
    tail: ConstantTail | PeriodicTail | None = None
    bound: float | None = None
    _sup_row: float = field(default=0.0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        if self.kind == "finite":
            if self.tail is not None:
                raise ValidationError("finite Jacobi operator cannot carry a tail")
            if len(self.b) < 1:
                raise ValidationError("finite Jacobi operator needs at least one diagonal entry")
            if len(self.a) != len(self.b) - 1:
                raise ValidationError(
                    f"finite Jacobi operator of size {len(self.b)} needs "
                    f"{len(self.b) - 1} off-diagonal entries, got {len(self.a)}"
                )
        elif self.kind == "infinite":
            if isinstance(self.tail, PeriodicTail):
                pa = tuple(float(x) for x in self.tail.period_a)
                pb = tuple(float(x) for x in self.tail.period_b)
                if not pa or not pb:
                    raise ValidationError("periodic tail blocks must be non-empty")
                object.__setattr__(self, "tail", PeriodicTail(pa, pb))
            elif isinstance(self.tail, ConstantTail):
                object.__setattr__(
                    self, "tail", ConstantTail(float(self.tail.a), float(self.tail.b))
                )
            else:
                raise ValidationError("infinite Jacobi operator needs a constant or periodic tail")
        else:
            raise ValidationError(f"unknown Jacobi kind {self.kind!r}")

        a_all, b_all = self.coefficients(self._representative_length())
        check = a_all if self.kind == "infinite" else a_all[:-1]
        if not np.all(np.isfinite(a_all)) or not np.all(np.isfinite(b_all)):
            raise ValidationError("Jacobi coefficients must be finite")
        if np.any(check <= 0):
            raise ValidationError("off-diagonal entries a_k must be strictly positive")

        sup = float(np.max(np.abs(a_all) + np.abs(b_all)))
        if self.bound is None:
            object.__setattr__(self, "bound", sup)
        else:
            bound = float(self.bound)
            if not bound >= sup * (1 - 1e-14):
                raise ValidationError(
                    f"declared bound {bound} is below sup(|a_k|+|b_k|) = {sup}"
                )
            object.__setattr__(self, "bound", bound)
        a_left = np.concatenate(([0.0], a_all[:-1]))
        object.__setattr__(
            self, "_sup_row", float(np.max(a_left + np.abs(b_all) + np.abs(a_all)))
        )

    # -- construction helpers -------------------------------------------------

    @classmethod
    def free(cls) -> "JacobiOperator":
        """The free operator ``a_k = 1``, ``b_k = 0``; spectrum ``[-2, 2]``."""
        return cls("infinite", (), (), ConstantTail(1.0, 0.0))

    @classmethod
    def finite(cls, a: Sequence[float], b: Sequence[float], bound=None) -> "JacobiOperator":
        return cls("finite", tuple(a), tuple(b), None, bound)

    @classmethod
    def perturbed_free(cls, a=(), b=(), bound=None) -> "JacobiOperator":
        """Prefix ``a``, ``b`` followed by the free tail."""
        return cls("infinite", tuple(a), tuple(b), ConstantTail(1.0, 0.0), bound)

    # -- coefficient access ---------------------------------------------------

    @property
    def size(self) -> int | None:
        return len(self.b) if self.kind == "finite" else None

    @property
    def spectral_bound(self) -> float:
        """Gershgorin radius ``sup_k (a_{k-1} + |b_k| + a_k)``; ``||J|| <= spectral_bound``.

        Note that ``bound`` alone does not confine the spectrum: the free
        operator has ``bound == 1`` and spectrum ``[-2, 2]``.
        """
        return self._sup_row

    def _representative_length(self) -> int:
        if self.kind == "finite":
            return len(self.b)
        # two tail rows, so the off-diagonals on both sides of a tail row are seen
        base = max(len(self.a), len(self.b)) + 2
        if isinstance(self.tail, PeriodicTail):
            base += math.lcm(len(self.tail.period_a), len(self.tail.period_b))
        return base

    def a_at(self, k: int) -> float:
        if k < 1:
            raise IndexError("Jacobi coefficients are indexed from 1")
        if k <= len(self.a):
            return self.a[k - 1]
        if self.kind == "finite":
            raise IndexError(f"a_{k} is outside a finite operator of size {self.size}")
        if isinstance(self.tail, ConstantTail):
            return self.tail.a
        p = self.tail.period_a
        return p[(k - len(self.a) - 1) % len(p)]

    def b_at(self, k: int) -> float:
        if k < 1:
            raise IndexError("Jacobi coefficients are indexed from 1")
        if k <= len(self.b):
            return self.b[k - 1]
        if self.kind == "finite":
            raise IndexError(f"b_{k} is outside a finite operator of size {self.size}")
        if isinstance(self.tail, ConstantTail):
            return self.tail.b
        p = self.tail.period_b
        return p[(k - len(self.b) - 1) % len(p)]

    def coefficients(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(a_1..a_n, b_1..b_n)`` as arrays.

        For a finite operator of size ``n`` the missing ``a_n`` is reported as 0.
        """
        if self.kind == "finite" and n > len(self.b):
            raise ValidationError(f"n = {n} exceeds operator size {len(self.b)}")
        return (
            _expand(self.a, self.tail, "a", n, self.kind),
            _expand(self.b, self.tail, "b", n, self.kind),
        )

    # -- serialization --------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "JacobiOperator":
        kind = data.get("kind")
        tail = None
        raw_tail = data.get("tail")
        if raw_tail is not None:
            if "period_a" in raw_tail or "period_b" in raw_tail:
                tail = PeriodicTail(tuple(raw_tail["period_a"]), tuple(raw_tail["period_b"]))
            else:
                tail = ConstantTail(raw_tail["a"], raw_tail["b"])
        return cls(kind, tuple(data.get("a", ())), tuple(data.get("b", ())), tail, data.get("bound"))

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "a": list(self.a), "b": list(self.b)}
        if isinstance(self.tail, ConstantTail):
            out["tail"] = {"a": self.tail.a, "b": self.tail.b}
        elif isinstance(self.tail, PeriodicTail):
            out["tail"] = {"period_a": list(self.tail.period_a), "period_b": list(self.tail.period_b)}
        out["bound"] = self.bound
        return out


def _expand(prefix, tail, which, n, kind):
    out = np.zeros(n)
    m = min(n, len(prefix))
    out[:m] = prefix[:m]
    if n > m and kind == "infinite":
        if isinstance(tail, ConstantTail):
            out[m:] = getattr(tail, which)
        else:
            block = np.asarray(tail.period_a if which == "a" else tail.period_b)
            idx = np.arange(n - m) % len(block)
            out[m:] = block[idx]
    return out


@dataclass(frozen=True)
class ScaledPolyValue:
    """``sign * mantissa * 2**exponent`` with ``mantissa`` in ``[1, 2)`` (or 0)."""

    sign: int
    mantissa: float
    exponent: int

    @classmethod
    def from_scaled(cls, value: float, exponent: int) -> "ScaledPolyValue":
        if value == 0.0:
            return cls(0, 0.0, 0)
        m, e = math.frexp(abs(value))
        return cls(1 if value > 0 else -1, 2.0 * m, exponent + e - 1)

    def __float__(self) -> float:
        # OverflowError propagates for values beyond double range
        return self.sign * math.ldexp(self.mantissa, self.exponent)

    @property
    def log2_abs(self) -> float:
        if self.sign == 0:
            return -math.inf
        return math.log2(self.mantissa) + self.exponent


@dataclass(frozen=True)
class PolySequenceEval:
    """``P_0(E0), ..., P_n(E0)`` in scaled form."""

    energy: float
    values: tuple[ScaledPolyValue, ...]
    exact_zero_indices: frozenset[int]

    @property
    def n(self) -> int:
        return len(self.values) - 1

    def signs(self) -> np.ndarray:
        """Signs with the counting convention ``sgn(0) = +1``."""
        return np.array([1 if v.sign >= 0 else -1 for v in self.values], dtype=int)

    def as_floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])


class MonicRecurrence:
    """Streaming evaluation of ``P_l(E)`` for increasing ``l`` at a fixed energy.

    The last two values share one binary exponent and are renormalized after
    every step, so arbitrarily long sequences never overflow.  ``extend`` may be
    called repeatedly; earlier values are kept.
    """

    def __init__(self, J: JacobiOperator, energy: float, zero_threshold: float = DEFAULT_ZERO_THRESHOLD):
        energy = float(energy)
        if not math.isfinite(energy):
            raise ValidationError("energy must be finite")
        self.J = J
        self.energy = energy
        self.zero_threshold = zero_threshold
        self._prev = 0.0
        self._cur = 1.0
        self._exp = 0
        self.scaled = [1.0]
        self.exponents = [0]
        self.zeros: list[int] = []

    @property
    def n(self) -> int:
        return len(self.scaled) - 1

    def extend(self, n: int) -> "MonicRecurrence":
        start = self.n
        if n <= start:
            return self
        a, b = self.J.coefficients(n)
        E = self.energy
        eps = self.zero_threshold
        prev, cur, exp = self._prev, self._cur, self._exp
        scaled, exps, zeros = self.scaled, self.exponents, self.zeros
        for ell in range(start + 1, n + 1):
            t1 = (E - b[ell - 1]) * cur
            t2 = a[ell - 2] ** 2 * prev if ell >= 2 else 0.0
            nxt = t1 - t2
            if abs(nxt) <= eps * max(abs(cur), abs(t1), abs(t2)):
                nxt = 0.0
                zeros.append(ell)
            prev, cur = cur, nxt
            f = math.frexp(max(abs(prev), abs(cur)))[1]
            if f:
                prev = math.ldexp(prev, -f)
                cur = math.ldexp(cur, -f)
                exp += f
            scaled.append(cur)
            exps.append(exp)
        self._prev, self._cur, self._exp = prev, cur, exp
        return self

    def sign(self, ell: int) -> int:
        """Sign of ``P_ell`` with ``sgn(0) = +1``."""
        return -1 if self.scaled[ell] < 0 else 1

    def is_zero(self, ell: int) -> bool:
        return self.scaled[ell] == 0.0


def _check_n(J: JacobiOperator, n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    if J.kind == "finite" and n > J.size:
        raise ValidationError(f"n = {n} exceeds operator size {J.size}")
    return n


def eval_monic_sequence(J: JacobiOperator, E0: float, n: int,
                        zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> PolySequenceEval:
    """Evaluate ``P_0(E0) .. P_n(E0)``.

    ``P_l`` is declared exactly zero when ``|P_l| <= zero_threshold * max(|P_{l-1}|,
    |E0 - b_l| |P_{l-1}|, a_{l-1}^2 |P_{l-2}|)``.
    """
    n = _check_n(J, n)
    rec = MonicRecurrence(J, E0, zero_threshold).extend(n)
    values = tuple(
        ScaledPolyValue.from_scaled(v, e) for v, e in zip(rec.scaled, rec.exponents)
    )
    return PolySequenceEval(rec.energy, values, frozenset(rec.zeros))


def assemble_dense(J: JacobiOperator, n: int) -> np.ndarray:
    """The ``n x n`` truncation ``J_n`` as a dense symmetric array."""
    n = _check_n(J, n)
    a, b = J.coefficients(n)
    return np.diag(b) + np.diag(a[: n - 1], 1) + np.diag(a[: n - 1], -1)


def strip_leading(J: JacobiOperator, k: int) -> JacobiOperator:
    """``J^(k)``: remove the first ``k`` rows and columns.

    The returned operator carries the tight bound of its remaining coefficients.
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValidationError(f"k must be a positive integer, got {k!r}")
    k = int(k)
    if J.kind == "finite":
        if k >= J.size:
            raise ValidationError(f"cannot strip {k} rows from an operator of size {J.size}")
        return JacobiOperator("finite", J.a[k:], J.b[k:])
    tail = J.tail
    if isinstance(tail, PeriodicTail):
        ra = max(0, k - len(J.a)) % len(tail.period_a)
        rb = max(0, k - len(J.b)) % len(tail.period_b)
        tail = PeriodicTail(
            tail.period_a[ra:] + tail.period_a[:ra],
            tail.period_b[rb:] + tail.period_b[:rb],
        )
    return JacobiOperator("infinite", J.a[k:], J.b[k:], tail)
