import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_finite_jacobi
from sturmosc import (
    BoundaryError,
    EigenvalueInterval,
    InfiniteCountPolicy,
    JacobiOperator,
    SturmError,
    ValidationError,
    assemble_dense,
    bounds_check,
    count_above,
    count_above_infinite,
    count_below,
    eig_bisect,
)

FREE = JacobiOperator.free()


@pytest.mark.parametrize("E0, above, below", [(0.5, 1, 2), (-3.0, 3, 0), (3.0, 0, 3)])
def test_free_three(E0, above, below):
    assert count_above(FREE, 3, E0).count == above
    assert count_below(FREE, 3, E0).count == below


def test_free_two_at_zero():
    res = count_below(FREE, 2, 0.0)
    assert res.count == 1
    assert res.intermediate_zeros == (1,)
    assert not res.boundary_hit


def test_boundary_hit_drops_last_term():
    # E0 = 0 is an eigenvalue of the free J_3
    up = count_above(FREE, 3, 0.0)
    down = count_below(FREE, 3, 0.0)
    assert up.boundary_hit and down.boundary_hit
    assert (up.count, down.count) == (1, 1)


def test_infinite_counts():
    assert count_above_infinite(FREE, 2.5).count == 0
    bump = JacobiOperator.perturbed_free(b=[3.0])
    res = count_above_infinite(bump, 2.5)
    assert res.converged and res.count == 1
    # the single eigenvalue is 10/3: dense oracle at n = 2000
    ev = np.linalg.eigvalsh(assemble_dense(bump, 2000))
    assert np.sum(ev > 2.5) == 1
    assert ev[-1] == pytest.approx(10 / 3, abs=1e-12)
    res = count_above_infinite(FREE, 1.0, InfiniteCountPolicy(n_max=2 ** 10))
    assert not res.converged
    assert list(res.history) == sorted(res.history)


def test_infinite_rejects_finite():
    with pytest.raises(ValidationError):
        count_above_infinite(JacobiOperator.finite([1.0], [0.0, 0.0]), 0.0)


def test_eig_bisect_examples():
    got = [e for e, _ in eig_bisect(FREE, 2, (-3, 3), 1e-10)]
    assert np.allclose(got, [-1, 1], atol=1e-10)
    got = [e for e, _ in eig_bisect(FREE, 3, (-3, 3), 1e-10)]
    assert np.allclose(got, [-math.sqrt(2), 0, math.sqrt(2)], atol=1e-10)
    assert eig_bisect(FREE, 3, (3, 4), 1e-10) == []


def test_eig_bisect_brackets():
    for e, iv in eig_bisect(FREE, 7, (-3, 3), 1e-10):
        assert isinstance(iv, EigenvalueInterval)
        assert iv.hi - iv.lo <= 1e-10
        assert count_above(FREE, 7, iv.lo).count - count_above(FREE, 7, iv.hi).count == 1


def test_eig_bisect_endpoint_nudge():
    # 0 and sqrt(2) are eigenvalues of the free J_3; nudging pulls them in
    got = [e for e, _ in eig_bisect(FREE, 3, (0.0, 3.0), 1e-10)]
    assert np.allclose(got, [0, math.sqrt(2)], atol=1e-10)
    got = [e for e, _ in eig_bisect(FREE, 2, (-1.0, 1.0), 1e-10)]
    assert np.allclose(got, [-1, 1], atol=1e-10)


def test_eig_bisect_validation():
    with pytest.raises(ValidationError):
        eig_bisect(FREE, 3, (1, 1))
    with pytest.raises(ValidationError):
        eig_bisect(FREE, 3, (0, 1), tol=0)


def test_bounds_check():
    rep = bounds_check(FREE, 50, -2, 2)
    assert rep.holds and not rep.certificate
    rep = bounds_check(FREE, 50, -2, 1.9)
    assert not rep.holds and rep.side == "upper" and rep.witness < 50
    # the witness is the first truncation with an eigenvalue above 1.9
    top = [np.linalg.eigvalsh(assemble_dense(FREE, n))[-1] for n in range(1, 51)]
    assert rep.witness == next(i + 1 for i, t in enumerate(top) if t >= 1.9)
    rep = bounds_check(JacobiOperator.perturbed_free(b=[5.0]), 1, -3, 3)
    assert not rep.holds and rep.witness == 1


def test_bounds_certificate_finite(rng):
    J = random_finite_jacobi(rng, 10)
    ev = np.linalg.eigvalsh(assemble_dense(J, 10))
    rep = bounds_check(J, 10, ev[0] - 1e-6, ev[-1] + 1e-6)
    assert rep.holds and rep.certificate
    assert not bounds_check(J, 10, ev[0] + 1e-6, ev[-1] + 1e-6).holds


def test_oracle_equivalence(rng):
    for _ in range(50):
        n = int(rng.integers(1, 65))
        J = random_finite_jacobi(rng, n)
        ev = np.linalg.eigvalsh(assemble_dense(J, n))
        for E0 in rng.uniform(-4, 4, 5):
            if np.min(np.abs(ev - E0)) < 1e-8:
                continue
            assert count_above(J, n, E0).count == int(np.sum(ev > E0))


@given(st.integers(1, 40), st.floats(-5, 5), st.integers(0, 2 ** 32 - 1))
def test_complementarity(n, E0, seed):
    J = random_finite_jacobi(np.random.default_rng(seed), n)
    up, down = count_above(J, n, E0), count_below(J, n, E0)
    if not up.boundary_hit:
        assert up.count + down.count == n
    assert up.count <= n


@given(st.floats(-3, 3), st.integers(0, 2 ** 32 - 1))
def test_monotone_in_n(E0, seed):
    rng = np.random.default_rng(seed)
    J = JacobiOperator.perturbed_free(a=rng.uniform(0.5, 1.5, 5), b=rng.uniform(-1, 1, 5))
    counts = [count_above(J, n, E0).count for n in range(1, 60)]
    assert counts == sorted(counts)


@given(st.integers(1, 40), st.integers(0, 2 ** 32 - 1))
def test_monotone_in_energy(n, seed):
    J = random_finite_jacobi(np.random.default_rng(seed), n)
    counts = [count_above(J, n, E).count for E in np.linspace(-7, 7, 57)]
    assert counts == sorted(counts, reverse=True)


def test_bisect_accuracy(rng):
    for _ in range(30):
        n = int(rng.integers(1, 33))
        J = random_finite_jacobi(rng, n)
        ev = np.linalg.eigvalsh(assemble_dense(J, n))
        got = np.array([e for e, _ in eig_bisect(J, n, (-J.spectral_bound - 1, J.spectral_bound + 1), 1e-11)])
        assert got.size == n
        assert np.max(np.abs(got - ev)) <= 1e-10


def test_infinite_matches_dense_truncation():
    J = JacobiOperator.perturbed_free(a=[1.5, 0.7], b=[3.0, -3.0, 2.0])
    res = count_above_infinite(J, 2.2)
    ev = np.linalg.eigvalsh(assemble_dense(J, 2000))
    assert res.converged and res.count == int(np.sum(ev > 2.2))
    with pytest.raises(ValidationError):
        count_above_infinite(J, 0.0, InfiniteCountPolicy(growth=1.0))


def _spectrum(J, n, tol):
    w = J.spectral_bound + 1
    return np.array([e for e, _ in eig_bisect(J, n, (-w, w), tol)])


def test_interlacing_strict(rng):
    # near-free coefficients keep every interlacing gap far above double resolution
    for _ in range(20):
        n = int(rng.integers(1, 21))
        J = random_finite_jacobi(rng, n + 1, a_range=(0.8, 1.2), b_range=(-0.5, 0.5))
        lo, hi = _spectrum(J, n, 1e-13), _spectrum(J, n + 1, 1e-13)
        assert np.all(hi[:-1] < lo - 1e-12) and np.all(lo < hi[1:] - 1e-12)


def test_interlacing_wide_ensemble(rng):
    # with a in (0, 2], eigenvector localization can make the true gaps smaller
    # than any representable margin, so only interlacing up to rounding can hold
    for _ in range(20):
        n = int(rng.integers(1, 21))
        J = random_finite_jacobi(rng, n + 1)
        lo, hi = _spectrum(J, n, 1e-13), _spectrum(J, n + 1, 1e-13)
        slack = 1e-12
        assert np.all(hi[:-1] <= lo + slack) and np.all(lo <= hi[1:] + slack)


def test_boundary_error_type():
    assert issubclass(BoundaryError, SturmError)
