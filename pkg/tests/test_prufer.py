import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fd_dirichlet_eigs, ivp_solution, random_potential, random_well, well_eigenvalues
from sturmosc import (
    ConvergenceError,
    HalflinePolicy,
    Potential,
    StepControl,
    ValidationError,
    comparison_check,
    count_below_halfline,
    count_zeros,
    dirichlet_eigs,
    locate_zeros,
    shoot,
    shoot_trace,
    zero_trajectory_derivative,
)

ZERO = Potential.zero()
WELL = Potential.square_well(20, 1)


def test_shoot_examples():
    s = shoot(ZERO, 1.0, math.pi)
    assert s.theta == pytest.approx(math.pi, abs=1e-8)
    assert abs(s.u) < 1e-8 and s.zeros_so_far == 0 and s.at_zero
    s = shoot(ZERO, 1.0, 1.5 * math.pi)
    assert s.theta == pytest.approx(1.5 * math.pi, abs=1e-8) and s.zeros_so_far == 1
    assert shoot(ZERO, 10.0, math.pi).zeros_so_far == 3


def test_shoot_integral_and_scale():
    s = shoot(ZERO, 1.0, math.pi)
    # u = sin x: int_0^pi sin^2 = pi / 2, and no rescaling is needed
    assert s.u_squared_integral * math.exp(2 * s.log_scale) == pytest.approx(math.pi / 2, rel=1e-9)
    deep = shoot(ZERO, -25.0, 60.0)
    # u = sinh(5x)/5: the true magnitude is carried in log_scale
    assert deep.log_scale + math.log(math.hypot(deep.u, deep.du)) == pytest.approx(
        300 - math.log(2 * 5) + 0.5 * math.log(26), rel=1e-9)


def test_count_zeros_examples():
    assert count_zeros(ZERO, 10.0, math.pi).count == 3
    assert count_zeros(WELL, 0.0, 10.0).count == 1
    V = Potential(0.05, np.sin(np.arange(200) * 0.05) * 3)
    for a in (1.0, 7.0, 30.0):
        assert count_zeros(V, -V.sup_norm - 0.1, a).count == 0


def test_count_zeros_boundary_flag():
    r = count_zeros(ZERO, 4.0, math.pi)
    assert r.boundary_hit and r.count == 1


def test_well_zero_position():
    z = locate_zeros(WELL, 0.0, 10.0)
    assert z.size == 1 and z[0] == pytest.approx(math.pi / math.sqrt(20), abs=1e-9)


def test_locate_zeros_free():
    z = locate_zeros(ZERO, 4.0, 2.9 * math.pi)
    assert np.allclose(z, math.pi / 2 * np.arange(1, 6), atol=1e-10)


def test_dirichlet_examples():
    assert np.allclose(dirichlet_eigs(ZERO, math.pi, (0.5, 10.5), 1e-8), [1, 4, 9], atol=1e-8)
    assert dirichlet_eigs(ZERO, math.pi, (-5, 0.5), 1e-8) == []
    eigs = dirichlet_eigs(WELL, 10.0, (-20, 0), 1e-8)
    assert len(eigs) == 1
    assert eigs[0] == pytest.approx(well_eigenvalues(20, 1, 10)[0], abs=1e-7)


def test_dirichlet_deep_well_matches_matching_condition():
    V = Potential.square_well(100, 1)
    eigs = dirichlet_eigs(V, 8.0, (-100, 0), 1e-9)
    ref = well_eigenvalues(100, 1, 8.0)
    assert len(eigs) == len(ref) == 3
    assert np.allclose(eigs, ref, atol=1e-7)


def test_dirichlet_against_finite_differences(rng):
    for _ in range(3):
        V = random_potential(rng, 10.0)
        eigs = np.array(dirichlet_eigs(V, 10.0, (-6, 6), 1e-9))
        fd = fd_dirichlet_eigs(V, 10.0)
        fd = fd[(fd > -6) & (fd < 6)]
        assert eigs.size == fd.size
        assert np.allclose(eigs, fd, atol=2e-3)


def test_dirichlet_validation():
    with pytest.raises(ValidationError):
        dirichlet_eigs(ZERO, math.pi, (2, 1))


def test_dirichlet_endpoint_nudge():
    eigs = dirichlet_eigs(ZERO, math.pi, (1.0, 4.0), 1e-8)
    assert np.allclose(eigs, [1, 4], atol=1e-7)


def test_halfline_examples():
    r = count_below_halfline(WELL, -1e-9)
    assert r.converged and r.count == 1
    r = count_below_halfline(ZERO, -1.0)
    assert r.converged and r.count == 0
    r = count_below_halfline(ZERO, 1.0, HalflinePolicy(a_max=160))
    assert not r.converged
    assert list(r.history) == sorted(r.history) and r.history[-1] > r.history[0]


def test_zero_trajectory_examples():
    assert zero_trajectory_derivative(ZERO, 1.0, math.pi) == pytest.approx(-math.pi / 2, abs=1e-6)
    assert zero_trajectory_derivative(ZERO, 4.0, math.pi / 2) == pytest.approx(-math.pi / 16, abs=1e-6)
    x0 = locate_zeros(WELL, 0.0, 10.0)[0]
    d = zero_trajectory_derivative(WELL, 0.0, x0)
    dE = 1e-5
    fd = (locate_zeros(WELL, dE, 10.0)[0] - locate_zeros(WELL, -dE, 10.0)[0]) / (2 * dE)
    assert d == pytest.approx(fd, rel=1e-4)
    # inside the well the zero sits at pi / sqrt(20 + E)
    assert d == pytest.approx(-0.5 * math.pi * 20 ** -1.5, rel=1e-6)


def test_zero_trajectory_rejects_non_zero():
    with pytest.raises(ValidationError):
        zero_trajectory_derivative(ZERO, 1.0, 2.0)


def test_comparison_examples():
    assert comparison_check(ZERO, 1.0, 4.0, 3 * math.pi).holds
    with pytest.raises(ValidationError):
        comparison_check(ZERO, 1.0, 1.0, 3 * math.pi)


def test_comparison_random(rng):
    for _ in range(5):
        V = random_potential(rng, 20.0)
        E1 = rng.uniform(-3, 8)
        assert comparison_check(V, E1, E1 + 1, 20.0).holds


def test_refinement_limit():
    with pytest.raises(ConvergenceError):
        shoot(ZERO, 1.0, 1.0, StepControl(max_refinements=0))


def test_trace_invariants(rng):
    V = random_potential(rng, 10.0)
    tr = shoot_trace(V, 3.0, 10.0)
    assert tr.theta[0] == 0.0
    assert np.all(np.hypot(tr.u, tr.du) > 0)
    assert np.all(np.abs(np.diff(tr.theta)) < 0.1)
    ok = np.abs(tr.du) > 1e-3
    assert np.allclose(np.tan(tr.theta[ok]), tr.u[ok] / tr.du[ok], rtol=1e-9, atol=1e-9)
    # theta' = 1 > 0 at multiples of pi: the level never drops
    lev = np.floor(tr.theta / math.pi)
    assert np.all(np.diff(lev) >= 0)


def test_against_independent_integrator(rng):
    for _ in range(4):
        V = random_potential(rng, 12.0)
        E = rng.uniform(-2, 10)
        s = shoot(V, E, 12.0)
        (u, du), _, _ = ivp_solution(V, E, 12.0)
        scale = math.exp(s.log_scale)
        assert s.u * scale == pytest.approx(u, rel=1e-6, abs=1e-7 * math.hypot(u, du))
        assert s.du * scale == pytest.approx(du, rel=1e-6, abs=1e-7 * math.hypot(u, du))


def test_count_matches_grid_sign_changes(rng):
    for _ in range(50):
        a = rng.uniform(2, 20)
        V = random_potential(rng, 20.0)
        E = rng.uniform(-5, 15)
        tr = shoot_trace(V, E, a)
        u = tr.u[1:]
        changes = int(np.sum(np.sign(u[1:]) * np.sign(u[:-1]) < 0))
        r = count_zeros(V, E, a)
        if r.boundary_hit:
            continue
        assert r.count == changes


def test_oscillation_theorem_free_box():
    for E in (0.3, 2.0, 5.5, 30.0, 99.0):
        eigs = dirichlet_eigs(ZERO, math.pi, (-1, E), 1e-9)
        assert len(eigs) == count_zeros(ZERO, E, math.pi).count == math.floor(math.sqrt(E))


def test_zero_motion(rng):
    for _ in range(5):
        V = random_well(rng)
        a = 6.0
        Es = np.linspace(1.0, 8.0, 5)
        zs = [locate_zeros(V, E, a) for E in Es]
        for z0, z1 in zip(zs, zs[1:]):
            k = min(z0.size, z1.size)
            assert np.all(z1[:k] < z0[:k])
        for E, z in zip(Es, zs):
            for x0 in z[:3]:
                assert zero_trajectory_derivative(V, E, x0) < 0


def test_energy_monotone_counts(rng):
    for _ in range(20):
        V = random_potential(rng, 10.0)
        E = np.sort(rng.uniform(-6, 20, (10, 2)), axis=1)
        for e1, e2 in E:
            assert count_zeros(V, e1, 10.0).count <= count_zeros(V, e2, 10.0).count


def test_potential_validation_and_round_trip():
    with pytest.raises(ValidationError):
        Potential(0.0, [1.0])
    with pytest.raises(ValidationError):
        Potential(0.1, [np.nan])
    with pytest.raises(ValidationError):
        Potential(0.1, [1.0, -3.0], sup_norm=2.0)
    with pytest.raises(ValidationError):
        Potential(0.1, [1.0], tail="linear")
    V = Potential(0.5, [1.0, 2.0], "periodic", [3.0, 4.0])
    W = Potential.from_dict(V.to_dict())
    assert np.array_equal(W.samples, V.samples) and np.array_equal(W.period, V.period)
    assert V(np.array([0.25, 1.0, 1.5, 2.0, 2.5, 3.25]))[1:].tolist() == [3.0, 4.0, 3.0, 4.0, 3.5]
    assert WELL(np.array([0.5, 1.0, 1.0001, 50.0])).tolist() == [-20.0, -20.0, 0.0, 0.0]


@given(st.floats(-5, 40), st.floats(0.5, 8))
def test_free_zero_count_closed_form(E, a):
    r = count_zeros(ZERO, E, a)
    k = math.sqrt(E) * a / math.pi if E > 0 else 0.0
    if abs(k - round(k)) > 1e-6:
        assert r.count == math.floor(k)
