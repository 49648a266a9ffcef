import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.integrate import solve_ivp

from sturmosc import JacobiOperator, Potential

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DEMOS = os.path.join(os.path.dirname(__file__), os.pardir, "demos")


def random_finite_jacobi(rng, n, a_range=(0.0, 2.0), b_range=(-2.0, 2.0)):
    lo, hi = a_range
    a = rng.uniform(lo, hi, n - 1)
    a = np.where(a <= 0, hi, a)  # (0, hi]
    b = rng.uniform(*b_range, n)
    return JacobiOperator.finite(a, b)


def random_potential(rng, length, sup=5.0, grid_step=0.02, n_bumps=4):
    """Smooth random potential on [0, length] with |V| <= sup, zero tail."""
    x = np.arange(int(round(length / grid_step)) + 1) * grid_step
    v = np.zeros_like(x)
    for _ in range(n_bumps):
        c = rng.uniform(0, length)
        w = rng.uniform(0.3, 2.0)
        v += rng.uniform(-1, 1) * np.exp(-((x - c) / w) ** 2)
    peak = np.max(np.abs(v))
    if peak > 0:
        v *= rng.uniform(0.2, 1.0) * sup / peak
    return Potential(grid_step, v)


def random_well(rng, grid_step=0.01):
    """Negative step or ramp on [0, w], zero beyond."""
    w = grid_step * rng.integers(20, 300)
    depth = rng.uniform(0.5, 40)
    x = np.arange(int(round(w / grid_step)) + 1) * grid_step
    if rng.random() < 0.5:
        v = np.full_like(x, -depth)
    else:
        v = -depth * (1 - x / w) if rng.random() < 0.5 else -depth * x / w
    return Potential(grid_step, v)


def ivp_solution(V, E, a, t_eval=None, rtol=1e-11, atol=1e-13):
    """Independent solve of -u'' + V u = E u with u(0)=0, u'(0)=1 (scipy DOP853)."""
    def rhs(x, y):
        return [y[1], (float(V(x)) - E) * y[0]]

    knots = np.arange(V.samples.size) * V.grid_step
    stops = [0.0] + [k for k in knots[1:] if k < a] + [a]
    y = np.array([0.0, 1.0])
    xs, us = [], []
    for lo, hi in zip(stops[:-1], stops[1:]):
        te = None
        if t_eval is not None:
            te = [t for t in t_eval if lo <= t <= hi]
        sol = solve_ivp(rhs, (lo, hi), y, method="DOP853", rtol=rtol, atol=atol, t_eval=te)
        y = sol.y[:, -1]
        if te:
            xs.extend(sol.t)
            us.extend(sol.y[0])
    return y, np.array(xs), np.array(us)


def fd_dirichlet_eigs(V, a, n_points=4000):
    """Second-order finite-difference Dirichlet eigenvalues of [0, a]."""
    from scipy.linalg import eigh_tridiagonal

    h = a / (n_points + 1)
    x = h * np.arange(1, n_points + 1)
    d = 2.0 / h ** 2 + V(x)
    e = np.full(n_points - 1, -1.0 / h ** 2)
    return eigh_tridiagonal(d, e, eigvals_only=True)


def well_eigenvalues(depth, width, a):
    """Dirichlet eigenvalues below 0 of V = -depth on [0, width], 0 on (width, a], by matching."""
    from scipy.optimize import brentq

    L = a - width

    def f(E):
        k = math.sqrt(depth + E)
        kap = math.sqrt(-E)
        # u = sin(k x) inside, = A sinh(kap (a - x)) outside
        return k * math.cos(k * width) * math.sinh(kap * L) + kap * math.sin(k * width) * math.cosh(kap * L)

    grid = np.linspace(-depth + 1e-9, -1e-9, 20001)
    vals = [f(E) for E in grid]
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0 or vals[i] * vals[i + 1] < 0:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-14))
    return roots


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)
