"""Lab-frame dynamics: kernel, energy, impulses, equivariance."""

from __future__ import annotations

import math

import numpy as np
import pytest

from trivortex.core import ConservedSet, conserved, hamiltonian, rhs
from trivortex.errors import CoincidentVortices


def test_dipole_translates_rigidly():
    x = [(0.0, 0.5), (0.0, -0.5)]
    g = [1.0, -1.0]
    v = rhs(x, g)
    assert np.allclose(v[0], v[1], atol=1e-15)
    # velocity is perpendicular to the joining line
    joint = np.subtract(x[0], x[1])
    assert abs(np.dot(v[0], joint)) < 1e-15
    assert np.allclose(v[0], (1.0, 0.0), atol=1e-15)


def test_corotating_pair_is_antisymmetric():
    v = rhs([(0.5, 0.0), (-0.5, 0.0)], [1.0, 1.0])
    assert np.allclose(v[0], -v[1], atol=1e-15)
    assert abs(np.hypot(*v[0]) - np.hypot(*v[1])) < 1e-15
    # tangent to the circle through both vortices
    assert abs(v[0][0]) < 1e-15 and abs(v[1][0]) < 1e-15


def test_equilateral_triangle_rotates_rigidly():
    ang = 2.0 * np.pi * np.arange(3) / 3.0
    x = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    v = rhs(x, [1.0, 1.0, 1.0])
    speeds = np.hypot(v[:, 0], v[:, 1])
    assert np.allclose(speeds, speeds[0], atol=1e-14)
    radial = (v * x).sum(axis=1)
    assert np.max(np.abs(radial)) < 1e-14


def test_hamiltonian_unit_distances_vanish():
    assert hamiltonian([(0.0, 0.0), (1.0, 0.0)], [1.0, 1.0]) == 0.0
    side = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0)]
    assert abs(hamiltonian(side, [1.0, 1.0, 1.0])) < 1e-15


def test_hamiltonian_frozen_value():
    # independent arbitrary-precision evaluation of the three log terms
    x = [(-10.0, 0.5), (0.0, -1.0), (-10.0, -0.5)]
    h = hamiltonian(x, [1.0, 1.0, -1.0])
    assert h == pytest.approx(-0.009876864368116280, abs=1e-15)


def test_conserved_reports_impulses_and_centroid():
    c = conserved([(1.0, 0.0), (1.0, 0.0), (2.0, 0.0)], [1.0, 1.0, -1.0])
    assert isinstance(c, ConservedSet)
    assert c.Theta == pytest.approx(-2.0)
    assert c.M == pytest.approx((0.0, 0.0))
    # total strength is 1, so the centroid exists
    assert c.r0 == pytest.approx((0.0, 0.0))
    assert math.isinf(c.H)


def test_centroid_absent_for_zero_total_strength():
    c = conserved([(0.0, 0.5), (0.0, -0.5)], [1.0, -1.0])
    assert c.r0 is None
    assert c.M == pytest.approx((0.0, 1.0))


def test_coincidence_guard_and_floor():
    x = [(0.0, 0.0), (5e-13, 0.0)]
    with pytest.raises(CoincidentVortices) as exc:
        rhs(x, [1.0, 1.0])
    assert exc.value.pair == (0, 1)
    # a looser floor trips earlier, a tighter one lets the state through
    y = [(0.0, 0.0), (1e-7, 0.0)]
    rhs(y, [1.0, 1.0])
    with pytest.raises(CoincidentVortices):
        rhs(y, [1.0, 1.0], floor=1e-6)
    assert np.isfinite(rhs(x, [1.0, 1.0], floor=1e-14)).all()


def _random_states(count: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, 6))
        x = rng.uniform(-3.0, 3.0, size=(n, 2))
        # keep pairs honestly separated so tolerances are meaningful
        while True:
            d = x[:, None, :] - x[None, :, :]
            r2 = (d**2).sum(-1) + np.eye(n)
            if r2.min() > 1e-2:
                break
            x = rng.uniform(-3.0, 3.0, size=(n, 2))
        g = rng.uniform(-2.0, 2.0, size=n)
        g[np.abs(g) < 0.1] = 0.5
        yield x, g


def test_translation_equivariance():
    for x, g in _random_states(20, seed=11):
        shift = np.array([0.7, -1.3])
        assert np.allclose(rhs(x + shift, g), rhs(x, g), atol=1e-12)


def test_rotation_equivariance():
    for x, g in _random_states(20, seed=12):
        th = 1.234
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        assert np.allclose(rhs(x @ rot.T, g), rhs(x, g) @ rot.T, atol=1e-12)


def test_energy_is_stationary_along_flow():
    # dH/dt = sum_i grad_i H . v_i with the exact gradient of the log sum
    for x, g in _random_states(20, seed=13):
        n = x.shape[0]
        v = rhs(x, g)
        total = 0.0
        for i in range(n):
            gx = gy = 0.0
            for j in range(n):
                if j == i:
                    continue
                dx, dy = x[i] - x[j]
                r2 = dx * dx + dy * dy
                gx += -g[i] * g[j] * dx / r2
                gy += -g[i] * g[j] * dy / r2
            total += gx * v[i, 0] + gy * v[i, 1]
        assert abs(total) <= 1e-10


def test_impulse_identity_links_theta_and_pair_distances():
    # sum_{i<j} g_i g_j |r_i-r_j|^2 == (sum g) * Theta - |M|^2
    for x, g in _random_states(20, seed=14):
        c = conserved(x, g)
        lhs = 0.0
        for i in range(len(g)):
            for j in range(i + 1, len(g)):
                lhs += g[i] * g[j] * ((x[i] - x[j]) ** 2).sum()
        rhs_val = g.sum() * c.Theta - c.M[0] ** 2 - c.M[1] ** 2
        assert lhs == pytest.approx(rhs_val, rel=1e-10, abs=1e-10)
