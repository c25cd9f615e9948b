from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stgraph import spinor as sp
from stgraph.errors import GridInvalidError, SingularMatrixError
from stgraph.graph import numeric_gradient
from stgraph.sphere import (
    U_DIAG, angles_from_chi, angular_equations, angular_lagrangian, angular_lagrangian_matrix,
    angular_stationarity, ansatz, a_matrix, build_grid, chi_map, d21, decompose_p, difference_inverse,
    grid_from_json, grid_to_json, pack_angular, q_factor, rotate_chi, separation_check, sphere_from_chi,
    stationarity_residuals, unpack_angular,
)

GRIDS = [(1, 1), (1, 2), (2, 1), (2, 2), (3, 3)]
cplx = st.builds(complex, st.floats(-3, 3), st.floats(-3, 3))


def test_pole_and_equator():
    assert chi_map(0.0, 1.3) == 0
    assert abs(chi_map(np.pi / 2, 0.4)) == pytest.approx(1, abs=1e-15)
    north = sphere_from_chi(0)
    assert np.allclose(north.p, U_DIAG)
    south = sphere_from_chi(0, pole=True)
    assert south.is_pole and not north.is_pole
    assert np.allclose(south.p, -U_DIAG)
    assert sphere_from_chi(chi_map(np.pi, 0.0)).is_pole


@settings(max_examples=100)
@given(st.floats(0.01, np.pi - 0.01), st.floats(-np.pi + 0.01, np.pi - 0.01))
def test_angle_round_trip(theta, phi):
    th, ph = angles_from_chi(chi_map(theta, phi))
    assert th == pytest.approx(theta, abs=1e-14)
    assert ph == pytest.approx(phi, abs=1e-14)
    pt = sphere_from_chi(chi_map(theta, phi))
    xyz = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    assert np.allclose(sp.mink_decode(pt.p), [0, *xyz], atol=1e-12)


@given(cplx)
def test_q_factor_identities(chi):
    Q, U = decompose_p(chi)
    q = 1 + abs(chi) ** 2
    assert sp.det(Q) == pytest.approx(-q, rel=1e-12)
    assert np.allclose(Q @ Q, q * sp.I2, atol=1e-12 * q)
    p = Q @ U @ np.linalg.inv(Q)
    assert np.allclose(p, sphere_from_chi(chi).p, atol=1e-12)
    assert np.allclose(p @ p, sp.I2, atol=1e-12)
    assert abs(sp.tr(p)) < 1e-12 and sp.det(p).real == pytest.approx(-1, abs=1e-12)


def test_q_factor_at_origin():
    assert np.array_equal(q_factor(0), U_DIAG)


@given(cplx, cplx)
def test_difference_inverse_closed_form(c1, c2):
    if abs(c1 - c2) < 1e-2:
        return
    p1, p2 = sphere_from_chi(c1).p, sphere_from_chi(c2).p
    direct = p1 @ np.linalg.inv(p1 - p2)
    assert np.allclose(difference_inverse(c1, c2), direct, atol=1e-12 * max(1, np.abs(direct).max()))
    Q1, Q2 = q_factor(c1), q_factor(c2)
    assert np.allclose(Q2 @ Q1 @ U_DIAG - U_DIAG @ Q2 @ Q1, d21(c1, c2), atol=1e-12)


def test_difference_inverse_antipodes_and_singular():
    c = 0.4 - 0.7j
    assert np.allclose(difference_inverse(c, -1 / np.conj(c)), sp.I2 / 2, atol=1e-15)
    with pytest.raises(SingularMatrixError):
        difference_inverse(c, c)


def test_grid_1_1():
    g = build_grid(1, 1)
    assert g.n == 2 and g.l == 2
    assert g.zs == pytest.approx([0.0], abs=1e-15)
    assert abs(g.chis[0] + 1 / np.conj(g.chis[1])) < 1e-15  # antipodes
    assert angular_stationarity(g, 1).kappa == 1 and angular_stationarity(g, 2).kappa == -1


def test_grid_1_2_latitudes():
    g = build_grid(1, 2)
    assert np.sort(g.zs) == pytest.approx([-1 / np.sqrt(3), 1 / np.sqrt(3)], abs=1e-14)
    for k, z in enumerate(g.zs):
        others = np.delete(g.zs, k)
        assert np.sum(1 / (z - others)) == pytest.approx(z / (1 - z * z), abs=1e-13)


@pytest.mark.parametrize("m,h", GRIDS)
def test_grid_structure(m, h):
    g = build_grid(m, h)
    assert g.n == 2 * m * h and g.l == 2 * (m + h - 1)
    assert np.all(g.edge_counts() == g.l)
    assert g.neighbour_matrix().sum() == g.n * g.l  # handshake
    assert np.abs(stationarity_residuals(g.chis, g.edges)).max() < 1e-10
    assert np.all(np.isfinite(g.chis)) and np.all(np.abs(g.chis) > 0)
    # latitude sum against the roots-of-unity closed form
    for k in range(h):
        ring = g.chis[k * 2 * m:(k + 1) * 2 * m]
        for j, c in enumerate(ring):
            s = np.sum(1 / (c - np.delete(ring, j)))
            assert s == pytest.approx((2 * m - 1) / (2 * c), abs=1e-12)


@pytest.mark.parametrize("m,h", GRIDS)
@pytest.mark.parametrize("branch", [1, 2])
def test_angular_stationarity(m, h, branch):
    g = build_grid(m, h)
    res = angular_stationarity(g, branch)
    assert res.kappa == (1 if branch == 1 else -1) * (m + h - 1)
    assert res.residual < 1e-10
    assert res.imag_part < 1e-12
    assert separation_check(g, branch) < 1e-10


@pytest.mark.parametrize("m,h", GRIDS[:4])
def test_angular_gradient_vanishes(m, h):
    g = build_grid(m, h)
    for branch, kappa in ((1, g.l / 2), (2, -g.l / 2)):
        mu, nu = ansatz(g.chis, branch)
        fn = lambda v: angular_lagrangian(*unpack_angular(v, g.n), g.edges, kappa).real
        grad = numeric_gradient(fn, pack_angular(mu, nu, g.chis), rel_step=1e-5)
        assert np.abs(grad).max() < 1e-8


def test_wrong_kappa_is_not_stationary():
    g = build_grid(1, 2)
    mu, nu = ansatz(g.chis, 1)
    assert np.abs(angular_equations(mu, nu, g.chis, g.edges, 1.0)).max() > 0.1


def test_matrix_and_scalar_forms_agree():
    rng = np.random.default_rng(0)
    g = build_grid(2, 1)
    mu = rng.normal(size=g.n) + 1j * rng.normal(size=g.n)
    nu = rng.normal(size=g.n) + 1j * rng.normal(size=g.n)
    A = [a_matrix(a, b, c) for a, b, c in zip(mu, nu, g.chis)]
    for kappa in (0.0, 1.5):
        assert angular_lagrangian_matrix(A, g.chis, g.edges, kappa) == pytest.approx(
            angular_lagrangian(mu, nu, g.chis, g.edges, kappa), abs=1e-12)
    # each A is quaternionic
    assert all(sp.is_quaternion(a, 1e-12) for a in A)


def test_rotation_covariance():
    rng = np.random.default_rng(2)
    for m, h in GRIDS[:4]:
        g = build_grid(m, h)
        T = sp.rotation(rng.uniform(0, np.pi), rng.normal(size=3))
        g2 = replace(g, chis=rotate_chi(g.chis, T))
        assert np.abs(stationarity_residuals(g2.chis, g2.edges)).max() < 1e-10
        for branch in (1, 2):
            assert angular_stationarity(g2, branch).kappa == angular_stationarity(g, branch).kappa


def test_perturbed_grid_rejected():
    g = build_grid(1, 2)
    chis = g.chis.copy()
    chis[0] *= 1.01
    with pytest.raises(GridInvalidError):
        angular_stationarity(replace(g, chis=chis))


def test_grid_json_round_trip():
    g = build_grid(2, 2)
    back = grid_from_json(grid_to_json(g))
    assert np.array_equal(back.chis, g.chis)
    assert back.edges == g.edges and back.l == g.l
    assert grid_to_json(back) == grid_to_json(g)
