import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from stgraph.errors import DomainError
from stgraph.orthopoly import (
    OdeSpec, christoffel_weights, gauss_integrate, gauss_quadrature, hermite_zero_identities,
    integrate_weighted, laguerre_radial_residuals, master_integral, master_integral_numeric,
    partial_coeffs, partial_poly2_eval, partial_poly_eval, poly_eval, solve_zeros, weight_constants,
    zero_residuals,
)

FAMILIES = {
    "hermite": OdeSpec.hermite(),
    "laguerre": OdeSpec.laguerre(0.8, 0.6),
    "legendre": OdeSpec.legendre_like(1),
    "legendre_m3": OdeSpec.legendre_like(3),
}


def reference_zeros(spec, n):
    # independent oracle: scipy Gauss rules
    if spec.family == "hermite":
        return special.roots_hermite(n)[0]
    if spec.family == "laguerre":
        g, lam = spec.params["gamma"], spec.params["lam"]
        return special.roots_genlaguerre(n, 2 * g - 1)[0] / (2 * lam)
    return special.roots_gegenbauer(n, spec.params["m"] - 0.5)[0]


@pytest.mark.parametrize("name", FAMILIES)
@pytest.mark.parametrize("n", range(1, 13))
def test_zero_system_and_oracle(name, n):
    spec = FAMILIES[name]
    zs = solve_zeros(spec, n)
    assert np.all(np.diff(zs.xs) > 0)
    assert np.abs(zero_residuals(spec, zs.xs)).max() < 1e-12
    ref = reference_zeros(spec, n)
    assert np.allclose(zs.xs, np.sort(ref), rtol=1e-11, atol=1e-12)


def test_hermite_small_zeros():
    h = OdeSpec.hermite()
    assert solve_zeros(h, 2).xs == pytest.approx([-math.sqrt(0.5), math.sqrt(0.5)], abs=1e-14)
    assert solve_zeros(h, 3).xs == pytest.approx([-math.sqrt(1.5), 0, math.sqrt(1.5)], abs=1e-14)
    # companion (Jacobi) matrix of monic Hermite: off-diagonals sqrt(k/2)
    J = np.diag(np.sqrt(np.arange(1, 4) / 2), 1)
    ev = np.linalg.eigvalsh(J + J.T)
    assert solve_zeros(h, 4).xs == pytest.approx(ev, abs=1e-13)


@pytest.mark.parametrize("n", [1, 2, 6])
def test_hermite_identities(n):
    s, res = hermite_zero_identities(solve_zeros(OdeSpec.hermite(), n))
    assert abs(s) < 1e-12
    assert np.abs(res).max() < 1e-12


def test_laguerre_two_formulations_agree():
    g, lam = 1.3, 0.7
    zs = solve_zeros(OdeSpec.laguerre(g, lam), 5)
    assert np.abs(laguerre_radial_residuals(zs.xs, g, lam)).max() < 1e-12


def test_invalid_spec():
    with pytest.raises(DomainError):
        OdeSpec(0.0, 1.0, 0.0, 1.0, -1.0, (-1.0, 1.0))  # u = x vanishes inside
    with pytest.raises(DomainError):
        solve_zeros(OdeSpec.hermite(), 0)
    with pytest.raises(DomainError):
        OdeSpec.laguerre(-1.0, 1.0)


def test_partial_polynomials():
    zs = solve_zeros(OdeSpec.hermite(), 4)
    xs = zs.xs
    two = solve_zeros(OdeSpec.hermite(), 2).xs
    assert partial_poly_eval(two, 0, two[0]) == pytest.approx(two[0] - two[1])
    x = 0.37
    assert partial_poly2_eval(xs, 1, 1, x) == 0
    lhs = partial_poly_eval(xs, 0, x) - partial_poly_eval(xs, 1, x)
    assert lhs == pytest.approx((xs[0] - xs[1]) * partial_poly2_eval(xs, 0, 1, x), rel=1e-10)
    prod = partial_poly_eval(xs, 0, x) * partial_poly_eval(xs, 1, x)
    assert prod == pytest.approx(poly_eval(xs, x) * partial_poly2_eval(xs, 0, 1, x), rel=1e-10)
    h = 1e-6
    deriv = (poly_eval(xs, x + h) - poly_eval(xs, x - h)) / (2 * h)
    assert deriv == pytest.approx(sum(partial_poly_eval(xs, k, x) for k in range(4)), rel=1e-8)


def test_hermite_single_weight():
    spec = OdeSpec.hermite()
    zs = solve_zeros(spec, 1)
    mi = master_integral(spec, 1)
    assert mi == pytest.approx(integrate_weighted(spec, lambda x: x * x), rel=1e-12)
    ws = weight_constants(spec, zs, mi)
    # P_1 = 1 for n = 1, so rho_1 = int w
    assert ws.rhos[0] == pytest.approx(math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize("name", FAMILIES)
@pytest.mark.parametrize("n", [2, 5, 9])
def test_master_integral_closed_form(name, n):
    spec = FAMILIES[name]
    zs = solve_zeros(spec, n)
    assert master_integral(spec, n) == pytest.approx(master_integral_numeric(spec, zs), rel=1e-10)


@pytest.mark.parametrize("name", FAMILIES)
@pytest.mark.parametrize("n", [1, 3, 6, 12])
def test_weight_constancy_and_rho(name, n):
    spec = FAMILIES[name]
    zs = solve_zeros(spec, n)
    ws = weight_constants(spec, zs, master_integral(spec, n))
    k = spec.u(zs.xs) * ws.rhos
    assert np.abs(k - ws.k_const).max() < 1e-12 * abs(ws.k_const)
    assert np.all(ws.rhos > 0)
    if n <= 6:
        # rho_i = int w P_i^2 against adaptive integration
        for i in range(n):
            ref = integrate_weighted(spec, lambda x: float(partial_poly_eval(zs, i, x)) ** 2)
            assert ws.rhos[i] == pytest.approx(ref, rel=1e-10)


def test_gauss_integrate_examples():
    spec = OdeSpec.hermite()
    zs = solve_zeros(spec, 2)
    ws = weight_constants(spec, zs, master_integral(spec, 2))
    one = partial_coeffs(zs, lambda x: 1.0)
    assert gauss_integrate(zs, ws, one, one) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert abs(gauss_integrate(zs, ws, one, one, mu=(0.0, 1.0))) < 1e-14
    xs_ = partial_coeffs(zs, lambda x: x)
    assert gauss_integrate(zs, ws, xs_, xs_) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)
    # degree-3 integrand x(1 + x)x
    f = partial_coeffs(zs, lambda x: 1 + x)
    assert gauss_integrate(zs, ws, f, xs_, mu=(0.0, 1.0)) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)


@pytest.mark.parametrize("name", FAMILIES)
@pytest.mark.parametrize("n", [2, 4, 7])
def test_exactness_frontier(name, n):
    spec = FAMILIES[name]
    zs = solve_zeros(spec, n)
    ws = weight_constants(spec, zs, master_integral(spec, n))
    c = 0.3 if spec.family != "laguerre" else 1.0  # shift away from symmetric cancellations
    exact = lambda d: (lambda x: (x + c) ** d)
    for d in range(2 * n):
        ref = integrate_weighted(spec, exact(d))
        assert gauss_quadrature(zs, ws, exact(d)) == pytest.approx(ref, rel=1e-10)
    ref = integrate_weighted(spec, exact(2 * n))
    assert abs(gauss_quadrature(zs, ws, exact(2 * n)) - ref) > 1e-6 * abs(ref)


@pytest.mark.parametrize("name", FAMILIES)
def test_master_integral_minimal_at_zeros(name):
    spec = FAMILIES[name]
    zs = solve_zeros(spec, 4)
    base = master_integral_numeric(spec, zs)
    for k in range(4):
        for s in (1e-3, -1e-3):
            xs = zs.xs.copy()
            xs[k] += s
            assert master_integral_numeric(spec, xs) > base


def test_master_integral_cross_derivatives_vanish():
    spec = OdeSpec.hermite()
    xs = solve_zeros(spec, 3).xs
    h = 1e-3
    I = lambda z: master_integral_numeric(spec, z)

    def shifted(i, si, j, sj):
        z = xs.copy()
        z[i] += si
        z[j] += sj
        return I(z)

    for i, j in [(0, 1), (0, 2), (1, 2)]:
        mixed = (shifted(i, h, j, h) - shifted(i, h, j, -h) - shifted(i, -h, j, h) + shifted(i, -h, j, -h)) / (4 * h * h)
        diag = (shifted(i, h, i, 0) - 2 * I(xs) + shifted(i, -h, i, 0)) / (h * h)
        assert abs(mixed) < 1e-5 * abs(diag)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.integers(1, 8))
def test_laguerre_weights_property(g, lam, n):
    spec = OdeSpec.laguerre(g, lam)
    zs = solve_zeros(spec, n)
    assert np.abs(zero_residuals(spec, zs.xs)).max() < 1e-11 * max(1.0, 1 / zs.xs[0])
    ws = weight_constants(spec, zs, master_integral(spec, n))
    cw = christoffel_weights(zs, ws)
    # Christoffel weights sum to int w
    assert cw.sum() == pytest.approx(math.gamma(2 * g) / (2 * lam) ** (2 * g), rel=1e-10)
