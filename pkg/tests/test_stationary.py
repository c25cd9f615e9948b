import math

import numpy as np
import pytest

from stgraph import ALPHA
from stgraph.errors import ConvergenceError, DivergingOptimumError, DomainError, NoBoundStateError
from stgraph.graph import (
    lagrangian_stationary, lagrangian_stationary_split, numeric_gradient, stationary_field_residual,
    stationary_node_residual,
)
from stgraph.orthopoly import OdeSpec, hermite_zero_identities, solve_zeros
from stgraph.stationary import (
    AtomParams, dirac_ground_energy, ground_state_dirac, implicit_energy_extremize,
    oscillator_field_residual, oscillator_hamiltonian, oscillator_node_residual, oscillator_solve,
    radial_lagrangian, radial_solve, schroedinger_ground, schroedinger_two_node,
    schroedinger_two_node_energy, single_node_state, singular_branch_constraint, sommerfeld_energy,
)

A137 = 1 / 137.035999


def test_dirac_ground_closed_form():
    g = ground_state_dirac(1.0, A137)
    assert g.epsilon == pytest.approx(math.sqrt(1 - A137 ** 2), abs=1e-10)
    assert g.r == pytest.approx(math.sqrt(1 - A137 ** 2) / A137, abs=1e-8)
    assert abs(g.h) < 1e-10
    assert g.kind == "min"


@pytest.mark.parametrize("m,alpha", [(1.0, 0.3), (2.5, 0.05), (0.7, 0.6)])
def test_dirac_ground_scaling(m, alpha):
    g = ground_state_dirac(m, alpha)
    assert g.epsilon == pytest.approx(m * math.sqrt(1 - alpha ** 2), rel=1e-12)
    assert g.r == pytest.approx(math.sqrt(1 - alpha ** 2) / (alpha * m), rel=1e-10)
    sg = g.graph()
    assert np.abs(stationary_field_residual(sg)).max() < 1e-10 * max(1, m)
    assert np.abs(stationary_node_residual(sg)).max() < 1e-8
    assert abs(lagrangian_stationary(sg)) < 1e-9
    assert abs(lagrangian_stationary_split(sg)) < 1e-9


def test_dirac_ground_free_limit():
    small = ground_state_dirac(1.0, 1e-4)
    assert small.epsilon == pytest.approx(1.0, abs=1e-8)
    assert small.r > 9e3


def test_dirac_ground_rejects_alpha_above_one():
    with pytest.raises(NoBoundStateError):
        ground_state_dirac(1.0, 1.2)


def test_height_perturbation_raises_energy():
    # the optimum in h is a minimum of epsilon(r, h): moving off h = 0 costs energy
    g = ground_state_dirac(1.0, 0.1)
    e0 = dirac_ground_energy(g.r, 0.0, 1.0, 0.1)
    e1 = dirac_ground_energy(g.r, 0.1 * g.r, 1.0, 0.1)
    assert e1 > e0
    again = ground_state_dirac(1.0, 0.1, h0_frac=0.1)
    assert abs(again.h) < 1e-10 * again.r


def test_extremize_quadratic_toy():
    res = implicit_energy_extremize(lambda e, p: e - p[0] ** 2, 0.3, [0.4])
    assert abs(res.epsilon) < 1e-12 and abs(res.params[0]) < 1e-12
    assert res.kind == "min"


def test_singular_branch_is_saddle():
    C, G = singular_branch_constraint(1.0, 0.3)
    res = implicit_energy_extremize(C, 0.9, [0.8, 8.7], grad=G)
    assert res.kind == "saddle"
    with pytest.raises(ConvergenceError):
        implicit_energy_extremize(C, 0.9, [0.8, 8.7], grad=G, require_extremum=True)


def test_sommerfeld_examples():
    assert sommerfeld_energy(AtomParams(1.0, A137, 1, 1)) == pytest.approx(math.sqrt(1 - A137 ** 2), rel=1e-15)
    for k in (2, 3, -2):
        ap = AtomParams(1.0, A137, k, 1)
        assert sommerfeld_energy(ap) == pytest.approx(math.sqrt(k * k - A137 ** 2) / abs(k), rel=1e-15)
    assert sommerfeld_energy(AtomParams(1.0, A137, 1, 2)) == sommerfeld_energy(AtomParams(1.0, A137, -1, 2))


def test_atom_params_validation():
    with pytest.raises(DomainError):
        AtomParams(kappa=0)
    with pytest.raises(NoBoundStateError):
        AtomParams(alpha=1.0)
    with pytest.raises(DomainError):
        radial_solve(AtomParams(n_spheres=9))


@pytest.mark.parametrize("kappa", [1, 2, 3, -1, -2])
@pytest.mark.parametrize("n_sph", [1, 2, 3])
def test_radial_matches_closed_form(kappa, n_sph):
    ap = AtomParams(1.0, ALPHA, kappa, n_sph)
    st = radial_solve(ap)
    assert st.epsilon == pytest.approx(sommerfeld_energy(ap), abs=1e-8)
    q = ap.alpha / (ap.gamma + ap.n_r)
    lam = q / math.sqrt(1 + q * q)  # sqrt(m^2 - eps^2) of the closed form, cancellation-free
    ref = solve_zeros(OdeSpec.laguerre(ap.gamma, lam), n_sph).xs
    assert np.allclose(st.rs, ref, rtol=0, atol=1e-8)
    assert np.sum(st.fs ** 2 + st.gs ** 2) == pytest.approx(1, abs=1e-12)
    assert st.residual < 1e-10
    assert abs(radial_lagrangian(st.rs, st.fs, st.gs, st.epsilon, ap)) < 1e-9


def test_radial_single_sphere_radius():
    for k in (1, 2):
        st = radial_solve(AtomParams(1.0, 0.2, k, 1))
        assert st.rs[0] == pytest.approx(k / 0.2 * math.sqrt(k * k - 0.04), rel=1e-10)


def test_radial_linear_ansatz():
    st = radial_solve(AtomParams(1.0, 0.1, 1, 4))
    V = np.vstack([np.ones(4), st.rs]).T
    for amp in (st.fs, st.gs):
        coef, *_ = np.linalg.lstsq(V, amp, rcond=None)
        assert np.abs(V @ coef - amp).max() < 1e-8


def test_radial_stationary_in_all_variables():
    ap = AtomParams(1.0, 0.1, 2, 3)
    st = radial_solve(ap)
    n = ap.n_spheres
    fn = lambda v: radial_lagrangian(v[:n], v[n:2 * n], v[2 * n:], st.epsilon, ap)
    g = numeric_gradient(fn, np.concatenate([st.rs, st.fs, st.gs]))
    assert np.abs(g).max() < 1e-8


def test_schroedinger_ground():
    s = schroedinger_ground(A137, 1.0)
    assert s.E == pytest.approx(-A137 ** 2 / 2, abs=1e-12)
    assert s.r == pytest.approx(1 / A137, abs=1e-10)
    assert abs(s.h) < 1e-10
    d = ground_state_dirac(1.0, 1 / 137)
    assert abs((d.epsilon - 1.0) - schroedinger_ground(1 / 137, 1.0).E) < 1e-8


def test_schroedinger_optimum_is_stationary():
    s = schroedinger_ground(0.2, 1.0)
    E = lambda p: schroedinger_two_node_energy(p[0], p[1], lambda r: 0.2 / r, 1.0)
    g = numeric_gradient(E, [s.r, s.h])
    assert np.abs(g).max() < 1e-8


def test_repulsive_potential_diverges():
    with pytest.raises(DivergingOptimumError):
        schroedinger_two_node(lambda r: -0.1 / r, lambda r: 0.1 / r ** 2)
    with pytest.raises(DivergingOptimumError):
        schroedinger_ground(-0.1)


def test_single_node_at_potential_extremum():
    V = lambda x: 1.5 - (x[0] - 0.3) ** 2 - 2 * (x[1] + 0.1) ** 2 - (x[2] - 1) ** 2
    s = single_node_state(V, [0.0, 0.0, 0.0])
    assert s.x0 == pytest.approx([0.3, -0.1, 1.0], abs=1e-8)
    assert s.E == pytest.approx(-1.5)


@pytest.mark.parametrize("n", range(1, 9))
def test_oscillator(n):
    st = oscillator_solve(n)
    assert st.E == (n - 1) / 2
    assert st.residual_field < 1e-10 and st.residual_nodes < 1e-10
    assert st.nonstandard == (n % 2 == 1)
    s, res = hermite_zero_identities(st.xs)
    assert abs(s) < 1e-12 and np.abs(res).max() < 1e-12


def test_oscillator_small_zeros():
    assert oscillator_solve(2).xs == pytest.approx([-math.sqrt(0.5), math.sqrt(0.5)], abs=1e-12)
    assert oscillator_solve(3).xs == pytest.approx([-math.sqrt(1.5), 0.0, math.sqrt(1.5)], abs=1e-12)
    assert oscillator_solve(1).xs == pytest.approx([0.0], abs=1e-15)


def test_oscillator_residuals_are_gradients():
    st = oscillator_solve(4)
    rng = np.random.default_rng(0)
    psi = st.psi + 0.1 * rng.normal(size=4)
    g = numeric_gradient(lambda p: oscillator_hamiltonian(st.xs, p, st.E), psi)
    assert np.allclose(g, oscillator_field_residual(st.xs, psi, st.E), atol=1e-8)
    xs = st.xs + 0.05 * rng.normal(size=4)
    g = numeric_gradient(lambda x: oscillator_hamiltonian(x, psi, st.E), xs)
    assert np.allclose(g, oscillator_node_residual(xs, psi), atol=1e-7)
