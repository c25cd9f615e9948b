"""Bound-state solvers: Dirac ground state, radial spectrum, Schroedinger limit, oscillator."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import ALPHA
from . import spinor as sp
from ._newton import damped_newton, default_tol, fd_jacobian
from .errors import ConvergenceError, DivergingOptimumError, DomainError, NoBoundStateError
from .fields import coulomb_field
from .graph import StationaryGraph, join_spinor
from .orthopoly import OdeSpec, hermite_zero_identities, solve_zeros


@dataclass(frozen=True)
class AtomParams:
    m: float = 1.0
    alpha: float = ALPHA
    kappa: int = 1
    n_spheres: int = 1

    def __post_init__(self):
        if not self.m > 0:
            raise DomainError("mass must be positive")
        if int(self.kappa) != self.kappa or self.kappa == 0:
            raise DomainError("kappa must be a nonzero integer")
        if not self.kappa ** 2 > self.alpha ** 2:
            raise NoBoundStateError("need kappa^2 > alpha^2")
        if not 0 < self.alpha < 1:
            raise NoBoundStateError("need 0 < alpha < 1")
        if self.n_spheres < 1:
            raise DomainError("n_spheres must be >= 1")

    @property
    def n_r(self) -> int:
        return self.n_spheres - 1

    @property
    def gamma(self) -> float:
        return float(np.sqrt(self.kappa ** 2 - self.alpha ** 2))


# ---------------------------------------------------------- implicit extremum

@dataclass
class ExtremumResult:
    epsilon: float
    params: np.ndarray
    kind: str  # "min", "max", "saddle" or "degenerate"
    hessian_eigs: np.ndarray
    residual: float
    iterations: int


def implicit_energy_extremize(constraint: Callable, eps0: float, p0, grad: Optional[Callable] = None,
                              tol: Optional[float] = None, max_iter: int = 100,
                              require_extremum: bool = False, admissible: Optional[Callable] = None,
                              fd_step: float = 1e-6) -> ExtremumResult:
    """Stationary epsilon on the manifold constraint(eps, p) = 0.

    Solves constraint = 0 together with d constraint / dp = 0 by damped Newton.
    The Hessian of the implicit function eps(p), -C_pp / C_eps, classifies the point.
    ``grad(eps, p)`` may supply the analytic p-gradient of the constraint.
    """
    p0 = np.atleast_1d(np.asarray(p0, float))
    k = len(p0)

    def cgrad(eps, p):
        if grad is not None:
            return np.asarray(grad(eps, p), float)
        g = np.empty(k)
        for i in range(k):
            h = fd_step * max(1.0, abs(p[i]))
            a, b = p.copy(), p.copy()
            a[i] += h
            b[i] -= h
            g[i] = (constraint(eps, a) - constraint(eps, b)) / (2 * h)
        return g

    def system(z):
        eps, p = z[0], z[1:]
        return np.concatenate([[constraint(eps, p)], cgrad(eps, p)])

    adm = None if admissible is None else (lambda z: admissible(z[1:]))
    z, res, it = damped_newton(system, np.concatenate([[eps0], p0]), tol=tol, max_iter=max_iter,
                               admissible=adm)
    eps, p = z[0], z[1:]
    Cpp = fd_jacobian(lambda q: cgrad(eps, q), p, rel_step=1e-4)
    Cpp = 0.5 * (Cpp + Cpp.T)
    h = 1e-6 * max(1.0, abs(eps))
    Ce = (constraint(eps + h, p) - constraint(eps - h, p)) / (2 * h)
    if Ce == 0:
        raise ConvergenceError("constraint does not depend on epsilon", res, it)
    eigs = np.linalg.eigvalsh(-Cpp / Ce)
    scale = max(1e-300, np.abs(eigs).max())
    if np.all(eigs > 1e-9 * scale):
        kind = "min"
    elif np.all(eigs < -1e-9 * scale):
        kind = "max"
    elif np.any(eigs > 1e-9 * scale) and np.any(eigs < -1e-9 * scale):
        kind = "saddle"
    else:
        kind = "degenerate"
    if require_extremum and kind not in ("min", "max"):
        raise ConvergenceError(f"stationary point is a {kind}, not an extremum", res, it)
    return ExtremumResult(float(eps), p, kind, eigs, float(res), it)


# ---------------------------------------------------------------- Dirac ground

@dataclass
class DiracGround:
    epsilon: float
    r: float
    h: float
    P: np.ndarray        # spinors of the two nodes
    P_plus: np.ndarray
    P_minus: np.ndarray
    kind: str
    m: float
    alpha: float

    def graph(self) -> StationaryGraph:
        return dirac_ground_graph(self.r, self.h, self.epsilon, self.m, self.alpha, self.P)


def dirac_ground_nodes(r: float, h: float):
    """Two nodes at distance r from the origin, the origin at height h over their edge."""
    a = np.sqrt(r * r - h * h)
    return np.array([sp.mink_encode(0, h, 0, a), sp.mink_encode(0, h, 0, -a)])


def dirac_ground_spinors(r: float, h: float, epsilon: float, m: float, alpha: float):
    """Solution of the two-node field equation (edge counted twice)."""
    x = dirac_ground_nodes(r, h)
    u = sp.inv(x[0] - x[1])
    eprime = epsilon + alpha / r
    Pp = np.array([sp.I2, sp.I2])
    Pm = np.array([2 * u / (eprime + m), -2 * u / (eprime + m)])
    P = np.array([join_spinor(Pp[i], Pm[i]) for i in range(2)])
    return P, Pp, Pm


def dirac_ground_graph(r, h, epsilon, m=1.0, alpha=ALPHA, P=None) -> StationaryGraph:
    if P is None:
        P = dirac_ground_spinors(r, h, epsilon, m, alpha)[0]
    return StationaryGraph(dirac_ground_nodes(r, h), P, [(0, 1, 2)], epsilon, m, coulomb_field(alpha))


def dirac_ground_energy(r, h, m: float = 1.0, alpha: float = ALPHA) -> float:
    """+ branch of the two-node energy: -alpha/r + sqrt(m^2 + 1/(r^2 - h^2))."""
    return -alpha / r + np.sqrt(m * m + 1.0 / (r * r - h * h))


def ground_state_dirac(m: float = 1.0, alpha: float = ALPHA, tol: Optional[float] = None,
                       h0_frac: float = 0.05) -> DiracGround:
    """Extremize the two-node Dirac energy over (r, h).

    Internally works with rho = alpha m r, eta = alpha m h and eps = m (1 + alpha^2 b),
    where the constraint reads  s (2 + alpha^2 s) - 1/(rho^2 - eta^2) = 0, s = b + 1/rho.
    """
    if not 0 < alpha < 1:
        raise NoBoundStateError("bound ground state needs 0 < alpha < 1")
    if not m > 0:
        raise DomainError("mass must be positive")
    a2 = alpha * alpha

    def C(b, p):
        rho, eta = p
        s = b + 1 / rho
        return s * (2 + a2 * s) - 1 / (rho * rho - eta * eta)

    def G(b, p):
        rho, eta = p
        s = b + 1 / rho
        q = rho * rho - eta * eta
        return np.array([-(2 + 2 * a2 * s) / rho ** 2 + 2 * rho / q ** 2, -2 * eta / q ** 2])

    res = implicit_energy_extremize(C, -0.5, [1.0, h0_frac], grad=G, tol=tol,
                                    admissible=lambda p: p[0] > abs(p[1]))
    b, (rho, eta) = res.epsilon, res.params
    eps = m * (1 + a2 * b)
    r, h = rho / (alpha * m), eta / (alpha * m)
    if not eps + alpha / r > 0:
        raise ConvergenceError("converged to the rejected - root", res.residual, res.iterations)
    P, Pp, Pm = dirac_ground_spinors(r, h, eps, m, alpha)
    return DiracGround(float(eps), float(r), float(h), P, Pp, Pm, res.kind, m, alpha)


def singular_branch_constraint(m: float, alpha: float):
    """Two-node ground state with P1+ = P2- = 0, nodes on opposite sides at r1, r2:
    (eps + alpha/r1 + m)(eps + alpha/r2 - m) - 4/(r1 + r2)^2.  Returns (C, grad)."""

    def C(eps, p):
        r1, r2 = p
        return (eps + alpha / r1 + m) * (eps + alpha / r2 - m) - 4 / (r1 + r2) ** 2

    def G(eps, p):
        r1, r2 = p
        d = r1 + r2
        return np.array([-alpha / r1 ** 2 * (eps + alpha / r2 - m) + 8 / d ** 3,
                         -alpha / r2 ** 2 * (eps + alpha / r1 + m) + 8 / d ** 3])

    return C, G


def singular_branch_energy(r1, r2, m: float, alpha: float) -> float:
    a1, a2 = alpha / r1, alpha / r2
    c = 4 / (r1 + r2) ** 2
    return 0.5 * (-(a1 + a2) + np.sqrt((a1 - a2 + 2 * m) ** 2 + 4 * c))


# ------------------------------------------------------------------ spectrum

def sommerfeld_energy(params: AtomParams) -> float:
    g = params.gamma
    return params.m / np.sqrt(1 + (params.alpha / (g + params.n_r)) ** 2)


@dataclass
class RadialState:
    rs: np.ndarray
    fs: np.ndarray
    gs: np.ndarray
    epsilon: float
    gamma: float
    lambda_exp: float
    kappa: int
    params: AtomParams
    residual: float = 0.0
    iterations: int = 0


def _lambda_exp(b: float, m: float) -> float:
    # sqrt(m^2 - eps^2) without cancellation: eps = m + b
    return float(np.sqrt(-b * (2 * m + b)))


def radial_residuals(rs, fs, gs, epsilon: float, params: AtomParams, b: Optional[float] = None):
    """Field equations (two per radius) and the radius equation.

    R1 = eps-_i f_i - kappa g_i / r_i + sum_j g_j/(r_i - r_j)
    R2 = eps+_i g_i - kappa f_i / r_i - sum_j f_j/(r_i - r_j)
    R3 = (-alpha (f_i^2 + g_i^2) + 2 kappa f_i g_i)/r_i^2 - 2 sum_j (f_i g_j - g_i f_j)/(r_i - r_j)^2
    with eps+-_i = epsilon +- m + alpha/r_i.  R3 is the r-derivative of the radial sum.
    """
    rs, fs, gs = (np.asarray(a, float) for a in (rs, fs, gs))
    m, al, ka = params.m, params.alpha, params.kappa
    b = epsilon - m if b is None else b
    em = b + al / rs
    ep = 2 * m + b + al / rs
    d = rs[:, None] - rs[None, :]
    np.fill_diagonal(d, np.inf)
    R1 = em * fs - ka * gs / rs + (gs[None, :] / d).sum(axis=1)
    R2 = ep * gs - ka * fs / rs - (fs[None, :] / d).sum(axis=1)
    cross = fs[:, None] * gs[None, :] - gs[:, None] * fs[None, :]
    R3 = (-al * (fs ** 2 + gs ** 2) + 2 * ka * fs * gs) / rs ** 2 - 2 * (cross / d ** 2).sum(axis=1)
    return R1, R2, R3


def radial_lagrangian(rs, fs, gs, epsilon: float, params: AtomParams) -> float:
    rs, fs, gs = (np.asarray(a, float) for a in (rs, fs, gs))
    m, al, ka = params.m, params.alpha, params.kappa
    em = epsilon - m + al / rs
    ep = epsilon + m + al / rs
    d = rs[:, None] - rs[None, :]
    np.fill_diagonal(d, np.inf)
    cross = fs[:, None] * gs[None, :] - gs[:, None] * fs[None, :]
    return float(np.sum(em * fs ** 2 + ep * gs ** 2) - 2 * ka * np.sum(fs * gs / rs) + np.sum(cross / d))


def radial_solve(params: AtomParams, tol: Optional[float] = None, max_iter: int = 100) -> RadialState:
    """Solve the coupled radial system for n = n_spheres radii.

    Unknowns are rho_i = alpha m r_i, f_i, g_i and the scaled binding b~ with
    epsilon = m (1 + alpha^2 b~); the normalization sum f^2 + g^2 = 1 closes the system.
    """
    n = params.n_spheres
    if n > 8:
        raise DomainError("n_spheres > 8 is outside the supported range")
    m, al = params.m, params.alpha
    sc = al * m
    N = params.n_r + abs(params.kappa)
    b0 = -m * al ** 2 / (2 * N ** 2)  # Schroedinger level as starting point
    lam0 = _lambda_exp(b0, m)
    r0 = solve_zeros(OdeSpec.laguerre(params.gamma, lam0), n).xs

    def unpack(z):
        return z[:n] / sc, z[n:2 * n], z[2 * n:3 * n], z[3 * n] * m * al ** 2

    def F(z):
        rs, fs, gs, b = unpack(z)
        R1, R2, R3 = radial_residuals(rs, fs, gs, m + b, params, b=b)
        # rows scaled to O(1)
        return np.concatenate([R1 / (m * al ** 2), R2 / (m * al), R3 * rs ** 2 / al,
                               [np.sum(fs ** 2 + gs ** 2) - 1]])

    # amplitudes: null vector of the linear field equations at the initial radii
    def lin(fg):
        return F(np.concatenate([r0 * sc, fg, [b0 / (m * al ** 2)]]))[:2 * n]

    M = np.array([lin(e) for e in np.eye(2 * n)]).T
    fg0 = np.linalg.svd(M)[2][-1]
    if fg0[np.argmax(np.abs(fg0))] < 0:
        fg0 = -fg0
    z0 = np.concatenate([r0 * sc, fg0, [b0 / (m * al ** 2)]])
    tol = default_tol() if tol is None else tol
    z, res, it = damped_newton(F, z0, tol=tol * 1e-1, max_iter=max_iter,
                               admissible=lambda z: bool(np.all(z[:n] > 0)))
    rs, fs, gs, b = unpack(z)
    order = np.argsort(rs)
    rs, fs, gs = rs[order], fs[order], gs[order]
    R = radial_residuals(rs, fs, gs, m + b, params, b=b)
    resid = float(max(np.abs(r).max() for r in R))
    return RadialState(rs, fs, gs, float(m + b), params.gamma, _lambda_exp(b, m), params.kappa, params,
                       resid, it)


# --------------------------------------------------------- Schroedinger limit

@dataclass
class SchroedingerGround:
    E: float
    r: float
    h: float
    kind: str


def schroedinger_two_node_energy(r, h, V: Callable, m: float = 1.0, mult: int = 2) -> float:
    """E(r, h) = -V(r) + mult^2 u^2/(2m), |u|^-1 = 2 sqrt(r^2 - h^2)."""
    return -V(r) + mult ** 2 / (8 * m * (r * r - h * h))


def schroedinger_two_node(V: Callable, dV: Callable, m: float = 1.0, r0: float = 1.0,
                          mult: int = 2, tol: Optional[float] = None, r_max: float = 1e8) -> SchroedingerGround:
    """Extremize E(r, h) for a radial potential V(r) with derivative dV(r)."""
    c = mult ** 2 / (8 * m)

    def C(E, p):
        r, h = p
        return E + V(r) - c / (r * r - h * h)

    def G(E, p):
        r, h = p
        q = r * r - h * h
        return np.array([dV(r) + 2 * c * r / q ** 2, -2 * c * h / q ** 2])

    E0 = schroedinger_two_node_energy(r0, 0.0, V, m, mult)
    try:
        res = implicit_energy_extremize(C, E0, [r0, 0.05 * r0], grad=G, tol=tol,
                                        admissible=lambda p: abs(p[1]) < p[0] < r_max)
    except ConvergenceError as exc:
        raise DivergingOptimumError("no bounded optimum for this potential", exc.best_residual,
                                    exc.iterations) from exc
    r, h = res.params
    return SchroedingerGround(res.epsilon, float(r), float(h), res.kind)


def schroedinger_ground(alpha: float = ALPHA, m: float = 1.0, tol: Optional[float] = None) -> SchroedingerGround:
    """Coulomb ground state; scaled internally (r = rho/(alpha m), E = m alpha^2 E~)."""
    if not alpha > 0:
        raise DivergingOptimumError("repulsive or vanishing Coulomb potential has no bounded optimum")
    g = schroedinger_two_node(lambda r: 1 / r, lambda r: -1 / r ** 2, m=1.0, r0=1.0, tol=tol)
    return SchroedingerGround(g.E * m * alpha ** 2, g.r / (alpha * m), g.h / (alpha * m), g.kind)


@dataclass
class SingleNodeState:
    x0: np.ndarray
    E: float
    grad_norm: float


def single_node_state(V: Callable, x0, grad: Optional[Callable] = None, tol: Optional[float] = None) -> SingleNodeState:
    """One-node solution: the node sits at a stationary point of V and E = -V(x0)."""
    x0 = np.asarray(x0, float)

    def g(x):
        if grad is not None:
            return np.asarray(grad(x), float)
        out = np.empty_like(x)
        for k in range(len(x)):
            h = 1e-6 * max(1.0, abs(x[k]))
            a, b = x.copy(), x.copy()
            a[k] += h
            b[k] -= h
            out[k] = (V(a) - V(b)) / (2 * h)
        return out

    x, res, _ = damped_newton(g, x0, tol=tol if tol is not None else 1e-10)
    return SingleNodeState(x, float(-V(x)), float(res))


# ----------------------------------------------------------------- oscillator

@dataclass
class OscillatorState:
    n: int
    xs: np.ndarray
    psi: np.ndarray
    E: float
    nonstandard: bool
    residual_field: float
    residual_nodes: float


def _pair_terms(xs):
    d = xs[:, None] - xs[None, :]
    np.fill_diagonal(d, np.inf)
    return 1 / d


def oscillator_field_residual(xs, psi, E: float) -> np.ndarray:
    """2(E - x_m^2/2) psi_m + sum_{j != m} sum_{k != j} psi_k / ((x_m - x_j)(x_j - x_k))."""
    xs, psi = np.asarray(xs, float), np.asarray(psi, float)
    inv = _pair_terms(xs)
    return 2 * (E - 0.5 * xs ** 2) * psi + inv @ (inv @ psi)


def oscillator_node_residual(xs, psi) -> np.ndarray:
    """-x_m psi_m^2 - sum_jk psi_m psi_k/((x_m-x_j)^2 (x_j-x_k)) + sum_jk psi_j psi_k/((x_j-x_m)^2 (x_m-x_k))."""
    xs, psi = np.asarray(xs, float), np.asarray(psi, float)
    inv = _pair_terms(xs)
    inv2 = inv ** 2
    t1 = psi * (inv2 @ (inv @ psi))
    t2 = (inv2 @ psi) * (inv @ psi)
    return -xs * psi ** 2 - t1 + t2


def oscillator_hamiltonian(xs, psi, E: float) -> float:
    """Complete-graph Hamiltonian sum for V = -x^2/2, m = 1 on collinear nodes."""
    xs, psi = np.asarray(xs, float), np.asarray(psi, float)
    inv = _pair_terms(xs)
    return float(np.sum((E - 0.5 * xs ** 2) * psi ** 2) + 0.5 * psi @ inv @ inv @ psi)


def oscillator_solve(n: int, a: float = 1.0) -> OscillatorState:
    if n < 1:
        raise DomainError("n must be >= 1")
    xs = solve_zeros(OdeSpec.hermite(), n).xs
    psi = np.full(n, float(a))
    E = (n - 1) / 2
    r1 = float(np.abs(oscillator_field_residual(xs, psi, E)).max())
    r2 = float(np.abs(oscillator_node_residual(xs, psi)).max())
    return OscillatorState(n, xs, psi, E, n % 2 == 1, r1, r2)


def oscillator_graph_nodes(xs) -> np.ndarray:
    return np.array([sp.mink_encode(0, x, 0, 0) for x in xs])


def complete_edges(n: int) -> list:
    return [(i, j, 1) for i in range(n) for j in range(i + 1, n)]


def hermite_identities_ok(xs, tol: float = 1e-12) -> bool:
    s, res = hermite_zero_identities(xs)
    return abs(s) < tol and bool(np.all(np.abs(res) < tol))
