"""Point grids on the unit sphere via the conformal map chi = tan(theta/2) e^{i phi}.

Nodes sit on h latitude circles with 2m equidistant points each; the latitudes
come from zeros of the associated-Legendre-type family (orthopoly.legendre_like).
Edges join points on the same latitude and on the same longitude circle; the
opposite point on a latitude lies on both and is stored once with multiplicity 2.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import spinor as sp
from .errors import GridInvalidError, SingularMatrixError
from .orthopoly import OdeSpec, solve_zeros

U_DIAG = np.diag([1.0 + 0j, -1.0])


@dataclass(frozen=True)
class SpherePoint:
    chi: complex          # plane image; inf for the south pole
    p: np.ndarray         # traceless Hermitian, p @ p = I
    theta: float
    phi: float

    @property
    def is_pole(self) -> bool:
        return not np.isfinite(self.chi)


def chi_map(theta: float, phi: float) -> complex:
    if np.isclose(theta, np.pi, atol=0, rtol=0) or theta == np.pi:
        return complex(np.inf)
    return complex(np.tan(theta / 2) * np.exp(1j * phi))


def angles_from_chi(chi) -> tuple:
    if not np.isfinite(chi):
        return np.pi, 0.0
    return 2 * np.arctan(abs(chi)), float(np.angle(chi)) if chi != 0 else 0.0


def sphere_from_chi(chi, pole: bool = False) -> SpherePoint:
    """Point on the unit sphere for chi; ``pole=True`` (or chi = inf) gives the south pole."""
    if pole or not np.isfinite(chi):
        return SpherePoint(complex(np.inf), np.diag([-1.0 + 0j, 1.0]), np.pi, 0.0)
    chi = complex(chi)
    a = abs(chi) ** 2
    z = (1 - a) / (1 + a)
    w = 2 * chi / (1 + a)  # x + i y
    p = sp.mink_encode(0.0, w.real, w.imag, z)
    th, ph = angles_from_chi(chi)
    return SpherePoint(chi, p, th, ph)


def q_factor(chi) -> np.ndarray:
    chi = complex(chi)
    return np.array([[1.0, np.conj(chi)], [chi, -1.0]], dtype=complex)


def decompose_p(chi) -> tuple:
    """(Q, U) with p = Q U Q^-1."""
    return q_factor(chi), U_DIAG.copy()


def d21(chi1, chi2) -> np.ndarray:
    """Q2 Q1 U - U Q2 Q1."""
    c1, c2 = complex(chi1), complex(chi2)
    return 2 * np.array([[0, np.conj(c2) - np.conj(c1)], [c2 - c1, 0]], dtype=complex)


def difference_inverse(chi1, chi2) -> np.ndarray:
    """p1 (p1 - p2)^-1 in closed form."""
    c1, c2 = complex(chi1), complex(chi2)
    if abs(c2 - c1) == 0:
        raise SingularMatrixError("coincident points")
    mid = np.array([[0, 1 / (c2 - c1)], [-1 / (np.conj(c2) - np.conj(c1)), 0]], dtype=complex)
    return 0.5 * q_factor(c1) @ mid @ q_factor(c2)


def rotate_chi(chi, T) -> np.ndarray:
    """Rotation T = (a, b; -conj(b), conj(a)) acting as chi -> (a chi + b)/(-conj(b) chi + conj(a))."""
    a, b = T[0, 0], T[0, 1]
    chi = np.asarray(chi, complex)
    return (a * chi + b) / (-np.conj(b) * chi + np.conj(a))


@dataclass(frozen=True)
class SphereGrid:
    m_half: int
    h: int
    zs: np.ndarray        # latitude heights z_k
    ts: np.ndarray        # latitude parameters |chi|
    chis: np.ndarray      # node images, latitude-major
    edges: tuple          # (i, j, mult), i < j
    l: int
    residual: float = 0.0

    @property
    def n(self) -> int:
        return len(self.chis)

    @property
    def nodes(self) -> list:
        return [sphere_from_chi(c) for c in self.chis]

    def edge_counts(self) -> np.ndarray:
        c = np.zeros(self.n, int)
        for i, j, w in self.edges:
            c[i] += w
            c[j] += w
        return c

    def neighbour_matrix(self) -> np.ndarray:
        W = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            W[i, j] = W[j, i] = w
        return W

    def a_coeffs(self, branch: int = 1) -> tuple:
        return ansatz(self.chis, branch)


def _grid_edges(m: int, h: int) -> tuple:
    idx = lambda k, j: k * 2 * m + j
    mult = {}
    for k in range(h):
        for j in range(2 * m):
            for k2 in range(h):
                for j2 in range(2 * m):
                    a, b = idx(k, j), idx(k2, j2)
                    if a >= b:
                        continue
                    w = (k == k2) + ((j - j2) % m == 0)
                    if w:
                        mult[(a, b)] = w
    return tuple((a, b, w) for (a, b), w in sorted(mult.items()))


def stationarity_residuals(chis, edges) -> np.ndarray:
    """Per node: sum over edges of (1 + chi_i conj(chi_k)) / (chi_k - chi_i)."""
    chis = np.asarray(chis, complex)
    r = np.zeros(len(chis), complex)
    for i, j, w in edges:
        r[j] += w * (1 + chis[i] * np.conj(chis[j])) / (chis[j] - chis[i])
        r[i] += w * (1 + chis[j] * np.conj(chis[i])) / (chis[i] - chis[j])
    return r


def build_grid(m_half: int, h: int, tol: Optional[float] = None) -> SphereGrid:
    if m_half < 1 or h < 1:
        raise ValueError("m_half and h must be >= 1")
    m = int(m_half)
    zs = solve_zeros(OdeSpec.legendre_like(m), h, tol=tol).xs
    ts = np.sqrt((1 - zs) / (1 + zs))
    phases = np.exp(1j * np.pi * np.arange(1, 2 * m + 1) / m)
    chis = (ts[:, None] * phases[None, :]).reshape(-1)
    edges = _grid_edges(m, h)
    res = float(np.max(np.abs(stationarity_residuals(chis, edges))))
    if res > 1e-10:
        raise GridInvalidError(f"stationarity residual {res:.3e}")
    return SphereGrid(m, h, zs, ts, chis, edges, 2 * (m + h - 1), res)


# --- angular Lagrangian -------------------------------------------------------

def ansatz(chis, branch: int = 1, c: float = 1.0) -> tuple:
    chis = np.asarray(chis, complex)
    if branch == 1:
        return c * np.ones_like(chis), c * np.conj(chis)
    if branch == 2:
        return c * chis, c * np.ones_like(chis)
    raise ValueError("branch must be 1 or 2")


def a_matrix(mu, nu, chi) -> np.ndarray:
    """A = Q(chi)^-1 (conj mu, nu; conj nu, -mu)."""
    M = np.array([[np.conj(mu), nu], [np.conj(nu), -mu]], dtype=complex)
    return np.linalg.solve(q_factor(chi), M)


def _ordered(edges):
    for i, j, w in edges:
        yield i, j, w
        yield j, i, w


def angular_lagrangian_matrix(A, chis, edges, kappa: float) -> complex:
    """sum_ij tr(bar(A_i) p_i (p_i - p_j)^-1 A_j) - 2 kappa sum_i det(A_i)."""
    chis = np.asarray(chis, complex)
    s = 0j
    for i, j, w in _ordered(edges):
        s += w * sp.tr(sp.bar(A[i]) @ difference_inverse(chis[i], chis[j]) @ A[j])
    return s - 2 * kappa * sum(sp.det(a) for a in A)


def angular_lagrangian(mu, nu, chis, edges, kappa: float) -> float:
    """Scalar form in (mu, nu, chi); real by construction."""
    mu, nu, chis = (np.asarray(a, complex) for a in (mu, nu, chis))
    s = 0j
    for i, j, w in _ordered(edges):
        s += w * (np.conj(nu[j]) * mu[i] / (chis[j] - chis[i])
                  + nu[j] * np.conj(mu[i]) / (np.conj(chis[j]) - np.conj(chis[i])))
    s -= 2 * kappa * np.sum((abs(mu) ** 2 + abs(nu) ** 2) / (1 + abs(chis) ** 2))
    return s


def angular_equations(mu, nu, chis, edges, kappa: float) -> np.ndarray:
    """Stacked complex residuals of the 3n stationarity conditions."""
    mu, nu, chis = (np.asarray(a, complex) for a in (mu, nu, chis))
    n = len(chis)
    r1, r2, r3 = np.zeros(n, complex), np.zeros(n, complex), np.zeros(n, complex)
    for i, k, w in _ordered(edges):
        d = chis[k] - chis[i]
        r1[k] += w * mu[i] / d
        r2[k] += w * nu[i] / np.conj(d)
        r3[k] -= w * (np.conj(nu[k]) * mu[i] - np.conj(nu[i]) * mu[k]) / d ** 2
    q = 1 + abs(chis) ** 2
    r1 -= 2 * kappa * nu / q
    r2 += 2 * kappa * mu / q
    r3 += 2 * kappa * (abs(mu) ** 2 + abs(nu) ** 2) * np.conj(chis) / q ** 2
    return np.concatenate([r1, r2, r3])


def pack_angular(mu, nu, chis) -> np.ndarray:
    return np.concatenate([np.real(mu), np.imag(mu), np.real(nu), np.imag(nu),
                           np.real(chis), np.imag(chis)])


def unpack_angular(v, n: int) -> tuple:
    v = np.asarray(v, float).reshape(6, n)
    return v[0] + 1j * v[1], v[2] + 1j * v[3], v[4] + 1j * v[5]


def separation_check(grid: SphereGrid, branch: int = 1) -> float:
    """|sum_ij tr(bar(A_i) p_i (p_i - p_j)^-1 A_j) - 2 kappa sum_i |A_i|| at the ansatz."""
    kappa = grid.l / 2 if branch == 1 else -grid.l / 2
    mu, nu = ansatz(grid.chis, branch)
    A = [a_matrix(a, b, c) for a, b, c in zip(mu, nu, grid.chis)]
    lhs = angular_lagrangian_matrix(A, grid.chis, grid.edges, 0.0)
    rhs = 2 * kappa * sum(sp.det(a) for a in A)
    return float(abs(lhs - rhs))


@dataclass(frozen=True)
class AngularResult:
    kappa: float
    residual: float
    imag_part: float


def angular_stationarity(grid: SphereGrid, branch: int = 1, tol: float = 1e-10) -> AngularResult:
    """Check all 3n conditions at the ansatz with kappa = +l/2 (branch 1) or -l/2 (branch 2)."""
    kappa = grid.l / 2 if branch == 1 else -grid.l / 2
    mu, nu = ansatz(grid.chis, branch)
    res = float(np.max(np.abs(angular_equations(mu, nu, grid.chis, grid.edges, kappa))))
    res = max(res, float(np.max(np.abs(stationarity_residuals(grid.chis, grid.edges)))))
    im = abs(angular_lagrangian(mu, nu, grid.chis, grid.edges, kappa).imag)
    if res > tol:
        raise GridInvalidError(f"angular residual {res:.3e} exceeds {tol:g}")
    return AngularResult(kappa, res, im)


def grid_to_json(grid: SphereGrid, indent: Optional[int] = None) -> str:
    nodes = []
    for c in grid.chis:
        th, ph = angles_from_chi(c)
        nodes.append({"theta": th, "phi": ph, "chi": [c.real, c.imag]})
    pos, neg = angular_stationarity(grid, 1), angular_stationarity(grid, 2)
    doc = {
        "m_half": grid.m_half, "h": grid.h, "l": grid.l,
        "z": [float(z) for z in grid.zs], "t": [float(t) for t in grid.ts],
        "nodes": nodes,
        "edges": [[int(i), int(j), int(w)] for i, j, w in grid.edges],
        "kappa": [pos.kappa, neg.kappa],
        "residuals": {"stationarity": grid.residual, "angular": max(pos.residual, neg.residual)},
    }
    return json.dumps(doc, indent=indent)


def grid_from_json(text: str) -> SphereGrid:
    d = json.loads(text)
    chis = np.array([complex(*n["chi"]) for n in d["nodes"]])
    return SphereGrid(d["m_half"], d["h"], np.array(d["z"]), np.array(d["t"]), chis,
                      tuple(tuple(e) for e in d["edges"]), d["l"], d["residuals"]["stationarity"])
