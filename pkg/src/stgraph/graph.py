"""Space-time graphs and their Lagrangian / Hamiltonian sums."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import spinor as sp
from .errors import DomainError, SingularMatrixError, TimeArrowError
from .fields import PotentialField

EDGE_TOL = 1e-14


def _edge_inverse(d: np.ndarray) -> np.ndarray:
    dd = sp.det(d)
    if abs(dd) <= EDGE_TOL * max(1.0, np.abs(d).max() ** 2):
        raise SingularMatrixError("singular (light-like or degenerate) edge")
    return sp.bar(d) / dd


# ---------------------------------------------------------------- regular graphs

@dataclass
class RegularGraph:
    """n_space chains of time-ordered nodes.

    nodes[i, k] is the Minkowski matrix of node (i, k); spinors[i, k] sits on the
    time-like edge (i, k) -> (i, k+1); space_edges are (i, j) pairs present in
    every time slice.
    """
    nodes: np.ndarray
    spinors: np.ndarray
    space_edges: list = field(default_factory=list)
    potential: Optional[PotentialField] = None
    check: bool = True

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=complex)
        self.spinors = np.asarray(self.spinors, dtype=complex)
        ns, nt = self.nodes.shape[:2]
        if self.nodes.shape[2:] != (2, 2) or self.spinors.shape != (ns, nt - 1, 2, 2):
            raise DomainError("spinor array must have shape (n_space, n_time - 1, 2, 2)")
        self.space_edges = [tuple(int(a) for a in e) for e in self.space_edges]
        for i, j in self.space_edges:
            if not (0 <= i < ns and 0 <= j < ns) or i == j:
                raise DomainError(f"bad space edge {(i, j)}")
        if self.check:
            self.validate()

    @property
    def n_space(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_time(self) -> int:
        return self.nodes.shape[1]

    def validate(self):
        for i in range(self.n_space):
            for k in range(self.n_time - 1):
                d = self.nodes[i, k + 1] - self.nodes[i, k]
                if not sp.is_hermitian(d):
                    raise DomainError("nodes must be Hermitian")
                if sp.det(d).real <= 0 or sp.tr(d).real <= 0:
                    raise TimeArrowError(f"edge ({i},{k}) is not forward time-like")
        for k in range(self.n_time):
            for i, j in self.space_edges:
                if sp.det(self.nodes[i, k] - self.nodes[j, k]).real >= 0:
                    raise DomainError(f"space edge {(i, j)} at slice {k} is not space-like")


def _potential_term(pot: Optional[PotentialField], xa, xb, PP) -> complex:
    if pot is None:
        return 0.0
    Abar = 0.5 * (sp.bar(pot.eA(xa)) + sp.bar(pot.eA(xb)))
    return sp.tr(Abar @ PP)


def lagrangian_regular(g: RegularGraph, m: float, complex_value: bool = False):
    """Time-edge, space-edge and averaged-potential terms minus the mass term."""
    L = 0j
    X, P = g.nodes, g.spinors
    for i in range(g.n_space):
        for k in range(g.n_time - 1):
            PP = P[i, k] @ sp.dagger(P[i, k])
            L += sp.tr(_edge_inverse(X[i, k + 1] - X[i, k]) @ PP)
            L += _potential_term(g.potential, X[i, k + 1], X[i, k], PP)
            L -= 2 * m * sp.det(P[i, k]).real
    # space edges of slice k couple the incoming spinor at i with the outgoing one at j
    for k in range(1, g.n_time - 1):
        for a, b in g.space_edges:
            for i, j in ((a, b), (b, a)):
                u = _edge_inverse(X[i, k] - X[j, k])
                Pi, Pj = P[i, k - 1], P[j, k]
                L += sp.tr(u @ (0.5 * (Pi @ sp.dagger(Pj) + Pj @ sp.dagger(Pi))))
    return L if complex_value else float(L.real)


def free_chain(nodes: Sequence, spinors: Sequence) -> RegularGraph:
    X = np.asarray(nodes, dtype=complex)[None]
    P = np.asarray(spinors, dtype=complex)[None]
    return RegularGraph(X, P)


def lagrangian_free(chain: RegularGraph, m: float, complex_value: bool = False):
    """Single free chain: sum tr((x_{k+1}-x_k)^-1 P_k P_k^+) - 2m Re det P_k."""
    if chain.n_space != 1 or chain.potential is not None:
        raise DomainError("free Lagrangian needs one chain without potential")
    return lagrangian_regular(chain, m, complex_value)


def free_field_residual(chain: RegularGraph, m: float) -> np.ndarray:
    """Per-edge v_k P_k - m bar(P_k^+) with v_k = (x_{k+1} - x_k)^-1."""
    X, P = chain.nodes[0], chain.spinors[0]
    return np.array([_edge_inverse(X[k + 1] - X[k]) @ P[k] - m * sp.bar(sp.dagger(P[k]))
                     for k in range(len(P))])


def lorentz_transform_regular(g: RegularGraph, T) -> RegularGraph:
    T = sp.check_unimodular(T)
    X = T @ g.nodes @ sp.dagger(T)
    P = T @ g.spinors
    pot = g.potential.transformed(T) if g.potential is not None else None
    return RegularGraph(X, P, list(g.space_edges), pot, g.check)


def gauge_transform_regular(g: RegularGraph, S) -> RegularGraph:
    return replace(g, spinors=g.spinors @ np.asarray(S, dtype=complex))


# ------------------------------------------------------------- stationary graphs

@dataclass
class StationaryGraph:
    """Time-periodic graph: one spinor per spatial node, spinor step P -> P S.

    ``time_edge`` is the Minkowski step between consecutive copies of a node
    (I/epsilon in the rest frame); set it explicitly only for boosted frames.
    """
    nodes: np.ndarray
    spinors: np.ndarray
    edges: list
    epsilon: float
    m: float = 1.0
    potential: Optional[PotentialField] = None
    S: np.ndarray = field(default_factory=lambda: sp.S_GAUGE.copy())
    time_edge: Optional[np.ndarray] = None
    check: bool = True

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=complex)
        self.spinors = np.asarray(self.spinors, dtype=complex)
        self.S = np.asarray(self.S, dtype=complex)
        n = len(self.nodes)
        if self.nodes.shape != (n, 2, 2) or self.spinors.shape != (n, 2, 2):
            raise DomainError("nodes and spinors must be (n, 2, 2) arrays")
        self.edges = [(int(e[0]), int(e[1]), int(e[2]) if len(e) > 2 else 1) for e in self.edges]
        for i, j, mult in self.edges:
            if not (0 <= i < n and 0 <= j < n) or i == j or mult < 1:
                raise DomainError(f"bad edge {(i, j, mult)}")
        if self.check:
            self.validate()

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def delta(self) -> np.ndarray:
        return self.time_edge if self.time_edge is not None else sp.I2 / self.epsilon

    def validate(self):
        S = self.S
        if (np.abs(S @ sp.dagger(S) - sp.I2).max() > 1e-12 or abs(sp.det(S) - 1) > 1e-12
                or np.abs(sp.dagger(S) + S).max() > 1e-12):
            raise DomainError("S must be a pure unit quaternion")
        if self.time_edge is None:
            if not self.epsilon > 0:
                raise DomainError("epsilon must be positive")
            for x in self.nodes:
                if not sp.is_hermitian(x) or abs(sp.tr(x)) > 1e-10 * max(1.0, np.abs(x).max()):
                    raise DomainError("stationary nodes must be traceless Hermitian")
        for i, j, _ in self.edges:
            u = self.u(i, j)
            if np.abs(u + self.u(j, i)).max() > 1e-12 * max(1.0, np.abs(u).max()):
                raise DomainError("u_ij must be antisymmetric")

    def u(self, i: int, j: int) -> np.ndarray:
        return _edge_inverse(self.nodes[i] - self.nodes[j])

    def neighbours(self, i: int):
        """(j, multiplicity) pairs of node i."""
        for a, b, mult in self.edges:
            if a == i:
                yield b, mult
            elif b == i:
                yield a, mult

    def eAbar(self, i: int) -> np.ndarray:
        if self.potential is None:
            return np.zeros((2, 2), complex)
        return sp.bar(self.potential.eA(self.nodes[i]))


def lagrangian_stationary(sg: StationaryGraph, complex_value: bool = False):
    """sum tr((Delta^-1 + e bar A_i) P_i P_i^+)
       + 1/2 sum_(ij) tr(u_ij (P_i S^+ P_j^+ + P_j S P_i^+)) - 2m sum Re det P_i.

    In the rest frame Delta^-1 = epsilon and, as S^+ = -S, the edge term is
    sum over ordered pairs of tr(u_ij P_j S P_i^+).
    """
    P, S = sg.spinors, sg.S
    Dinv = sp.inv(sg.delta)
    L = 0j
    for i in range(sg.n):
        L += sp.tr((Dinv + sg.eAbar(i)) @ P[i] @ sp.dagger(P[i]))
        L -= 2 * sg.m * sp.det(P[i]).real
    Sd = sp.dagger(S)
    for a, b, mult in sg.edges:
        for i, j in ((a, b), (b, a)):
            u = sg.u(i, j)
            L += mult * 0.5 * sp.tr(u @ (P[i] @ Sd @ sp.dagger(P[j]) + P[j] @ S @ sp.dagger(P[i])))
    return L if complex_value else float(L.real)


def split_spinor(P):
    """(P+, P-) with P+ = P + bar(P^+), P- = (P - bar(P^+)) S; P = (P+ - P- S)/2."""
    P = np.asarray(P, dtype=complex)
    Pb = sp.bar(sp.dagger(P))
    return P + Pb, (P - Pb) @ sp.S_GAUGE


def join_spinor(Pp, Pm):
    return 0.5 * (np.asarray(Pp) - np.asarray(Pm) @ sp.S_GAUGE)


def lagrangian_stationary_split(sg: StationaryGraph, complex_value: bool = False):
    """The same sum written in the decoupled (P+, P-) variables, for scalar potentials.

    Evaluates sum (eps_i - m)|P+_i| - (eps_i + m)|P-_i| + sum_(ij) tr(bar(P-_i) u_ij P+_j),
    eps_i = epsilon + e A_i; this equals twice the direct sum.
    """
    if sg.time_edge is not None:
        raise DomainError("split form needs the rest frame")
    L = 0j
    parts = [split_spinor(P) for P in sg.spinors]
    for i, (Pp, Pm) in enumerate(parts):
        A = sg.eAbar(i)
        if np.abs(A - A[0, 0] * sp.I2).max() > 1e-14 * max(1.0, np.abs(A).max()):
            raise DomainError("split form needs a scalar potential")
        e_i = sg.epsilon + A[0, 0].real
        L += (e_i - sg.m) * sp.det(Pp) - (e_i + sg.m) * sp.det(Pm)
    for a, b, mult in sg.edges:
        for i, j in ((a, b), (b, a)):
            L += mult * sp.tr(sp.bar(parts[i][1]) @ sg.u(i, j) @ parts[j][0])
    return L if complex_value else float(L.real)


def stationary_field_residual(sg: StationaryGraph) -> np.ndarray:
    """Per node (Delta^-1 + e bar A_i) P_i + sum_j u_ij P_j S - m bar(P_i^+).

    Zero at solutions; the gradient of the Lagrangian with respect to
    (Re P_i, Im P_i) equals 2 (Re R_i, Im R_i).
    """
    P, S = sg.spinors, sg.S
    Dinv = sp.inv(sg.delta)
    R = np.array([(Dinv + sg.eAbar(i)) @ P[i] - sg.m * sp.bar(sp.dagger(P[i])) for i in range(sg.n)])
    for a, b, mult in sg.edges:
        for i, j in ((a, b), (b, a)):
            R[i] += mult * sg.u(i, j) @ P[j] @ S
    return R


def stationary_node_residual(sg: StationaryGraph) -> np.ndarray:
    """Per node  1/2 bar(d)[tr(e bar A(x) P_i P_i^+)] + sum_j u_ji (H_ij + H_ij^+) u_ji,
    H_ij = P_i S P_j^+, so that the node variation of the sum is tr(dx_i R_i).
    """
    P, S = sg.spinors, sg.S
    R = np.zeros((sg.n, 2, 2), complex)
    if sg.potential is not None:
        for i in range(sg.n):
            PP = P[i] @ sp.dagger(P[i])
            grads = [sp.tr(sp.bar(d) @ PP) for d in sg.potential.partials(sg.nodes[i])]
            R[i] += 0.5 * sp.bar_partial(grads)
    for a, b, mult in sg.edges:
        for i, j in ((a, b), (b, a)):
            u = sg.u(j, i)
            H = P[i] @ S @ sp.dagger(P[j])
            R[i] += mult * u @ (H + sp.dagger(H)) @ u
    return R


def lorentz_transform_stationary(sg: StationaryGraph, T) -> StationaryGraph:
    T = sp.check_unimodular(T)
    Td = sp.dagger(T)
    pot = sg.potential.transformed(T) if sg.potential is not None else None
    return StationaryGraph(T @ sg.nodes @ Td, T @ sg.spinors, list(sg.edges), sg.epsilon, sg.m, pot,
                           sg.S, T @ sg.delta @ Td, check=False)


def gauge_transform_stationary(sg: StationaryGraph, G) -> StationaryGraph:
    """P_i -> P_i G and S -> G^+ S G (leaves the sum unchanged for any unit quaternion G)."""
    G = np.asarray(G, dtype=complex)
    return replace(sg, spinors=sg.spinors @ G, S=sp.dagger(G) @ sg.S @ G)


# ------------------------------------------------------------ Hamiltonian sums

def _edge_map(edges):
    nb = {}
    for e in edges:
        i, j = int(e[0]), int(e[1])
        mult = int(e[2]) if len(e) > 2 else 1
        nb.setdefault(i, []).append((j, mult))
        nb.setdefault(j, []).append((i, mult))
    return nb


def _uu_scalar(nodes, i, j, k) -> float:
    u1 = _edge_inverse(nodes[i] - nodes[j])
    u2 = _edge_inverse(nodes[j] - nodes[k])
    return 0.5 * sp.tr(u1 @ u2).real


def laplacian_weights(nodes, edges) -> np.ndarray:
    """W[i, k] = sum over edge pairs (i,j),(j,k) of mult_ij mult_jk (1/2)tr(u_ij u_jk)."""
    nodes = np.asarray(nodes, dtype=complex)
    n = len(nodes)
    nb = _edge_map(edges)
    W = np.zeros((n, n))
    for i in range(n):
        for j, mij in nb.get(i, []):
            for k, mjk in nb.get(j, []):
                W[i, k] += mij * mjk * _uu_scalar(nodes, i, j, k)
    return W


def hamiltonian_sum(nodes, psis, E: float, potential: Callable, edges, m: float = 1.0) -> float:
    """sum (E + V_i) psi_i^2 + 1/(2m) sum_ijk u_ij u_jk psi_k psi_i (scalar part)."""
    psis = np.asarray(psis, float)
    V = np.array([potential(x) for x in np.asarray(nodes, dtype=complex)], float)
    W = laplacian_weights(nodes, edges)
    return float(np.sum((E + V) * psis ** 2) + psis @ W @ psis / (2 * m))


def schroedinger_residual(nodes, psis, E: float, potential: Callable, edges, m: float = 1.0) -> np.ndarray:
    """(E + V_i) psi_i + 1/(2m) sum_jk (1/2)(u_ij u_jk + u_kj u_ji) psi_k; half the psi-gradient of H."""
    psis = np.asarray(psis, float)
    V = np.array([potential(x) for x in np.asarray(nodes, dtype=complex)], float)
    W = laplacian_weights(nodes, edges)
    return (E + V) * psis + 0.5 * (W + W.T) @ psis / (2 * m)


# ----------------------------------------------------------------- utilities

def numeric_gradient(fn: Callable, params, rel_step: float = 1e-6) -> np.ndarray:
    """Central differences with step rel_step * max(1, |p|)."""
    p = np.asarray(params, float)
    g = np.empty_like(p)
    for k in range(len(p)):
        h = rel_step * max(1.0, abs(p[k]))
        a, b = p.copy(), p.copy()
        a[k] += h
        b[k] -= h
        g[k] = (fn(a) - fn(b)) / (2 * h)
    return g


def spinors_to_reals(P) -> np.ndarray:
    P = np.asarray(P, dtype=complex)
    return np.stack([P.real, P.imag], axis=-1).reshape(-1)


def reals_to_spinors(v, n: int) -> np.ndarray:
    v = np.asarray(v, float).reshape(n, 2, 2, 2)
    return v[..., 0] + 1j * v[..., 1]


def _node_reals(X) -> list:
    return [list(map(float, sp._components(x))) for x in X]


def graph_to_json(sg: StationaryGraph) -> str:
    d = {
        "kind": "stationary",
        "epsilon": sg.epsilon,
        "m": sg.m,
        "nodes": _node_reals(sg.nodes),
        "spinors": [list(map(float, spinors_to_reals(P))) for P in sg.spinors],
        "edges": [[i, j, mult] for i, j, mult in sg.edges],
        "S": list(map(float, spinors_to_reals(sg.S))),
    }
    if sg.potential is not None and sg.potential.spec is not None:
        d["potential"] = sg.potential.spec
    return json.dumps(d)


def regular_graph_to_json(g: RegularGraph) -> str:
    d = {
        "kind": "regular",
        "nodes": [_node_reals(row) for row in g.nodes],
        "spinors": [[list(map(float, spinors_to_reals(P))) for P in row] for row in g.spinors],
        "space_edges": [list(e) for e in g.space_edges],
    }
    if g.potential is not None and g.potential.spec is not None:
        d["potential"] = g.potential.spec
    return json.dumps(d)


def graph_from_json(text: str):
    from .fields import field_from_spec

    d = json.loads(text)
    pot = field_from_spec(d["potential"]) if "potential" in d else None
    if d.get("kind") == "regular":
        X = np.array([[sp.encode(v) for v in row] for row in d["nodes"]])
        P = np.array([[reals_to_spinors(v, 1)[0] for v in row] for row in d["spinors"]])
        return RegularGraph(X, P, [tuple(e) for e in d["space_edges"]], pot)
    X = np.array([sp.encode(v) for v in d["nodes"]])
    P = reals_to_spinors(np.array(d["spinors"]), len(X))
    S = reals_to_spinors(d["S"], 1)[0] if "S" in d else sp.S_GAUGE
    return StationaryGraph(X, P, [tuple(e) for e in d["edges"]], d["epsilon"], d.get("m", 1.0), pot, S)
