"""Free propagation, the implicit stepper under an external potential, and the
classical Lorentz-force oracle."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import spinor as sp
from ._newton import damped_newton, default_tol
from .errors import ConvergenceError, DomainError, TimeArrowError
from .fields import PotentialField

WEAK_FIELD_RATIO = 0.1


# ------------------------------------------------------------------ field tensor

@dataclass(frozen=True)
class FieldTensor:
    F: np.ndarray

    @property
    def E(self) -> np.ndarray:
        return 0.5 * (self.F + sp.dagger(self.F))

    @property
    def B(self) -> np.ndarray:
        return (self.F - sp.dagger(self.F)) / 2j

    @property
    def E_vec(self) -> np.ndarray:
        return sp._components(self.E)[1:]

    @property
    def B_vec(self) -> np.ndarray:
        return sp._components(self.B)[1:]


def _raw_partials(field: PotentialField, x) -> list:
    if field.dA is not None:
        return [np.asarray(p, dtype=complex) for p in field.dA(x)]
    return sp.numeric_partials(field.A, x, scale=field.scale)


_DBAR = np.array(sp.DBAR_OP)
_D = np.array(sp.D_OP)


def field_tensor_from_partials(partials) -> np.ndarray:
    """F = 1/2 sum_mu (DBAR_mu d_mu A - bar(d_mu A) D_mu)."""
    dA = np.asarray(partials, dtype=complex)
    return 0.5 * (np.einsum("mij,mjk->ik", _DBAR, dA) - np.einsum("mij,mjk->ik", sp.bar(dA), _D))


def field_tensor(field: PotentialField, x) -> FieldTensor:
    """Field tensor of A (without the charge)."""
    return FieldTensor(field_tensor_from_partials(_raw_partials(field, x)))


def lorentz_acceleration(F, u, m: float, e: float = 1.0) -> np.ndarray:
    """a = (e/2m)(u F + F^+ u)."""
    F = np.asarray(F)
    return e / (2 * m) * (u @ F + sp.dagger(F) @ u)


# ------------------------------------------------------------- classical oracle

@dataclass
class ClassicalTrajectory:
    tau: np.ndarray
    x: np.ndarray  # (steps+1, 4)
    u: np.ndarray  # (steps+1, 4)


def classical_lorentz_rk4(field: PotentialField, x0, u0, m: float, dtau: float, steps: int,
                          e: Optional[float] = None) -> ClassicalTrajectory:
    """Fixed-step RK4 for dx/dtau = u, du/dtau = (e/2m)(u F + F^+ u); x0, u0 as (t,x,y,z)."""
    e = field.charge if e is None else e
    x0, u0 = np.asarray(x0, float), np.asarray(u0, float)
    if abs(sp.norm2(sp.encode(u0)) - 1) > 1e-10:
        raise DomainError("initial four-velocity must have |u| = 1")

    def rhs(y):
        F = field_tensor_from_partials(_raw_partials(field, sp.mink_encode(*y[:4])))
        a = lorentz_acceleration(F, sp.mink_encode(*y[4:]), m, e)
        out = np.empty(8)
        out[:4] = y[4:]
        out[4:] = sp._components(a)
        return out

    y = np.concatenate([x0, u0])
    out = np.empty((steps + 1, 8))
    out[0] = y
    for k in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dtau * k1)
        k3 = rhs(y + 0.5 * dtau * k2)
        k4 = rhs(y + dtau * k3)
        y = y + dtau / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = y
    return ClassicalTrajectory(np.arange(steps + 1) * dtau, out[:, :4], out[:, 4:])


# ----------------------------------------------------------------- free particle

@dataclass
class FreeTrajectory:
    nodes: np.ndarray    # (steps+1, 2, 2)
    spinors: np.ndarray  # (steps, 2, 2)
    dx: np.ndarray
    momentum: np.ndarray


def free_step(m: float, P) -> np.ndarray:
    """Jump dx = P P^+ / (m |P|) solving v P = m bar(P^+) with v = dx^-1."""
    P = sp.as_matrix(P)
    d = sp.det(P)
    if abs(d.imag) > 1e-12 * max(1.0, abs(d)) or not d.real > 0:
        raise DomainError("spinor determinant must be real and positive")
    return P @ sp.dagger(P) / (m * d.real)


def free_propagate(m: float, x0, P0, steps: int, v=None) -> FreeTrajectory:
    x0 = sp.as_matrix(x0)
    dx = free_step(m, P0)
    if v is not None:
        v = sp.as_matrix(v)
        if np.abs(v @ P0 - m * sp.bar(sp.dagger(P0))).max() > 1e-10 * max(1.0, np.abs(v).max()):
            raise DomainError("velocity and spinor are inconsistent")
    nodes = x0 + np.arange(steps + 1)[:, None, None] * dx
    spinors = np.repeat(np.asarray(P0, complex)[None], steps, axis=0)
    return FreeTrajectory(nodes, spinors, dx, m * m * dx)


# ------------------------------------------------------------- implicit stepper

def step_matrix(field: PotentialField, xa, xb) -> np.ndarray:
    """W = (x_b - x_a)^-1 + (1/2)(bar(eA(x_b)) + bar(eA(x_a)))."""
    return sp.inv(xb - xa) + 0.5 * (sp.bar(field.eA(xb)) + sp.bar(field.eA(xa)))


def conservation_check(field: PotentialField, x_prev, x_next, m: float) -> float:
    """|det W - m^2| for the step x_prev -> x_next."""
    return float(abs(sp.det(step_matrix(field, x_prev, x_next)) - m * m))


def _unit_sqrt(W, m: float) -> np.ndarray:
    # Hermitian square root of W/m (det W = m^2, W positive)
    Wm = W / m
    return (Wm + sp.I2) / np.sqrt((sp.tr(Wm) + 2).real)


def spinor_from_step(W, sigma: float, m: float) -> np.ndarray:
    """Gauge representative P = sqrt(sigma) H^-1, H = (W/m)^(1/2); then W P = m bar(P^+)."""
    return np.sqrt(sigma) * sp.inv(_unit_sqrt(W, m))


@dataclass
class TrajectoryState:
    x_prev: np.ndarray
    x_curr: np.ndarray
    sigma_prev: float   # |P_prev|
    P_prev: np.ndarray
    k: int = 0


def _check_forward(dx):
    if not (sp.tr(dx).real > 0 and sp.det(dx).real > 0):
        raise TimeArrowError("step is not forward time-like")


def initial_state(field: PotentialField, m: float, x0, x1, sigma: float = 1.0, tol: float = 1e-10) -> TrajectoryState:
    x0, x1 = sp.as_matrix(x0), sp.as_matrix(x1)
    _check_forward(x1 - x0)
    W = step_matrix(field, x0, x1)
    if abs(sp.det(W) - m * m) > tol * m * m:
        raise DomainError(f"first step violates det W = m^2 (off by {abs(sp.det(W) - m * m):.3e})")
    return TrajectoryState(x0, x1, sigma, spinor_from_step(W, sigma, m), 1)


def launch(field: PotentialField, m: float, x0, direction, s_max: float = 100.0) -> TrajectoryState:
    """First node along x0 + s*direction with det W = m^2 (smallest such s > 0)."""
    from scipy.optimize import brentq

    x0 = sp.as_matrix(x0)
    d = sp.as_matrix(direction)
    _check_forward(d)
    f = lambda s: (sp.det(step_matrix(field, x0, x0 + s * d)) - m * m).real
    # f -> +inf as s -> 0+; march until the sign changes
    s_hi = 1.0 / (m * np.sqrt(sp.det(d).real))
    lo = s_hi * 1e-3
    while f(s_hi) > 0:
        s_hi *= 1.5
        if s_hi > s_max:
            raise ConvergenceError("no first node with det W = m^2 found", abs(f(s_hi)))
    s = brentq(f, lo, s_hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    return initial_state(field, m, x0, x0 + s * d)


def classical_launch(field: PotentialField, m: float, x0, u0, dtau: float = 1e-3,
                     horizon: float = 3.0) -> TrajectoryState:
    """Place the first node on the classical trajectory where det W = m^2."""
    from scipy.interpolate import CubicSpline
    from scipy.optimize import brentq

    n = int(np.ceil(horizon / (m * dtau)))
    tr_ = classical_lorentz_rk4(field, x0, u0, m, dtau, n)
    cs = CubicSpline(tr_.tau, tr_.x)
    X0 = sp.encode(x0)
    f = lambda t: (sp.det(step_matrix(field, X0, sp.encode(cs(t)))) - m * m).real
    t1 = brentq(f, 0.2 / m, min(horizon / m, tr_.tau[-1]), xtol=1e-15, rtol=1e-15, maxiter=200)
    return initial_state(field, m, X0, sp.encode(cs(t1)))


def _step_system(field: PotentialField, state: TrajectoryState, m: float):
    xkm1, xk, sig_prev = state.x_prev, state.x_curr, state.sigma_prev
    v_prev = sp.inv(xk - xkm1)
    W_prev_inv = sp.inv(step_matrix(field, xkm1, xk))
    parts = field.partials(xk)
    prev_term = sig_prev * v_prev @ W_prev_inv @ v_prev

    def F(z):
        x_next = xk + sp.encode(z[:4])
        sig = z[4]
        v = sp.inv(x_next - xk)
        W = step_matrix(field, xk, x_next)
        Wi = sp.inv(W)
        # P P^+ = m sigma W^-1; the node equation divided by m
        N = sig * Wi + sig_prev * W_prev_inv
        G = sp.encode([sp.tr(sp.bar(p) @ N).real for p in parts])
        M = sig * v @ Wi @ v - prev_term + 0.25 * G
        return np.concatenate([[(sp.det(W) - m * m).real / m ** 2], sp._components(M)])

    return F


def discrete_step(field: PotentialField, state: TrajectoryState, m: float,
                  tol: Optional[float] = None, warn: bool = True) -> TrajectoryState:
    """Solve the spinor field equation and the node equation for (x_next, P_curr).

    The field equation W_k P_k = m bar(P_k^+) holds iff det W_k = m^2, with
    P_k = sqrt(sigma_k) (W_k/m)^(-1/2) up to the right-quaternion gauge; what is
    left are five real unknowns (the four components of x_next and sigma_k).
    """
    tol = default_tol() if tol is None else tol
    F = _step_system(field, state, m)
    dx_prev = state.x_curr - state.x_prev
    z0 = np.concatenate([sp._components(dx_prev), [state.sigma_prev]])
    z, res, _ = damped_newton(F, z0, tol=tol, max_iter=50,
                              admissible=lambda z: z[4] > 0 and z[0] > 0)
    x_next = state.x_curr + sp.encode(z[:4])
    dx = x_next - state.x_curr
    _check_forward(dx)
    W = step_matrix(field, state.x_curr, x_next)
    if warn:
        v = sp.inv(dx)
        ratio = np.abs(field.eA(state.x_curr)).max() / np.abs(v).max()
        if ratio > WEAK_FIELD_RATIO:
            warnings.warn(f"field is not weak: |eA|/|v| = {ratio:.3g}", RuntimeWarning, stacklevel=2)
    P = spinor_from_step(W, z[4], m)
    return TrajectoryState(state.x_curr, x_next, float(z[4]), P, state.k + 1)


@dataclass
class DiscreteTrajectory:
    nodes: np.ndarray     # (N, 2, 2)
    sigmas: np.ndarray    # (N-1,) |P_k|
    spinors: np.ndarray   # (N-1, 2, 2)
    conservation: np.ndarray  # (N-1,)

    @property
    def coords(self) -> np.ndarray:
        return np.array([sp._components(x) for x in self.nodes])


def discrete_trajectory(field: PotentialField, m: float, state: TrajectoryState, steps: int,
                        tol: Optional[float] = None) -> DiscreteTrajectory:
    """March ``steps`` nodes (including the two initial ones)."""
    nodes = [state.x_prev, state.x_curr]
    sig = [state.sigma_prev]
    Ps = [state.P_prev]
    cons = [conservation_check(field, state.x_prev, state.x_curr, m)]
    for _ in range(steps - 2):
        state = discrete_step(field, state, m, tol)
        nodes.append(state.x_curr)
        sig.append(state.sigma_prev)
        Ps.append(state.P_prev)
        cons.append(conservation_check(field, state.x_prev, state.x_curr, m))
    return DiscreteTrajectory(np.array(nodes), np.array(sig), np.array(Ps), np.array(cons))


def lagrangian_dynamic(field: PotentialField, nodes, spinors, m: float, complex_value: bool = False):
    """sum tr((v_k + (e/2)(bar A_{k+1} + bar A_k)) P_k P_k^+) - 2m Re det P_k."""
    L = 0j
    for k, P in enumerate(spinors):
        W = step_matrix(field, nodes[k], nodes[k + 1])
        L += sp.tr(W @ P @ sp.dagger(P)) - 2 * m * sp.det(P).real
    return L if complex_value else float(L.real)


def coordinate_time_discrepancy(traj: DiscreteTrajectory, ref: ClassicalTrajectory):
    """Max spatial deviation from the classical path at equal coordinate time,
    and that deviation relative to the distance travelled."""
    from scipy.interpolate import CubicSpline

    X = traj.coords
    t_ref = ref.x[:, 0]
    if X[-1, 0] > t_ref[-1]:
        raise DomainError("classical reference is too short")
    interp = CubicSpline(t_ref, ref.x[:, 1:])(X[:, 0])
    err = float(np.abs(X[:, 1:] - interp).max())
    travel = float(np.abs(X[:, 1:] - X[0, 1:]).max())
    return err, err / travel


# ------------------------------------------------------------- asymmetry lambda

def lambda_asymmetry(v_k, v_km1):
    """(exact, approx) asymmetry: exact from B = bar(v_k) bar(v_{k-1})^-1,
    approx = (|v_{k-1}| - |v_k|)/(4 |v_k|)."""
    v_k, v_km1 = sp.as_matrix(v_k), sp.as_matrix(v_km1)
    B = sp.bar(v_k) @ sp.inv(sp.bar(v_km1))
    tB, tBi = sp.tr(B).real, sp.tr(sp.inv(B)).real
    exact = (tBi - tB) / (4 + tBi + tB)
    dk, dkm1 = sp.det(v_k).real, sp.det(v_km1).real
    return float(exact), float((dkm1 - dk) / (4 * dk))


def lorentz_reduction_residual(field: PotentialField, x_km1, x_k, x_kp1, m: float) -> float:
    """max |a - (e/2m)(u F + F^+ u) + 2 lambda m u| at the middle node, with
    a = bar(v_k) - bar(v_{k-1}), u = q/sqrt|q|, q = x_{k+1} - x_{k-1}."""
    v_k, v_km1 = sp.inv(x_kp1 - x_k), sp.inv(x_k - x_km1)
    a = sp.bar(v_k) - sp.bar(v_km1)
    q = x_kp1 - x_km1
    u = q / np.sqrt(sp.det(q).real)
    lam, _ = lambda_asymmetry(v_k, v_km1)
    F = field_tensor(field, x_k).F
    r = a - lorentz_acceleration(F, u, m, field.charge) + 2 * lam * m * u
    return float(np.abs(r).max())


@dataclass
class LorentzExperiment:
    trajectory: DiscreteTrajectory
    reference: ClassicalTrajectory
    error: float
    rel_error: float
    max_field_ratio: float       # max e|A|/m along the discrete path
    max_conservation: float


def lorentz_experiment(field: PotentialField, m: float = 1.0, steps: int = 50, beta: float = 0.5,
                       x0=(0.0, 0.0, 0.0, 0.0), axis: int = 1, dtau_ref: float = 1e-2,
                       tol: Optional[float] = None) -> LorentzExperiment:
    """Discrete stepper vs RK4 for a particle launched with speed ``beta`` along ``axis``."""
    g = 1 / np.sqrt(1 - beta ** 2)
    u0 = np.zeros(4)
    u0[0], u0[axis] = g, g * beta
    x0 = np.asarray(x0, float)
    state = classical_launch(field, m, x0, u0)
    traj = discrete_trajectory(field, m, state, steps, tol)
    t_end = traj.coords[-1, 0] - x0[0]
    n_ref = int(np.ceil(1.2 * t_end / (g * dtau_ref))) + 10
    ref = classical_lorentz_rk4(field, x0, u0, m, dtau_ref, n_ref)
    err, rel = coordinate_time_discrepancy(traj, ref)
    ratio = max(np.abs(field.eA(x)).max() for x in traj.nodes) / m
    return LorentzExperiment(traj, ref, err, rel, float(ratio), float(np.max(traj.conservation)))
