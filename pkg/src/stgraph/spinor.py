"""2x2 complex spinor-matrix algebra.

Every object (spinor, Lorentz transformation, Minkowski vector, field tensor,
quaternion) is a plain ``(2, 2)`` complex numpy array.  Minkowski vectors are
the Hermitian ones: ``t*I + x*s1 + y*s2 + z*s3``.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import NotHermitianError, NotQuaternionError, NotUnimodularError, SingularMatrixError

HERMITIAN_TOL = 1e-10
UNIMODULAR_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
# basis of the Minkowski encoding, index 0 is time
BASIS = (I2, SIGMA1, SIGMA2, SIGMA3)

# gauge quaternion used by all stationary sums
S_GAUGE = np.array([[1j, 0], [0, -1j]])

# differential operator components: d = sum_mu D[mu] d_mu, bar(d) = sum_mu DBAR[mu] d_mu
D_OP = (I2, -SIGMA1, -SIGMA2, -SIGMA3)
DBAR_OP = BASIS


def as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {M.shape}")
    return M


def bar(M) -> np.ndarray:
    """Adjunct (d, -b; -c, a); a space inversion on Minkowski matrices."""
    M = np.asarray(M)
    out = np.empty_like(M, dtype=complex)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 1, 1] = M[..., 0, 0]
    out[..., 0, 1] = -M[..., 0, 1]
    out[..., 1, 0] = -M[..., 1, 0]
    return out


adjunct = bar


def dagger(M) -> np.ndarray:
    return np.conj(np.swapaxes(np.asarray(M), -1, -2))


def tr(M):
    M = np.asarray(M)
    return M[..., 0, 0] + M[..., 1, 1]


def det(M):
    M = np.asarray(M)
    return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]


def inv(M, tol: float = 0.0) -> np.ndarray:
    """Inverse via bar(M)/det(M)."""
    d = det(M)
    if np.any(np.abs(d) <= tol):
        raise SingularMatrixError("singular 2x2 matrix")
    return bar(M) / np.asarray(d)[..., None, None]


def mink_encode(t, x, y, z) -> np.ndarray:
    return np.array([[t + z, x - 1j * y], [x + 1j * y, t - z]], dtype=complex)


def encode(v: Sequence[float]) -> np.ndarray:
    return mink_encode(*v)


def is_hermitian(M, tol: float = HERMITIAN_TOL) -> bool:
    M = np.asarray(M)
    return bool(np.max(np.abs(M - dagger(M))) <= tol)


def mink_decode(M, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return (t, x, y, z) of a Hermitian matrix."""
    M = as_matrix(M)
    if not is_hermitian(M, tol):
        raise NotHermitianError(f"not Hermitian: |M - M^+| = {np.max(np.abs(M - dagger(M))):.3e}")
    return _components(M)


def _components(M) -> np.ndarray:
    # tr(M sigma_mu)/2, real part only
    return np.array([
        0.5 * (M[0, 0] + M[1, 1]).real,
        0.5 * (M[0, 1] + M[1, 0]).real,
        0.5 * (M[1, 0] - M[0, 1]).imag,
        0.5 * (M[0, 0] - M[1, 1]).real,
    ])


def scalar_product(A, B) -> float:
    """tr(A bar(B)) = 2 (tt' - xx' - yy' - zz')."""
    return float(tr(as_matrix(A) @ bar(B)).real)


def norm2(M) -> float:
    """Minkowski square |M| = det M of a Hermitian matrix."""
    return float(det(M).real)


def check_unimodular(T, tol: float = UNIMODULAR_TOL) -> np.ndarray:
    T = as_matrix(T)
    if abs(det(T) - 1) > tol:
        raise NotUnimodularError(f"det T = {det(T)} != 1")
    return T


def lorentz_apply_vector(T, M) -> np.ndarray:
    T = check_unimodular(T)
    return T @ as_matrix(M) @ dagger(T)


def lorentz_apply_spinor(T, P) -> np.ndarray:
    return check_unimodular(T) @ as_matrix(P)


def boost(rapidity: float, axis: Sequence[float] = (0, 0, 1)) -> np.ndarray:
    n = np.asarray(axis, float)
    n = n / np.linalg.norm(n)
    K = n[0] * SIGMA1 + n[1] * SIGMA2 + n[2] * SIGMA3
    return np.cosh(rapidity / 2) * I2 + np.sinh(rapidity / 2) * K


def rotation(angle: float, axis: Sequence[float] = (0, 0, 1)) -> np.ndarray:
    n = np.asarray(axis, float)
    n = n / np.linalg.norm(n)
    K = n[0] * SIGMA1 + n[1] * SIGMA2 + n[2] * SIGMA3
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * K


def random_lorentz(rng: np.random.Generator, max_rapidity: float = 1.0) -> np.ndarray:
    """Random unimodular matrix: rotation times boost."""
    ax1, ax2 = rng.normal(size=3), rng.normal(size=3)
    R = rotation(rng.uniform(0, 4 * np.pi), ax1)
    B = boost(rng.uniform(-max_rapidity, max_rapidity), ax2)
    return R @ B


def random_unit_quaternion(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return quaternion(*q)


def quaternion(s, x, y, z) -> np.ndarray:
    """s + i(x s1 + y s2 + z s3); satisfies dagger(Q) = bar(Q), det Q = s^2+x^2+y^2+z^2."""
    return s * I2 + 1j * (x * SIGMA1 + y * SIGMA2 + z * SIGMA3)


def is_quaternion(Q, tol: float = 1e-12) -> bool:
    Q = np.asarray(Q)
    return bool(np.max(np.abs(dagger(Q) - bar(Q))) <= tol)


def quat_exp(U, lam: float) -> np.ndarray:
    """cos(lam) + U sin(lam) for a pure unit quaternion U (U^2 = -1)."""
    U = as_matrix(U)
    if not (is_quaternion(U, 1e-10) and np.max(np.abs(bar(U) + U)) <= 1e-10 and abs(det(U) - 1) <= 1e-10):
        raise NotQuaternionError("U must be a pure unit quaternion")
    return np.cos(lam) * I2 + np.sin(lam) * U


def perturbed_inverse(X, delta) -> np.ndarray:
    """First-order inverse (I - X^-1 delta) X^-1 of X + delta."""
    Xi = inv(as_matrix(X))
    return (I2 - Xi @ as_matrix(delta)) @ Xi


def bar_partial(partials: Sequence) -> np.ndarray:
    """bar(d) applied to a field, from its four partial derivatives (d_t, d_x, d_y, d_z).

    Scalars give a Minkowski matrix; matrix partials give sum_mu DBAR[mu] @ partial_mu.
    """
    return sum(DBAR_OP[mu] @ _as_op(partials[mu]) for mu in range(4))


def partial(partials: Sequence) -> np.ndarray:
    return sum(D_OP[mu] @ _as_op(partials[mu]) for mu in range(4))


def _as_op(p):
    p = np.asarray(p, dtype=complex)
    return p * I2 if p.ndim == 0 else p


def total_differential(dx, partials: Sequence):
    """(1/2) tr(dx bar(d)) U = sum_mu dx^mu d_mu U."""
    dx = as_matrix(dx)
    comps = [0.5 * tr(dx @ DBAR_OP[mu]) for mu in range(4)]
    return sum(c * np.asarray(p) for c, p in zip(comps, partials))


def numeric_partials(field: Callable, x, scale: float = 1.0, rel_step: float = 1e-6) -> list:
    """Central-difference partials of a matrix field with respect to (t, x, y, z)."""
    x = as_matrix(x)
    h = rel_step * scale
    out = []
    for mu in range(4):
        e = BASIS[mu] * h
        out.append((np.asarray(field(x + e)) - np.asarray(field(x - e))) / (2 * h))
    return out
