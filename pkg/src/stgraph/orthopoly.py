"""Orthogonal polynomials through their zeros.

A family is fixed by the differential equation u y'' + v y' + lam y = 0 with
u quadratic and v linear.  The zeros x_k of the degree-n solution satisfy

    2 * sum_{i != k} 1/(x_k - x_i) + v(x_k)/u(x_k) = 0,

which is what ``solve_zeros`` solves.  Weights, partial polynomials and an exact
quadrature follow from the zeros alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._newton import damped_newton, default_tol
from .errors import ConvergenceError, DomainError

FAMILIES = ("hermite", "laguerre", "legendre-like", "custom")


@dataclass(frozen=True)
class OdeSpec:
    u0: float
    u1: float
    u2: float
    v0: float
    v1: float
    interval: tuple = (-np.inf, np.inf)
    family: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        a, b = self.interval
        if not a < b:
            raise DomainError("empty interval")
        roots = np.roots([self.u2, self.u1, self.u0]) if (self.u2 or self.u1) else np.array([])
        for r in roots:
            if abs(r.imag) < 1e-14 and a < r.real < b:
                raise DomainError(f"u vanishes inside the interval at {r.real}")
        if not (self.u2 or self.u1 or self.u0):
            raise DomainError("u is identically zero")

    @classmethod
    def hermite(cls) -> "OdeSpec":
        return cls(1.0, 0.0, 0.0, 0.0, -2.0, (-np.inf, np.inf), "hermite")

    @classmethod
    def laguerre(cls, gamma: float = 0.5, lam: float = 0.5) -> "OdeSpec":
        """u = r, v = 2 gamma - 2 lam r; weight r^(2 gamma - 1) exp(-2 lam r)."""
        if gamma <= 0 or lam <= 0:
            raise DomainError("laguerre family needs gamma > 0 and lam > 0")
        return cls(0.0, 1.0, 0.0, 2.0 * gamma, -2.0 * lam, (0.0, np.inf), "laguerre",
                   {"gamma": gamma, "lam": lam})

    @classmethod
    def legendre_like(cls, m: int = 1) -> "OdeSpec":
        """u = 1 - x^2, v = -2 m x; weight (1 - x^2)^(m-1).  m = 1 is Legendre."""
        if m < 1:
            raise DomainError("m must be >= 1")
        return cls(1.0, 0.0, -1.0, 0.0, -2.0 * m, (-1.0, 1.0), "legendre-like", {"m": m})

    def u(self, x):
        return self.u0 + self.u1 * x + self.u2 * x * x

    def du(self, x):
        return self.u1 + 2 * self.u2 * x

    def v(self, x):
        return self.v0 + self.v1 * x

    def eigenvalue(self, n: int) -> float:
        return -n * (n - 1) * self.u2 - n * self.v1

    def weight(self, x):
        """w with (w u)' = w v (unnormalized)."""
        x = np.asarray(x, float)
        if self.family == "hermite":
            return np.exp(-x * x)
        if self.family == "laguerre":
            g, lam = self.params["gamma"], self.params["lam"]
            return x ** (2 * g - 1) * np.exp(-2 * lam * x)
        if self.family == "legendre-like":
            return (1 - x * x) ** (self.params["m"] - 1)
        return np.vectorize(self._custom_weight)(x)

    def _custom_weight(self, x: float) -> float:
        from scipy.integrate import quad

        a, b = self.interval
        ref = 0.5 * (a + b) if np.isfinite(a) and np.isfinite(b) else (
            a + 1.0 if np.isfinite(a) else (b - 1.0 if np.isfinite(b) else 0.0))
        integral, _ = quad(lambda s: self.v(s) / self.u(s), ref, x)
        return math.exp(integral) / self.u(x)


@dataclass(frozen=True)
class ZeroSet:
    xs: np.ndarray
    family: str
    spec: Optional[OdeSpec] = None
    residual: float = 0.0

    @property
    def n(self) -> int:
        return len(self.xs)


@dataclass(frozen=True)
class WeightSet:
    rhos: np.ndarray
    k_const: float


def _xs(zs) -> np.ndarray:
    return np.asarray(zs.xs if isinstance(zs, ZeroSet) else zs, float)


def zero_residuals(spec: OdeSpec, xs) -> np.ndarray:
    xs = np.asarray(xs, float)
    d = xs[:, None] - xs[None, :]
    np.fill_diagonal(d, np.inf)
    return 2 * (1 / d).sum(axis=1) + spec.v(xs) / spec.u(xs)


def _zero_jacobian(spec: OdeSpec, xs) -> np.ndarray:
    d = xs[:, None] - xs[None, :]
    np.fill_diagonal(d, np.inf)
    J = 2 / d ** 2
    u, v = spec.u(xs), spec.v(xs)
    diag = -2 * (1 / d ** 2).sum(axis=1) + (spec.v1 * u - v * spec.du(xs)) / u ** 2
    J[np.diag_indices_from(J)] = diag
    return J


def _initial_guess(spec: OdeSpec, n: int) -> np.ndarray:
    i = np.arange(1, n + 1)
    a, b = spec.interval
    if spec.family == "hermite":
        return np.sort(np.sqrt(2 * n + 1) * 0.9 * np.cos((2 * i - 1) * np.pi / (2 * n)))
    if spec.family == "laguerre":
        g, lam = spec.params["gamma"], spec.params["lam"]
        # scaled harmonic points, compressed so the outermost stays near 2n/lam
        pts = i * (i + g) / lam
        return pts * (2 * n + g) / (n * (n + g))
    if np.isfinite(a) and np.isfinite(b):
        c = np.cos((i - 0.25) * np.pi / (n + 0.5))
        return np.sort(0.5 * (a + b) + 0.5 * (b - a) * c)
    if np.isfinite(a):
        return a + i * (i + 1.0) / n
    if np.isfinite(b):
        return np.sort(b - i * (i + 1.0) / n)
    return np.sort(np.sqrt(2 * n + 1) * np.cos((2 * i - 1) * np.pi / (2 * n)))


def solve_zeros(spec: OdeSpec, n: int, tol: Optional[float] = None, max_iter: int = 200,
                x0: Optional[Sequence[float]] = None) -> ZeroSet:
    """Zeros of the degree-n polynomial solution, ascending."""
    if n < 1:
        raise DomainError("n must be >= 1")
    tol = default_tol() if tol is None else tol
    a, b = spec.interval
    if n == 1:
        if spec.v1 == 0:
            raise ConvergenceError("v is constant; no single zero", float("inf"))
        x = np.array([-spec.v0 / spec.v1])
        if not a < x[0] < b:
            raise DomainError("single zero lies outside the interval")
        res = float(np.abs(zero_residuals(spec, x)).max())
        return ZeroSet(x, spec.family, spec, res)

    def admissible(xs):
        return bool(np.all(np.diff(xs) > 0) and xs[0] > a and xs[-1] < b)

    guess = np.sort(np.asarray(x0, float)) if x0 is not None else _initial_guess(spec, n)
    xs, res, _ = damped_newton(lambda z: zero_residuals(spec, z), guess,
                               jac=lambda z: _zero_jacobian(spec, z), tol=tol,
                               max_iter=max_iter, admissible=admissible)
    return ZeroSet(xs, spec.family, spec, float(res))


def laguerre_radial_residuals(rs, gamma: float, lam: float) -> np.ndarray:
    """sum_j 1/(r_i - r_j) - lam + gamma/r_i, the radial form of the Laguerre zero system."""
    rs = np.asarray(rs, float)
    d = rs[:, None] - rs[None, :]
    np.fill_diagonal(d, np.inf)
    return (1 / d).sum(axis=1) - lam + gamma / rs


def hermite_zero_identities(zs):
    """Return (sum x_i, residuals of sum_{i!=k} x_i/(x_k - x_i) - (x_k^2 - (n-1)))."""
    xs = _xs(zs)
    n = len(xs)
    d = xs[:, None] - xs[None, :]
    np.fill_diagonal(d, np.inf)
    lhs = (xs[None, :] / d).sum(axis=1)
    return float(xs.sum()), lhs - (xs ** 2 - (n - 1))


def poly_eval(zs, x):
    xs = _xs(zs)
    x = np.asarray(x, float)
    return np.prod(x[..., None] - xs, axis=-1)


def partial_poly_eval(zs, k: int, x):
    """P_k(x) = prod_{i != k} (x - x_i)  (0-based k)."""
    xs = _xs(zs)
    x = np.asarray(x, float)
    return np.prod(x[..., None] - np.delete(xs, k), axis=-1)


def partial_poly2_eval(zs, k: int, l: int, x):
    """P_kl(x) = prod_{i != k, l} (x - x_i); P_kk = 0."""
    x = np.asarray(x, float)
    if k == l:
        return np.zeros_like(x)
    xs = _xs(zs)
    return np.prod(x[..., None] - np.delete(xs, [k, l]), axis=-1)


def partial_coeffs(zs, f: Callable) -> np.ndarray:
    """Coefficients f_i with f = sum_i f_i P_i, exact for deg f < n."""
    xs = _xs(zs)
    return np.array([f(x) / partial_poly_eval(xs, k, x) for k, x in enumerate(xs)], float)


def weight_constant(spec: OdeSpec, n: int, master: float) -> float:
    """k with u(x_i) rho_i = k, from the master integral I = int w P^2.

    Integrating int w u P'^2 by parts gives k = -((2n-1) u2 + v1) I.
    """
    return -((2 * n - 1) * spec.u2 + spec.v1) * master


def weight_constants(spec: OdeSpec, zs, master: float) -> WeightSet:
    xs = _xs(zs)
    u = spec.u(xs)
    if np.any(u == 0):
        raise DomainError("u vanishes at a zero")
    k = weight_constant(spec, len(xs), master)
    rhos = k / u
    if np.any(rhos <= 0):
        raise DomainError("non-positive weight; inconsistent master integral")
    return WeightSet(rhos, float(k))


def master_integral(spec: OdeSpec, n: int) -> float:
    """Closed-form int w P^2 for the monic degree-n polynomial of the built-in families."""
    if spec.family == "hermite":
        return math.sqrt(math.pi) * math.factorial(n) / 2.0 ** n
    if spec.family == "laguerre":
        g, lam = spec.params["gamma"], spec.params["lam"]
        return math.exp(math.lgamma(n + 1) + math.lgamma(n + 2 * g) - (2 * n + 2 * g) * math.log(2 * lam))
    if spec.family == "legendre-like":
        g = spec.params["m"] - 0.5  # Gegenbauer parameter
        log_h = (math.log(math.pi) + (1 - 2 * g) * math.log(2) + math.lgamma(n + 2 * g)
                 - math.lgamma(n + 1) - math.log(n + g) - 2 * math.lgamma(g))
        log_k = n * math.log(2) + math.lgamma(n + g) - math.lgamma(n + 1) - math.lgamma(g)
        return math.exp(log_h - 2 * log_k)
    raise DomainError("no closed form; use integrate_weighted")


def integrate_weighted(spec: OdeSpec, func: Callable, epsrel: float = 1e-13) -> float:
    """Adaptive-quadrature oracle for int_a^b w(x) func(x) dx."""
    from scipy.integrate import quad

    a, b = spec.interval
    f = lambda x: float(spec.weight(x)) * func(x)
    kw = dict(epsabs=0.0, epsrel=epsrel, limit=500)
    # split a finite core into pieces so polynomial oscillations are resolved
    lo = a if np.isfinite(a) else -8.0
    hi = b if np.isfinite(b) else (lo + 60.0 / spec.params.get("lam", 1.0) if np.isfinite(a) else 8.0)
    edges = np.linspace(lo, hi, 17)
    total = sum(quad(f, edges[i], edges[i + 1], **kw)[0] for i in range(16))
    if not np.isfinite(a):
        total += quad(f, -np.inf, lo, **kw)[0]
    if not np.isfinite(b):
        total += quad(f, hi, np.inf, **kw)[0]
    return total


def master_integral_numeric(spec: OdeSpec, zs) -> float:
    xs = _xs(zs)
    return integrate_weighted(spec, lambda x: float(poly_eval(xs, x)) ** 2)


def gauss_integrate(zs, ws: WeightSet, f_coeffs, g_coeffs, mu=(1.0, 0.0)) -> float:
    """sum_i rho_i mu(x_i) f_i g_i  ~  int w mu f g for f = sum f_i P_i, g = sum g_i P_i.

    ``mu`` is a linear function given as (c0, c1) or a callable.
    """
    xs = _xs(zs)
    mu_x = mu(xs) if callable(mu) else mu[0] + mu[1] * xs
    return float(np.sum(ws.rhos * mu_x * np.asarray(f_coeffs) * np.asarray(g_coeffs)))


def christoffel_weights(zs, ws: WeightSet) -> np.ndarray:
    """Ordinary Gauss weights rho_i / P_i(x_i)^2."""
    xs = _xs(zs)
    pk = np.array([partial_poly_eval(xs, k, x) for k, x in enumerate(xs)])
    return ws.rhos / pk ** 2


def gauss_quadrature(zs, ws: WeightSet, func: Callable) -> float:
    xs = _xs(zs)
    return float(np.sum(christoffel_weights(xs, ws) * np.array([func(x) for x in xs])))


def gauss_rule(spec: OdeSpec, n: int, master: Optional[float] = None):
    """Convenience: zeros, weight set and Christoffel weights for a family."""
    zs = solve_zeros(spec, n)
    if master is None:
        master = master_integral(spec, n) if spec.family != "custom" else master_integral_numeric(spec, zs)
    ws = weight_constants(spec, zs, master)
    return zs, ws, christoffel_weights(zs, ws)
