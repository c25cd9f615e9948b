"""External electromagnetic potentials as callbacks on Minkowski matrices."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import spinor as sp


@dataclass(frozen=True)
class PotentialField:
    """Potential A(x) with optional analytic partials dA(x) -> [d_t A, d_x A, d_y A, d_z A].

    ``charge`` multiplies A wherever e*A enters; builders below fold the coupling
    into A and keep charge = 1.
    """
    A: Callable[[np.ndarray], np.ndarray]
    dA: Optional[Callable[[np.ndarray], list]] = None
    charge: float = 1.0
    scale: float = 1.0  # length scale for finite-difference fallback
    spec: Optional[dict] = None

    def eA(self, x) -> np.ndarray:
        return self.charge * np.asarray(self.A(x), dtype=complex)

    def partials(self, x) -> list:
        """Partials of e*A."""
        if self.dA is not None:
            return [self.charge * np.asarray(p, dtype=complex) for p in self.dA(x)]
        return [self.charge * p for p in sp.numeric_partials(self.A, x, scale=self.scale)]

    def transformed(self, T) -> "PotentialField":
        """The same physical field seen after x -> T x T^+."""
        T = sp.check_unimodular(T)
        Ti, Td = sp.inv(T), sp.dagger(T)
        Tdi = sp.inv(Td)
        pull = lambda x: Ti @ x @ Tdi
        A = lambda x: T @ self.A(pull(x)) @ Td
        dA = None
        if self.dA is not None:
            # chain rule: d'_mu = sum_nu (dx^nu/dx'^mu) d_nu, with x = T^-1 x' T^+^-1 linear
            L = np.array([sp._components(Ti @ sp.BASIS[mu] @ Tdi) for mu in range(4)])

            def dA(x):
                inner = self.dA(pull(x))
                return [T @ sum(L[mu, nu] * inner[nu] for nu in range(4)) @ Td for mu in range(4)]
        return PotentialField(A, dA, self.charge, self.scale, None)


def zero_field() -> PotentialField:
    z = np.zeros((2, 2), complex)
    return PotentialField(lambda x: z, lambda x: [z, z, z, z], spec={"type": "zero"})


def constant_field(t=0.0, x=0.0, y=0.0, z=0.0) -> PotentialField:
    U = sp.mink_encode(t, x, y, z)
    zero = np.zeros((2, 2), complex)
    return PotentialField(lambda _: U, lambda _: [zero] * 4,
                          spec={"type": "constant", "A": [t, x, y, z]})


def coulomb_field(alpha: float) -> PotentialField:
    """eA = (alpha / r) I, r the spatial distance from the origin."""

    def A(x):
        c = sp._components(x)
        return alpha / np.linalg.norm(c[1:]) * sp.I2

    def dA(x):
        c = sp._components(x)
        r = np.linalg.norm(c[1:])
        g = -alpha * c[1:] / r ** 3
        return [0 * sp.I2] + [gi * sp.I2 for gi in g]

    return PotentialField(A, dA, spec={"type": "coulomb", "alpha": alpha})


def uniform_electric(strength: float, axis: str = "z") -> PotentialField:
    """Scalar potential eA = strength * x_axis * I (linear, constant field)."""
    k = "txyz".index(axis)
    if k == 0:
        raise ValueError("axis must be spatial")

    def A(x):
        return strength * sp._components(x)[k] * sp.I2

    parts = [np.zeros((2, 2), complex) for _ in range(4)]
    parts[k] = strength * sp.I2
    return PotentialField(A, lambda _: parts, spec={"type": "uniform_electric", "strength": strength, "axis": axis})


def linear_field(M: np.ndarray) -> PotentialField:
    """A^mu(x) = sum_nu M[mu, nu] x^nu with real 4x4 M."""
    M = np.asarray(M, float)

    def A(x):
        return sp.encode(M @ sp._components(x))

    parts = [sp.encode(M[:, nu]) for nu in range(4)]
    return PotentialField(A, lambda _: parts, spec={"type": "linear", "M": M.tolist()})


def field_from_spec(spec: dict) -> PotentialField:
    kind = spec.get("type")
    if kind == "zero":
        return zero_field()
    if kind == "constant":
        return constant_field(*spec["A"])
    if kind == "coulomb":
        return coulomb_field(float(spec["alpha"]))
    if kind == "uniform_electric":
        return uniform_electric(float(spec["strength"]), spec.get("axis", "z"))
    if kind == "linear":
        return linear_field(np.array(spec["M"], float))
    raise ValueError(f"unknown field type {kind!r}")
