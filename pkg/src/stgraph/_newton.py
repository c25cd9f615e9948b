"""Damped Newton iteration for small dense nonlinear systems."""
from __future__ import annotations

import os
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError


def default_tol() -> float:
    try:
        return float(os.environ.get("STGRAPH_TOL", "1e-12"))
    except ValueError:
        return 1e-12


def fd_jacobian(fun: Callable, x: np.ndarray, f0=None, rel_step: float = 1e-7, scale=None) -> np.ndarray:
    """Central-difference Jacobian; step rel_step*max(1, |x_j|) (or *scale_j)."""
    x = np.asarray(x, float)
    cols = []
    for j in range(len(x)):
        s = scale[j] if scale is not None else max(1.0, abs(x[j]))
        h = rel_step * s
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        cols.append((np.asarray(fun(xp)) - np.asarray(fun(xm))) / (2 * h))
    return np.array(cols).T


def damped_newton(
    fun: Callable,
    x0,
    jac: Optional[Callable] = None,
    tol: Optional[float] = None,
    max_iter: int = 200,
    admissible: Optional[Callable] = None,
    fd_scale=None,
    min_damping: float = 2.0 ** -30,
    polish: bool = True,
):
    """Solve fun(x) = 0.  Steps are halved while the residual norm grows
    (or while ``admissible(x)`` is False).  Returns (x, residual_max, iterations).
    """
    tol = default_tol() if tol is None else tol
    x = np.asarray(x0, float).copy()
    r = np.asarray(fun(x), float)
    rn = np.linalg.norm(r)
    best = (np.max(np.abs(r)), x.copy())
    if best[0] < tol:
        return x, best[0], 0
    for it in range(1, max_iter + 1):
        J = jac(x) if jac is not None else fd_jacobian(fun, x, scale=fd_scale)
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -r, rcond=None)[0]
        t = 1.0
        while True:
            xn = x + t * dx
            ok = admissible is None or admissible(xn)
            if ok:
                rnew = np.asarray(fun(xn), float)
                rnn = np.linalg.norm(rnew)
                if np.isfinite(rnn) and (rnn <= rn or rnn < tol):
                    break
            t *= 0.5
            if t < min_damping:
                break
        if t < min_damping:
            # no descent possible; accept if already converged
            if best[0] < tol:
                return best[1], best[0], it
            raise ConvergenceError("damped Newton stalled", best[0], it)
        x, r, rn = xn, rnew, rnn
        rmax = np.max(np.abs(r))
        if rmax < best[0]:
            best = (rmax, x.copy())
        if rmax < tol:
            if polish:
                x, rmax = _polish(fun, jac, x, r, fd_scale)
            return x, rmax, it
    if best[0] < tol:
        return best[1], best[0], max_iter
    raise ConvergenceError("damped Newton did not converge", best[0], max_iter)


def _polish(fun, jac, x, r, fd_scale):
    # one undamped step past convergence; kept only if it does not hurt
    J = jac(x) if jac is not None else fd_jacobian(fun, x, scale=fd_scale)
    try:
        xn = x - np.linalg.solve(J, r)
    except np.linalg.LinAlgError:
        return x, np.max(np.abs(r))
    rn = np.asarray(fun(xn), float)
    if np.all(np.isfinite(rn)) and np.max(np.abs(rn)) <= np.max(np.abs(r)):
        return xn, np.max(np.abs(rn))
    return x, np.max(np.abs(r))
