"""Equilibrium (free Gibbs) measures by constrained energy minimisation.

Minimises  - int int log|s-t| d mu d mu + int u d mu  over probability
densities on a uniform grid.  The quadratic log-energy form uses the exact
hat-pair kernel; the minimisation runs accelerated projected gradient on
the simplex of nodal masses and finishes with active-set KKT solves, which
drive the Euler-Lagrange residual to quadrature accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import solve as dense_solve, toeplitz

from ..errors import ConvergenceError, PreconditionError
from .grid import GridMeasure
from .kernels import (log_pair_kernel, log_point_kernel, symmetric_full,
                      toeplitz_apply)


@dataclass
class EquilibriumResult:
    measure: GridMeasure
    el_residual: float
    multiplier: float
    iterations: int
    converged: bool
    history: list


@lru_cache(maxsize=2)
def _pair_toeplitz(m):
    return toeplitz(log_pair_kernel(m))


def _project_simplex(v, total):
    """Euclidean projection onto {x >= 0, sum x = total}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, v.size + 1)
    cond = u - css / idx > 0
    rho = idx[cond][-1]
    theta = css[rho - 1] / rho
    return np.clip(v - theta, 0.0, None)


def equilibrium_measure(potential, window, m=2000, tol=1e-3,
                        fista_iters=600, polish_rounds=12, init=None,
                        raise_on_fail=True):
    """Discrete minimiser of the log-energy functional for a convex potential.

    ``potential`` is a callable or an array of samples on the window grid.
    Returns an EquilibriumResult whose ``el_residual`` is the sup over the
    support of |2 L(x) - u(x) - lambda| with L the log potential of the
    minimiser.
    """
    a, b = float(window[0]), float(window[1])
    x = np.linspace(a, b, m)
    h = (b - a) / (m - 1)
    u = np.asarray([potential(t) for t in x], dtype=float) \
        if callable(potential) else np.asarray(potential, dtype=float).copy()
    if u.shape != (m,):
        raise PreconditionError("potential samples must match the grid")
    dd = np.diff(u, 2)
    if dd.min() < -1e-9 * max(1.0, np.abs(u).max()):
        raise PreconditionError("potential is not convex on the window")

    J = symmetric_full(log_pair_kernel(m))
    logh = np.log(h)

    def K_apply(rho):
        return h * h * (logh * rho.sum() + toeplitz_apply(J, rho))

    def grad(rho):
        return -2.0 * K_apply(rho) + h * u

    def energy(rho):
        return float(-rho @ K_apply(rho) + h * (u @ rho))

    total = 1.0 / h
    if init is not None:
        rho = np.clip(np.asarray(init, dtype=float), 0.0, None)
        rho = _project_simplex(rho, total)
    else:
        rho = np.zeros(m)
        lo, hi = m // 4, 3 * m // 4
        rho[lo:hi] = 1.0
        rho = _project_simplex(rho, total)

    # Lipschitz constant of the gradient via power iteration on K
    v = np.random.default_rng(0).standard_normal(m)
    for _ in range(25):
        v = K_apply(v)
        v /= max(np.linalg.norm(v), 1e-300)
    lip = 2.0 * abs(float(v @ K_apply(v))) + 1e-12
    step = 1.0 / lip

    history = []
    y, t_acc = rho.copy(), 1.0
    e_prev = energy(rho)
    for it in range(fista_iters):
        rho_next = _project_simplex(y - step * grad(y), total)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_acc * t_acc))
        y = rho_next + (t_acc - 1.0) / t_next * (rho_next - rho)
        rho, t_acc = rho_next, t_next
        if it % 50 == 49:
            e_now = energy(rho)
            history.append(e_now)
            if e_now > e_prev:           # momentum restart
                y, t_acc = rho.copy(), 1.0
            e_prev = e_now

    # active-set polish: stationarity on the support, KKT screening outside
    T = _pair_toeplitz(m)
    support = rho > 1e-9 * rho.max()
    lam = 0.0
    for _ in range(polish_rounds):
        idx = np.flatnonzero(support)
        Kss = h * h * (logh + T[np.ix_(idx, idx)])
        nS = idx.size
        A = np.zeros((nS + 1, nS + 1))
        A[:nS, :nS] = 2.0 * Kss
        A[:nS, nS] = h
        A[nS, :nS] = h
        rhs = np.concatenate([h * u[idx], [1.0]])
        try:
            sol = dense_solve(A, rhs, assume_a="sym")
        except np.linalg.LinAlgError:
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        rho_s, lam = sol[:nS], float(sol[nS])
        changed = False
        if rho_s.min() < 0:
            bad = idx[rho_s < 0]
            support[bad] = False
            changed = True
            rho_s = np.clip(rho_s, 0.0, None)
        rho = np.zeros(m)
        rho[idx] = rho_s
        # grow: off-support KKT needs u - 2L >= lambda
        g_off = grad(rho) - lam * h
        viol = np.flatnonzero(~support & (g_off < -1e-12 * max(1.0, abs(lam))))
        if viol.size:
            support[viol] = True
            changed = True
        if not changed:
            break

    rho = np.clip(rho, 0.0, None)
    if rho.sum() == 0:
        raise ConvergenceError("equilibrium iteration collapsed to zero mass")

    L = h * (logh * rho.sum()
             + toeplitz_apply(symmetric_full(log_point_kernel(m)), rho))
    r = u - 2.0 * L
    mask = rho > 1e-6 * rho.max()
    lam_hat = float(np.average(r[mask], weights=rho[mask]))
    el_residual = float(np.max(np.abs(r[mask] - lam_hat)))
    history.append(el_residual)

    measure = GridMeasure((a, b), rho, normalize=True)
    converged = el_residual < tol
    result = EquilibriumResult(measure=measure, el_residual=el_residual,
                               multiplier=lam_hat,
                               iterations=fista_iters, converged=converged,
                               history=history)
    if not converged and raise_on_fail:
        raise ConvergenceError(
            f"Euler-Lagrange residual {el_residual:.3e} above {tol:.1e}")
    return result
