"""Free moment maps and the Stein kernels they induce.

The moment map of a centred measure mu is the convex function u whose
equilibrium measure nu_u pushes forward to mu under u'.  It is computed by
a damped fixed-point iteration: given u', solve the equilibrium problem,
then move u' toward the monotone transport F_mu^{-1} o F_nu.  The kernel
(x - y) / ((u')^{-1}(x) - (u')^{-1}(y)) then satisfies the Stein equation
for mu against the quadratic potential, up to the reported residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, DomainError, PreconditionError
from .equilibrium import equilibrium_measure
from .grid import GridMeasure, require_centered, wasserstein2


@dataclass
class MomentMap1D:
    """Samples of u' on a window grid, nondecreasing, with u(0) = 0."""

    grid: np.ndarray
    uprime: np.ndarray
    residual: float
    history: list
    equilibrium: GridMeasure

    def u_values(self):
        h = self.grid[1] - self.grid[0]
        integral = np.concatenate(
            [[0.0], np.cumsum(0.5 * h * (self.uprime[1:] + self.uprime[:-1]))])
        at_zero = np.interp(0.0, self.grid, integral)
        return integral - at_zero

    def prime(self, x):
        return np.interp(x, self.grid, self.uprime)

    def inverse_prime(self, y):
        """(u*)' = (u')^{-1}, by inverting the monotone sample table."""
        up, xs = self.uprime, self.grid
        keep = np.concatenate([[True], np.diff(up) > 0])
        return np.interp(y, up[keep], xs[keep])

    def second_derivative(self):
        return np.gradient(self.uprime, self.grid)

    def pushforward_quantile(self, q):
        return self.prime(self.equilibrium.quantile(q))


def quantile_quadrature(nq):
    """Quantile nodes and weights with a cosine substitution.

    The substitution q = (1 - cos(pi theta))/2 removes the sqrt-edge cusp
    of quantile functions, restoring second-order midpoint accuracy for
    integrals against the measure.
    """
    theta = (np.arange(nq) + 0.5) / nq
    q = 0.5 * (1.0 - np.cos(np.pi * theta))
    w = np.sin(np.pi * theta)
    w /= w.sum()
    return q, w


def pushforward_distance(mmap, mu, nq=4096):
    """w2 between (u')_push nu_u and mu via quantile coupling."""
    q, w = quantile_quadrature(nq)
    diff = mmap.pushforward_quantile(q) - mu.quantile(q)
    return float(np.sqrt(np.sum(w * diff * diff)))


def moment_map(mu, damping=0.5, tol=1e-3, max_iter=25, m=None, window=None,
               equilibrium_tol=None):
    """Fixed-point solve of (u')_push nu_u = mu for a centred grid measure.

    Starts from u = x^2/2 (whose equilibrium measure is the standard
    semicircle) and averages u' toward the exact monotone transport at each
    step.  Stops when the pushforward residual drops below ``tol``; raises
    ConvergenceError with the residual history on stagnation.
    """
    require_centered(mu, what="moment map input")
    if mu.variance() < 1e-12:
        raise PreconditionError("moment map needs a nondegenerate measure")
    if not 0 < damping <= 1:
        raise DomainError("damping must be in (0, 1]")
    if m is None:
        m = min(mu.m, 1200)
    if window is None:
        half = max(2.5, 1.3 * max(abs(mu.support[0]), abs(mu.support[1])))
        window = (-half, half)
    x = np.linspace(window[0], window[1], m)
    if equilibrium_tol is None:
        equilibrium_tol = max(1e-4, 0.1 * tol)

    uprime = x.copy()
    nu = None
    history = []
    best = None
    for it in range(max_iter):
        h = x[1] - x[0]
        u_vals = np.concatenate(
            [[0.0], np.cumsum(0.5 * h * (uprime[1:] + uprime[:-1]))])
        init = nu.density if nu is not None else None
        res = equilibrium_measure(u_vals, window, m=m, tol=equilibrium_tol,
                                  fista_iters=300 if it == 0 else 120,
                                  init=init, raise_on_fail=False)
        nu = res.measure
        mmap = MomentMap1D(grid=x, uprime=uprime.copy(), residual=np.inf,
                           history=history, equilibrium=nu)
        dist = pushforward_distance(mmap, mu)
        history.append(dist)
        if best is None or dist < best[0]:
            mmap.residual = dist
            best = (dist, mmap)
        if dist < tol:
            mmap.residual = dist
            return mmap
        # exact monotone transport for the current equilibrium measure
        target = mu.quantile(nu.cdf_at(x))
        new = (1.0 - damping) * uprime + damping * target
        uprime = np.maximum.accumulate(new)
        if it >= 4 and history[-1] > 0.98 * history[-5]:
            break
    raise ConvergenceError(
        f"moment map stalled at residual {best[0]:.3e} "
        f"(history {['%.2e' % v for v in history]})")


@dataclass
class Kernel2D:
    """Kernel values on the grid square of a measure.

    ``evaluate(x)`` returns the kernel matrix at arbitrary sorted points;
    constructors attach an exact evaluator when they know one, otherwise
    bilinear interpolation of the stored values is used.
    """

    grid: np.ndarray
    values: np.ndarray
    evaluator: object = None

    @classmethod
    def constant(cls, mu, value=1.0):
        m = mu.m
        return cls(grid=mu.grid, values=np.full((m, m), float(value)),
                   evaluator=lambda x: np.full((x.size, x.size), float(value)))

    def evaluate(self, x):
        if self.evaluator is not None:
            return self.evaluator(np.asarray(x, dtype=float))
        return _bilinear(self.grid, self.values, np.asarray(x, dtype=float))


def _bilinear(grid, values, x):
    idx = np.clip(np.searchsorted(grid, x) - 1, 0, grid.size - 2)
    t = (x - grid[idx]) / (grid[idx + 1] - grid[idx])
    t = np.clip(t, 0.0, 1.0)
    v00 = values[np.ix_(idx, idx)]
    v01 = values[np.ix_(idx, idx + 1)]
    v10 = values[np.ix_(idx + 1, idx)]
    v11 = values[np.ix_(idx + 1, idx + 1)]
    ti, tj = t[:, None], t[None, :]
    return (v00 * (1 - ti) * (1 - tj) + v01 * (1 - ti) * tj
            + v10 * ti * (1 - tj) + v11 * ti * tj)


def kernel_from_moment_map(mmap, mu):
    """Stein kernel (x - y)/((u*)'(x) - (u*)'(y)) on mu's grid square.

    The diagonal takes the limit value u''((u*)'(x)); u' must be strictly
    increasing on the range covering mu's support.
    """
    s_grid = mmap.inverse_prime(mu.grid)
    if np.any(np.diff(s_grid) <= 0):
        raise DomainError("u' is not strictly increasing on the needed range")

    def evaluate(x):
        s = mmap.inverse_prime(x)
        diff_x = x[:, None] - x[None, :]
        diff_s = s[:, None] - s[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = diff_x / diff_s
        upp = np.interp(s, mmap.grid, mmap.second_derivative())
        ii = np.arange(x.size)
        vals[ii, ii] = upp
        bad = ~np.isfinite(vals)
        if np.any(bad):
            vals[bad] = np.broadcast_to(upp[:, None], vals.shape)[bad]
        return vals

    return Kernel2D(grid=mu.grid, values=evaluate(mu.grid),
                    evaluator=evaluate)


def difference_quotient_matrix(mu, g_vals, g_prime_vals):
    """(g(x) - g(y))/(x - y) on the grid square, derivative on the diagonal."""
    x = mu.grid
    diff_g = g_vals[:, None] - g_vals[None, :]
    diff_x = x[:, None] - x[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = diff_g / diff_x
    ii = np.arange(x.size)
    out[ii, ii] = g_prime_vals
    return out


def stein_residual(mu, kernel, drift=None, degree=6, nq=2048):
    """Sup over monomial test functions of the weak Stein equation defect.

    Checks | int drift * g d mu  -  int int kernel * Dg d mu^2 | for
    g = x^j, j <= degree.  ``drift`` is a callable defaulting to the
    identity (quadratic potential).  The double integral is a midpoint sum
    in quantile coordinates, so the measure weights are exact and the
    kernel is evaluated at quantile nodes.
    """
    if drift is None:
        drift = lambda t: t
    q, w = quantile_quadrature(nq)
    xs = mu.quantile(q)
    A = kernel.evaluate(xs)
    drift_nodes = np.asarray([drift(t) for t in mu.grid], dtype=float)
    worst = 0.0
    for j in range(degree + 1):
        g_nodes = mu.grid ** j
        lhs = mu.expectation(drift_nodes * g_nodes)
        g = xs ** j
        gp = j * xs ** (j - 1) if j else np.zeros_like(xs)
        diff_g = g[:, None] - g[None, :]
        diff_x = xs[:, None] - xs[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            dq = diff_g / diff_x
        ii = np.arange(nq)
        dq[ii, ii] = gp
        rhs = float(w @ (A * dq) @ w)
        worst = max(worst, abs(lhs - rhs))
    return worst


def generator_residual(mu, kernel, degree=6):
    """Stationarity defect of the kernel-modified diffusion generator.

    max over f' = x^j of | int int Df' * A d mu^2 - int x f' d mu |; the
    same weak form as ``stein_residual`` with the quadratic drift.
    """
    return stein_residual(mu, kernel, drift=None, degree=degree)


def map_kernel_bound(mmap, nq=2048):
    """int int [(u'(x) - u'(y))/(x - y) - 1]^2 d nu_u^2 by quantile sampling."""
    nu = mmap.equilibrium
    q, w = quantile_quadrature(nq)
    xs = nu.quantile(q)
    up = mmap.prime(xs)
    diff_u = up[:, None] - up[None, :]
    diff_x = xs[:, None] - xs[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = diff_u / diff_x
    ii = np.arange(nq)
    slope = np.gradient(up, xs)
    ratio[ii, ii] = slope
    ratio -= 1.0
    return float(w @ (ratio * ratio) @ w)


def kernel_deviation_sq(mu, kernel, nq=2048):
    """int int (A - 1)^2 d mu^2 by quantile sampling of the kernel."""
    q, w = quantile_quadrature(nq)
    xs = mu.quantile(q)
    vals = kernel.evaluate(xs) - 1.0
    return float(w @ (vals * vals) @ w)


@dataclass
class PotentialKernelResult:
    kernel: Kernel2D
    residual: float
    pushforward: GridMeasure
    inner_kernel_coeffs: np.ndarray
    inner_kernel_basis: list


def kernel_general_potential(mu, v_prime, v_second, d=4, D=6,
                             degree=6):
    """Stein kernel of mu for a strictly convex potential V.

    Builds the pushforward mu_V of mu under V', obtains a first-order
    kernel A_V of mu_V against the semicircular potential from the
    truncated Stein solver (unshifted form), and composes
    A_V(V'(x), V'(y)) (x - y)/(V'(x) - V'(y)).  Reports the weak-equation
    residual against the drift V'.
    """
    from ..steinsolve import assemble, solve_min_norm

    x = mu.grid
    vp = np.asarray([v_prime(t) for t in x], dtype=float)
    vpp = np.asarray([v_second(t) for t in x], dtype=float)
    if np.any(vpp <= 0):
        raise PreconditionError("potential must be strictly convex on supp mu")
    center = mu.expectation(vp)
    if abs(center) > 1e-6:
        raise PreconditionError(
            f"pushforward must be centered: int V' d mu = {center:.3e}")

    # pushforward measure (V')_push mu on its own grid
    lo, hi = vp[0], vp[-1]
    mV = mu.m
    z = np.linspace(lo, hi, mV)
    xs_of_z = np.interp(z, vp, x)
    dens = np.interp(xs_of_z, x, mu.density) / np.interp(xs_of_z, x, vpp)
    mu_v = GridMeasure((lo, hi), dens, normalize=True)

    # unshifted first-order kernel of mu_V against the semicircle
    needed = max(2 * D, D + d, d + 1)
    system = assemble(mu_v.moments(needed), 1.0, 1, d, D)
    sol = solve_min_norm(system)
    coeffs = sol.coeffs.copy()
    coeffs[system.unit_index()] += 1.0   # back to the unshifted kernel

    def a_v(p, q):
        total = np.zeros(np.broadcast(p, q).shape)
        for c, (e1, e2) in zip(coeffs, system.basis):
            if c != 0.0:
                total += c * p ** e1 * q ** e2
        return total

    def evaluate(pts):
        vpt = np.asarray([v_prime(t) for t in pts], dtype=float)
        vppt = np.asarray([v_second(t) for t in pts], dtype=float)
        comp = a_v(vpt[:, None], vpt[None, :])
        diff_x = pts[:, None] - pts[None, :]
        diff_v = vpt[:, None] - vpt[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            jd = diff_x / diff_v
        ii = np.arange(pts.size)
        jd[ii, ii] = 1.0 / vppt
        bad = ~np.isfinite(jd)
        if np.any(bad):
            jd[bad] = np.broadcast_to((1.0 / vppt)[:, None], jd.shape)[bad]
        return comp * jd

    kernel = Kernel2D(grid=x, values=evaluate(x), evaluator=evaluate)
    residual = stein_residual(mu, kernel, drift=v_prime, degree=degree)
    return PotentialKernelResult(kernel=kernel, residual=residual,
                                 pushforward=mu_v,
                                 inner_kernel_coeffs=coeffs,
                                 inner_kernel_basis=system.basis)
