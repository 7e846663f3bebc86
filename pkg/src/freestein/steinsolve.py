"""Order-k free Stein equations as finite constrained least-squares problems.

All operations here work with one-generator states (a 1D law handed over as
a moment table, cumulant sequence, or any one-generator TraceState).  Test
polynomials are the monomials t^m, m <= d; the kernel ansatz is spanned by
elementary tensors t^{a_1} (x) ... (x) t^{a_{k+1}} with total degree <= D.

The computed discrepancy is the (d, D)-truncated proxy for the infimal
kernel norm: constraints only up to degree d make it a lower bound of the
degree-D-restricted infimum, so reports always carry (k, d, D).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from .errors import DimensionError, DomainError, PreconditionError
from .tracestate import CumulantSeq, MomentTable1D, TraceState, \
    moments_from_cumulants

DEFAULT_RANK_TOL = 1e-10
DEFAULT_FEAS_TOL = 1e-8


def _moment_function(law, needed):
    """Uniform access to m_0..m_needed for the accepted law descriptions."""
    if isinstance(law, CumulantSeq):
        table = [1] + [law.moment(j) for j in range(1, needed + 1)]
    elif isinstance(law, TraceState):
        if law.n != 1:
            raise DimensionError("stein solver needs a one-generator state")
        table = [1] + [law.moment(j) for j in range(1, needed + 1)]
    else:
        table = [1] + list(law)
        if len(table) <= needed:
            raise DimensionError(
                f"need moments up to order {needed}, got {len(table) - 1}")
    return [float(x) if not isinstance(x, (int, float)) else x for x in table]


def kernel_basis(k, D):
    """Exponent tuples (a_1..a_{k+1}) with sum <= D, deterministic order."""
    out = []
    for total in range(D + 1):
        for cut in combinations_with_replacement(range(total + 1), k):
            parts = []
            prev = 0
            for c in cut:
                parts.append(c - prev)
                prev = c
            parts.append(total - prev)
            out.append(tuple(parts))
    return out


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass
class SteinSystem:
    """Constraint matrix, right-hand side, and kernel Gram for one problem."""

    k: int
    d: int
    D: int
    rho: float
    basis: list
    M: np.ndarray          # (d+1) x len(basis)
    b: np.ndarray          # (d+1,)
    G: np.ndarray          # len(basis) squared
    moments: list          # m_0 .. (floats)

    def unit_index(self):
        return self.basis.index((0,) * (self.k + 1))


@dataclass
class KernelSolution:
    k: int
    d: int
    D: int
    coeffs: np.ndarray
    residual: float
    feasible: bool
    discrepancy: float | None
    centering: list = field(default_factory=list)

    @property
    def discrepancy_sq(self):
        return None if self.discrepancy is None else self.discrepancy ** 2

    def report(self):
        return {
            "k": self.k, "d": self.d, "D": self.D,
            "feasible": bool(self.feasible),
            "discrepancy": self.discrepancy,
            "residual": float(self.residual),
            "centering": [float(c) for c in self.centering],
        }


def assemble(law, rho, k, d, D):
    """Build the truncated order-k Stein system for a 1D law.

    Row P = t^m carries the Schwinger-Dyson defect
    rho*m_{m+1} - sum_{i+j=m-1} m_i m_j and pairs the kernel against
    d^k t^m = sum over compositions of m-k of elementary tensors.
    """
    if k < 1:
        raise DimensionError("kernel order k must be >= 1")
    if rho <= 0:
        raise DomainError("rho must be positive")
    if d < 0 or D < 0:
        raise DomainError("degrees must be nonnegative")
    needed = max(2 * D, D + max(d - k, 0), d + 1)
    m = _moment_function(law, needed)
    rho = float(rho)

    basis = kernel_basis(k, D)
    ncols = len(basis)
    M = np.zeros((d + 1, ncols))
    b = np.zeros(d + 1)
    for row in range(d + 1):
        b[row] = rho * m[row + 1] - sum(
            m[i] * m[row - 1 - i] for i in range(row))
        if row >= k:
            for col, legs in enumerate(basis):
                total = 0.0
                for js in _compositions(row - k, k + 1):
                    prod = 1.0
                    for a, j in zip(legs, js):
                        prod *= m[a + j]
                        if prod == 0.0:
                            break
                    total += prod
                M[row, col] = total
    G = np.zeros((ncols, ncols))
    for i, legs_i in enumerate(basis):
        for j in range(i, ncols):
            legs_j = basis[j]
            prod = 1.0
            for a, c in zip(legs_i, legs_j):
                prod *= m[a + c]
            G[i, j] = G[j, i] = prod
    return SteinSystem(k=k, d=d, D=D, rho=rho, basis=basis,
                       M=M, b=b, G=G, moments=m)


def solve_min_norm(system, tol=DEFAULT_RANK_TOL, feas_tol=DEFAULT_FEAS_TOL):
    """Minimum-G-norm solution of M A = b, or the least-squares residual.

    Rank decisions use a relative singular-value threshold ``tol``; the
    solution is flagged infeasible when the best residual exceeds
    ``feas_tol * (|b| + 1)``, in which case no discrepancy is reported.
    """
    M, b, G = system.M, system.b, system.G
    U, S, Vt = np.linalg.svd(M, full_matrices=True)
    if S.size and S[0] > 0:
        rank = int(np.sum(S > tol * S[0]))
    else:
        rank = 0
    if rank:
        c0 = Vt[:rank].T @ ((U[:, :rank].T @ b) / S[:rank])
    else:
        c0 = np.zeros(M.shape[1])
    null = Vt[rank:].T
    if null.size:
        H = null.T @ G @ null
        g = null.T @ (G @ c0)
        z = -np.linalg.pinv((H + H.T) / 2, rcond=tol) @ g
        c = c0 + null @ z
    else:
        c = c0
    residual = float(np.linalg.norm(M @ c - b))
    feasible = residual <= feas_tol * (float(np.linalg.norm(b)) + 1.0)
    disc_sq = float(c @ G @ c)
    disc = float(np.sqrt(max(disc_sq, 0.0))) if feasible else None
    centering = _centering(system, c)
    return KernelSolution(k=system.k, d=system.d, D=system.D, coeffs=c,
                          residual=residual, feasible=feasible,
                          discrepancy=disc, centering=[centering])


def _centering(system, coeffs):
    m = system.moments
    total = 0.0
    for c, legs in zip(coeffs, system.basis):
        if c != 0.0:
            prod = 1.0
            for a in legs:
                prod *= m[a]
            total += c * prod
    return float(total)


def solve(law, rho, k, d, D, tol=DEFAULT_RANK_TOL, feas_tol=DEFAULT_FEAS_TOL):
    """Assemble and solve in one step."""
    return solve_min_norm(assemble(law, rho, k, d, D), tol=tol,
                          feas_tol=feas_tol)


def semicircular_moments(rho, upto):
    """Moments of the (0, 1/rho) semicircle: Catalan numbers times rho^-m."""
    out = []
    for j in range(1, upto + 1):
        if j % 2:
            out.append(0 if isinstance(rho, Fraction) else 0.0)
        else:
            half = j // 2
            out.append(comb(2 * half, half) // (half + 1) * (1 / rho) ** half)
    return out


def moment_match_report(law, rho, k, tol=1e-12):
    """Moment gaps against the (0, 1/rho) semicircle up to degree k+1.

    Existence of an order-j kernel requires the gaps to vanish through
    degree j; matching through degree k+1 additionally forces the order-k
    kernel to be centered.
    """
    m = _moment_function(law, k + 1)
    target = [1.0] + [float(x) for x in semicircular_moments(float(rho), k + 1)]
    gaps = {}
    for deg in range(1, k + 2):
        gaps[deg] = m[deg] - target[deg]
    match_order = 0
    for deg in range(1, k + 2):
        if abs(gaps[deg]) <= tol:
            match_order = deg
        else:
            break
    max_possible = min(k, match_order)
    return {
        "rho": float(rho),
        "k": k,
        "gaps": gaps,
        "match_order": match_order,
        "max_possible_order": max_possible,
        "order_k_possible": match_order >= k,
        "order_k_centered": match_order >= k + 1,
    }


def poincare_constant(law, l, d, cutoff=DEFAULT_RANK_TOL,
                      return_details=False):
    """Best constant in the order-l Poincare inequality at degree <= d.

    Largest generalized eigenvalue of the centered Gram of the order-l
    derivatives of the monomials against (l+1) times the Gram of the
    order-(l+1) derivatives.  Degenerate denominator directions with a
    positive numerator make the constant infinite.
    """
    if l < 0:
        raise DomainError("order l must be >= 0")
    if d <= l:
        raise DomainError("need test degree d > l")
    needed = 2 * d
    m = _moment_function(law, needed)

    def deriv_gram(order):
        out = np.zeros((d + 1, d + 1))
        for p in range(order, d + 1):
            for q in range(order, d + 1):
                total = 0.0
                for ii in _compositions(p - order, order + 1):
                    for jj in _compositions(q - order, order + 1):
                        prod = 1.0
                        for a, c in zip(ii, jj):
                            prod *= m[a + c]
                        total += prod
                out[p, q] = total
        return out

    def deriv_mean(order):
        out = np.zeros(d + 1)
        for p in range(order, d + 1):
            total = 0.0
            for ii in _compositions(p - order, order + 1):
                prod = 1.0
                for a in ii:
                    prod *= m[a]
                total += prod
            out[p] = total
        return out

    num = deriv_gram(l)
    s = deriv_mean(l)
    num = num - np.outer(s, s)
    den = (l + 1) * deriv_gram(l + 1)

    den = (den + den.T) / 2
    num = (num + num.T) / 2
    evals, evecs = np.linalg.eigh(den)
    scale = max(evals[-1], 0.0)
    keep = evals > cutoff * max(scale, 1.0)
    null = evecs[:, ~keep]
    if null.size:
        resid = null.T @ num @ null
        if resid.size and np.max(np.linalg.eigvalsh((resid + resid.T) / 2)) \
                > cutoff * max(1.0, float(np.abs(num).max())):
            direction = null[:, 0]
            if return_details:
                return float("inf"), {"null_direction": direction}
            return float("inf")
    if not np.any(keep):
        return (0.0, {}) if return_details else 0.0
    W = evecs[:, keep] / np.sqrt(evals[keep])
    reduced = W.T @ num @ W
    top = float(np.linalg.eigvalsh((reduced + reduced.T) / 2)[-1])
    top = max(top, 0.0)
    if return_details:
        return top, {}
    return top


def uniform_weights(N):
    return np.full(N, N ** -0.5)


def weighted_cumulants(base, weights, upto):
    """Free cumulants of sum_j a_j x_j for free iid x_j: kappa_m scales by
    sum_j a_j^m."""
    scales = [float(np.sum(np.asarray(weights, dtype=float) ** mm))
              for mm in range(1, upto + 1)]
    kap = [float(base.kappa(mm)) * scales[mm - 1] for mm in range(1, upto + 1)]
    return CumulantSeq(kap, complete=base.complete and len(base.values) <= upto,
                       validate=False)


def clt_discrepancy_scan(base, weights_list, k, d, D, rho=1.0,
                         tol=DEFAULT_RANK_TOL, feas_tol=DEFAULT_FEAS_TOL):
    """Truncated order-k discrepancies of weighted free sums of a base law.

    Each row reports sigma_{N,k} = sum a_j^{2(k+1)}, the squared
    discrepancy of the sum, the scaled base bound sigma * disc(X)^2, and
    their ratio.  Weight vectors must be normalized to sum of squares one;
    the base must be centered with unit variance.
    """
    if abs(float(base.kappa(1))) > 1e-12 or abs(float(base.kappa(2)) - 1) > 1e-12:
        raise PreconditionError("base law must be centered with kappa_2 = 1")
    needed = max(2 * D, D + max(d - k, 0), d + 1)
    base_solution = solve(base, rho, k, d, D, tol=tol, feas_tol=feas_tol)
    base_disc_sq = base_solution.discrepancy_sq
    rows = []
    for a in weights_list:
        a = np.asarray(a, dtype=float)
        if abs(float(np.sum(a ** 2)) - 1.0) > 1e-10:
            raise DomainError("weights must satisfy sum a_j^2 = 1")
        sigma = float(np.sum(a ** (2 * (k + 1))))
        law = weighted_cumulants(base, a, needed)
        sol = solve(law, rho, k, d, D, tol=tol, feas_tol=feas_tol)
        disc_sq = sol.discrepancy_sq
        bound = None if base_disc_sq is None else sigma * base_disc_sq
        ratio = None
        if disc_sq is not None and bound:
            ratio = disc_sq / bound
        rows.append({
            "N": int(a.size),
            "sigma": sigma,
            "disc_sq": disc_sq,
            "bound": bound,
            "ratio": ratio,
            "feasible": bool(sol.feasible),
            "residual": sol.residual,
        })
    return {"k": k, "d": d, "D": D, "rho": float(rho),
            "base_disc_sq": base_disc_sq, "rows": rows}
