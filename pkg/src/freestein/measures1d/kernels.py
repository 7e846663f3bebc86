"""Exact integral kernels for piecewise-linear densities on uniform grids.

A nodal density is read as a hat-function expansion.  The kernels below
are the exact integrals of log, principal-value, and Cauchy kernels
against one hat (point evaluations) or a pair of hats (double integrals),
expressed in grid units so that a kernel value depends only on the node
offset.  This removes the quadrature error of naive rules at the
logarithmic singularity; what remains is the fidelity of the hat
expansion itself.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# autocorrelation of the unit hat: piecewise cubic on [-2, 2]
_PSI_PIECES = (
    ((-2.0, -1.0), (4.0 / 3.0, 2.0, 1.0, 1.0 / 6.0)),
    ((-1.0, 0.0), (2.0 / 3.0, 0.0, -1.0, -0.5)),
    ((0.0, 1.0), (2.0 / 3.0, 0.0, -1.0, 0.5)),
    ((1.0, 2.0), (4.0 / 3.0, -2.0, 1.0, -1.0 / 6.0)),
)

# the unit hat itself: piecewise linear on [-1, 1]
_PHI_PIECES = (
    ((-1.0, 0.0), (1.0, 1.0)),
    ((0.0, 1.0), (1.0, -1.0)),
)


def _antideriv_poly_log(coeffs, u):
    """Antiderivative of (sum c_k u^k) * log|u|, continuous through 0."""
    u = np.asarray(u, dtype=float)
    safe = np.where(u == 0.0, 1.0, np.abs(u))
    log_u = np.log(safe)
    total = np.zeros_like(u)
    for k, c in enumerate(coeffs):
        if c == 0.0:
            continue
        total += c * u ** (k + 1) / (k + 1) * (log_u - 1.0 / (k + 1))
    return total


def _shifted_coeffs(coeffs, shift):
    """Coefficients of p(u - shift) for vectorised shift arrays."""
    shift = np.asarray(shift, dtype=float)
    deg = len(coeffs) - 1
    out = [np.zeros_like(shift) for _ in range(deg + 1)]
    from math import comb
    for k, c in enumerate(coeffs):
        if c == 0.0:
            continue
        for j in range(k + 1):
            out[j] = out[j] + c * comb(k, j) * (-shift) ** (k - j)
    return out


def _poly_log_integral(coeffs, lo, hi, r):
    """Integral over [lo, hi] of p(w) log|w + r| dw, vectorised over r."""
    r = np.asarray(r, dtype=float)
    shifted = _shifted_coeffs(coeffs, r)
    hi_u = hi + r
    lo_u = lo + r
    total = np.zeros_like(r)
    for k in range(len(shifted)):
        ck = shifted[k]
        piece = ck * (_antideriv_poly_log([0] * k + [1], hi_u)
                      - _antideriv_poly_log([0] * k + [1], lo_u))
        total += piece
    return total


@lru_cache(maxsize=16)
def log_pair_kernel(m):
    """J(r) = int psi(w) log|w + r| dw for offsets r = 0..m-1."""
    r = np.arange(m, dtype=float)
    out = np.zeros(m)
    for (lo, hi), coeffs in _PSI_PIECES:
        out += _poly_log_integral(coeffs, lo, hi, r)
    return out


@lru_cache(maxsize=16)
def log_point_kernel(m):
    """G0(r) = int phi(v) log|r - v| dv for offsets r = 0..m-1 (even in r)."""
    r = np.arange(m, dtype=float)
    out = np.zeros(m)
    # substitute u = v - r: log|r - v| = log|u|, phi piece p(v) = p(u + r)
    for (lo, hi), coeffs in _PHI_PIECES:
        out += _poly_log_integral(coeffs, lo, hi, -r)
    return out


@lru_cache(maxsize=16)
def hilbert_kernel(m):
    """H(r) = pv int phi(v) / (r - v) dv for r = -(m-1)..(m-1) (odd in r)."""
    r = np.arange(-(m - 1), m, dtype=float)

    def xlogx(x):
        ax = np.abs(x)
        return np.where(ax == 0.0, 0.0, x * np.log(np.where(ax == 0, 1, ax)))

    return xlogx(1.0 + r) + xlogx(r - 1.0) - 2.0 * xlogx(r)


def cauchy_kernel(z):
    """C(z) = int phi(v) / (z - v) dv for complex z off [-1, 1]."""
    z = np.asarray(z, dtype=complex)
    return ((1.0 + z) * np.log(z + 1.0) + (z - 1.0) * np.log(z - 1.0)
            - 2.0 * z * np.log(z))


def cauchy_kernel_prime(z):
    """d/dz of cauchy_kernel."""
    z = np.asarray(z, dtype=complex)
    return np.log(z + 1.0) + np.log(z - 1.0) - 2.0 * np.log(z)


def toeplitz_apply(kernel_full, vec):
    """(T v)_p = sum_q kernel_full[p - q + (m-1)] v_q via FFT convolution.

    ``kernel_full`` has length 2m-1 covering offsets -(m-1)..(m-1).
    """
    from scipy.signal import fftconvolve
    m = vec.shape[0]
    out = fftconvolve(vec, kernel_full)
    return out[m - 1:2 * m - 1]


def symmetric_full(kernel_half):
    """Extend an even kernel given for r = 0..m-1 to r = -(m-1)..(m-1)."""
    return np.concatenate([kernel_half[:0:-1], kernel_half])
