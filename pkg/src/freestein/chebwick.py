"""Chebyshev polynomials of the second kind and the Wick divergence calculus.

The divergence operators live on a mixed algebra: ``n_x`` generators carry
arbitrary free 1D laws and ``n_s`` generators are standard semicircular,
the two families free from each other.  Mixed polynomials are ordinary
NCPoly instances over the union alphabet; the x generators occupy indices
1..n_x and the s generators n_x+1..n_x+n_s.

Two routes to the divergence are provided and tested against each other:

* ``wick_divergence`` implements the fast recursion for tensors whose
  legs contain x letters only;
* ``diff_quotient_adjoint`` is the order-2 adjoint of the difference
  quotient with respect to one s generator, valid for arbitrary mixed
  legs, composed leg by leg in ``iterated_divergence`` and
  ``multivariate_chebyshev``.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DimensionError, PreconditionError
from .ncalg import NCPoly, TensorPoly, diff_quotient
from .tracestate import CumulantSeq, FreeFamily


def chebyshev_u(k):
    """U_k by the three-term recursion t*U_n = U_{n+1} + U_{n-1}; exact."""
    if k < 0:
        raise DimensionError("order must be >= 0")
    t = NCPoly.gen(1, 1)
    prev = NCPoly.one(1, Fraction(1))
    if k == 0:
        return prev
    cur = t
    for _ in range(k - 1):
        prev, cur = cur, t * cur - prev
    return cur


class MixedAlgebra:
    """Bookkeeping for polynomials in free x and semicircular s generators."""

    def __init__(self, x_laws, n_s=1):
        self.n_x = len(x_laws)
        self.n_s = n_s
        self.n = self.n_x + n_s
        laws = list(x_laws) + [CumulantSeq.semicircular(1)
                               for _ in range(n_s)]
        self.trace = FreeFamily(laws)

    def s_index(self, i=1):
        if not 1 <= i <= self.n_s:
            raise DimensionError(f"s index {i} outside 1..{self.n_s}")
        return self.n_x + i

    def is_s_letter(self, letter):
        return letter > self.n_x

    def s_gen(self, i=1):
        return NCPoly.gen(self.n, self.s_index(i))

    def embed_x_word(self, w):
        for letter in w:
            if letter > self.n_x:
                raise DimensionError(f"letter {letter} is not an x generator")
        return w

    def embed_x_poly(self, p):
        """Reinterpret a polynomial over the x alphabet in the union alphabet."""
        if p.n == self.n:
            return p
        if p.n > self.n_x:
            raise DimensionError("polynomial alphabet exceeds the x block")
        return NCPoly(self.n, dict(p.coeffs))

    def embed_x_tensor(self, T):
        if T.n == self.n:
            return T
        if T.n > self.n_x:
            raise DimensionError("tensor alphabet exceeds the x block")
        return TensorPoly(self.n, T.order, dict(T.coeffs))

    def x_only(self, w):
        return all(letter <= self.n_x for letter in w)

    def inner(self, p, q):
        return self.trace.inner(p, q)

    def tensor_inner(self, A, B):
        return self.trace.tensor_inner(A, B)


def wick_divergence(f, algebra, k=None, s=1):
    """Divergence of a pure-x-leg tensor against one semicircular generator.

    Recursion on elementary tensors a_1 (x) ... (x) a_{k+1}:

        a_1 S div(a_2 (x) ... ) - tau(a_2) a_1 div(a_3 (x) ...)

    with div(a) = a and div(a (x) b) = a S b.  Linear in ``f``.
    """
    f = algebra.embed_x_tensor(f)
    if k is not None and f.order != k + 1:
        raise DimensionError(f"tensor order {f.order} != k+1 = {k + 1}")
    s_letter = algebra.s_index(s)
    for legs, _ in f.coeffs.items():
        for w in legs:
            if not algebra.x_only(w):
                raise PreconditionError(
                    "wick_divergence needs x-only legs; use "
                    "diff_quotient_adjoint for mixed legs")
    out = NCPoly.zero(algebra.n)
    for legs, c in f.coeffs.items():
        out = out + c * _wick_elementary(legs, algebra, s_letter)
    return out


def _wick_elementary(legs, algebra, s_letter):
    n = algebra.n
    if len(legs) == 1:
        return NCPoly.monomial(n, legs[0])
    if len(legs) == 2:
        return NCPoly.monomial(n, legs[0] + (s_letter,) + legs[1])
    head = NCPoly.monomial(n, legs[0] + (s_letter,))
    term1 = head * _wick_elementary(legs[1:], algebra, s_letter)
    tau2 = algebra.trace.word(legs[1])
    if tau2 == 0:
        return term1
    term2 = NCPoly.monomial(n, legs[0]) * _wick_elementary(
        legs[2:], algebra, s_letter)
    return term1 - tau2 * term2


def diff_quotient_adjoint(T, algebra, s=1):
    """Adjoint of the difference quotient in one s generator, on order-2 tensors.

    On an elementary tensor P (x) Q the value is

        P s Q - (id (x) tau)(d_s P) Q - P (tau (x) id)(d_s Q);

    the partial traces act on the legs adjacent to the inserted s.  The
    defining property <adjoint(T), p> = <T, d_s p> holds for every mixed
    polynomial p, which the test-suite checks directly.
    """
    T = algebra.embed_x_tensor(T)
    if T.order != 2:
        raise DimensionError("adjoint is defined on order-2 tensors")
    s_letter = algebra.s_index(s)
    tr = algebra.trace
    out = NCPoly.zero(algebra.n)
    for (a, b), c in T.coeffs.items():
        out = out + c * NCPoly.monomial(algebra.n, a + (s_letter,) + b)
        # trace the right leg of d_s(a), keep the left
        for pos, letter in enumerate(a):
            if letter == s_letter:
                t_right = tr.word(a[pos + 1:])
                if t_right != 0:
                    out = out - (c * t_right) * NCPoly.monomial(
                        algebra.n, a[:pos] + b)
        # trace the left leg of d_s(b), keep the right
        for pos, letter in enumerate(b):
            if letter == s_letter:
                t_left = tr.word(b[:pos])
                if t_left != 0:
                    out = out - (c * t_left) * NCPoly.monomial(
                        algebra.n, a + b[pos + 1:])
    return out


def _adjoint_on_last_two_legs(T, algebra, s=1):
    """Contract the last two legs of an order-m tensor with the adjoint."""
    if T.order < 2:
        raise DimensionError("need at least two legs")
    out = {}
    for legs, c in T.coeffs.items():
        pair = TensorPoly(algebra.n, 2, {(legs[-2], legs[-1]): 1})
        val = diff_quotient_adjoint(pair, algebra, s)
        for w, cw in val.coeffs.items():
            key = legs[:-2] + (w,)
            s_ = out.get(key, 0) + c * cw
            if s_ == 0:
                out.pop(key, None)
            else:
                out[key] = s_
    return TensorPoly(algebra.n, T.order - 1, out)


def iterated_divergence(T, algebra, indices):
    """Compose adjoints per index tuple: innermost acts on the last legs.

    For indices (i_1, ..., i_k) and an order-(k+1) tensor this computes
    adj_{i_1} o (id (x) adj_{i_2}) o ... o (id^(k-1) (x) adj_{i_k}).
    """
    T = algebra.embed_x_tensor(T)
    if T.order != len(indices) + 1:
        raise DimensionError("tensor order must be len(indices)+1")
    for i in reversed(indices):
        T = _adjoint_on_last_two_legs(T, algebra, i)
    return T.as_poly()


def multivariate_chebyshev(k, indices, algebra=None):
    """U_k^{i_1..i_k}: iterated divergence of the unit (k+1)-tensor.

    For a single s generator and equal indices this reproduces
    ``chebyshev_u(k)`` evaluated at that generator.
    """
    if k < 1 or len(indices) != k:
        raise DimensionError("need k >= 1 indices")
    if algebra is None:
        algebra = MixedAlgebra([], n_s=max(indices))
    unit = TensorPoly.unit(algebra.n, k + 1, Fraction(1))
    return iterated_divergence(unit, algebra, tuple(indices))


def substitute_single_variable(p, q):
    """p(q) for a one-variable polynomial p and any polynomial q."""
    if p.n != 1:
        raise DimensionError("substitution source must be univariate")
    out = NCPoly.zero(q.n)
    for w, c in p.coeffs.items():
        term = NCPoly.one(q.n, c)
        for _ in w:
            term = term * q
        out = out + term
    return out
