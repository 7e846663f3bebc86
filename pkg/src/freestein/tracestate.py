"""Tracial states on noncommutative words and tensor inner products.

Three state families are provided:

* semicircular families with a general covariance matrix, evaluated by the
  Wick formula (sum over non-crossing pairings);
* free families of single-variable laws given by free cumulant sequences,
  evaluated by the vanishing of mixed cumulants;
* raw one-dimensional moment tables.

Evaluation is exact when the data is exact (Fraction), floating otherwise.
The free-family evaluator exploits traciality: a word is rotated so that a
semicircular letter comes first, that letter is paired against each later
occurrence of the same generator, and the two contiguous segments recurse.
Single-generator segments reduce to plain moment lookups, which keeps even
degree ~40 mixed words cheap.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import DimensionError, DomainError, TruncationError
from .ncalg import NCPoly, TensorArray, TensorPoly, jacobian, word_star

_HANKEL_TOL = 1e-10


# -- moment / cumulant transforms ----------------------------------------

def moments_from_cumulants(kappa, upto=None):
    """Moments m_1..m_upto of the law with free cumulants kappa_1..kappa_M.

    Uses the recursion m_n = sum_s kappa_s * [z^(n-s)] M(z)^s with
    M(z) = sum m_j z^j; exact for exact inputs.
    """
    kappa = list(kappa)
    if upto is None:
        upto = len(kappa)
    if upto > len(kappa):
        raise TruncationError(
            f"need {upto} cumulants, have {len(kappa)}")
    m = [1]  # m_0
    for n in range(1, upto + 1):
        power = [1]  # M(z)^0
        total = 0
        for s in range(1, n + 1):
            # M(z)^s, truncated at degree n - s
            power = _series_mul(power, m, n - s)
            if n - s < len(power):
                total += kappa[s - 1] * power[n - s]
        m.append(total)
    return m[1:]


def cumulants_from_moments(moments, upto=None):
    """Inverse transform: free cumulants from raw moments m_1..m_M."""
    moments = list(moments)
    if upto is None:
        upto = len(moments)
    if upto > len(moments):
        raise TruncationError(
            f"need {upto} moments, have {len(moments)}")
    m = [1] + moments
    kappa = []
    for n in range(1, upto + 1):
        power = [1]
        rest = 0
        for s in range(1, n):
            power = _series_mul(power, m, n - s)
            if n - s < len(power):
                rest += kappa[s - 1] * power[n - s]
        kappa.append(m[n] - rest)
    return kappa


def _series_mul(a, b, cap):
    out = [0] * (cap + 1)
    for i, ai in enumerate(a):
        if i > cap or ai == 0:
            continue
        for j, bj in enumerate(b):
            if i + j > cap:
                break
            if bj != 0:
                out[i + j] += ai * bj
    return out


def cumulant_moment_transform(values, direction):
    """Spec-facing wrapper; direction is 'moments' or 'cumulants' (target)."""
    if direction == "cumulants":
        return cumulants_from_moments(values)
    if direction == "moments":
        return moments_from_cumulants(values)
    raise DomainError("direction must be 'moments' or 'cumulants'")


def hankel_min_eig(moments):
    """Smallest eigenvalue of the Hankel matrix [m_{i+j}] that the moments fill."""
    m = [1] + [float(x) for x in moments]
    d = (len(m) - 1) // 2
    H = np.array([[m[i + j] for j in range(d + 1)] for i in range(d + 1)])
    return float(np.linalg.eigvalsh(H)[0])


class CumulantSeq:
    """Free cumulants kappa_1..kappa_M of one self-adjoint variable.

    ``complete=True`` declares that all higher cumulants vanish (e.g. a
    semicircular law is complete at M=2).  Incomplete sequences raise
    TruncationError when an evaluation needs more than they carry.
    """

    def __init__(self, values, complete=False, validate=True):
        self.values = list(values)
        self.complete = complete
        self._moments = [1]
        if validate and self.values:
            self._check_positive()

    def _check_positive(self):
        mom = moments_from_cumulants(self.values)
        if len(mom) >= 2 and hankel_min_eig(mom) < -_HANKEL_TOL * max(
                1.0, max(abs(float(x)) for x in mom)):
            raise DomainError("cumulant sequence has a non-PSD Hankel matrix")

    @classmethod
    def semicircular(cls, var=1):
        return cls([0, var], complete=True, validate=False)

    @classmethod
    def from_moments(cls, moments, complete=False, validate=True):
        return cls(cumulants_from_moments(moments), complete=complete,
                   validate=validate)

    @classmethod
    def from_atoms(cls, atoms, weights, length):
        """Law of a finite atomic measure, cumulants up to ``length``."""
        total = sum(weights)
        mom = [sum(w * a ** j for a, w in zip(atoms, weights)) / total
               for j in range(1, length + 1)]
        return cls.from_moments(mom, validate=False)

    def __len__(self):
        return len(self.values)

    def kappa(self, r):
        if r <= len(self.values):
            return self.values[r - 1]
        if self.complete:
            return 0
        raise TruncationError(
            f"cumulant of order {r} not available (have {len(self.values)})")

    @property
    def pairing_only(self):
        """True when only kappa_2 can be nonzero (semicircular-type)."""
        known_zero = all(v == 0 for i, v in enumerate(self.values) if i != 1)
        return known_zero and self.complete

    def moment(self, j):
        if j < 0:
            raise DomainError("moment order must be >= 0")
        while len(self._moments) <= j:
            n = len(self._moments)
            if not self.complete and n > len(self.values):
                raise TruncationError(
                    f"moment of order {n} needs cumulants up to {n}, "
                    f"have {len(self.values)}")
            kap = [self.kappa(r) for r in range(1, n + 1)]
            self._moments.append(moments_from_cumulants(kap, n)[-1])
        return self._moments[j]

    def moments(self, upto):
        return [self.moment(j) for j in range(1, upto + 1)]

    def dilate(self, scale):
        """Cumulants of scale * X (kappa_m scales by scale**m)."""
        return CumulantSeq([v * scale ** (i + 1)
                            for i, v in enumerate(self.values)],
                           complete=self.complete, validate=False)


# -- trace states ----------------------------------------------------------

class TraceState:
    """Base class: a tracial unital linear functional on words."""

    def __init__(self, n, norm_bound=None):
        self.n = n
        self.norm_bound = norm_bound
        self._cache = {}

    # subclasses implement _word_uncached
    def word(self, w):
        w = tuple(w)
        for i in w:
            if not 1 <= i <= self.n:
                raise DimensionError(f"letter {i} outside 1..{self.n}")
        if not w:
            return 1
        hit = self._cache.get(w)
        if hit is None:
            hit = self._word_uncached(w)
            self._cache[w] = hit
        return hit

    def poly_trace(self, p):
        if p.n != self.n:
            raise DimensionError("generator count mismatch")
        return sum((c * self.word(w) for w, c in p.coeffs.items()), start=0)

    def moment(self, j):
        if self.n != 1:
            raise DimensionError("moment(j) requires a one-generator state")
        return self.word((1,) * j)

    def inner(self, p, q):
        """<p, q> = trace(q* p)."""
        return self.poly_trace(q.star() * p)

    def tensor_inner(self, A, B):
        """<A, B> = trace^(x m) (A . B*), legwise."""
        if A.n != self.n or B.n != self.n or A.order != B.order:
            raise DimensionError("tensor shapes differ")
        total = 0
        for ka, ca in A.coeffs.items():
            for kb, cb in B.coeffs.items():
                prod = ca * _conj(cb)
                if prod == 0:
                    continue
                for wa, wb in zip(ka, kb):
                    prod *= self.word(wa + word_star(wb))
                    if prod == 0:
                        break
                total += prod
        return total

    def array_inner(self, A, B):
        if A.n != self.n or B.n != self.n or A.k != B.k:
            raise DimensionError("array shapes differ")
        total = 0
        for idx in set(A.entries) & set(B.entries):
            total += self.tensor_inner(A.entries[idx], B.entries[idx])
        return total

    def norm_estimate(self):
        return self.norm_bound


def _conj(c):
    return c.conjugate() if isinstance(c, complex) else c


class SemicircularFamily(TraceState):
    """n-tuple of jointly semicircular variables with covariance C."""

    def __init__(self, covariance):
        C = [list(row) for row in covariance]
        n = len(C)
        for row in C:
            if len(row) != n:
                raise DimensionError("covariance must be square")
        Cf = np.array([[float(x) for x in row] for row in C])
        if n and np.linalg.eigvalsh((Cf + Cf.T) / 2)[0] < -_HANKEL_TOL:
            raise DomainError("covariance is not positive semidefinite")
        bound = 2 * max((float(C[i][i]) for i in range(n)), default=0) ** 0.5
        super().__init__(n, norm_bound=bound)
        self.covariance = C

    @classmethod
    def standard(cls, n=1, rho=1):
        if isinstance(rho, int):
            rho = Fraction(rho)
        c = 1 / rho
        return cls([[c if i == j else 0 for j in range(n)] for i in range(n)])

    def _word_uncached(self, w):
        if len(w) % 2:
            return 0
        C = self.covariance
        first = w[0]
        total = 0
        for p in range(1, len(w), 2):
            cpair = C[first - 1][w[p] - 1]
            if cpair == 0:
                continue
            total += cpair * self.word(w[1:p]) * self.word(w[p + 1:])
        return total


class FreeFamily(TraceState):
    """Free product of single-variable laws, one CumulantSeq per generator."""

    def __init__(self, laws, norm_bound=None):
        super().__init__(len(laws), norm_bound=norm_bound)
        self.laws = list(laws)
        self._pairing_only = [law.pairing_only for law in self.laws]

    def _word_uncached(self, w):
        colors = set(w)
        if len(colors) == 1:
            return self.laws[w[0] - 1].moment(len(w))
        # rotate a pairing-only (semicircular-type) letter to the front
        for shift, letter in enumerate(w):
            if self._pairing_only[letter - 1]:
                if shift:
                    w = w[shift:] + w[:shift]
                return self._pair_first(w)
        return self._block_first(w)

    def _pair_first(self, w):
        g = w[0]
        var = self.laws[g - 1].kappa(2)
        if var == 0:
            return 0
        total = 0
        for p in range(1, len(w)):
            if w[p] == g:
                inner = self.word(w[1:p])
                if inner != 0:
                    total += var * inner * self.word(w[p + 1:])
        return total

    def _block_first(self, w):
        g = w[0]
        law = self.laws[g - 1]
        candidates = [p for p in range(1, len(w)) if w[p] == g]

        total = 0

        def extend(last, count, prod):
            nonlocal total
            kap = law.kappa(count)
            if kap != 0:
                total += kap * prod * self.word(w[last + 1:])
            for p in candidates:
                if p > last:
                    seg = self.word(w[last + 1:p])
                    if seg != 0:
                        extend(p, count + 1, prod * seg)

        extend(0, 1, 1)
        return total


class MomentTable1D(TraceState):
    """One-generator state from a raw moment table m_1..m_M."""

    def __init__(self, moments, norm_bound=None, validate=True):
        moments = list(moments)
        if validate and len(moments) >= 2:
            scale = max(1.0, max(abs(float(m)) for m in moments))
            if hankel_min_eig(moments) < -_HANKEL_TOL * scale:
                raise DomainError("moment table has a non-PSD Hankel matrix")
        if norm_bound is None and moments:
            d2 = len(moments) - (len(moments) % 2)
            if d2 >= 2:
                norm_bound = max(1.0, abs(float(moments[d2 - 1])) ** (1.0 / d2))
        super().__init__(1, norm_bound=norm_bound)
        self.table = moments

    def _word_uncached(self, w):
        j = len(w)
        if j > len(self.table):
            raise TruncationError(
                f"moment of order {j} not tabulated (have {len(self.table)})")
        return self.table[j - 1]


def semicircular_trace(w, covariance):
    """Wick formula for one word; convenience wrapper."""
    return SemicircularFamily(covariance).word(w)


def free_family_trace(w, laws):
    """Trace of a word under a free family of 1D laws."""
    return FreeFamily(laws).word(w)


def pairing(A, B, trace):
    """Inner product of two polynomials / tensors / tensor arrays."""
    if isinstance(A, NCPoly) and isinstance(B, NCPoly):
        return trace.inner(A, B)
    if isinstance(A, TensorPoly) and isinstance(B, TensorPoly):
        return trace.tensor_inner(A, B)
    if isinstance(A, TensorArray) and isinstance(B, TensorArray):
        return trace.array_inner(A, B)
    raise DimensionError("pairing arguments must share their shape")


def all_words(n, degree, include_unit=True):
    """All words over n generators of length <= degree, graded order."""
    out = [()] if include_unit else []
    layer = [()]
    for _ in range(degree):
        layer = [w + (i,) for w in layer for i in range(1, n + 1)]
        out.extend(layer)
    return out


def schwinger_dyson_residual(trace, rho, degree):
    """Max defect of the free Gibbs equation with quadratic potential.

    For every generator j and monomial p of degree <= degree, compares
    rho * tau(p* t_j) against (tau (x) tau)((d_j p)*); returns the largest
    absolute gap.  Zero exactly characterises the free Gibbs state.
    """
    from .ncalg import diff_quotient
    worst = 0
    for w in all_words(trace.n, degree):
        pstar = word_star(w)
        for j in range(1, trace.n + 1):
            lhs = rho * trace.word(pstar + (j,))
            rhs = 0
            p = NCPoly.monomial(trace.n, w)
            for (a, b), c in diff_quotient(p, j).coeffs.items():
                rhs += c * trace.word(word_star(a)) * trace.word(word_star(b))
            gap = abs(lhs - rhs)
            if gap > worst:
                worst = gap
    return worst


def sobolev_seminorm_sq(P, k, trace):
    """Squared H^k seminorm: the norm of the order-k Jacobian under the state."""
    J = jacobian(P, k)
    return trace.array_inner(J, J)


def sobolev_seminorm(P, k, trace):
    val = sobolev_seminorm_sq(P, k, trace)
    return float(val) ** 0.5 if val > 0 else 0.0


def monomial_gram(trace, degree):
    """Gram matrix of all words of degree <= degree under the state."""
    words = all_words(trace.n, degree)
    m = len(words)
    G = np.zeros((m, m))
    for i, wi in enumerate(words):
        for j, wj in enumerate(words):
            G[i, j] = float(trace.word(word_star(wj) + wi))
    return words, G
