"""Sparse noncommutative polynomial calculus.

Polynomials live in the free *-algebra on ``n`` self-adjoint generators.
Words are plain tuples of generator indices (1-based); the empty tuple is
the unit monomial.  Coefficients may be exact (``int``/``Fraction``) or
floating (``float``/``complex``); arithmetic never changes the scalar kind
on its own.

The derivation operators implemented here are the free difference quotient
(splitting a word at each occurrence of a generator into a two-leg tensor),
the cyclic derivative, and their iterated/tensorised forms.  Tensors are
multiplied leg by leg and starred leg by leg; inner products against a
tracial state are therefore plain products of leg traces (see tracestate).
"""

from __future__ import annotations

import json
from fractions import Fraction

from .errors import DimensionError, DomainError, SchemaError

Word = tuple  # tuple[int, ...], indices in 1..n


def conj_scalar(c):
    """Complex conjugate that tolerates Fraction/int scalars."""
    return c.conjugate() if isinstance(c, complex) else c


def word_mul(u, v):
    return u + v


def word_star(w):
    return tuple(reversed(w))


def _check_word(w, n):
    for i in w:
        if not 1 <= i <= n:
            raise DimensionError(f"letter {i} outside 1..{n}")


def _word_sort_key(w):
    # graded lexicographic; gives deterministic iteration everywhere
    return (len(w), w)


class NCPoly:
    """Sparse polynomial: map word -> nonzero coefficient."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n, coeffs=None):
        if n < 0:
            raise DimensionError("generator count must be >= 0")
        self.n = n
        clean = {}
        if coeffs:
            for w, c in coeffs.items():
                _check_word(w, n)
                if c != 0:
                    clean[tuple(w)] = c
        self.coeffs = clean

    # -- constructors ------------------------------------------------

    @classmethod
    def zero(cls, n):
        return cls(n)

    @classmethod
    def one(cls, n, scalar=1):
        return cls(n, {(): scalar})

    @classmethod
    def gen(cls, n, j):
        """The generator t_j."""
        if not 1 <= j <= n:
            raise DimensionError(f"generator index {j} outside 1..{n}")
        return cls(n, {(j,): 1})

    @classmethod
    def monomial(cls, n, word, scalar=1):
        return cls(n, {tuple(word): scalar})

    # -- ring structure ----------------------------------------------

    def _coerce(self, other):
        if isinstance(other, NCPoly):
            if other.n != self.n:
                raise DimensionError(
                    f"generator counts differ: {self.n} vs {other.n}")
            return other
        if isinstance(other, (int, float, complex, Fraction)):
            return NCPoly.one(self.n, other) if other != 0 else NCPoly.zero(self.n)
        return None

    def __add__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        out = dict(self.coeffs)
        for w, c in q.coeffs.items():
            s = out.get(w, 0) + c
            if s == 0:
                out.pop(w, None)
            else:
                out[w] = s
        p = NCPoly.__new__(NCPoly)
        p.n, p.coeffs = self.n, out
        return p

    __radd__ = __add__

    def __neg__(self):
        p = NCPoly.__new__(NCPoly)
        p.n = self.n
        p.coeffs = {w: -c for w, c in self.coeffs.items()}
        return p

    def __sub__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return self + (-q)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, Fraction)):
            if other == 0:
                return NCPoly.zero(self.n)
            p = NCPoly.__new__(NCPoly)
            p.n = self.n
            p.coeffs = {w: c * other for w, c in self.coeffs.items()}
            return p
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        out = {}
        for w1, c1 in self.coeffs.items():
            for w2, c2 in q.coeffs.items():
                w = w1 + w2
                s = out.get(w, 0) + c1 * c2
                if s == 0:
                    out.pop(w, None)
                else:
                    out[w] = s
        p = NCPoly.__new__(NCPoly)
        p.n, p.coeffs = self.n, out
        return p

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, Fraction)):
            return self * other
        return NotImplemented

    def __pow__(self, k):
        if k < 0:
            raise DomainError("negative powers are not defined")
        out = NCPoly.one(self.n)
        for _ in range(k):
            out = out * self
        return out

    def star(self):
        """Involution: reverse words, conjugate coefficients."""
        p = NCPoly.__new__(NCPoly)
        p.n = self.n
        p.coeffs = {word_star(w): conj_scalar(c) for w, c in self.coeffs.items()}
        return p

    # -- queries -----------------------------------------------------

    def degree(self):
        """Max word length; -1 for the zero polynomial."""
        return max((len(w) for w in self.coeffs), default=-1)

    def is_zero(self):
        return not self.coeffs

    def constant_term(self):
        return self.coeffs.get((), 0)

    def terms(self):
        """Deterministic (word, coeff) iteration in graded-lex order."""
        for w in sorted(self.coeffs, key=_word_sort_key):
            yield w, self.coeffs[w]

    def map_coeffs(self, f):
        return NCPoly(self.n, {w: f(c) for w, c in self.coeffs.items()})

    def __eq__(self, other):
        if isinstance(other, (int, float, complex, Fraction)):
            other = NCPoly.one(self.n, other) if other != 0 else NCPoly.zero(self.n)
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, frozenset(self.coeffs.items())))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        bits = []
        for w, c in self.terms():
            mono = "*".join(f"t{i}" for i in w) if w else "1"
            bits.append(f"({c})*{mono}")
        return " + ".join(bits)


def radius_norm(p, R):
    """Sum of |coefficient| * R**degree over the words of ``p``.

    The absolute value makes this a genuine norm on the polynomial algebra;
    it is submultiplicative.
    """
    if R <= 0:
        raise DomainError("radius must be positive")
    return sum(abs(c) * R ** len(w) for w, c in p.coeffs.items())


class TensorPoly:
    """Element of the m-fold algebraic tensor power of the polynomial algebra.

    Keys are m-tuples of words.  Multiplication and involution act leg by
    leg; ``tensor`` concatenates legs.  Order 1 coincides with NCPoly and
    can be converted with :meth:`as_poly`.
    """

    __slots__ = ("n", "order", "coeffs")

    def __init__(self, n, order, coeffs=None):
        if order < 1:
            raise DimensionError("tensor order must be >= 1")
        self.n = n
        self.order = order
        clean = {}
        if coeffs:
            for legs, c in coeffs.items():
                if len(legs) != order:
                    raise DimensionError(
                        f"key has {len(legs)} legs, expected {order}")
                for w in legs:
                    _check_word(w, n)
                if c != 0:
                    clean[tuple(tuple(w) for w in legs)] = c
        self.coeffs = clean

    @classmethod
    def zero(cls, n, order):
        return cls(n, order)

    @classmethod
    def unit(cls, n, order, scalar=1):
        """1 tensor 1 tensor ... tensor 1."""
        return cls(n, order, {((),) * order: scalar})

    @classmethod
    def elementary(cls, polys):
        """Outer tensor product of a list of NCPoly factors."""
        out = TensorPoly.from_poly(polys[0])
        for p in polys[1:]:
            out = out.tensor(TensorPoly.from_poly(p))
        return out

    @classmethod
    def from_poly(cls, p):
        return cls(p.n, 1, {(w,): c for w, c in p.coeffs.items()})

    def as_poly(self):
        if self.order != 1:
            raise DimensionError("only order-1 tensors convert to NCPoly")
        return NCPoly(self.n, {legs[0]: c for legs, c in self.coeffs.items()})

    def _check_same(self, other):
        if not isinstance(other, TensorPoly):
            raise DimensionError("expected TensorPoly")
        if other.n != self.n or other.order != self.order:
            raise DimensionError("tensor shapes differ")

    def __add__(self, other):
        self._check_same(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            s = out.get(k, 0) + c
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
        t = TensorPoly.__new__(TensorPoly)
        t.n, t.order, t.coeffs = self.n, self.order, out
        return t

    def __neg__(self):
        t = TensorPoly.__new__(TensorPoly)
        t.n, t.order = self.n, self.order
        t.coeffs = {k: -c for k, c in self.coeffs.items()}
        return t

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, Fraction)):
            if other == 0:
                return TensorPoly.zero(self.n, self.order)
            t = TensorPoly.__new__(TensorPoly)
            t.n, t.order = self.n, self.order
            t.coeffs = {k: c * other for k, c in self.coeffs.items()}
            return t
        self._check_same(other)
        out = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = tuple(w1 + w2 for w1, w2 in zip(k1, k2))
                s = out.get(k, 0) + c1 * c2
                if s == 0:
                    out.pop(k, None)
                else:
                    out[k] = s
        t = TensorPoly.__new__(TensorPoly)
        t.n, t.order, t.coeffs = self.n, self.order, out
        return t

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, Fraction)):
            return self * other
        return NotImplemented

    def star(self):
        t = TensorPoly.__new__(TensorPoly)
        t.n, t.order = self.n, self.order
        t.coeffs = {tuple(word_star(w) for w in k): conj_scalar(c)
                    for k, c in self.coeffs.items()}
        return t

    def tensor(self, other):
        if other.n != self.n:
            raise DimensionError("generator counts differ")
        out = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = k1 + k2
                s = out.get(k, 0) + c1 * c2
                if s == 0:
                    out.pop(k, None)
                else:
                    out[k] = s
        return TensorPoly(self.n, self.order + other.order, out)

    def is_zero(self):
        return not self.coeffs

    def terms(self):
        for k in sorted(self.coeffs, key=lambda legs: tuple(map(_word_sort_key, legs))):
            yield k, self.coeffs[k]

    def max_leg_degree(self):
        return max((max(len(w) for w in k) for k in self.coeffs), default=-1)

    def __eq__(self, other):
        if not isinstance(other, TensorPoly):
            return NotImplemented
        return (self.n == other.n and self.order == other.order
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.n, self.order, frozenset(self.coeffs.items())))

    def __repr__(self):
        if not self.coeffs:
            return f"0 (order {self.order})"
        bits = []
        for k, c in self.terms():
            legs = " (x) ".join(
                "*".join(f"t{i}" for i in w) if w else "1" for w in k)
            bits.append(f"({c})*[{legs}]")
        return " + ".join(bits)


def flip(T):
    """Swap the two legs of an order-2 tensor."""
    if T.order != 2:
        raise DimensionError("flip is defined for order-2 tensors only")
    return TensorPoly(T.n, 2, {(b, a): c for (a, b), c in T.coeffs.items()})


def diff_quotient(p, j):
    """Free difference quotient: split each word at every occurrence of t_j."""
    if not 1 <= j <= p.n:
        raise DimensionError(f"generator index {j} outside 1..{p.n}")
    out = {}
    for w, c in p.coeffs.items():
        for pos, letter in enumerate(w):
            if letter == j:
                k = (w[:pos], w[pos + 1:])
                s = out.get(k, 0) + c
                if s == 0:
                    out.pop(k, None)
                else:
                    out[k] = s
    return TensorPoly(p.n, 2, out)


def first_leg_diff(T, j):
    """Apply the difference quotient to the first leg of a tensor.

    Raises grade by one: an order-m tensor becomes order m+1.
    """
    if not 1 <= j <= T.n:
        raise DimensionError(f"generator index {j} outside 1..{T.n}")
    out = {}
    for legs, c in T.coeffs.items():
        w = legs[0]
        for pos, letter in enumerate(w):
            if letter == j:
                k = (w[:pos], w[pos + 1:]) + legs[1:]
                s = out.get(k, 0) + c
                if s == 0:
                    out.pop(k, None)
                else:
                    out[k] = s
    return TensorPoly(T.n, T.order + 1, out)


def iterated_diff(p, indices):
    """Iterated difference quotient for an index tuple (i_1, ..., i_k).

    The last index acts first on the polynomial, earlier ones act on the
    first leg of the intermediate tensors; the result has k+1 legs.
    """
    if not indices:
        return TensorPoly.from_poly(p)
    T = diff_quotient(p, indices[-1])
    for j in reversed(indices[:-1]):
        T = first_leg_diff(T, j)
    return T


def cyclic_gradient(p):
    """All n cyclic derivatives; component j sends each split a t_j b to b a."""
    out = [dict() for _ in range(p.n)]
    for w, c in p.coeffs.items():
        for pos, letter in enumerate(w):
            d = out[letter - 1]
            k = w[pos + 1:] + w[:pos]
            s = d.get(k, 0) + c
            if s == 0:
                d.pop(k, None)
            else:
                d[k] = s
    return [NCPoly(p.n, d) for d in out]


class TensorArray:
    """(k+1)-index array of order-(k+1) tensors; missing entries read as zero."""

    __slots__ = ("n", "k", "entries")

    def __init__(self, n, k, entries=None):
        if k < 1:
            raise DimensionError("array order must be >= 1")
        self.n = n
        self.k = k
        clean = {}
        if entries:
            for idx, T in entries.items():
                idx = tuple(idx)
                if len(idx) != k + 1:
                    raise DimensionError(
                        f"index {idx} has {len(idx)} slots, expected {k + 1}")
                for i in idx:
                    if not 1 <= i <= n:
                        raise DimensionError(f"index component {i} outside 1..{n}")
                if T.order != k + 1 or T.n != n:
                    raise DimensionError("entry tensor shape mismatch")
                if not T.is_zero():
                    clean[idx] = T
        self.entries = clean

    def entry(self, idx):
        return self.entries.get(tuple(idx), TensorPoly.zero(self.n, self.k + 1))

    def indices(self):
        return sorted(self.entries)

    def __eq__(self, other):
        if not isinstance(other, TensorArray):
            return NotImplemented
        return (self.n == other.n and self.k == other.k
                and self.entries == other.entries)

    def __repr__(self):
        lines = [f"TensorArray(n={self.n}, k={self.k})"]
        for idx in self.indices():
            lines.append(f"  {idx}: {self.entries[idx]!r}")
        return "\n".join(lines)


def jacobian(P, k=1):
    """Order-k Jacobian of a tuple of polynomials.

    Entry (j, i_1, ..., i_k) is the iterated difference quotient of P[j-1]
    with respect to (i_1, ..., i_k).
    """
    if not P:
        raise DimensionError("empty polynomial tuple")
    if k < 1:
        raise DimensionError("jacobian order must be >= 1")
    n = P[0].n
    if len(P) != n:
        raise DimensionError(f"need {n} components, got {len(P)}")
    for p in P:
        if p.n != n:
            raise DimensionError("components disagree on generator count")
    entries = {}
    for j, p in enumerate(P, start=1):
        for idx in _index_tuples(n, k):
            T = iterated_diff(p, idx)
            if not T.is_zero():
                entries[(j,) + idx] = T
    return TensorArray(n, k, entries)


def _index_tuples(n, k):
    if k == 0:
        yield ()
        return
    for rest in _index_tuples(n, k - 1):
        for i in range(1, n + 1):
            yield (i,) + rest


# -- JSON serialization -------------------------------------------------

def _scalar_to_json(c):
    if isinstance(c, complex):
        return _num_str(c.real), _num_str(c.imag)
    return _num_str(c), "0"


def _num_str(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _num_parse(s, exact):
    s = s.strip()
    if "/" in s:
        num, den = s.split("/")
        v = Fraction(int(num), int(den))
        return v if exact else float(v)
    try:
        i = int(s)
        return Fraction(i) if exact else float(i)
    except ValueError:
        pass
    f = float(s)
    if exact:
        return Fraction(s)
    return f


def poly_to_json(p):
    """Schema: {"n": int, "terms": [{"word": [...], "re": str, "im": str}]}."""
    terms = []
    for w, c in p.terms():
        re, im = _scalar_to_json(c)
        terms.append({"word": list(w), "re": re, "im": im})
    return {"n": p.n, "terms": terms}


def poly_from_json(obj, exact=True):
    try:
        n = int(obj["n"])
        coeffs = {}
        for t in obj["terms"]:
            w = tuple(int(i) for i in t["word"])
            re = _num_parse(t["re"], exact)
            im = _num_parse(t.get("im", "0"), exact)
            c = re if im == 0 else complex(float(re), float(im))
            coeffs[w] = coeffs.get(w, 0) + c
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad polynomial object: {e}") from e
    return NCPoly(n, coeffs)


def poly_dumps(p):
    return json.dumps(poly_to_json(p), sort_keys=True)


def poly_loads(s, exact=True):
    return poly_from_json(json.loads(s), exact=exact)
