"""Exact algebra tests: arithmetic, involution, derivations, Jacobians."""

import random
from fractions import Fraction

import pytest

from freestein.errors import DimensionError, DomainError
from freestein.ncalg import (
    NCPoly, TensorPoly, cyclic_gradient, diff_quotient, first_leg_diff, flip,
    iterated_diff, jacobian, poly_dumps, poly_loads, radius_norm,
)


def t(n, j):
    return NCPoly.gen(n, j)


def random_poly(rng, n, max_deg, terms, exact=True):
    coeffs = {}
    for _ in range(terms):
        deg = rng.randrange(max_deg + 1)
        w = tuple(rng.randrange(1, n + 1) for _ in range(deg))
        c = Fraction(rng.randrange(-5, 6), rng.randrange(1, 5))
        if not exact:
            c = float(c)
        if c:
            coeffs[w] = coeffs.get(w, 0) + c
    return NCPoly(n, coeffs)


# -- arithmetic and involution ------------------------------------------

def test_involution_reverses_product():
    p = t(2, 1) * t(2, 2)
    assert p.star() == t(2, 2) * t(2, 1)


def test_distributivity():
    n = 2
    assert (t(n, 1) + t(n, 2)) * t(n, 1) == t(n, 1) * t(n, 1) + t(n, 2) * t(n, 1)


def test_unit_law():
    rng = random.Random(0)
    p = random_poly(rng, 2, 4, 6)
    assert p * NCPoly.one(2) == p
    assert NCPoly.one(2) * p == p


def test_ring_axioms_random():
    rng = random.Random(1)
    for _ in range(20):
        p = random_poly(rng, 2, 3, 4)
        q = random_poly(rng, 2, 3, 4)
        r = random_poly(rng, 2, 3, 4)
        assert (p + q) * r == p * r + q * r
        assert p * (q * r) == (p * q) * r
        assert (p * q).star() == q.star() * p.star()
        assert p.star().star() == p


def test_generator_count_mismatch():
    with pytest.raises(DimensionError):
        _ = t(2, 1) + t(3, 1)
    with pytest.raises(DimensionError):
        _ = t(2, 1) * t(3, 1)


# -- radius norm ---------------------------------------------------------

def test_radius_norm_examples():
    n = 2
    p = 3 + 2 * (t(n, 1) * t(n, 2))
    assert radius_norm(p, 2) == 11
    assert radius_norm(NCPoly.zero(n), 7.5) == 0
    assert radius_norm(t(n, 1) - t(n, 1), 5) == 0


def test_radius_norm_rejects_bad_radius():
    with pytest.raises(DomainError):
        radius_norm(NCPoly.one(1), 0)


def test_radius_norm_submultiplicative():
    rng = random.Random(2)
    for _ in range(25):
        p = random_poly(rng, 2, 3, 4)
        q = random_poly(rng, 2, 3, 4)
        for R in (Fraction(1, 2), Fraction(1), Fraction(3)):
            assert radius_norm(p * q, R) <= radius_norm(p, R) * radius_norm(q, R)


# -- difference quotient -------------------------------------------------

def test_diff_quotient_three_letter_word():
    n = 2
    p = NCPoly.monomial(n, (1, 2, 1))
    expect = TensorPoly(n, 2, {((), (2, 1)): 1, ((1, 2), ()): 1})
    assert diff_quotient(p, 1) == expect


def test_diff_quotient_absent_generator():
    assert diff_quotient(t(2, 2), 1).is_zero()


def test_diff_quotient_cube():
    # expand the definition over all splittings of t^3
    p = t(1, 1) ** 3
    expect = TensorPoly(1, 2, {((), (1, 1)): 1, ((1,), (1,)): 1, ((1, 1), ()): 1})
    assert diff_quotient(p, 1) == expect


def test_diff_quotient_index_range():
    with pytest.raises(DimensionError):
        diff_quotient(t(2, 1), 3)


def test_leibniz_rule_random():
    rng = random.Random(3)
    n = 2
    for _ in range(20):
        p = random_poly(rng, n, 3, 3)
        q = random_poly(rng, n, 3, 3)
        for j in (1, 2):
            lhs = diff_quotient(p * q, j)
            one_q = TensorPoly(n, 2, {((), w): c for w, c in q.coeffs.items()})
            p_one = TensorPoly(n, 2, {(w, ()): c for w, c in p.coeffs.items()})
            rhs = diff_quotient(p, j) * one_q + p_one * diff_quotient(q, j)
            assert lhs == rhs


def test_coassociativity_exact():
    # (d_i (x) id) o d_j equals (id (x) d_j) o d_i on everything; for i = j
    # this is the classical coassociativity of the difference quotient.
    rng = random.Random(4)
    n = 2
    for _ in range(15):
        p = random_poly(rng, n, 6, 5)
        for i in (1, 2):
            for j in (1, 2):
                left = first_leg_diff(diff_quotient(p, j), i)
                right_inner = diff_quotient(p, i)
                # apply d_j to the *second* leg
                out = {}
                for (a, b), c in right_inner.coeffs.items():
                    for pos, letter in enumerate(b):
                        if letter == j:
                            k = (a, b[:pos], b[pos + 1:])
                            out[k] = out.get(k, 0) + c
                right = TensorPoly(n, 3, out)
                assert left == right


def test_degree_bound():
    rng = random.Random(5)
    for _ in range(10):
        p = random_poly(rng, 2, 5, 4)
        d = p.degree()
        for k in range(1, 4):
            for idx in [(1,) * k, (2,) + (1,) * (k - 1)]:
                T = iterated_diff(p, idx)
                for legs, _ in T.coeffs.items():
                    assert sum(len(w) for w in legs) <= d - k
        if d >= 0:
            # annihilates low degree
            low = NCPoly.monomial(2, (1,) * 2)
            assert iterated_diff(low, (1, 1, 1)).is_zero()


# -- cyclic gradient -----------------------------------------------------

def test_cyclic_gradient_examples():
    n = 2
    g = cyclic_gradient(t(n, 1) * t(n, 2))
    assert g[0] == t(n, 2)
    assert g[1] == t(n, 1)

    g1 = cyclic_gradient(t(1, 1) ** 2)
    assert g1[0] == 2 * t(1, 1)

    g2 = cyclic_gradient(NCPoly.monomial(n, (1, 2, 1)))
    assert g2[0] == NCPoly(n, {(2, 1): 1, (1, 2): 1})


def test_cyclic_derivative_is_usual_derivative_univariate():
    # one variable: D(t^k) = k t^(k-1)
    for k in range(1, 7):
        g = cyclic_gradient(t(1, 1) ** k)
        assert g[0] == k * t(1, 1) ** (k - 1)


# -- jacobians -----------------------------------------------------------

def test_jacobian_identity_matrix():
    n = 2
    J = jacobian([t(n, 1), t(n, 2)], 1)
    unit = TensorPoly.unit(n, 2)
    for j in (1, 2):
        for i in (1, 2):
            expect = unit if i == j else TensorPoly.zero(n, 2)
            assert J.entry((j, i)) == expect


def test_second_order_of_cube():
    J = jacobian([t(1, 1) ** 3], 2)
    expect = TensorPoly(1, 3, {
        ((), (), (1,)): 1, ((), (1,), ()): 1, ((1,), (), ()): 1})
    assert J.entry((1, 1, 1)) == expect


def test_derivative_kills_low_degree():
    J = jacobian([t(1, 1)], 2)
    assert J.entry((1, 1, 1)).is_zero()


def test_jacobian_rejects_empty():
    with pytest.raises(DimensionError):
        jacobian([], 1)


# -- flip ----------------------------------------------------------------

def test_flip_definition_and_involution():
    n = 1
    T = TensorPoly(n, 2, {((1,), (1, 1)): Fraction(2, 3)})
    F = flip(T)
    assert F == TensorPoly(n, 2, {((1, 1), (1,)): Fraction(2, 3)})
    assert flip(F) == T


def test_flip_of_symmetric_tensor():
    T = diff_quotient(t(1, 1) ** 2, 1)
    assert flip(T) == T


def test_flip_requires_order_two():
    with pytest.raises(DimensionError):
        flip(TensorPoly.unit(1, 3))


# -- serialization -------------------------------------------------------

def test_json_roundtrip_exact():
    rng = random.Random(6)
    p = random_poly(rng, 3, 4, 8)
    q = poly_loads(poly_dumps(p))
    assert q == p


def test_json_roundtrip_float():
    p = NCPoly(2, {(1, 2): 0.125, (): -3.5})
    q = poly_loads(poly_dumps(p), exact=False)
    assert q == p
