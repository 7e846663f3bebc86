"""Trace evaluation tests against brute-force partition oracles."""

import random
from fractions import Fraction

import numpy as np
import pytest

from freestein.errors import DomainError, TruncationError
from freestein.ncalg import NCPoly, TensorPoly, diff_quotient
from freestein.tracestate import (
    CumulantSeq, FreeFamily, MomentTable1D, SemicircularFamily,
    cumulant_moment_transform, cumulants_from_moments, free_family_trace,
    moments_from_cumulants, monomial_gram, pairing, schwinger_dyson_residual,
    semicircular_trace, sobolev_seminorm, sobolev_seminorm_sq, all_words,
)

from oracles import (
    brute_free_family_trace, brute_moments_from_cumulants,
    brute_semicircular_trace, frac_catalan,
)

F = Fraction


# -- Wick formula ----------------------------------------------------------

def test_semicircle_fourth_moment():
    assert semicircular_trace((1, 1, 1, 1), [[F(1)]]) == 2


def test_alternating_mixed_word_vanishes():
    # only crossing pairings match colours; brute-force over pairings agrees
    w = (1, 2, 1, 2)
    I2 = [[F(1), F(0)], [F(0), F(1)]]
    assert semicircular_trace(w, I2) == 0
    assert brute_semicircular_trace(w, I2) == 0


def test_variance_rho_inverse():
    rho = F(3)
    st = SemicircularFamily.standard(1, rho)
    assert st.word((1, 1)) == 1 / rho


def test_semicircular_moments_are_catalan():
    st = SemicircularFamily.standard(1, 1)
    for m in range(0, 7):
        assert st.word((1,) * (2 * m)) == frac_catalan(m)
        assert st.word((1,) * (2 * m + 1)) == 0


def test_wick_against_brute_force_random_words():
    rng = random.Random(7)
    C = [[F(2), F(1)], [F(1), F(3)]]
    st = SemicircularFamily(C)
    for _ in range(30):
        w = tuple(rng.randrange(1, 3) for _ in range(rng.randrange(0, 9)))
        assert st.word(w) == brute_semicircular_trace(w, C)


def test_covariance_must_be_psd():
    with pytest.raises(DomainError):
        SemicircularFamily([[1, 2], [2, 1]])


# -- moment / cumulant transforms -------------------------------------------

def test_transform_examples():
    assert cumulant_moment_transform([0, 1, 0, 2], "cumulants") == [0, 1, 0, 0]
    assert cumulant_moment_transform([0, 1, 0, 0, 0, 0], "moments") == \
        [0, 1, 0, 2, 0, 5]
    assert cumulant_moment_transform([0, 0, 0], "moments") == [0, 0, 0]


def test_transform_matches_brute_force():
    rng = random.Random(8)
    for _ in range(10):
        kappa = [F(rng.randrange(-2, 3), rng.randrange(1, 4)) for _ in range(6)]
        assert moments_from_cumulants(kappa) == \
            brute_moments_from_cumulants(kappa, 6)


def test_transform_round_trip():
    rng = random.Random(9)
    for _ in range(6):
        mom = [F(rng.randrange(-3, 4), rng.randrange(1, 5)) for _ in range(12)]
        kappa = cumulants_from_moments(mom)
        assert moments_from_cumulants(kappa) == mom


# -- free families -----------------------------------------------------------

def x_law(a):
    return CumulantSeq([0, a], complete=True, validate=False)


def test_free_family_squares():
    # tau(x x s s) = kappa2(x) * kappa2(s) for centred x free from s
    a, b = F(3, 2), F(2)
    fam = FreeFamily([x_law(a), CumulantSeq.semicircular(b)])
    assert fam.word((1, 1, 2, 2)) == a * b


def test_free_family_alternating_vanishes():
    fam = FreeFamily([x_law(F(1)), CumulantSeq.semicircular(F(1))])
    assert fam.word((1, 2, 1, 2)) == 0


def test_centered_first_moment():
    fam = FreeFamily([x_law(F(1))])
    assert fam.word((1,)) == 0


def test_free_family_against_brute_force():
    rng = random.Random(10)
    law1 = CumulantSeq([F(1, 2), F(1), F(-1, 3), F(1, 4), 0, 0, 0, 0],
                       validate=False)
    law2 = CumulantSeq.semicircular(F(2))
    fam = FreeFamily([law1, law2])
    cum = {1: law1.values + [0] * 4, 2: [0, F(2)] + [0] * 10}
    for _ in range(25):
        w = tuple(rng.randrange(1, 3) for _ in range(rng.randrange(0, 8)))
        assert fam.word(w) == brute_free_family_trace(w, cum)


def test_wick_vs_cumulant_crosscheck():
    rng = random.Random(11)
    C = [[F(1), 0], [0, F(3, 2)]]
    wick = SemicircularFamily(C)
    fam = FreeFamily([CumulantSeq.semicircular(F(1)),
                      CumulantSeq.semicircular(F(3, 2))])
    for _ in range(40):
        w = tuple(rng.randrange(1, 3) for _ in range(rng.randrange(0, 9)))
        assert wick.word(w) == fam.word(w)


def test_truncation_error():
    fam = FreeFamily([CumulantSeq([0, 1, 1], validate=False)])
    with pytest.raises(TruncationError):
        fam.word((1,) * 4)


def test_traciality_random_words():
    rng = random.Random(12)
    fam = FreeFamily([x_law(F(5, 4)), CumulantSeq.semicircular(F(1))])
    for _ in range(20):
        w = tuple(rng.randrange(1, 3) for _ in range(rng.randrange(1, 9)))
        cut = rng.randrange(len(w))
        assert fam.word(w) == fam.word(w[cut:] + w[:cut])


def test_gram_positive_semidefinite():
    # atoms (-2, 1) with weights (1/3, 2/3): a genuine centred law
    mom = [F(1, 3) * (-2) ** j + F(2, 3) for j in range(1, 9)]
    st = MomentTable1D(mom)
    _, G = monomial_gram(st, 3)
    assert np.linalg.eigvalsh(G)[0] >= -1e-10


# -- moment tables -----------------------------------------------------------

def test_moment_table_lookup_and_truncation():
    st = MomentTable1D([0, 1, 0, 2])
    assert st.word((1, 1, 1, 1)) == 2
    with pytest.raises(TruncationError):
        st.word((1,) * 5)


def test_moment_table_hankel_rejection():
    # m2 = -0.1 is not a moment sequence
    with pytest.raises(DomainError):
        MomentTable1D([0, -0.1])


def test_norm_bound_default():
    st = MomentTable1D([0, 1, 0, 2])
    assert st.norm_bound == pytest.approx(2 ** 0.25)


# -- pairings ----------------------------------------------------------------

def test_pairing_unit_tensor():
    st = SemicircularFamily.standard(1)
    one = TensorPoly.unit(1, 2)
    assert st.tensor_inner(one, one) == 1


def test_pairing_split_units():
    st = SemicircularFamily.standard(1)
    A = TensorPoly(1, 2, {((1,), ()): 1})
    B = TensorPoly(1, 2, {((), (1,)): 1})
    assert st.tensor_inner(A, B) == 0


def test_pairing_chebyshev_two():
    # <U2(S), U2(S)> = 1 under the standard semicircular state
    st = SemicircularFamily.standard(1)
    u2 = NCPoly(1, {(1, 1): 1, (): -1})
    assert st.inner(u2, u2) == 1


def test_pairing_dispatch():
    st = SemicircularFamily.standard(1)
    p = NCPoly.gen(1, 1)
    assert pairing(p, p, st) == 1


# -- Schwinger-Dyson residual -------------------------------------------------

def test_sd_residual_zero_for_free_gibbs():
    st = SemicircularFamily.standard(1, 1)
    assert schwinger_dyson_residual(st, F(1), 6) == 0


def test_sd_residual_zero_for_scaled_potential():
    rho = F(2)
    st = SemicircularFamily.standard(1, rho)
    assert schwinger_dyson_residual(st, rho, 6) == 0


def test_sd_residual_detects_mean():
    st = MomentTable1D([1, 2, 4, 8], validate=False)
    assert schwinger_dyson_residual(st, 1, 2) >= 1


# -- Sobolev seminorms --------------------------------------------------------

def test_seminorm_kills_constants():
    st = SemicircularFamily.standard(1)
    for k in (1, 2):
        assert sobolev_seminorm([NCPoly.one(1, F(7))], k, st) == 0


def test_seminorm_of_generator():
    st = SemicircularFamily.standard(1)
    assert sobolev_seminorm_sq([NCPoly.gen(1, 1)], 1, st) == 1


def test_seminorm_of_square_order2():
    # d^2 t^2 = 1 (x) 1 (x) 1 exactly once, so the squared seminorm is 1.
    # Oracle: <U2(S), t^2> = <1x1x1, d^2 t^2> and tau(U2 S^2) = m4 - m2 = 1.
    st = SemicircularFamily.standard(1)
    p = NCPoly.gen(1, 1) ** 2
    u2 = NCPoly(1, {(1, 1): 1, (): -1})
    ladder_value = st.inner(p, u2)
    assert ladder_value == 1
    assert sobolev_seminorm_sq([p], 2, st) == 1


def test_all_words_count():
    assert len(all_words(2, 3)) == 1 + 2 + 4 + 8
