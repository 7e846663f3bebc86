"""Stein system assembly, minimum-norm solving, and derived reports."""

import numpy as np
import pytest

from freestein.errors import DomainError, PreconditionError
from freestein.steinsolve import (
    assemble, clt_discrepancy_scan, kernel_basis, moment_match_report,
    poincare_constant, semicircular_moments, solve, solve_min_norm,
    uniform_weights, weighted_cumulants,
)
from freestein.tracestate import CumulantSeq, MomentTable1D, \
    SemicircularFamily


def catalan_moments(upto):
    return semicircular_moments(1.0, upto)


def free_poisson(length=24):
    return CumulantSeq([0.0, 1.0] + [1.0] * (length - 2), validate=False)


def symmetric_bernoulli(length=24):
    mom = [(0 if j % 2 else 1) for j in range(1, length + 1)]
    return CumulantSeq.from_moments(mom, validate=False)


# -- basis and assembly -------------------------------------------------------

def test_kernel_basis_counts():
    # compositions of <= D into k+1 parts
    assert len(kernel_basis(1, 3)) == 10
    assert len(kernel_basis(2, 2)) == 10
    assert all(sum(t) <= 6 for t in kernel_basis(2, 6))


def test_semicircular_rhs_vanishes():
    sys1 = assemble(catalan_moments(16), 1.0, 1, 2, 4)
    assert np.allclose(sys1.b, 0)


def test_moment_lemma_rows():
    # tau(x^2) = 1 makes the P=t row vanish; tau(x^3) = c shows up at P=t^2
    c = 0.37
    mom = [0, 1, c] + catalan_moments(16)[3:]
    sys2 = assemble(mom, 1.0, 2, 2, 4)
    assert sys2.b[1] == pytest.approx(0.0)
    assert sys2.b[2] == pytest.approx(c)


def test_gram_psd():
    sys2 = assemble(catalan_moments(16), 1.0, 2, 3, 5)
    assert np.linalg.eigvalsh((sys2.G + sys2.G.T) / 2)[0] >= -1e-9


# -- solving -------------------------------------------------------------------

def test_semicircular_zero_kernel():
    for k in (1, 2, 3):
        sol = solve(catalan_moments(20), 1.0, k, 4, 6)
        assert sol.feasible
        assert sol.residual < 1e-10
        assert sol.discrepancy == pytest.approx(0.0, abs=1e-10)
        assert abs(sol.centering[0]) < 1e-10


def test_unshifted_kernel_relation():
    # adding the unit tensor to the solved kernel solves the unshifted system
    law = free_poisson()
    system = assemble(law, 1.0, 1, 4, 6)
    sol = solve_min_norm(system)
    assert sol.feasible
    shifted = sol.coeffs.copy()
    shifted[system.unit_index()] += 1.0
    unshifted_rhs = np.array([system.rho * system.moments[m + 1]
                              for m in range(system.d + 1)])
    assert np.allclose(system.M @ shifted, unshifted_rhs, atol=1e-9)


def test_second_moment_mismatch_is_infeasible():
    # dilated semicircle with tau(x^2) = 1.2
    lam2 = 1.2
    mom = [m * lam2 ** ((j + 1) / 2) for j, m in enumerate(catalan_moments(12))]
    sol = solve(mom, 1.0, 2, 3, 5)
    assert not sol.feasible
    assert sol.residual > 0.1
    assert sol.discrepancy is None


def test_centering_forced_by_moment_matching():
    # matches the semicircle to order k+1 = 3, so the kernel is centered
    law = symmetric_bernoulli()
    sol = solve(law, 1.0, 2, 4, 6)
    assert sol.feasible
    assert abs(sol.centering[0]) < 1e-8


def test_discrepancy_monotone_in_d():
    law = free_poisson()
    vals = [solve(law, 1.0, 1, d, 6).discrepancy for d in (2, 3, 4)]
    assert vals[0] <= vals[1] + 1e-12
    assert vals[1] <= vals[2] + 1e-12


def test_discrepancy_nonincreasing_in_D():
    law = free_poisson()
    vals = [solve(law, 1.0, 1, 4, D).discrepancy for D in (4, 5, 6)]
    assert vals[0] >= vals[1] - 1e-12
    assert vals[1] >= vals[2] - 1e-12


def test_order_chaining_shares_rows():
    # the d identical rows mean <A_{k-1}, J^{k-1}P> = <A_k, J^k P> on the basis
    law = symmetric_bernoulli()
    s1 = assemble(law, 1.0, 1, 4, 6)
    s2 = assemble(law, 1.0, 2, 4, 6)
    sol1 = solve_min_norm(s1)
    sol2 = solve_min_norm(s2)
    assert sol1.feasible and sol2.feasible
    lhs = s1.M @ sol1.coeffs
    rhs = s2.M @ sol2.coeffs
    assert np.allclose(lhs, rhs, atol=1e-9)


def test_scaling_homogeneity():
    # dilating moments by lam and rho by lam^-2 preserves feasibility
    lam = 1.3
    base = free_poisson()
    mom = [float(base.moment(j)) for j in range(1, 17)]
    dil = [m * lam ** (j + 1) for j, m in enumerate(mom)]
    a = solve(mom, 1.0, 1, 4, 6)
    b = solve(dil, lam ** -2, 1, 4, 6)
    assert a.feasible == b.feasible


def test_zero_discrepancy_iff_schwinger_dyson():
    from freestein.tracestate import schwinger_dyson_residual
    st = SemicircularFamily.standard(1, 1)
    assert schwinger_dyson_residual(st, 1, 4) == 0
    sol = solve(catalan_moments(20), 1.0, 2, 4, 6)
    assert sol.discrepancy == pytest.approx(0.0, abs=1e-10)

    law = free_poisson()
    sol2 = solve(law, 1.0, 1, 4, 6)
    assert sol2.discrepancy > 0.1


# -- moment match report --------------------------------------------------------

def test_report_semicircle():
    rep = moment_match_report(catalan_moments(8), 1.0, 4)
    assert all(abs(g) < 1e-12 for g in rep["gaps"].values())
    assert rep["order_k_possible"]
    assert rep["order_k_centered"]


def test_report_third_moment():
    mom = [0, 1, 0.5, 2]
    rep = moment_match_report(mom, 1.0, 2)
    assert rep["max_possible_order"] == 2
    assert not rep["order_k_centered"]
    assert rep["gaps"][3] == pytest.approx(0.5)


def test_report_mean_blocks_everything():
    mom = [0.1, 1, 0, 2]
    rep = moment_match_report(mom, 1.0, 2)
    assert rep["max_possible_order"] == 0


# -- Poincare constants -----------------------------------------------------------

def test_poincare_semicircular_orders():
    law = catalan_moments(14)
    c0 = poincare_constant(law, 0, 6)
    assert c0 == pytest.approx(1.0, abs=1e-8)
    for l in (1, 2, 3):
        cl = poincare_constant(law, l, 6)
        assert cl <= 1.0 + 1e-8
        assert cl > 0


def test_poincare_voiculescu_bound():
    # atoms in [-2, 2]: operator norm 2, so C <= 2 * norm^2 = 8 at l = 0
    atoms, weights = [-2.0, 0.5, 2.0], [0.3, 0.4, 0.3]
    mean = sum(a * w for a, w in zip(atoms, weights))
    law = CumulantSeq.from_atoms([a - mean for a in atoms], weights, 16)
    c0 = poincare_constant(law, 0, 5)
    norm = max(abs(a - mean) for a in atoms)
    assert c0 <= 2 * norm ** 2 + 1e-9


def test_poincare_rejects_bad_degree():
    with pytest.raises(DomainError):
        poincare_constant(catalan_moments(10), 3, 3)


# -- CLT scan ----------------------------------------------------------------------

def test_weighted_cumulants_scaling():
    base = free_poisson()
    law = weighted_cumulants(base, uniform_weights(4), 6)
    # kappa_m(Y) = N^(1 - m/2) kappa_m
    assert law.kappa(2) == pytest.approx(1.0)
    assert law.kappa(3) == pytest.approx(4 ** -0.5)
    assert law.kappa(4) == pytest.approx(0.25)


def test_sigma_values_uniform_weights():
    base = symmetric_bernoulli()
    out = clt_discrepancy_scan(base, [uniform_weights(N) for N in (4, 8)],
                               2, 4, 6)
    assert out["rows"][0]["sigma"] == pytest.approx(4.0 ** -2)
    assert out["rows"][1]["sigma"] == pytest.approx(8.0 ** -2)


def test_semicircular_base_is_fixed_point():
    base = CumulantSeq.semicircular(1)
    out = clt_discrepancy_scan(base, [uniform_weights(N) for N in (4, 8)],
                               1, 4, 6)
    for row in out["rows"]:
        assert row["disc_sq"] == pytest.approx(0.0, abs=1e-10)


def test_scan_bounds_hold_for_matching_bases():
    # order-k bound needs the base to match the semicircle to order k+1
    for k, base in ((1, free_poisson()), (2, symmetric_bernoulli())):
        out = clt_discrepancy_scan(base,
                                   [uniform_weights(N) for N in (4, 8, 16)],
                                   k, 4, 6)
        for row in out["rows"]:
            assert row["disc_sq"] <= row["bound"] + 1e-8


def test_scan_rejects_unnormalized_weights():
    with pytest.raises(DomainError):
        clt_discrepancy_scan(free_poisson(), [np.array([1.0, 1.0])], 1, 4, 6)


def test_scan_rejects_uncentered_base():
    with pytest.raises(PreconditionError):
        clt_discrepancy_scan(CumulantSeq([0.5, 1.0], validate=False),
                             [uniform_weights(4)], 1, 4, 6)
