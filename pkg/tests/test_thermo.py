import math

import mpmath
import pytest

from gcms.configs import bounded, empty_stem_config, unbounded
from gcms.thermo import (Constant, DomainError, GDiff, LOG_POTENTIAL, LogRatio, beta_c_log,
                         birkhoff_sum, classify_recurrence_log, critical_beta_log,
                         discriminant_log, gurevich_pressure, jn_tn, normalization_series,
                         pointwise_z, power_sum_tail, pressure_log_potential,
                         superadditivity_check, z_n, z_n_star, z_n_transfer, zeta)


# -- potentials and Birkhoff sums ------------------------------------------------

def test_birkhoff_examples():
    # descending first-return word: the log-ratio sums telescope to -log(n+1)
    w = (1, 4, 3, 2)
    assert birkhoff_sum(LogRatio(), 1.0, w) == pytest.approx(-math.log(5), abs=1e-14)
    assert birkhoff_sum(Constant(1.0), 2.0, (5, 5, 5)) == pytest.approx(6.0)
    assert birkhoff_sum(LogRatio(), 1.0, (1,)) == pytest.approx(math.log(0.5))
    with pytest.raises(ValueError):
        birkhoff_sum(LogRatio(), 1.0, ())


def test_potential_bounds():
    assert LogRatio().sup == 0.0
    assert LogRatio().inf == pytest.approx(-math.log(2))
    assert Constant(3.0).sup == 3.0
    assert LOG_POTENTIAL.value(3) == pytest.approx(math.log(3) - math.log(4))
    with pytest.raises(ValueError):
        GDiff(math.sqrt).sup


# -- partition functions -----------------------------------------------------------

def test_z_n_closed_form(renewal):
    beta = 0.85
    for n in (1, 2, 5, 9):
        z = z_n(renewal, Constant(-1.0), beta, 1, n)
        assert z.exact
        assert z.value == pytest.approx(2 ** (n - 1) * math.exp(-beta * n), rel=1e-14)


def test_z_n_counts_at_beta_zero(renewal):
    assert z_n(renewal, LogRatio(), 0.0, 1, 3).value == pytest.approx(4.0)


def test_z_n_logratio_by_hand(renewal):
    # cycles of length 2 through 1 are (1,1) and (1,2)
    z = z_n(renewal, LogRatio(), 1.0, 1, 2)
    assert z.value == pytest.approx(0.25 + 1.0 / 3.0, rel=1e-14)


def test_z_n_transfer_oracle(renewal, pair):
    for A, base in ((renewal, 1), (pair, 2)):
        for n in (2, 4, 6):
            direct = z_n(A, LogRatio(), 1.3, base, n, symbol_bound=12).value
            via_matrix = z_n_transfer(A, LogRatio(), 1.3, base, n, 12)
            assert direct == pytest.approx(via_matrix, rel=1e-12)


def test_z_n_star(renewal):
    assert z_n_star(renewal, LogRatio(), 2.0, 1, 3).value == pytest.approx(1.0 / 16, rel=1e-13)
    assert z_n_star(renewal, Constant(-1.0), 1.0, 1, 4).value == pytest.approx(math.exp(-4.0))
    assert z_n_star(renewal, LogRatio(), 1.0, 1, 1).value == pytest.approx(0.5)
    # unique first-return cycle per length on the renewal matrix
    assert z_n_star(renewal, LogRatio(), 1.0, 1, 8).n_terms == 1


def test_symbol_bound_flags(renewal):
    full = z_n(renewal, Constant(-1.0), 1.0, 1, 6)
    cut = z_n(renewal, Constant(-1.0), 1.0, 1, 6, symbol_bound=3)
    assert full.exact and not cut.exact
    assert cut.value < full.value


def test_pointwise_z(renewal):
    xi0 = empty_stem_config(renewal, 1)
    assert pointwise_z(renewal, LogRatio(), 0.0, xi0, 3).value == pytest.approx(4.0)
    # pointwise sums dominate the base partition function
    x = bounded(renewal, (1,), 1)
    for n in (2, 4, 6):
        zp = pointwise_z(renewal, LOG_POTENTIAL, 1.0, x, n).value
        zb = z_n(renewal, LOG_POTENTIAL, 1.0, 1, n).value
        assert zp > zb
    # sequence points accept any admissible head, not only terminal-ended ones
    u = unbounded(renewal, (), (1,))
    assert pointwise_z(renewal, LogRatio(), 0.0, u, 3).value == pytest.approx(8.0)


def test_pointwise_ratio_bound(renewal):
    # 1 < Z_n(x)/Z_n <= 1 + (x0+1)^beta for the log difference potential
    for beta in (0.5, 1.0):
        for stem in [(1,), (2, 1), (3, 2, 1), (1, 2, 1)]:
            x = bounded(renewal, stem, 1)
            bound = 1.0 + math.exp(beta * (math.log(stem[0] + 1) - math.log(1)))
            for n in (3, 6, 9, 12):
                ratio = (pointwise_z(renewal, LOG_POTENTIAL, beta, x, n).value
                         / z_n(renewal, LOG_POTENTIAL, beta, 1, n).value)
                assert 1.0 < ratio <= bound + 1e-12


def test_superadditivity(renewal):
    rows = superadditivity_check(renewal, Constant(1.0), 0.8, 1, 10)
    assert rows                      # no AssertionError raised
    # scale invariance in beta for constant potentials
    r1 = superadditivity_check(renewal, Constant(1.0), 0.1, 1, 8)
    r2 = superadditivity_check(renewal, Constant(1.0), 2.5, 1, 8)
    for (n, m, lhs1, rhs1), (_, _, lhs2, rhs2) in zip(r1, r2):
        assert (lhs1 / rhs1) == pytest.approx(lhs2 / rhs2, rel=1e-9)


# -- Gurevich pressure ----------------------------------------------------------

def test_gurevich_exact_certificate(renewal):
    est = gurevich_pressure(renewal, Constant(-1.0), 0.3, 1, 8)
    assert est.certificate == "exact"
    assert est.extrapolated == pytest.approx(math.log(2) - 0.3, abs=1e-14)
    # the finite-n values approach from below: (1/n) log Z_n = P - log2/n
    for n, v in est.values:
        assert v == pytest.approx(est.extrapolated - math.log(2) / n, abs=1e-12)


def test_gurevich_upper_bound(renewal):
    for beta in (0.4, 1.0, 2.0):
        est = gurevich_pressure(renewal, LogRatio(), beta, 1, 8)
        assert est.extrapolated <= math.log(2) + beta * LogRatio().sup + 1e-12


def test_gurevich_above_critical_is_zero(renewal):
    assert gurevich_pressure(renewal, LogRatio(), 2.0, 1, 6).extrapolated == 0.0


def test_gurevich_limit_certificate(pair):
    est = gurevich_pressure(pair, Constant(-1.0), 0.5, 1, 10)
    assert est.certificate == "limit"
    # pair renewal pressure for the constant potential is log(1+sqrt2) - beta
    assert est.extrapolated == pytest.approx(math.log(1 + math.sqrt(2)) - 0.5, abs=1e-2)


# -- zeta ------------------------------------------------------------------------

def test_zeta_known_value():
    assert zeta(2.0) == pytest.approx(math.pi ** 2 / 6, abs=1e-13)


@pytest.mark.parametrize("beta", [1.1, 1.3, 1.72865, 2.0, 3.5, 7.0])
def test_zeta_against_mpmath(beta):
    assert zeta(beta) == pytest.approx(float(mpmath.zeta(beta)), abs=5e-13)


def test_zeta_domain():
    with pytest.raises(DomainError):
        zeta(1.0)
    with pytest.raises(DomainError):
        zeta(0.99)


def test_power_sum_tail():
    want = float(mpmath.zeta(1.5)) - sum(n ** -1.5 for n in range(1, 10))
    assert power_sum_tail(1.5, 10) == pytest.approx(want, abs=1e-12)


def test_critical_beta():
    bc = critical_beta_log()
    assert bc == pytest.approx(1.72865, abs=5e-5)
    assert abs(zeta(bc) - 2.0) <= 1e-10
    # zeta decreases through the bracket
    assert zeta(1.2) > zeta(1.7) > zeta(2.2)


# -- discriminant and recurrence ---------------------------------------------------

@pytest.mark.parametrize("beta", [1.2, 1.5, 1.72, 1.9, 2.5])
def test_discriminant_two_routes(beta):
    d = discriminant_log(beta)
    assert not d.divergent
    assert abs(d.series_value - d.closed_form) <= 1e-6
    assert d.radius_estimate == pytest.approx(1.0, abs=1e-6)


def test_discriminant_signs():
    assert discriminant_log(1.5).closed_form > 0
    assert abs(discriminant_log(beta_c_log()).closed_form) <= 1e-8
    assert discriminant_log(2.0).closed_form == pytest.approx(
        math.log(math.pi ** 2 / 6 - 1), abs=1e-12)
    assert discriminant_log(0.9).divergent


def test_classification():
    assert classify_recurrence_log(1.2).kind == "positive_recurrent"
    assert classify_recurrence_log(0.5).kind == "positive_recurrent"
    assert classify_recurrence_log(2.5).kind == "transient"
    assert classify_recurrence_log(beta_c_log()).kind == "null_recurrent_or_boundary"


# -- pressure of the log-ratio potential ---------------------------------------------

def test_pressure_residuals():
    for beta in (1.0, 1.2, 1.5):
        p = pressure_log_potential(beta)
        assert abs(normalization_series(beta, math.exp(p)) - 1.0) <= 1e-10


def test_pressure_zero_above_critical():
    assert pressure_log_potential(beta_c_log()) == 0.0
    assert pressure_log_potential(2.4) == 0.0


def test_pressure_monotone():
    grid = [1.05, 1.2, 1.35, 1.5, 1.65]
    values = [pressure_log_potential(b) for b in grid]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_pressure_continuity_at_critical():
    # bracket-certified coarse solve: P within 1e-4 of the true root
    p = pressure_log_potential(beta_c_log() - 1e-4, p_tol=1e-4)
    assert 0.0 <= p <= 1e-2


# -- the two-piece word partition ------------------------------------------------------

def test_jn_tn_small(renewal):
    x = bounded(renewal, (1,), 1)
    rep = jn_tn(renewal, x, 2)
    assert rep.ok
    assert len(rep.j_image) == len(rep.t_image) == 2
    assert len(rep.target) == 4


def test_jn_tn_singletons(renewal):
    rep = jn_tn(renewal, bounded(renewal, (2, 1), 1), 1)
    assert rep.ok
    assert len(rep.j_image) == len(rep.t_image) == 1


def test_jn_tn_transport_identity(renewal):
    for stem in [(1,), (2, 1), (1, 2, 1), (4, 3, 2, 1)]:
        x = bounded(renewal, stem, 1)
        for n in (1, 3, 6, 10):
            rep = jn_tn(renewal, x, n, potential=LOG_POTENTIAL)
            assert rep.ok, (stem, n)
            assert rep.max_transport_residual <= 1e-12


def test_jn_tn_requires_renewal(pair):
    with pytest.raises(ValueError):
        jn_tn(pair, bounded(pair, (1,), 2), 2)
