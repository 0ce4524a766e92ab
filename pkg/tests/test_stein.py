import itertools

import numpy as np
import pytest

from src.cubic_lab.densities import mixed, quartic, standard_normal
from src.cubic_lab.errors import CoexistenceError, DomainError
from src.cubic_lab.law import (
    MagnetizationInterval,
    build_law,
    clt_rescaling,
    conditional_law,
    kolmogorov_distance,
    power_rescaling,
)
from src.cubic_lab.model import Couplings, ModelParams, phi_d2, stein_lambda
from src.cubic_lab.phase import gamma_of_K, m_star
from src.cubic_lab.stein import (
    RegressionDecomposition,
    alpha_nonnegative_point,
    be_certificate,
    concentration_check,
    conditional_flip_mean,
    cramer_constants,
    cramer_grid,
    cramer_ratio,
    critical_concentration_fit,
    critical_cramer_ratio,
    exact_abs_delta3,
    exact_delta2,
    exact_regression,
    law_at_phase,
    lipschitz_bound,
    mdp_rows,
    mean_flip,
    regression_slope,
    remainder_breakdown,
    smooth_bound,
    threshold_breakdown,
    threshold_point,
    threshold_setup,
)


def configuration_oracle(x, p, scale):
    """E(W - W'|X) and E((W - W')^2|X) summed over the updated site"""
    n = p.n
    s = x.sum()
    m_i = (s - x) / n
    t = np.tanh(p.J * m_i + p.K * m_i**2 + p.K / (3.0 * n * n))
    regression = np.mean(x - t) / scale
    delta2 = 2.0 / scale**2 * np.mean(1.0 - x * t)
    return regression, delta2


@pytest.mark.parametrize("K, J", [(0.2, 0.5), (0.5, 1.3), (0.0, 1.0)])
@pytest.mark.parametrize("n", [2, 5, 10])
def test_exact_pair_quantities_match_configuration_oracle(K, J, n):
    p = ModelParams(K, J, n)
    rv = power_rescaling(n, 0.5)
    for config in itertools.product((-1, 1), repeat=n):
        x = np.array(config, dtype=np.float64)
        s = float(x.sum())
        regression, delta2 = configuration_oracle(x, p, rv.scale)
        assert exact_regression(s, p, rv) == pytest.approx(regression, abs=1e-14)
        assert exact_delta2(s, p, rv) == pytest.approx(delta2, abs=1e-14)


def test_abs_delta3_is_a_multiple_of_delta2():
    p = ModelParams(0.2, 0.5, 50)
    rv = power_rescaling(50, 0.5)
    s = np.arange(-50, 51, 2, dtype=np.float64)
    assert np.allclose(exact_abs_delta3(s, p, rv), rv.jump * np.asarray(exact_delta2(s, p, rv)))


def test_flip_mean_rejects_off_support_values():
    p = ModelParams(0.2, 0.5, 10)
    with pytest.raises(DomainError):
        mean_flip(3.0, p)
    with pytest.raises(DomainError):
        conditional_flip_mean(0.0, ModelParams(0.2, 0.5, 1))


@pytest.mark.parametrize("K, J", [(0.2, 0.5), (0.2, 1.1), (0.5, 0.8)])
def test_regression_has_mean_zero(K, J):
    p = ModelParams(K, J, 2000)
    law, m = law_at_phase(p)
    rv = clt_rescaling(law, m)
    assert float(law.pmf @ np.asarray(exact_regression(law.support, p, rv))) == pytest.approx(0.0, abs=1e-12)


def test_regression_slope_is_lambda():
    p = ModelParams(0.2, 1.1, 20000)
    law, m = law_at_phase(p)
    rv = clt_rescaling(law, m)
    assert regression_slope(law, rv) == pytest.approx(stein_lambda(m, p), rel=0.05)
    assert stein_lambda(m, p) == pytest.approx((1.0 - m * m) * phi_d2(m, p) / p.n, abs=1e-12)


def test_decomposition_validates_lambda():
    with pytest.raises(DomainError):
        RegressionDecomposition.cubic_family(0.0, 2, 1.0 / 3.0)
    decomp = RegressionDecomposition.cubic_family(1e-3, 2, 1.0 / 3.0)
    assert decomp.g(3.0) == pytest.approx(9.0)
    assert decomp.target().c == pytest.approx(quartic(1.0).c)


def test_be_certificate_in_the_paramagnetic_phase():
    n = 4096
    law = build_law(ModelParams(0.2, 0.5, n))
    rv = clt_rescaling(law, 0.0)
    report = be_certificate(law, rv, standard_normal(), RegressionDecomposition.linear(0.0, law.params))
    assert report.hypothesis_ok
    assert report.term_A == pytest.approx(6.0 / rv.scale)
    assert 0.0 < report.dK < 0.05
    assert report.be_bound == pytest.approx(report.term_delta2 + report.term_R + report.term_A)
    assert report.nonuniform_constant >= 0.0
    assert np.isfinite(report.el_bound) and report.el_bound > 0.0
    assert report.lipschitz_bound > 0.0
    row = report.as_rate_row()
    assert row["n"] == n and row["dK"] == report.dK
    assert '"regression_curve"' in report.to_json()


def test_term_delta2_decays_in_the_polarized_phase():
    terms = []
    for n in (1024, 16384):
        law, m = law_at_phase(ModelParams(0.2, 1.1, n))
        rv = clt_rescaling(law, m)
        report = be_certificate(law, rv, standard_normal(), RegressionDecomposition.linear(m, law.params), m=m)
        terms.append(report.term_delta2)
    assert terms[1] < terms[0] / 2.5


def test_critical_certificate_uses_quartic_target():
    n = 4096
    law = build_law(ModelParams(0.0, 1.0, n))
    rv = power_rescaling(n, 0.75)
    decomp = RegressionDecomposition.cubic_family(n**-1.5, 2, 1.0 / 3.0)
    report = be_certificate(law, rv, quartic(1.0), decomp, m=0.0)
    assert report.mode == "cubic-family"
    assert report.dK < 0.05
    # E(Delta^2|W)/(2 lambda) is close to 1 on the bulk of the law
    assert report.term_delta2 < 0.2


def test_law_at_phase_requires_conditioning_on_coexistence():
    p = ModelParams(0.0, 2.0, 400)
    with pytest.raises(CoexistenceError):
        law_at_phase(p)
    law, m = law_at_phase(p, MagnetizationInterval(0.5, 1.0))
    assert m == pytest.approx(0.957504, abs=1e-5)
    assert law.mean_magnetization() == pytest.approx(m, abs=0.01)
    with pytest.raises(DomainError):
        law_at_phase(p, MagnetizationInterval(-1.0, 1.0))


def test_breakdowns_are_finite():
    law, m = law_at_phase(ModelParams(0.2, 1.1, 2048))
    pieces = remainder_breakdown(law, clt_rescaling(law, m), m)
    assert all(np.isfinite(v) and v >= 0.0 for v in pieces.values())
    assert pieces["r1"] < 1e-3

    n = 2048
    critical = build_law(ModelParams(0.0, 1.0, n))
    pieces = threshold_breakdown(critical, power_rescaling(n, 0.75), n**-1.5)
    assert pieces["quadratic"] == 0.0
    assert all(np.isfinite(v) for v in pieces.values())


@pytest.mark.parametrize("K, J", [(0.2, 0.5), (0.2, 1.1), (0.5, 0.8)])
@pytest.mark.parametrize("n", [100, 1000, 10000])
def test_concentration_inequality_holds(K, J, n):
    rows = concentration_check(build_law(ModelParams(K, J, n)), np.arange(0.0, 5.01, 0.5))
    assert all(row["holds"] for row in rows)


def test_concentration_needs_positive_J():
    with pytest.raises(DomainError):
        concentration_check(build_law(ModelParams(0.2, 0.0, 10)), [1.0])


def test_critical_concentration_fit():
    fit = critical_concentration_fit(build_law(ModelParams(0.0, 1.0, 4096)), [0.5, 1.0, 1.5, 2.0])
    assert 0.0 < fit["c"] < np.inf
    assert all(row["probability"] <= row["bound"] + 1e-15 for row in fit["rows"])


def test_cramer_residual_is_stable_in_n():
    maxima = []
    for n in (1024, 4096, 16384):
        law = build_law(ModelParams(0.2, 0.5, n))
        rows = cramer_ratio(law, clt_rescaling(law, 0.0), cramer_grid(n))
        maxima.append(max(row["normalized_residual"] for row in rows))
    assert max(maxima) < 10.0
    assert max(maxima) / min(maxima) < 3.0


def test_critical_cramer_ratio_near_one():
    law = build_law(ModelParams(0.0, 1.0, 16384))
    rows = critical_cramer_ratio(law, [0.0, 0.5, 1.0])
    assert all(abs(row["ratio"] - 1.0) < 0.1 for row in rows)
    with pytest.raises(DomainError):
        critical_cramer_ratio(build_law(ModelParams(0.2, 0.5, 100)), [0.0])


def test_cramer_constants():
    law = build_law(ModelParams(0.2, 0.5, 4096))
    constants = cramer_constants(law, clt_rescaling(law, 0.0), 0.0)
    assert constants.theta >= 1.0
    assert constants.delta1 >= 0.0 and constants.delta2 >= 0.0
    assert constants.x_max > 0.0
    assert constants.d == pytest.approx(0.25 * np.sqrt(0.5))


def test_mdp_rows_approach_the_limit():
    x_grid = [0.5, 1.0, 1.5]
    gaps = []
    for n in (1024, 4096, 16384, 65536):
        law = build_law(ModelParams(0.2, 0.5, n))
        rows = mdp_rows(law, clt_rescaling(law, 0.0), x_grid)
        gaps.append([abs(row["scaled_log_tail"] - row["limit"]) for row in rows])
    for column in zip(*gaps):
        assert all(b < a for a, b in zip(column, column[1:]))


def test_threshold_setup_case1():
    p, rv, target, decomp = threshold_setup(1, -1.0, 1024)
    assert p.K == pytest.approx(1.0 / 32.0)
    assert p.J == pytest.approx(1.0 - 1.0 / 32.0)
    assert rv.scale == pytest.approx(1024**0.75)
    assert target.c == pytest.approx(mixed(-1.0, p.J).c)
    assert decomp.a1 == 1.0
    with pytest.raises(DomainError):
        threshold_setup(1, 0.5, 1024)
    with pytest.raises(DomainError):
        threshold_setup(3, -1.0, 1024, delta=0.3)


def test_threshold_point_is_at_zero_magnetization():
    row = threshold_point(1, -1.0, 0.1, 1024)
    assert row["excluded"] is False
    assert 0.0 < row["dK"] < 0.2
    m, _ = m_star(ModelParams(row["K"], row["J"], 1024).couplings)
    assert m == 0.0


def test_alpha_nonnegative_point_is_not_certified():
    row = alpha_nonnegative_point(0.0, 0.25, 4096)
    assert row["certified"] is False
    assert row["m_star"] > 0.0
    assert 0.0 <= row["dK_candidate"] <= 1.0
    with pytest.raises(DomainError):
        alpha_nonnegative_point(-1.0, 0.25, 4096)


def test_smooth_bound_switches_on_the_second_moment():
    A, lam = 0.1, 0.5
    inside = smooth_bound(0.01, 0.0, lam, A, 1.0, 0.8)
    assert inside == pytest.approx(0.1 + 0.41 * A**3 / lam + 1.5 * A)
    outside = smooth_bound(0.01, 0.0, lam, A, 4.0, 1.5)
    assert outside == pytest.approx(0.1 + A**3 / lam * (np.sqrt(2.0 * np.pi) / 16.0 + 0.5) + 1.5 * A * 1.5)


def test_lipschitz_bound():
    assert lipschitz_bound(0.1, 0.02, 1e-4, 0.5) == pytest.approx(0.8)


def test_be_certificate_for_independent_spins():
    n = 1000
    law = build_law(ModelParams(0.0, 0.0, n))
    rv = clt_rescaling(law, 0.0)
    assert rv.scale == pytest.approx(np.sqrt(n))
    decomp = RegressionDecomposition.linear(0.0, law.params)
    remainder = np.asarray(exact_regression(law.support, law.params, rv)) - decomp.lam * rv.apply(law.support)
    assert np.max(np.abs(remainder)) <= 1e-15
    report = be_certificate(law, rv, standard_normal(), decomp)
    assert report.term_R == pytest.approx(0.0, abs=1e-12)
    assert report.term_delta2 == pytest.approx(0.0, abs=1e-12)
    assert report.be_bound == pytest.approx(6.0 / np.sqrt(n), rel=1e-10)


def test_be_bound_dominates_the_exact_distance():
    n = 2**12
    law = build_law(ModelParams(0.2, 0.5, n))
    rv = clt_rescaling(law, 0.0)
    report = be_certificate(law, rv, standard_normal(), RegressionDecomposition.linear(0.0, law.params))
    exact = kolmogorov_distance(law, rv, standard_normal().cdf)
    assert report.dK == pytest.approx(exact, abs=1e-12)
    assert report.be_bound >= exact


def test_mean_magnetization_is_close_to_the_pure_phase():
    p = ModelParams(0.2, 1.1, 10_000)
    m, _ = m_star(p.couplings)
    assert abs(build_law(p).mean_magnetization() - m) <= 0.01


def test_conditional_cramer_ratio_at_a_coexistence_point():
    K, n = 0.3, 2**16
    point = gamma_of_K(K)
    law = build_law(ModelParams(K, point.J_gamma, n))
    half_width = 0.2 * abs(point.m_high - point.m_low)
    for m in (point.m_low, point.m_high):
        assert phi_d2(m, Couplings(K, point.J_gamma)) > 0.0
        phase = conditional_law(law, MagnetizationInterval(m - half_width, m + half_width))
        rows = cramer_ratio(phase, clt_rescaling(phase, m), [0.0, 0.5, 1.0, 1.5])
        for row in rows:
            assert np.isfinite(row["ratio"])
            assert 0.5 < row["ratio"] < 2.0
