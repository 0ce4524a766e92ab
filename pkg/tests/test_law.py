import numpy as np
import pytest
from scipy.special import ndtr

from src.cubic_lab.errors import DomainError, EmptyConditionError
from src.cubic_lab.law import (
    MagnetizationInterval,
    brute_force_law,
    build_law,
    cdf_rescaled,
    cdf_table,
    clt_rescaling,
    conditional_law,
    hypotheses,
    kolmogorov_distance,
    kolmogorov_distance_between,
    log_sf_rescaled,
    moments,
    power_rescaling,
    sf_rescaled,
    step_cdf,
    variance_rescaling,
)
from src.cubic_lab.model import ModelParams


@pytest.mark.parametrize("K", [0.0, 0.2, 0.5])
@pytest.mark.parametrize("J", [0.5, 1.0, 1.5])
def test_exact_law_matches_enumeration(K, J):
    for n in range(1, 13):
        p = ModelParams(K, J, n)
        exact = build_law(p).pmf
        brute = brute_force_law(p)
        assert np.max(np.abs(exact - brute) / brute) <= 1e-12


def test_brute_force_is_limited():
    with pytest.raises(DomainError):
        brute_force_law(ModelParams(0.1, 0.5, 17))


def test_pmf_is_normalized_and_symmetric_without_cubic_term():
    law = build_law(ModelParams(0.0, 0.8, 501))
    assert law.pmf.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.array_equal(law.pmf, law.pmf[::-1])
    assert law.mean_magnetization() == pytest.approx(0.0, abs=1e-15)


def test_large_n_stays_finite():
    law = build_law(ModelParams(0.5, 1.5, 1 << 16))
    assert np.all(np.isfinite(law.log_pmf))
    assert law.pmf.sum() == pytest.approx(1.0, abs=1e-12)


def test_conditional_law_lives_on_the_interval():
    law = build_law(ModelParams(0.0, 2.0, 200))
    cond = conditional_law(law, MagnetizationInterval(0.0, 1.0, closed_lo=False))
    assert cond.pmf.sum() == pytest.approx(1.0)
    assert np.all(cond.pmf[law.magnetization <= 0.0] == 0.0)
    # By symmetry the positive half carries exactly half of the mass
    half = law.pmf[law.magnetization > 0.0]
    assert np.allclose(cond.pmf[law.magnetization > 0.0], half / half.sum(), rtol=1e-12)


def test_conditioning_on_an_empty_set():
    law = build_law(ModelParams(0.2, 0.5, 4))
    with pytest.raises(EmptyConditionError) as info:
        conditional_law(law, MagnetizationInterval(0.1, 0.2))
    assert info.value.exit_code == 4


def test_cdf_and_survival_are_complementary():
    law = build_law(ModelParams(0.2, 1.1, 400))
    rv = power_rescaling(400, 0.5, center=400 * 0.5)
    for z in (-3.0, -0.5, 0.0, 0.7, 2.5):
        assert cdf_rescaled(law, rv, z) + sf_rescaled(law, rv, z) == pytest.approx(1.0, abs=1e-13)
    assert log_sf_rescaled(law, rv, 1e6) == float("-inf")


def test_cdf_is_right_continuous_at_atoms():
    law = build_law(ModelParams(0.0, 0.5, 10))
    rv = power_rescaling(10, 0.0)
    assert cdf_rescaled(law, rv, -10.0) == pytest.approx(law.pmf[0])
    assert cdf_rescaled(law, rv, -10.0 - 1e-9) == 0.0


def test_distance_of_a_law_to_itself():
    law = build_law(ModelParams(0.3, 0.7, 300))
    rv = clt_rescaling(law, 0.0)
    assert kolmogorov_distance(law, rv, step_cdf(law, rv)) == pytest.approx(0.0, abs=1e-14)
    assert kolmogorov_distance_between(law, rv, law, rv) == 0.0


def test_kolmogorov_distance_sees_the_jump():
    # A single atom at 0 against N(0, 1): the distance is 1/2
    law = build_law(ModelParams(0.0, 0.5, 2))
    cond = conditional_law(law, MagnetizationInterval(-0.1, 0.1))
    rv = power_rescaling(2, 0.0)
    assert kolmogorov_distance(cond, rv, ndtr) == pytest.approx(0.5)


def test_clt_rescaling_standardizes():
    n = 4096
    law = build_law(ModelParams(0.2, 0.5, n))
    rv = clt_rescaling(law, 0.0)
    assert rv.scale == pytest.approx(np.sqrt(n / 0.5))
    mean, second = moments(law, rv, [1, 2])
    assert mean == pytest.approx(0.0, abs=0.03)
    assert second == pytest.approx(1.0, abs=0.02)
    first_abs, _ = hypotheses(law, rv)
    assert first_abs <= 2.0


def test_variance_rescaling_needs_subcritical_J():
    assert variance_rescaling(100, 0.5).scale == pytest.approx(np.sqrt(200.0))
    with pytest.raises(DomainError):
        variance_rescaling(100, 1.0)


def test_cdf_table_rows():
    law = build_law(ModelParams(0.2, 0.5, 100))
    rv = clt_rescaling(law, 0.0)
    table = cdf_table(law, rv, [-1.0, 0.0, 1.0], ndtr)
    assert [row["z"] for row in table] == [-1.0, 0.0, 1.0]
    assert table[1]["target"] == pytest.approx(0.5)
    assert table[0]["cdf"] <= table[1]["cdf"] <= table[2]["cdf"]


@pytest.mark.parametrize("K", [0.1, 0.5])
@pytest.mark.parametrize("J", [0.5, 1.2])
@pytest.mark.parametrize("n", [9, 100, 1001])
def test_positive_cubic_term_favours_positive_magnetization(K, J, n):
    law = build_law(ModelParams(K, J, n))
    positive = law.support > 0
    mirrored = law.pmf[::-1]
    assert np.all(law.pmf[positive] >= mirrored[positive])
    assert law.mean_magnetization() > 0.0


@pytest.mark.parametrize("n", [50, 400])
def test_kolmogorov_distance_triangle_inequality(n):
    rv = power_rescaling(n, 0.5)
    laws = [build_law(ModelParams(K, J, n)) for K, J in [(0.0, 0.5), (0.3, 0.9), (0.6, 1.4)]]
    d = {
        (i, j): kolmogorov_distance_between(laws[i], rv, laws[j], rv)
        for i in range(3)
        for j in range(3)
    }
    for i in range(3):
        assert d[(i, i)] == 0.0
        for j in range(3):
            assert d[(i, j)] == pytest.approx(d[(j, i)], abs=1e-15)
            for k in range(3):
                assert d[(i, k)] <= d[(i, j)] + d[(j, k)] + 1e-15
