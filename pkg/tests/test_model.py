import mpmath as mp
import numpy as np
import pytest

from src.cubic_lab.errors import DomainError
from src.cubic_lab.model import (
    Couplings,
    ModelParams,
    binary_entropy,
    clt_variance,
    mean_field_residual,
    phi,
    phi_d1,
    phi_d2,
    phi_d3,
    stein_lambda,
    tanh_chain_derivative,
    tanh_d1,
    taylor_coeffs,
)
from src.cubic_lab.phase import find_stationary_points


def test_binary_entropy_endpoints():
    assert binary_entropy(0.0) == pytest.approx(-np.log(2.0))
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(-1.0) == 0.0


def test_rejects_invalid_parameters():
    with pytest.raises(DomainError):
        Couplings(-0.1, 1.0)
    with pytest.raises(DomainError):
        Couplings(float("nan"), 1.0)
    with pytest.raises(DomainError):
        ModelParams(0.2, 0.5, 0)
    with pytest.raises(DomainError):
        phi(1.5, Couplings(0.2, 0.5))
    with pytest.raises(DomainError):
        phi_d1(1.0, Couplings(0.2, 0.5))


@pytest.mark.parametrize("m", [-0.7, -0.2, 0.1, 0.45, 0.8])
def test_phi_derivatives_match_finite_differences(m):
    p = Couplings(0.3, 0.9)
    h = 1e-5
    assert phi_d1(m, p) == pytest.approx((phi(m + h, p) - phi(m - h, p)) / (2 * h), rel=1e-6, abs=1e-8)
    assert phi_d2(m, p) == pytest.approx((phi_d1(m + h, p) - phi_d1(m - h, p)) / (2 * h), rel=1e-6, abs=1e-8)
    assert phi_d3(m, p) == pytest.approx((phi_d2(m + h, p) - phi_d2(m - h, p)) / (2 * h), rel=1e-6, abs=1e-8)


def test_mean_field_residual_vanishes_at_zero():
    assert mean_field_residual(0.0, Couplings(0.5, 1.3)) == 0.0


def test_functions_are_elementwise():
    p = Couplings(0.2, 0.5)
    m = np.linspace(-0.9, 0.9, 7)
    values = np.asarray(phi_d2(m, p))
    assert values.shape == m.shape
    assert values[3] == pytest.approx(1.0 - 0.5)


@pytest.mark.parametrize("order", [1, 2, 3, 4, 5])
def test_tanh_chain_derivative_against_mpmath(order):
    p = Couplings(0.4, 1.2)
    m, x = 0.3, 0.1
    mp.mp.dps = 40
    expected = mp.diff(lambda y: mp.tanh(p.J * (m + y) + p.K * (m + y) ** 2), x, order)
    assert tanh_chain_derivative(order, x, m, p) == pytest.approx(float(expected), rel=1e-9, abs=1e-12)


def test_taylor_coeffs_are_chain_derivatives_at_zero():
    p = Couplings(0.4, 1.2)
    m = 0.25
    c = taylor_coeffs(m, p)
    for order in range(4):
        assert c[order] == pytest.approx(tanh_chain_derivative(order, 0.0, m, p), rel=1e-12)


def test_chain_derivative_rejects_high_order():
    with pytest.raises(DomainError):
        tanh_chain_derivative(6, 0.0, 0.0, Couplings(0.1, 0.5))


@pytest.mark.parametrize("m", [0.0, 0.3, 0.8])
def test_stein_lambda_agrees_with_curvature_form(m):
    p = ModelParams(0.2, 1.1, 1000)
    curvature_form = (1.0 - m * m) * phi_d2(m, p) / p.n
    assert stein_lambda(m, p) == pytest.approx(curvature_form, abs=1e-12)


def test_clt_variance_needs_positive_curvature():
    p = ModelParams(0.0, 0.5, 100)
    assert clt_variance(0.0, p) == pytest.approx(200.0)
    with pytest.raises(DomainError):
        clt_variance(0.0, ModelParams(0.0, 2.0, 100))


def test_binary_entropy_against_mpmath():
    mp.mp.dps = 30
    expected = mp.mpf("0.75") * mp.log(mp.mpf("0.75")) + mp.mpf("0.25") * mp.log(mp.mpf("0.25"))
    assert binary_entropy(0.5) == pytest.approx(float(expected), rel=1e-14)


@pytest.mark.parametrize("J", [0.5, 1.0, 2.0])
def test_phi_is_even_without_cubic_term(J):
    p = Couplings(0.0, J)
    m = np.linspace(0.05, 0.95, 19)
    assert np.allclose(phi(m, p), phi(-m, p), rtol=0.0, atol=1e-15)


@pytest.mark.parametrize("K, J", [(0.0, 0.7), (0.2, 0.5), (0.5, 1.3), (1.0, 2.0)])
def test_taylor_coeffs_at_zero_magnetization(K, J):
    c0, c1, c2, c3 = taylor_coeffs(0.0, Couplings(K, J))
    assert c0 == 0.0
    assert c1 == pytest.approx(J)
    assert c2 == pytest.approx(2.0 * K)
    assert c3 == pytest.approx(-2.0 * J**3)


EQUILIBRIUM_COUPLINGS = [(0.0, 2.0), (0.2, 1.1), (0.5, 1.3), (0.3, 0.9), (1.0, 0.5)]


@pytest.mark.parametrize("K, J", EQUILIBRIUM_COUPLINGS)
def test_equilibrium_identities(K, J):
    p = Couplings(K, J)
    for point in find_stationary_points(p):
        m = point.m
        dd = float(phi_d2(m, p))
        t = np.tanh(J * m + K * m * m)
        assert float(tanh_d1(t)) * (J + 2.0 * K * m + dd) == pytest.approx(1.0, abs=1e-10)
        c1 = taylor_coeffs(m, p)[1]
        assert c1 == pytest.approx((J + 2.0 * K * m) * (1.0 - m * m), abs=1e-10)
        assert c1 == pytest.approx(1.0 - (1.0 - m * m) * dd, abs=1e-10)


@pytest.mark.parametrize("K, J", [(0.0, 0.5), (0.2, 0.5), (0.7, 0.9)])
def test_second_coefficient_curvature_form_at_zero(K, J):
    p = Couplings(K, J)
    c2 = taylor_coeffs(0.0, p)[2]
    assert c2 == pytest.approx(-float(phi_d3(0.0, p)), abs=1e-14)
    assert c2 == pytest.approx(2.0 * K)


def test_second_coefficient_away_from_zero_uses_the_direct_formula():
    # At a polarized equilibrium c2 = (1 - m^2)(2K - 2m(J + 2Km)^2), which differs from
    # 2m(1 - m^2) phi''(m) - (1 - m^2) phi'''(m)
    p = Couplings(0.2, 1.1)
    m = max(point.m for point in find_stationary_points(p))
    assert m > 0.5
    c2 = taylor_coeffs(m, p)[2]
    direct = (1.0 - m * m) * (2.0 * p.K - 2.0 * m * (p.J + 2.0 * p.K * m) ** 2)
    assert c2 == pytest.approx(direct, abs=1e-10)
    curvature_form = 2.0 * m * (1.0 - m * m) * float(phi_d2(m, p)) - (1.0 - m * m) * float(phi_d3(m, p))
    assert abs(c2 - curvature_form) > 0.1
