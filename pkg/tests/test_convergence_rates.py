"""Fitted convergence rates over n = 2^10..2^16"""

import numpy as np
import pytest

from src.cubic_lab.experiments import be_point
from src.cubic_lab.rates import fit_rate
from src.cubic_lab.stein import threshold_experiment

N_GRID = [2**k for k in range(10, 17)]

pytestmark = pytest.mark.slow


def rate(rows, key="dK"):
    return fit_rate([r["n"] for r in rows], [r[key] for r in rows])


@pytest.mark.parametrize("K, J", [(0.2, 0.5), (0.2, 1.1), (0.5, 0.8)])
def test_clt_rate(K, J):
    fit = rate([be_point(K, J, None, n) for n in N_GRID])
    assert fit.slope == pytest.approx(-0.5, abs=0.15)
    assert fit.r_squared >= 0.98


def test_critical_quartic_rate():
    fit = rate([be_point(0.0, 1.0, None, n) for n in N_GRID])
    assert fit.slope == pytest.approx(-0.5, abs=0.15)


def test_polarized_delta2_term_rate():
    fit = rate([be_point(0.2, 1.1, None, n) for n in N_GRID], key="bound_term1")
    assert fit.slope == pytest.approx(-0.5, abs=0.15)


def test_mixed_threshold_rate():
    result = threshold_experiment(1, -1.0, N_GRID)
    assert result.fit is not None
    assert result.fit.slope <= -0.2
    scaled = np.array([r["dK"] * r["n"] ** 0.25 for r in result.rows])
    assert scaled.max() / scaled.min() <= 2.0


@pytest.mark.parametrize("delta, bound", [(0.1, -0.3), (0.2, -0.15)])
def test_slow_threshold_rate(delta, bound):
    result = threshold_experiment(3, -1.0, N_GRID, delta=delta)
    assert result.fit is not None
    assert result.fit.slope <= bound
