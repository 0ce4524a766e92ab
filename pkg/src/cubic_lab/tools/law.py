"""Exact magnetization law tools"""

import numpy as np

from ..config import logger
from ..densities import standard_normal
from ..experiments import parse_interval
from ..law import clt_rescaling, conditional_law, kolmogorov_distance
from ..model import ModelParams
from ..runner import dumps, runner
from ..stein import law_at_phase


def magnetization_law_summary(K: float, J: float, n: int, condition: str = "") -> str:
    """
    Summary of the exact law of the total magnetization S_n

    Parameters:
    - K: Three-body coupling, K >= 0
    - J: Two-body coupling, J > 0
    - n: Number of spins
    - condition: Optional interval lo:hi of m to condition on
    """
    try:
        law = runner.law(K, J, n)
        interval = parse_interval(condition)
        if interval is not None:
            law = conditional_law(law, interval)
        pmf = law.pmf
        m = law.magnetization
        mean = float(pmf @ m)
        return dumps({
            "n": n,
            "K": K,
            "J": J,
            "condition": condition or None,
            "log_Z": law.log_Z,
            "mean_m": mean,
            "mean_abs_m": float(pmf @ np.abs(m)),
            "var_m": float(pmf @ (m - mean) ** 2),
            "mode_s": int(law.support[int(np.argmax(pmf))]),
        })
    except Exception as e:
        error_msg = f"Failed to build magnetization law: {str(e)}"
        logger.error(error_msg)
        return error_msg


def kolmogorov_to_normal(K: float, J: float, n: int, condition: str = "") -> str:
    """
    Exact Kolmogorov distance between the CLT-rescaled S_n and N(0, 1)

    Parameters:
    - K: Three-body coupling, K >= 0
    - J: Two-body coupling, J > 0
    - n: Number of spins
    - condition: Interval lo:hi around one phase, required on the coexistence curve
    """
    try:
        law, m = law_at_phase(ModelParams(K, J, n), parse_interval(condition))
        rv = clt_rescaling(law, m)
        return dumps({
            "n": n,
            "K": K,
            "J": J,
            "m_star": m,
            "scale": rv.scale,
            "dK": kolmogorov_distance(law, rv, standard_normal().cdf),
        })
    except Exception as e:
        error_msg = f"Failed to compute Kolmogorov distance: {str(e)}"
        logger.error(error_msg)
        return error_msg
