"""Stein diagnostics tools"""

from ..config import logger
from ..experiments import be_point, concentration_point, cramer_point, parse_grid, parse_interval
from ..runner import dumps


def berry_esseen_certificate(K: float, J: float, n: int, condition: str = "") -> str:
    """
    Exact Kolmogorov distance with the exchangeable-pair bound terms at one n

    At (K, J) = (0, 1) the variable is S_n/n^(3/4) and the target the quartic law.

    Parameters:
    - K: Three-body coupling, K >= 0
    - J: Two-body coupling, J > 0
    - n: Number of spins
    - condition: Interval lo:hi around one phase, required on the coexistence curve
    """
    try:
        return dumps(be_point(K, J, parse_interval(condition), n))
    except Exception as e:
        error_msg = f"Failed to compute Berry-Esseen certificate: {str(e)}"
        logger.error(error_msg)
        return error_msg


def concentration_table(K: float, J: float, n: int, t_grid: str = "0:5:0.5") -> str:
    """
    Exact concentration probabilities of m - tanh(Jm + Km^2) against 2 exp(-t^2/(4(1+J+2K)))

    Parameters:
    - K: Three-body coupling, K >= 0
    - J: Two-body coupling, J > 0
    - n: Number of spins
    - t_grid: Grid of t values, e.g. 0:5:0.5 or 1,2,3
    """
    try:
        rows = concentration_point(K, J, parse_grid(t_grid), n)
        return dumps({"violations": sum(1 for r in rows if not r["holds"]), "rows": rows})
    except Exception as e:
        error_msg = f"Failed to compute concentration table: {str(e)}"
        logger.error(error_msg)
        return error_msg


def cramer_table(K: float, J: float, n: int, x_grid: str = "", condition: str = "") -> str:
    """
    Tail ratios P(W > x)/P(Z > x) with the moderate-deviation constants

    Parameters:
    - K: Three-body coupling, K >= 0
    - J: Two-body coupling, J > 0
    - n: Number of spins
    - x_grid: Grid of x >= 0 values; default 16 points on [0, n^(1/6)]
    - condition: Interval lo:hi around one phase, required on the coexistence curve
    """
    try:
        x_values = parse_grid(x_grid) if x_grid else None
        return dumps(cramer_point(K, J, x_values, parse_interval(condition), n))
    except Exception as e:
        error_msg = f"Failed to compute Cramer table: {str(e)}"
        logger.error(error_msg)
        return error_msg
