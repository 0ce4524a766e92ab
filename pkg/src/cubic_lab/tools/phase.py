"""Phase diagram tools"""

from ..config import logger
from ..model import Couplings
from ..phase import gamma_of_K, phase_portrait as compute_portrait
from ..runner import dumps


def phase_portrait(K: float, J: float) -> str:
    """
    Stationary points of phi with their kinds, the global minimizers and the phase label

    Parameters:
    - K: Three-body coupling, K >= 0
    - J: Two-body coupling, J > 0
    """
    try:
        portrait = compute_portrait(Couplings(K, J))
        return dumps({
            "K": K,
            "J": J,
            "phase_label": portrait.phase_label,
            "global_minimizers": portrait.global_minimizers,
            "inf_phi": portrait.inf_phi,
            "stationary_points": [
                {"m": pt.m, "phi": pt.phi_value, "phi_dd": pt.phi_dd, "kind": pt.kind}
                for pt in portrait.stationary_points
            ],
        })
    except Exception as e:
        error_msg = f"Failed to compute phase portrait: {str(e)}"
        logger.error(error_msg)
        return error_msg


def coexistence_point(K: float) -> str:
    """
    The coupling J = gamma(K) where m = 0 and a positive phase have equal depth

    Parameters:
    - K: Three-body coupling, K > 0
    """
    try:
        return dumps(gamma_of_K(K).as_row())
    except Exception as e:
        error_msg = f"Failed to locate coexistence point: {str(e)}"
        logger.error(error_msg)
        return error_msg
