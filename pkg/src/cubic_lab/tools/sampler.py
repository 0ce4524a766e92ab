"""Glauber sampler tools"""

from ..config import logger
from ..model import ModelParams
from ..runner import dumps, runner
from ..sampler import sample_magnetization


def sample_chain(K: float, J: float, n: int, samples: int = 10_000, seed: int = 0) -> str:
    """
    Run a heat-bath Glauber chain and compare the sampled S_n with the exact law

    Parameters:
    - K: Three-body coupling, K >= 0
    - J: Two-body coupling, J > 0
    - n: Number of spins
    - samples: Number of recorded states, one per sweep after 100 sweeps of burn-in
    - seed: Seed of the random stream
    """
    try:
        empirical = sample_magnetization(ModelParams(K, J, n), samples, seed=seed)
        law = runner.law(K, J, n)
        return dumps({
            **empirical.metadata(),
            "mean_S": empirical.mean,
            "standard_error": empirical.standard_error,
            "exact_mean_S": float(law.pmf @ law.support),
            "ks_distance": empirical.ks_distance(law),
        })
    except Exception as e:
        error_msg = f"Failed to sample chain: {str(e)}"
        logger.error(error_msg)
        return error_msg
