"""Log-log least squares for convergence rates"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from .config import logger
from .errors import DomainError
from .types import RateFitSummary


@dataclass(frozen=True)
class RateFit:
    """value ~ exp(intercept) * n^slope"""

    pairs: Tuple[Tuple[int, float], ...]
    slope: float
    intercept: float
    r_squared: float

    def summary(self) -> RateFitSummary:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "points": len(self.pairs),
        }

    def scaled(self) -> List[float]:
        """value * n^(-slope); roughly constant when the fit is good"""
        return [v * n ** (-self.slope) for n, v in self.pairs]


def fit_rate(ns: Sequence[int], values: Sequence[float], label: str = "") -> RateFit:
    pairs = [(int(n), float(v)) for n, v in zip(ns, values) if v > 0 and np.isfinite(v)]
    if len(pairs) < 2:
        raise DomainError(f"rate fit {label!r} needs at least two positive values, got {len(pairs)}")
    x = np.log([n for n, _ in pairs])
    y = np.log([v for _, v in pairs])
    result = linregress(x, y)
    r2 = float(min(max(result.rvalue**2, 0.0), 1.0))
    if label:
        logger.info(f"Rate fit {label}: slope {result.slope:.4f}, r^2 {r2:.4f} over {len(pairs)} points")
    return RateFit(
        pairs=tuple(pairs),
        slope=float(result.slope),
        intercept=float(result.intercept),
        r_squared=r2,
    )
