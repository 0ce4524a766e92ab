"""Exact finite-n law of the total magnetization S_n

The Gibbs weight depends on a configuration only through m = S_n/n, so the law of
S_n on {-n, -n+2, ..., n} is the binomial count times exp(n((K/3)m^3 + (J/2)m^2)).
All arithmetic stays in the log domain.
"""

import csv
import io
import itertools
import json
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy.special import gammaln, logsumexp

from .config import logger
from .errors import DomainError, EmptyConditionError
from .model import FloatArray, ModelParams, clt_variance
from .types import LawRow

TargetCdf = Callable[[FloatArray], FloatArray]


@dataclass(frozen=True, eq=False)
class MagnetizationLaw:
    """Exact log-domain pmf of S_n; log_weights[j] belongs to s = 2j - n"""

    params: ModelParams
    log_weights: FloatArray
    log_Z: float

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def support(self) -> FloatArray:
        return np.arange(-self.n, self.n + 1, 2, dtype=np.float64)

    @property
    def magnetization(self) -> FloatArray:
        return self.support / self.n

    @property
    def log_pmf(self) -> FloatArray:
        return self.log_weights - self.log_Z

    @property
    def pmf(self) -> FloatArray:
        return np.exp(self.log_pmf)

    def mean_magnetization(self) -> float:
        return float(np.dot(self.pmf, self.magnetization))

    def rows(self) -> List[LawRow]:
        pmf = self.pmf
        return [
            {"s": int(s), "m": float(s) / self.n, "pmf": float(p)}
            for s, p in zip(self.support, pmf)
        ]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=["s", "m", "pmf"])
        writer.writeheader()
        writer.writerows(self.rows())
        return buffer.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "K": self.params.K,
            "J": self.params.J,
            "log_Z": self.log_Z,
            "pmf": [row["pmf"] for row in self.rows()],
        })


@dataclass(frozen=True)
class RescaledVariable:
    """w = (s - center)/scale"""

    center: float
    scale: float
    label: str = "custom"

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale}")

    def apply(self, s: FloatArray) -> FloatArray:
        return (s - self.center) / self.scale

    @property
    def jump(self) -> float:
        """Almost sure bound A on |W - W'| for one spin update"""
        return 2.0 / self.scale


@dataclass(frozen=True)
class MagnetizationInterval:
    """Set A of magnetization values used for conditioning"""

    lo: float = -1.0
    hi: float = 1.0
    closed_lo: bool = True
    closed_hi: bool = True

    def contains(self, m: FloatArray) -> npt.NDArray[np.bool_]:
        above = m >= self.lo if self.closed_lo else m > self.lo
        below = m <= self.hi if self.closed_hi else m < self.hi
        return np.asarray(above & below)


def log_binomial(n: int, j: FloatArray) -> FloatArray:
    return np.asarray(gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1))


def build_law(p: ModelParams) -> MagnetizationLaw:
    """Exact law of S_n in O(n)"""
    n = p.n
    j = np.arange(n + 1, dtype=np.float64)
    m = (2.0 * j - n) / n
    log_weights = log_binomial(n, j) + n * (p.K / 3.0 * m**3 + p.J / 2.0 * m**2)
    if p.K == 0.0:
        # Mirror so that P(S = s) and P(S = -s) are bitwise equal
        log_weights = 0.5 * (log_weights + log_weights[::-1])
    log_Z = float(logsumexp(log_weights))
    if n >= 1 << 14:
        logger.info(f"Built exact law for n={n}, K={p.K:g}, J={p.J:g}")
    return MagnetizationLaw(params=p, log_weights=log_weights, log_Z=log_Z)


def brute_force_law(p: ModelParams) -> FloatArray:
    """pmf of S_n by enumerating all 2^n configurations"""
    if p.n > 16:
        raise DomainError(f"brute-force enumeration is limited to n <= 16, got {p.n}")
    n = p.n
    weights = np.zeros(n + 1)
    for config in itertools.product((-1, 1), repeat=n):
        s = sum(config)
        m = s / n
        weights[(s + n) // 2] += np.exp(n * (p.K / 3.0 * m**3 + p.J / 2.0 * m**2))
    return weights / weights.sum()


def clt_rescaling(law: MagnetizationLaw, m: float) -> RescaledVariable:
    """W = (S_n - n m)/sigma with sigma^2 = n/phi''(m)"""
    sigma = float(np.sqrt(clt_variance(m, law.params)))
    return RescaledVariable(center=law.n * m, scale=sigma, label="clt")


def power_rescaling(n: int, exponent: float, center: float = 0.0) -> RescaledVariable:
    """W = (S_n - center)/n^exponent"""
    return RescaledVariable(center=center, scale=float(n) ** exponent, label=f"power-{exponent:g}")


def variance_rescaling(n: int, J: float) -> RescaledVariable:
    """W = S_n/sigma with sigma = sqrt(n/(1 - J)), for J < 1"""
    if J >= 1.0:
        raise DomainError(f"variance rescaling needs J < 1, got {J}")
    return RescaledVariable(center=0.0, scale=float(np.sqrt(n / (1.0 - J))), label="variance")


def _cumulative(law: MagnetizationLaw) -> FloatArray:
    return np.minimum(np.cumsum(law.pmf), 1.0)


def cdf_rescaled(law: MagnetizationLaw, rv: RescaledVariable, z: float | FloatArray) -> Any:
    """P(W_n <= z), right-continuous step function"""
    w = rv.apply(law.support)
    cum = np.concatenate(([0.0], _cumulative(law)))
    idx = np.searchsorted(w, np.asarray(z, dtype=np.float64), side="right")
    out = cum[idx]
    return float(out) if np.ndim(out) == 0 else out


def log_sf_rescaled(law: MagnetizationLaw, rv: RescaledVariable, z: float) -> float:
    """log P(W_n > z) summed in the log domain"""
    w = rv.apply(law.support)
    mask = w > z
    if not mask.any():
        return float("-inf")
    return float(logsumexp(law.log_pmf[mask]))


def sf_rescaled(law: MagnetizationLaw, rv: RescaledVariable, z: float) -> float:
    return float(np.exp(log_sf_rescaled(law, rv, z)))


def kolmogorov_distance(law: MagnetizationLaw, rv: RescaledVariable, target_cdf: TargetCdf) -> float:
    """sup_z |P(W_n <= z) - target(z)|, attained at atoms or their left limits"""
    w = rv.apply(law.support)
    cum = _cumulative(law)
    before = np.concatenate(([0.0], cum[:-1]))
    at = np.asarray(target_cdf(w))
    left = np.asarray(target_cdf(np.nextafter(w, -np.inf)))
    return float(max(np.max(np.abs(cum - at)), np.max(np.abs(before - left))))


def kolmogorov_distance_between(
    law_a: MagnetizationLaw,
    rv_a: RescaledVariable,
    law_b: MagnetizationLaw,
    rv_b: RescaledVariable,
) -> float:
    """Exact Kolmogorov distance between two discrete laws"""
    atoms = np.union1d(rv_a.apply(law_a.support), rv_b.apply(law_b.support))
    fa = np.asarray(cdf_rescaled(law_a, rv_a, atoms))
    fb = np.asarray(cdf_rescaled(law_b, rv_b, atoms))
    return float(np.max(np.abs(fa - fb)))


def step_cdf(law: MagnetizationLaw, rv: RescaledVariable) -> TargetCdf:
    """The law's own CDF as a target callable"""
    def cdf(z: FloatArray) -> FloatArray:
        return np.asarray(cdf_rescaled(law, rv, z))
    return cdf


def conditional_law(law: MagnetizationLaw, interval: MagnetizationInterval) -> MagnetizationLaw:
    """Law of S_n given m_n in the interval, on the same support"""
    inside = interval.contains(law.magnetization)
    if not inside.any():
        raise EmptyConditionError(
            f"No support point of S_{law.n} has magnetization in [{interval.lo:g}, {interval.hi:g}]"
        )
    log_weights = np.where(inside, law.log_weights, -np.inf)
    log_Z = float(logsumexp(log_weights))
    if not np.isfinite(log_Z):
        raise EmptyConditionError("Conditioning set has zero probability")
    return MagnetizationLaw(params=law.params, log_weights=log_weights, log_Z=log_Z)


def moments(
    law: MagnetizationLaw,
    rv: RescaledVariable,
    orders: Sequence[int],
    absolute: bool = False,
) -> List[float]:
    """Exact moments E W^k (or E|W|^k) by direct summation"""
    w = rv.apply(law.support)
    if absolute:
        w = np.abs(w)
    pmf = law.pmf
    return [float(np.dot(pmf, w**k)) for k in orders]


def cdf_table(
    law: MagnetizationLaw,
    rv: RescaledVariable,
    z_grid: Sequence[float],
    target_cdf: Optional[TargetCdf] = None,
) -> List[Dict[str, float]]:
    """Tabulated exact CDF, optionally next to a target CDF"""
    z = np.asarray(z_grid, dtype=np.float64)
    values = np.asarray(cdf_rescaled(law, rv, z))
    target = np.asarray(target_cdf(z)) if target_cdf is not None else None
    table = []
    for i, zi in enumerate(z):
        row = {"z": float(zi), "cdf": float(values[i])}
        if target is not None:
            row["target"] = float(target[i])
        table.append(row)
    return table


def hypotheses(law: MagnetizationLaw, rv: RescaledVariable) -> Tuple[float, float]:
    """(E|W|, E W^2), needed before the plug-in bounds are invoked"""
    first_abs = moments(law, rv, [1], absolute=True)[0]
    second = moments(law, rv, [2])[0]
    return first_abs, second
