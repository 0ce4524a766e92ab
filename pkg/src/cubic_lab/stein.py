"""Exact Stein quantities for the heat-bath Glauber exchangeable pair

W' is W after one heat-bath update of a uniformly chosen spin. Every conditional
expectation given W depends on the configuration only through S_n, so each
quantity here is a finite sum against a MagnetizationLaw.
"""

import json
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from .config import PHASE_SEPARATION, logger
from .densities import (
    LimitDensity,
    mixed,
    polynomial_regression,
    quadratic_quartic,
    quartic,
    standard_normal,
)
from .errors import CoexistenceError, DomainError, EmptyConditionError
from .law import (
    MagnetizationInterval,
    MagnetizationLaw,
    RescaledVariable,
    build_law,
    conditional_law,
    kolmogorov_distance,
    log_sf_rescaled,
    power_rescaling,
    sf_rescaled,
    variance_rescaling,
)
from .model import (
    Couplings,
    FloatArray,
    FloatLike,
    ModelParams,
    phi_d2,
    stein_lambda,
    tanh_chain_derivative,
    taylor_coeffs,
)
from .phase import m_star, phase_portrait
from .rates import RateFit, fit_rate
from .types import ConcentrationRow, CramerRow, MdpRow, NonUniformRow, RateRow

ThresholdCase = Literal[1, 2, 3, 4]
MapFn = Callable[..., Iterable[Any]]

DEFAULT_Z_GRID = tuple(np.linspace(-4.0, 4.0, 33))


def _as_support(s: FloatLike, n: int) -> FloatArray:
    x = np.asarray(s, dtype=np.float64)
    if np.any(np.abs(x) > n) or np.any(np.mod(x + n, 2) != 0):
        raise DomainError(f"s must lie in {{-n, -n+2, ..., n}} for n={n}")
    return x


def _out(x: FloatArray) -> FloatLike:
    return float(x) if x.ndim == 0 else x


def conditional_flip_mean(s: FloatLike, p: ModelParams) -> Tuple[FloatLike, FloatLike]:
    """E(X_i'|X) for an up-spin (t_plus) and a down-spin (t_minus) when S_n = s"""
    if p.n < 2:
        raise DomainError("the exchangeable pair needs n >= 2")
    n = p.n
    x = _as_support(s, n)
    self_term = p.K / (3.0 * n * n)
    up = (x - 1.0) / n
    down = (x + 1.0) / n
    t_plus = np.tanh(p.J * up + p.K * up**2 + self_term)
    t_minus = np.tanh(p.J * down + p.K * down**2 + self_term)
    return _out(t_plus), _out(t_minus)


def _flip_terms(s: FloatArray, p: ModelParams) -> Tuple[FloatArray, FloatArray, FloatArray]:
    t_plus, t_minus = conditional_flip_mean(s, p)
    frac_up = (p.n + s) / (2.0 * p.n)
    return frac_up, np.asarray(t_plus), np.asarray(t_minus)


def mean_flip(s: FloatLike, p: ModelParams) -> FloatLike:
    """(1/n) sum_i E(X_i'|X), aggregated over the up and down spins"""
    x = _as_support(s, p.n)
    frac_up, t_plus, t_minus = _flip_terms(x, p)
    return _out(frac_up * t_plus + (1.0 - frac_up) * t_minus)


def exact_regression(s: FloatLike, p: ModelParams, rv: RescaledVariable) -> FloatLike:
    """E(W - W'|S_n = s)"""
    x = _as_support(s, p.n)
    return _out((x / p.n - np.asarray(mean_flip(x, p))) / rv.scale)


def exact_delta2(s: FloatLike, p: ModelParams, rv: RescaledVariable) -> FloatLike:
    """E((W - W')^2|S_n = s)"""
    x = _as_support(s, p.n)
    frac_up, t_plus, t_minus = _flip_terms(x, p)
    return _out(2.0 / rv.scale**2 * (1.0 - frac_up * t_plus + (1.0 - frac_up) * t_minus))


def exact_abs_delta3(s: FloatLike, p: ModelParams, rv: RescaledVariable) -> FloatLike:
    """E(|W - W'|^3|S_n = s); |W - W'| only takes the values 0 and 2/scale"""
    return _out(rv.jump * np.asarray(exact_delta2(s, p, rv)))


@dataclass(frozen=True)
class RegressionDecomposition:
    """E(W - W'|W) = lam * g(W) + R with g(w) = w or a1 w^(2k-1) + a2 w^(2k+1)"""

    mode: Literal["linear", "cubic-family"]
    lam: float
    k: int = 1
    a1: float = 0.0
    a2: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.lam < 1.0:
            raise DomainError(f"lambda must lie in (0, 1), got {self.lam:g}")

    @classmethod
    def linear(cls, m: float, p: ModelParams) -> "RegressionDecomposition":
        return cls(mode="linear", lam=stein_lambda(m, p))

    @classmethod
    def cubic_family(cls, lam: float, k: int, a1: float, a2: float = 0.0) -> "RegressionDecomposition":
        return cls(mode="cubic-family", lam=lam, k=k, a1=a1, a2=a2)

    def g(self, w: FloatLike) -> Any:
        x = np.asarray(w, dtype=np.float64)
        if self.mode == "linear":
            return x
        return self.a1 * x ** (2 * self.k - 1) + self.a2 * x ** (2 * self.k + 1)

    def remainder_at(self, law: MagnetizationLaw, rv: RescaledVariable) -> FloatArray:
        s = law.support
        return np.asarray(exact_regression(s, law.params, rv)) - self.lam * self.g(rv.apply(s))

    def target(self) -> LimitDensity:
        if self.mode == "linear":
            return standard_normal()
        return LimitDensity(k=self.k, a1=self.a1, a2=self.a2)


def smooth_bound(
    ratio_sq_mean: float,
    remainder_sq_mean: float,
    lam: float,
    A: float,
    second_moment: float,
    mean_abs_w: float,
) -> float:
    """Bounded-pair Kolmogorov bound with explicit constants"""
    root_r = np.sqrt(remainder_sq_mean)
    head = np.sqrt(ratio_sq_mean) + (np.sqrt(2.0 * np.pi) / 4.0 + 1.5 * A) * root_r / lam
    if second_moment <= 1.0:
        return float(head + 0.41 * A**3 / lam + 1.5 * A)
    return float(
        head
        + A**3 / lam * (np.sqrt(2.0 * np.pi) / 16.0 + np.sqrt(second_moment) / 4.0)
        + 1.5 * A * mean_abs_w
    )


def lipschitz_bound(abs_ratio_mean: float, abs_delta3_mean: float, remainder_sq_mean: float, lam: float) -> float:
    """Distance bound over 1-Lipschitz test functions"""
    return float(4.0 * abs_ratio_mean + abs_delta3_mean / (2.0 * lam) + 19.0 * np.sqrt(remainder_sq_mean) / lam)


@dataclass(frozen=True, eq=False)
class SteinReport:
    params: ModelParams
    m: float
    mode: str
    lam: float
    A: float
    term_delta2: float
    term_R: float
    term_A: float
    be_bound: float
    el_bound: float
    lipschitz_bound: float
    mean_abs_w: float
    second_moment: float
    hypothesis_ok: bool
    dK: float
    nonuniform_constant: float
    nonuniform: Tuple[NonUniformRow, ...]
    w: FloatArray = field(repr=False)
    regression: FloatArray = field(repr=False)

    def as_rate_row(self) -> RateRow:
        return {
            "n": self.params.n,
            "K": self.params.K,
            "J": self.params.J,
            "dK": self.dK,
            "bound_term1": self.term_delta2,
            "bound_term2": self.term_R,
            "bound_term3": self.term_A,
            "be_bound": self.be_bound,
            "el_bound": self.el_bound,
            "lipschitz_bound": self.lipschitz_bound,
            "nonuniform_constant": self.nonuniform_constant,
            "hypothesis_ok": self.hypothesis_ok,
        }

    def regression_rows(self, window: Optional[float] = None) -> List[Dict[str, float]]:
        keep = np.ones_like(self.w, dtype=bool) if window is None else np.abs(self.w) <= window
        return [{"w": float(a), "regression": float(b)} for a, b in zip(self.w[keep], self.regression[keep])]

    def to_json(self, window: Optional[float] = 1.0) -> str:
        body: Dict[str, Any] = {
            "n": self.params.n,
            "K": self.params.K,
            "J": self.params.J,
            "m": self.m,
            "mode": self.mode,
            "lambda": self.lam,
            "A": self.A,
            "term_delta2": self.term_delta2,
            "term_R": self.term_R,
            "term_A": self.term_A,
            "be_bound": self.be_bound,
            "el_bound": self.el_bound,
            "lipschitz_bound": self.lipschitz_bound,
            "mean_abs_w": self.mean_abs_w,
            "second_moment": self.second_moment,
            "hypothesis_ok": self.hypothesis_ok,
            "dK": self.dK,
            "nonuniform_constant": self.nonuniform_constant,
            "nonuniform": list(self.nonuniform),
            "regression_curve": self.regression_rows(window),
        }
        return json.dumps(body, indent=2)


def be_certificate(
    law: MagnetizationLaw,
    rv: RescaledVariable,
    target: LimitDensity,
    decomp: RegressionDecomposition,
    m: Optional[float] = None,
    z_grid: Sequence[float] = DEFAULT_Z_GRID,
) -> SteinReport:
    """Plug-in Berry-Esseen bound terms, evaluated exactly against the law"""
    p = law.params
    pmf = law.pmf
    s = law.support
    w = rv.apply(s)
    regression = np.asarray(exact_regression(s, p, rv))
    delta2 = np.asarray(exact_delta2(s, p, rv))
    lam = decomp.lam
    remainder = regression - lam * decomp.g(w)
    A = rv.jump

    ratio = 1.0 - delta2 / (2.0 * lam)
    term_delta2 = float(pmf @ np.abs(ratio))
    abs_r = float(pmf @ np.abs(remainder))
    term_R = abs_r / lam if decomp.mode == "linear" else abs_r / (target.c * lam)
    term_A = 3.0 * A
    mean_abs_w = float(pmf @ np.abs(w))
    second_moment = float(pmf @ w**2)
    remainder_sq = float(pmf @ remainder**2)

    hypothesis_ok = mean_abs_w <= 2.0
    if not hypothesis_ok:
        logger.warning(f"E|W| = {mean_abs_w:.4g} > 2 at n={p.n}; bound terms reported without certificate")

    # Distance at atoms and their left limits, weighted by the non-uniform prefactor
    cum = np.minimum(np.cumsum(pmf), 1.0)
    before = np.concatenate(([0.0], cum[:-1]))
    at = np.asarray(target.cdf(w))
    gap = np.maximum(np.abs(cum - at), np.abs(before - at))
    weight = 1.0 + np.abs(target.g(w))
    dK = kolmogorov_distance(law, rv, target.cdf)

    z = np.asarray(z_grid, dtype=np.float64)
    idx = np.searchsorted(w, z, side="right")
    fz = np.concatenate(([0.0], cum))[idx]
    dz = np.abs(fz - np.asarray(target.cdf(z)))
    rows: Tuple[NonUniformRow, ...] = tuple(
        {"z": float(zi), "distance": float(di), "weighted": float(di * (1.0 + abs(target.g(zi))))}
        for zi, di in zip(z, dz)
    )

    return SteinReport(
        params=p,
        m=float(rv.center / p.n) if m is None else m,
        mode=decomp.mode,
        lam=lam,
        A=A,
        term_delta2=term_delta2,
        term_R=term_R,
        term_A=term_A,
        be_bound=term_delta2 + term_R + term_A,
        el_bound=smooth_bound(float(pmf @ ratio**2), remainder_sq, lam, A, second_moment, mean_abs_w),
        lipschitz_bound=lipschitz_bound(
            term_delta2, float(pmf @ np.asarray(exact_abs_delta3(s, p, rv))), remainder_sq, lam
        ),
        mean_abs_w=mean_abs_w,
        second_moment=second_moment,
        hypothesis_ok=hypothesis_ok,
        dK=dK,
        nonuniform_constant=float(np.max(gap * weight)),
        nonuniform=rows,
        w=w,
        regression=regression,
    )


def regression_slope(law: MagnetizationLaw, rv: RescaledVariable, window: float = 1.0) -> float:
    """Least-squares slope of w -> E(W - W'|W = w) over |w| <= window"""
    w = rv.apply(law.support)
    keep = np.abs(w) <= window
    if keep.sum() < 2:
        raise DomainError(f"fewer than two atoms with |w| <= {window}")
    reg = np.asarray(exact_regression(law.support[keep], law.params, rv))
    return float(linregress(w[keep], reg).slope)


def remainder_breakdown(law: MagnetizationLaw, rv: RescaledVariable, m: float) -> Dict[str, float]:
    """Sizes of the Taylor pieces of R in the linear regression at the phase m"""
    p = law.params
    n = p.n
    pmf = law.pmf
    s = law.support
    w = rv.apply(s)
    sigma = rv.scale
    m_n = s / n
    frac_up, t_plus, t_minus = _flip_terms(s, p)
    f_mn = np.tanh(p.J * m_n + p.K * m_n**2)
    lam = stein_lambda(m, p)

    r1 = (f_mn - (frac_up * t_plus + (1.0 - frac_up) * t_minus)) / sigma
    R = np.asarray(exact_regression(s, p, rv)) - lam * w
    _, _, c2, _ = taylor_coeffs(m, p)
    leading = c2 * sigma * w**2 / (2.0 * n * n)
    r3 = 2.0 / sigma**2 * (frac_up * t_plus - (1.0 - frac_up) * t_minus - m_n * f_mn)
    return {
        "lambda": lam,
        "r1": float(pmf @ np.abs(r1)),
        "second_order": float(pmf @ np.abs(R - r1)),
        "second_order_leading": float(pmf @ np.abs(leading)),
        "r3_over_2lambda": float(pmf @ np.abs(r3)) / (2.0 * lam),
    }


def threshold_breakdown(law: MagnetizationLaw, rv: RescaledVariable, lam: float) -> Dict[str, float]:
    """Taylor pieces of E(W - W'|W) around m = 0, each divided by lam"""
    p = law.params
    pmf = law.pmf
    s = law.support
    x = s / p.n
    scale = rv.scale
    f0 = np.tanh(p.J * x + p.K * x**2)
    frac_up, t_plus, t_minus = _flip_terms(s, p)
    _, c1, c2, c3 = taylor_coeffs(0.0, p)
    f4 = float(tanh_chain_derivative(4, 0.0, 0.0, p))
    grid = np.linspace(-1.0, 1.0, 2001)
    sup5 = float(np.max(np.abs(np.asarray(tanh_chain_derivative(5, grid, 0.0, p)))))

    def mean_abs(values: FloatArray) -> float:
        return float(pmf @ np.abs(values)) / (scale * lam)

    return {
        "quadratic": mean_abs(c2 * x**2 / 2.0),
        "cubic": mean_abs(c3 * x**3 / 6.0),
        "r1": mean_abs(f0 - (frac_up * t_plus + (1.0 - frac_up) * t_minus)),
        "taylor_residual": mean_abs(f0 - c1 * x - c2 * x**2 / 2.0 - c3 * x**3 / 6.0),
        "fourth_order_leading": mean_abs(f4 * x**4 / 24.0),
        "fifth_order_bound": sup5 * mean_abs(np.abs(x) ** 5 / 120.0),
    }


def concentration_check(law: MagnetizationLaw, t_grid: Sequence[float]) -> List[ConcentrationRow]:
    """Exact P(|m - tanh(Jm + Km^2)| >= (J+4K)/n + t/sqrt(n)) against 2 exp(-t^2/(4(1+J+2K)))

    lhs_f is the same event for f(X) = m - (1/n) sum_i tanh(J m_i + K m_i^2 + K/(3n^2))
    at level t/sqrt(n).
    """
    p = law.params
    if p.J <= 0:
        raise DomainError(f"the concentration inequality needs J > 0, got {p.J}")
    n = p.n
    pmf = law.pmf
    m_n = law.magnetization
    gap = np.abs(m_n - np.tanh(p.J * m_n + p.K * m_n**2))
    f = np.abs(m_n - np.asarray(mean_flip(law.support, p)))
    rows: List[ConcentrationRow] = []
    for t in t_grid:
        if t < 0:
            raise DomainError(f"t must be non-negative, got {t}")
        lhs = float(pmf[gap >= (p.J + 4.0 * p.K) / n + t / np.sqrt(n)].sum())
        lhs_f = float(pmf[f >= t / np.sqrt(n)].sum())
        rhs = float(2.0 * np.exp(-t * t / (4.0 * (1.0 + p.J + 2.0 * p.K))))
        rows.append({"t": float(t), "lhs": lhs, "lhs_f": lhs_f, "rhs": rhs, "holds": lhs <= rhs and lhs_f <= rhs})
    return rows


def critical_concentration_fit(law: MagnetizationLaw, t_grid: Sequence[float]) -> Dict[str, Any]:
    """Largest c with P(n^(1/4)|m| >= t) <= 2 exp(-c t^4) on the grid"""
    n = law.n
    pmf = law.pmf
    scaled = n**0.25 * np.abs(law.magnetization)
    rows = []
    c = float("inf")
    for t in t_grid:
        prob = float(pmf[scaled >= t].sum())
        if t > 0 and prob > 0:
            c = min(c, -np.log(prob / 2.0) / t**4)
        rows.append({"t": float(t), "probability": prob})
    for row in rows:
        row["bound"] = float(2.0 * np.exp(-c * row["t"] ** 4)) if np.isfinite(c) else 0.0
    return {"n": n, "c": c, "rows": rows}


def cramer_ratio(
    law: MagnetizationLaw,
    rv: RescaledVariable,
    x_grid: Sequence[float],
    target: Optional[LimitDensity] = None,
    power: int = 3,
) -> List[CramerRow]:
    """P(W_n > x)/P(Y > x) with |ratio - 1| sqrt(n)/(1 + x^power)"""
    target = target or standard_normal()
    rows: List[CramerRow] = []
    for x in x_grid:
        if x < 0:
            raise DomainError(f"x must be non-negative, got {x}")
        tail = sf_rescaled(law, rv, x)
        limit = float(target.tail(x))
        ratio = tail / limit
        rows.append({
            "x": float(x),
            "tail": tail,
            "limit_tail": limit,
            "ratio": ratio,
            "normalized_residual": abs(ratio - 1.0) * np.sqrt(law.n) / (1.0 + x**power),
        })
    return rows


def critical_cramer_ratio(law: MagnetizationLaw, x_grid: Sequence[float]) -> List[CramerRow]:
    """Tail ratio of S_n/n^(3/4) against the quartic law at (K, J) = (0, 1)"""
    if not law.params.is_critical:
        raise DomainError("critical_cramer_ratio needs (K, J) = (0, 1)")
    return cramer_ratio(law, power_rescaling(law.n, 0.75), x_grid, target=quartic(1.0), power=6)


def cramer_grid(n: int, c: float = 1.0, points: int = 16, exponent: float = 1.0 / 6.0) -> List[float]:
    """x grid on [0, c n^exponent]"""
    return [float(x) for x in np.linspace(0.0, c * n**exponent, points)]


@dataclass(frozen=True)
class CramerConstants:
    delta1: float
    delta2: float
    theta: float
    d: float
    alpha: float
    x_max: float
    factor: float


def cramer_constants(law: MagnetizationLaw, rv: RescaledVariable, m: float, radius: float = 0.25) -> CramerConstants:
    """Sup-norm estimates of the moderate-deviation hypotheses on |W| <= d sqrt(n)

    d = radius * sqrt(phi''(m)), i.e. |m_n - m| <= radius.
    """
    p = law.params
    n = p.n
    lam = stein_lambda(m, p)
    d = radius * np.sqrt(float(phi_d2(m, p)))
    s = law.support
    w = rv.apply(s)
    keep = np.abs(w) <= d * np.sqrt(n)
    if not keep.any():
        raise EmptyConditionError(f"no atom with |W| <= {d:.3g} sqrt(n)")
    w = w[keep]
    D = np.asarray(exact_delta2(s[keep], p, rv)) / (2.0 * lam)
    r_over_lam = (np.asarray(exact_regression(s[keep], p, rv)) - lam * w) / lam
    delta1 = float(np.max(np.abs(D - 1.0) / (1.0 + np.abs(w))))
    delta2 = float(np.max(np.abs(r_over_lam) / (1.0 + w**2)))
    theta = max(1.0, float(np.max(np.abs(D))))
    A = rv.jump
    x_max = min(A ** (-1.0 / 3.0), delta1 ** (-1.0 / 3.0) if delta1 > 0 else np.inf,
                delta2 ** (-1.0 / 3.0) if delta2 > 0 else np.inf) / theta
    return CramerConstants(
        delta1=delta1,
        delta2=delta2,
        theta=theta,
        d=float(d),
        alpha=float(delta2 * np.max(np.abs(w))),
        x_max=float(x_max),
        factor=float(theta**3 * (A + delta1 + delta2)),
    )


def mdp_rows(law: MagnetizationLaw, rv: RescaledVariable, x_grid: Sequence[float], exponent: float = 0.125) -> List[MdpRow]:
    """(1/a_n^2) log P(W_n > a_n x) against -x^2/2, a_n = n^exponent"""
    a_n = float(law.n**exponent)
    return [
        {
            "n": law.n,
            "x": float(x),
            "a_n": a_n,
            "scaled_log_tail": log_sf_rescaled(law, rv, a_n * x) / a_n**2,
            "limit": -0.5 * x * x,
        }
        for x in x_grid
    ]


def law_at_phase(p: ModelParams, interval: Optional[MagnetizationInterval] = None) -> Tuple[MagnetizationLaw, float]:
    """Exact law at the pure phase, or conditioned on an interval around one phase"""
    law = build_law(p)
    if interval is None:
        m, _ = m_star(p.couplings)
        return law, m
    portrait = phase_portrait(p.couplings)
    inside = [
        pt.m for pt in portrait.stationary_points
        if pt.kind in ("global-min", "local-min") and interval.contains(np.asarray(pt.m))
    ]
    if len(inside) != 1:
        raise DomainError(
            f"interval [{interval.lo:g}, {interval.hi:g}] must contain exactly one phase, found {len(inside)}"
        )
    return conditional_law(law, interval), inside[0]


def threshold_coupling(case: int, n: int, delta: float) -> float:
    if case == 1:
        return float(n**-0.5)
    if case == 2:
        return float(n**-0.75)
    if case in (3, 4):
        if not 0.0 < delta < 0.25:
            raise DomainError(f"delta must lie in (0, 1/4), got {delta}")
        return float(n ** (-2.0 * delta))
    raise DomainError(f"threshold case must be 1, 2, 3 or 4, got {case}")


def threshold_setup(
    case: int, alpha: float, n: int, delta: float = 0.1
) -> Tuple[ModelParams, RescaledVariable, LimitDensity, RegressionDecomposition]:
    """Couplings, rescaling, target and regression shape of one threshold regime"""
    if alpha >= 0:
        raise DomainError(f"threshold regimes need alpha < 0, got {alpha}")
    K = threshold_coupling(case, n, delta)
    J = 1.0 + alpha * K
    p = ModelParams(K, J, n)
    if case == 1:
        lam = n**-1.5
        return p, power_rescaling(n, 0.75), mixed(alpha, J), RegressionDecomposition.cubic_family(lam, 1, -alpha, J**3 / 3.0)
    if case == 2:
        lam = n**-1.5
        return p, power_rescaling(n, 0.75), quartic(J), RegressionDecomposition.cubic_family(lam, 2, J**3 / 3.0)
    decomp = RegressionDecomposition(mode="linear", lam=(1.0 - J) / n)
    if case == 3:
        return p, variance_rescaling(n, J), standard_normal(), decomp
    # Var(S_n/n^(3/4)) -> 0 here, so the distance is reported as measured
    return p, power_rescaling(n, 0.75), standard_normal(), decomp


def threshold_point(case: int, alpha: float, delta: float, n: int) -> RateRow:
    p, rv, target, decomp = threshold_setup(case, alpha, n, delta)
    try:
        m, _ = m_star(p.couplings)
    except CoexistenceError:
        m = float("nan")
    if not abs(m) <= PHASE_SEPARATION:
        logger.warning(f"Threshold case {case}: m* = {m:.3g} != 0 at n={n}; point excluded")
        return {"n": n, "K": p.K, "J": p.J, "excluded": True}
    report = be_certificate(build_law(p), rv, target, decomp, m=0.0)
    row = report.as_rate_row()
    row["excluded"] = False
    return row


@dataclass(frozen=True)
class ThresholdResult:
    case: int
    alpha: float
    delta: float
    rows: Tuple[RateRow, ...]
    fit: Optional[RateFit]


def threshold_experiment(
    case: int,
    alpha: float,
    n_grid: Sequence[int],
    delta: float = 0.1,
    map_fn: MapFn = map,
) -> ThresholdResult:
    """Exact distances along (K_n, 1 + alpha K_n) with a log-log rate fit"""
    rows = tuple(map_fn(partial(threshold_point, case, alpha, delta), n_grid))
    kept = [r for r in rows if not r["excluded"]]
    fit = None
    if len(kept) >= 2:
        fit = fit_rate([r["n"] for r in kept], [r["dK"] for r in kept], label=f"threshold case {case}")
    return ThresholdResult(case=case, alpha=alpha, delta=delta, rows=rows, fit=fit)


# g(x) = 3x - x^2 + x^3/3 for alpha = 0 and K_n = n^(-1/4); outside the exchangeable-pair theorems
ALPHA_ZERO_REGRESSION = (0.0, 3.0, -1.0, 1.0 / 3.0)


def alpha_nonnegative_point(alpha: float, kappa: float, n: int) -> Dict[str, Any]:
    """Distances of (S_n - n m*)/n^(3/4) to the quartic and to a candidate law, J = 1 + alpha n^(-kappa)"""
    if alpha < 0:
        raise DomainError(f"alpha must be non-negative, got {alpha}")
    K = float(n ** (-kappa))
    J = 1.0 + alpha * K
    m, _ = m_star(Couplings(K, J))
    p = ModelParams(K, J, n)
    law = build_law(p)
    rv = power_rescaling(n, 0.75, center=n * m)
    if alpha > 0:
        candidate = quadratic_quartic(2.0 * alpha * K * np.sqrt(n), J)
    else:
        candidate = polynomial_regression(ALPHA_ZERO_REGRESSION)
    return {
        "n": n,
        "K": K,
        "J": J,
        "m_star": m,
        "dK_quartic": kolmogorov_distance(law, rv, quartic(J).cdf),
        "dK_candidate": kolmogorov_distance(law, rv, candidate.cdf),
        "certified": False,
    }


def alpha_nonnegative_experiment(
    alpha: float, kappa: float, n_grid: Sequence[int], map_fn: MapFn = map
) -> List[Dict[str, Any]]:
    return list(map_fn(partial(alpha_nonnegative_point, alpha, kappa), n_grid))
