"""Phase diagram: equilibrium macrostates, the coexistence curve and the LDP rate function"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect, brentq

from .config import (
    BOUNDARY_EPS,
    DEPTH_TOL,
    GAMMA_BRACKET,
    GAMMA_J_XTOL,
    GAMMA_SCAN_POINTS,
    MIN_GRID_POINTS,
    PHASE_SEPARATION,
    ROOT_DEDUP_TOL,
    ROOT_GRID_POINTS,
    ROOT_XTOL,
    CURVATURE_TOL,
    logger,
)
from .errors import (
    BracketError,
    CoexistenceError,
    CriticalPointError,
    DomainError,
    NoCoexistenceError,
)
from .model import Couplings, EquilibriumPoint, FloatLike, PointKind, mean_field_residual, phi, phi_d1, phi_d2
from .types import AsymptoticsRow, GammaRow, PhaseLabel


@dataclass(frozen=True)
class PhasePortrait:
    """Stationary points of phi, its global minimizers and the phase label"""

    couplings: Couplings
    stationary_points: Tuple[EquilibriumPoint, ...]
    global_minimizers: Tuple[float, ...]
    phase_label: PhaseLabel
    inf_phi: float


@dataclass(frozen=True)
class GammaCurvePoint:
    """A point (K, gamma(K)) where m_low ~ 0 and m_high > 0 have equal depth"""

    K: float
    J_gamma: float
    m_low: float
    m_high: float
    equal_depth_gap: float

    def as_row(self) -> GammaRow:
        return {
            "K": self.K,
            "J_gamma": self.J_gamma,
            "m_low": self.m_low,
            "m_high": self.m_high,
            "equal_depth_gap": self.equal_depth_gap,
        }


def _refine_roots(p: Couplings, grid_points: int) -> List[float]:
    grid = np.linspace(-1.0 + BOUNDARY_EPS, 1.0 - BOUNDARY_EPS, grid_points)
    residual = np.asarray(mean_field_residual(grid, p))

    def f(x: float) -> float:
        return float(mean_field_residual(x, p))

    # m = 0 is always a root; at J = 1 it can be a double root without sign change
    roots = [0.0]
    roots.extend(float(x) for x in grid[residual == 0.0])
    sign = np.sign(residual)
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        roots.append(float(brentq(f, grid[i], grid[i + 1], xtol=ROOT_XTOL)))

    roots.sort()
    clusters: List[List[float]] = []
    for r in roots:
        if clusters and r - clusters[-1][-1] <= ROOT_DEDUP_TOL:
            clusters[-1].append(r)
        else:
            clusters.append([r])
    return [min(c, key=lambda x: abs(f(x))) for c in clusters]


def _probe_kind(m: float, neighbours: Sequence[float], p: Couplings) -> PointKind:
    dd = float(phi_d2(m, p))
    if dd > CURVATURE_TOL:
        return "local-min"
    if dd < -CURVATURE_TOL:
        return "local-max"
    # Degenerate curvature: look at the sign of phi' just left and right of m
    gaps = [abs(m - x) for x in neighbours if x != m]
    h = min([1e-4] + [0.25 * g for g in gaps])
    h = min(h, 0.5 * (1.0 - abs(m)))
    left = float(phi_d1(m - h, p))
    right = float(phi_d1(m + h, p))
    if left < 0.0 < right:
        return "local-min"
    if left > 0.0 > right:
        return "local-max"
    return "inflection"


def find_stationary_points(
    p: Couplings,
    grid_points: int = ROOT_GRID_POINTS,
    depth_tol: float = DEPTH_TOL,
) -> List[EquilibriumPoint]:
    """All roots of tanh(K m^2 + J m) = m in (-1, 1), classified by the shape of phi"""
    if p.K < 0:
        raise DomainError(f"K must be non-negative, got {p.K}")
    roots = _refine_roots(p, grid_points)
    kinds = [_probe_kind(m, roots, p) for m in roots]
    values = [float(phi(m, p)) for m in roots]

    minima = [i for i, kind in enumerate(kinds) if kind == "local-min"]
    if not minima:
        minima = list(range(len(roots)))
    best = min(values[i] for i in minima)
    points = []
    for i, m in enumerate(roots):
        kind = kinds[i]
        if i in minima and values[i] - best <= depth_tol:
            kind = "global-min"
        points.append(EquilibriumPoint(m=m, phi_value=values[i], phi_dd=float(phi_d2(m, p)), kind=kind))
    return points


def phase_portrait(
    p: Couplings,
    grid_points: int = ROOT_GRID_POINTS,
    depth_tol: float = DEPTH_TOL,
) -> PhasePortrait:
    points = find_stationary_points(p, grid_points, depth_tol)
    minimizers = tuple(pt.m for pt in points if pt.kind == "global-min")
    inf_phi = min(pt.phi_value for pt in points if pt.kind == "global-min")

    label: PhaseLabel
    if p.is_critical:
        label = "critical"
    elif len(minimizers) >= 2:
        label = "coexistence"
    elif abs(minimizers[0]) <= PHASE_SEPARATION:
        label = "paramagnetic"
    elif p.J >= 1.0:
        label = "polarized-m2"
    else:
        label = "polarized-m1"
    return PhasePortrait(
        couplings=Couplings(p.K, p.J),
        stationary_points=tuple(points),
        global_minimizers=minimizers,
        phase_label=label,
        inf_phi=inf_phi,
    )


def m_star(
    p: Couplings,
    grid_points: int = ROOT_GRID_POINTS,
    depth_tol: float = DEPTH_TOL,
) -> Tuple[float, PhaseLabel]:
    """The unique pure phase m*(K, J) and its branch label"""
    if p.is_critical:
        raise CriticalPointError()
    portrait = phase_portrait(p, grid_points, depth_tol)
    if portrait.phase_label == "coexistence":
        raise CoexistenceError(p.K, p.J, portrait.global_minimizers)
    m = portrait.global_minimizers[0]
    if portrait.phase_label == "paramagnetic":
        m = 0.0
    return m, portrait.phase_label


def grid_minimize_phi(p: Couplings, points: int = MIN_GRID_POINTS) -> float:
    """Brute-force argmin of phi on a dense grid of [-1 + eps, 1 - eps]"""
    grid = np.linspace(-1.0 + BOUNDARY_EPS, 1.0 - BOUNDARY_EPS, points)
    values = np.asarray(phi(grid, p))
    return float(grid[int(np.argmin(values))])


def _positive_phase_gap(
    K: float, J: float, grid_points: int
) -> Tuple[float, Optional[EquilibriumPoint], List[EquilibriumPoint]]:
    """D(J) = phi(0) - min phi over positive local minimizers; -inf if there are none"""
    p = Couplings(K, J)
    points = find_stationary_points(p, grid_points)
    positive = [
        pt for pt in points
        if pt.kind in ("local-min", "global-min") and pt.m > PHASE_SEPARATION
    ]
    if not positive:
        return float("-inf"), None, points
    deepest = min(positive, key=lambda pt: pt.phi_value)
    return float(phi(0.0, p)) - deepest.phi_value, deepest, points


def gamma_of_K(
    K: float,
    bracket: Tuple[float, float] = GAMMA_BRACKET,
    scan_points: int = GAMMA_SCAN_POINTS,
    grid_points: int = ROOT_GRID_POINTS,
    depth_tol: float = DEPTH_TOL,
) -> GammaCurvePoint:
    """The coexistence coupling gamma(K) by equal-depth bisection over J"""
    if K <= 0:
        raise DomainError(f"gamma(K) needs K > 0, got {K}")
    lo, hi = bracket
    Js = np.linspace(lo, hi, scan_points)
    gaps = np.array([_positive_phase_gap(K, float(J), grid_points)[0] for J in Js])

    finite = np.isfinite(gaps)
    if not finite.any():
        raise NoCoexistenceError(f"No positive local minimizer of phi for K={K:g} and J in [{lo:g}, {hi:g}]")
    first = int(np.argmax(finite))
    if not finite[first:].all() or np.any(np.diff(gaps[first:]) < -1e-14):
        raise BracketError(f"D(J) is not monotone on [{lo:g}, {hi:g}] for K={K:g}; adjust the bracket")
    above = np.nonzero(gaps > 0.0)[0]
    if above.size == 0 or above[0] == 0:
        raise BracketError(
            f"D(J) has no sign change on [{lo:g}, {hi:g}] for K={K:g}; widen the bracket"
        )
    a, b = float(Js[above[0] - 1]), float(Js[above[0]])

    def sign_gap(J: float) -> float:
        gap = _positive_phase_gap(K, J, grid_points)[0]
        # Only the sign matters; no positive phase means m = 0 is strictly deeper
        return gap if np.isfinite(gap) else -1.0

    J_gamma = float(bisect(sign_gap, a, b, xtol=GAMMA_J_XTOL))
    gap, deepest, points = _positive_phase_gap(K, J_gamma, grid_points)
    if deepest is None:
        raise BracketError(f"Positive phase vanished at J={J_gamma:.12g} for K={K:g}")
    low = min(
        (pt for pt in points if abs(pt.m) <= PHASE_SEPARATION),
        key=lambda pt: abs(pt.m),
    )
    depth_gap = abs(low.phi_value - deepest.phi_value)
    if depth_gap > depth_tol:
        raise BracketError(f"Equal-depth gap {depth_gap:.3g} exceeds {depth_tol:g} at K={K:g}")
    logger.info(f"gamma({K:g}) = {J_gamma:.12f}, phases {low.m:.3g} and {deepest.m:.6f}")
    return GammaCurvePoint(
        K=K,
        J_gamma=J_gamma,
        m_low=low.m,
        m_high=deepest.m,
        equal_depth_gap=depth_gap,
    )


def rate_function(m: FloatLike, p: Couplings, portrait: Optional[PhasePortrait] = None) -> FloatLike:
    """I_{K,J}(m) = phi(m) - inf phi; non-negative, zero on the equilibrium set"""
    if portrait is None:
        portrait = phase_portrait(p)
    value = np.maximum(np.asarray(phi(m, p)) - portrait.inf_phi, 0.0)
    return float(value) if value.ndim == 0 else value


def predicted_m_star(alpha: float, K: float) -> float:
    """Small-K asymptote of m*(K, 1 + alpha K)"""
    if alpha > 0:
        return float(np.sqrt(3.0 * alpha * K))
    if alpha == 0:
        return 3.0 * K
    return 0.0


def m_star_asymptotics(alpha: float, K_grid: Sequence[float]) -> List[AsymptoticsRow]:
    """m*(K, 1 + alpha K) along a decreasing K grid against its asymptote"""
    rows: List[AsymptoticsRow] = []
    for K in K_grid:
        if K <= 0:
            raise DomainError(f"K grid must be positive, got {K}")
        J = 1.0 + alpha * K
        m, _ = m_star(Couplings(K, J))
        predicted = predicted_m_star(alpha, K)
        rows.append({
            "K": K,
            "J": J,
            "m_star": m,
            "predicted": predicted,
            "ratio": m / predicted if predicted > 0 else None,
        })
    return rows
