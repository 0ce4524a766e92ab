"""Limit laws: p(y) = c exp(-G(y)) with G' = g for a polynomial g

G(y) = q y^2/2 + a1 y^(2k)/(2k) + a2 y^(2k+2)/(2k+2) plus the integral of an optional
polynomial g_extra. This covers the standard normal
(q = 1), the critical quartic exp(-y^4/12) and the mixed threshold density
exp(-(-alpha) y^2/2 - J^3 y^4/12). Normalization, CDF and tails are computed once
at construction; instances are immutable afterwards.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad
from scipy.special import gamma, log_ndtr, ndtr, roots_legendre

from .config import CDF_PANELS, GAUSS_LEGENDRE_NODES, QUADRATURE_TOL, TAIL_CUTOFF, logger
from .errors import DomainError, IntegrabilityError
from .model import FloatArray, FloatLike

_MAX_DOUBLINGS = 60


def quartic_integral_closed_form() -> float:
    """Integral of exp(-y^4/12) over the real line, 3^(1/4) Gamma(1/4)/sqrt(2)"""
    return float(3.0**0.25 * gamma(0.25) / np.sqrt(2.0))


@dataclass(frozen=True)
class LimitDensity:
    quadratic_coeff: float = 0.0
    k: int = 1
    a1: float = 0.0
    a2: float = 0.0
    g_extra: Tuple[float, ...] = ()
    quadrature_tolerance: float = QUADRATURE_TOL

    G: Polynomial = field(init=False, repr=False, compare=False)
    log_c: float = field(init=False, compare=False)
    half_width: float = field(init=False, compare=False)
    _edges: FloatArray = field(init=False, repr=False, compare=False)
    _cum: FloatArray = field(init=False, repr=False, compare=False)
    _rcum: FloatArray = field(init=False, repr=False, compare=False)
    _mass: float = field(init=False, repr=False, compare=False)
    _g_min: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.k < 1:
            raise DomainError(f"k must be at least 1, got {self.k}")
        if self.quadratic_coeff < 0:
            raise DomainError(f"quadratic_coeff must be non-negative, got {self.quadratic_coeff}")
        coef = np.zeros(max(2 * self.k + 3, len(self.g_extra) + 1))
        coef[2] += self.quadratic_coeff / 2.0
        coef[2 * self.k] += self.a1 / (2 * self.k)
        coef[2 * self.k + 2] += self.a2 / (2 * self.k + 2)
        for i, b in enumerate(self.g_extra):
            coef[i + 1] += b / (i + 1)
        G = Polynomial(coef).trim()
        degree = G.degree()
        if degree < 2 or degree % 2 or G.coef[-1] <= 0:
            raise IntegrabilityError(
                f"exp(-G) is not integrable: G has degree {degree} and leading coefficient {G.coef[-1]:g}"
            )
        object.__setattr__(self, "G", G)
        self._build()

    @property
    def is_gaussian(self) -> bool:
        return self.quadratic_coeff == 1.0 and self.a1 == 0.0 and self.a2 == 0.0 and not any(self.g_extra)

    @property
    def c(self) -> float:
        return float(np.exp(self.log_c))

    def _critical_points(self) -> List[float]:
        points = [0.0]
        for poly in (self.G.deriv(), self.G.deriv(2)):
            for r in poly.roots():
                if abs(r.imag) < 1e-9:
                    points.append(float(r.real))
        return sorted(set(points))

    def _shifted(self, y: FloatLike) -> Any:
        return np.exp(-(self.G(y) - self._g_min))

    def _truncation(self, critical: Sequence[float], g_min: float) -> float:
        dG = self.G.deriv()
        L = max(2.0, 2.0 * max(abs(x) for x in critical))
        for _ in range(_MAX_DOUBLINGS):
            right = dG(L) > 0 and np.exp(-(self.G(L) - g_min)) / dG(L) < TAIL_CUTOFF
            left = dG(-L) < 0 and np.exp(-(self.G(-L) - g_min)) / -dG(-L) < TAIL_CUTOFF
            if right and left:
                return float(L)
            L *= 2.0
        raise IntegrabilityError(f"No truncation radius found for G = {self.G}")

    def _build(self) -> None:
        critical = self._critical_points()
        g_min = float(min(self.G(x) for x in critical))
        object.__setattr__(self, "_g_min", g_min)
        L = self._truncation(critical, g_min)
        object.__setattr__(self, "half_width", L)

        inner = [x for x in critical if -L < x < L]
        body, _ = quad(self._shifted, -L, L, points=inner or None,
                       epsabs=0.0, epsrel=self.quadrature_tolerance, limit=500)
        left, _ = quad(self._shifted, -np.inf, -L)
        right, _ = quad(self._shifted, L, np.inf)

        # Panel sums for the CDF, Gauss-Legendre on every panel
        edges = np.linspace(-L, L, CDF_PANELS + 1)
        nodes, weights = roots_legendre(GAUSS_LEGENDRE_NODES)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        panels = half * (self._shifted(mid[:, None] + half[:, None] * nodes[None, :]) @ weights)
        cum = left + np.concatenate(([0.0], np.cumsum(panels)))
        panel_body = float(cum[-1] - left)
        if abs(panel_body - body) > 1e3 * self.quadrature_tolerance * body:
            raise IntegrabilityError(
                f"Quadrature guard failed: adaptive {body:.15g} vs panel {panel_body:.15g}"
            )

        mass = float(cum[-1] + right)
        object.__setattr__(self, "_edges", edges)
        object.__setattr__(self, "_cum", cum)
        object.__setattr__(self, "_rcum", right + np.concatenate((np.cumsum(panels[::-1])[::-1], [0.0])))
        object.__setattr__(self, "_mass", mass)
        object.__setattr__(self, "log_c", g_min - float(np.log(body + left + right)))
        logger.debug(f"Normalized density G={self.G}, L={L:g}, log_c={self.log_c:.12g}")

    def normalize(self) -> float:
        """log c with c = 1 / integral of exp(-G)"""
        return self.log_c

    def g(self, z: FloatLike) -> Any:
        return self.G.deriv()(z)

    def density(self, y: FloatLike) -> Any:
        return np.exp(self.log_c - self.G(np.asarray(y, dtype=np.float64)))

    def _partial(self, a: FloatArray, b: FloatArray) -> FloatArray:
        """Integral of the shifted integrand on [a, b] with one Gauss-Legendre panel each"""
        nodes, weights = roots_legendre(GAUSS_LEGENDRE_NODES)
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        return np.asarray(half * (self._shifted(mid[:, None] + half[:, None] * nodes[None, :]) @ weights))

    def _locate(self, z: FloatArray) -> Tuple[FloatArray, FloatArray]:
        L = self.half_width
        h = 2.0 * L / CDF_PANELS
        idx = np.clip(np.floor((z + L) / h).astype(np.int64), 0, CDF_PANELS - 1)
        return idx, self._edges[idx]

    def cdf(self, z: FloatLike) -> Any:
        """P(Y <= z)"""
        x = np.atleast_1d(np.asarray(z, dtype=np.float64))
        if self.is_gaussian:
            out = ndtr(x)
        else:
            out = np.empty_like(x)
            L = self.half_width
            inside = np.abs(x) <= L
            if inside.any():
                idx, a = self._locate(x[inside])
                out[inside] = (self._cum[idx] + self._partial(a, x[inside])) / self._mass
            for i in np.nonzero(x < -L)[0]:
                out[i] = quad(self._shifted, -np.inf, x[i])[0] / self._mass
            for i in np.nonzero(x > L)[0]:
                out[i] = 1.0 - quad(self._shifted, x[i], np.inf)[0] / self._mass
            out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if np.ndim(z) == 0 else out

    def tail(self, x: FloatLike) -> Any:
        """P(Y > x), summed from the right so small tails keep their relative accuracy"""
        y = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if self.is_gaussian:
            out = ndtr(-y)
        else:
            out = np.empty_like(y)
            L = self.half_width
            inside = np.abs(y) <= L
            if inside.any():
                idx, _ = self._locate(y[inside])
                b = self._edges[idx + 1]
                upper = self._rcum[idx + 1]
                out[inside] = (upper + self._partial(y[inside], b)) / self._mass
            for i in np.nonzero(np.abs(y) > L)[0]:
                if y[i] > L:
                    out[i] = quad(self._shifted, y[i], np.inf)[0] / self._mass
                else:
                    out[i] = 1.0 - quad(self._shifted, -np.inf, y[i])[0] / self._mass
            out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if np.ndim(x) == 0 else out

    def log_tail(self, x: float) -> float:
        if self.is_gaussian:
            return float(log_ndtr(-x))
        return float(np.log(self.tail(x)))

    def table(self, z_grid: Sequence[float]) -> List[Dict[str, float]]:
        """Rows (z, density, cdf) for plotting"""
        z = np.asarray(z_grid, dtype=np.float64)
        dens = np.asarray(self.density(z))
        cdf = np.atleast_1d(self.cdf(z))
        return [{"z": float(zi), "density": float(d), "cdf": float(c)} for zi, d, c in zip(z, dens, cdf)]


def standard_normal() -> LimitDensity:
    return LimitDensity(quadratic_coeff=1.0)


def quartic(J: float = 1.0) -> LimitDensity:
    """exp(-J^3 y^4/12), the limit law at the critical point when J = 1"""
    return LimitDensity(k=2, a1=J**3 / 3.0)


def mixed(alpha: float, J: float) -> LimitDensity:
    """exp(-(-alpha) y^2/2 - J^3 y^4/12) for alpha < 0"""
    if alpha >= 0:
        raise DomainError(f"the mixed threshold density needs alpha < 0, got {alpha}")
    return LimitDensity(k=1, a1=-alpha, a2=J**3 / 3.0)


def quadratic_quartic(quadratic_coeff: float, J: float) -> LimitDensity:
    """exp(-q y^2/2 - J^3 y^4/12) with q >= 0"""
    return LimitDensity(quadratic_coeff=quadratic_coeff, k=2, a1=J**3 / 3.0)


def polynomial_regression(coefficients: Sequence[float]) -> LimitDensity:
    """exp(-G) with G' = sum_i coefficients[i] x^i"""
    return LimitDensity(g_extra=tuple(float(b) for b in coefficients))
