"""Model parameters and the scalar analytic functions of the cubic mean-field model

The Gibbs weight of a configuration x in {-1, +1}^n is exp(n((K/3)m^3 + (J/2)m^2))
with m = (1/n) sum x_i. Everything here is a pure function of its arguments and
works elementwise on numpy arrays.
"""

from dataclasses import dataclass
from typing import Literal, Tuple, TypeAlias, Union

import numpy as np
import numpy.typing as npt
from scipy.special import xlogy

from .errors import DomainError

FloatArray: TypeAlias = npt.NDArray[np.float64]
FloatLike: TypeAlias = Union[float, FloatArray]

PointKind = Literal["global-min", "local-min", "local-max", "inflection"]


@dataclass(frozen=True)
class Couplings:
    """Cubic coupling K and quadratic coupling J (external field fixed to 0)"""

    K: float
    J: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.K) or not np.isfinite(self.J):
            raise DomainError(f"Couplings must be finite, got K={self.K}, J={self.J}")
        if self.K < 0:
            # K < 0 maps to K > 0 under the spin flip x -> -x
            raise DomainError(f"K must be non-negative, got {self.K}")

    @property
    def is_critical(self) -> bool:
        return self.K == 0.0 and self.J == 1.0


@dataclass(frozen=True)
class ModelParams(Couplings):
    """The triple (K, J, n) defining the Gibbs measure"""

    n: int

    def __post_init__(self) -> None:
        super().__post_init__()
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")

    @property
    def couplings(self) -> Couplings:
        return Couplings(self.K, self.J)


@dataclass(frozen=True)
class EquilibriumPoint:
    """A root of the mean-field equation with its classification"""

    m: float
    phi_value: float
    phi_dd: float
    kind: PointKind


def _result(value: FloatArray) -> FloatLike:
    return float(value) if value.ndim == 0 else value


def _check_closed(m: FloatArray) -> None:
    if np.any(np.abs(m) > 1.0):
        raise DomainError("magnetization must lie in [-1, 1]")


def _check_open(m: FloatArray) -> None:
    if np.any(np.abs(m) >= 1.0):
        raise DomainError("derivatives of phi are undefined at |m| = 1")


def binary_entropy(m: FloatLike) -> FloatLike:
    """I(m) = ((1-m)/2)log((1-m)/2) + ((1+m)/2)log((1+m)/2), with 0 log 0 = 0"""
    x = np.asarray(m, dtype=np.float64)
    _check_closed(x)
    lo = (1.0 - x) / 2.0
    hi = (1.0 + x) / 2.0
    return _result(xlogy(lo, lo) + xlogy(hi, hi))


def phi(m: FloatLike, p: Couplings) -> FloatLike:
    """phi(m) = I(m) - (K/3)m^3 - (J/2)m^2"""
    x = np.asarray(m, dtype=np.float64)
    _check_closed(x)
    return _result(np.asarray(binary_entropy(x)) - p.K / 3.0 * x**3 - p.J / 2.0 * x**2)


def phi_d1(m: FloatLike, p: Couplings) -> FloatLike:
    x = np.asarray(m, dtype=np.float64)
    _check_open(x)
    return _result(np.arctanh(x) - p.K * x**2 - p.J * x)


def phi_d2(m: FloatLike, p: Couplings) -> FloatLike:
    x = np.asarray(m, dtype=np.float64)
    _check_open(x)
    return _result(1.0 / (1.0 - x**2) - 2.0 * p.K * x - p.J)


def phi_d3(m: FloatLike, p: Couplings) -> FloatLike:
    x = np.asarray(m, dtype=np.float64)
    _check_open(x)
    return _result(2.0 * x / (1.0 - x**2) ** 2 - 2.0 * p.K)


def mean_field_residual(m: FloatLike, p: Couplings) -> FloatLike:
    """tanh(K m^2 + J m) - m; zero exactly at the candidates for equilibrium macrostates"""
    x = np.asarray(m, dtype=np.float64)
    _check_closed(x)
    return _result(np.tanh(p.K * x**2 + p.J * x) - x)


# Derivatives of tanh written in t = tanh(u); stable where tanh saturates


def tanh_d1(t: FloatLike) -> FloatLike:
    return 1.0 - np.square(t)


def tanh_d2(t: FloatLike) -> FloatLike:
    return -2.0 * np.multiply(t, 1.0 - np.square(t))


def tanh_d3(t: FloatLike) -> FloatLike:
    t2 = np.square(t)
    return -2.0 * (1.0 - t2) * (1.0 - 3.0 * t2)


def tanh_d4(t: FloatLike) -> FloatLike:
    t2 = np.square(t)
    return 8.0 * np.multiply(t, (1.0 - t2) * (2.0 - 3.0 * t2))


def tanh_d5(t: FloatLike) -> FloatLike:
    t2 = np.square(t)
    return 8.0 * (1.0 - t2) * (2.0 - 15.0 * t2 + 15.0 * t2**2)


def tanh_chain_derivative(order: int, x: FloatLike, m: float, p: Couplings) -> FloatLike:
    """d^order/dx^order of f(x) = tanh(J(m+x) + K(m+x)^2), for order 0..5"""
    y = np.asarray(x, dtype=np.float64) + m
    t = np.tanh(p.J * y + p.K * y**2)
    b = p.J + 2.0 * p.K * y
    K = p.K
    if order == 0:
        out = t
    elif order == 1:
        out = b * tanh_d1(t)
    elif order == 2:
        out = b**2 * tanh_d2(t) + 2.0 * K * tanh_d1(t)
    elif order == 3:
        out = b**3 * tanh_d3(t) + 6.0 * K * b * tanh_d2(t)
    elif order == 4:
        out = b**4 * tanh_d4(t) + 12.0 * K * b**2 * tanh_d3(t) + 12.0 * K**2 * tanh_d2(t)
    elif order == 5:
        out = b**5 * tanh_d5(t) + 20.0 * K * b**3 * tanh_d4(t) + 60.0 * K**2 * b * tanh_d3(t)
    else:
        raise DomainError(f"derivative order must be in 0..5, got {order}")
    return _result(np.asarray(out, dtype=np.float64))


def taylor_coeffs(m: float, p: Couplings) -> Tuple[float, float, float, float]:
    """Taylor coefficients c0..c3 of x -> tanh(J(m+x) + K(m+x)^2) at x = 0"""
    if abs(m) >= 1.0:
        raise DomainError("taylor_coeffs needs |m| < 1")
    t = float(np.tanh(p.J * m + p.K * m**2))
    b = p.J + 2.0 * p.K * m
    d1 = float(tanh_d1(t))
    d2 = float(tanh_d2(t))
    d3 = float(tanh_d3(t))
    c0 = t
    c1 = b * d1
    c2 = 2.0 * p.K * d1 + b**2 * d2
    c3 = 6.0 * p.K * b * d2 + b**3 * d3
    return c0, c1, c2, c3


def stein_lambda(m: float, p: ModelParams) -> float:
    """lambda = (1/n)(1 - (J + 2Km)(1 - m^2)) of the linear regression identity"""
    return (1.0 - (p.J + 2.0 * p.K * m) * (1.0 - m**2)) / p.n


def clt_variance(m: float, p: ModelParams) -> float:
    """sigma^2 = n / phi''(m)"""
    dd = float(phi_d2(m, p))
    if dd <= 0.0:
        raise DomainError(f"phi''({m:g}) = {dd:g} is not positive; no Gaussian scaling")
    return p.n / dd
