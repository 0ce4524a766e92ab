"""Type definitions for result rows and exported tables"""

from typing import Literal, Optional, TypedDict, List


PhaseLabel = Literal["paramagnetic", "polarized-m1", "polarized-m2", "coexistence", "critical"]

CommandName = Literal[
    "phase", "gamma", "law", "be", "threshold", "concentration", "cramer", "mdp", "stein", "sample"
]


class StationaryPointRow(TypedDict):
    """One root of the mean-field equation"""
    m: float
    phi: float
    phi_dd: float
    kind: str


class GammaRow(TypedDict):
    """One point of the coexistence curve, CSV layout"""
    K: float
    J_gamma: float
    m_low: float
    m_high: float
    equal_depth_gap: float


class AsymptoticsRow(TypedDict):
    """m*(K, 1 + alpha K) against its small-K asymptote"""
    K: float
    J: float
    m_star: float
    predicted: float
    ratio: Optional[float]


class LawRow(TypedDict):
    """Exact pmf of S_n at one support point"""
    s: int
    m: float
    pmf: float


class RateRow(TypedDict, total=False):
    """Kolmogorov distance and bound terms at one n"""
    n: int
    K: float
    J: float
    dK: float
    bound_term1: float
    bound_term2: float
    bound_term3: float
    be_bound: float
    el_bound: float
    lipschitz_bound: float
    nonuniform_constant: float
    hypothesis_ok: bool
    excluded: bool


class ConcentrationRow(TypedDict):
    """Exact left side against the closed-form right side"""
    t: float
    lhs: float
    lhs_f: float
    rhs: float
    holds: bool


class CramerRow(TypedDict):
    """Tail ratio against the limit tail at one x"""
    x: float
    tail: float
    limit_tail: float
    ratio: float
    normalized_residual: float


class MdpRow(TypedDict):
    """Scaled log tail against -x^2/2"""
    n: int
    x: float
    a_n: float
    scaled_log_tail: float
    limit: float


class NonUniformRow(TypedDict):
    """Pointwise distance with its non-uniform prefactor"""
    z: float
    distance: float
    weighted: float


class RateFitSummary(TypedDict):
    """Log-log least squares summary"""
    slope: float
    intercept: float
    r_squared: float
    points: int


class SampleRow(TypedDict):
    """Recorded state of the chain"""
    step: int
    S: int


class ArtifactInfo(TypedDict):
    """Files written by one command"""
    command: str
    paths: List[str]
    config_hash: str
