"""Heat-bath Glauber dynamics for the cubic mean-field model

One step picks a uniform site I and redraws X_I from its conditional law given the
other spins: P(X_I' = +1) = e^u / (2 cosh u) with u = J m_I + K m_I^2 + K/(3n^2)
and m_I = (S_n - X_I)/n. S_n is cached and updated in O(1) per step.
"""

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from functools import partial
from math import exp
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numba
import numpy as np
import numpy.typing as npt

from .config import AUTOCORR_BUDGET, SAMPLER_BLOCK, logger
from .errors import DomainError, LabError
from .law import MagnetizationLaw
from .model import FloatArray, ModelParams
from .types import SampleRow

IntArray = npt.NDArray[np.int64]
RNG_STREAM = "numpy.random.Generator(PCG64(SeedSequence(seed)))"
DEBUG_CHECK_EVERY = 10_000


@numba.njit(cache=True)
def _heat_bath_block(spins, s, K, J, indices, uniforms, trace):  # type: ignore[no-untyped-def]
    n = spins.shape[0]
    self_term = K / (3.0 * n * n)
    for t in range(indices.shape[0]):
        i = indices[t]
        m_i = (s - spins[i]) / n
        u = J * m_i + K * m_i * m_i + self_term
        new = 1 if uniforms[t] * (1.0 + exp(-2.0 * u)) < 1.0 else -1
        s += new - spins[i]
        spins[i] = new
        trace[t] = s
    return s


@dataclass
class ChainState:
    """Spins, cached S_n, generator and step counter of one chain"""

    spins: npt.NDArray[np.int8]
    s_cache: int
    rng: np.random.Generator
    step_count: int = 0

    @classmethod
    def new(cls, n: int, seed: int, start: str = "random") -> "ChainState":
        rng = np.random.default_rng(seed)
        if start == "random":
            spins = np.where(rng.random(n) < 0.5, 1, -1).astype(np.int8)
        elif start == "up":
            spins = np.ones(n, dtype=np.int8)
        elif start == "down":
            spins = -np.ones(n, dtype=np.int8)
        else:
            raise DomainError(f"start must be 'random', 'up' or 'down', got {start!r}")
        return cls(spins=spins, s_cache=int(spins.sum(dtype=np.int64)), rng=rng)

    @property
    def n(self) -> int:
        return int(self.spins.shape[0])

    def check_cache(self) -> None:
        total = int(self.spins.sum(dtype=np.int64))
        if total != self.s_cache:
            raise LabError(f"cached S_n = {self.s_cache} but the spins sum to {total} after {self.step_count} steps")


def run_chain(state: ChainState, p: ModelParams, steps: int, debug: bool = False) -> IntArray:
    """Advance the chain in place; returns S_n after every step"""
    if state.n != p.n:
        raise DomainError(f"state has {state.n} spins but n={p.n}")
    trace = np.empty(steps, dtype=np.int64)
    block = min(SAMPLER_BLOCK, DEBUG_CHECK_EVERY) if debug else SAMPLER_BLOCK
    done = 0
    while done < steps:
        size = min(block, steps - done)
        indices = state.rng.integers(0, p.n, size=size)
        uniforms = state.rng.random(size)
        state.s_cache = int(_heat_bath_block(
            state.spins, np.int64(state.s_cache), float(p.K), float(p.J), indices, uniforms, trace[done:done + size]
        ))
        done += size
        state.step_count += size
        if debug:
            state.check_cache()
    return trace


def heat_bath_step(state: ChainState, p: ModelParams) -> ChainState:
    run_chain(state, p, 1)
    return state


@dataclass(frozen=True, eq=False)
class EmpiricalLaw:
    params: ModelParams
    samples: IntArray = field(repr=False)
    seed: int
    burn_in: int
    thinning: int
    tau: float

    @property
    def pmf(self) -> FloatArray:
        n = self.params.n
        counts = np.bincount((self.samples + n) // 2, minlength=n + 1)
        return counts / counts.sum()

    @property
    def mean(self) -> float:
        return float(self.samples.mean())

    @property
    def standard_error(self) -> float:
        """Standard error of the mean of S_n, inflated by the autocorrelation time"""
        return float(self.samples.std(ddof=1) * np.sqrt(max(self.tau, 1.0) / self.samples.size))

    def ks_distance(self, law: MagnetizationLaw) -> float:
        return float(np.max(np.abs(np.cumsum(self.pmf) - np.cumsum(law.pmf))))

    def rows(self) -> List[SampleRow]:
        first = self.burn_in + self.thinning
        return [{"step": first + i * self.thinning, "S": int(s)} for i, s in enumerate(self.samples)]

    def metadata(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "rng_stream": RNG_STREAM,
            "n": self.params.n,
            "K": self.params.K,
            "J": self.params.J,
            "burn_in": self.burn_in,
            "thinning": self.thinning,
            "samples": int(self.samples.size),
            "integrated_autocorrelation": self.tau,
        }

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=["step", "S"])
        writer.writeheader()
        writer.writerows(self.rows())
        return buffer.getvalue()

    def to_json(self) -> str:
        return json.dumps({"metadata": self.metadata(), "samples": self.samples.tolist()})


def integrated_autocorrelation(trace: Sequence[float], window: float = 5.0) -> float:
    """tau = 1 + 2 sum_t rho(t), summed up to the first M with M >= window * tau(M)"""
    x = np.asarray(trace, dtype=np.float64)
    x = x - x.mean()
    size = x.size
    if size < 2 or not np.any(x):
        return 1.0
    padded = 1 << int(np.ceil(np.log2(2 * size)))
    spectrum = np.fft.rfft(x, padded)
    acf = np.fft.irfft(spectrum * np.conj(spectrum), padded)[:size]
    rho = acf / acf[0]
    tau = 1.0
    for M in range(1, size):
        tau += 2.0 * rho[M]
        if M >= window * tau:
            break
    return float(max(tau, 1.0))


def sample_magnetization(
    p: ModelParams,
    n_samples: int,
    burn_in: Optional[int] = None,
    thinning: Optional[int] = None,
    seed: int = 0,
    start: str = "random",
    autocorr_budget: float = AUTOCORR_BUDGET,
    debug: bool = False,
) -> EmpiricalLaw:
    """Record S_n every `thinning` steps after `burn_in` steps

    Defaults: 100 n^2 single-spin steps of burn-in (100 n sweeps) and one sample per sweep (n steps).
    """
    if n_samples < 1:
        raise DomainError(f"n_samples must be at least 1, got {n_samples}")
    burn = 100 * p.n * p.n if burn_in is None else burn_in
    thin = p.n if thinning is None else thinning
    if burn < 0 or thin < 1:
        raise DomainError(f"burn_in must be >= 0 and thinning >= 1, got {burn}, {thin}")

    state = ChainState.new(p.n, seed, start)
    if burn:
        run_chain(state, p, burn, debug)
    samples = np.empty(n_samples, dtype=np.int64)
    # Chunks of whole thinning periods keep the memory bounded
    per_chunk = max(1, SAMPLER_BLOCK // thin)
    filled = 0
    while filled < n_samples:
        take = min(per_chunk, n_samples - filled)
        trace = run_chain(state, p, take * thin, debug)
        samples[filled:filled + take] = trace[thin - 1::thin]
        filled += take

    tau = integrated_autocorrelation(samples)
    if tau > autocorr_budget:
        logger.warning(
            f"Chain at K={p.K:g}, J={p.J:g}, n={p.n} mixes slowly: integrated autocorrelation "
            f"{tau:.1f} samples exceeds {autocorr_budget:g}"
        )
    return EmpiricalLaw(params=p, samples=samples, seed=seed, burn_in=burn, thinning=thin, tau=tau)


def chain_seeds(seed: int, count: int) -> List[int]:
    """Independent child seeds spawned from one root seed"""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def sample_chains(
    p: ModelParams,
    n_chains: int,
    n_samples: int,
    seed: int,
    map_fn: Callable[..., Iterable[EmpiricalLaw]] = map,
    **kwargs: Any,
) -> List[EmpiricalLaw]:
    run = partial(_sample_with_seed, p, n_samples, kwargs)
    return list(map_fn(run, chain_seeds(seed, n_chains)))


def _sample_with_seed(p: ModelParams, n_samples: int, kwargs: Dict[str, Any], seed: int) -> EmpiricalLaw:
    return sample_magnetization(p, n_samples, seed=seed, **kwargs)


def empirical_flip_mean(state: ChainState, p: ModelParams, trials: int) -> Tuple[float, float]:
    """Mean and standard error of X_I' drawn from the current configuration, which is left unchanged"""
    n = state.n
    I = state.rng.integers(0, n, size=trials)
    m_i = (state.s_cache - state.spins[I].astype(np.float64)) / n
    u = p.J * m_i + p.K * m_i**2 + p.K / (3.0 * n * n)
    draws = np.where(state.rng.random(trials) < 1.0 / (1.0 + np.exp(-2.0 * u)), 1.0, -1.0)
    return float(draws.mean()), float(draws.std(ddof=1) / np.sqrt(trials))


def _configurations(n: int) -> npt.NDArray[np.int8]:
    return np.array(list(itertools.product((-1, 1), repeat=n)), dtype=np.int8)


def gibbs_configuration_law(p: ModelParams) -> FloatArray:
    """Gibbs probabilities of all 2^n configurations in itertools.product order"""
    configs = _configurations(p.n)
    m = configs.sum(axis=1) / p.n
    log_w = p.n * (p.K / 3.0 * m**3 + p.J / 2.0 * m**2)
    w = np.exp(log_w - log_w.max())
    return np.asarray(w / w.sum())


def dense_kernel(p: ModelParams) -> FloatArray:
    """2^n x 2^n heat-bath transition matrix"""
    if p.n > 8:
        raise DomainError(f"dense kernel is limited to n <= 8, got {p.n}")
    n = p.n
    configs = _configurations(n)
    size = configs.shape[0]
    index = {tuple(c): k for k, c in enumerate(configs.tolist())}
    P = np.zeros((size, size))
    for a, x in enumerate(configs):
        s = int(x.sum())
        for i in range(n):
            m_i = (s - x[i]) / n
            u = p.J * m_i + p.K * m_i**2 + p.K / (3.0 * n * n)
            p_up = 1.0 / (1.0 + np.exp(-2.0 * u))
            for value, prob in ((1, p_up), (-1, 1.0 - p_up)):
                y = x.copy()
                y[i] = value
                P[a, index[tuple(y.tolist())]] += prob / n
    return P


def stationary_distribution(P: FloatArray, tol: float = 1e-14, max_iter: int = 1_000_000) -> FloatArray:
    """Left Perron vector of a stochastic matrix by power iteration"""
    pi = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(max_iter):
        nxt = pi @ P
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() < tol:
            return nxt
        pi = nxt
    raise LabError(f"power iteration did not converge in {max_iter} iterations")
