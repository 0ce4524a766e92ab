"""Experiment drivers behind the CLI subcommands

Every driver takes the parsed command parameters, the effective settings and a
map function (builtin map or a process pool's ordered map) and returns an
ExperimentResult of table rows plus a summary. Per-grid-point workers are
module-level functions so they pickle into worker processes.
"""

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence

import numpy as np

from . import __version__
from .config import LabSettings, logger
from .densities import quartic, standard_normal
from .errors import ConfigError
from .law import (
    MagnetizationInterval,
    build_law,
    clt_rescaling,
    conditional_law,
    moments,
    power_rescaling,
)
from .model import Couplings, ModelParams, phi_d2, stein_lambda
from .phase import (
    gamma_of_K,
    grid_minimize_phi,
    m_star,
    m_star_asymptotics,
    phase_portrait,
)
from .rates import fit_rate
from .sampler import sample_magnetization
from .stein import (
    RegressionDecomposition,
    alpha_nonnegative_experiment,
    be_certificate,
    concentration_check,
    cramer_constants,
    cramer_grid,
    cramer_ratio,
    critical_concentration_fit,
    exact_delta2,
    exact_regression,
    law_at_phase,
    mdp_rows,
    regression_slope,
    remainder_breakdown,
    threshold_breakdown,
    threshold_experiment,
)
from .types import CommandName

MapFn = Callable[..., Any]

RATE_COLUMNS = [
    "n", "K", "J", "dK", "bound_term1", "bound_term2", "bound_term3", "be_bound",
    "el_bound", "lipschitz_bound", "nonuniform_constant", "hypothesis_ok",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """One command with its parameters and the effective settings"""

    command: CommandName
    params: Dict[str, Any]
    settings: LabSettings

    def as_dict(self) -> Dict[str, Any]:
        settings = self.settings.as_dict()
        # Output location and parallelism do not change results
        for key in ("output_dir", "workers"):
            settings.pop(key, None)
        return {"command": self.command, "params": self.params, "settings": settings, "version": __version__}

    def config_hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass
class ExperimentResult:
    command: str
    columns: List[str]
    rows: List[Dict[str, Any]]
    summary: Dict[str, Any] = field(default_factory=dict)


# Grids


def parse_grid(text: str, integer: bool = False) -> List[float]:
    """'a,b,c' list, 'start:stop:xF' geometric, 'start:stop:step' arithmetic or a single value"""
    raw = str(text).strip()
    try:
        if "," in raw:
            values = [float(v) for v in raw.split(",") if v.strip()]
        elif ":" in raw:
            parts = raw.split(":")
            if len(parts) != 3:
                raise ConfigError(f"grid {raw!r} must look like start:stop:step or start:stop:xF")
            start, stop = float(parts[0]), float(parts[1])
            step = parts[2].strip()
            values = []
            if step.startswith("x"):
                factor = float(step[1:])
                if factor <= 1.0 or start <= 0:
                    raise ConfigError(f"geometric grid {raw!r} needs a factor > 1 and a positive start")
                v = start
                while v <= stop * (1.0 + 1e-12):
                    values.append(v)
                    v *= factor
            else:
                increment = float(step)
                if increment <= 0:
                    raise ConfigError(f"arithmetic grid {raw!r} needs a positive step")
                count = int(np.floor((stop - start) / increment + 1e-9)) + 1
                values = [start + increment * i for i in range(max(count, 0))]
        else:
            values = [float(raw)]
    except ValueError as e:
        raise ConfigError(f"cannot parse grid {raw!r}: {e}") from e
    if not values:
        raise ConfigError(f"grid {raw!r} is empty")
    if integer:
        if any(v != int(v) for v in values):
            raise ConfigError(f"grid {raw!r} must contain integers")
        return [int(v) for v in values]
    return values


def parse_n_grid(text: str) -> List[int]:
    ns = [int(v) for v in parse_grid(text, integer=True)]
    if any(n < 2 for n in ns):
        raise ConfigError(f"n grid {text!r} must contain n >= 2")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError(f"n grid {text!r} must be strictly increasing")
    return ns


def parse_interval(text: Optional[str]) -> Optional[MagnetizationInterval]:
    if not text:
        return None
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"conditioning interval {text!r} must look like lo:hi")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as e:
        raise ConfigError(f"cannot parse conditioning interval {text!r}: {e}") from e
    if not -1.0 <= lo < hi <= 1.0:
        raise ConfigError(f"conditioning interval {text!r} must satisfy -1 <= lo < hi <= 1")
    return MagnetizationInterval(lo, hi)


@contextmanager
def worker_map(workers: int) -> Iterator[MapFn]:
    """Ordered map over a process pool; plain map for a single worker"""
    if workers <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield pool.map


def _fit_summary(rows: Sequence[Dict[str, Any]], key: str) -> Optional[Dict[str, Any]]:
    kept = [r for r in rows if not r.get("excluded", False)]
    if len(kept) < 2:
        return None
    fit = fit_rate([r["n"] for r in kept], [r[key] for r in kept], label=key)
    summary: Dict[str, Any] = dict(fit.summary())
    summary["scaled"] = fit.scaled()
    return summary


# Grid-point workers


def be_point(K: float, J: float, interval: Optional[MagnetizationInterval], n: int) -> Dict[str, Any]:
    """Exact d_K and plug-in bound terms at one n; quartic scaling at the critical point"""
    p = ModelParams(K, J, n)
    if p.is_critical:
        law = build_law(p)
        rv = power_rescaling(n, 0.75)
        decomp = RegressionDecomposition.cubic_family(n**-1.5, 2, 1.0 / 3.0)
        report = be_certificate(law, rv, quartic(1.0), decomp, m=0.0)
    else:
        law, m = law_at_phase(p, interval)
        rv = clt_rescaling(law, m)
        report = be_certificate(law, rv, standard_normal(), RegressionDecomposition.linear(m, p), m=m)
    return dict(report.as_rate_row())


def concentration_point(K: float, J: float, t_grid: Sequence[float], n: int) -> List[Dict[str, Any]]:
    law = build_law(ModelParams(K, J, n))
    return [{"n": n, **row} for row in concentration_check(law, t_grid)]


def cramer_point(
    K: float, J: float, x_values: Optional[Sequence[float]], interval: Optional[MagnetizationInterval], n: int
) -> Dict[str, Any]:
    law, m = law_at_phase(ModelParams(K, J, n), interval)
    rv = clt_rescaling(law, m)
    x_grid = list(x_values) if x_values else cramer_grid(n)
    rows = [{"n": n, **row} for row in cramer_ratio(law, rv, x_grid)]
    constants = cramer_constants(law, rv, m)
    return {"rows": rows, "constants": {"n": n, **asdict(constants)}}


def mdp_point(K: float, J: float, x_grid: Sequence[float], exponent: float, n: int) -> List[Dict[str, Any]]:
    law, m = law_at_phase(ModelParams(K, J, n))
    return [dict(row) for row in mdp_rows(law, clt_rescaling(law, m), x_grid, exponent)]


def gamma_point(bracket: Sequence[float], grid_points: int, depth_tol: float, K: float) -> Dict[str, Any]:
    point = gamma_of_K(K, (bracket[0], bracket[1]), grid_points=grid_points, depth_tol=depth_tol)
    return dict(point.as_row())


# Commands


def run_phase(params: Dict[str, Any], settings: LabSettings, map_fn: MapFn) -> ExperimentResult:
    if params.get("alpha") is not None:
        K_grid = sorted(parse_grid(params["K_grid"]), reverse=True)
        rows = [dict(r) for r in m_star_asymptotics(params["alpha"], K_grid)]
        return ExperimentResult("phase", ["K", "J", "m_star", "predicted", "ratio"], rows)

    p = Couplings(params["K"], params["J"])
    portrait = phase_portrait(p, settings.root_grid_points, settings.depth_tol)
    rows = [
        {"m": pt.m, "phi": pt.phi_value, "phi_dd": pt.phi_dd, "kind": pt.kind}
        for pt in portrait.stationary_points
    ]
    summary: Dict[str, Any] = {
        "phase_label": portrait.phase_label,
        "global_minimizers": list(portrait.global_minimizers),
        "inf_phi": portrait.inf_phi,
        "grid_argmin": grid_minimize_phi(p, settings.min_grid_points),
    }
    return ExperimentResult("phase", ["m", "phi", "phi_dd", "kind"], rows, summary)


def run_gamma(params: Dict[str, Any], settings: LabSettings, map_fn: MapFn) -> ExperimentResult:
    K_grid = parse_grid(params["K_grid"])
    if any(K <= 0 for K in K_grid):
        raise ConfigError("gamma needs K > 0")
    worker = partial(gamma_point, settings.gamma_bracket, settings.root_grid_points, settings.depth_tol)
    rows = list(map_fn(worker, K_grid))
    return ExperimentResult("gamma", ["K", "J_gamma", "m_low", "m_high", "equal_depth_gap"], rows)


def run_law(params: Dict[str, Any], settings: LabSettings, map_fn: MapFn) -> ExperimentResult:
    p = ModelParams(params["K"], params["J"], params["n"])
    law = build_law(p)
    interval = parse_interval(params.get("condition"))
    if interval is not None:
        law = conditional_law(law, interval)
    summary = {"log_Z": law.log_Z, "mean_magnetization": law.mean_magnetization()}
    return ExperimentResult("law", ["s", "m", "pmf"], [dict(r) for r in law.rows()], summary)


def run_be(params: Dict[str, Any], settings: LabSettings, map_fn: MapFn) -> ExperimentResult:
    n_grid = parse_n_grid(params["n_grid"])
    worker = partial(be_point, params["K"], params["J"], parse_interval(params.get("condition")))
    rows = list(map_fn(worker, n_grid))
    summary = {key: _fit_summary(rows, key) for key in ("dK", "bound_term1", "bound_term2", "be_bound")}
    return ExperimentResult("be", RATE_COLUMNS, rows, summary)


def run_threshold(params: Dict[str, Any], settings: LabSettings, map_fn: MapFn) -> ExperimentResult:
    n_grid = parse_n_grid(params["n_grid"])
    alpha = params["alpha"]
    if alpha >= 0:
        rows = alpha_nonnegative_experiment(alpha, params["kappa"], n_grid, map_fn)
        columns = ["n", "K", "J", "m_star", "dK_quartic", "dK_candidate", "certified"]
        return ExperimentResult("threshold", columns, rows, {"certified": False})
    result = threshold_experiment(params["case"], alpha, n_grid, params["delta"], map_fn)
    rows = [dict(r) for r in result.rows]
    for row in rows:
        row.setdefault("excluded", False)
    summary = {
        "case": result.case,
        "fit": None if result.fit is None else {**result.fit.summary(), "scaled": result.fit.scaled()},
        "excluded": [r["n"] for r in rows if r["excluded"]],
    }
    return ExperimentResult("threshold", RATE_COLUMNS + ["excluded"], rows, summary)


def run_concentration(params: Dict[str, Any], settings: LabSettings, map_fn: MapFn) -> ExperimentResult:
    n_grid = parse_n_grid(params["n_grid"])
    t_grid = parse_grid(params["t_grid"])
    K, J = params["K"], params["J"]
    rows = [row for chunk in map_fn(partial(concentration_point, K, J, t_grid), n_grid) for row in chunk]
    violations = sum(1 for r in rows if not r["holds"])
    if violations:
        logger.warning(f"Concentration inequality violated at {violations} grid points")
    summary: Dict[str, Any] = {"violations": violations}
    if Couplings(K, J).is_critical:
        summary["critical_fit"] = [
            critical_concentration_fit(build_law(ModelParams(K, J, n)), t_grid) for n in n_grid
        ]
    return ExperimentResult("concentration", ["n", "t", "lhs", "lhs_f", "rhs", "holds"], rows, summary)


def run_cramer(params: Dict[str, Any], settings: LabSettings, map_fn: MapFn) -> ExperimentResult:
    n_grid = parse_n_grid(params["n_grid"])
    x_values = parse_grid(params["x_grid"]) if params.get("x_grid") else None
    worker = partial(cramer_point, params["K"], params["J"], x_values, parse_interval(params.get("condition")))
    results = list(map_fn(worker, n_grid))
    rows = [row for r in results for row in r["rows"]]
    summary = {
        "max_normalized_residual": {
            str(r["constants"]["n"]): max(row["normalized_residual"] for row in r["rows"]) for r in results
        },
        "constants": [r["constants"] for r in results],
    }
    columns = ["n", "x", "tail", "limit_tail", "ratio", "normalized_residual"]
    return ExperimentResult("cramer", columns, rows, summary)


def run_mdp(params: Dict[str, Any], settings: LabSettings, map_fn: MapFn) -> ExperimentResult:
    n_grid = parse_n_grid(params["n_grid"])
    x_grid = parse_grid(params["x_grid"])
    worker = partial(mdp_point, params["K"], params["J"], x_grid, params["exponent"])
    rows = [row for chunk in map_fn(worker, n_grid) for row in chunk]
    return ExperimentResult("mdp", ["n", "x", "a_n", "scaled_log_tail", "limit"], rows)


def run_stein(params: Dict[str, Any], settings: LabSettings, map_fn: MapFn) -> ExperimentResult:
    p = ModelParams(params["K"], params["J"], params["n"])
    summary: Dict[str, Any]
    if p.is_critical:
        law = build_law(p)
        rv = power_rescaling(p.n, 0.75)
        lam = p.n**-1.5
        summary = {"lambda": lam, "breakdown": threshold_breakdown(law, rv, lam)}
    else:
        law, m = law_at_phase(p, parse_interval(params.get("condition")))
        rv = clt_rescaling(law, m)
        lam = stein_lambda(m, p)
        summary = {
            "m": m,
            "lambda": lam,
            "lambda_from_curvature": (1.0 - m * m) * float(phi_d2(m, p)) / p.n,
            "regression_slope": regression_slope(law, rv),
            "breakdown": remainder_breakdown(law, rv, m),
        }
    s = law.support
    regression = np.asarray(exact_regression(s, p, rv))
    delta2 = np.asarray(exact_delta2(s, p, rv))
    pmf = law.pmf
    summary["mean_regression"] = float(pmf @ regression)
    summary["mean_delta2_over_2lambda"] = float(pmf @ delta2) / (2.0 * lam)
    summary["moments"] = moments(law, rv, [1, 2])
    w = rv.apply(s)
    keep = (np.abs(w) <= params.get("window", 4.0)) & (pmf > 0)
    rows = [
        {"s": int(si), "w": float(wi), "regression": float(ri), "delta2": float(di)}
        for si, wi, ri, di in zip(s[keep], w[keep], regression[keep], delta2[keep])
    ]
    return ExperimentResult("stein", ["s", "w", "regression", "delta2"], rows, summary)


def run_sample(params: Dict[str, Any], settings: LabSettings, map_fn: MapFn) -> ExperimentResult:
    p = ModelParams(params["K"], params["J"], params["n"])
    seed = params.get("seed")
    empirical = sample_magnetization(
        p,
        params["samples"],
        burn_in=params.get("burn_in"),
        thinning=params.get("thinning"),
        seed=settings.seed if seed is None else seed,
        autocorr_budget=settings.autocorr_budget,
    )
    law = build_law(p)
    summary = {
        **empirical.metadata(),
        "ks_distance": empirical.ks_distance(law),
        "ks_band": 3.0 / np.sqrt(params["samples"]),
        "mean_S": empirical.mean,
        "standard_error": empirical.standard_error,
        "exact_mean_S": float(law.pmf @ law.support),
    }
    return ExperimentResult("sample", ["step", "S"], [dict(r) for r in empirical.rows()], summary)


COMMANDS: Dict[str, Callable[[Dict[str, Any], LabSettings, MapFn], ExperimentResult]] = {
    "phase": run_phase,
    "gamma": run_gamma,
    "law": run_law,
    "be": run_be,
    "threshold": run_threshold,
    "concentration": run_concentration,
    "cramer": run_cramer,
    "mdp": run_mdp,
    "stein": run_stein,
    "sample": run_sample,
}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    try:
        command = COMMANDS[config.command]
    except KeyError:
        raise ConfigError(f"unknown command {config.command!r}") from None
    with worker_map(config.settings.workers) as map_fn:
        return command(config.params, config.settings, map_fn)
