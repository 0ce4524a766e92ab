"""Command-line front end: one subcommand per experiment, plus serve"""

import argparse
import sys
from typing import Any, Dict, List, Optional

from .config import OUTPUT_DIR_ENV, load_settings, logger
from .errors import ConfigError, LabError
from .experiments import ExperimentConfig
from .runner import ExperimentRunner, dumps

COMMON = ("config", "workers", "output_dir", "output_format", "seed", "command")

EPILOGS = {
    "phase": "CSV columns: m, phi, phi_dd, kind\n"
             "with --alpha and --K-grid: K, J, m_star, predicted, ratio",
    "gamma": "CSV columns: K, J_gamma, m_low, m_high, equal_depth_gap",
    "law": "CSV columns: s, m, pmf",
    "be": "CSV columns: n, K, J, dK, bound_term1, bound_term2, bound_term3, be_bound,\n"
          "el_bound, lipschitz_bound, nonuniform_constant, hypothesis_ok\n"
          "Rate fits of dK and the bound terms go to the summary file.",
    "threshold": "CSV columns (alpha < 0): the be columns plus excluded\n"
                 "CSV columns (alpha >= 0): n, K, J, m_star, dK_quartic, dK_candidate, certified",
    "concentration": "CSV columns: n, t, lhs, lhs_f, rhs, holds",
    "cramer": "CSV columns: n, x, tail, limit_tail, ratio, normalized_residual\n"
              "Moderate-deviation constants per n go to the summary file.",
    "mdp": "CSV columns: n, x, a_n, scaled_log_tail, limit",
    "stein": "CSV columns: s, w, regression, delta2 (atoms with |w| <= window)",
    "sample": "CSV columns: step, S",
}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with settings (a [lab] table or top-level keys)")
    common.add_argument("--workers", type=int, help="Worker processes for grid experiments (default: CPU count)")
    common.add_argument("--output-dir", help=f"Output directory (default: ${OUTPUT_DIR_ENV} or the temp dir)")
    common.add_argument("--format", dest="output_format", choices=["csv", "json"], help="Artifact format")
    common.add_argument("--seed", type=int, help="Root seed for the sampler")
    return common


def _couplings(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--K", type=float, required=required, help="Three-body coupling K >= 0")
    parser.add_argument("--J", type=float, required=required, help="Two-body coupling J > 0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cubic-lab",
        description="Numerical laboratory for the cubic mean-field Ising model",
        epilog="Grids: a,b,c lists, start:stop:xF geometric, start:stop:step arithmetic. "
               "Exit codes: 2 usage, 3 coexistence or critical point, 4 numerical guard.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(
            name, help=help_text, parents=[common], epilog=EPILOGS[name],
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )

    phase = add("phase", "Stationary points, global minimizers and phase label of phi")
    _couplings(phase, required=False)
    phase.add_argument("--alpha", type=float, help="Follow m* along J = 1 + alpha K instead")
    phase.add_argument("--K-grid", default="1e-1,1e-2,1e-3,1e-4", help="K values for --alpha")

    gamma = add("gamma", "Coexistence curve gamma(K)")
    gamma.add_argument("--K-grid", required=True)
    gamma.add_argument("--bracket", help="J bracket lo:hi for the equal-depth search")

    law = add("law", "Exact pmf of S_n")
    _couplings(law)
    law.add_argument("--n", type=int, required=True)
    law.add_argument("--condition", help="Condition on m in lo:hi")

    be = add("be", "Exact Kolmogorov distance and Berry-Esseen bound terms over n")
    _couplings(be)
    be.add_argument("--n-grid", default="1024:65536:x2")
    be.add_argument("--condition", help="Condition on m in lo:hi around one phase")

    threshold = add("threshold", "Distances along J = 1 + alpha K_n near the critical point")
    threshold.add_argument("--case", type=int, choices=[1, 2, 3, 4], default=1)
    threshold.add_argument("--alpha", type=float, required=True)
    threshold.add_argument("--delta", type=float, default=0.1, help="K_n = n^(-2 delta) in cases 3 and 4")
    threshold.add_argument("--kappa", type=float, default=0.25, help="K_n = n^(-kappa) when alpha >= 0")
    threshold.add_argument("--n-grid", default="1024:65536:x2")

    concentration = add("concentration", "Exact concentration probabilities against the closed-form bound")
    _couplings(concentration)
    concentration.add_argument("--n-grid", "--n", dest="n_grid", default="100,1000,10000")
    concentration.add_argument("--t-grid", "--t", dest="t_grid", default="0:5:0.5")

    cramer = add("cramer", "Relative tail error P(W > x)/P(Z > x)")
    _couplings(cramer)
    cramer.add_argument("--n-grid", default="1024:65536:x2")
    cramer.add_argument("--x-grid", help="x values (default: 16 points on [0, n^(1/6)])")
    cramer.add_argument("--condition", help="Condition on m in lo:hi around one phase")

    mdp = add("mdp", "Scaled log tails (1/a_n^2) log P(W > a_n x)")
    _couplings(mdp)
    mdp.add_argument("--n-grid", default="1024:65536:x2")
    mdp.add_argument("--x-grid", default="0.5,1,1.5")
    mdp.add_argument("--exponent", type=float, default=0.125, help="a_n = n^exponent")

    stein = add("stein", "Exchangeable-pair regression, lambda and remainder pieces at one n")
    _couplings(stein)
    stein.add_argument("--n", type=int, required=True)
    stein.add_argument("--condition", help="Condition on m in lo:hi around one phase")
    stein.add_argument("--window", type=float, default=4.0)

    sample = add("sample", "Heat-bath Glauber chain compared with the exact law")
    _couplings(sample)
    sample.add_argument("--n", type=int, required=True)
    sample.add_argument("--samples", type=int, default=100_000)
    sample.add_argument("--burn-in", type=int, help="Default: 100 n^2 single-spin steps")
    sample.add_argument("--thinning", type=int, help="Default: n steps")

    sub.add_parser("serve", help="Run the MCP server on stdio")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Effective settings and command parameters of a parsed command line"""
    overrides: Dict[str, Any] = {
        "workers": args.workers,
        "output_dir": args.output_dir,
        "output_format": args.output_format,
        "seed": args.seed,
    }
    params = {k: v for k, v in vars(args).items() if k not in COMMON}

    if args.command == "gamma":
        bracket = params.pop("bracket")
        if bracket:
            try:
                overrides["gamma_bracket"] = tuple(float(v) for v in bracket.split(":"))
            except ValueError as e:
                raise ConfigError(f"cannot parse bracket {bracket!r}: {e}") from e
    if args.command == "phase":
        if params["alpha"] is None and (params["K"] is None or params["J"] is None):
            raise ConfigError("phase needs --K and --J, or --alpha with --K-grid")
        if params["alpha"] is None:
            params.pop("K_grid")

    settings = load_settings(args.config, overrides)
    return ExperimentConfig(command=args.command, params=params, settings=settings)


def run_command(args: argparse.Namespace, runner: Optional[ExperimentRunner] = None) -> int:
    """Run one experiment subcommand; returns the process exit code"""
    try:
        config = config_from_args(args)
        runner = runner or ExperimentRunner(config.settings)
        result, info = runner.run(config)
    except LabError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    print(dumps({"paths": info["paths"], "config_hash": info["config_hash"], "summary": result.summary}))
    return 0


def parse(argv: Optional[List[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)
