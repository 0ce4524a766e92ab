"""Configuration, constants, and logging setup"""

import os
import tempfile
import logging
import tomllib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from .errors import ConfigError

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    handlers=[
        logging.FileHandler(os.path.join(tempfile.gettempdir(), "cubic_lab.log")),
        logging.StreamHandler()
    ]
)
logger = logging.getLogger("CubicLab")

# Search intervals for phi', phi'' stay inside [-1 + eps, 1 - eps]
BOUNDARY_EPS = 1e-9

# Stationary points: grid scan, refinement, deduplication
ROOT_GRID_POINTS = 100_000
ROOT_XTOL = 1e-12
ROOT_DEDUP_TOL = 1e-9
# Brute-force minimization oracle for phi
MIN_GRID_POINTS = 1_000_000

# Two minima closer than this in phi are of equal depth
DEPTH_TOL = 1e-10
# phi'' below this is treated as degenerate and classified by the sign of phi'
CURVATURE_TOL = 1e-12

# Coexistence curve search
GAMMA_BRACKET = (0.0, 1.0)
GAMMA_SCAN_POINTS = 64
GAMMA_J_XTOL = 1e-12
# Positive phase must be at least this far from 0 to count as a distinct phase
PHASE_SEPARATION = 1e-8

# Limit densities
QUADRATURE_TOL = 1e-10
TAIL_CUTOFF = 1e-17
CDF_PANELS = 2048
GAUSS_LEGENDRE_NODES = 20

# Glauber sampler
SAMPLER_BLOCK = 1 << 16
AUTOCORR_BUDGET = 50.0

# Environment variable with the default output directory
OUTPUT_DIR_ENV = "CUBIC_LAB_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = os.environ.get(
    OUTPUT_DIR_ENV, os.path.join(tempfile.gettempdir(), "cubic_lab")
)

# Record of the last artifact written, restored by the MCP server on restart
LAST_RUN_FILE = os.path.join(tempfile.gettempdir(), "cubic_lab_last_run.txt")


@dataclass(frozen=True)
class LabSettings:
    """Effective settings of one run: defaults < config file < CLI flags"""

    output_dir: str = DEFAULT_OUTPUT_DIR
    output_format: str = "csv"
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    seed: int = 20240521
    root_grid_points: int = ROOT_GRID_POINTS
    min_grid_points: int = MIN_GRID_POINTS
    depth_tol: float = DEPTH_TOL
    gamma_bracket: tuple[float, float] = GAMMA_BRACKET
    quadrature_tol: float = QUADRATURE_TOL
    autocorr_budget: float = AUTOCORR_BUDGET

    def merged(self, overrides: Mapping[str, Any]) -> "LabSettings":
        """Return a copy with the non-None entries of overrides applied"""
        known = {f.name for f in fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ConfigError(f"Unknown settings: {', '.join(unknown)}")
        changes: Dict[str, Any] = {}
        for key, value in overrides.items():
            if value is None:
                continue
            if key == "gamma_bracket":
                value = tuple(float(v) for v in value)
                if len(value) != 2 or value[0] >= value[1]:
                    raise ConfigError(f"gamma_bracket must be an increasing pair, got {value}")
            changes[key] = value
        if changes.get("workers", 1) < 1:
            raise ConfigError("workers must be at least 1")
        if changes.get("output_format", "csv") not in ("csv", "json"):
            raise ConfigError("output_format must be 'csv' or 'json'")
        return replace(self, **changes)

    def as_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def load_settings(config_file: Optional[str], overrides: Mapping[str, Any]) -> LabSettings:
    """Build settings from defaults, an optional TOML file and explicit overrides"""
    settings = LabSettings()
    if config_file:
        path = Path(config_file)
        if not path.exists():
            raise ConfigError(f"Config file does not exist: {config_file}")
        try:
            with path.open("rb") as f:
                data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"Invalid config file {config_file}: {e}") from e
        # A [lab] table is accepted as well as top-level keys
        settings = settings.merged(data.get("lab", data))
    return settings.merged(overrides)
