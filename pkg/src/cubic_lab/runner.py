"""ExperimentRunner: runs experiments, writes artifacts and remembers the last run"""

import csv
import json
import os
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from .config import LAST_RUN_FILE, LabSettings, logger
from .experiments import ExperimentConfig, ExperimentResult, run_experiment
from .law import MagnetizationLaw, build_law
from .model import ModelParams
from .types import ArtifactInfo


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps(value: Any) -> str:
    return json.dumps(value, indent=2, default=_jsonable)


class ExperimentRunner:
    """Runs experiment configs and keeps the exact laws it has built"""

    def __init__(self, settings: Optional[LabSettings] = None) -> None:
        self.settings = settings or LabSettings()
        self.laws: Dict[Tuple[float, float, int], MagnetizationLaw] = {}
        self.last_artifact: Optional[str] = None

        # Try to restore the last artifact from the state file
        self._load_last_run()

    def _load_last_run(self) -> bool:
        """Load the last artifact path from the state file"""
        if not os.path.exists(LAST_RUN_FILE):
            return False

        try:
            with open(LAST_RUN_FILE, "r", encoding="utf-8") as f:
                path = f.read().strip()
            if path and os.path.exists(path):
                self.last_artifact = path
                return True
            os.remove(LAST_RUN_FILE)
            logger.info("Removed state file pointing to a missing artifact")
        except Exception as e:
            logger.error(f"Failed to load last run: {e}")
            try:
                os.remove(LAST_RUN_FILE)
                logger.info("Removed corrupted state file")
            except Exception as e_remove:
                logger.error(f"Failed to remove state file: {e_remove}")
        return False

    def _save_last_run(self) -> bool:
        if not self.last_artifact:
            return False
        try:
            with open(LAST_RUN_FILE, "w", encoding="utf-8") as f:
                f.write(self.last_artifact)
            return True
        except Exception as e:
            logger.error(f"Failed to save last run: {e}")
        return False

    def law(self, K: float, J: float, n: int) -> MagnetizationLaw:
        """Exact law of S_n, built once per (K, J, n)"""
        key = (float(K), float(J), int(n))
        if key not in self.laws:
            self.laws[key] = build_law(ModelParams(*key))
        return self.laws[key]

    def metadata(self, config: ExperimentConfig) -> Dict[str, Any]:
        return {
            "version": __version__,
            "command": config.command,
            "config_hash": config.config_hash(),
            "params": config.params,
            "settings": config.as_dict()["settings"],
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }

    def run(self, config: ExperimentConfig) -> Tuple[ExperimentResult, ArtifactInfo]:
        logger.info(f"Running {config.command} with {config.params}")
        result = run_experiment(config)
        info = self.write(config, result)
        self.last_artifact = info["paths"][0]
        self._save_last_run()
        return result, info

    def write(self, config: ExperimentConfig, result: ExperimentResult) -> ArtifactInfo:
        """Write the table and summary under the output directory"""
        os.makedirs(config.settings.output_dir, exist_ok=True)
        digest = config.config_hash()
        stem = os.path.join(config.settings.output_dir, f"{config.command}-{digest[:12]}")
        meta = self.metadata(config)
        paths: List[str] = []

        if config.settings.output_format == "json":
            path = f"{stem}.json"
            with open(path, "w", encoding="utf-8") as f:
                f.write(dumps({"metadata": meta, "summary": result.summary, "rows": result.rows}))
            paths.append(path)
        else:
            path = f"{stem}.csv"
            with open(path, "w", encoding="utf-8", newline="") as f:
                for key, value in meta.items():
                    f.write(f"# {key}: {json.dumps(value, sort_keys=True, default=_jsonable)}\n")
                writer = csv.DictWriter(f, fieldnames=result.columns, extrasaction="ignore")
                writer.writeheader()
                writer.writerows(result.rows)
            paths.append(path)
            if result.summary:
                summary_path = f"{stem}.summary.json"
                with open(summary_path, "w", encoding="utf-8") as f:
                    f.write(dumps({"metadata": meta, "summary": result.summary}))
                paths.append(summary_path)

        logger.info(f"Wrote {', '.join(paths)}")
        return {"command": config.command, "paths": paths, "config_hash": digest}


# Global runner used by the MCP tools
runner = ExperimentRunner()
