"""Load runtime defaults from config.yaml."""

import os
import copy
import yaml
from pathlib import Path
from typing import Any, Dict
from .logger import get_logger

logger = get_logger(__name__)

WORKERS_ENV_VAR = "RSSBOUNDS_WORKERS"

DEFAULT_SETTINGS: Dict[str, Dict[str, Any]] = {
    'model': {
        'p0_dbm': 0.0,
        'gamma': 3.5,
        'd0_m': 1.0,
        'sigma_db': 5.0,
    },
    'analysis': {
        'confidence_k': 1.0,
    },
    'estimator': {
        'max_iters': 500,
        'init_std_m': 0.5,
        'gradient_tol': 1.0e-6,
    },
    'verification': {
        'suite': 'schur-oracle',
        'trials': 2000,
        'seed': 0,
        'chunk_size': 1000,
        'asymptotic_sample_count': 50,
        'convergence_floor': 0.95,
        'confidence_p': 0.8647,
        'schur_tol': 1.0e-8,
        'gradient_tol': 1.0e-5,
        'empirical_fim_tol': 0.03,
        'coverage_se_factor': 3.0,
        'covariance_trace_tol': 0.10,
        'gradient_points': 100,
        'schur_random_scenarios': 20,
    },
    'plot': {
        'width_px': 800,
        'height_px': 800,
        'margin_px': 60,
        'tick_count': 6,
        'ie_color': '#1f77b4',
        'ee_color': '#d62728',
        'anchor_color': '#2ca02c',
        'source_color': '#000000',
    },
}


class SettingsLoader:
    """Loads runtime defaults and merges them over the built-in values."""

    def __init__(self, config_path: Path = Path("config.yaml")):
        """
        Initialize settings loader.

        Args:
            config_path: Path to config.yaml file
        """
        self.config_path = Path(config_path)
        self.settings = copy.deepcopy(DEFAULT_SETTINGS)
        self._load_config()

    def _load_config(self):
        """Load configuration from YAML file, keeping defaults for missing keys."""
        if not self.config_path.exists():
            logger.warning(f"Config file not found: {self.config_path}, using built-in defaults")
            return

        logger.debug(f"Loading config from {self.config_path}")
        with open(self.config_path, 'r', encoding='utf-8') as f:
            loaded = yaml.safe_load(f) or {}

        for section, values in loaded.items():
            if not isinstance(values, dict):
                logger.warning(f"Ignoring non-mapping config section '{section}'")
                continue
            self.settings.setdefault(section, {}).update(values)

        logger.debug(f"Loaded {len(loaded)} config sections")

    def get_section(self, section_name: str) -> Dict[str, Any]:
        """
        Get a configuration section.

        Args:
            section_name: Name of section (e.g., 'model', 'verification')

        Returns:
            Dictionary with the merged section values
        """
        return dict(self.settings.get(section_name, {}))

    def get(self, section_name: str, key: str, default: Any = None) -> Any:
        """
        Get a single configuration value.

        Args:
            section_name: Section name
            key: Key within the section
            default: Value returned when the key is absent

        Returns:
            The configured value
        """
        return self.settings.get(section_name, {}).get(key, default)

    @staticmethod
    def worker_count() -> int:
        """
        Worker count for the joblib pool, read from the environment.

        Returns:
            Number of workers (at least 1)
        """
        raw = os.environ.get(WORKERS_ENV_VAR)
        if not raw:
            return 1
        try:
            workers = int(raw)
        except ValueError:
            logger.warning(f"Ignoring non-integer {WORKERS_ENV_VAR}={raw!r}")
            return 1
        return max(1, workers)
