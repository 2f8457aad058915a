"""
Configuration loader for the harness.
Loads config.yaml and environment variables.
"""
import os
import yaml
from pathlib import Path
from typing import Dict, Any, Optional
from dotenv import load_dotenv

REPO_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG_PATH = REPO_ROOT / "config" / "config.yaml"


class Config:
    """Harness settings: logging, batch defaults, paths, solver tolerance."""

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize configuration.

        Args:
            config_path: Path to the configuration YAML file. Falls back to
                GUT_CONFIG, then to config/config.yaml in the repository.
        """
        # Load environment variables
        load_dotenv()

        config_path = config_path or os.getenv('GUT_CONFIG') or str(DEFAULT_CONFIG_PATH)
        self.config_path = Path(config_path)
        if not self.config_path.exists():
            raise FileNotFoundError(f"Config file not found: {config_path}")

        with open(self.config_path, 'r') as f:
            self._config: Dict[str, Any] = yaml.safe_load(f) or {}

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a configuration value using dot notation.

        Args:
            key: Configuration key (e.g., 'batch.trials')
            default: Default value if key not found

        Returns:
            Configuration value
        """
        keys = key.split('.')
        value = self._config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    @property
    def project_name(self) -> str:
        """Get project name."""
        return self.get('project_name', 'GUT Explorers and Monsters')

    @property
    def log_level(self) -> str:
        """Get log level; GUT_LOG_LEVEL wins over the file."""
        return os.getenv('GUT_LOG_LEVEL') or self.get('logging.level', 'INFO')

    @property
    def scenario_dir(self) -> Path:
        """Get directory holding shipped scenario documents."""
        return self._resolve(self.get('paths.scenario_dir', './scenarios'))

    @property
    def output_dir(self) -> Path:
        """Get output directory for CSV results."""
        return self._resolve(self.get('paths.output_dir', './results'))

    @property
    def default_trials(self) -> int:
        """Get trials per batch."""
        return int(self.get('batch.trials', 10))

    @property
    def master_seed(self) -> int:
        """Get master seed for per-trial seed derivation."""
        return int(self.get('batch.master_seed', 0))

    @property
    def workers(self) -> int:
        """Get number of worker processes for batches."""
        return int(self.get('batch.workers', 1))

    @property
    def solver_tol(self) -> float:
        """Get exploitability tolerance for mixed equilibria."""
        return float(self.get('solver.tol', 1e-6))

    def _resolve(self, value: str) -> Path:
        path = Path(value)
        return path if path.is_absolute() else REPO_ROOT / path

    def validate(self):
        """Validate configuration and raise errors if invalid."""
        if self.default_trials < 1:
            raise ValueError(f"batch.trials must be >= 1, got {self.default_trials}")
        if self.workers < 1:
            raise ValueError(f"batch.workers must be >= 1, got {self.workers}")
        if self.solver_tol <= 0:
            raise ValueError(f"solver.tol must be > 0, got {self.solver_tol}")


# Global configuration instance
_config_instance = None


def reset_config():
    """Reset the global configuration instance."""
    global _config_instance
    _config_instance = None


def get_config(config_path: Optional[str] = None) -> Config:
    """
    Get or create global configuration instance.

    Args:
        config_path: Path to configuration file

    Returns:
        Config instance
    """
    global _config_instance
    if _config_instance is None:
        _config_instance = Config(config_path)
    return _config_instance
