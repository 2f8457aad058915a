"""
Tests for configuration loader.
"""
import pytest
import os
import tempfile
import yaml
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from core.config import Config, DEFAULT_CONFIG_PATH, get_config, reset_config

CONFIG_PATH = str(DEFAULT_CONFIG_PATH)


def test_load_config(monkeypatch):
    """Test loading the shipped configuration."""
    monkeypatch.delenv("GUT_LOG_LEVEL", raising=False)
    config = Config(CONFIG_PATH)

    assert config.project_name == "GUT Explorers and Monsters"
    assert config.log_level == "INFO"
    assert config.default_trials == 10
    assert config.master_seed == 20201
    assert config.workers == 1
    assert config.solver_tol == pytest.approx(1e-6)
    config.validate()


def test_config_properties():
    """Test path properties resolve against the repository."""
    config = Config(CONFIG_PATH)

    assert isinstance(config.scenario_dir, Path)
    assert isinstance(config.output_dir, Path)
    assert config.scenario_dir.is_absolute()
    assert (config.scenario_dir / "25v25.json").exists()


def test_config_get_nested():
    """Test nested configuration access."""
    config = Config(CONFIG_PATH)

    assert config.get("batch.trials") == 10
    assert config.get("logging.level") == "INFO"
    assert config.get("nonexistent.key", "default") == "default"


def test_env_overrides(monkeypatch):
    """GUT_LOG_LEVEL and GUT_CONFIG take precedence."""
    with tempfile.NamedTemporaryFile(mode='w', suffix='.yaml', delete=False) as f:
        yaml.dump({'batch': {'trials': 3}}, f)
        temp_config_path = f.name

    try:
        monkeypatch.setenv("GUT_LOG_LEVEL", "DEBUG")
        monkeypatch.setenv("GUT_CONFIG", temp_config_path)
        config = Config()
        assert config.log_level == "DEBUG"
        assert config.default_trials == 3
    finally:
        os.unlink(temp_config_path)


def test_custom_config():
    """Test loading a custom configuration."""
    with tempfile.NamedTemporaryFile(mode='w', suffix='.yaml', delete=False) as f:
        config_data = {
            'project_name': 'Test Project',
            'paths': {'scenario_dir': '/tmp/scenarios', 'output_dir': './out'},
            'batch': {'trials': 4, 'master_seed': 99, 'workers': 2},
            'solver': {'tol': 1.0e-8},
        }
        yaml.dump(config_data, f)
        temp_config_path = f.name

    try:
        config = Config(temp_config_path)

        assert config.project_name == "Test Project"
        assert config.scenario_dir == Path("/tmp/scenarios")
        assert config.output_dir.name == "out"
        assert config.default_trials == 4
        assert config.master_seed == 99
        assert config.workers == 2
        assert config.solver_tol == pytest.approx(1e-8)

    finally:
        os.unlink(temp_config_path)


def test_validate_rejects_bad_values():
    """Test validation of batch settings."""
    with tempfile.NamedTemporaryFile(mode='w', suffix='.yaml', delete=False) as f:
        yaml.dump({'batch': {'trials': 0}}, f)
        temp_config_path = f.name

    try:
        with pytest.raises(ValueError, match="batch.trials"):
            Config(temp_config_path).validate()
    finally:
        os.unlink(temp_config_path)


def test_missing_config_file():
    """Test a missing file is reported."""
    with pytest.raises(FileNotFoundError):
        Config("/nonexistent/config.yaml")


def test_get_config_singleton():
    """Test the global instance is reused until reset."""
    reset_config()
    try:
        first = get_config(CONFIG_PATH)
        assert get_config() is first
        reset_config()
        assert get_config(CONFIG_PATH) is not first
    finally:
        reset_config()


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
