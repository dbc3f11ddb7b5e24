"""Test configuration loading."""

import pytest
from pathlib import Path
import sys

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.utils.settings import DEFAULT_SETTINGS, WORKERS_ENV_VAR, SettingsLoader

CONFIG_PATH = Path(__file__).parent.parent / "config.yaml"


def test_config_file_exists():
    """Test that config.yaml exists."""
    assert CONFIG_PATH.exists(), "config.yaml not found"


def test_config_matches_built_in_defaults():
    """The shipped config.yaml restates the built-in defaults."""
    loader = SettingsLoader(CONFIG_PATH)
    assert loader.settings == DEFAULT_SETTINGS


def test_all_sections_load():
    """Test that every expected section loads."""
    loader = SettingsLoader(CONFIG_PATH)

    for section in ['model', 'analysis', 'estimator', 'verification', 'plot']:
        values = loader.get_section(section)
        assert isinstance(values, dict), f"{section} is not a mapping"
        assert len(values) > 0, f"{section} is empty"


def test_missing_file_uses_defaults(tmp_path):
    """A missing config file falls back to the built-in values."""
    loader = SettingsLoader(tmp_path / "absent.yaml")
    assert loader.get('model', 'gamma') == 3.5
    assert loader.get('verification', 'suite') == 'schur-oracle'


def test_partial_file_merges_over_defaults(tmp_path):
    """Keys missing from a section keep their defaults."""
    config = tmp_path / "config.yaml"
    config.write_text("model:\n  gamma: 2.0\nplot: not-a-mapping\n", encoding='utf-8')
    loader = SettingsLoader(config)

    assert loader.get('model', 'gamma') == 2.0
    assert loader.get('model', 'sigma_db') == 5.0
    assert loader.get_section('plot') == DEFAULT_SETTINGS['plot']
    assert loader.get('model', 'missing', 'fallback') == 'fallback'


def test_sections_are_copies(tmp_path):
    """Mutating a returned section leaves the loader and the defaults intact."""
    loader = SettingsLoader(tmp_path / "absent.yaml")
    section = loader.get_section('model')
    section['gamma'] = 9.0
    assert loader.get('model', 'gamma') == 3.5
    assert DEFAULT_SETTINGS['model']['gamma'] == 3.5


@pytest.mark.parametrize("raw, expected", [(None, 1), ("4", 4), ("0", 1), ("-3", 1), ("many", 1)])
def test_worker_count(monkeypatch, raw, expected):
    """Worker count comes from the environment and is at least 1."""
    if raw is None:
        monkeypatch.delenv(WORKERS_ENV_VAR, raising=False)
    else:
        monkeypatch.setenv(WORKERS_ENV_VAR, raw)
    assert SettingsLoader.worker_count() == expected


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
