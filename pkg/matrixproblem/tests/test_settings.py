"""
Test settings functionality.

Testsuite för settings-modulen som läser motorinställningar från YAML
och låter kommandoradsflaggor skriva över dem.
"""

import logging

import pytest
import yaml
from pydantic import ValidationError

from matrixproblem.modules.models import EngineSettings
from matrixproblem.modules.settings import (
    DEFAULT_CONFIG,
    configure_logging,
    load_settings,
    merge_cli_overrides,
)


@pytest.fixture
def temp_settings_file(tmp_path):
    """Skapar en temporär inställningsfil för tester."""
    settings_file = tmp_path / "engine.yaml"
    test_data = {
        'engine': {
            'field': 'gf:7',
            'max_path_length': 6,
            'wild_depth': 1,
            'wild_max_nodes': 50,
            'minor_cap': 1000,
            'log_level': 'DEBUG',
        }
    }

    with open(settings_file, 'w', encoding='utf-8') as f:
        yaml.dump(test_data, f, allow_unicode=True)

    return settings_file


class TestLoadSettings:
    """Tester för load_settings-funktionen."""

    def test_load_settings(self, temp_settings_file):
        """Test att ladda inställningar från YAML-fil."""
        settings = load_settings(str(temp_settings_file))
        assert settings.field == "gf:7"
        assert settings.max_path_length == 6
        assert settings.wild_depth == 1
        assert settings.log_level == "DEBUG"

    def test_default_config(self):
        """Test att den medföljande engine.yaml läses som standard."""
        assert DEFAULT_CONFIG.exists()
        settings = load_settings()
        assert settings.field == "rational"
        assert settings.wild_depth == 3

    def test_load_settings_file_not_found(self, tmp_path):
        """Test att FileNotFoundError kastas när filen saknas."""
        with pytest.raises(FileNotFoundError, match="Inställningsfil hittades inte"):
            load_settings(str(tmp_path / "saknas.yaml"))

    def test_empty_file(self, tmp_path):
        """Edge case: En tom fil ger standardvärden."""
        empty = tmp_path / "empty.yaml"
        empty.write_text("", encoding='utf-8')
        assert load_settings(str(empty)) == EngineSettings()

    def test_invalid_value(self, tmp_path):
        """Test att ogiltiga värden avvisas av valideringen."""
        bad = tmp_path / "bad.yaml"
        with open(bad, 'w', encoding='utf-8') as f:
            yaml.dump({'engine': {'wild_depth': -2}}, f)
        with pytest.raises(ValidationError):
            load_settings(str(bad))

    def test_broken_yaml(self, tmp_path):
        """Test att trasig YAML ger yaml.YAMLError."""
        broken = tmp_path / "broken.yaml"
        broken.write_text("engine: [unclosed", encoding='utf-8')
        with pytest.raises(yaml.YAMLError):
            load_settings(str(broken))


class TestMergeCliOverrides:
    """Tester för merge_cli_overrides-funktionen."""

    def test_override(self, temp_settings_file):
        """Test att kommandoradens kropp vinner över filens."""
        settings = merge_cli_overrides(load_settings(str(temp_settings_file)), field="rational")
        assert settings.field == "rational"
        assert settings.wild_depth == 1

    def test_none_ignored(self, temp_settings_file):
        """Test att None-värden inte skriver över filen."""
        base = load_settings(str(temp_settings_file))
        assert merge_cli_overrides(base, field=None, wild_depth=None) == base


def test_plan_matches_test_files():
    """Test att varje post i test_plan.yaml har en testfil och en modul."""
    root = DEFAULT_CONFIG.parent.parent
    with open(DEFAULT_CONFIG.parent / "test_plan.yaml", 'r', encoding='utf-8') as f:
        plan = yaml.safe_load(f)['test_plan']['tests']
    for entry in plan:
        assert (root / "tests" / f"{entry['name']}.py").exists()
        assert (root / "modules" / f"{entry['module']}.py").exists()


def test_configure_logging():
    """Test att loggnivån sätts från inställningarna."""
    configure_logging(EngineSettings(log_level="WARNING"))
    assert logging.getLogger().level == logging.WARNING
    configure_logging(EngineSettings())
