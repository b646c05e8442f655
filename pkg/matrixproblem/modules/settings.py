"""
Modul för motorinställningar.

Inställningarna lagras i YAML under nyckeln ``engine`` och valideras med
EngineSettings. Kommandoradsflaggor skriver över värdena från filen.

Exempel på YAML-konfiguration (engine.yaml):
    engine:
      field: rational
      max_path_length: 12
      wild_depth: 3
      wild_max_nodes: 200
      minor_cap: 20000
      log_level: INFO
"""

import logging
from pathlib import Path
from typing import Any, Optional

import yaml

from .models import EngineSettings

_logger = logging.getLogger(__name__)

DEFAULT_CONFIG = Path(__file__).resolve().parent.parent / "config" / "engine.yaml"


def load_settings(yaml_path: Optional[str] = None) -> EngineSettings:
    """
    Läser in motorinställningarna.

    Args:
        yaml_path: Sökväg till YAML-fil; standard är config/engine.yaml

    Returns:
        Validerade inställningar; en tom fil ger standardvärden

    Raises:
        FileNotFoundError: Om YAML-filen inte finns
        yaml.YAMLError: Om YAML-filen inte kan parsas
    """
    yaml_file = Path(yaml_path) if yaml_path else DEFAULT_CONFIG

    if not yaml_file.exists():
        raise FileNotFoundError(f"Inställningsfil hittades inte: {yaml_file}")

    with open(yaml_file, 'r', encoding='utf-8') as f:
        data = yaml.safe_load(f)

    if not data or 'engine' not in data or not data['engine']:
        return EngineSettings()

    return EngineSettings(**data['engine'])


def merge_cli_overrides(settings: EngineSettings, **overrides: Any) -> EngineSettings:
    """
    Kommandoradsflaggor vinner över YAML.

    Värden som är None ignoreras, så att argparse-standardvärden inte
    skriver över filen.
    """
    updates = {k: v for k, v in overrides.items() if v is not None}
    if not updates:
        return settings
    _logger.debug("Överskrider inställningar: %s", sorted(updates))
    return EngineSettings(**{**settings.model_dump(), **updates})


def configure_logging(settings: EngineSettings) -> None:
    logging.basicConfig(level=getattr(logging, settings.log_level), format=settings.log_format,
                        force=True)
