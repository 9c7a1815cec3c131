"""Training configuration loader.

A training config is a flat UTF-8 key=value file:

    # comment
    preset = desk_shapes
    groups = 4
    layer_sizes = 256, 128

Keys are the TrainConfig field names plus ``preset``, which names an entry of
config/presets.yml to start from. Lists are comma-separated.
"""

from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError

from .errors import ConfigLoadError
from .models import TrainConfig

DEFAULT_PRESETS_PATH = Path(__file__).resolve().parents[2] / "config" / "presets.yml"
LIST_KEYS = {"layer_sizes"}


def load_presets(presets_path: str | Path = DEFAULT_PRESETS_PATH) -> dict[str, dict[str, Any]]:
    """
    Load named presets from YAML.

    Args:
        presets_path: YAML file with a top-level ``presets`` mapping.

    Returns:
        Preset name → field values.

    Raises:
        ConfigLoadError: If the file is missing, not valid YAML, or malformed.
    """
    presets_path = Path(presets_path)
    if not presets_path.exists():
        raise ConfigLoadError(f"Presets file not found: {presets_path}")

    try:
        with open(presets_path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigLoadError(f"Invalid YAML syntax: {e}") from e
    except OSError as e:
        raise ConfigLoadError(f"Failed to read presets file: {e}") from e

    if not isinstance(data, dict) or not isinstance(data.get("presets"), dict):
        raise ConfigLoadError("Presets file must contain a 'presets' mapping")

    presets = data["presets"]
    for name, values in presets.items():
        if not isinstance(values, dict):
            raise ConfigLoadError(f"Preset '{name}' must be a mapping")
    return presets


def build_train_config(
    preset: str | None = None,
    overrides: dict[str, Any] | None = None,
    presets_path: str | Path = DEFAULT_PRESETS_PATH,
) -> TrainConfig:
    """
    Validate a config from an optional preset plus overriding values.

    Raises:
        ConfigLoadError: Unknown preset or key, or values that fail validation.
    """
    values: dict[str, Any] = {}
    if preset is not None:
        presets = load_presets(presets_path)
        if preset not in presets:
            raise ConfigLoadError(f"Unknown preset '{preset}'; available: {', '.join(sorted(presets))}")
        values.update(presets[preset])
    values.update(overrides or {})

    unknown = sorted(set(values) - set(TrainConfig.model_fields))
    if unknown:
        raise ConfigLoadError(f"Unknown config keys: {', '.join(unknown)}")

    try:
        return TrainConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigLoadError(f"Invalid training configuration: {e}") from e


def parse_key_values(text: str, source: str = "<config>") -> dict[str, Any]:
    """
    Parse key=value lines; ``#`` starts a comment.

    Raises:
        ConfigLoadError: Malformed line, empty key or duplicate key.
    """
    values: dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigLoadError(f"{source}:{number}: expected key = value")
        if key in values:
            raise ConfigLoadError(f"{source}:{number}: duplicate key '{key}'")
        if key in LIST_KEYS:
            values[key] = [item.strip() for item in value.split(",") if item.strip()]
        else:
            values[key] = value
    return values


def load_train_config(
    config_path: str | Path,
    presets_path: str | Path = DEFAULT_PRESETS_PATH,
    preset: str | None = None,
) -> TrainConfig:
    """
    Load a training config from a key=value file.

    Args:
        config_path: Config file.
        presets_path: YAML presets consulted for the ``preset`` key.
        preset: Preset to start from when the file names none.

    Returns:
        Validated TrainConfig.

    Raises:
        ConfigLoadError: If the file is missing, unreadable or invalid.
    """
    config_path = Path(config_path)
    if not config_path.exists():
        raise ConfigLoadError(f"Config file not found: {config_path}")
    try:
        text = config_path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigLoadError(f"Failed to read config file: {e}") from e

    values = parse_key_values(text, source=str(config_path))
    chosen = values.pop("preset", None) or preset
    return build_train_config(chosen, values, presets_path)


def config_to_text(config: TrainConfig) -> str:
    """Render a config back into key=value form."""
    lines = []
    for key, value in config.model_dump(mode="json").items():
        if value is None:
            continue
        if isinstance(value, list):
            value = ", ".join(str(v) for v in value)
        elif isinstance(value, bool):
            value = str(value).lower()
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
