from copy import deepcopy
from pathlib import Path

import yaml

from qtradeoff.core.optimizer import OptimizerConfig

DEFAULTS_PATH = Path(__file__).parent / "data" / "defaults.yaml"
SECTIONS = ("optimizer", "verify", "sweep")


class ConfigError(ValueError):
    """Raised for unreadable or malformed settings files."""


def _read_yaml(path) -> dict:
    with open(path, "r") as file:
        data = yaml.safe_load(file)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at the top level")
    return data


def _merge(base: dict, override: dict) -> dict:
    merged = deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path=None) -> dict:
    """
    Loads the packaged defaults and overlays a user settings file.

    Args:
        path (str, optional): YAML file with any of the sections optimizer, verify, sweep.

    Returns:
        dict: The merged settings.

    Raises:
        ConfigError: If the file cannot be read or has unknown sections.
    """
    settings = _read_yaml(DEFAULTS_PATH)
    if path is None:
        return settings
    try:
        user = _read_yaml(path)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read settings file {path}: {e}")
    unknown = sorted(set(user) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"unknown settings sections {unknown}; expected {list(SECTIONS)}")
    return _merge(settings, user)


def optimizer_config(settings: dict, **overrides) -> OptimizerConfig:
    """Builds an OptimizerConfig from the `optimizer` section; None overrides are ignored."""
    values = dict(settings.get("optimizer", {}))
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return OptimizerConfig(**values)
    except TypeError as e:
        raise ConfigError(f"bad optimizer settings: {e}")
    except ValueError as e:
        raise ConfigError(str(e))
