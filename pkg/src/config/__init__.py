from .settings import ChaosSettings, get_settings, reload_settings, Environment, LogLevel
from .schema import CONFIG_SCHEMA, get_known_keys, get_key_description, validate_config_keys, render_markdown
from .loader import parse_config, build_config, flatten_keys, nest_keys

__all__ = [
    "ChaosSettings",
    "get_settings",
    "reload_settings",
    "Environment",
    "LogLevel",
    "CONFIG_SCHEMA",
    "get_known_keys",
    "get_key_description",
    "validate_config_keys",
    "render_markdown",
    "parse_config",
    "build_config",
    "flatten_keys",
    "nest_keys",
]
