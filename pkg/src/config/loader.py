"""
Leitura dos arquivos de experimento.

O arquivo é um documento YAML cujo nível superior mapeia chaves pontuadas
(`covariance.alpha_spec: 1.0`) para valores. Frações como `1/512` são aceitas
em campos numéricos.
"""

import logging
import re
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import ValidationError

from ..exceptions import ConfigError
from ..models.experiment_model import ExperimentConfig, ExperimentKind, half_lattice_mode_count
from .schema import validate_config_keys

logger = logging.getLogger(__name__)

_FRACTION = re.compile(r"^\s*-?\d+(\.\d*)?\s*/\s*\d+(\.\d*)?\s*$")


def _coerce(value: Any) -> Any:
    if isinstance(value, str) and _FRACTION.match(value):
        numerator, denominator = value.split("/")
        return float(Fraction(numerator.strip()) / Fraction(denominator.strip()))
    if isinstance(value, list):
        return [_coerce(v) for v in value]
    return value


def flatten_keys(data: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Achata seções aninhadas em chaves pontuadas."""
    flat: Dict[str, Any] = {}
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten_keys(value, f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def nest_keys(flat: Dict[str, Any]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {}
    for dotted, value in flat.items():
        node = nested
        *sections, leaf = dotted.split(".")
        for section in sections:
            node = node.setdefault(section, {})
        node[leaf] = _coerce(value)
    return nested


def _apply_defaults(nested: Dict[str, Any]) -> Dict[str, Any]:
    """Injeta dim nas seções e resolve growth_cap e n_w derivados."""
    dim = int(nested.get("dim", 2))
    shell_radius = int(nested.get("shell_radius", 2))
    covariance = dict(nested.get("covariance", {}))
    grid = dict(nested.get("grid", {}))
    propagator = dict(nested.get("propagator", {}))

    covariance.setdefault("dim", dim)
    grid.setdefault("dim", dim)
    grid.setdefault("base_radius", 4)
    order = int(propagator.get("N", 3))
    grid.setdefault("growth_cap", int(grid["base_radius"]) + order * shell_radius)
    propagator.setdefault("n_w", half_lattice_mode_count(dim, shell_radius))

    return {**nested, "covariance": covariance, "grid": grid, "propagator": propagator}


def _error_key(error: Dict[str, Any]) -> Optional[str]:
    location = [str(part) for part in error.get("loc", ()) if not isinstance(part, int)]
    return ".".join(location) or None


def build_config(flat: Dict[str, Any], kind: Optional[str] = None) -> ExperimentConfig:
    """Valida um mapeamento de chaves pontuadas e devolve o ExperimentConfig."""
    unknown = validate_config_keys(list(flat.keys()))
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(sorted(unknown))}", unknown[0])

    data = dict(flat)
    if kind is not None:
        declared = data.get("kind")
        if declared is not None and declared != kind:
            logger.warning(f"Config declares kind={declared}; running {kind} as requested")
        data["kind"] = kind
    if data.get("kind") is None:
        raise ConfigError("missing experiment kind", "kind")
    try:
        ExperimentKind(data["kind"])
    except ValueError:
        raise ConfigError(
            f"'{data['kind']}' is not one of {[k.value for k in ExperimentKind]}", "kind"
        )

    try:
        nested = _apply_defaults(nest_keys(data))
        config = ExperimentConfig(**nested)
    except ValidationError as e:
        first = e.errors()[0]
        message = str(first.get("msg", "")).removeprefix("Value error, ")
        raise ConfigError(message, _error_key(first)) from e
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e

    logger.debug(f"Parsed {config.kind.value} config: {config.n_modes} velocity modes")
    return config


def parse_config(
    path: str, kind: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None
) -> ExperimentConfig:
    """
    Lê e valida um arquivo de experimento.

    Args:
        path: Caminho do YAML de chaves pontuadas
        kind: Subcomando da CLI; prevalece sobre a chave `kind` do arquivo
        overrides: Chaves pontuadas aplicadas por cima do arquivo (ex.: --seed)

    Returns:
        ExperimentConfig validado, com os padrões aplicados
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(file_path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} must hold a mapping of dotted keys")

    flat = flatten_keys(raw)
    flat.update(overrides or {})
    return build_config(flat, kind)
