from typing import Any, Dict, List, Tuple


# Chaves de nível superior
TOP_LEVEL_KEYS: Dict[str, Tuple[Any, str]] = {
    "kind": (None, "Estudo: validate-basis | propagate | energy | compare-mc | convergence"),
    "dim": (2, "Dimensão d ≥ 2 do toro"),
    "shell_radius": (2, "Corte |z|∞ ≤ R da base de velocidade"),
    "master_seed": (0, "Semente mestre; a amostra p usa o contador (master_seed, p)"),
    "n_paths": (2000, "Trajetórias do estimador de Monte Carlo (≥ 2)"),
    "out_dir": ("results", "Diretório dos CSVs e do manifest.json"),
    "dump_max_level": (2, "Maior nível |α| escrito em coefficients.csv"),
}

# Espectro de covariância
COVARIANCE_KEYS: Dict[str, Tuple[Any, str]] = {
    "covariance.A0": (1.0, "Amplitude A₀ > 0"),
    "covariance.a": (0.0, "Peso gradiente a ≥ 0 (só a = 0 tem base construída)"),
    "covariance.b": (1.0, "Peso solenoidal b ≥ 0"),
    "covariance.alpha_spec": (1.0, "Expoente espectral, 0 < α < 2"),
}

# Grade espectral
GRID_KEYS: Dict[str, Tuple[Any, str]] = {
    "grid.base_radius": (4, "Raio K₀ do suporte de θ₀"),
    "grid.growth_cap": (None, "Raio máximo; padrão base_radius + N·shell_radius"),
}

# Truncamento e integração
PROPAGATOR_KEYS: Dict[str, Tuple[Any, str]] = {
    "propagator.nu": (1.0, "Viscosidade ν ≥ 0"),
    "propagator.T": (1.0, "Horizonte T > 0"),
    "propagator.n_t": (3, "Modos temporais retidos (≥ 1)"),
    "propagator.n_w": (None, "Modos de ruído ativos, par; padrão todos os modos da base"),
    "propagator.N": (3, "Ordem máxima do caos"),
    "propagator.dt": (1.0 / 512.0, "Passo do integrador; T deve ser múltiplo inteiro"),
    "propagator.output_times": (None, "Instantes de saída; padrão 0, T/4, T/2, 3T/4, T"),
    "propagator.hermite": ("signed", "Convenção de Hermite: signed | probabilist"),
}

# Condição inicial
INITIAL_CONDITION_KEYS: Dict[str, Tuple[Any, str]] = {
    "initial_condition.preset": ("two-mode", "single-mode | two-mode | random-band"),
    "initial_condition.wavevector": (None, "z do single-mode (padrão e₁)"),
    "initial_condition.amplitude": (1.0, "Amplitude do single-mode"),
    "initial_condition.parity": ("cos", "Portadora do single-mode: cos | sin"),
    "initial_condition.radius": (2, "Raio do random-band"),
    "initial_condition.decay": (2.0, "Decaimento espectral do random-band"),
    "initial_condition.seed": (0, "Semente do random-band"),
}

# Monte Carlo
MONTE_CARLO_KEYS: Dict[str, Tuple[Any, str]] = {
    "monte_carlo.dt_mc": (1.0 / 1024.0, "Passo do estimador de E‖θ(T)‖²"),
    "monte_carlo.pathwise_dt_mc": (1.0 / 4096.0, "Passo da comparação trajetória a trajetória"),
    "monte_carlo.pathwise_paths": (50, "Trajetórias da comparação pathwise"),
    "monte_carlo.pathwise_orders": ([1, 2, 3], "Ordens N comparadas pathwise"),
    "monte_carlo.galerkin_radius": (None, "Raio da grade de Galerkin; padrão growth_cap"),
}

# Oráculo de integrais iteradas
ORACLE_KEYS: Dict[str, Tuple[Any, str]] = {
    "oracle.levels": ([1, 2], "Níveis comparados com a quadratura iterada"),
    "oracle.quad_order": (None, "Ordem Gauss–Legendre; padrão 24/12/8 para N = 1/2/3"),
}

# Estudos de convergência
CONVERGENCE_KEYS: Dict[str, Tuple[Any, str]] = {
    "convergence.N_values": ([1, 2, 3], "Ordens N da tabela de truncamento"),
    "convergence.shell_radii": ([1, 2, 3, 4], "Raios R da tabela de c₀"),
    "convergence.n_t_values": ([1, 2, 4, 8], "n_t da tabela da base temporal"),
    "convergence.dt_values": ([1 / 32, 1 / 64, 1 / 128, 1 / 256], "Passos do estudo de ordem"),
    "convergence.reference_dt": (1.0 / 1024.0, "Passo da solução de referência"),
}

CONFIG_SCHEMA: Dict[str, Tuple[Any, str]] = {
    **TOP_LEVEL_KEYS,
    **COVARIANCE_KEYS,
    **GRID_KEYS,
    **PROPAGATOR_KEYS,
    **INITIAL_CONDITION_KEYS,
    **MONTE_CARLO_KEYS,
    **ORACLE_KEYS,
    **CONVERGENCE_KEYS,
}


def get_known_keys() -> List[str]:
    """Retorna as chaves pontuadas aceitas pelo arquivo de experimento."""
    return list(CONFIG_SCHEMA.keys())


def get_key_description(key: str) -> str:
    if key not in CONFIG_SCHEMA:
        raise ValueError(f"Unknown configuration key: {key}")
    return CONFIG_SCHEMA[key][1]


def validate_config_keys(keys: List[str]) -> List[str]:
    """
    Valida as chaves de um arquivo de experimento.

    Args:
        keys: Chaves pontuadas lidas do arquivo

    Returns:
        Lista de chaves desconhecidas (vazia quando todas são válidas)
    """
    return [key for key in keys if key not in CONFIG_SCHEMA]


def render_markdown() -> str:
    """Tabela Markdown do esquema, usada em docs/config_schema.md."""
    lines = ["| chave | padrão | descrição |", "|---|---|---|"]
    for key, (default, description) in CONFIG_SCHEMA.items():
        shown = "—" if default is None else f"`{default}`"
        text = description.replace("|", r"\|")
        lines.append(f"| `{key}` | {shown} | {text} |")
    return "\n".join(lines)
