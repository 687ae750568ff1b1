#!/usr/bin/env python3
"""
chaos-transport - Solução por caos de Wiener do escalar passivo

Ponto de entrada do sistema. Cada subcomando executa um estudo:

    python main.py validate-basis --config configs/desk.yaml
    python main.py energy --config configs/desk.yaml --out-dir results/energy
    python main.py compare-mc --config configs/desk.yaml --seed 7 --workers 4

Códigos de saída: 0 aprovado, 1 invariante violado, 2 erro de configuração.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import click

# Adicionar src ao path para imports
sys.path.insert(0, str(Path(__file__).parent / "src"))

from src.config import get_settings, parse_config
from src.exceptions import ConfigError, InvariantBreach
from src.models import ExperimentKind
from src.solvers import ExperimentSystem

EXIT_PASS = 0
EXIT_BREACH = 1
EXIT_CONFIG = 2


def setup_logging(quiet: bool = False):
    """Configura o sistema de logging."""
    settings = get_settings()

    # Configurar formato de log
    log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # Configurar nível; --quiet só deixa passar avisos e erros
    log_level = getattr(logging, settings.log_level.value)
    if quiet:
        log_level = max(log_level, logging.WARNING)

    # Configurar logging
    logging.basicConfig(
        level=log_level,
        format=log_format,
        handlers=[
            logging.StreamHandler(sys.stdout)
        ],
        force=True,
    )

    # Adicionar handler de arquivo se especificado
    if settings.log_file_path:
        file_handler = logging.FileHandler(settings.log_file_path)
        file_handler.setFormatter(logging.Formatter(log_format))
        logging.getLogger().addHandler(file_handler)


def validate_environment() -> bool:
    """Valida as variáveis CHAOS_* do ambiente."""
    errors = get_settings().validate_settings()

    if errors:
        click.echo("❌ Configuração de ambiente inválida:", err=True)
        for error in errors:
            click.echo(f"  - {error}", err=True)
        return False

    return True


def run_kind(
    kind: ExperimentKind,
    config_path: str,
    seed: Optional[int],
    out_dir: Optional[str],
    workers: Optional[int],
    quiet: bool,
) -> int:
    """Executa um estudo e devolve o código de saída."""
    setup_logging(quiet)
    logger = logging.getLogger(__name__)

    if not validate_environment():
        return EXIT_CONFIG

    overrides: Dict[str, Any] = {}
    if seed is not None:
        overrides["master_seed"] = seed
    if out_dir is not None:
        overrides["out_dir"] = out_dir

    try:
        config = parse_config(config_path, kind=kind.value, overrides=overrides)
        system = ExperimentSystem(config, workers=workers, show_progress=False if quiet else None)
        manifest = system.run_experiment()
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        click.echo(f"❌ Erro de configuração: {e}", err=True)
        return EXIT_CONFIG
    except InvariantBreach as e:
        logger.error(f"Run aborted: {e}")
        click.echo(f"❌ Invariante violado: {e.invariant}", err=True)
        return EXIT_BREACH
    except Exception as e:
        logger.exception(f"Unexpected failure in {kind.value}: {e}")
        click.echo(f"❌ Falha inesperada: {e}", err=True)
        return EXIT_BREACH

    if not quiet:
        click.echo(f"✅ {kind.value} aprovado em {manifest.wall_clock_s:.1f}s")
        click.echo(f"📁 {len(manifest.files)} arquivos em {config.out_dir}")
    return EXIT_PASS


def experiment_options(func):
    """Flags comuns a todos os subcomandos."""
    func = click.option("--quiet", is_flag=True, help="Apenas avisos e erros; sem barras de progresso")(func)
    func = click.option("--workers", type=click.IntRange(min=1), default=None, help="Threads de trabalho")(func)
    func = click.option("--out-dir", type=click.Path(file_okay=False), default=None, help="Diretório de saída")(func)
    func = click.option("--seed", type=click.IntRange(min=0, max=2**64 - 1), default=None, help="Sobrepõe master_seed")(func)
    func = click.option(
        "--config", "config_path", type=click.Path(), required=True, help="Arquivo YAML do experimento"
    )(func)
    return func


@click.group()
@click.version_option(version=get_settings().system_version, prog_name="chaos-transport")
def cli():
    """Solver de caos de Wiener para o escalar passivo com oráculos de verificação."""


def _register(kind: ExperimentKind, summary: str):
    @cli.command(name=kind.value, help=summary)
    @experiment_options
    def command(config_path, seed, out_dir, workers, quiet):
        sys.exit(run_kind(kind, config_path, seed, out_dir, workers, quiet))

    return command


_register(ExperimentKind.VALIDATE_BASIS, "Constrói a base σ_k e verifica isotropia, divergência e identidades.")
_register(ExperimentKind.PROPAGATE, "Resolve o sistema propagador e escreve coeficientes e momentos.")
_register(ExperimentKind.ENERGY, "Balanço de energia truncado, cauda F_N e oráculo de integrais iteradas.")
_register(ExperimentKind.COMPARE_MC, "Compara o caos com Euler–Maruyama direto (momentos e trajetórias).")
_register(ExperimentKind.CONVERGENCE, "Tabelas de convergência em N, shell_radius, n_t e dt.")


if __name__ == "__main__":
    cli()
