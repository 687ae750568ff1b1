import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from src.config import reload_settings
from src.models import CovarianceSpec, GridSpec, PropagatorConfig
from src.tools.initial_conditions import random_band_field, two_mode_wavevectors
from src.tools.spectral_field import SpectralField
from src.tools.velocity_basis import build_divergence_free_basis

settings.register_profile(
    "chaos",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("chaos")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: estudos de aceitação no preset de mesa (minutos)")


@pytest.fixture(autouse=True)
def quiet_settings(monkeypatch):
    """Settings determinísticos: sem barras de progresso, um worker."""
    monkeypatch.setenv("CHAOS_SHOW_PROGRESS", "false")
    monkeypatch.setenv("CHAOS_MAX_WORKERS", "1")
    monkeypatch.delenv("CHAOS_LOG_FILE_PATH", raising=False)
    reload_settings()
    yield
    reload_settings()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def desk_spec():
    return CovarianceSpec(A0=1.0, a=0.0, b=1.0, alpha_spec=1.0, dim=2)


@pytest.fixture
def desk_basis(desk_spec):
    """d=2, R=1: 8 modos."""
    return build_divergence_free_basis(desk_spec, 1)


@pytest.fixture
def basis_3d():
    return build_divergence_free_basis(CovarianceSpec(dim=3), 1)


@pytest.fixture
def two_mode_theta0():
    first, second = two_mode_wavevectors(2)
    return (SpectralField.from_mode(first) + 0.5 * SpectralField.from_mode(second)).with_radius(2)


@pytest.fixture
def band_field(rng):
    return random_band_field(2, 3, rng=rng)


@pytest.fixture
def small_config():
    """Configuração barata: n_t=2, n_w=4, N=2, dt=1/64."""
    return PropagatorConfig(nu=1.0, T=1.0, n_t=2, n_w=4, N=2, dt=1.0 / 64.0)


@pytest.fixture
def small_grid():
    return GridSpec.for_chaos(dim=2, base_radius=2, shell_radius=1, order=2)
