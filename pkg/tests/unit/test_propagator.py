import math

import numpy as np
import pytest

from src.exceptions import GridOverflowError, NonFiniteFieldError
from src.models import GaussianSample, GridSpec, MultiIndex, PropagatorConfig
from src.solvers.propagator import (
    ChaosPropagator,
    apply_A,
    chaos_moments,
    generator_symbol,
    reconstruct,
    solve_propagator,
)
from src.tools.chaos_basis import xi_alpha
from src.tools.spectral_field import SpectralField


@pytest.fixture
def small_solution(desk_basis, small_config, two_mode_theta0):
    return solve_propagator(two_mode_theta0, desk_basis, small_config)


def ledger_residual(solution, n):
    ledger = solution.ledger
    nu = solution.config.nu
    return (
        ledger["l2"][-1, n]
        - ledger["l2"][0, n]
        + nu * ledger["int_grad"][-1, n]
        + ledger["int_flux"][-1, n]
        - ledger["int_transfer"][-1, n]
    )


class TestGenerator:
    def test_symbol_on_first_mode(self):
        symbol = generator_symbol(2, 1, 1.0, 1.092)
        assert symbol[2, 1] == pytest.approx(-0.5 * (1.0 + 1.092))
        assert symbol[1, 1] == 0.0

    def test_apply_A_scales_eigenfunctions(self):
        f = SpectralField.from_mode((1, 1))
        out = apply_A(f, 0.5, 1.0)
        assert out.allclose(f * (-0.5 * (0.5 * 2 + 2)))

    def test_matrix_and_scalar_agree_when_isotropic(self):
        assert np.allclose(generator_symbol(2, 2, 1.0, 0.8), generator_symbol(2, 2, 1.0, 0.8 * np.eye(2)))

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            generator_symbol(2, 1, -1.0, 1.0)
        with pytest.raises(ValueError):
            generator_symbol(2, 1, 1.0, np.diag([1.0, -1.0]))
        with pytest.raises(ValueError):
            generator_symbol(2, 1, 1.0, -0.5)


class TestHeatFlow:
    def test_no_noise_is_exact_heat_flow(self, desk_basis):
        cfg = PropagatorConfig(nu=1.0, T=1.0, n_t=2, n_w=0, N=2, dt=1.0 / 64.0)
        theta0 = SpectralField.from_mode((1, 0))
        solution = solve_propagator(theta0, desk_basis, cfg)
        assert solution.c0 == 0.0
        mean = solution.mean(1.0)
        assert mean.coeff((1, 0)).real == pytest.approx(0.5 * math.exp(-0.5), rel=1e-13)
        norms = solution.level_norms(1.0)
        assert norms[0] == pytest.approx(theta0.norm_sq() * math.exp(-1.0), rel=1e-13)
        assert norms[1:] == [0.0, 0.0]

    def test_zero_initial_condition(self, desk_basis, small_config):
        solution = solve_propagator(SpectralField.zeros(2, 2), desk_basis, small_config)
        assert all(norm == 0.0 for t in solution.times for norm in solution.level_norms(t))


class TestPropagator:
    def test_initial_values(self, small_solution, two_mode_theta0):
        assert small_solution.mean(0.0).allclose(two_mode_theta0)
        assert small_solution.level_norms(0.0)[1:] == [0.0, 0.0]
        mean, energy, grad = chaos_moments(small_solution, 0.0)
        assert energy == pytest.approx(two_mode_theta0.norm_sq(), rel=1e-14)
        assert grad == pytest.approx(two_mode_theta0.grad_norm_sq(), rel=1e-14)

    def test_radii_grow_with_level(self, small_solution):
        assert small_solution.radii == [2, 3, 4]
        assert small_solution.c0 == pytest.approx(2 ** -0.5, rel=1e-14)

    def test_linearity(self, desk_basis, small_config, two_mode_theta0, rng):
        from src.tools.initial_conditions import random_band_field

        g = random_band_field(2, 2, rng=rng)
        combined = solve_propagator(2.0 * two_mode_theta0 + g, desk_basis, small_config)
        first = solve_propagator(two_mode_theta0, desk_basis, small_config)
        second = solve_propagator(g, desk_basis, small_config)
        for n in range(small_config.N + 1):
            expected = 2.0 * first.level_array(n, 1.0) + second.level_array(n, 1.0)
            assert np.allclose(combined.level_array(n, 1.0), expected, rtol=1e-11, atol=1e-13)

    def test_zero_mode_is_conserved(self, desk_basis, small_config):
        theta0 = SpectralField.constant(2, 0.7, 1) + SpectralField.from_mode((1, 0))
        solution = solve_propagator(theta0, desk_basis, small_config)
        assert solution.mean(1.0).coeff((0, 0)).real == pytest.approx(0.7, rel=1e-14)
        for n in range(1, small_config.N + 1):
            centre = (slice(None),) + (solution.radii[n],) * 2
            assert np.max(np.abs(solution.level_array(n, 1.0)[centre])) <= 1e-15

    def test_energy_ledger_per_level(self, small_solution, two_mode_theta0):
        scale = two_mode_theta0.norm_sq()
        for n in range(small_solution.N + 1):
            assert abs(ledger_residual(small_solution, n)) <= 1e-5 * scale

    def test_inviscid_energy_does_not_grow(self, desk_basis, small_config, two_mode_theta0):
        solution = solve_propagator(two_mode_theta0, desk_basis, small_config.with_updates(nu=0.0))
        for t in solution.times:
            assert sum(solution.level_norms(t)) <= two_mode_theta0.norm_sq() * (1 + 1e-9)

    def test_worker_count_does_not_change_result(self, desk_basis, small_config, two_mode_theta0):
        serial = ChaosPropagator(desk_basis, small_config, workers=1).solve(two_mode_theta0)
        threaded = ChaosPropagator(desk_basis, small_config, workers=2).solve(two_mode_theta0)
        for n in range(small_config.N + 1):
            assert np.array_equal(serial.level_array(n, 1.0), threaded.level_array(n, 1.0))

    def test_reality_is_preserved(self, small_solution):
        for alpha in small_solution.index_set.all():
            assert small_solution.coefficient(alpha, 1.0).is_real()


class TestReconstruction:
    def test_matches_explicit_sum(self, small_solution):
        sample = GaussianSample.draw(2, 4, master_seed=11, stream=3)
        total = SpectralField.zeros(2, 4)
        for alpha in small_solution.index_set.all():
            total = total + small_solution.coefficient(alpha, 0.5) * xi_alpha(alpha, sample)
        assert reconstruct(small_solution, sample, 0.5).allclose(total, rtol=1e-12, atol=1e-14)

    def test_level_zero_is_the_mean(self, small_solution):
        sample = GaussianSample.draw(3, 6, master_seed=1, stream=0)
        assert reconstruct(small_solution, sample, 1.0, max_level=0).allclose(small_solution.mean(1.0))

    def test_sample_average_is_the_mean(self, small_solution):
        samples = [GaussianSample.draw(2, 4, master_seed=99, stream=s) for s in range(2000)]
        fields = [reconstruct(small_solution, sample, 1.0) for sample in samples]
        mean = small_solution.mean(1.0)
        for mode in [(1, 0), (1, 2)]:
            values = np.array([field.coeff(mode).real for field in fields])
            std_error = values.std(ddof=1) / math.sqrt(len(values))
            assert abs(values.mean() - mean.coeff(mode).real) <= 3.0 * std_error + 1e-12

    def test_invalid_requests(self, small_solution):
        with pytest.raises(ValueError):
            reconstruct(small_solution, GaussianSample.draw(1, 4, master_seed=0, stream=0), 1.0)
        with pytest.raises(ValueError):
            reconstruct(small_solution, GaussianSample.draw(2, 4, master_seed=0, stream=0), 1.0, max_level=3)
        with pytest.raises(ValueError):
            small_solution.mean(0.3)


class TestLevelCoupling:
    def test_levels_below_N_ignore_the_top_level(self, desk_basis, small_config, two_mode_theta0, mocker):
        reference = solve_propagator(two_mode_theta0, desk_basis, small_config)
        original = ChaosPropagator._forcing

        def perturbed(self, pool, t, state, radii):
            state[-1] += 1e-3
            return original(self, pool, t, state, radii)

        mocker.patch.object(ChaosPropagator, "_forcing", autospec=True, side_effect=perturbed)
        changed = solve_propagator(two_mode_theta0, desk_basis, small_config)

        top = small_config.N
        for t in reference.times:
            for n in range(top):
                assert np.array_equal(changed.level_array(n, t), reference.level_array(n, t))
        assert not np.array_equal(changed.level_array(top, 1.0), reference.level_array(top, 1.0))


class TestCoefficientRows:
    def test_rows_follow_graded_order(self, small_solution):
        rows = small_solution.coefficient_rows(max_level=1)
        ranks = [row[0] for row in rows]
        assert ranks == sorted(ranks)
        assert max(ranks) < 1 + 2 * 4
        assert all(len(row) == 6 for row in rows)

    def test_mean_rows_at_start(self, small_solution):
        rows = [row for row in small_solution.coefficient_rows(max_level=0) if row[1] == 0.0]
        assert sorted((row[2], row[3]) for row in rows) == [(-1, -2), (-1, 0), (1, 0), (1, 2)]


class TestFailureModes:
    def test_dimension_mismatch(self, basis_3d, small_config):
        with pytest.raises(ValueError):
            solve_propagator(SpectralField.from_mode((1, 0)), basis_3d, small_config)

    def test_too_many_noise_modes(self, desk_basis):
        cfg = PropagatorConfig(n_w=10, N=1, n_t=1, dt=0.25)
        with pytest.raises(ValueError, match="n_w"):
            ChaosPropagator(desk_basis, cfg)

    def test_grid_overflow(self, desk_basis, small_config, two_mode_theta0):
        grid = GridSpec(dim=2, base_radius=2, growth_cap=3)
        with pytest.raises(GridOverflowError):
            solve_propagator(two_mode_theta0, desk_basis, small_config, grid=grid)

    def test_non_finite_forcing(self, desk_basis, small_config, two_mode_theta0, mocker):
        mocker.patch.object(
            ChaosPropagator,
            "_forcing",
            side_effect=lambda pool, t, state, radii: [np.full_like(level, np.nan) for level in state],
        )
        with pytest.raises(NonFiniteFieldError):
            solve_propagator(two_mode_theta0, desk_basis, small_config)

    def test_zero_index_lookup(self, small_solution):
        assert small_solution.coefficient(MultiIndex.zero(), 0.0).support_radius == 2
