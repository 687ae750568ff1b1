import math

import numpy as np
import pytest

from src.models import GaussianSample, PropagatorConfig
from src.solvers.monte_carlo import (
    DirectMonteCarloSolver,
    direct_mc_solve,
    paired_final_gaps,
    pathwise_errors,
    weak_form_residual,
)
from src.solvers.propagator import solve_propagator
from src.tools.spectral_field import SpectralField, inner_product


@pytest.fixture
def solver(desk_basis, small_config, two_mode_theta0):
    return DirectMonteCarloSolver(two_mode_theta0, desk_basis, small_config, dt_mc=1.0 / 64.0, chunk_size=3)


class TestIncrements:
    def test_shape(self, solver):
        sample = GaussianSample.draw(2, 4, master_seed=7, stream=0)
        assert solver.increments(sample).shape == (64, 4)

    def test_endpoint_uses_first_time_mode(self, solver):
        sample = GaussianSample.draw(2, 4, master_seed=7, stream=1)
        totals = solver.increments(sample).sum(axis=0)
        assert np.allclose(totals, sample.xi[0], atol=1e-7)

    def test_residual_has_exact_conditional_covariance(self, solver):
        # Aplicado à identidade, residual devolve o fator L com Δw = Uξ + L·z
        factor = solver.residual(np.eye(solver.n_steps))
        covariance = factor @ factor.T + solver.coarse @ solver.coarse.T
        assert np.allclose(covariance, solver.dt_mc * np.eye(solver.n_steps), atol=1e-12)

    def test_increment_variance_per_step(self, solver):
        draws = np.stack([solver.increments(GaussianSample.draw(2, 4, master_seed=9, stream=s)) for s in range(2000)])
        variance = draws.var(axis=(0, 2))
        # 8000 amostras por passo: erro padrão relativo da variância ≈ 1.6%
        assert np.allclose(variance, solver.dt_mc, rtol=0.1)

    def test_sample_too_small(self, solver):
        with pytest.raises(ValueError):
            solver.increments(GaussianSample.draw(1, 4, master_seed=0, stream=0))


class TestDirectSolver:
    def test_no_noise_is_exact_heat_flow(self, desk_basis):
        cfg = PropagatorConfig(nu=1.0, T=1.0, n_t=1, n_w=0, N=1, dt=1.0 / 64.0)
        sample = GaussianSample.draw(1, 0, master_seed=0, stream=0)
        path = direct_mc_solve(SpectralField.from_mode((1, 0)), desk_basis, cfg, sample, dt_mc=1.0 / 64.0)
        assert len(path) == 5
        assert path[-1].coeff((1, 0)).real == pytest.approx(0.5 * math.exp(-0.5), rel=1e-13)

    def test_initial_snapshot(self, solver, two_mode_theta0):
        path = solver.solve_path(GaussianSample.draw(2, 4, master_seed=3, stream=0))
        assert path[0].allclose(two_mode_theta0)
        assert path[0].support_radius == solver.radius == 4

    def test_noise_sign_follows_hermite(self, desk_basis, small_config, two_mode_theta0):
        from src.models import HermiteConvention

        probabilist = small_config.with_updates(hermite=HermiteConvention.PROBABILIST)
        assert DirectMonteCarloSolver(two_mode_theta0, desk_basis, small_config, 1.0 / 64.0).sign == -1
        assert DirectMonteCarloSolver(two_mode_theta0, desk_basis, probabilist, 1.0 / 64.0).sign == 1

    def test_seeded_paths_are_reproducible(self, solver):
        first = solver.final_energies(7, master_seed=42)
        second = solver.final_energies(7, master_seed=42)
        assert np.array_equal(first, second)
        assert not np.array_equal(first, solver.final_energies(7, master_seed=43))

    def test_worker_count_does_not_change_result(self, desk_basis, small_config, two_mode_theta0):
        energies = [
            DirectMonteCarloSolver(
                two_mode_theta0, desk_basis, small_config, 1.0 / 64.0, workers=workers, chunk_size=3
            ).final_energies(7, master_seed=42)
            for workers in (1, 2)
        ]
        assert np.array_equal(energies[0], energies[1])

    def test_chunking_does_not_change_result(self, desk_basis, small_config, two_mode_theta0, solver):
        whole = DirectMonteCarloSolver(two_mode_theta0, desk_basis, small_config, 1.0 / 64.0, chunk_size=64)
        assert np.allclose(whole.final_energies(7, 42), solver.final_energies(7, 42), rtol=1e-14)

    def test_second_moment(self, solver):
        estimate = solver.second_moment(10, master_seed=1)
        assert estimate.n_paths == 10
        assert estimate.dt_mc == 1.0 / 64.0
        assert estimate.value > 0.0
        assert estimate.std_error > 0.0
        with pytest.raises(ValueError):
            solver.second_moment(1, master_seed=1)

    @pytest.mark.parametrize("dt_mc", [0.0, 0.3])
    def test_invalid_step(self, desk_basis, small_config, two_mode_theta0, dt_mc):
        with pytest.raises(ValueError):
            DirectMonteCarloSolver(two_mode_theta0, desk_basis, small_config, dt_mc)

    def test_galerkin_grid_too_small(self, desk_basis, small_config, two_mode_theta0):
        with pytest.raises(ValueError):
            DirectMonteCarloSolver(two_mode_theta0, desk_basis, small_config, 1.0 / 64.0, galerkin_radius=1)


class TestWeakForm:
    def test_residual_is_small(self, desk_basis, small_config, two_mode_theta0):
        phi = SpectralField.from_mode((1, 0)) + SpectralField.from_mode((1, 1), amplitude=0.3)
        sample = GaussianSample.draw(2, 4, master_seed=5, stream=0)
        residuals = weak_form_residual(two_mode_theta0, desk_basis, small_config, sample, 1.0 / 256.0, phi)
        scale = math.sqrt(two_mode_theta0.norm_sq() * phi.norm_sq())
        assert residuals[0] == 0.0
        assert max(abs(r) for r in residuals) <= 1e-2 * scale
        assert abs(inner_product(two_mode_theta0, phi)) > 0.0


class TestPathwiseErrors:
    def test_shapes(self, desk_basis, small_config, two_mode_theta0):
        solution = solve_propagator(two_mode_theta0, desk_basis, small_config)
        errors = pathwise_errors(solution, 1.0 / 64.0, n_paths=3, master_seed=9)
        assert sorted(errors) == [1, 2]
        assert all(len(values) == 3 for values in errors.values())
        assert all(value >= 0.0 for values in errors.values() for value in values)

    def test_orders_checked(self, desk_basis, small_config, two_mode_theta0):
        solution = solve_propagator(two_mode_theta0, desk_basis, small_config)
        with pytest.raises(ValueError):
            pathwise_errors(solution, 1.0 / 64.0, n_paths=2, master_seed=0, orders=[3])


class TestPairedFinalGaps:
    def test_matches_pathwise_errors(self, desk_basis, small_config, two_mode_theta0):
        solution = solve_propagator(two_mode_theta0, desk_basis, small_config)
        gaps = paired_final_gaps(solution, {"top": (solution, 2)}, 1.0 / 64.0, n_paths=3, master_seed=9)
        assert gaps["top"] == pathwise_errors(solution, 1.0 / 64.0, n_paths=3, master_seed=9, orders=[2])[2]

    def test_fewer_time_modes_share_the_noise(self, desk_basis, small_config, two_mode_theta0):
        full = solve_propagator(two_mode_theta0, desk_basis, small_config)
        coarse = solve_propagator(two_mode_theta0, desk_basis, small_config.with_updates(n_t=1))
        gaps = paired_final_gaps(full, {1: (coarse, 2), 2: (full, 2)}, 1.0 / 64.0, n_paths=4, master_seed=9)
        assert gaps[2] == pathwise_errors(full, 1.0 / 64.0, n_paths=4, master_seed=9, orders=[2])[2]
        assert len(gaps[1]) == 4
        assert gaps[1] != gaps[2]

    def test_mismatched_target_rejected(self, desk_basis, small_config, two_mode_theta0):
        full = solve_propagator(two_mode_theta0, desk_basis, small_config)
        other = solve_propagator(two_mode_theta0, desk_basis, small_config.with_updates(n_w=2))
        with pytest.raises(ValueError, match="not driven"):
            paired_final_gaps(full, {"x": (other, 1)}, 1.0 / 64.0, n_paths=2, master_seed=0)
        with pytest.raises(ValueError, match="order"):
            paired_final_gaps(full, {"x": (full, 3)}, 1.0 / 64.0, n_paths=2, master_seed=0)
