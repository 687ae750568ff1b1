import math

import numpy as np
import pytest

from src.exceptions import GridOverflowError, UnsupportedRegimeError
from src.models import CovarianceSpec, GridSpec, Parity
from src.tools.initial_conditions import random_band_field
from src.tools.spectral_field import SpectralField, divergence, evaluate, inner_product
from src.tools.velocity_basis import (
    AdvectionOperator,
    advection_energy,
    apply_Mk,
    basis_rows,
    build_divergence_free_basis,
    covariance_at_zero,
    half_lattice,
    kernel_sum,
    polarizations,
    spectral_density,
    truncated_covariance,
)

DESK_C0 = 2 * (2 ** -1.5 + 3 ** -1.5)


class TestSpectralDensity:
    def test_hand_evaluation(self, desk_spec):
        expected = np.array([[0.0, 0.0], [0.0, 2 ** -1.5]])
        assert np.allclose(spectral_density(desk_spec, (1, 0)), expected, atol=1e-15)

    def test_gradient_regime_is_evaluated(self):
        spec = CovarianceSpec(a=1.0, b=0.0)
        assert np.allclose(spectral_density(spec, (1, 0)), [[2 ** -1.5, 0.0], [0.0, 0.0]])

    def test_undefined_at_origin(self, desk_spec):
        with pytest.raises(ValueError):
            spectral_density(desk_spec, (0, 0))

    @pytest.mark.parametrize("alpha", [0.0, 2.0, 2.5])
    def test_alpha_range(self, alpha):
        with pytest.raises(ValueError, match="0 < α < 2"):
            CovarianceSpec(alpha_spec=alpha)


class TestBasisConstruction:
    def test_mode_count(self, desk_basis, basis_3d):
        assert desk_basis.n_modes == 8
        assert basis_3d.n_modes == 26 * 2

    def test_half_lattice_order(self):
        assert half_lattice(2, 1) == [(1, 0), (0, 1), (1, 1), (1, -1)]

    def test_gradient_regime_rejected(self):
        with pytest.raises(UnsupportedRegimeError):
            build_divergence_free_basis(CovarianceSpec(a=0.5, b=1.0), 1)

    def test_every_mode_divergence_free(self, basis_3d):
        for mode in basis_3d.modes:
            components = [
                SpectralField.from_mode(mode.wavevector, mode.parity, mode.amplitude * e) for e in mode.polarization
            ]
            assert divergence(components).norm_sq() <= 1e-24

    def test_polarizations_orthonormal(self):
        frame = np.array(polarizations((1, 2, -1)))
        assert np.allclose(frame @ frame.T, np.eye(2), atol=1e-14)
        assert np.max(np.abs(frame @ np.array([1, 2, -1]))) <= 1e-14

    def test_amplitudes(self, desk_basis):
        assert desk_basis.modes[0].amplitude == pytest.approx(2 ** -0.25, rel=1e-15)
        assert desk_basis.modes[4].amplitude == pytest.approx(math.sqrt(2 * 3 ** -1.5 / 1), rel=1e-15)

    def test_leading_keeps_pairs(self, desk_basis):
        assert desk_basis.leading(4).n_modes == 4
        with pytest.raises(ValueError):
            desk_basis.leading(3)

    def test_rows(self, desk_basis):
        rows = basis_rows(desk_basis)
        assert len(rows) == 8
        assert rows[0][:3] == [0, 1, 0]
        assert rows[1][-1] == "sin"


class TestCovarianceAtZero:
    def test_desk_value(self, desk_basis):
        matrix, c0 = covariance_at_zero(desk_basis)
        assert c0 == pytest.approx(DESK_C0, rel=1e-14)
        assert c0 == pytest.approx(1.0920, abs=1e-4)
        assert abs(matrix[0, 1]) <= 1e-14
        assert np.allclose(matrix, c0 * np.eye(2), atol=1e-14)

    def test_isotropic_in_three_dimensions(self, basis_3d):
        matrix, c0 = covariance_at_zero(basis_3d)
        assert np.allclose(matrix, c0 * np.eye(3), atol=1e-13)

    def test_nondecreasing_in_shell_radius(self, desk_spec):
        values = [covariance_at_zero(build_divergence_free_basis(desk_spec, R))[1] for R in range(1, 5)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_x_independent(self, desk_basis, rng):
        x = rng.uniform(0, 2 * math.pi, size=(16, 2))
        matrix, _ = covariance_at_zero(desk_basis)
        assert np.max(np.abs(kernel_sum(desk_basis, x, x) - matrix)) <= 1e-12

    def test_kernel_identity(self, desk_spec, rng):
        basis = build_divergence_free_basis(desk_spec, 2)
        x = rng.uniform(0, 2 * math.pi, size=(8, 2))
        y = rng.uniform(0, 2 * math.pi, size=(8, 2))
        gap = kernel_sum(basis, x, y) - truncated_covariance(desk_spec, 2, x - y)
        assert np.max(np.abs(gap)) <= 1e-10


class TestApplyMk:
    def test_single_mode_example(self, desk_basis, rng):
        s = desk_basis.modes[0].amplitude
        out = apply_Mk(desk_basis, 0, SpectralField.from_mode((0, 1)))
        x = rng.uniform(0, 2 * math.pi, size=(10, 2))
        assert np.allclose(evaluate(out, x), -s * np.cos(x[:, 0]) * np.sin(x[:, 1]), atol=1e-14)

    def test_constant_is_annihilated(self, desk_basis):
        assert apply_Mk(desk_basis, 5, SpectralField.constant(2, 2.0)).norm_sq() == 0.0

    def test_skew_symmetry(self, desk_basis, band_field):
        for k in range(desk_basis.n_modes):
            assert abs(inner_product(apply_Mk(desk_basis, k, band_field), band_field)) <= 1e-12 * band_field.grad_norm_sq()

    def test_zero_mean_output(self, desk_basis, band_field):
        for k in range(desk_basis.n_modes):
            assert abs(apply_Mk(desk_basis, k, band_field).coeff((0, 0))) <= 1e-15

    def test_norm_identity(self, desk_basis, rng):
        _, c0 = covariance_at_zero(desk_basis)
        for _ in range(20):
            f = random_band_field(2, 3, rng=rng)
            assert abs(advection_energy(desk_basis, f) - c0 * f.grad_norm_sq()) <= 1e-10 * f.grad_norm_sq()

    def test_norm_identity_three_dimensions(self, basis_3d, rng):
        _, c0 = covariance_at_zero(basis_3d)
        f = random_band_field(3, 1, rng=rng)
        assert advection_energy(basis_3d, f) == pytest.approx(c0 * f.grad_norm_sq(), rel=1e-10)

    def test_mode_index_checked(self, desk_basis):
        with pytest.raises(ValueError):
            apply_Mk(desk_basis, 8, SpectralField.from_mode((1, 0)))

    def test_grid_overflow(self, desk_basis):
        operator = AdvectionOperator(desk_basis, GridSpec(dim=2, base_radius=1, growth_cap=1))
        f = SpectralField.from_mode((1, 0))
        with pytest.raises(GridOverflowError):
            operator.apply_array(0, f.data, 1, 2)

    def test_operator_matches_function(self, desk_basis, band_field):
        operator = AdvectionOperator(desk_basis)
        out = operator.apply_array(3, band_field.data, 3, 4)
        assert np.allclose(out, apply_Mk(desk_basis, 3, band_field).data)
        assert desk_basis.modes[3].parity is Parity.SIN
