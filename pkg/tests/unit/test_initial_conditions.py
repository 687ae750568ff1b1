import numpy as np
import pytest

from src.models import InitialConditionPreset, InitialConditionSpec, Parity
from src.tools.initial_conditions import build_initial_condition, random_band_field, two_mode_wavevectors
from src.tools.spectral_field import SpectralField


class TestPresets:
    def test_two_mode(self):
        field = build_initial_condition(InitialConditionSpec(), dim=2, base_radius=4)
        assert field.support_radius == 4
        assert field.coeff((1, 0)) == pytest.approx(0.5)
        assert field.coeff((1, 2)) == pytest.approx(0.25)

    def test_two_mode_three_dimensions(self):
        assert two_mode_wavevectors(3) == ((1, 0, 0), (1, 2, 0))

    def test_single_mode(self):
        spec = InitialConditionSpec(
            preset=InitialConditionPreset.SINGLE_MODE, wavevector=(0, 1), amplitude=2.0, parity=Parity.SIN
        )
        field = build_initial_condition(spec, dim=2, base_radius=1)
        assert field.allclose(SpectralField.from_mode((0, 1), Parity.SIN, 2.0))

    def test_single_mode_default_direction(self):
        spec = InitialConditionSpec(preset=InitialConditionPreset.SINGLE_MODE)
        field = build_initial_condition(spec, dim=3, base_radius=1)
        assert field.coeff((1, 0, 0)) == pytest.approx(0.5)

    def test_random_band_is_seeded(self):
        spec = InitialConditionSpec(preset=InitialConditionPreset.RANDOM_BAND, radius=2, seed=4)
        first = build_initial_condition(spec, dim=2, base_radius=3)
        second = build_initial_condition(spec, dim=2, base_radius=3)
        assert np.array_equal(first.data, second.data)
        assert first.effective_radius() == 2

    def test_base_radius_too_small(self):
        with pytest.raises(ValueError):
            build_initial_condition(InitialConditionSpec(), dim=2, base_radius=1)

    def test_wrong_dimension(self):
        spec = InitialConditionSpec(preset=InitialConditionPreset.SINGLE_MODE, wavevector=(1, 0))
        with pytest.raises(ValueError):
            build_initial_condition(spec, dim=3, base_radius=2)


class TestRandomBand:
    def test_real_and_decaying(self, rng):
        field = random_band_field(2, 4, decay=3.0, rng=rng)
        assert field.is_real()
        assert abs(field.coeff((4, 4))) < 5.0 * 33.0 ** -1.5
