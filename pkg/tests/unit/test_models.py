import pytest

from src.models import (
    EnergyReport,
    ExperimentKind,
    GridSpec,
    HermiteConvention,
    InitialConditionPreset,
    InitialConditionSpec,
    McEstimate,
    PropagatorConfig,
    RunManifest,
    as_wavevector,
    half_lattice_mode_count,
    sup_norm,
)
from src.models.experiment_model import ConvergenceSection, OracleSection


class TestGridSpec:
    def test_for_chaos(self):
        grid = GridSpec.for_chaos(dim=2, base_radius=4, shell_radius=1, order=3)
        assert grid.growth_cap == 7
        grid.check_radius(7)

    def test_invalid_radii(self):
        with pytest.raises(ValueError):
            GridSpec(dim=2, base_radius=5, growth_cap=4)
        with pytest.raises(ValueError):
            GridSpec(dim=1, base_radius=1, growth_cap=1)

    def test_wavevector_helpers(self):
        assert as_wavevector([1.0, -2.0], 2) == (1, -2)
        assert sup_norm((1, -3, 2)) == 3
        with pytest.raises(ValueError):
            as_wavevector([0.5, 1], 2)
        with pytest.raises(ValueError):
            as_wavevector([1, 0, 0], 2)


class TestPropagatorConfig:
    def test_default_output_times(self):
        cfg = PropagatorConfig(n_w=2, T=2.0, dt=0.125)
        assert cfg.output_times == (0.0, 0.5, 1.0, 1.5, 2.0)
        assert cfg.n_steps == 16
        assert cfg.output_steps() == [0, 4, 8, 12, 16]

    def test_snapping(self):
        cfg = PropagatorConfig(n_w=2, dt=0.25, output_times=(0.0, 0.3, 1.0))
        assert cfg.snapped_times() == [0.0, 0.25, 1.0]
        assert cfg.time_index(0.25) == 1
        assert cfg.time_index(0.6) is None

    @pytest.mark.parametrize(
        "changes",
        [
            {"n_w": 3},
            {"n_w": -2},
            {"dt": 0.3},
            {"nu": -0.1},
            {"N": -1},
            {"n_t": 0},
            {"output_times": (0.5, 0.25)},
            {"output_times": (0.0, 1.5)},
        ],
    )
    def test_invalid(self, changes):
        data = {"n_w": 2, "dt": 0.25, **changes}
        with pytest.raises(ValueError):
            PropagatorConfig(**data)

    def test_output_times_colliding_on_grid(self):
        with pytest.raises(ValueError, match="same step"):
            PropagatorConfig(n_w=2, dt=0.5, output_times=(0.4, 0.6))

    def test_with_updates_resets_default_times(self):
        cfg = PropagatorConfig(n_w=2, dt=0.25)
        longer = cfg.with_updates(T=2.0)
        assert longer.output_times[-1] == 2.0
        assert cfg.with_updates(N=1).output_times == cfg.output_times

    def test_multiindex_count(self):
        assert PropagatorConfig(n_w=2, n_t=2, N=2, dt=0.25).multiindex_count == 15


class TestConventions:
    def test_noise_sign(self):
        assert HermiteConvention.SIGNED.noise_sign == -1
        assert HermiteConvention.PROBABILIST.noise_sign == 1

    def test_kinds(self):
        assert not ExperimentKind.VALIDATE_BASIS.propagates
        assert all(kind.propagates for kind in ExperimentKind if kind is not ExperimentKind.VALIDATE_BASIS)

    @pytest.mark.parametrize("dim, radius, expected", [(2, 1, 8), (2, 2, 24), (3, 1, 52)])
    def test_mode_count(self, dim, radius, expected):
        assert half_lattice_mode_count(dim, radius) == expected


class TestSections:
    def test_initial_condition_radius(self):
        assert InitialConditionSpec().required_radius(2) == 2
        single = InitialConditionSpec(preset=InitialConditionPreset.SINGLE_MODE, wavevector=(0, 3))
        assert single.required_radius(2) == 3
        assert InitialConditionSpec(preset=InitialConditionPreset.RANDOM_BAND, radius=5).required_radius(3) == 5
        with pytest.raises(ValueError):
            InitialConditionSpec(wavevector=(0, 0))

    def test_oracle_levels(self):
        with pytest.raises(ValueError):
            OracleSection(levels=(1, 4))

    def test_convergence_reference_finer(self):
        with pytest.raises(ValueError, match="reference_dt"):
            ConvergenceSection(dt_values=(0.1, 0.05), reference_dt=0.05)


class TestReports:
    def test_energy_report_lengths(self):
        with pytest.raises(ValueError):
            EnergyReport(
                times=[0.0, 1.0],
                e_l2=[1.0],
                dissipation=[0.0, 0.1],
                tail=[0.0, 0.1],
                basis_defect=[0.0, 0.0],
                residual=[0.0, 0.0],
                theta0_norm_sq=1.0,
            )

    def test_energy_report_views(self):
        report = EnergyReport(
            times=[0.0, 1.0],
            e_l2=[1.0, 0.7],
            dissipation=[0.0, 0.2],
            tail=[0.0, 0.05],
            basis_defect=[0.0, 0.05],
            residual=[0.0, -1e-9],
            theta0_norm_sq=1.0,
        )
        assert report.deficit() == pytest.approx([0.0, 0.1])
        assert report.max_abs_residual() == 1e-9
        assert report.rows()[1] == [1.0, 0.7, 0.2, 0.05, 0.05, -1e-9]
        assert report.get_summary()["final_tail"] == 0.05

    def test_mc_estimate_bracket(self):
        estimate = McEstimate(n_paths=100, dt_mc=0.01, value=1.0, std_error=0.01)
        assert estimate.within(1.02, 1.2)
        assert not estimate.within(1.04, 1.2)
        with pytest.raises(ValueError):
            McEstimate(n_paths=1, dt_mc=0.01, value=1.0, std_error=0.0)

    def test_manifest_lifecycle(self):
        manifest = RunManifest(config={}, code_version="1.0.0", hermite_convention="signed", noise_sign=-1)
        manifest.add_file("energy.csv")
        manifest.add_file("energy.csv")
        manifest.complete("passed")
        assert manifest.files == ["energy.csv"]
        assert manifest.status == "passed"
        assert manifest.wall_clock_s >= 0.0
