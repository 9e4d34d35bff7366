import math

import numpy as np
import pytest

from gupbell import lab
from gupbell.errors import GupBellError
from gupbell.gup import GupModel
from gupbell.lab import (
    BatchEvaluator, ScanGrid, ScenarioConfig, beta_sweep, classify,
    evaluate_point, grid_scan, optimize_angles, scan_settings,
    superclassical_components, sweep_settings,
)
from gupbell.quantum import ChshSettings, Direction, bell_state

TSIRELSON = 2.0 * math.sqrt(2.0)


class TestClassify:
    def test_boundaries_closed_below(self):
        assert classify(2.0) == "classical"
        assert classify(TSIRELSON) == "quantum"
        assert classify(4.0) == "superquantum"
        assert classify(4.0 + 1e-9) == "unphysical"
        assert classify(-1.0) == "classical"

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            classify(math.inf)


class TestScenarioConfig:
    def test_corrected_scenarios_need_model(self):
        with pytest.raises(ValueError):
            ScenarioConfig(scenario="s1")

    def test_unknown_scenario(self):
        with pytest.raises(ValueError):
            ScenarioConfig(scenario="s4", model=GupModel(beta=0.1))

    def test_effective_density_unit_trace(self, custom_hp):
        for scenario in ("qm", "s1", "s2", "s3"):
            cfg = ScenarioConfig(
                scenario=scenario,
                model=None if scenario == "qm" else GupModel(beta=0.1),
                hp=None if scenario in ("qm", "s1") else custom_hp)
            rho = cfg.effective_density()
            assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
            assert np.max(np.abs(rho - rho.conj().T)) < 1e-12


class TestBatchConsistency:
    """The vectorized path must agree with the full matrix evaluators."""

    def _configs(self, custom_hp):
        tilt = GupModel(beta=0.2, rule="tilt", m=np.array([0.6, 0.0, 0.8]))
        yield ScenarioConfig()
        yield ScenarioConfig(scenario="s1", model=tilt)
        yield ScenarioConfig(scenario="s2", model=tilt, hp=custom_hp)
        yield ScenarioConfig(scenario="s3", model=tilt, hp=custom_hp)
        custom = GupModel(beta=0.15, rule="custom",
                          jp=np.array([[0.2, 0.1 - 0.3j], [0.1 + 0.3j, -0.2]]))
        yield ScenarioConfig(scenario="s1", model=custom)

    def test_matches_evaluate_point(self, custom_hp):
        rng = np.random.default_rng(11)
        angles = rng.uniform(0.0, 2.0 * math.pi, size=(20, 4))
        for cfg in self._configs(custom_hp):
            ev = BatchEvaluator(cfg)
            batch = ev.values(*(lab.planar_directions(angles[:, i])
                                for i in range(4)))
            for row, want in zip(angles, batch):
                s = ChshSettings.planar(*row)
                assert evaluate_point(cfg, s).value == pytest.approx(
                    want, abs=1e-12)

    def test_sphere_directions_match(self):
        rng = np.random.default_rng(5)
        theta = rng.uniform(0.0, math.pi, size=(8, 4))
        phi = rng.uniform(0.0, 2.0 * math.pi, size=(8, 4))
        cfg = ScenarioConfig()
        ev = BatchEvaluator(cfg)
        batch = ev.values(*(lab.sphere_directions(theta[:, i], phi[:, i])
                            for i in range(4)))
        for k in range(8):
            s = ChshSettings(*(Direction(theta[k, i], phi[k, i])
                               for i in range(4)))
            assert evaluate_point(cfg, s).value == pytest.approx(
                batch[k], abs=1e-12)


class TestGridScan:
    def test_default_landscape(self):
        # 101 points over a full period straddle the exact maximizer
        grid = grid_scan(ScenarioConfig(), resolution=101)
        assert float(grid.values.max()) == pytest.approx(TSIRELSON, abs=2e-3)
        assert superclassical_components(grid) == 2

    def test_cell_settings_consistent(self):
        grid = grid_scan(ScenarioConfig(), resolution=21)
        i, j = 7, 13
        s = scan_settings(grid.theta1_axis[i], grid.theta2_axis[j])
        point = evaluate_point(ScenarioConfig(), s).value
        assert grid.values[i, j] == pytest.approx(point, abs=1e-12)

    def test_shape_validation(self):
        with pytest.raises(GupBellError):
            ScanGrid(np.zeros(3), np.zeros(3), np.zeros((3, 4)), "qm", 0.0)

    def test_ceiling_validation(self):
        with pytest.raises(GupBellError):
            ScanGrid(np.zeros(2), np.zeros(2), np.full((2, 2), 5.0), "qm", 0.0)

    def test_resolution_minimum(self):
        with pytest.raises(ValueError):
            grid_scan(ScenarioConfig(), resolution=1)


class TestBetaSweep:
    def test_sweep_family_hits_canonical_maximizer(self):
        s = sweep_settings(math.pi / 4)
        value = evaluate_point(ScenarioConfig(), s).value
        assert value == pytest.approx(TSIRELSON, abs=1e-12)

    def test_all_series_below_ceiling(self):
        theta = np.linspace(0.0, 2.0 * math.pi, 181)
        curves = beta_sweep(theta_axis=theta)
        assert [c.beta for c in curves] == [0.1, 0.2, 0.5, 0.9]
        for curve in curves:
            for tag in ("qm", "s1", "s2", "s3"):
                assert float(np.max(curve.series[tag])) <= 4.0

    def test_custom_rule_accepted(self):
        jp = np.array([[0.3, 0.2j], [-0.2j, -0.3]])
        curves = beta_sweep(betas=(0.1,), theta_axis=np.linspace(0, 1, 9),
                            scenarios=("s1",), rule="custom", jp=jp)
        assert np.all(np.isfinite(curves[0].series["s1"]))

    def test_rejects_negative_beta(self):
        with pytest.raises(ValueError):
            beta_sweep(betas=(-0.1,), theta_axis=np.linspace(0, 1, 5))


class TestOptimize:
    def test_qm_reaches_tsirelson(self):
        opt = optimize_angles(ScenarioConfig())
        assert opt.value == pytest.approx(TSIRELSON, abs=1e-9)
        assert opt.converged

    def test_deterministic_across_runs(self):
        first = optimize_angles(ScenarioConfig(), restarts=3, seed=7)
        second = optimize_angles(ScenarioConfig(), restarts=3, seed=7)
        assert first.value == second.value
        assert first.settings == second.settings
        assert first.evaluations == second.evaluations

    def test_eight_angle_search(self):
        opt = optimize_angles(ScenarioConfig(), eight_angles=True,
                              max_evals=30_000)
        assert opt.value == pytest.approx(TSIRELSON, abs=1e-6)

    def test_restart_validation(self):
        with pytest.raises(ValueError):
            optimize_angles(ScenarioConfig(), restarts=0)
