import numpy as np
import pytest

from fsar import (
    Grid,
    LS_METHOD,
    ML_METHOD,
    ScenarioConfig,
    mise,
    run_scenario,
    scenario_weights,
    simulate_beta,
    simulate_coordinates,
    simulate_curves,
    simulate_response,
    make_basis,
    project,
)


class TestScenarioConfig:
    def test_defaults(self):
        cfg = ScenarioConfig(seed=1)
        assert cfg.n_areas == 117
        assert cfg.basis_k == 15
        assert cfg.knn_k == 4
        assert cfg.replicates == 100
        assert cfg.grid.points[0] == 0.0 and cfg.grid.points[-1] == 100.0
        assert cfg.grid.size == 101

    def test_validation(self):
        with pytest.raises(ValueError):
            ScenarioConfig(seed=1, n_areas=2)
        with pytest.raises(ValueError):
            ScenarioConfig(seed=1, knn_k=0)
        with pytest.raises(ValueError):
            ScenarioConfig(seed=1, n_areas=10, knn_k=10)
        with pytest.raises(ValueError):
            ScenarioConfig(seed=1, sigma2_true=-0.1)
        with pytest.raises(ValueError):
            ScenarioConfig(seed=1, gp_variance=-1.0)
        with pytest.raises(ValueError):
            ScenarioConfig(seed=1, gp_length_scale=0.0)
        with pytest.raises(ValueError):
            ScenarioConfig(seed=1, replicates=0)
        with pytest.raises(ValueError):
            ScenarioConfig(seed=1, basis_k=3)

    def test_zero_variances_allowed(self):
        ScenarioConfig(seed=1, sigma2_true=0.0, gp_variance=0.0, beta_noise_var=0.0)


class TestGenerators:
    def test_coordinates_in_unit_square(self):
        rng = np.random.default_rng(0)
        coords = simulate_coordinates(50, rng)
        assert coords.shape == (50, 2)
        assert coords.min() >= 0.0 and coords.max() < 1.0

    def test_curves_shape_and_determinism(self, tiny_scenario):
        a = simulate_curves(tiny_scenario, np.random.default_rng(5))
        b = simulate_curves(tiny_scenario, np.random.default_rng(5))
        assert a.curves.shape == (tiny_scenario.n_areas, tiny_scenario.grid.size)
        assert np.array_equal(a.curves, b.curves)

    def test_zero_gp_variance_gives_pure_trend(self, tiny_scenario):
        cfg = ScenarioConfig(
            seed=1, n_areas=10, gp_variance=0.0,
            grid=tiny_scenario.grid, basis_k=6, replicates=1,
        )
        sample = simulate_curves(cfg, np.random.default_rng(2))
        t = cfg.grid.points
        trend = cfg.trend_amplitude * np.sin(cfg.trend_frequency * t)
        assert np.array_equal(sample.curves, np.tile(trend, (10, 1)))

    def test_curves_fluctuate_around_trend(self, tiny_scenario):
        sample = simulate_curves(tiny_scenario, np.random.default_rng(7))
        t = tiny_scenario.grid.points
        trend = np.sin(tiny_scenario.trend_frequency * t)
        resid = sample.curves - trend
        # mean over 25 curves of a sd-0.5 process: comfortably within 0.5
        assert np.abs(resid.mean(axis=0)).max() < 0.5

    def test_beta_truth_is_smoothed_raw(self, tiny_scenario):
        basis = make_basis("bspline", tiny_scenario.basis_k, tiny_scenario.grid)
        truth = simulate_beta(tiny_scenario, basis, np.random.default_rng(3))
        assert truth.raw.shape == tiny_scenario.grid.points.shape
        assert np.allclose(truth.values, basis.values.T @ truth.coeffs)
        # smoothing is a projection: projecting the smooth values changes nothing
        from fsar import FunctionalSample

        again = project(
            FunctionalSample(curves=truth.values[None, :], grid=tiny_scenario.grid),
            basis,
        ).coeffs[0]
        assert np.allclose(again, truth.coeffs, atol=1e-12)

    def test_beta_noise_off(self, tiny_scenario):
        cfg = ScenarioConfig(
            seed=1, n_areas=10, beta_noise_var=0.0,
            grid=tiny_scenario.grid, basis_k=6, replicates=1,
        )
        basis = make_basis("bspline", 6, cfg.grid)
        truth = simulate_beta(cfg, basis, np.random.default_rng(4))
        assert np.array_equal(truth.raw, np.cos(2.0 * cfg.grid.points))

    def test_response_decomposition(self, tiny_scenario):
        rng = np.random.default_rng(6)
        coords = simulate_coordinates(tiny_scenario.n_areas, rng)
        w = scenario_weights(coords, tiny_scenario.knn_k)
        sample = simulate_curves(tiny_scenario, np.random.default_rng(1))
        basis = make_basis("bspline", 6, tiny_scenario.grid)
        truth = simulate_beta(tiny_scenario, basis, np.random.default_rng(2))
        rho = 0.4
        y = simulate_response(sample, truth.values, w, rho, 1.0,
                              np.random.default_rng(9))
        integrals = sample.curves @ (tiny_scenario.grid.weights * truth.values)
        eps = np.random.default_rng(9).standard_normal(w.n)
        nu = np.linalg.solve(np.eye(w.n) - rho * w.matrix, eps)
        assert np.allclose(y, integrals + nu)

    def test_zero_sigma2_response_is_exact_integral(self, tiny_scenario):
        rng = np.random.default_rng(6)
        coords = simulate_coordinates(tiny_scenario.n_areas, rng)
        w = scenario_weights(coords, tiny_scenario.knn_k)
        sample = simulate_curves(tiny_scenario, np.random.default_rng(1))
        basis = make_basis("bspline", 6, tiny_scenario.grid)
        truth = simulate_beta(tiny_scenario, basis, np.random.default_rng(2))
        y = simulate_response(sample, truth.values, w, 0.3, 0.0,
                              np.random.default_rng(9))
        integrals = sample.curves @ (tiny_scenario.grid.weights * truth.values)
        assert np.array_equal(y, integrals)


class TestMise:
    def test_constant_offset_oracle(self):
        g = Grid.uniform(0.0, 2.0, 11)
        est = np.full(g.size, 1.5)
        truth = np.full(g.size, 1.0)
        assert mise(est, truth, g) == pytest.approx(0.25)
        assert mise(est, truth, g, normalize=False) == pytest.approx(0.5)

    def test_zero_for_identical(self):
        g = Grid.uniform(0.0, 1.0, 21)
        f = np.sin(g.points)
        assert mise(f, f, g) == 0.0

    def test_shape_check(self):
        g = Grid.uniform(0.0, 1.0, 21)
        with pytest.raises(ValueError):
            mise(np.ones(20), np.ones(21), g)


class TestRunScenario:
    def test_summary_fields_and_determinism(self, tiny_scenario):
        a = run_scenario(tiny_scenario)
        b = run_scenario(tiny_scenario)
        assert a.replicates == tiny_scenario.replicates
        assert a.replicates_converged == len(a.rho_hats)
        assert a.method == ML_METHOD
        assert np.array_equal(a.rho_hats, b.rho_hats)
        assert np.array_equal(a.mises, b.mises)
        assert a.rho_hat_mean == b.rho_hat_mean
        assert a.mise_abs == pytest.approx(a.mise * tiny_scenario.grid.length)

    def test_worker_count_does_not_change_results(self, tiny_scenario):
        serial = run_scenario(tiny_scenario, workers=1)
        threaded = run_scenario(tiny_scenario, workers=3)
        assert np.array_equal(serial.rho_hats, threaded.rho_hats)
        assert np.array_equal(serial.sigma2_hats, threaded.sigma2_hats)
        assert np.array_equal(serial.mises, threaded.mises)

    def test_replicate_streams_are_stable_under_extension(self, tiny_scenario):
        import dataclasses

        short = dataclasses.replace(tiny_scenario, replicates=3)
        full = run_scenario(tiny_scenario)
        part = run_scenario(short)
        assert np.array_equal(part.rho_hats, full.rho_hats[:3])

    def test_ls_method_selectable(self, tiny_scenario):
        summary = run_scenario(tiny_scenario, method=LS_METHOD)
        assert summary.method == LS_METHOD
        assert summary.replicates_converged > 0

    def test_invalid_arguments(self, tiny_scenario):
        with pytest.raises(ValueError):
            run_scenario(tiny_scenario, method="bogus")
        with pytest.raises(ValueError):
            run_scenario(tiny_scenario, workers=0)

    def test_inadmissible_rho_true_is_rejected(self, tiny_scenario):
        import dataclasses

        bad = dataclasses.replace(tiny_scenario, rho_true=5.0)
        with pytest.raises(ValueError, match="outside the admissible interval"):
            run_scenario(bad)

    def test_noise_free_scenario_recovers_exactly(self):
        cfg = ScenarioConfig(
            seed=8, n_areas=30, rho_true=0.0, sigma2_true=0.0,
            replicates=2, basis_k=6, grid=Grid.uniform(0.0, 100.0, 41),
        )
        summary = run_scenario(cfg)
        assert summary.replicates_converged == 2
        assert abs(summary.rho_hat_mean - 0.0) <= 1e-3
        assert summary.sigma2_hat_mean == 0.0
        assert summary.mise < 1e-16