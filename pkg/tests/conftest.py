import numpy as np
import pytest

from fsar import (
    FunctionalSample,
    Grid,
    ScenarioConfig,
    TruncatedModel,
    make_basis,
    project,
    scenario_weights,
)


@pytest.fixture(scope="session")
def unit_grid():
    return Grid.uniform(0.0, 1.0, 61)


@pytest.fixture(scope="session")
def long_grid():
    return Grid.uniform(0.0, 100.0, 101)


@pytest.fixture(scope="session")
def spline_basis(unit_grid):
    return make_basis("bspline", 8, unit_grid)


@pytest.fixture(scope="session")
def fourier_basis(unit_grid):
    return make_basis("fourier", 7, unit_grid)


def small_weights(n=12, seed=5, k=3):
    rng = np.random.default_rng(seed)
    coords = rng.random((n, 2))
    return scenario_weights(coords, k)


@pytest.fixture(scope="session")
def weights12():
    return small_weights()


def make_instance(n=20, k=5, rho=0.4, sigma2=0.5, seed=11, grid=None):
    """A small synthetic model instance with known generating values."""
    grid = grid or Grid.uniform(0.0, 1.0, 41)
    rng = np.random.default_rng(seed)
    w = small_weights(n=n, seed=seed + 1)
    basis = make_basis("bspline", k, grid)
    curves = rng.standard_normal((n, grid.size)) @ np.diag(
        np.linspace(1.0, 0.3, grid.size)
    )
    sample = FunctionalSample(curves=curves, grid=grid)
    design = project(sample, basis)
    b_true = rng.standard_normal(k)
    eps = np.sqrt(sigma2) * rng.standard_normal(n)
    m = np.eye(n) - rho * w.matrix
    y = design.coeffs @ b_true + np.linalg.solve(m, eps)
    model = TruncatedModel(y, design, w)
    return model, sample, basis, b_true, w


@pytest.fixture()
def instance20():
    return make_instance()


@pytest.fixture(scope="session")
def tiny_scenario():
    """Fast scenario for harness tests: small n, few replicates."""
    return ScenarioConfig(
        seed=303,
        n_areas=25,
        rho_true=0.4,
        replicates=6,
        basis_k=6,
        grid=Grid.uniform(0.0, 100.0, 41),
    )
