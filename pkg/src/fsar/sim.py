"""Synthetic data generation and the Monte Carlo study harness.

A scenario fixes one spatial layout (uniform coordinates in the unit
square, k nearest neighbours, row standardized then symmetrized), one
curve sample (squared-exponential Gaussian process plus a sine trend),
and one slope function (a noisy cosine smoothed onto the spline basis).
Replicates redraw only the regression noise.  Seeding is hierarchical:
``SeedSequence(seed)`` is split into one child each for coordinates,
curves, and slope, then one child per replicate, so results do not
depend on the worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .basis import FunctionalSample, Grid, evaluate_function, make_basis, project
from .errors import FsarNumericalError, KernelDegenerateError
from .estimate import LS_METHOD, ML_METHOD, fit_ls, fit_ml
from .model import TruncatedModel
from .spatial import rho_interval, row_standardize, symmetrize, weights_from_coordinates


def _default_grid():
    return Grid.uniform(0.0, 100.0, 101)


@dataclass(frozen=True)
class ScenarioConfig:
    """Inputs for one Monte Carlo scenario.

    ``sigma2_true``, ``gp_variance``, and ``beta_noise_var`` may be zero,
    which switches the corresponding noise source off while leaving the
    random streams aligned with the noisy case.
    """

    seed: int
    n_areas: int = 117
    rho_true: float = 0.5
    sigma2_true: float = 1.0
    beta_noise_var: float = 2.0
    gp_length_scale: float = 10.0
    gp_variance: float = 0.25
    trend_amplitude: float = 1.0
    trend_frequency: float = 2.0 * math.pi / 100.0
    basis_k: int = 15
    knn_k: int = 4
    replicates: int = 100
    grid: Grid = field(default_factory=_default_grid)

    def __post_init__(self):
        if self.n_areas < 3:
            raise ValueError("n_areas must be at least 3")
        if not 1 <= self.knn_k < self.n_areas:
            raise ValueError("knn_k must lie in [1, n_areas)")
        if self.basis_k < 4:
            raise ValueError("basis_k must be at least 4")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        for name in ("sigma2_true", "beta_noise_var", "gp_variance"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not self.gp_length_scale > 0:
            raise ValueError("gp_length_scale must be positive")
        if not np.isfinite(self.rho_true):
            raise ValueError("rho_true must be finite")


class SlopeTruth(NamedTuple):
    """Raw slope values, their basis coefficients, and the smoothed values.

    The smoothed values are the scenario truth: the raw cosine-plus-noise
    curve is only a device for generating a slope that lives near, but
    not exactly in, the span of the basis.
    """

    raw: np.ndarray
    coeffs: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class MonteCarloSummary:
    rho_true: float
    method: str
    replicates: int
    replicates_converged: int
    rho_hat_mean: float
    rho_hat_sd: float
    sigma2_hat_mean: float
    mise: float
    mise_abs: float
    rho_hats: np.ndarray
    sigma2_hats: np.ndarray
    mises: np.ndarray


def simulate_coordinates(n_areas, rng):
    """Uniform draws in the unit square, one row per region."""
    return rng.random((int(n_areas), 2))


def scenario_weights(coords, knn_k):
    """k nearest neighbours, row standardized, then symmetrized."""
    w = weights_from_coordinates(coords, method="knn", k=knn_k)
    return symmetrize(row_standardize(w))


def simulate_curves(cfg, rng):
    """Gaussian process draws with a squared-exponential kernel plus a
    deterministic sine trend."""
    t = cfg.grid.points
    trend = cfg.trend_amplitude * np.sin(cfg.trend_frequency * t)
    draws = rng.standard_normal((cfg.n_areas, t.size))
    if cfg.gp_variance == 0.0:
        curves = np.tile(trend, (cfg.n_areas, 1))
        return FunctionalSample(curves=curves, grid=cfg.grid)
    diff = t[:, None] - t[None, :]
    kernel = cfg.gp_variance * np.exp(-(diff**2) / (2.0 * cfg.gp_length_scale**2))
    kernel[np.diag_indices_from(kernel)] += 1e-10 * cfg.gp_variance
    try:
        chol = np.linalg.cholesky(kernel)
    except np.linalg.LinAlgError as exc:
        raise KernelDegenerateError(
            "squared-exponential kernel is numerically singular even after "
            "jittering; increase the length scale or coarsen the grid"
        ) from exc
    curves = draws @ chol.T + trend
    return FunctionalSample(curves=curves, grid=cfg.grid)


def simulate_beta(cfg, basis, rng):
    """Slope truth: cos(2t) plus pointwise noise, smoothed onto the basis."""
    t = cfg.grid.points
    raw = np.cos(2.0 * t) + math.sqrt(cfg.beta_noise_var) * rng.standard_normal(t.size)
    sample = FunctionalSample(curves=raw[None, :], grid=cfg.grid)
    coeffs = project(sample, basis).coeffs[0]
    return SlopeTruth(raw=raw, coeffs=coeffs, values=evaluate_function(coeffs, basis))


def simulate_response(sample, beta_values, weights, rho, sigma2, rng):
    """Quadrature integrals of the curves against the slope plus
    autoregressive noise (I - rho W)^-1 eps."""
    beta_values = np.asarray(beta_values, dtype=float)
    if beta_values.shape != sample.grid.points.shape:
        raise ValueError("beta_values must be given on the sample grid")
    integrals = sample.curves @ (sample.grid.weights * beta_values)
    eps = math.sqrt(sigma2) * rng.standard_normal(weights.n)
    m = np.eye(weights.n) - float(rho) * weights.matrix
    return integrals + np.linalg.solve(m, eps)


def mise(estimate, truth, grid, normalize=True):
    """Integrated squared error between two functions on a grid.

    With ``normalize`` the integral is divided by the domain length, so
    the result reads as a mean squared error.
    """
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != grid.points.shape or truth.shape != grid.points.shape:
        raise ValueError("estimate and truth must be given on the grid")
    value = float(grid.weights @ (estimate - truth) ** 2)
    return value / grid.length if normalize else value


def _make_fitter(method):
    if method == ML_METHOD:
        return fit_ml
    if method == LS_METHOD:
        return fit_ls
    raise ValueError(f"method must be '{ML_METHOD}' or '{LS_METHOD}'")


def scenario_inputs(cfg):
    """Deterministic per-scenario inputs: replicate seeds, weights, basis,
    curves, and the slope truth.  Children 3..3+replicates of the root
    seed sequence belong to the replicates."""
    seeds = np.random.SeedSequence(cfg.seed).spawn(3 + cfg.replicates)
    coords = simulate_coordinates(cfg.n_areas, np.random.default_rng(seeds[0]))
    weights = scenario_weights(coords, cfg.knn_k)
    interval = rho_interval(weights)
    if not interval.contains(cfg.rho_true):
        raise ValueError(
            f"rho_true={cfg.rho_true} is outside the admissible interval "
            f"({interval.lo:.6g}, {interval.hi:.6g}) of the generated "
            f"proximity matrix"
        )
    basis = make_basis("bspline", cfg.basis_k, cfg.grid)
    sample = simulate_curves(cfg, np.random.default_rng(seeds[1]))
    truth = simulate_beta(cfg, basis, np.random.default_rng(seeds[2]))
    return seeds, weights, basis, sample, truth


def run_scenario(cfg, method=ML_METHOD, workers=1):
    """Run one scenario end to end and summarize the replicates.

    Replicates where the fit fails numerically or does not converge are
    dropped from the averages; ``replicates_converged`` reports how many
    remain.
    """
    fitter = _make_fitter(method)
    if workers < 1:
        raise ValueError("workers must be at least 1")
    seeds, weights, basis, sample, truth = scenario_inputs(cfg)
    design = project(sample, basis)

    def one(index):
        rng = np.random.default_rng(seeds[3 + index])
        y = simulate_response(
            sample, truth.values, weights, cfg.rho_true, cfg.sigma2_true, rng
        )
        model = TruncatedModel(y, design, weights)
        try:
            fit = fitter(model)
        except FsarNumericalError:
            return None
        if not fit.converged:
            return None
        err = mise(evaluate_function(fit.b_hat, basis), truth.values, cfg.grid)
        return fit.rho_hat, fit.sigma2_hat, err

    if workers == 1:
        results = [one(i) for i in range(cfg.replicates)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(cfg.replicates)))

    kept = [r for r in results if r is not None]
    rho_hats = np.array([r[0] for r in kept], dtype=float)
    sigma2_hats = np.array([r[1] for r in kept], dtype=float)
    mises = np.array([r[2] for r in kept], dtype=float)
    n_ok = len(kept)
    return MonteCarloSummary(
        rho_true=cfg.rho_true,
        method=method,
        replicates=cfg.replicates,
        replicates_converged=n_ok,
        rho_hat_mean=float(rho_hats.mean()) if n_ok else float("nan"),
        rho_hat_sd=float(rho_hats.std(ddof=1)) if n_ok > 1 else float("nan"),
        sigma2_hat_mean=float(sigma2_hats.mean()) if n_ok else float("nan"),
        mise=float(mises.mean()) if n_ok else float("nan"),
        mise_abs=float(mises.mean() * cfg.grid.length) if n_ok else float("nan"),
        rho_hats=rho_hats,
        sigma2_hats=sigma2_hats,
        mises=mises,
    )
