"""Pointwise confidence bands and the cross-covariance significance test.

The test de-correlates the response and the curves with (I - rho W)^-1,
builds the empirical covariance operator of the transformed curves, and
normalizes the empirical cross-covariance by the inverse square root of
that operator.  Under the null slope the statistic is asymptotically
N(0, 2); the two-sided rejection rule compares |T_n| against
sqrt(2) z_{1 - alpha/2}.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import norm

from .basis import FunctionalSample, evaluate_function, inner_product, make_basis, project
from .errors import (
    DegenerateCovarianceError,
    IllConditionedError,
    InvalidFitError,
    RankDeficientError,
)

# condition number ceiling for the de-correlation solves
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class ConfidenceBand:
    """Pointwise band for the slope function on a grid."""

    grid: object
    center: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float


@dataclass(frozen=True)
class TestResult:
    """Outcome of the normalized cross-covariance test."""

    t_n: float
    k_n: int
    alpha: float
    reject: bool
    eigenvalues_used: np.ndarray


class OperatorDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    delta_coeffs: np.ndarray


def confidence_band(fit, basis, level=0.95):
    """Pointwise normal confidence band for the slope function.

    The half width at t is z_{(1+level)/2} sqrt(phi(t)' C phi(t)) where C
    is the slope coefficient covariance stored in the fit.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie strictly between 0 and 1")
    if fit.coef_cov.shape != (basis.size, basis.size):
        raise ValueError("fit covariance and basis size disagree")
    eig = np.linalg.eigvalsh(fit.coef_cov)
    if eig[0] < -1e-10 * max(1.0, abs(eig[-1])):
        raise InvalidFitError("slope covariance is not positive semidefinite")
    center = evaluate_function(fit.b_hat, basis)
    var = np.einsum("jt,jl,lt->t", basis.values, fit.coef_cov, basis.values)
    half = norm.ppf(0.5 + level / 2.0) * np.sqrt(np.maximum(var, 0.0))
    return ConfidenceBand(
        grid=basis.grid, center=center, lower=center - half,
        upper=center + half, level=float(level),
    )


def _solve_checked(rho, w, rhs, what):
    m = np.eye(w.n) - float(rho) * w.matrix
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise IllConditionedError(
            f"I - rho W is too ill conditioned for the {what} transform "
            f"(cond ~ {cond:.3g})"
        )
    return np.linalg.solve(m, rhs)


def transform_response(y, rho, w):
    """Solve (I - rho W) q = y."""
    y = np.asarray(y, dtype=float)
    if y.shape != (w.n,):
        raise ValueError("response length must match the number of regions")
    return _solve_checked(rho, w, y, "response")


def transform_curves(sample, rho, w):
    """Row i of the result is sum_j [(I - rho W)^-1]_ij X_j."""
    if sample.n != w.n:
        raise ValueError("curve count must match the number of regions")
    mixed = _solve_checked(rho, w, sample.curves, "curve")
    return FunctionalSample(curves=mixed, grid=sample.grid)


def empirical_operators(z_sample, q, basis):
    """Eigendecomposition of the empirical covariance operator plus the
    cross-covariance coefficients.

    Parameters
    ----------
    z_sample : FunctionalSample
        Transformed curves.
    q : ndarray
        Transformed (and possibly centered) responses.
    basis : Basis
        Orthonormal basis fixing the coordinates.

    Returns
    -------
    OperatorDecomposition
        eigenvalues sorted descending; eigenfunctions as columns of a
        (size, size) coefficient matrix with a deterministic sign;
        delta_coeffs the basis coefficients of (1/n) sum_i q_i Z_i.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (z_sample.n,):
        raise ValueError("q length must match the curve count")
    coeffs = project(z_sample, basis).coeffs
    n = z_sample.n
    gamma = coeffs.T @ coeffs / n
    eigenvalues, vectors = np.linalg.eigh(gamma)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order]
    if eigenvalues[0] < 1e-12:
        raise DegenerateCovarianceError(
            "empirical covariance operator has no eigenvalue above 1e-12"
        )
    # deterministic sign: largest-magnitude coordinate is positive
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    vectors = vectors * signs
    delta = coeffs.T @ q / n
    return OperatorDecomposition(
        eigenvalues=eigenvalues, eigenfunctions=vectors, delta_coeffs=delta
    )


def default_k_n(eigenvalues):
    """Count of eigenvalues above 1e-6 of the leading one."""
    return int(np.sum(eigenvalues > 1e-6 * eigenvalues[0]))


def test_beta(sample, y, w, rho, beta0, k_n=None, alpha=0.05, sigma2_hat=None,
              basis=None):
    """Test whether the slope function equals beta0.

    Parameters
    ----------
    sample : FunctionalSample
        Observed curves.
    y : ndarray
        Scalar responses.
    w : SpatialWeights
        Proximity matrix.
    rho : float
        Autoregressive parameter used for the de-correlation transforms
        (a known value or a plug-in estimate).
    beta0 : ndarray or None
        Null slope values on the sample grid; None means beta0 = 0 and
        skips the centering step.
    k_n : int, optional
        Number of leading eigenvalues to use; defaults to those above
        1e-6 of the leading eigenvalue.
    alpha : float
        Two-sided level; reject when |T_n| > sqrt(2) z_{1 - alpha/2}.
    sigma2_hat : float
        Residual variance estimate scaling the statistic.
    basis : Basis, optional
        Coordinate basis; defaults to 15 orthonormalized cubic splines on
        the sample grid.

    Returns
    -------
    TestResult
    """
    if sigma2_hat is None or not sigma2_hat > 0:
        raise ValueError("sigma2_hat must be a positive number")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    if basis is None:
        basis = make_basis("bspline", 15, sample.grid)
    q = transform_response(np.asarray(y, dtype=float), rho, w)
    z = transform_curves(sample, rho, w)
    if beta0 is not None:
        beta0 = np.asarray(beta0, dtype=float)
        if beta0.shape != sample.grid.points.shape:
            raise ValueError("beta0 must be given on the sample grid")
        q = q - z.curves @ (sample.grid.weights * beta0)
    ops = empirical_operators(z, q, basis)
    if k_n is None:
        k_n = default_k_n(ops.eigenvalues)
    k_n = int(k_n)
    if not 1 <= k_n <= ops.eigenvalues.size:
        raise ValueError("k_n must lie between 1 and the basis size")
    used = ops.eigenvalues[:k_n]
    if used[-1] < 1e-10:
        raise RankDeficientError(
            f"eigenvalue {k_n} is below 1e-10; decrease k_n"
        )
    proj = ops.eigenfunctions[:, :k_n].T @ ops.delta_coeffs
    stat = z.n * float(np.sum(proj**2 / used))
    t_n = (stat / float(sigma2_hat) - k_n) / np.sqrt(k_n)
    threshold = np.sqrt(2.0) * norm.ppf(1.0 - alpha / 2.0)
    return TestResult(
        t_n=float(t_n), k_n=k_n, alpha=float(alpha),
        reject=bool(abs(t_n) > threshold), eigenvalues_used=used,
    )


def delta_n_expanded(x_sample, y, c, probe):
    """Cross-covariance functional at a probe via the expanded double sum.

    Evaluates (1/n) sum_j sum_k (sum_i c_ji c_ik) <X_k, probe> y_j, which
    matches the direct form (1/n) sum_i <Z_i, probe> Q_i for symmetric c.
    Used as a cross-check of the operator pipeline.
    """
    y = np.asarray(y, dtype=float)
    c = np.asarray(c, dtype=float)
    n = x_sample.n
    if c.shape != (n, n) or y.shape != (n,):
        raise ValueError("c must be (n, n) and y length n")
    probe = np.asarray(probe, dtype=float)
    v = np.array([inner_product(row, probe, x_sample.grid) for row in x_sample.curves])
    return float(y @ (c @ (c @ v))) / n
