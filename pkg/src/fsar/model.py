"""Truncated regression model with spatially autoregressive errors.

With A the curve coefficients, b the slope coefficients, and W a symmetric
proximity matrix, the whitened residual is (I - rho W)(y - A b).  The least
squares objective is its squared norm; the Gaussian log-likelihood adds the
log-determinant and variance terms.
"""

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .errors import DeterminantSignError, RhoOutOfBoundsError
from .spatial import rho_interval

LlGradients = namedtuple("LlGradients", ["b", "rho", "sigma2"])


@dataclass(frozen=True)
class ParamPoint:
    """One point (b, rho, sigma2) in parameter space; sigma2 must be positive."""

    b: np.ndarray
    rho: float
    sigma2: float

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "b", b)
        if b.ndim != 1 or not np.all(np.isfinite(b)):
            raise ValueError("b must be a finite vector")
        if not np.isfinite(self.rho):
            raise ValueError("rho must be finite")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")


class TruncatedModel:
    """Response vector, curve coefficient design, and symmetric weights.

    Parameters
    ----------
    y : ndarray, shape (n,)
        Scalar responses.
    design : CoefficientMatrix
        Curve coefficients, one row per region, k columns.
    weights : SpatialWeights
        Symmetric proximity matrix for the same n regions.
    """

    def __init__(self, y, design, weights):
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or not np.all(np.isfinite(y)):
            raise ValueError("y must be a finite vector")
        if not weights.symmetric:
            raise ValueError("model requires a symmetric proximity matrix")
        a = design.coeffs
        if y.shape[0] != a.shape[0] or weights.n != a.shape[0]:
            raise ValueError("y, design, and weights disagree on the region count")
        if a.shape[0] <= a.shape[1]:
            raise ValueError("need more regions than basis coefficients (n > k)")
        self.y = y
        self.design = design
        self.a = a
        self.w = weights
        self.interval = rho_interval(weights)

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def k(self):
        return self.a.shape[1]

    def residual(self, b):
        b = np.asarray(b, dtype=float)
        if b.shape != (self.k,):
            raise ValueError("slope vector length must equal k")
        return self.y - self.a @ b

    def apply_m(self, rho, v):
        """(I - rho W) v without forming the matrix."""
        return v - rho * (self.w.matrix @ v)

    def _check_rho(self, rho):
        if not self.interval.contains(rho):
            raise RhoOutOfBoundsError(
                f"rho={rho} outside admissible interval "
                f"({self.interval.lo:.6g}, {self.interval.hi:.6g}) with safety margin"
            )


def ls_objective(model, b, rho):
    """Squared norm of the whitened residual (I - rho W)(y - A b)."""
    model._check_rho(rho)
    s = model.apply_m(rho, model.residual(b))
    return float(s @ s)


def ls_grad_b(model, b, rho):
    """Gradient of ls_objective in b: -2 A' (I - rho W)^2 (y - A b)."""
    model._check_rho(rho)
    u = model.apply_m(rho, model.residual(b))
    return -2.0 * (model.a.T @ model.apply_m(rho, u))


def ls_grad_rho(model, b, rho):
    """Derivative of ls_objective in rho: 2 rho r'W'Wr - 2 r'Wr."""
    model._check_rho(rho)
    r = model.residual(b)
    u = model.w.matrix @ r
    return float(2.0 * rho * (u @ u) - 2.0 * (r @ u))


def _log_det_terms(model, rho):
    # log det(I - rho W) from the cached symmetric spectrum
    d = 1.0 - rho * model.w.eigenvalues
    if np.any(d <= 0.0):
        raise DeterminantSignError(
            f"det(I - rho W) is not positive at rho={rho}; admissible interval is "
            f"({model.interval.lo:.6g}, {model.interval.hi:.6g})"
        )
    return d


def log_likelihood(model, point):
    """Gaussian log-likelihood at (b, rho, sigma2), up to the constant term."""
    d = _log_det_terms(model, point.rho)
    s = model.apply_m(point.rho, model.residual(point.b))
    return float(
        -0.5 * model.n * np.log(point.sigma2)
        + np.log(d).sum()
        - (s @ s) / (2.0 * point.sigma2)
    )


def ll_gradients(model, point):
    """Partial derivatives of log_likelihood in b, rho, and sigma2."""
    d = _log_det_terms(model, point.rho)
    r = model.residual(point.b)
    u = model.apply_m(point.rho, r)
    grad_b = (model.a.T @ model.apply_m(point.rho, u)) / point.sigma2
    trace_term = float((model.w.eigenvalues / d).sum())
    wr = model.w.matrix @ r
    d_obj_d_rho = 2.0 * point.rho * (wr @ wr) - 2.0 * (r @ wr)
    grad_rho = -trace_term - d_obj_d_rho / (2.0 * point.sigma2)
    grad_sigma2 = -0.5 * model.n / point.sigma2 + (u @ u) / (2.0 * point.sigma2**2)
    return LlGradients(b=grad_b, rho=float(grad_rho), sigma2=float(grad_sigma2))
