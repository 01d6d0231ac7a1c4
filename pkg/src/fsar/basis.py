"""Quadrature grids, orthonormal function bases, and basis projections.

Functions are represented by their values on a shared grid.  Inner products
are composite trapezoid quadrature sums, and every basis produced here is
orthonormalized against that quadrature inner product, so coefficient
vectors live in ordinary Euclidean space (Parseval holds exactly up to
roundoff).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from .errors import DegenerateBasisError

SUPPORTED_BASIS_KINDS = ("fourier", "bspline")


@dataclass(frozen=True)
class Grid:
    """Strictly increasing evaluation points with trapezoid quadrature weights.

    Parameters
    ----------
    points : ndarray
        Grid points, strictly increasing, at least 4 of them.
    weights : ndarray
        Positive quadrature weights summing to the interval length.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        if points.ndim != 1 or points.size < 4:
            raise ValueError("grid needs at least 4 one-dimensional points")
        if not np.all(np.isfinite(points)):
            raise ValueError("grid points must be finite")
        if np.any(np.diff(points) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if weights.shape != points.shape:
            raise ValueError("weights must match points in shape")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        length = points[-1] - points[0]
        if abs(weights.sum() - length) > 1e-9 * max(1.0, abs(length)):
            raise ValueError("quadrature weights must sum to the interval length")

    @classmethod
    def from_points(cls, points):
        """Build a grid with composite trapezoid weights."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 1 or points.size < 4:
            raise ValueError("grid needs at least 4 one-dimensional points")
        w = np.empty_like(points)
        w[1:-1] = (points[2:] - points[:-2]) / 2.0
        w[0] = (points[1] - points[0]) / 2.0
        w[-1] = (points[-1] - points[-2]) / 2.0
        return cls(points, w)

    @classmethod
    def uniform(cls, start, stop, num):
        """Equally spaced grid on [start, stop] with trapezoid weights."""
        if not stop > start:
            raise ValueError("stop must exceed start")
        return cls.from_points(np.linspace(float(start), float(stop), int(num)))

    @property
    def size(self):
        return self.points.size

    @property
    def length(self):
        return float(self.points[-1] - self.points[0])

    def matches(self, other):
        return self.points.shape == other.points.shape and np.array_equal(
            self.points, other.points
        )


def inner_product(f, g, grid):
    """Quadrature inner product sum_l w_l f(t_l) g(t_l)."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != grid.points.shape or g.shape != grid.points.shape:
        raise ValueError("function values must match the grid shape")
    return float(np.sum(grid.weights * f * g))


@dataclass(frozen=True)
class Basis:
    """Orthonormal basis evaluated on a grid.

    values has shape (size, grid.size); row j holds the j-th basis function.
    gram is the quadrature Gram matrix, identity by construction.
    """

    kind: str
    size: int
    values: np.ndarray
    gram: np.ndarray
    grid: Grid


@dataclass(frozen=True)
class FunctionalSample:
    """n curves observed on a common grid, one curve per row."""

    curves: np.ndarray
    grid: Grid

    def __post_init__(self):
        curves = np.atleast_2d(np.asarray(self.curves, dtype=float))
        object.__setattr__(self, "curves", curves)
        if curves.shape[1] != self.grid.size:
            raise ValueError("curve values must match the grid size")
        if not np.all(np.isfinite(curves)):
            raise ValueError("curve values must be finite")

    @property
    def n(self):
        return self.curves.shape[0]


@dataclass(frozen=True)
class CoefficientMatrix:
    """Basis coefficients of a functional sample, one row per curve."""

    coeffs: np.ndarray
    basis_size: int = field(default=0)

    def __post_init__(self):
        coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "coeffs", coeffs)
        if self.basis_size == 0:
            object.__setattr__(self, "basis_size", coeffs.shape[1])
        if coeffs.shape[1] != self.basis_size:
            raise ValueError("coefficient columns must equal basis_size")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")

    @property
    def n(self):
        return self.coeffs.shape[0]


def _raw_fourier(size, grid):
    # constant, then sine/cosine pairs at integer frequencies over the interval
    t0 = grid.points[0]
    length = grid.length
    values = np.empty((size, grid.size))
    values[0] = 1.0 / np.sqrt(length)
    for j in range(1, size):
        m = (j + 1) // 2
        arg = 2.0 * np.pi * m * (grid.points - t0) / length
        if j % 2 == 1:
            values[j] = np.sqrt(2.0 / length) * np.sin(arg)
        else:
            values[j] = np.sqrt(2.0 / length) * np.cos(arg)
    return values


def _raw_bspline(size, grid):
    # cubic splines on equally spaced breakpoints with repeated boundary knots
    if size < 4:
        raise ValueError("cubic spline basis needs size >= 4")
    a, b = grid.points[0], grid.points[-1]
    breaks = np.linspace(a, b, size - 2)
    knots = np.concatenate([[a] * 3, breaks, [b] * 3])
    design = BSpline.design_matrix(grid.points, knots, 3, extrapolate=False)
    return design.toarray().T


def make_basis(kind, size, grid):
    """Construct an orthonormal basis of the requested kind on a grid.

    Parameters
    ----------
    kind : str
        One of ``"fourier"`` or ``"bspline"``.
    size : int
        Number of basis functions.  Cubic splines need size >= 4.
    grid : Grid
        Evaluation grid; also defines the quadrature inner product.

    Returns
    -------
    Basis
        Functions orthonormalized against the quadrature inner product via
        the inverse Cholesky factor of their raw Gram matrix.

    Raises
    ------
    ValueError
        Unknown kind, or size out of range for the grid.
    DegenerateBasisError
        The raw Gram matrix is singular (grid too coarse for the size).
    """
    if kind not in SUPPORTED_BASIS_KINDS:
        raise ValueError(
            f"unknown basis kind {kind!r}; supported: {', '.join(SUPPORTED_BASIS_KINDS)}"
        )
    size = int(size)
    if size < 1:
        raise ValueError("basis size must be positive")
    if size > grid.size:
        raise ValueError("basis size cannot exceed the number of grid points")
    raw = _raw_fourier(size, grid) if kind == "fourier" else _raw_bspline(size, grid)
    gram = raw @ (grid.weights[:, None] * raw.T)
    # a function that nearly vanishes on the grid leaves the Gram matrix
    # positive only through roundoff; refuse before Cholesky normalizes noise
    if np.linalg.cond(gram) > 1e12:
        raise DegenerateBasisError(
            f"gram matrix of {kind} basis (size {size}) is numerically "
            "singular on this grid"
        )
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise DegenerateBasisError(
            f"gram matrix of {kind} basis (size {size}) is singular on this grid"
        ) from None
    values = np.linalg.solve(chol, raw)
    gram = values @ (grid.weights[:, None] * values.T)
    return Basis(kind=kind, size=size, values=values, gram=gram, grid=grid)


def project(sample, basis):
    """Quadrature projection of each curve onto the basis.

    Because the basis is orthonormal in the quadrature inner product, the
    returned coefficients minimize the quadrature-weighted squared error
    among all functions in the basis span.
    """
    if not sample.grid.matches(basis.grid):
        raise ValueError("sample and basis grids differ")
    coeffs = sample.curves @ (basis.grid.weights[:, None] * basis.values.T)
    return CoefficientMatrix(coeffs=coeffs, basis_size=basis.size)


def evaluate_function(coeffs, basis):
    """Evaluate sum_j coeffs[j] * basis_j on the basis grid.

    coeffs may be a vector or a (size, m) stack of coefficient columns;
    the result then has one value column per input column.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[:1] != (basis.size,) or coeffs.ndim > 2:
        raise ValueError("coefficients must have the basis size as first axis")
    return basis.values.T @ coeffs


def truncation_tail_bound(tail_slope_sq, tail_coef_var):
    """Upper bound 4 * tail_slope_sq * tail_coef_var on the squared truncation error.

    tail_slope_sq is the summed squared slope coefficients beyond the cut,
    tail_coef_var the summed variances of the discarded score coefficients.
    """
    tail_slope_sq = float(tail_slope_sq)
    tail_coef_var = float(tail_coef_var)
    if tail_slope_sq < 0 or tail_coef_var < 0:
        raise ValueError("tail sums must be non-negative")
    return 4.0 * tail_slope_sq * tail_coef_var
