"""Spatial proximity matrices and the admissible autoregressive range.

The usual pipeline is: binary adjacency from coordinates, row
standardization, then averaging with the transpose so downstream linear
algebra can rely on a symmetric matrix.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateGeometryWarning,
    IsolatedRegionError,
    RhoOutOfBoundsError,
    UnboundedIntervalError,
)

# relative margin keeping rho away from the interval endpoints
RHO_MARGIN = 1e-6


class SpatialWeights:
    """Validated proximity matrix with its cached spectrum.

    Parameters
    ----------
    matrix : ndarray
        Square matrix with zero diagonal and non-negative entries.

    Attributes
    ----------
    symmetric : bool
        True when the matrix equals its transpose up to 1e-12.
    eigenvalues : ndarray or None
        Real spectrum sorted ascending; None when eigenvalues have a
        non-negligible imaginary part.
    """

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("proximity matrix must be square")
        if matrix.shape[0] < 2:
            raise ValueError("proximity matrix needs at least 2 regions")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("proximity matrix must be finite")
        if np.any(np.diag(matrix) != 0):
            raise ValueError("proximity matrix diagonal must be zero")
        if np.any(matrix < 0):
            raise ValueError("proximity matrix entries must be non-negative")
        self.matrix = matrix
        scale = max(1.0, float(np.abs(matrix).max()))
        self.symmetric = bool(np.abs(matrix - matrix.T).max() <= 1e-12 * scale)
        # eigendecomposition happens once here; repeated fits must see
        # byte-identical eigenvalues, so nothing reassigns them later
        self._eigvecs = None
        if self.symmetric:
            self.eigenvalues, self._eigvecs = np.linalg.eigh(matrix)
        else:
            ev = np.linalg.eigvals(matrix)
            if np.abs(ev.imag).max() <= 1e-9 * max(1.0, np.abs(ev).max()):
                self.eigenvalues = np.sort(ev.real)
            else:
                self.eigenvalues = None

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def eig_min(self):
        return None if self.eigenvalues is None else float(self.eigenvalues[0])

    @property
    def eig_max(self):
        return None if self.eigenvalues is None else float(self.eigenvalues[-1])

    def spectrum(self):
        """Eigenvalues and eigenvectors; symmetric matrices only."""
        if not self.symmetric:
            raise ValueError("spectrum with eigenvectors requires a symmetric matrix")
        return self.eigenvalues, self._eigvecs


@dataclass(frozen=True)
class RhoInterval:
    """Open interval of invertibility (1/eig_min, 1/eig_max), contains zero."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < 0.0 < self.hi):
            raise ValueError("rho interval must contain zero")

    @property
    def margin(self):
        return RHO_MARGIN * (self.hi - self.lo)

    def contains(self, rho, with_margin=True):
        m = self.margin if with_margin else 0.0
        return self.lo + m <= rho <= self.hi - m

    def clamp(self, rho):
        """Pull rho inside the margin-shrunk interval; flags whether it moved."""
        m = self.margin
        clipped = min(max(float(rho), self.lo + m), self.hi - m)
        return clipped, clipped != float(rho)


def weights_from_coordinates(coords, method="knn", k=4, threshold=None):
    """Binary adjacency from planar coordinates, symmetrized by union.

    Parameters
    ----------
    coords : ndarray, shape (n, d)
        One row of coordinates per region.
    method : str
        ``"knn"`` links each region to its k nearest neighbors;
        ``"distance"`` links all pairs closer than ``threshold``.
    k : int
        Neighbor count for the knn method, 1 <= k < n.
    threshold : float
        Cutoff for the distance method, must be positive.

    Notes
    -----
    Distance ties are broken by region index (stable sort), so the result
    is deterministic.  Duplicate coordinates trigger a
    DegenerateGeometryWarning.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    n = coords.shape[0]
    if n < 3:
        raise ValueError("need at least 3 regions to build a proximity matrix")
    if not np.all(np.isfinite(coords)):
        raise ValueError("coordinates must be finite")
    diff = coords[:, None, :] - coords[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    off = ~np.eye(n, dtype=bool)
    if np.any(dist2[off] == 0.0):
        warnings.warn(
            "duplicate coordinates found; neighbor ties broken by region index",
            DegenerateGeometryWarning,
            stacklevel=2,
        )
    adj = np.zeros((n, n))
    if method == "knn":
        k = int(k)
        if not 1 <= k < n:
            raise ValueError("knn neighbor count must satisfy 1 <= k < n")
        d = dist2.copy()
        np.fill_diagonal(d, np.inf)
        for i in range(n):
            adj[i, np.argsort(d[i], kind="stable")[:k]] = 1.0
    elif method == "distance":
        if threshold is None or not float(threshold) > 0:
            raise ValueError("distance method needs a positive threshold")
        adj[off & (dist2 <= float(threshold) ** 2)] = 1.0
    else:
        raise ValueError(f"unknown method {method!r}; use 'knn' or 'distance'")
    adj = np.maximum(adj, adj.T)
    return SpatialWeights(adj)


def row_standardize(w):
    """Divide each row by its sum so rows sum to one."""
    sums = w.matrix.sum(axis=1)
    isolated = np.flatnonzero(sums == 0)
    if isolated.size:
        raise IsolatedRegionError(
            f"region {int(isolated[0])} has no neighbors; cannot row-standardize"
        )
    return SpatialWeights(w.matrix / sums[:, None])


def symmetrize(w):
    """Average the matrix with its transpose."""
    return SpatialWeights((w.matrix + w.matrix.T) / 2.0)


def rho_interval(w):
    """Admissible open interval for rho, (1/eig_min, 1/eig_max).

    I - rho W is invertible for every rho strictly inside.
    """
    if w.eigenvalues is None:
        raise ValueError("rho interval needs a real spectrum")
    lo_eig, hi_eig = w.eig_min, w.eig_max
    if not (lo_eig < 0.0 < hi_eig):
        raise UnboundedIntervalError(
            "spectrum does not straddle zero; admissible rho interval is unbounded"
        )
    return RhoInterval(lo=1.0 / lo_eig, hi=1.0 / hi_eig)


def sar_transform(rho, w):
    """The matrix I - rho W for admissible rho."""
    interval = rho_interval(w)
    if not interval.contains(rho):
        raise RhoOutOfBoundsError(
            f"rho={rho} outside admissible interval "
            f"({interval.lo:.6g}, {interval.hi:.6g}) with safety margin"
        )
    return np.eye(w.n) - float(rho) * w.matrix
