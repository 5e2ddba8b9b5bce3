"""Orthogonal projection onto the span of net centers.

The basis is built by modified Gram-Schmidt with one reorthogonalization pass
in the product inner product; coordinates in this orthonormal basis identify
the span with R^d for the downstream finite-dimensional stages.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import DegenerateSubspaceError, UsageError
from .space import Grid, ProductPoint

RANK_TOL = 1e-10


@dataclass(frozen=True)
class Projector:
    grid: Grid
    n: int
    Q: np.ndarray  # (d, n * grid.size) orthonormal rows in the weighted inner product
    source_rank_tol: float

    @property
    def d(self) -> int:
        return self.Q.shape[0]

    @property
    def basis(self) -> List[ProductPoint]:
        return [ProductPoint.from_array(self.grid, q) for q in self.Q]

    def _flat(self, x) -> np.ndarray:
        if isinstance(x, ProductPoint):
            if x.grid != self.grid or x.n != self.n:
                raise UsageError("point shape does not match the projector")
            return x.values.reshape(-1)
        arr = np.asarray(x, dtype=np.float64)
        if arr.ndim == 3:
            arr = arr.reshape(arr.shape[0], -1)
        if arr.shape[-1] != self.Q.shape[1]:
            raise UsageError("point shape does not match the projector")
        return arr

    def coords_many(self, X: np.ndarray) -> np.ndarray:
        """Coordinates of many flattened points, shape (N, d)."""
        X = self._flat(X)
        return self.grid.weight * (X @ self.Q.T)

    def residual_many(self, X: np.ndarray) -> np.ndarray:
        """``sqrt(max(0, ||x||^2 - |coords|^2))``.

        When the difference is lost to cancellation (x nearly in the span) the
        residual is recomputed from the explicit difference ``x - Px``.
        """
        X = np.atleast_2d(self._flat(X))
        y = self.coords_many(X)
        sq = self.grid.weight * np.einsum("ij,ij->i", X, X)
        res = np.sqrt(np.maximum(0.0, sq - np.einsum("ij,ij->i", y, y)))
        near = res <= 1e-6 * np.sqrt(sq)
        if np.any(near):
            diff = X[near] - y[near] @ self.Q
            res[near] = np.sqrt(self.grid.weight * np.einsum("ij,ij->i", diff, diff))
        return res

    def reconstruct(self, y) -> ProductPoint:
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.d,):
            raise UsageError(f"expected {self.d} coordinates, got shape {y.shape}")
        return ProductPoint.from_array(self.grid, (y @ self.Q).reshape(self.n, -1))

    def project(self, x: ProductPoint) -> ProductPoint:
        return self.reconstruct(coords(self, x))


def _gs_pass(v, Q, w):
    for q in Q:
        v = v - (w * np.dot(q, v)) * q
    return v


def build_projector(centers: Sequence[ProductPoint], rank_tol: float = RANK_TOL) -> Projector:
    """Orthonormal basis of ``span(centers)``, dropping numerically dependent vectors.

    A center is dropped when its norm after orthogonalization against the
    retained basis is at most ``rank_tol`` times the largest center norm.
    """
    centers = list(centers)
    if not centers:
        raise UsageError("build_projector needs at least one center")
    if not rank_tol > 0:
        raise UsageError("rank_tol must be positive")
    grid, n = centers[0].grid, centers[0].n
    for c in centers:
        if c.grid != grid or c.n != n:
            raise UsageError("centers have different shapes")
    V = np.stack([c.values.reshape(-1) for c in centers])
    return _build(grid, n, V, rank_tol)


def _build(grid: Grid, n: int, V: np.ndarray, rank_tol: float) -> Projector:
    w = grid.weight
    norms = np.sqrt(w * np.einsum("ij,ij->i", V, V))
    scale = norms.max()
    if scale == 0.0:
        raise DegenerateSubspaceError("all centers are numerically zero")
    Q = []
    for v in V:
        v = _gs_pass(v, Q, w)
        v = _gs_pass(v, Q, w)
        r = np.sqrt(w * np.dot(v, v))
        if r <= rank_tol * scale:
            continue
        Q.append(v / r)
    Q = np.array(Q)
    Q.setflags(write=False)
    return Projector(grid, n, Q, rank_tol)


def coords(P: Projector, x: ProductPoint) -> np.ndarray:
    """Coordinates ``<x, basis_l>`` of ``Px`` in the orthonormal basis."""
    return P.coords_many(P._flat(x)[None, :])[0]


def residual(P: Projector, x: ProductPoint) -> float:
    """``||x - Px||`` via ``sqrt(max(0, ||x||^2 - |coords|^2))``."""
    return float(P.residual_many(P._flat(x)[None, :])[0])
