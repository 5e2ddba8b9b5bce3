"""Hat-function partition of unity in subspace coordinates and the interpolant F."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UncoveredPointError, UsageError


def distance_matrix(Y: np.ndarray, C: np.ndarray, weight: float = 1.0,
                    chunk: int = 256) -> np.ndarray:
    """Exact ``sqrt(weight * |y_i - c_k|^2)`` for all row pairs, shape (N, m)."""
    Y = np.atleast_2d(Y)
    out = np.empty((Y.shape[0], C.shape[0]))
    for s in range(0, Y.shape[0], chunk):
        diff = Y[s:s + chunk, None, :] - C[None, :, :]
        out[s:s + chunk] = np.sqrt(weight * np.einsum("ijk,ijk->ij", diff, diff))
    return out


def raw_hats(C: np.ndarray, radius: float, Y: np.ndarray, weight: float = 1.0):
    D = distance_matrix(Y, C, weight)
    return np.maximum(0.0, 1.0 - D / radius), D


def hat_weights(C: np.ndarray, radius: float, Y: np.ndarray, weight: float = 1.0) -> np.ndarray:
    """Normalized tents ``max(0, 1 - ||y - c_k|| / radius)`` for each row of ``Y``.

    Returns an (N, m) array of weights. Raises :class:`UncoveredPointError`
    if some row lies outside every ball; its ``min_distance`` is the largest
    nearest-center distance among the offending rows.
    """
    H, D = raw_hats(C, radius, Y, weight)
    tot = H.sum(axis=1)
    bad = tot <= 0.0
    if np.any(bad):
        md = float(D[bad].min(axis=1).max())
        raise UncoveredPointError(
            f"{int(bad.sum())} point(s) outside every ball of radius {radius:.4g}; "
            f"nearest center at distance {md:.4g}", min_distance=md)
    return H / tot[:, None]


def covered_mask(C: np.ndarray, radius: float, Y: np.ndarray, weight: float = 1.0) -> np.ndarray:
    """True for rows of ``Y`` with at least one positive hat."""
    H, _ = raw_hats(C, radius, Y, weight)
    return H.sum(axis=1) > 0.0


@dataclass(frozen=True)
class PartitionOfUnity:
    center_coords: np.ndarray  # (m, d)
    radius: float
    center_values: np.ndarray  # (m,)

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.center_coords, dtype=np.float64))
        v = np.asarray(self.center_values, dtype=np.float64).reshape(-1)
        if not self.radius > 0:
            raise UsageError("partition of unity radius must be positive")
        if C.shape[0] != v.shape[0] or C.shape[0] < 1:
            raise UsageError("need as many center values as centers (at least one)")
        object.__setattr__(self, "center_coords", C)
        object.__setattr__(self, "center_values", v)

    @property
    def d(self) -> int:
        return self.center_coords.shape[1]

    def _rows(self, y):
        Y = np.asarray(y, dtype=np.float64)
        single = Y.ndim == 1
        Y = np.atleast_2d(Y)
        if Y.shape[1] != self.d:
            raise UsageError(f"expected coordinate vectors of length {self.d}")
        return Y, single

    def weights_many(self, Y) -> np.ndarray:
        Y, _ = self._rows(Y)
        return hat_weights(self.center_coords, self.radius, Y)

    def interpolant_many(self, Y) -> np.ndarray:
        return self.weights_many(Y) @ self.center_values

    def covered(self, Y) -> np.ndarray:
        Y, _ = self._rows(Y)
        return covered_mask(self.center_coords, self.radius, Y)


def weights(pou: PartitionOfUnity, y) -> np.ndarray:
    return pou.weights_many(np.asarray(y, dtype=np.float64)[None, :])[0]


def interpolant(pou: PartitionOfUnity, y) -> float:
    """``F(y) = sum_k f(x_k) psi_k(y)``."""
    return float(weights(pou, y) @ pou.center_values)
