"""Empirical compact sets, greedy nets, covering numbers and modulus of continuity.

A compact set K is only ever seen through a finite :class:`SampleSet`. Nets are
built by farthest-point traversal; the exhaustive covering number is kept as a
small-instance oracle. :func:`estimate_modulus` tabulates an upper envelope of
``|f(x) - f(x')|`` against ``||x - x'||`` from which :func:`choose_delta` picks
the scale at which f varies by less than a third of the target accuracy.
"""
from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import (CapacityError, EpsilonUnattainableError, EvaluationError,
                     UsageError)
from .space import Grid, ProductPoint, distances

BRUTEFORCE_MAX_POINTS = 16
SAFETY = 2.0


class SampleSet:
    """Finite nonempty sample of points of H^n, stored as an (N, n, size) array."""

    def __init__(self, grid: Grid, values, label: str = ""):
        arr = np.array(values, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, None, :]
        if arr.ndim != 3 or arr.shape[0] == 0:
            raise UsageError("a sample set needs a nonempty (N, n, size) array")
        if arr.shape[2] != grid.size:
            raise UsageError(f"points have {arr.shape[2]} values, grid has {grid.size}")
        if not np.all(np.isfinite(arr)):
            raise UsageError("sample values must be finite")
        arr.setflags(write=False)
        self.grid = grid
        self.values = arr
        self.label = label

    @classmethod
    def from_points(cls, points: Sequence[ProductPoint], label: str = "") -> "SampleSet":
        points = list(points)
        if not points:
            raise UsageError("a sample set needs at least one point")
        grid, n = points[0].grid, points[0].n
        for p in points:
            if p.grid != grid or p.n != n:
                raise UsageError("all points of a sample set must share one shape")
        return cls(grid, np.stack([p.values for p in points]), label)

    def __len__(self):
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(len(self), -1)

    def point(self, i: int) -> ProductPoint:
        return ProductPoint.from_array(self.grid, self.values[i])

    @property
    def points(self) -> List[ProductPoint]:
        return [self.point(i) for i in range(len(self))]

    def subset(self, indices, label: Optional[str] = None) -> "SampleSet":
        return SampleSet(self.grid, self.values[np.asarray(indices, dtype=int)],
                         self.label if label is None else label)

    def to_dict(self) -> dict:
        return {"dim": self.grid.dim, "m": self.grid.m, "n": self.n,
                "points": self.values.tolist()}

    @classmethod
    def from_dict(cls, d, label: str = "") -> "SampleSet":
        grid = Grid(int(d["dim"]), int(d["m"]))
        vals = np.asarray(d["points"], dtype=np.float64)
        if vals.ndim != 3 or vals.shape[1] != int(d["n"]):
            raise UsageError("sample file: points must be N lists of n arrays")
        return cls(grid, vals, label)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path, label: str = "") -> "SampleSet":
        with open(path) as fh:
            return cls.from_dict(json.load(fh), label)

    def __repr__(self):
        return f"SampleSet({self.label!r}, N={len(self)}, n={self.n})"


@dataclass(frozen=True)
class Net:
    center_indices: tuple
    radius: float
    cover_distances: np.ndarray = field(repr=False, compare=False)

    def __len__(self):
        return len(self.center_indices)


def farthest_point_net(X: np.ndarray, weight: float, radius: float) -> tuple:
    """Greedy farthest-point traversal over rows of ``X``.

    Starts at row 0 and adds the farthest uncovered row (lowest index on ties)
    until every row is within ``radius``. Returns the center indices and each
    row's distance to its nearest center.
    """
    if not radius > 0:
        raise UsageError(f"net radius must be positive, got {radius}")
    X = np.asarray(X, dtype=np.float64)
    centers = [0]
    mind = distances(weight, X, X[0])
    while True:
        far = int(np.argmax(mind))
        if mind[far] <= radius:
            break
        centers.append(far)
        mind = np.minimum(mind, distances(weight, X, X[far]))
    return tuple(centers), mind


def greedy_net(samples: SampleSet, radius: float) -> Net:
    centers, mind = farthest_point_net(samples.flat, samples.grid.weight, radius)
    assert np.all(mind <= radius)
    return Net(centers, float(radius), mind)


def covering_number_bruteforce(samples: SampleSet, radius: float,
                               max_subset: Optional[int] = None) -> int:
    """Smallest number of sample points whose closed ``radius``-balls cover the set."""
    N = len(samples)
    if N > BRUTEFORCE_MAX_POINTS:
        raise CapacityError(f"exhaustive covering search limited to "
                            f"{BRUTEFORCE_MAX_POINTS} points, got {N}")
    if max_subset is None:
        max_subset = N
    X = samples.flat
    D = np.stack([distances(samples.grid.weight, X, X[i]) for i in range(N)])
    covers = D <= radius
    for k in range(1, min(max_subset, N) + 1):
        for subset in itertools.combinations(range(N), k):
            if np.all(covers[list(subset)].any(axis=0)):
                return k
    raise CapacityError(f"no cover with at most {max_subset} centers")


@dataclass
class ModulusEstimate:
    """Upper envelope of observed ``|f(x) - f(x')|`` versus ``||x - x'||``.

    ``distances`` is sorted ascending and ``envelope[i]`` is the largest
    difference seen over pairs at distance ``<= distances[i]``.
    """

    distances: np.ndarray
    envelope: np.ndarray
    diameter: float
    pairs_examined: int
    f_values: np.ndarray = field(repr=False)
    safety: float = SAFETY

    @property
    def table(self):
        return list(zip(self.distances.tolist(), self.envelope.tolist()))

    def envelope_at(self, d: float) -> float:
        k = np.searchsorted(self.distances, d, side="right")
        return float(self.envelope[k - 1]) if k > 0 else 0.0

    def suggested_delta(self, eps_third: float) -> float:
        """Half the distance of the first pair whose difference reaches ``eps_third``.

        All pairs strictly closer than that distance differ by less than
        ``eps_third``. Without any such pair the answer is capped at half the
        sample diameter.
        """
        if not eps_third > 0:
            raise UsageError("epsilon must be positive")
        hits = np.nonzero(self.envelope >= eps_third)[0]
        if hits.size == 0:
            if self.diameter == 0.0:
                return 1.0
            return self.diameter / self.safety
        if self.distances[hits[0]] <= self.distances[0]:
            raise EpsilonUnattainableError(
                f"epsilon unattainable at this sampling density: the closest "
                f"examined pair (distance {self.distances[0]:.3g}) already differs "
                f"by {self.envelope[0]:.3g} >= {eps_third:.3g}")
        return float(self.distances[hits[0]]) / self.safety


def evaluate_functional(f: Callable, samples: SampleSet, sequential: bool = True) -> np.ndarray:
    """Evaluate ``f`` on every sample, raising with the index of any non-finite value."""
    pts = samples.points
    if sequential:
        vals = [f(p) for p in pts]
    else:
        with ThreadPoolExecutor() as pool:
            vals = list(pool.map(f, pts))
    out = np.asarray(vals, dtype=np.float64)
    bad = np.nonzero(~np.isfinite(out))[0]
    if bad.size:
        raise EvaluationError(f"functional returned {out[bad[0]]} at sample {bad[0]}",
                              index=int(bad[0]))
    return out


def _sq_dist_rows(X: np.ndarray, rows: slice) -> np.ndarray:
    sq = np.einsum("ij,ij->i", X, X)
    G = X[rows] @ X.T
    return np.maximum(sq[rows, None] + sq[None, :] - 2.0 * G, 0.0)


def _neighbour_and_diameter_pairs(X: np.ndarray, chunk: int = 1024):
    """Nearest-neighbour pair of every row plus the farthest pair overall."""
    N = X.shape[0]
    pairs = []
    best, best_pair = -1.0, (0, 0)
    for start in range(0, N, chunk):
        stop = min(start + chunk, N)
        D = _sq_dist_rows(X, slice(start, stop))
        far = np.unravel_index(np.argmax(D), D.shape)
        if D[far] > best:
            best, best_pair = D[far], (start + far[0], far[1])
        D[np.arange(stop - start), np.arange(start, stop)] = np.inf
        nn = np.argmin(D, axis=1)
        pairs.extend(zip(range(start, stop), nn.tolist()))
    pairs.append(best_pair)
    return pairs


def estimate_modulus(f: Callable, samples: SampleSet, pair_budget: int = 2000,
                     seed: int = 0, sequential: bool = True,
                     f_values: Optional[np.ndarray] = None,
                     safety: float = SAFETY) -> ModulusEstimate:
    """Tabulate the empirical modulus of continuity of ``f`` over ``samples``.

    ``f`` is evaluated once per sample (skipped if ``f_values`` is given).
    Examined pairs are ``pair_budget`` seeded random pairs, every sample with
    its nearest neighbour, and the diameter pair.
    """
    if pair_budget < 1:
        raise UsageError("pair_budget must be >= 1")
    fv = evaluate_functional(f, samples, sequential) if f_values is None \
        else np.asarray(f_values, dtype=np.float64)
    X = samples.flat
    N = len(samples)
    if N == 1:
        return ModulusEstimate(np.zeros(0), np.zeros(0), 0.0, 0, fv, safety)

    rng = np.random.default_rng(seed)
    i = rng.integers(0, N, size=pair_budget)
    j = rng.integers(0, N - 1, size=pair_budget)
    j = np.where(j >= i, j + 1, j)
    extra = np.array(_neighbour_and_diameter_pairs(X), dtype=int)
    I = np.concatenate([i, extra[:, 0]])
    J = np.concatenate([j, extra[:, 1]])
    lo, hi = np.minimum(I, J), np.maximum(I, J)
    keep = lo != hi
    pairs = np.unique(np.column_stack([lo[keep], hi[keep]]), axis=0)

    diff = X[pairs[:, 0]] - X[pairs[:, 1]]
    dist = np.sqrt(samples.grid.weight * np.einsum("ij,ij->i", diff, diff))
    df = np.abs(fv[pairs[:, 0]] - fv[pairs[:, 1]])
    pos = dist > 0
    dist, df = dist[pos], df[pos]
    order = np.lexsort((df, dist))
    dist, df = dist[order], df[order]
    env = np.maximum.accumulate(df) if df.size else df
    diameter = float(dist[-1]) if dist.size else 0.0
    return ModulusEstimate(dist, env, diameter, int(pairs.shape[0]), fv, safety)


def choose_delta(mod: ModulusEstimate, epsilon: float) -> float:
    if not epsilon > 0:
        raise UsageError("epsilon must be positive")
    return mod.suggested_delta(epsilon / 3.0)
