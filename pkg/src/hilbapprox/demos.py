"""Compact sample families, reference functionals and operators for the demos.

Compactness is realized by continuous maps from closed parameter boxes:

* ``fourier_band`` -- ``u(x) = sum_{k<=3} a_k sin(2 pi k x) + b_k cos(2 pi k x)``
* ``bump_mixture`` -- sums of up to three tent bumps on [0, 1]
* ``image_phantom`` -- up to two axis-aligned rectangles on [0, 1]^2, rendered
  with exact pixel-area coverage so images depend continuously on the edges
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np
from scipy import ndimage

from .cover import SampleSet
from .errors import UsageError
from .space import Grid, GridFunction, ProductPoint

DEFAULT_BOXES: Dict[str, Dict[str, Tuple[float, float]]] = {
    "fourier_band": {
        "a1": (-0.4, 0.4), "b1": (-0.02, 0.02),
        "a2": (-0.01, 0.01), "b2": (-0.01, 0.01),
        "a3": (-0.005, 0.005), "b3": (-0.005, 0.005),
    },
    "bump_mixture": {
        "count": (1, 3), "height": (0.0, 1.0),
        "center": (0.2, 0.8), "width": (0.05, 0.2),
    },
    "image_phantom": {
        "count": (1, 1),
        "x0_1": (0.15, 0.3), "y0_1": (0.15, 0.15),
        "width_1": (0.3, 0.3), "height_1": (0.3, 0.3), "intensity_1": (0.5, 1.0),
        "x0_2": (0.55, 0.55), "y0_2": (0.5, 0.5),
        "width_2": (0.25, 0.25), "height_2": (0.25, 0.25), "intensity_2": (0.5, 1.0),
    },
}

# A single translating rectangle of fixed intensity: the image-to-image demo
# needs an effectively one-parameter family for held-out coverage at eps ~ 0.15.
OPERATOR_BOX = {"count": (1, 1), "intensity_1": (1.0, 1.0)}

DEFAULT_GRID = {"fourier_band": (1, 100), "bump_mixture": (1, 100), "image_phantom": (2, 16)}


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    counts: Tuple[int, int, int] = (400, 200, 200)
    seed: int = 0
    n: int = 2
    m: int = None
    box: Dict[str, Tuple[float, float]] = field(default=None)

    def __post_init__(self):
        if self.kind not in DEFAULT_BOXES:
            raise UsageError(f"unknown family {self.kind!r}")
        if len(self.counts) != 3 or min(self.counts) < 1:
            raise UsageError("counts must be three positive integers")
        if self.n < 1:
            raise UsageError("n must be >= 1")
        box = dict(DEFAULT_BOXES[self.kind])
        box.update(self.box or {})
        for name, (lo, hi) in box.items():
            if not lo <= hi:
                raise UsageError(f"empty parameter interval for {name}: [{lo}, {hi}]")
        object.__setattr__(self, "box", box)
        if self.m is None:
            object.__setattr__(self, "m", DEFAULT_GRID[self.kind][1])

    @property
    def grid(self) -> Grid:
        return Grid(DEFAULT_GRID[self.kind][0], self.m)


def _u(rng, box, name, size=None):
    lo, hi = box[name]
    return rng.uniform(lo, hi, size)


def _count(rng, box):
    lo, hi = box["count"]
    return int(rng.integers(int(lo), int(hi) + 1))


def _fourier(rng, box, grid):
    x = grid.nodes()
    u = np.zeros(grid.size)
    for k in (1, 2, 3):
        a, b = _u(rng, box, f"a{k}"), _u(rng, box, f"b{k}")
        u += a * np.sin(2 * np.pi * k * x) + b * np.cos(2 * np.pi * k * x)
    return u


def _bumps(rng, box, grid):
    x = grid.nodes()
    u = np.zeros(grid.size)
    for _ in range(_count(rng, box)):
        h, c, w = _u(rng, box, "height"), _u(rng, box, "center"), _u(rng, box, "width")
        u += h * np.maximum(0.0, 1.0 - np.abs(x - c) / w)
    return u


def _overlap(lo, hi, m):
    """Fraction of each of the m unit-interval cells covered by [lo, hi]."""
    edges = np.arange(m + 1) / m
    return np.clip(np.minimum(edges[1:], hi) - np.maximum(edges[:-1], lo), 0.0, None) * m


def rectangle(grid: Grid, x0, y0, width, height, intensity=1.0) -> np.ndarray:
    """Area-weighted rendering of ``intensity * 1[x0, x0+w] x [y0, y0+h]``."""
    fx = _overlap(x0, x0 + width, grid.m)
    fy = _overlap(y0, y0 + height, grid.m)
    return intensity * np.outer(fy, fx).ravel()


_RECT_PARAMS = ("x0", "y0", "width", "height", "intensity")


def _phantom(rng, box, grid):
    u = np.zeros(grid.size)
    for k in range(1, _count(rng, box) + 1):
        u += rectangle(grid, *(_u(rng, box, f"{p}_{k}") for p in _RECT_PARAMS))
    return u


_GENERATORS = {"fourier_band": _fourier, "bump_mixture": _bumps, "image_phantom": _phantom}


def generate(spec: FamilySpec):
    """Draw (train, val, test) sample sets from independent seed streams."""
    grid = spec.grid
    gen = _GENERATORS[spec.kind]
    streams = np.random.SeedSequence(spec.seed).spawn(3)
    out = []
    for label, count, ss in zip(("train", "val", "test"), spec.counts, streams):
        rng = np.random.default_rng(ss)
        vals = np.array([[gen(rng, spec.box, grid) for _ in range(spec.n)]
                         for _ in range(count)])
        out.append(SampleSet(grid, vals, label))
    return tuple(out)


def norm_bound(spec: FamilySpec) -> float:
    """Analytic upper bound on the L2 norm of one component of any family member."""
    box = spec.box

    def amax(name):
        return max(abs(box[name][0]), abs(box[name][1]))

    if spec.kind == "fourier_band":
        return sum(amax(f"a{k}") + amax(f"b{k}") for k in (1, 2, 3))
    count = int(box["count"][1])
    if spec.kind == "bump_mixture":
        return count * amax("height")
    return sum(amax(f"intensity_{k}") for k in range(1, count + 1))


# --- reference functionals -------------------------------------------------

PHI = {
    "product": lambda a, b: a * b,
    "squares": lambda a, b: a**2 + b**2,
    "clipped": lambda a, b: np.minimum(1.0, a**2 + b**2),
}


def integral_functional(phi: str) -> Callable[[ProductPoint], float]:
    """``f(u, v) = int_0^1 Phi(u(x), v(x)) dx`` by the midpoint rule."""
    if phi not in PHI:
        raise UsageError(f"unknown bivariate form {phi!r}; choose from {sorted(PHI)}")
    form = PHI[phi]

    def f(x: ProductPoint) -> float:
        if x.n != 2:
            raise UsageError("integral functionals act on pairs (u, v)")
        u, v = x.components
        return float(u.grid.weight * np.sum(form(u.values, v.values)))

    f.name = phi
    return f


# --- toy tomography --------------------------------------------------------

_DIRECTIONS = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0)]


def radon_masks(grid: Grid, angles: int, bins: int) -> np.ndarray:
    """Indicator masks of line-sum bins, shape (angles * bins, grid.size).

    Angle 0 bins pixels by row, 1 by column, 2 by diagonal and 3 by
    anti-diagonal; each direction's projection range is split into ``bins``
    equal intervals.
    """
    if grid.dim != 2:
        raise UsageError("tomography needs a 2-D image grid")
    if not 1 <= angles <= len(_DIRECTIONS) or bins < 1:
        raise UsageError(f"angles must be in 1..{len(_DIRECTIONS)} and bins >= 1")
    iy, ix = np.divmod(np.arange(grid.size), grid.m)
    masks = []
    for cy, cx in _DIRECTIONS[:angles]:
        s = cy * iy + cx * ix
        lo, hi = s.min(), s.max()
        idx = np.minimum(((s - lo) * bins) // (hi - lo + 1), bins - 1).astype(int)
        for b in range(bins):
            masks.append((idx == b).astype(np.float64))
    return np.array(masks)


@dataclass(frozen=True)
class RadonMeasurements:
    """Line-sum bins viewed as linear functionals ``u -> <u, mask_j>``."""

    grid: Grid
    masks: np.ndarray

    @property
    def representers(self):
        return [GridFunction(self.grid, m) for m in self.masks]

    def measure(self, u) -> np.ndarray:
        vals = u.values if isinstance(u, GridFunction) else np.asarray(u).reshape(-1)
        return self.grid.weight * (self.masks @ vals)


def tomography_functional(grid: Grid, angles: int = 4, bins: int = 16):
    """Return ``(f, measurements)`` with ``f(u) = max`` sinogram bin of ``u``."""
    meas = RadonMeasurements(grid, radon_masks(grid, angles, bins))

    def f(x) -> float:
        u = x[0] if isinstance(x, ProductPoint) else x
        if u.grid != grid:
            raise UsageError("image is not on the tomography grid")
        return float(np.max(meas.measure(u)))

    f.name = "tomo"
    return f, meas


# --- image-to-image operator -----------------------------------------------

def gaussian_kernel(sigma_cells: float) -> np.ndarray:
    radius = int(np.ceil(3.0 * sigma_cells))
    t = np.arange(-radius, radius + 1)
    k = np.exp(-0.5 * (t / sigma_cells) ** 2)
    return k / k.sum()


def blur_operator(sigma_cells: float) -> Callable:
    """Separable truncated Gaussian blur with half-sample reflective boundary."""
    if not sigma_cells > 0:
        raise UsageError("sigma must be positive")
    k = gaussian_kernel(sigma_cells)

    def f(x) -> GridFunction:
        u = x[0] if isinstance(x, ProductPoint) else x
        if u.grid.dim != 2:
            raise UsageError("blur acts on 2-D images")
        img = u.image()
        img = ndimage.correlate1d(img, k, axis=0, mode="reflect")
        img = ndimage.correlate1d(img, k, axis=1, mode="reflect")
        return GridFunction(u.grid, img.ravel())

    f.name = "blur"
    f.sigma = sigma_cells
    return f
