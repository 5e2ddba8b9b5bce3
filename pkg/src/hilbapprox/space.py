"""Discretized L2 spaces on uniform midpoint grids and their finite products.

A :class:`GridFunction` is an element of H = L2 on [0, 1] or [0, 1]^2 sampled
at cell midpoints; the inner product is the midpoint quadrature rule, i.e. a
scaled dot product of value vectors. A :class:`ProductPoint` is an element of
H^n with the product norm ``||x||^2 = sum_i ||x_i||^2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import UsageError


@dataclass(frozen=True)
class Grid:
    """Uniform midpoint grid on the unit interval (dim 1) or square (dim 2)."""

    dim: int
    m: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise UsageError(f"grid dim must be 1 or 2, got {self.dim}")
        if int(self.m) != self.m or self.m < 1:
            raise UsageError(f"grid needs m >= 1 points per axis, got {self.m}")

    @property
    def weight(self) -> float:
        return 1.0 / self.m**self.dim

    @property
    def size(self) -> int:
        return self.m**self.dim

    @property
    def shape(self) -> tuple:
        return (self.m,) * self.dim

    def nodes(self) -> np.ndarray:
        """Cell midpoints; shape (m,) for dim 1 and (m*m, 2) for dim 2 (row-major)."""
        t = (np.arange(self.m) + 0.5) / self.m
        if self.dim == 1:
            return t
        yy, xx = np.meshgrid(t, t, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def sample(self, func) -> "GridFunction":
        """Evaluate ``func`` at the nodes (``func(x)`` or ``func(x, y)``)."""
        nodes = self.nodes()
        vals = func(nodes) if self.dim == 1 else func(nodes[:, 0], nodes[:, 1])
        return GridFunction(self, np.broadcast_to(vals, (self.size,)))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "m": self.m}

    @classmethod
    def from_dict(cls, d) -> "Grid":
        return cls(int(d["dim"]), int(d["m"]))


def _frozen(values, length):
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if arr.shape[0] != length:
        raise UsageError(f"expected {length} values, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise UsageError("grid function values must be finite")
    arr.setflags(write=False)
    return arr


class GridFunction:
    """Immutable sampled function on a :class:`Grid`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", _frozen(values, grid.size))

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction is immutable")

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.size))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.size, float(c)))

    def _check(self, other):
        if not isinstance(other, GridFunction) or other.grid != self.grid:
            raise UsageError("grid functions live on different grids")

    def __add__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, a):
        return GridFunction(self.grid, float(a) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __repr__(self):
        return f"GridFunction(dim={self.grid.dim}, m={self.grid.m})"

    def image(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)


class ProductPoint:
    """Element of H^n: an ordered tuple of grid functions on one grid."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[GridFunction]):
        comps = tuple(components)
        if len(comps) == 0:
            raise UsageError("a product point needs at least one component")
        grid = comps[0].grid
        for c in comps:
            if not isinstance(c, GridFunction):
                raise UsageError("components must be GridFunctions")
            if c.grid != grid:
                raise UsageError("all components must share one grid")
        object.__setattr__(self, "components", comps)

    def __setattr__(self, name, value):
        raise AttributeError("ProductPoint is immutable")

    @classmethod
    def from_array(cls, grid: Grid, values) -> "ProductPoint":
        arr = np.asarray(values, dtype=np.float64)
        arr = arr.reshape(-1, grid.size)
        return cls([GridFunction(grid, row) for row in arr])

    @classmethod
    def zeros(cls, grid: Grid, n: int) -> "ProductPoint":
        return cls([GridFunction.zeros(grid) for _ in range(n)])

    @property
    def grid(self) -> Grid:
        return self.components[0].grid

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def values(self) -> np.ndarray:
        """Stacked component values, shape (n, grid.size)."""
        return np.stack([c.values for c in self.components])

    def _check(self, other):
        if not isinstance(other, ProductPoint) or other.n != self.n or other.grid != self.grid:
            raise UsageError("product points have different shapes")

    def __add__(self, other):
        self._check(other)
        return ProductPoint([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        self._check(other)
        return ProductPoint([a - b for a, b in zip(self.components, other.components)])

    def __mul__(self, a):
        return ProductPoint([c * a for c in self.components])

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __getitem__(self, i) -> GridFunction:
        return self.components[i]

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"ProductPoint(n={self.n}, dim={self.grid.dim}, m={self.grid.m})"


Vector = Union[GridFunction, ProductPoint]


def inner(u: GridFunction, v: GridFunction) -> float:
    """Midpoint-rule L2 inner product ``weight * sum(u_i v_i)``."""
    if not isinstance(u, GridFunction) or not isinstance(v, GridFunction):
        raise UsageError("inner expects two GridFunctions")
    u._check(v)
    return float(u.grid.weight * np.dot(u.values, v.values))


def norm(u: GridFunction) -> float:
    return float(np.sqrt(max(inner(u, u), 0.0)))


def prod_inner(x: ProductPoint, y: ProductPoint) -> float:
    x._check(y)
    return float(sum(inner(a, b) for a, b in zip(x.components, y.components)))


def prod_norm(x: ProductPoint) -> float:
    return float(np.sqrt(max(prod_inner(x, x), 0.0)))


def scale(x: Vector, a: float) -> Vector:
    return x * a


def sub(x: Vector, y: Vector) -> Vector:
    return x - y


def axpy(a: float, x: Vector, y: Vector) -> Vector:
    """Return ``a * x + y``."""
    return x * a + y


def distances(weight: float, X: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Product-norm distances from each row of ``X`` to ``c``.

    ``X`` holds flattened points (rows of length n * grid.size), ``c`` one
    flattened point and ``weight`` the grid's quadrature weight. Every coverage test in the package goes through this
    function so that nets and their checks use identical arithmetic.
    """
    diff = np.asarray(X) - np.asarray(c)
    return np.sqrt(weight * np.einsum("ij,ij->i", diff, diff))
