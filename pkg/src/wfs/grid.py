"""Uniform grids on a truncated box: piecewise-constant functions, cubes, exact integration.

Functions are modelled as constant on each grid cell, so every box integral
reduces to an overlap-weighted sum of cell values and is exact for that model.
Boundary cells are weighted by their fractional overlap with the integration
box, which removes the O(h) bias a cell-in/cell-out rule would introduce.

All types are immutable after construction and all operations are pure, so
callers may fan out work over cubes or scales without coordination.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "GridSpec",
    "GridFunction",
    "Cube",
    "CubeFamily",
    "integrate",
    "overlap_volume",
    "overlap_volumes",
    "make_cube_family",
    "sliding_box_integral",
    "cell_index_at",
    "cell_as_cube",
    "centers_in_cube",
    "grid_points",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-half_width, half_width]^dim.

    Cell centers sit at -L + (i + 1/2)h with h = 2L/N, so no center coincides
    with the origin (cells_per_axis is required to be even); power weights
    |x|^a with a < 0 therefore stay finite at every sample point.
    """

    dim: int
    half_width: float
    cells_per_axis: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise ConfigError(f"half_width must be a finite positive real, got {self.half_width}")
        n = self.cells_per_axis
        if not isinstance(n, int) or n < 2 or n % 2 != 0:
            raise ConfigError(f"cells_per_axis must be an even integer >= 2, got {n}")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.cells_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells_per_axis,) * self.dim

    @property
    def n_cells(self) -> int:
        return self.cells_per_axis**self.dim

    def axis_edges(self) -> np.ndarray:
        return -self.half_width + self.h * np.arange(self.cells_per_axis + 1)

    def axis_centers(self) -> np.ndarray:
        return -self.half_width + self.h * (np.arange(self.cells_per_axis) + 0.5)

    def domain(self) -> "Cube":
        return Cube(center=(0.0,) * self.dim, side=2.0 * self.half_width)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Piecewise-constant function: one value per cell, shaped (N,) or (N, N).

    In 2-D, ``values[i, j]`` is the value on the cell whose center is
    ``(axis_centers()[i], axis_centers()[j])``.
    """

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.size != self.spec.n_cells:
            raise ConfigError(
                f"values has {arr.size} entries, grid has {self.spec.n_cells} cells"
            )
        arr = arr.reshape(self.spec.shape).copy()
        if not np.all(np.isfinite(arr)):
            raise ConfigError("grid function values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def map(self, fn) -> "GridFunction":
        return GridFunction(self.spec, fn(self.values))

    def __abs__(self) -> "GridFunction":
        return GridFunction(self.spec, np.abs(self.values))


@dataclass(frozen=True)
class Cube:
    """Axis-parallel cube given by its center and side length.

    ``dilate(lam)`` follows the convention that the dilated cube is concentric
    with side length lam * sqrt(dim) times the original, so in particular
    |2Q| / |Q| = (2 sqrt(dim))^dim.
    """

    center: tuple[float, ...]
    side: float

    def __post_init__(self):
        c = tuple(float(x) for x in self.center)
        object.__setattr__(self, "center", c)
        if not (math.isfinite(self.side) and self.side > 0):
            raise ConfigError(f"cube side must be a finite positive real, got {self.side}")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return self.side**self.dim

    def bounds(self) -> list[tuple[float, float]]:
        half = 0.5 * self.side
        return [(c - half, c + half) for c in self.center]

    def dilate(self, lam: float) -> "Cube":
        return Cube(self.center, lam * math.sqrt(self.dim) * self.side)

    def contains(self, point) -> bool:
        half = 0.5 * self.side
        return all(abs(float(x) - c) <= half for x, c in zip(point, self.center))


@dataclass(frozen=True)
class CubeFamily:
    """Finite, deterministically ordered collection of cubes."""

    cubes: tuple[Cube, ...]
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "cubes", tuple(self.cubes))

    def __len__(self) -> int:
        return len(self.cubes)

    def __iter__(self):
        return iter(self.cubes)

    def __getitem__(self, idx: int) -> Cube:
        return self.cubes[idx]

    def sides(self) -> list[float]:
        """Distinct side lengths, largest first."""
        return sorted({q.side for q in self.cubes}, reverse=True)


def _axis_overlaps(spec: GridSpec, lo: float, hi: float) -> np.ndarray:
    """Length of [lo, hi] inside each cell along one axis (clipped to the domain)."""
    edges = spec.axis_edges()
    left = np.maximum(edges[:-1], lo)
    right = np.minimum(edges[1:], hi)
    return np.maximum(right - left, 0.0)


def overlap_volumes(spec: GridSpec, cube: Cube) -> np.ndarray:
    """Volume of cube-domain overlap per cell, shaped like a GridFunction's values."""
    if cube.dim != spec.dim:
        raise ConfigError(f"cube dim {cube.dim} != grid dim {spec.dim}")
    axes = [_axis_overlaps(spec, lo, hi) for lo, hi in cube.bounds()]
    if spec.dim == 1:
        return axes[0]
    return np.outer(axes[0], axes[1])


def overlap_volume(spec: GridSpec, cube: Cube) -> float:
    """Measure of the cube intersected with the domain box."""
    if cube.dim != spec.dim:
        raise ConfigError(f"cube dim {cube.dim} != grid dim {spec.dim}")
    vol = 1.0
    for lo, hi in cube.bounds():
        vol *= float(_axis_overlaps(spec, lo, hi).sum())
    return vol


def integrate(f: GridFunction, cube: Cube) -> float:
    """Integral of f over cube ∩ domain; exact for the piecewise-constant model.

    Raises ValueError("empty intersection") when the cube misses the domain.
    """
    spec = f.spec
    if cube.dim != spec.dim:
        raise ConfigError(f"cube dim {cube.dim} != grid dim {spec.dim}")
    axes = [_axis_overlaps(spec, lo, hi) for lo, hi in cube.bounds()]
    if any(float(a.sum()) == 0.0 for a in axes):
        raise ValueError("empty intersection")
    if spec.dim == 1:
        return float(axes[0] @ f.values)
    return float(axes[0] @ (f.values @ axes[1]))


def cell_index_at(spec: GridSpec, point) -> tuple[int, ...]:
    """Index of the cell containing the point (clamped to the domain box)."""
    idx = []
    for x in point:
        k = int(math.floor((float(x) + spec.half_width) / spec.h))
        idx.append(min(max(k, 0), spec.cells_per_axis - 1))
    return tuple(idx)


def cell_as_cube(spec: GridSpec, idx: tuple[int, ...]) -> Cube:
    centers = spec.axis_centers()
    return Cube(center=tuple(float(centers[k]) for k in idx), side=spec.h)


def centers_in_cube(spec: GridSpec, cube: Cube) -> np.ndarray:
    """Boolean mask (shaped like values) of cells whose center lies in the cube."""
    centers = spec.axis_centers()
    half = 0.5 * cube.side
    masks = [np.abs(centers - c) <= half for c in cube.center]
    if spec.dim == 1:
        return masks[0]
    return np.outer(masks[0], masks[1])


def grid_points(spec: GridSpec) -> np.ndarray:
    """Cell-center coordinates, shape (n_cells, dim), in row-major cell order."""
    centers = spec.axis_centers()
    if spec.dim == 1:
        return centers.reshape(-1, 1)
    x1, x2 = np.meshgrid(centers, centers, indexing="ij")
    return np.column_stack([x1.ravel(), x2.ravel()])


def make_cube_family(spec: GridSpec, depth: int, translations: int = 1) -> CubeFamily:
    """Dyadic subcubes of the domain box up to `depth`, plus shifted copies.

    Each dyadic cube of side l is additionally shifted by every nonzero vector
    on the lattice of step l / translations (per axis); shifted copies that
    would leave the domain box are dropped.  The order is deterministic:
    scale-major, then cube position, then shift vector.
    """
    if depth < 0:
        raise ConfigError(f"depth must be >= 0, got {depth}")
    if translations < 1:
        raise ConfigError(f"translations must be >= 1, got {translations}")
    L = spec.half_width
    cubes: list[Cube] = []
    for level in range(depth + 1):
        per_axis = 2**level
        side = 2.0 * L / per_axis
        base_centers = [-L + (i + 0.5) * side for i in range(per_axis)]
        shift_vectors = [
            t
            for t in itertools.product(range(translations), repeat=spec.dim)
            if any(t)
        ]
        for pos in itertools.product(range(per_axis), repeat=spec.dim):
            center = tuple(base_centers[i] for i in pos)
            cubes.append(Cube(center, side))
            for t in shift_vectors:
                shifted = tuple(
                    c + side * tk / translations for c, tk in zip(center, t)
                )
                tol = 1e-12 * L
                if all(abs(c) + side / 2 <= L + tol for c in shifted):
                    cubes.append(Cube(shifted, side))
    desc = f"dyadic-depth-{depth}-translations-{translations}"
    return CubeFamily(tuple(cubes), desc)


def _sliding_axis(spec: GridSpec, arr: np.ndarray, side: float) -> np.ndarray:
    """Integrate arr along its last axis over the window [c_i - side/2, c_i + side/2].

    The window is clipped to the domain.  Exact for piecewise-constant data:
    the fractional prefix integral S(x) is evaluated at the (clipped) window
    endpoints for every cell center at once.
    """
    n = spec.cells_per_axis
    h = spec.h
    s = side / (2.0 * h)
    i = np.arange(n)
    a = np.clip(i + 0.5 - s, 0.0, float(n))
    b = np.clip(i + 0.5 + s, 0.0, float(n))
    csum = np.cumsum(arr, axis=-1)
    zeros = np.zeros(arr.shape[:-1] + (1,), dtype=float)
    prefix = np.concatenate([zeros, csum], axis=-1)

    def fractional_prefix(x: np.ndarray) -> np.ndarray:
        k = np.minimum(np.floor(x).astype(int), n - 1)
        frac = x - k
        return prefix[..., k] + frac * arr[..., k]

    return (fractional_prefix(b) - fractional_prefix(a)) * h


def sliding_box_integral(spec: GridSpec, values: np.ndarray, side: float) -> np.ndarray:
    """Integral of `values` over Q(y, side) ∩ domain for every cell center y.

    Returns an array shaped like `values`.  The cube is separable, so the 2-D
    case applies the 1-D window along each axis in turn.
    """
    arr = np.asarray(values, dtype=float)
    if arr.shape != spec.shape:
        raise ConfigError(f"values shape {arr.shape} != grid shape {spec.shape}")
    if spec.dim == 1:
        return _sliding_axis(spec, arr, side)
    out = _sliding_axis(spec, arr, side)
    out = _sliding_axis(spec, out.T, side).T
    return out
