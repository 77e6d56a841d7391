"""Weight constructors and numerical estimates of their doubling / A_p behaviour.

A weight here is a strictly positive grid function; w(E) denotes its integral
over E.  The characteristic estimators scan a finite cube family, so they
report observed values over that family and never claim tight constants.
Cubes whose doubled copy leaves the domain box would have their ratio
distorted by clipping; such cubes are flagged and excluded by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.special import roots_legendre

from .errors import ConfigError
from .grid import Cube, CubeFamily, GridFunction, GridSpec, integrate, overlap_volume

__all__ = [
    "Weight",
    "WeightCharacteristics",
    "constant_weight",
    "power_weight",
    "power_product_weight",
    "table_weight",
    "weighted_measure",
    "doubling_constant",
    "reverse_doubling_constant",
    "ap_constant",
    "ainfty_fit",
    "holder_step",
    "characteristics",
    "AINFTY_DELTA_GRID",
]

AINFTY_DELTA_GRID = tuple(round(0.05 * k, 2) for k in range(1, 21))


@dataclass(frozen=True, eq=False)
class Weight:
    """Strictly positive grid function with a constructor tag."""

    fn: GridFunction
    tag: str

    def __post_init__(self):
        if not np.all(self.fn.values > 0.0):
            raise ConfigError(f"weight '{self.tag}' must be strictly positive on the grid")

    @property
    def spec(self) -> GridSpec:
        return self.fn.spec

    @property
    def values(self) -> np.ndarray:
        return self.fn.values

    def pow(self, exponent: float) -> GridFunction:
        """Pointwise power of the grid values (finite because values are positive)."""
        return GridFunction(self.spec, self.values**exponent)


@dataclass(frozen=True)
class WeightCharacteristics:
    doubling_sup: float
    reverse_doubling_inf: float
    ap_constant: Mapping[float, float]
    ainfty_delta: float
    ainfty_c: float


def constant_weight(spec: GridSpec, c: float = 1.0) -> Weight:
    if not (math.isfinite(c) and c > 0):
        raise ConfigError(f"constant weight needs c > 0, got {c}")
    return Weight(GridFunction(spec, np.full(spec.shape, float(c))), tag=f"constant({c})")


def _axis_power_means(spec: GridSpec, a: float) -> np.ndarray:
    """Exact cell means of |t|^a along one axis (0 is always a cell edge)."""
    edges = spec.axis_edges()
    lo = np.minimum(np.abs(edges[:-1]), np.abs(edges[1:]))
    hi = np.maximum(np.abs(edges[:-1]), np.abs(edges[1:]))
    return (hi ** (a + 1.0) - lo ** (a + 1.0)) / ((a + 1.0) * spec.h)


def power_weight(spec: GridSpec, a: float) -> Weight:
    """|x|^a with cell values chosen as cell averages.

    In 1-D the averages are exact (closed-form antiderivative); in 2-D the
    radial power is averaged by a 3x3 Gauss-Legendre rule per cell.  Requires
    a > -dim so the weight is locally integrable.
    """
    if a <= -spec.dim:
        raise ConfigError(f"power weight needs a > -dim = {-spec.dim}, got {a}")
    if spec.dim == 1:
        vals = _axis_power_means(spec, a)
    else:
        nodes, wts = roots_legendre(3)
        centers = spec.axis_centers()
        half = spec.h / 2.0
        x1 = centers[:, None, None, None] + half * nodes[None, None, :, None]
        x2 = centers[None, :, None, None] + half * nodes[None, None, None, :]
        r2 = x1**2 + x2**2
        quad_w = wts[:, None] * wts[None, :] / 4.0
        vals = np.einsum("ijab,ab->ij", r2 ** (a / 2.0), quad_w)
    return Weight(GridFunction(spec, vals), tag=f"power({a})")


def power_product_weight(spec: GridSpec, exponents) -> Weight:
    """Product of per-axis powers |x_1|^{a_1} * ... with exact cell averages."""
    exps = [float(e) for e in exponents]
    if len(exps) != spec.dim:
        raise ConfigError(f"need {spec.dim} exponents, got {len(exps)}")
    for e in exps:
        if e <= -1.0:
            raise ConfigError(f"per-axis exponent must be > -1, got {e}")
    axes = [_axis_power_means(spec, e) for e in exps]
    vals = axes[0] if spec.dim == 1 else np.outer(axes[0], axes[1])
    return Weight(GridFunction(spec, vals), tag=f"power_product({exps})")


def table_weight(spec: GridSpec, values) -> Weight:
    return Weight(GridFunction(spec, np.asarray(values, dtype=float)), tag="table")


def weighted_measure(w: Weight, cube: Cube) -> float:
    """w(Q ∩ domain)."""
    return integrate(w.fn, cube)


def _dilation_ratios(w: Weight, family: CubeFamily, include_clipped: bool):
    """Ratios w(2Q ∩ domain) / w(Q) per cube; cubes with 2Q escaping are flagged."""
    if len(family) == 0:
        raise ValueError("empty cube family")
    spec = w.spec
    L = spec.half_width
    ratios, flagged = [], 0
    for q in family:
        doubled = q.dilate(2.0)
        inside = all(abs(c) + doubled.side / 2 <= L + 1e-12 * L for c in doubled.center)
        if not inside:
            flagged += 1
            if not include_clipped:
                continue
        ratios.append(weighted_measure(w, doubled) / weighted_measure(w, q))
    if not ratios:
        raise ValueError("no usable cubes: every dilation leaves the domain")
    return np.asarray(ratios), flagged


def doubling_constant(w: Weight, family: CubeFamily, include_clipped: bool = False) -> float:
    """Largest observed w(2Q)/w(Q) over the family."""
    ratios, _ = _dilation_ratios(w, family, include_clipped)
    return float(ratios.max())


def reverse_doubling_constant(
    w: Weight, family: CubeFamily, include_clipped: bool = False
) -> float:
    """Smallest observed w(2Q)/w(Q); values <= 1 signal a cube escaping the domain."""
    ratios, _ = _dilation_ratios(w, family, include_clipped)
    return float(ratios.min())


def ap_constant(w: Weight, p: float, family: CubeFamily) -> float:
    """Observed Muckenhoupt constant: sup_Q (avg_Q w)^{1/p} (avg_Q w^{-p'/p})^{1/p'}."""
    if not p > 1:
        raise ConfigError(f"ap_constant needs p > 1, got {p}")
    if len(family) == 0:
        raise ValueError("empty cube family")
    pprime = p / (p - 1.0)
    w_dual = w.pow(-pprime / p)
    best = 0.0
    for q in family:
        vol = overlap_volume(w.spec, q)
        avg_w = integrate(w.fn, q) / vol
        avg_dual = integrate(w_dual, q) / vol
        best = max(best, avg_w ** (1.0 / p) * avg_dual ** (1.0 / pprime))
    return float(best)


def _dyadic_subboxes(cube: Cube, max_count: int) -> list[Cube]:
    """The cube itself plus dyadic sub-boxes, depth by depth, up to max_count."""
    out = [cube]
    depth = 1
    while len(out) < max_count:
        per_axis = 2**depth
        side = cube.side / per_axis
        lows = [c - cube.side / 2 for c in cube.center]
        import itertools as _it

        for pos in _it.product(range(per_axis), repeat=cube.dim):
            center = tuple(lo + (k + 0.5) * side for lo, k in zip(lows, pos))
            out.append(Cube(center, side))
            if len(out) >= max_count:
                break
        depth += 1
        if depth > 8:
            break
    return out[:max_count]


def ainfty_fit(
    w: Weight,
    family: CubeFamily,
    subsets_per_cube: int = 32,
    c_cap: float = 1e6,
) -> tuple[float, float]:
    """Fit (delta, C) such that w(E)/w(Q) <= C (|E|/|Q|)^delta on sampled sub-boxes.

    E ranges over dyadic sub-boxes of each Q (including E = Q).  delta is taken
    from a fixed coarse grid {0.05, ..., 1.0}: the largest value whose fitted C
    stays below c_cap wins, which keeps the fit reproducible.
    """
    if subsets_per_cube < 1:
        raise ConfigError(f"subsets_per_cube must be >= 1, got {subsets_per_cube}")
    if len(family) == 0:
        raise ValueError("empty cube family")
    w_ratios, vol_ratios = [], []
    for q in family:
        wq = weighted_measure(w, q)
        vq = overlap_volume(w.spec, q)
        for e in _dyadic_subboxes(q, subsets_per_cube):
            w_ratios.append(weighted_measure(w, e) / wq)
            vol_ratios.append(overlap_volume(w.spec, e) / vq)
    w_ratios = np.asarray(w_ratios)
    vol_ratios = np.asarray(vol_ratios)
    for delta in sorted(AINFTY_DELTA_GRID, reverse=True):
        c_fit = float(np.max(w_ratios / vol_ratios**delta))
        if c_fit <= c_cap:
            return float(delta), c_fit
    delta = AINFTY_DELTA_GRID[0]
    return float(delta), float(np.max(w_ratios / vol_ratios**delta))


def holder_step(w: Weight, cube: Cube, r: float) -> tuple[float, float, bool]:
    """Check w(E) <= |E|^{1/r'} (∫_E w^r)^{1/r} on E = cube ∩ domain.

    This is an instance of Hoelder's inequality on the discrete model and must
    never fail beyond rounding; the checker exists so that the property is
    exercised on exactly the data the scans use.
    """
    if not r > 1:
        raise ConfigError(f"holder_step needs r > 1, got {r}")
    rprime = r / (r - 1.0)
    lhs = weighted_measure(w, cube)
    vol = overlap_volume(w.spec, cube)
    rhs = vol ** (1.0 / rprime) * integrate(w.pow(r), cube) ** (1.0 / r)
    return lhs, rhs, bool(lhs <= rhs * (1.0 + 1e-10))


def characteristics(
    w: Weight,
    family: CubeFamily,
    ps: tuple[float, ...] = (1.5, 2.0, 3.0),
    subsets_per_cube: int = 32,
) -> WeightCharacteristics:
    delta, c_fit = ainfty_fit(w, family, subsets_per_cube)
    return WeightCharacteristics(
        doubling_sup=doubling_constant(w, family),
        reverse_doubling_inf=reverse_doubling_constant(w, family),
        ap_constant={p: ap_constant(w, p, family) for p in ps},
        ainfty_delta=delta,
        ainfty_c=c_fit,
    )
