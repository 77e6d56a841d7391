"""Norm functionals: weighted Lp, weak Lp, Morrey, amalgam, and mean-oscillation norms.

Sup-type norms are computed over finite declared families (cube families or
scale grids), so each result is a lower bound for the true supremum; every
NormResult carries the family metadata so comparisons are like-with-like.

Weak norms never sample the level parameter: on a grid the distribution
function is a right-continuous step function, so the supremum is attained as
the level increases to one of the finitely many values of |f| and is computed
exactly from the sorted value list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .grid import (
    Cube,
    CubeFamily,
    GridFunction,
    GridSpec,
    integrate,
    overlap_volume,
    overlap_volumes,
    sliding_box_integral,
)
from .weights import Weight

__all__ = [
    "ExponentSet",
    "NormResult",
    "lp_norm",
    "distribution",
    "weak_lp_norm",
    "morrey_norm",
    "weak_morrey_norm",
    "amalgam_norm",
    "weak_amalgam_norm",
    "bmo_norm",
    "bmo_ls_norm",
    "default_ell_grid",
]

_REL_EQ = 1e-12


@dataclass(frozen=True)
class ExponentSet:
    """Exponent tuple with every consistency relation validated at construction.

    gamma: operator order, 0 < gamma (checked against the grid dimension where
    one is known); 1 < p <= q; kappa in [0, p/q]; p <= alpha <= s with
    1/beta = 1/alpha - (1/p - 1/q) when beta is given; r > 1; m >= 1.
    """

    gamma: float
    p: float
    q: float
    kappa: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    s: Optional[float] = None
    r: Optional[float] = None
    m: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigError(f"gamma must satisfy 0 < gamma < dim, got {self.gamma}")
        if not (math.isfinite(self.p) and self.p > 1):
            raise ConfigError(f"p must satisfy 1 < p, got {self.p}")
        if not (math.isfinite(self.q) and self.q >= self.p):
            raise ConfigError(f"q must satisfy p <= q < inf, got q={self.q} with p={self.p}")
        if self.kappa is not None:
            if not (0.0 <= self.kappa <= self.p / self.q + _REL_EQ):
                raise ConfigError(
                    f"kappa must lie in [0, p/q] = [0, {self.p / self.q}], got {self.kappa}"
                )
        if self.alpha is not None:
            if not self.alpha >= self.p:
                raise ConfigError(f"alpha must satisfy p <= alpha, got {self.alpha} with p={self.p}")
            if self.s is not None and not (self.alpha <= self.s):
                raise ConfigError(
                    f"exponents must satisfy alpha <= s, got alpha={self.alpha}, s={self.s}"
                )
        if self.beta is not None:
            if self.alpha is None:
                raise ConfigError("beta given without alpha")
            expected = 1.0 / self.alpha - (1.0 / self.p - 1.0 / self.q)
            if abs(1.0 / self.beta - expected) > _REL_EQ:
                raise ConfigError(
                    "beta must satisfy 1/beta = 1/alpha - (1/p - 1/q); "
                    f"got 1/beta = {1.0 / self.beta}, expected {expected}"
                )
        if self.r is not None and not self.r > 1:
            raise ConfigError(f"r must satisfy r > 1, got {self.r}")
        if not (isinstance(self.m, int) and self.m >= 1):
            raise ConfigError(f"m must be an integer >= 1, got {self.m}")

    @property
    def pprime(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def qprime(self) -> float:
        return self.q / (self.q - 1.0)

    @property
    def rprime(self) -> float:
        if self.r is None:
            raise ConfigError("r is not set")
        return self.r / (self.r - 1.0)

    def validate_gamma(self, dim: int) -> None:
        if not self.gamma < dim:
            raise ConfigError(f"gamma must satisfy 0 < gamma < dim = {dim}, got {self.gamma}")

    @property
    def is_endpoint_kappa(self) -> bool:
        """kappa == p/q: the mean-oscillation endpoint of the Morrey-scale result."""
        return self.kappa is not None and abs(self.kappa - self.p / self.q) <= _REL_EQ

    @property
    def is_endpoint_s(self) -> bool:
        """1/s == 1/alpha - (1/p - 1/q): the endpoint of the amalgam-scale result."""
        if self.s is None or self.alpha is None or math.isinf(self.s):
            return False
        expected = 1.0 / self.alpha - (1.0 / self.p - 1.0 / self.q)
        return abs(1.0 / self.s - expected) <= _REL_EQ

    def beta_from_alpha(self) -> float:
        if self.alpha is None:
            raise ConfigError("alpha is not set")
        inv = 1.0 / self.alpha - (1.0 / self.p - 1.0 / self.q)
        if inv <= 0:
            raise ConfigError("1/alpha - (1/p - 1/q) must be positive to define beta")
        return 1.0 / inv

    def to_params(self) -> dict:
        out = {"gamma": self.gamma, "p": self.p, "q": self.q, "m": self.m}
        for name in ("kappa", "alpha", "beta", "s", "r"):
            val = getattr(self, name)
            if val is not None:
                out[name] = "inf" if isinstance(val, float) and math.isinf(val) else val
        return out


@dataclass(frozen=True)
class NormResult:
    """Value of a sup-type norm plus where and over what it was attained."""

    value: float
    norm_id: str
    params: dict = field(default_factory=dict)
    family_meta: dict = field(default_factory=dict)
    witness: Optional[dict] = None


def lp_norm(f: GridFunction, w: Weight, p: float) -> float:
    """Weighted p-norm over the whole (truncated) domain."""
    if not p >= 1:
        raise ConfigError(f"lp_norm needs p >= 1, got {p}")
    cell_vol = f.spec.h ** f.spec.dim
    total = float(((np.abs(f.values) ** p) * w.values).sum() * cell_vol)
    return total ** (1.0 / p)


def distribution(f: GridFunction, w: Weight, lam: float) -> float:
    """w-measure of the strict super-level set {|f| > lam}."""
    if not lam > 0:
        raise ConfigError(f"distribution needs lam > 0, got {lam}")
    cell_vol = f.spec.h ** f.spec.dim
    mask = np.abs(f.values) > lam
    return float(w.values[mask].sum() * cell_vol)


def _weak_sup(vals: np.ndarray, masses: np.ndarray, p: float) -> tuple[float, float]:
    """max over distinct v > 0 of v * (sum of masses where |f| >= v)^{1/p}.

    Returns (sup, argmax level).  Exact: the level supremum of a step-function
    distribution is attained in the limit from below at a value of |f|.
    """
    pos = vals > 0.0
    if not pos.any():
        return 0.0, 0.0
    v = vals[pos]
    m = masses[pos]
    order = np.argsort(v)[::-1]
    v_sorted = v[order]
    cum = np.cumsum(m[order])
    uniq, last_idx = np.unique(v_sorted[::-1], return_index=True)
    # measure of {|f| >= u} for each distinct u (uniq ascending)
    measures = cum[len(v_sorted) - 1 - last_idx]
    scores = uniq * measures ** (1.0 / p)
    k = int(np.argmax(scores))
    return float(scores[k]), float(uniq[k])


def weak_lp_norm(
    f: GridFunction, w: Weight, p: float, restrict: Optional[Cube] = None
) -> float:
    """Exact weak p-quasinorm sup_{lam>0} lam * w({|f| > lam})^{1/p}.

    With `restrict` given, the super-level sets are intersected with the cube
    (clipped to the domain, boundary cells weighted fractionally).
    """
    if not p >= 1:
        raise ConfigError(f"weak_lp_norm needs p >= 1, got {p}")
    spec = f.spec
    if restrict is None:
        vols = np.full(spec.n_cells, spec.h**spec.dim)
    else:
        vols = overlap_volumes(spec, restrict).ravel()
    vals = np.abs(f.values).ravel()
    sup, _ = _weak_sup(vals, w.values.ravel() * vols, p)
    return sup


def morrey_norm(
    f: GridFunction, nu: Weight, w: Weight, p: float, kappa: float, family: CubeFamily
) -> NormResult:
    """sup over the family of (w(Q)^{-kappa} ∫_Q |f|^p nu)^{1/p}, with witness cube."""
    if not (0.0 <= kappa < 1.0):
        raise ConfigError(f"kappa must lie in [0, 1) for the Morrey norm, got {kappa}")
    if len(family) == 0:
        raise ValueError("empty cube family")
    dens = GridFunction(f.spec, np.abs(f.values) ** p * nu.values)
    best, best_cube = -math.inf, None
    for q_cube in family:
        wq = integrate(w.fn, q_cube)
        val = (integrate(dens, q_cube) / wq**kappa) ** (1.0 / p)
        if val > best:
            best, best_cube = val, q_cube
    return NormResult(
        value=float(best),
        norm_id="morrey",
        params={"p": p, "kappa": kappa},
        family_meta={"cubes": len(family), "description": family.description},
        witness={"center": list(best_cube.center), "side": best_cube.side},
    )


def weak_morrey_norm(
    f: GridFunction, w: Weight, p: float, kappa: float, family: CubeFamily
) -> NormResult:
    """sup over cubes and levels of w(Q)^{-kappa/p} * lam * w({x in Q: |f|>lam})^{1/p}."""
    if not (0.0 <= kappa < 1.0):
        raise ConfigError(f"kappa must lie in [0, 1) for the weak Morrey norm, got {kappa}")
    if len(family) == 0:
        raise ValueError("empty cube family")
    best, best_cube = -math.inf, None
    for q_cube in family:
        wq = integrate(w.fn, q_cube)
        inner = weak_lp_norm(f, w, p, restrict=q_cube)
        val = inner / wq ** (kappa / p)
        if val > best:
            best, best_cube = val, q_cube
    return NormResult(
        value=float(best),
        norm_id="weak_morrey",
        params={"p": p, "kappa": kappa},
        family_meta={"cubes": len(family), "description": family.description},
        witness={"center": list(best_cube.center), "side": best_cube.side},
    )


def default_ell_grid(spec: GridSpec, points: int = 12) -> np.ndarray:
    """Geometric scale grid from 4h to the half-width: spans scales without
    degenerate one-cell cubes."""
    return np.geomspace(4.0 * spec.h, spec.half_width, points)


def _ls_over_centers(
    spec: GridSpec, expr: np.ndarray, include: np.ndarray, mu: Weight, s: float
) -> float:
    """L^s(mu) norm over cell centers y of expr(y); excluded centers contribute 0."""
    if math.isinf(s):
        vals = expr[include]
        return float(vals.max()) if vals.size else 0.0
    cell_vol = spec.h**spec.dim
    contrib = np.where(include, expr, 0.0) ** s * mu.values
    return float((contrib.sum() * cell_vol) ** (1.0 / s))


def amalgam_norm(
    f: GridFunction,
    nu: Weight,
    w: Weight,
    mu: Weight,
    p: float,
    s: float,
    alpha: float,
    ell_grid,
) -> NormResult:
    """sup over scales of || w(Q(y,l))^{1/alpha-1/p-1/s} ||f chi_Q||_{L^p(nu)} ||_{L^s(mu)}.

    The inner expression is evaluated at every cell center y with the cube
    clipped to the domain; centers whose cube is more than half outside the
    domain are excluded from the L^s integral and counted in the metadata.
    """
    ells = [float(l) for l in np.atleast_1d(ell_grid)]
    if not ells:
        raise ConfigError("ell_grid must be nonempty")
    if not (p <= alpha <= s):
        raise ConfigError(f"exponents must satisfy p <= alpha <= s, got p={p}, alpha={alpha}, s={s}")
    spec = f.spec
    e = 1.0 / alpha - 1.0 / p - (0.0 if math.isinf(s) else 1.0 / s)
    dens = np.abs(f.values) ** p * nu.values
    best, best_ell, excluded = -math.inf, None, {}
    for ell in ells:
        wq = sliding_box_integral(spec, w.values, ell)
        inner = sliding_box_integral(spec, dens, ell) ** (1.0 / p)
        vol = sliding_box_integral(spec, np.ones(spec.shape), ell)
        include = vol >= 0.5 * ell**spec.dim
        excluded[ell] = int((~include).sum())
        val = _ls_over_centers(spec, wq**e * inner, include, mu, s)
        if val > best:
            best, best_ell = val, ell
    return NormResult(
        value=float(best),
        norm_id="amalgam",
        params={"p": p, "s": "inf" if math.isinf(s) else s, "alpha": alpha},
        family_meta={"ells": ells, "excluded_centers": excluded},
        witness={"ell": best_ell},
    )


def weak_amalgam_norm(
    f: GridFunction,
    w: Weight,
    mu: Weight,
    q: float,
    s: float,
    beta: float,
    ell_grid,
) -> NormResult:
    """Weak-inner-norm version: || w(Q)^{1/beta-1/q-1/s} ||f chi_Q||_{weak-q,w} ||_{L^s(mu)}.

    The restricted weak norm at every center is assembled exactly: for each
    distinct value v of |f| (descending), a sliding window accumulates the
    w-mass of {|f| >= v} inside Q(y, l), and the running maximum of
    v * mass^{1/q} is kept per center.
    """
    ells = [float(l) for l in np.atleast_1d(ell_grid)]
    if not ells:
        raise ConfigError("ell_grid must be nonempty")
    spec = f.spec
    e = 1.0 / beta - 1.0 / q - (0.0 if math.isinf(s) else 1.0 / s)
    absvals = np.abs(f.values)
    uniq = np.unique(absvals)
    uniq = uniq[uniq > 0.0][::-1]  # descending positive levels
    best, best_ell, excluded = -math.inf, None, {}
    for ell in ells:
        wq = sliding_box_integral(spec, w.values, ell)
        vol = sliding_box_integral(spec, np.ones(spec.shape), ell)
        include = vol >= 0.5 * ell**spec.dim
        excluded[ell] = int((~include).sum())
        running_mass = np.zeros(spec.shape)
        inner = np.zeros(spec.shape)
        for v in uniq:
            increment = np.where(absvals == v, w.values, 0.0)
            running_mass = running_mass + sliding_box_integral(spec, increment, ell)
            np.maximum(inner, v * running_mass ** (1.0 / q), out=inner)
        val = _ls_over_centers(spec, wq**e * inner, include, mu, s)
        if val > best:
            best, best_ell = val, ell
    return NormResult(
        value=float(best),
        norm_id="weak_amalgam",
        params={"q": q, "s": "inf" if math.isinf(s) else s, "beta": beta},
        family_meta={"ells": ells, "excluded_centers": excluded},
        witness={"ell": best_ell},
    )


def bmo_norm(b: GridFunction, family: CubeFamily) -> NormResult:
    """Supremal mean oscillation sup_Q (1/|Q|) ∫_Q |b - b_Q| over the family."""
    if len(family) == 0:
        raise ValueError("empty cube family")
    spec = b.spec
    best, best_cube = -math.inf, None
    for q_cube in family:
        ov = overlap_volumes(spec, q_cube)
        vol = float(ov.sum())
        mean = float((b.values * ov).sum()) / vol
        osc = float((np.abs(b.values - mean) * ov).sum()) / vol
        if osc > best:
            best, best_cube = osc, q_cube
    return NormResult(
        value=float(best),
        norm_id="bmo",
        params={},
        family_meta={"cubes": len(family), "description": family.description},
        witness={"center": list(best_cube.center), "side": best_cube.side},
    )


def _window_bounds(spec: GridSpec, c: float, side: float) -> tuple[int, int]:
    """Cell index range [i0, i1) meeting the window [c - side/2, c + side/2] ∩ domain."""
    L, h, n = spec.half_width, spec.h, spec.cells_per_axis
    lo = max(c - side / 2.0, -L)
    hi = min(c + side / 2.0, L)
    i0 = int(math.floor((lo + L) / h))
    i1 = int(math.ceil((hi + L) / h))
    return max(i0, 0), min(max(i1, i0 + 1), n)


def _window_weights(spec: GridSpec, c: float, side: float, i0: int, i1: int) -> np.ndarray:
    edges = spec.axis_edges()
    lo = max(c - side / 2.0, -spec.half_width)
    hi = min(c + side / 2.0, spec.half_width)
    left = np.maximum(edges[i0:i1], lo)
    right = np.minimum(edges[i0 + 1 : i1 + 1], hi)
    return np.maximum(right - left, 0.0)


def mean_oscillation_field(spec: GridSpec, values: np.ndarray, ell: float):
    """Mean oscillation of `values` over Q(y, ell) ∩ domain at every cell center y.

    Returns (osc, include) where include marks centers whose cube keeps at
    least half its volume inside the domain.
    """
    centers = spec.axis_centers()
    vol = sliding_box_integral(spec, np.ones(spec.shape), ell)
    include = vol >= 0.5 * ell**spec.dim
    osc = np.zeros(spec.shape)
    if spec.dim == 1:
        for i, c in enumerate(centers):
            i0, i1 = _window_bounds(spec, c, ell)
            wts = _window_weights(spec, c, ell, i0, i1)
            block = values[i0:i1]
            tot = float(wts.sum())
            mean = float(wts @ block) / tot
            osc[i] = float(wts @ np.abs(block - mean)) / tot
    else:
        bounds = [_window_bounds(spec, c, ell) for c in centers]
        wts_1d = [
            _window_weights(spec, c, ell, i0, i1) for c, (i0, i1) in zip(centers, bounds)
        ]
        for i, (i0, i1) in enumerate(bounds):
            wx = wts_1d[i]
            for j, (j0, j1) in enumerate(bounds):
                wy = wts_1d[j]
                block = values[i0:i1, j0:j1]
                tot = float(wx.sum() * wy.sum())
                mean = float(wx @ block @ wy) / tot
                osc[i, j] = float(wx @ np.abs(block - mean) @ wy) / tot
    return osc, include


def bmo_ls_norm(f: GridFunction, mu: Weight, s: float, ell_grid) -> NormResult:
    """sup over scales of the L^s(mu)-in-y norm of the mean oscillation over Q(y, l).

    With s = inf and mu constant this reduces to the supremal mean oscillation
    over the induced cube family.
    """
    ells = [float(l) for l in np.atleast_1d(ell_grid)]
    if not ells:
        raise ConfigError("ell_grid must be nonempty")
    spec = f.spec
    best, best_ell, excluded = -math.inf, None, {}
    for ell in ells:
        osc, include = mean_oscillation_field(spec, f.values, ell)
        excluded[ell] = int((~include).sum())
        val = _ls_over_centers(spec, osc, include, mu, s)
        if val > best:
            best, best_ell = val, ell
    return NormResult(
        value=float(best),
        norm_id="bmo_ls",
        params={"s": "inf" if math.isinf(s) else s},
        family_meta={"ells": ells, "excluded_centers": excluded},
        witness={"ell": best_ell},
    )
