"""Young functions, Luxemburg mean norms over cubes, and the product-norm inequality check.

Three Young-function variants are shipped: plain powers t^p, log-bumped powers
t^{p'} (1 + log+ t)^{m p'}, and e^t - 1.  The Luxemburg norm over a cube is the
infimum of lambda > 0 with mean_Q Phi(|f|/lambda) <= 1; the mean is taken over
the cube clipped to the domain so the normalizer is the measure actually seen.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .grid import Cube, CubeFamily, GridFunction, integrate, overlap_volume, overlap_volumes

__all__ = [
    "YoungFunction",
    "power",
    "log_bump",
    "exp_m1",
    "young_eval",
    "luxemburg_norm",
    "HolderCheck",
    "generalized_holder_check",
    "is_shipped_triple",
    "john_nirenberg_check",
]

_EXP_GUARD = 700.0  # e^t overflows float64 just above this


@dataclass(frozen=True)
class YoungFunction:
    """Tagged Young function.

    kind "power":   t^exponent, exponent > 1
    kind "logbump": t^exponent (1 + log+ t)^(log_power * exponent), exponent = p'
    kind "expm1":   e^t - 1
    """

    kind: str
    exponent: float | None = None
    log_power: int | None = None

    def __post_init__(self):
        if self.kind == "power":
            if self.exponent is None or not self.exponent > 1:
                raise ConfigError(f"power Young function needs exponent > 1, got {self.exponent}")
            if self.log_power is not None:
                raise ConfigError("power Young function takes no log_power")
        elif self.kind == "logbump":
            if self.exponent is None or not self.exponent > 1:
                raise ConfigError(f"logbump needs exponent > 1, got {self.exponent}")
            if self.log_power is None or int(self.log_power) < 1:
                raise ConfigError(f"logbump needs log_power >= 1, got {self.log_power}")
            object.__setattr__(self, "log_power", int(self.log_power))
        elif self.kind == "expm1":
            if self.exponent is not None or self.log_power is not None:
                raise ConfigError("expm1 Young function takes no parameters")
        else:
            raise ConfigError(f"unknown Young function kind {self.kind!r}")

    def __call__(self, t):
        return young_eval(self, t)


def power(p: float) -> YoungFunction:
    return YoungFunction("power", exponent=float(p))


def log_bump(pprime: float, m: int = 1) -> YoungFunction:
    return YoungFunction("logbump", exponent=float(pprime), log_power=int(m))


def exp_m1() -> YoungFunction:
    return YoungFunction("expm1")


def young_eval(phi: YoungFunction, t):
    """Evaluate Phi(t) for t >= 0 (scalar or array); log+ t = max(log t, 0)."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise ValueError("Young functions are defined for t >= 0")
    with np.errstate(over="ignore"):
        if phi.kind == "power":
            out = arr**phi.exponent
        elif phi.kind == "logbump":
            logplus = np.where(arr > 1.0, np.log(np.maximum(arr, 1.0)), 0.0)
            out = arr**phi.exponent * (1.0 + logplus) ** (phi.log_power * phi.exponent)
        else:
            out = np.expm1(arr)
    return float(out) if np.isscalar(t) or arr.ndim == 0 else out


def _mean_young(phi: YoungFunction, vals: np.ndarray, vols: np.ndarray, total: float, lam: float) -> float:
    """Normalized mean of Phi(|f|/lam) over the cube; +inf signals overflow territory."""
    scaled = vals / lam
    if phi.kind == "expm1" and float(scaled.max()) > _EXP_GUARD:
        return math.inf
    with np.errstate(over="ignore"):
        contrib = young_eval(phi, scaled) * vols
    s = float(contrib.sum())
    return s / total if math.isfinite(s) else math.inf


def luxemburg_norm(
    f: GridFunction,
    cube: Cube,
    phi: YoungFunction,
    rel_tol: float = 1e-10,
    max_iter: int = 200,
) -> float:
    """inf{lambda > 0 : mean_{Q∩domain} Phi(|f|/lambda) <= 1} by bracketing + bisection.

    The mean-integral map is nonincreasing in lambda, so a factor-2 bracket is
    found by doubling/halving from max|f| and then bisected; the returned value
    is the feasible upper end of the final bracket (relative width rel_tol).
    """
    vols = overlap_volumes(f.spec, cube).ravel()
    mask = vols > 0.0
    if not mask.any():
        raise ValueError("empty intersection")
    vals = np.abs(f.values).ravel()[mask]
    vols = vols[mask]
    total = float(vols.sum())
    vmax = float(vals.max())
    if vmax == 0.0:
        return 0.0

    iters = 0
    hi = vmax
    while _mean_young(phi, vals, vols, total, hi) > 1.0:
        hi *= 2.0
        iters += 1
        if iters > max_iter:
            raise NumericalError(
                "luxemburg bracket growth did not terminate", hi=hi, vmax=vmax
            )
    while _mean_young(phi, vals, vols, total, hi / 2.0) <= 1.0:
        hi /= 2.0
        iters += 1
        if iters > max_iter:
            raise NumericalError(
                "luxemburg bracket shrink did not terminate", hi=hi, vmax=vmax
            )
    lo = hi / 2.0
    while hi - lo > rel_tol * hi:
        iters += 1
        if iters > max_iter:
            raise NumericalError(
                "luxemburg bisection did not converge",
                lo=lo,
                hi=hi,
                g_lo=_mean_young(phi, vals, vols, total, lo),
                g_hi=_mean_young(phi, vals, vols, total, hi),
            )
        mid = 0.5 * (lo + hi)
        if _mean_young(phi, vals, vols, total, mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def is_shipped_triple(a: YoungFunction, b: YoungFunction, c: YoungFunction) -> bool:
    """The compatible triple used by the product-norm step: (logbump(p',1), e^t-1, t^{p'})."""
    return (
        a.kind == "logbump"
        and a.log_power == 1
        and b.kind == "expm1"
        and c.kind == "power"
        and c.exponent == a.exponent
    )


@dataclass(frozen=True)
class HolderCheck:
    lhs: float
    rhs: float
    holds: bool


def generalized_holder_check(
    f: GridFunction,
    g: GridFunction,
    cube: Cube,
    a: YoungFunction,
    b: YoungFunction,
    c: YoungFunction,
) -> HolderCheck:
    """Check ||f g||_{C,Q} <= 2 ||f||_{A,Q} ||g||_{B,Q} (1e-8 slack) and report both sides.

    Triples other than the shipped one are evaluated as declared, with a
    warning: their compatibility is the caller's responsibility.
    """
    if not is_shipped_triple(a, b, c):
        warnings.warn(
            "Young-function triple is not the shipped compatible one; "
            "the product-norm bound is checked as declared",
            stacklevel=2,
        )
    product = GridFunction(f.spec, f.values * g.values)
    lhs = luxemburg_norm(product, cube, c)
    rhs = 2.0 * luxemburg_norm(f, cube, a) * luxemburg_norm(g, cube, b)
    return HolderCheck(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs * (1.0 + 1e-8)))


def john_nirenberg_check(
    b: GridFunction, cube: Cube, family: CubeFamily
) -> tuple[float, float, float]:
    """Exponential-class oscillation against the mean-oscillation norm.

    Returns (expL, bmo, ratio) where expL is the Luxemburg norm of b - b_Q with
    the e^t - 1 Young function, bmo the supremal mean oscillation over the
    working family, and ratio their quotient (0 when bmo vanishes).  No
    absolute threshold is asserted: the proportionality constant is not pinned
    down, so only the observed ratio is reported.
    """
    from .spaces import bmo_norm

    vol = overlap_volume(b.spec, cube)
    mean = integrate(b, cube) / vol
    centered = GridFunction(b.spec, b.values - mean)
    exp_l = luxemburg_norm(centered, cube, exp_m1())
    bmo = bmo_norm(b, family).value
    ratio = exp_l / bmo if bmo > 0 else 0.0
    return exp_l, bmo, ratio
