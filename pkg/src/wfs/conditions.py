"""Two-weight condition checkers: each reports the sup over a cube family.

Every condition asserts that some cube-wise quantity stays uniformly bounded
over all cubes.  On a finite family that is only falsifiable as a trend, so
the checkers never emit pass/fail against an absolute constant: they report
the observed sup, the argmax cube, and a per-scale breakdown that makes
divergence visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .grid import Cube, CubeFamily, GridFunction, integrate, overlap_volume, overlap_volumes
from .operators import RieszKernel, riesz_potential
from .orlicz import log_bump, luxemburg_norm
from .spaces import ExponentSet
from .weights import Weight

__all__ = ["ConditionReport", "sawyer_condition", "power_bump_condition", "orlicz_bump_condition", "CONDITION_IDS"]

CONDITION_IDS = (
    "SawyerDagger",
    "PowerBumpEq",
    "PowerBumpStrict",
    "OrliczBumpEq",
    "OrliczBumpStrict",
    "OrliczBumpM",
)


@dataclass(frozen=True)
class ConditionReport:
    condition_id: str
    sup_value: float
    argmax_cube: Optional[Cube]
    params: dict = field(default_factory=dict)
    family_meta: dict = field(default_factory=dict)
    per_scale: tuple = ()  # ((side, sup), ...) largest scale first
    skipped: int = 0


def _finish(
    condition_id: str,
    values: list[float],
    cubes: list[Cube],
    exps: ExponentSet,
    family: CubeFamily,
    skipped: int,
) -> ConditionReport:
    if not values:
        raise ValueError("no usable cubes for the condition scan")
    arr = np.asarray(values)
    k = int(np.argmax(arr))
    by_scale: dict[float, float] = {}
    for v, q in zip(values, cubes):
        by_scale[q.side] = max(by_scale.get(q.side, -math.inf), v)
    per_scale = tuple(sorted(by_scale.items(), key=lambda t: -t[0]))
    return ConditionReport(
        condition_id=condition_id,
        sup_value=float(arr[k]),
        argmax_cube=cubes[k],
        params=exps.to_params(),
        family_meta={"cubes": len(family), "description": family.description},
        per_scale=per_scale,
        skipped=skipped,
    )


def sawyer_condition(
    w: Weight,
    nu: Weight,
    exps: ExponentSet,
    kernel: RieszKernel,
    family: CubeFamily,
) -> ConditionReport:
    """Testing condition that applies the operator itself to each cube's weight:

        (∫_Q [T(chi_Q w)]^{p'} nu^{1-p'} dx)^{1/p'} / w(Q)^{1/q'}

    reported as a sup over the family.  Cubes with w(Q) = 0 are skipped and
    counted (cannot occur for strictly positive weights, kept as a guard).
    """
    if kernel.spec != w.spec or w.spec != nu.spec:
        raise ConfigError("weights and kernel must share one grid")
    spec = w.spec
    pprime = exps.pprime
    qprime = exps.qprime
    nu_dual = nu.pow(1.0 - pprime).values
    cell_vol = spec.h**spec.dim
    values, cubes, skipped = [], [], 0
    for q_cube in family:
        ov = overlap_volumes(spec, q_cube)
        wq = float((w.values * ov).sum())
        if wq <= 0.0:
            skipped += 1
            continue
        chi_w = GridFunction(spec, w.values * (ov / cell_vol))
        t_vals = riesz_potential(chi_w, kernel).values
        num = float(((np.abs(t_vals) ** pprime) * nu_dual * ov).sum()) ** (1.0 / pprime)
        values.append(num / wq ** (1.0 / qprime))
        cubes.append(q_cube)
    return _finish("SawyerDagger", values, cubes, exps, family, skipped)


def power_bump_condition(
    w: Weight, nu: Weight, exps: ExponentSet, family: CubeFamily
) -> ConditionReport:
    """Power-bump condition:

        |Q|^{gamma/n + 1/q - 1/p} (avg_Q w^r)^{1/(rq)} (avg_Q nu^{-p'/p})^{1/p'}

    as a sup over the family; with q = p the scale exponent reduces to gamma/n
    and the bump average to the 1/(rp) power.
    """
    if exps.r is None:
        raise ConfigError("power bump condition needs r > 1 in the exponent set")
    spec = w.spec
    n = spec.dim
    pprime = exps.pprime
    scale_exp = exps.gamma / n + 1.0 / exps.q - 1.0 / exps.p
    w_r = w.pow(exps.r)
    nu_dual = GridFunction(spec, nu.values ** (-pprime / exps.p))
    values, cubes = [], []
    for q_cube in family:
        vol = overlap_volume(spec, q_cube)
        bump = (integrate(w_r, q_cube) / vol) ** (1.0 / (exps.r * exps.q))
        dual = (integrate(nu_dual, q_cube) / vol) ** (1.0 / pprime)
        values.append(vol**scale_exp * bump * dual)
        cubes.append(q_cube)
    cid = "PowerBumpEq" if exps.q == exps.p else "PowerBumpStrict"
    return _finish(cid, values, cubes, exps, family, 0)


def orlicz_bump_condition(
    w: Weight, nu: Weight, exps: ExponentSet, family: CubeFamily
) -> ConditionReport:
    """Log-bump condition: the dual-weight factor is the Luxemburg norm
    ||nu^{-1/p}||_{A_m, Q} with A_m(t) = t^{p'} (1 + log+ t)^{m p'}.

    Dominates the power-bump scan on identical inputs because A_m(t) >= t^{p'}
    pointwise and the bump norm is monotone in the Young function.
    """
    if exps.r is None:
        raise ConfigError("orlicz bump condition needs r > 1 in the exponent set")
    spec = w.spec
    n = spec.dim
    scale_exp = exps.gamma / n + 1.0 / exps.q - 1.0 / exps.p
    bump_fn = log_bump(exps.pprime, exps.m)
    w_r = w.pow(exps.r)
    nu_root = GridFunction(spec, nu.values ** (-1.0 / exps.p))
    values, cubes = [], []
    for q_cube in family:
        vol = overlap_volume(spec, q_cube)
        bump = (integrate(w_r, q_cube) / vol) ** (1.0 / (exps.r * exps.q))
        dual = luxemburg_norm(nu_root, q_cube, bump_fn)
        values.append(vol**scale_exp * bump * dual)
        cubes.append(q_cube)
    if exps.m >= 2:
        cid = "OrliczBumpM"
    elif exps.q == exps.p:
        cid = "OrliczBumpEq"
    else:
        cid = "OrliczBumpStrict"
    return _finish(cid, values, cubes, exps, family, 0)
