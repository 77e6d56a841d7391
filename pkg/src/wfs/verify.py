"""Theorem-level verification harness.

Each verifier computes, for every sample function in a reproducible family,
the quotient of the output-side norm of the operator image by the input-side
norm of the sample, and reports the best observed constant (the max ratio).
The inequalities under test only assert that some finite constant exists, so
"verified" here means: the observed constant is finite, the per-scale
diagnostic shows no monotone growth, and the value is stable (default +/-20%)
under one grid refinement on the same continuous sample family.

Sample generators are defined in continuous coordinates and rasterized onto
the given grid, so the same seed describes the same functions at every
resolution; that is what makes the refinement pair meaningful.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .conditions import ConditionReport, orlicz_bump_condition, power_bump_condition
from .errors import ConfigError
from .grid import Cube, CubeFamily, GridFunction, GridSpec, integrate, overlap_volume
from .operators import RieszKernel, build_kernel, commutator, riesz_potential
from .spaces import (
    ExponentSet,
    amalgam_norm,
    bmo_ls_norm,
    bmo_norm,
    lp_norm,
    morrey_norm,
    weak_amalgam_norm,
    weak_lp_norm,
    weak_morrey_norm,
)
from .weights import Weight, ainfty_fit

__all__ = [
    "FunctionFamily",
    "VerificationReport",
    "THEOREM_IDS",
    "GENERATORS",
    "worker_count",
    "verify_weak_type_lebesgue",
    "verify_morrey",
    "verify_amalgam",
    "verify_endpoint",
    "bmo_lemma_check",
    "geometric_series_check",
    "has_monotone_growth",
    "make_symbol",
]

THEOREM_IDS = (
    "WeakLp_I",
    "WeakLp_Comm",
    "Morrey_I",
    "Amalgam_I",
    "Morrey_Comm",
    "Amalgam_Comm",
    "Morrey_CommM",
    "Amalgam_CommM",
    "Endpoint_BMO",
    "Endpoint_BMOLs",
)

GENERATORS = ("indicator_boxes", "random_piecewise", "power_bumps", "smooth_bumps")

_MACRO_CELLS = 16  # virtual lattice for resolution-independent piecewise samples


def worker_count() -> int:
    """Worker cap for sample-parallel scans; WFS_THREADS overrides the default."""
    env = os.environ.get("WFS_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"WFS_THREADS must be an integer, got {env!r}") from exc
    return min(os.cpu_count() or 1, 8)


@dataclass(frozen=True)
class FunctionFamily:
    """Reproducible family of sample functions, described in continuous coordinates."""

    generator: str
    count: int
    rng_seed: int
    signed: bool = False

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ConfigError(
                f"unknown generator {self.generator!r}; choose one of {GENERATORS}"
            )
        if self.count < 1:
            raise ConfigError(f"family count must be >= 1, got {self.count}")

    def generate(self, spec: GridSpec) -> list[GridFunction]:
        return [self._sample(spec, k) for k in range(self.count)]

    def _sample(self, spec: GridSpec, index: int) -> GridFunction:
        rng = np.random.default_rng([self.rng_seed, index])
        L = spec.half_width
        centers = spec.axis_centers()
        if spec.dim == 1:
            pts = centers[:, None]
        else:
            x1, x2 = np.meshgrid(centers, centers, indexing="ij")
            pts = np.stack([x1, x2], axis=-1)

        if self.generator == "indicator_boxes":
            size = rng.uniform(0.15, 0.6, size=spec.dim) * 2.0 * L
            corner = np.array(
                [rng.uniform(-L, L - s) for s in size]
            )
            inside = np.ones(spec.shape, dtype=bool)
            for k in range(spec.dim):
                xk = pts[..., k]
                inside &= (xk >= corner[k]) & (xk <= corner[k] + size[k])
            vals = inside.astype(float)
        elif self.generator == "random_piecewise":
            lattice = rng.uniform(0.0, 1.0, size=(_MACRO_CELLS,) * spec.dim)
            if self.signed:
                lattice = lattice - 0.5
            idx = []
            for k in range(spec.dim):
                xk = pts[..., k]
                cells = np.floor((xk + L) / (2.0 * L) * _MACRO_CELLS).astype(int)
                idx.append(np.clip(cells, 0, _MACRO_CELLS - 1))
            vals = lattice[tuple(idx)]
        elif self.generator == "power_bumps":
            x0 = rng.uniform(-L / 2.0, L / 2.0, size=spec.dim)
            theta = rng.uniform(0.1, 0.3)
            radius = rng.uniform(0.3, 1.0) * L / 2.0
            dist = np.sqrt(((pts - x0) ** 2).sum(axis=-1))
            # cap the singular value at the resolution scale so samples stay finite
            dist = np.maximum(dist, spec.h / 4.0)
            vals = np.where(dist <= radius, dist**-theta, 0.0)
        else:  # smooth_bumps
            vals = np.zeros(spec.shape)
            for _ in range(2):
                x0 = rng.uniform(-L / 2.0, L / 2.0, size=spec.dim)
                sigma = rng.uniform(0.2, 0.8) * L / 4.0
                height = rng.uniform(0.5, 2.0)
                d2 = ((pts - x0) ** 2).sum(axis=-1)
                vals = vals + height * np.exp(-d2 / (2.0 * sigma**2))
            if self.signed:
                vals = vals - float(vals.mean())
        return GridFunction(spec, vals)


def make_symbol(spec: GridSpec, kind: str) -> GridFunction:
    """Shipped oscillation symbols: a 0/1 step across the first axis, or log|x|."""
    centers = spec.axis_centers()
    if kind == "step":
        axis_vals = (centers > 0).astype(float)
        if spec.dim == 1:
            return GridFunction(spec, axis_vals)
        return GridFunction(spec, np.repeat(axis_vals[:, None], spec.cells_per_axis, axis=1))
    if kind == "log_abs":
        if spec.dim == 1:
            return GridFunction(spec, np.log(np.abs(centers)))
        x1, x2 = np.meshgrid(centers, centers, indexing="ij")
        return GridFunction(spec, 0.5 * np.log(x1**2 + x2**2))
    raise ConfigError(f"unknown symbol kind {kind!r}; choose 'step' or 'log_abs'")


@dataclass(frozen=True)
class VerificationReport:
    theorem_id: str
    params: dict
    seed: int
    ratios: tuple
    c_obs: Optional[float]
    samples_used: int
    samples_skipped: int
    preset_id: Optional[str] = None
    condition: Optional[ConditionReport] = None
    ainfty: Optional[tuple] = None
    refinement: Optional[dict] = None
    notes: tuple = ()


def _apply_op(
    op_kind: str,
    b: Optional[GridFunction],
    f: GridFunction,
    kernel: RieszKernel,
    m: int,
) -> GridFunction:
    if op_kind == "riesz":
        return riesz_potential(f, kernel)
    if op_kind == "comm_m":
        if b is None:
            raise ConfigError("commutator verification needs a symbol function b")
        return commutator(b, f, kernel, m=m, check=False)
    raise ConfigError(f"unknown operator kind {op_kind!r}; choose 'riesz' or 'comm_m'")


def _ratio_scan(samples, one_ratio) -> tuple[list[float], int]:
    """Evaluate `one_ratio` per sample (in parallel, ordered); None means skipped."""
    workers = worker_count()
    if workers > 1 and len(samples) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_ratio, samples))
    else:
        results = [one_ratio(f) for f in samples]
    ratios = [r for r in results if r is not None]
    return ratios, len(results) - len(ratios)


def _report(
    theorem_id: str,
    exps: ExponentSet,
    fam: FunctionFamily,
    ratios: list[float],
    skipped: int,
    **extra,
) -> VerificationReport:
    return VerificationReport(
        theorem_id=theorem_id,
        params=exps.to_params(),
        seed=fam.rng_seed,
        ratios=tuple(ratios),
        c_obs=max(ratios) if ratios else None,
        samples_used=len(ratios),
        samples_skipped=skipped,
        **extra,
    )


def verify_weak_type_lebesgue(
    op_kind: str,
    b: Optional[GridFunction],
    weights: tuple[Weight, Weight],
    exps: ExponentSet,
    fam: FunctionFamily,
    spec: GridSpec,
) -> VerificationReport:
    """Weak (p, q) inequality on the truncated domain: for each sample f the
    ratio weak-q norm of Tf over the weighted p-norm of f."""
    w, nu = weights
    exps.validate_gamma(spec.dim)
    kernel = build_kernel(spec, exps.gamma)
    samples = fam.generate(spec)

    def one_ratio(f: GridFunction):
        den = lp_norm(f, nu, exps.p)
        if den == 0.0:
            return None
        t_f = _apply_op(op_kind, b, f, kernel, exps.m)
        return weak_lp_norm(t_f, w, exps.q) / den

    ratios, skipped = _ratio_scan(samples, one_ratio)
    theorem_id = "WeakLp_I" if op_kind == "riesz" else "WeakLp_Comm"
    return _report(theorem_id, exps, fam, ratios, skipped)


def verify_morrey(
    op_kind: str,
    b: Optional[GridFunction],
    weights: tuple[Weight, Weight],
    exps: ExponentSet,
    fam: FunctionFamily,
    family: CubeFamily,
    spec: GridSpec,
) -> VerificationReport:
    """Morrey-to-weak-Morrey ratio scan; kappa = 0 degenerates to the weak (p,q) scan.

    Attaches the matching two-weight condition report (power bump for the
    plain operator, log bump for commutators) and, for commutator runs, the
    comparability fit of w, which is recorded but certifies nothing.
    """
    w, nu = weights
    exps.validate_gamma(spec.dim)
    if exps.kappa is None:
        raise ConfigError("Morrey verification needs kappa in the exponent set")
    if not (0.0 <= exps.kappa < exps.p / exps.q):
        if not exps.is_endpoint_kappa:
            raise ConfigError(
                f"kappa must lie in [0, p/q) = [0, {exps.p / exps.q}), got {exps.kappa}"
            )
    kernel = build_kernel(spec, exps.gamma)
    samples = fam.generate(spec)
    kappa_out = exps.kappa * exps.q / exps.p

    def one_ratio(f: GridFunction):
        den = morrey_norm(f, nu, w, exps.p, exps.kappa, family).value
        if den == 0.0:
            return None
        t_f = _apply_op(op_kind, b, f, kernel, exps.m)
        return weak_morrey_norm(t_f, w, exps.q, kappa_out, family).value / den

    ratios, skipped = _ratio_scan(samples, one_ratio)
    extra: dict = {}
    notes: list[str] = []
    if op_kind == "riesz":
        theorem_id = "Morrey_I"
        extra["condition"] = power_bump_condition(w, nu, exps, family)
    else:
        theorem_id = "Morrey_CommM" if exps.m >= 2 else "Morrey_Comm"
        extra["condition"] = orlicz_bump_condition(w, nu, exps, family)
        extra["ainfty"] = ainfty_fit(w, family)
        notes.append("comparability fit recorded; membership is not certified")
    return _report(theorem_id, exps, fam, ratios, skipped, notes=tuple(notes), **extra)


def verify_amalgam(
    op_kind: str,
    b: Optional[GridFunction],
    weights: tuple[Weight, Weight, Weight],
    exps: ExponentSet,
    fam: FunctionFamily,
    ell_grid,
    spec: GridSpec,
    condition_family: Optional[CubeFamily] = None,
) -> VerificationReport:
    """Amalgam-to-weak-amalgam ratio scan with 1/beta = 1/alpha - (1/p - 1/q)."""
    w, nu, mu = weights
    exps.validate_gamma(spec.dim)
    if exps.alpha is None or exps.s is None:
        raise ConfigError("amalgam verification needs alpha and s in the exponent set")
    beta = exps.beta if exps.beta is not None else exps.beta_from_alpha()
    if not (exps.p <= exps.alpha < beta):
        raise ConfigError(
            f"exponents must satisfy p <= alpha < beta, got p={exps.p}, alpha={exps.alpha}, beta={beta}"
        )
    if not beta < exps.s:
        raise ConfigError(f"exponents must satisfy beta < s, got beta={beta}, s={exps.s}")
    kernel = build_kernel(spec, exps.gamma)
    samples = fam.generate(spec)

    def one_ratio(f: GridFunction):
        den = amalgam_norm(f, nu, w, mu, exps.p, exps.s, exps.alpha, ell_grid).value
        if den == 0.0:
            return None
        t_f = _apply_op(op_kind, b, f, kernel, exps.m)
        return (
            weak_amalgam_norm(t_f, w, mu, exps.q, exps.s, beta, ell_grid).value / den
        )

    ratios, skipped = _ratio_scan(samples, one_ratio)
    extra: dict = {}
    notes: list[str] = []
    if condition_family is not None:
        if op_kind == "riesz":
            extra["condition"] = power_bump_condition(w, nu, exps, condition_family)
        else:
            extra["condition"] = orlicz_bump_condition(w, nu, exps, condition_family)
            extra["ainfty"] = ainfty_fit(w, condition_family)
            notes.append("comparability fit recorded; membership is not certified")
    theorem_id = {
        ("riesz", False): "Amalgam_I",
        ("comm_m", False): "Amalgam_Comm",
        ("comm_m", True): "Amalgam_CommM",
    }[(op_kind, op_kind == "comm_m" and exps.m >= 2)]
    return _report(theorem_id, exps, fam, ratios, skipped, notes=tuple(notes), **extra)


def verify_endpoint(
    weights: tuple[Weight, Weight, Weight],
    exps: ExponentSet,
    fam: FunctionFamily,
    mode: str,
    spec: GridSpec,
    family: Optional[CubeFamily] = None,
    ell_grid=None,
) -> VerificationReport:
    """Endpoint scans for the plain operator only.

    mode "BMO":   kappa = p/q, ratio = mean-oscillation norm of Tf over the
                  Morrey norm of f.
    mode "BMOLs": 1/s = 1/alpha - (1/p - 1/q), ratio = scale-sup L^s(mu)
                  oscillation norm of Tf over the amalgam norm of f.
    """
    w, nu, mu = weights
    exps.validate_gamma(spec.dim)
    kernel = build_kernel(spec, exps.gamma)
    samples = fam.generate(spec)
    if mode == "BMO":
        if not exps.is_endpoint_kappa:
            raise ConfigError(
                f"endpoint mode BMO requires kappa = p/q = {exps.p / exps.q}, got {exps.kappa}"
            )
        if family is None:
            raise ConfigError("endpoint mode BMO needs a cube family")

        def one_ratio(f: GridFunction):
            den = morrey_norm(f, nu, w, exps.p, exps.kappa, family).value
            if den == 0.0:
                return None
            t_f = riesz_potential(f, kernel)
            return bmo_norm(t_f, family).value / den

        theorem_id = "Endpoint_BMO"
    elif mode == "BMOLs":
        if not exps.is_endpoint_s:
            raise ConfigError(
                "endpoint mode BMOLs requires 1/s = 1/alpha - (1/p - 1/q); "
                f"got s={exps.s}, alpha={exps.alpha}, p={exps.p}, q={exps.q}"
            )
        if ell_grid is None:
            raise ConfigError("endpoint mode BMOLs needs a scale grid")

        def one_ratio(f: GridFunction):
            den = amalgam_norm(f, nu, w, mu, exps.p, exps.s, exps.alpha, ell_grid).value
            if den == 0.0:
                return None
            t_f = riesz_potential(f, kernel)
            return bmo_ls_norm(t_f, mu, exps.s, ell_grid).value / den

        theorem_id = "Endpoint_BMOLs"
    else:
        raise ConfigError(f"unknown endpoint mode {mode!r}; choose 'BMO' or 'BMOLs'")

    ratios, skipped = _ratio_scan(samples, one_ratio)
    return _report(theorem_id, exps, fam, ratios, skipped)


def bmo_lemma_check(
    b: GridFunction,
    cube: Cube,
    j_max: int,
    w: Weight,
    p: float,
    family: CubeFamily,
) -> dict:
    """Trend-bounded diagnostics for the two mean-oscillation lemmas.

    part (i):  |b_{2^{j+1}Q} - b_Q| / ((j+1) ||b||_*) per dilation step;
    part (ii): (∫_Q |b - b_Q|^p w)^{1/p} / (||b||_* w(Q)^{1/p}).
    Both are reported as observed ratios; no absolute threshold is asserted.
    """
    if j_max < 1:
        raise ConfigError(f"j_max must be >= 1, got {j_max}")
    spec = b.spec
    bmo = bmo_norm(b, family).value
    if bmo <= 0.0:
        return {"bmo": 0.0, "ratio_means": 0.0, "per_j": [], "ratio_weighted": 0.0}
    vol = overlap_volume(spec, cube)
    b_q = integrate(b, cube) / vol
    per_j = []
    for j in range(1, j_max + 1):
        big = cube.dilate(2.0 ** (j + 1))
        mean_big = integrate(b, big) / overlap_volume(spec, big)
        per_j.append(abs(mean_big - b_q) / ((j + 1) * bmo))
    dens = GridFunction(spec, np.abs(b.values - b_q) ** p * w.values)
    weighted = integrate(dens, cube) ** (1.0 / p)
    wq = integrate(w.fn, cube)
    return {
        "bmo": bmo,
        "ratio_means": max(per_j),
        "per_j": per_j,
        "ratio_weighted": weighted / (bmo * wq ** (1.0 / p)),
    }


def geometric_series_check(d: float, exponent: float, j_max: int) -> dict:
    """Partial sums of sum_j (1/D^{j+1})^e: increasing in J and below 1/(D^e - 1)."""
    if not (d > 1 and exponent > 0):
        raise ConfigError(
            f"geometric series check needs D > 1 and a positive exponent, got D={d}, e={exponent}"
        )
    terms = [(1.0 / d ** (j + 1)) ** exponent for j in range(1, j_max + 1)]
    partial = list(np.cumsum(terms))
    bound = 1.0 / (d**exponent - 1.0)
    return {
        "partial_sums": partial,
        "bound": bound,
        "monotone": all(b > a for a, b in zip(partial, partial[1:])),
        "bounded": partial[-1] <= bound * (1.0 + 1e-12),
    }


def has_monotone_growth(values, rel: float = 0.02) -> bool:
    """True when every step of the sequence grows by more than `rel` relative.

    Used on per-scale condition sups ordered from the largest scale down: a
    strictly growing tail is the desk-scale signature of an unbounded
    condition.
    """
    vals = [float(v) for v in values]
    if len(vals) < 2:
        return False
    return all(b > a * (1.0 + rel) for a, b in zip(vals, vals[1:]))
