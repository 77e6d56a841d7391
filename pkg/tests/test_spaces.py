import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wfs import (
    ConfigError,
    Cube,
    CubeFamily,
    ExponentSet,
    GridFunction,
    GridSpec,
    amalgam_norm,
    bmo_ls_norm,
    bmo_norm,
    constant_weight,
    default_ell_grid,
    distribution,
    lp_norm,
    make_cube_family,
    make_symbol,
    morrey_norm,
    power_weight,
    weak_amalgam_norm,
    weak_lp_norm,
    weak_morrey_norm,
)

from .conftest import random_grid_function


# ---------------------------------------------------------------- exponents


def test_exponent_relations_validated():
    with pytest.raises(ConfigError, match="p must"):
        ExponentSet(gamma=0.5, p=1.0, q=2.0)
    with pytest.raises(ConfigError, match="q must"):
        ExponentSet(gamma=0.5, p=2.0, q=1.5)
    with pytest.raises(ConfigError, match="kappa"):
        ExponentSet(gamma=0.5, p=2.0, q=4.0, kappa=0.9)
    with pytest.raises(ConfigError, match="1/beta"):
        ExponentSet(gamma=0.5, p=2.0, q=4.0, alpha=2.5, beta=5.0, s=20.0)
    with pytest.raises(ConfigError, match="alpha"):
        ExponentSet(gamma=0.5, p=2.0, q=4.0, alpha=1.5)
    with pytest.raises(ConfigError, match="r must"):
        ExponentSet(gamma=0.5, p=2.0, q=4.0, r=0.9)
    with pytest.raises(ConfigError, match="m must"):
        ExponentSet(gamma=0.5, p=2.0, q=4.0, m=0)


def test_exponent_derived_quantities():
    e = ExponentSet(gamma=0.25, p=2.0, q=4.0, kappa=0.5, alpha=2.5, s=20.0, r=2.0)
    assert e.pprime == pytest.approx(2.0)
    assert e.qprime == pytest.approx(4.0 / 3.0)
    assert e.is_endpoint_kappa
    assert e.beta_from_alpha() == pytest.approx(1.0 / (1.0 / 2.5 - 0.25), rel=1e-14)
    endpoint = ExponentSet(
        gamma=0.25, p=2.0, q=4.0, alpha=2.5, s=1.0 / (1.0 / 2.5 - 0.25)
    )
    assert endpoint.is_endpoint_s


def test_exponent_beta_accepted_when_consistent():
    beta = 1.0 / (1.0 / 2.5 - 0.25)
    e = ExponentSet(gamma=0.25, p=2.0, q=4.0, alpha=2.5, beta=beta, s=20.0)
    assert e.beta == pytest.approx(beta)


# ---------------------------------------------------------------- lp / weak


def test_lp_indicator():
    spec = GridSpec(1, 4.0, 64)
    centers = spec.axis_centers()
    f = GridFunction(spec, (np.abs(centers) <= 2.0).astype(float))  # |E| = 4
    assert lp_norm(f, constant_weight(spec), 2.0) == pytest.approx(2.0, rel=1e-12)


def test_lp_power_weight_closed_form():
    spec = GridSpec(1, 1.0, 64)
    f = GridFunction(spec, np.ones(64))
    w = power_weight(spec, 0.5)
    # exact cell means make the grid integral of |x|^{1/2} over [-1,1] exact
    assert lp_norm(f, w, 1.0) == pytest.approx(4.0 / 3.0, rel=1e-12)


def test_lp_zero(spec1, unit1):
    assert lp_norm(GridFunction(spec1, np.zeros(64)), unit1, 2.0) == 0.0


def test_distribution_step_cases(spec1, unit1):
    centers = spec1.axis_centers()
    e_mask = np.abs(centers) <= 0.5
    f = GridFunction(spec1, e_mask.astype(float))
    measure_e = e_mask.sum() * spec1.h
    assert distribution(f, unit1, 0.5) == pytest.approx(measure_e, rel=1e-12)
    assert distribution(f, unit1, 1.5) == 0.0


def test_distribution_two_level(spec1, unit1):
    centers = spec1.axis_centers()
    e_mask = centers < -1.0
    f_mask = centers > 1.0
    f = GridFunction(spec1, 2.0 * e_mask + 1.0 * f_mask)
    assert distribution(f, unit1, 1.0) == pytest.approx(e_mask.sum() * spec1.h, rel=1e-12)


def test_distribution_nonincreasing_right_continuous(spec1, unit1, rng):
    f = random_grid_function(spec1, rng)
    lams = np.sort(np.unique(f.values))
    vals = [distribution(f, unit1, lam) for lam in lams[:-1]]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    # right continuity: value just above a level equals the value at the level
    lam = lams[10]
    assert distribution(f, unit1, lam) == pytest.approx(
        distribution(f, unit1, lam + 1e-13), abs=1e-12
    )


def test_weak_lp_two_height_indicator(spec1, unit1):
    centers = spec1.axis_centers()
    mask = np.abs(centers) <= 0.125  # measure 0.25
    f = GridFunction(spec1, 2.0 * mask)
    assert weak_lp_norm(f, unit1, 2.0) == pytest.approx(1.0, rel=1e-12)


def test_weak_lp_indicator(spec1, unit1):
    centers = spec1.axis_centers()
    mask = np.abs(centers) <= 0.5
    f = GridFunction(spec1, mask.astype(float))
    assert weak_lp_norm(f, unit1, 3.0) == pytest.approx(
        (mask.sum() * spec1.h) ** (1 / 3), rel=1e-12
    )


def test_weak_lp_dominates_lambda_grid(spec1, unit1, rng):
    for _ in range(10):
        f = random_grid_function(spec1, rng)
        exact = weak_lp_norm(f, unit1, 2.0)
        lams = np.geomspace(1e-3, 1.01, 400)
        sampled = max(lam * distribution(f, unit1, lam) ** 0.5 for lam in lams)
        assert exact >= sampled - 1e-12
        assert exact <= sampled * 1.05


def test_chebyshev_weak_below_strong(spec1, unit1, rng):
    for _ in range(20):
        f = random_grid_function(spec1, rng)
        assert weak_lp_norm(f, unit1, 2.0) <= lp_norm(f, unit1, 2.0) * (1 + 1e-12)


# ---------------------------------------------------------------- morrey


def _oracle_interval_overlap(spec, lo, hi):
    edges = spec.axis_edges()
    return np.maximum(np.minimum(edges[1:], hi) - np.maximum(edges[:-1], lo), 0.0)


def test_morrey_kappa_zero_equals_lp(spec1, family1, unit1, rng):
    f = random_grid_function(spec1, rng)
    res = morrey_norm(f, unit1, unit1, 2.0, 0.0, family1)
    assert res.value == pytest.approx(lp_norm(f, unit1, 2.0), rel=1e-12)


def test_morrey_constant_function(spec1, family1, unit1):
    ones = GridFunction(spec1, np.ones(64))
    res = morrey_norm(ones, unit1, unit1, 1.0, 0.5, family1)
    assert res.value == pytest.approx(max(q.side for q in family1) ** 0.5, rel=1e-12)
    assert res.witness["side"] == max(q.side for q in family1)


def test_morrey_brute_force_oracle(spec1, family1, rng):
    # independent reimplementation: own overlap arithmetic, direct loop
    f = random_grid_function(spec1, rng)
    nu = power_weight(spec1, 0.3)
    w = power_weight(spec1, 0.6)
    p, kappa = 2.0, 0.25
    best = 0.0
    for q in family1:
        lo, hi = q.bounds()[0]
        ov = _oracle_interval_overlap(spec1, lo, hi)
        wq = float(w.values @ ov)
        num = float((np.abs(f.values) ** p * nu.values) @ ov)
        best = max(best, (num / wq**kappa) ** (1.0 / p))
    res = morrey_norm(f, nu, w, p, kappa, family1)
    assert res.value == pytest.approx(best, rel=1e-12)


def test_morrey_witness_reproduces_value(spec1, family1, unit1, rng):
    f = random_grid_function(spec1, rng)
    res = morrey_norm(f, unit1, unit1, 2.0, 0.25, family1)
    wq = Cube(tuple(res.witness["center"]), res.witness["side"])
    single = morrey_norm(f, unit1, unit1, 2.0, 0.25, CubeFamily((wq,), "witness"))
    assert single.value == pytest.approx(res.value, rel=1e-12)


def test_weak_morrey_kappa_zero(spec1, family1, unit1, rng):
    f = random_grid_function(spec1, rng)
    res = weak_morrey_norm(f, unit1, 2.0, 0.0, family1)
    # the largest family cube is the whole box
    assert res.value == pytest.approx(weak_lp_norm(f, unit1, 2.0), rel=1e-12)


def test_weak_morrey_indicator_closed_form(spec1, family1, unit1):
    centers = spec1.axis_centers()
    e_lo, e_hi = -0.5, 0.75
    f = GridFunction(spec1, ((centers >= e_lo) & (centers <= e_hi)).astype(float))
    # independent interval arithmetic: weak L^1 norm of an indicator is its measure
    e_cells = (centers >= e_lo) & (centers <= e_hi)
    best = 0.0
    for q in family1:
        lo, hi = q.bounds()[0]
        ov = _oracle_interval_overlap(spec1, lo, hi)
        inter = float(ov[e_cells].sum())
        best = max(best, inter / (hi - lo) ** 0.5)
    res = weak_morrey_norm(f, unit1, 1.0, 0.5, family1)
    assert res.value == pytest.approx(best, rel=1e-12)


def test_weak_morrey_dominates_fixed_pair(spec1, family1, unit1, rng):
    f = random_grid_function(spec1, rng)
    res = weak_morrey_norm(f, unit1, 2.0, 0.25, family1)
    q = family1[5]
    from wfs import integrate

    wq = integrate(unit1.fn, q)
    sigma = 0.5
    fixed = sigma * distribution_in_cube(spec1, f, q, sigma) ** 0.5 / wq ** (0.25 / 2.0)
    assert res.value >= fixed - 1e-12


def distribution_in_cube(spec, f, cube, sigma):
    lo, hi = cube.bounds()[0]
    ov = _oracle_interval_overlap(spec, lo, hi)
    return float(ov[np.abs(f.values) > sigma].sum())


# ---------------------------------------------------------------- amalgam


def interior_function(spec):
    centers = spec.axis_centers()
    vals = np.exp(-(centers**2)) * (np.abs(centers) < spec.half_width / 2)
    return GridFunction(spec, vals)


def test_amalgam_fubini_identity(spec1, unit1):
    f = interior_function(spec1)
    h = spec1.h
    res = amalgam_norm(f, unit1, unit1, unit1, 2.0, 2.0, 2.0, [4 * h, 8 * h, 16 * h])
    assert res.value == pytest.approx(lp_norm(f, unit1, 2.0), rel=1e-6)


def test_amalgam_s_inf_equals_morrey(spec1, unit1):
    f = interior_function(spec1)
    w = power_weight(spec1, 0.3)
    p, alpha = 2.0, 2.5
    ells = [0.5, 1.0]
    res = amalgam_norm(f, unit1, w, unit1, p, math.inf, alpha, ells)
    # induced family: every center whose cube keeps half its volume inside
    cubes = []
    for ell in ells:
        for y in spec1.axis_centers():
            inside = min(y + ell / 2, 2.0) - max(y - ell / 2, -2.0)
            if inside >= 0.5 * ell:
                cubes.append(Cube((float(y),), ell))
    fam = CubeFamily(tuple(cubes), "induced")
    kappa = 1.0 - p / alpha
    ref = morrey_norm(f, unit1, w, p, kappa, fam)
    assert res.value == pytest.approx(ref.value, rel=1e-10)


def test_amalgam_zero(spec1, unit1):
    z = GridFunction(spec1, np.zeros(64))
    res = amalgam_norm(z, unit1, unit1, unit1, 2.0, 4.0, 3.0, [0.5])
    assert res.value == 0.0


def test_weak_amalgam_indicator_closed_form(spec1, unit1):
    centers = spec1.axis_centers()
    e_lo, e_hi = -0.25, 0.5
    f = GridFunction(spec1, ((centers >= e_lo) & (centers <= e_hi)).astype(float))
    q, s, beta = 2.0, 4.0, 3.0
    ell = 1.0
    e = 1.0 / beta - 1.0 / q - 1.0 / s
    e_cells = (centers >= e_lo) & (centers <= e_hi)
    expr = np.zeros(64)
    include = np.zeros(64, dtype=bool)
    for k, y in enumerate(centers):
        lo, hi = y - ell / 2, y + ell / 2
        ov = _oracle_interval_overlap(spec1, lo, hi)
        vol = float(ov.sum())
        include[k] = vol >= 0.5 * ell
        inter = float(ov[e_cells].sum())
        wq = vol  # unit weight
        expr[k] = wq**e * inter ** (1.0 / q)
    hand = (np.sum(np.where(include, expr, 0.0) ** s) * spec1.h) ** (1.0 / s)
    res = weak_amalgam_norm(f, unit1, unit1, q, s, beta, [ell])
    assert res.value == pytest.approx(hand, rel=1e-10)


def test_weak_amalgam_zero(spec1, unit1):
    z = GridFunction(spec1, np.zeros(64))
    assert weak_amalgam_norm(z, unit1, unit1, 2.0, 4.0, 3.0, [0.5]).value == 0.0


def test_weak_amalgam_below_amalgam(spec1, unit1, rng):
    # same exponents, nu = w: the inner weak norm is dominated pointwise
    f = random_grid_function(spec1, rng)
    w = power_weight(spec1, 0.3)
    p, s, alpha = 2.0, 8.0, 3.0
    ells = [0.5, 1.0]
    weak = weak_amalgam_norm(f, w, unit1, p, s, alpha, ells)
    strong = amalgam_norm(f, w, w, unit1, p, s, alpha, ells)
    assert weak.value <= strong.value * (1 + 1e-10)


# ---------------------------------------------------------------- oscillation


def test_bmo_constant_zero(spec1, family1):
    b = GridFunction(spec1, np.full(64, 4.2))
    assert bmo_norm(b, family1).value == pytest.approx(0.0, abs=1e-14)


def test_bmo_step_half():
    spec = GridSpec(1, 2.0, 128)
    fam = make_cube_family(spec, depth=4, translations=2)
    b = make_symbol(spec, "step")
    assert bmo_norm(b, fam).value == pytest.approx(0.5, abs=1e-3)


def test_bmo_log_refinement_stable():
    vals = []
    for n in (128, 256):
        spec = GridSpec(1, 2.0, n)
        fam = make_cube_family(spec, depth=3, translations=2)
        vals.append(bmo_norm(make_symbol(spec, "log_abs"), fam).value)
    assert abs(vals[1] / vals[0] - 1.0) <= 0.05


def test_bmo_ls_constant_zero(spec1, unit1):
    b = GridFunction(spec1, np.full(64, 1.7))
    assert bmo_ls_norm(b, unit1, 2.0, [0.5, 1.0]).value == pytest.approx(0.0, abs=1e-14)


def test_bmo_ls_inf_equals_bmo_on_induced_family(spec1, unit1):
    b = make_symbol(spec1, "step")
    ells = [0.5, 1.0]
    res = bmo_ls_norm(b, unit1, math.inf, ells)
    cubes = []
    for ell in ells:
        for y in spec1.axis_centers():
            inside = min(y + ell / 2, 2.0) - max(y - ell / 2, -2.0)
            if inside >= 0.5 * ell:
                cubes.append(Cube((float(y),), ell))
    ref = bmo_norm(b, CubeFamily(tuple(cubes), "induced"))
    assert res.value == pytest.approx(ref.value, rel=1e-12)


def test_bmo_ls_step_closed_form(spec1, unit1):
    # oscillation of a 0/1 step over a window with positive-fraction theta is
    # 2 theta (1 - theta); integrate that in y by interval arithmetic
    b = make_symbol(spec1, "step")
    s, ell = 2.0, 1.0
    expr = np.zeros(64)
    include = np.zeros(64, dtype=bool)
    for k, y in enumerate(spec1.axis_centers()):
        lo = max(y - ell / 2, -2.0)
        hi = min(y + ell / 2, 2.0)
        vol = hi - lo
        include[k] = vol >= 0.5 * ell
        theta = max(0.0, hi - max(lo, 0.0)) / vol
        expr[k] = 2.0 * theta * (1.0 - theta)
    hand = (np.sum(np.where(include, expr, 0.0) ** s) * spec1.h) ** (1.0 / s)
    res = bmo_ls_norm(b, unit1, s, [ell])
    assert res.value == pytest.approx(hand, rel=1e-12)


# ---------------------------------------------------------------- properties


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.05, max_value=20.0))
def test_norm_homogeneity(c):
    spec = GridSpec(1, 2.0, 32)
    rng = np.random.default_rng(5)
    f = random_grid_function(spec, rng)
    cf = GridFunction(spec, c * f.values)
    w = constant_weight(spec)
    fam = make_cube_family(spec, depth=2)
    assert lp_norm(cf, w, 2.0) == pytest.approx(c * lp_norm(f, w, 2.0), rel=1e-10)
    assert weak_lp_norm(cf, w, 2.0) == pytest.approx(c * weak_lp_norm(f, w, 2.0), rel=1e-10)
    assert morrey_norm(cf, w, w, 2.0, 0.25, fam).value == pytest.approx(
        c * morrey_norm(f, w, w, 2.0, 0.25, fam).value, rel=1e-10
    )


def test_sup_norms_monotone_in_family(spec1, family1, unit1, rng):
    f = random_grid_function(spec1, rng)
    small = CubeFamily(family1.cubes[:5], "subset")
    assert (
        morrey_norm(f, unit1, unit1, 2.0, 0.25, small).value
        <= morrey_norm(f, unit1, unit1, 2.0, 0.25, family1).value + 1e-14
    )
    short = default_ell_grid(spec1, 4)
    longer = np.concatenate([short, [1.7]])
    a = amalgam_norm(f, unit1, unit1, unit1, 2.0, 4.0, 3.0, short).value
    b = amalgam_norm(f, unit1, unit1, unit1, 2.0, 4.0, 3.0, longer).value
    assert a <= b + 1e-14
