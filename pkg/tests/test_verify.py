import math

import numpy as np
import pytest

from wfs import (
    ConfigError,
    Cube,
    CubeFamily,
    ExponentSet,
    FunctionFamily,
    GridFunction,
    GridSpec,
    bmo_lemma_check,
    bmo_norm,
    constant_weight,
    default_ell_grid,
    geometric_series_check,
    has_monotone_growth,
    make_cube_family,
    make_symbol,
    power_weight,
    reverse_doubling_constant,
    verify_amalgam,
    verify_endpoint,
    verify_morrey,
    verify_weak_type_lebesgue,
)

EXPS = ExponentSet(gamma=0.25, p=2.0, q=4.0, kappa=0.25, alpha=2.5, s=20.0, r=2.0)


@pytest.fixture(scope="module")
def setup():
    spec = GridSpec(1, 2.0, 64)
    w = constant_weight(spec)
    fam = FunctionFamily("indicator_boxes", 6, 11)
    cubes = make_cube_family(spec, depth=3, translations=2)
    return spec, w, fam, cubes


def test_family_reproducible(setup):
    spec, _, fam, _ = setup
    a = fam.generate(spec)
    b = fam.generate(spec)
    for fa, fb in zip(a, b):
        assert np.array_equal(fa.values, fb.values)


def test_family_generators_finite_nonnegative(setup):
    spec = setup[0]
    for gen in ("indicator_boxes", "random_piecewise", "power_bumps", "smooth_bumps"):
        for f in FunctionFamily(gen, 3, 5).generate(spec):
            assert np.all(np.isfinite(f.values))
            assert np.all(f.values >= 0.0)


def test_family_signed_variant(setup):
    spec = setup[0]
    fs = FunctionFamily("random_piecewise", 3, 5, signed=True).generate(spec)
    assert any(np.any(f.values < 0) for f in fs)


def test_family_resolution_consistency():
    fam = FunctionFamily("indicator_boxes", 4, 3)
    coarse = fam.generate(GridSpec(1, 2.0, 64))
    fine = fam.generate(GridSpec(1, 2.0, 128))
    for fc, ff in zip(coarse, fine):
        ic = fc.values.sum() * (4.0 / 64)
        if_ = ff.values.sum() * (4.0 / 128)
        assert if_ == pytest.approx(ic, rel=0.1)


def test_unknown_generator_rejected():
    with pytest.raises(ConfigError):
        FunctionFamily("nope", 3, 5)


def test_weak_type_scan(setup):
    spec, w, fam, _ = setup
    rep = verify_weak_type_lebesgue("riesz", None, (w, w), EXPS, fam, spec)
    assert rep.theorem_id == "WeakLp_I"
    assert rep.samples_used + rep.samples_skipped == fam.count
    assert rep.c_obs is not None and np.isfinite(rep.c_obs)
    assert rep.seed == fam.rng_seed


def test_zero_family_all_skipped(setup, monkeypatch):
    spec, w, fam, _ = setup
    zeros = [GridFunction(spec, np.zeros(64)) for _ in range(fam.count)]
    monkeypatch.setattr(FunctionFamily, "generate", lambda self, s: zeros)
    rep = verify_weak_type_lebesgue("riesz", None, (w, w), EXPS, fam, spec)
    assert rep.samples_used == 0
    assert rep.samples_skipped == fam.count
    assert rep.c_obs is None


def test_constant_symbol_commutator_all_zero(setup):
    spec, w, fam, cubes = setup
    b = GridFunction(spec, np.full(64, 1.5))
    rep = verify_weak_type_lebesgue("comm_m", b, (w, w), EXPS, fam, spec)
    assert rep.c_obs == pytest.approx(0.0, abs=1e-12)


def test_morrey_scan_attaches_condition(setup):
    spec, w, fam, cubes = setup
    rep = verify_morrey("riesz", None, (w, w), EXPS, fam, cubes, spec)
    assert rep.theorem_id == "Morrey_I"
    assert rep.condition is not None
    assert rep.condition.condition_id == "PowerBumpStrict"
    assert rep.ainfty is None


def test_morrey_commutator_records_ainfty(setup):
    spec, w, fam, cubes = setup
    b = make_symbol(spec, "step")
    rep = verify_morrey("comm_m", b, (w, w), EXPS, fam, cubes, spec)
    assert rep.theorem_id == "Morrey_Comm"
    assert rep.condition.condition_id == "OrliczBumpStrict"
    assert rep.ainfty is not None
    assert rep.notes


def test_morrey_kappa_zero_reproduces_weak_type(setup):
    spec, w, fam, _ = setup
    exps0 = ExponentSet(gamma=0.25, p=2.0, q=4.0, kappa=0.0, r=2.0)
    box = CubeFamily((Cube((0.0,), 4.0),), "box")
    rep_m = verify_morrey("riesz", None, (w, w), exps0, fam, box, spec)
    rep_w = verify_weak_type_lebesgue("riesz", None, (w, w), EXPS, fam, spec)
    assert rep_m.ratios == pytest.approx(rep_w.ratios, rel=1e-10)


def test_morrey_kappa_range_guard(setup):
    spec, w, fam, cubes = setup
    bad = ExponentSet(gamma=0.25, p=2.0, q=4.0, kappa=0.5, r=2.0)  # = p/q endpoint
    with pytest.raises(ConfigError, match="kappa"):
        verify_morrey("riesz", None, (w, w), bad, fam, cubes, spec)


def test_amalgam_scan_and_s_inf_mapping(setup):
    spec, w, fam, cubes = setup
    ells = [0.5, 1.0]
    rep = verify_amalgam("riesz", None, (w, w, w), EXPS, fam, ells, spec)
    assert rep.theorem_id == "Amalgam_I"
    assert rep.c_obs is not None and np.isfinite(rep.c_obs)
    # s = inf reduces to the Morrey scan with kappa = 1 - p/alpha on the
    # induced family of all half-inside cubes
    exps_inf = ExponentSet(gamma=0.25, p=2.0, q=4.0, alpha=2.5, s=math.inf, r=2.0)
    rep_inf = verify_amalgam("riesz", None, (w, w, w), exps_inf, fam, ells, spec)
    induced = []
    for ell in ells:
        for y in spec.axis_centers():
            inside = min(y + ell / 2, 2.0) - max(y - ell / 2, -2.0)
            if inside >= 0.5 * ell:
                induced.append(Cube((float(y),), ell))
    fam_ind = CubeFamily(tuple(induced), "induced")
    kappa = 1.0 - EXPS.p / EXPS.alpha
    exps_k = ExponentSet(gamma=0.25, p=2.0, q=4.0, kappa=kappa, r=2.0)
    rep_mor = verify_morrey("riesz", None, (w, w), exps_k, fam, fam_ind, spec)
    assert rep_inf.ratios == pytest.approx(rep_mor.ratios, rel=1e-10)


def test_amalgam_exponent_guards(setup):
    spec, w, fam, _ = setup
    with pytest.raises(ConfigError, match="alpha"):
        verify_amalgam(
            "riesz",
            None,
            (w, w, w),
            ExponentSet(gamma=0.25, p=2.0, q=4.0, r=2.0),
            fam,
            [0.5],
            spec,
        )
    with pytest.raises(ConfigError, match="beta < s"):
        # beta(2.5) = 6.67 but s = 5 < beta
        verify_amalgam(
            "riesz",
            None,
            (w, w, w),
            ExponentSet(gamma=0.25, p=2.0, q=4.0, alpha=2.5, s=5.0, r=2.0),
            fam,
            [0.5],
            spec,
        )


def test_endpoint_bmo(setup):
    spec, w, fam, cubes = setup
    exps = ExponentSet(gamma=0.25, p=2.0, q=4.0, kappa=0.5, r=2.0)
    rep = verify_endpoint((w, w, w), exps, fam, "BMO", spec, family=cubes)
    assert rep.theorem_id == "Endpoint_BMO"
    assert np.isfinite(rep.c_obs)


def test_endpoint_bmo_requires_endpoint_kappa(setup):
    spec, w, fam, cubes = setup
    with pytest.raises(ConfigError, match="kappa = p/q"):
        verify_endpoint((w, w, w), EXPS, fam, "BMO", spec, family=cubes)


def test_endpoint_bmols(setup):
    spec, w, fam, cubes = setup
    s = 1.0 / (1.0 / 2.5 - 0.25)
    exps = ExponentSet(gamma=0.25, p=2.0, q=4.0, alpha=2.5, s=s, r=2.0)
    rep = verify_endpoint(
        (w, w, w), exps, fam, "BMOLs", spec, ell_grid=default_ell_grid(spec, 6)
    )
    assert rep.theorem_id == "Endpoint_BMOLs"
    assert np.isfinite(rep.c_obs)


def test_endpoint_mode_guard(setup):
    spec, w, fam, cubes = setup
    with pytest.raises(ConfigError, match="mode"):
        verify_endpoint((w, w, w), EXPS, fam, "nope", spec, family=cubes)


def test_bmo_constant_shift_invariance(setup):
    spec, w, fam, cubes = setup
    g = FunctionFamily("smooth_bumps", 1, 3).generate(spec)[0]
    shifted = GridFunction(spec, g.values + 17.0)
    assert bmo_norm(shifted, cubes).value == pytest.approx(
        bmo_norm(g, cubes).value, abs=1e-12
    )


def test_ratio_scale_invariance(setup):
    # both sides of a ratio are positively homogeneous, so rescaling a sample
    # leaves its ratio unchanged
    from wfs import lp_norm, weak_lp_norm, build_kernel, riesz_potential

    spec, w, fam, _ = setup
    f = fam.generate(spec)[0]
    k = build_kernel(spec, EXPS.gamma)
    r1 = weak_lp_norm(riesz_potential(f, k), w, EXPS.q) / lp_norm(f, w, EXPS.p)
    cf = GridFunction(spec, 4.0 * f.values)
    r2 = weak_lp_norm(riesz_potential(cf, k), w, EXPS.q) / lp_norm(cf, w, EXPS.p)
    assert r2 == pytest.approx(r1, rel=1e-12)


def test_determinism_identical_reports(setup):
    spec, w, fam, cubes = setup
    a = verify_morrey("riesz", None, (w, w), EXPS, fam, cubes, spec)
    b = verify_morrey("riesz", None, (w, w), EXPS, fam, cubes, spec)
    assert a.ratios == b.ratios
    assert a.c_obs == b.c_obs


def test_bmo_lemma_constant_symbol(setup):
    spec, w, _, cubes = setup
    b = GridFunction(spec, np.full(64, 2.0))
    out = bmo_lemma_check(b, Cube((0.1,), 0.2), 4, w, 2.0, cubes)
    assert out["bmo"] == 0.0
    assert out["ratio_means"] == 0.0


def test_bmo_lemma_step_decay(setup):
    spec, w, _, cubes = setup
    b = make_symbol(spec, "step")
    out = bmo_lemma_check(b, Cube((0.05,), 0.1), 4, w, 2.0, cubes)
    per_j = out["per_j"]
    # |b_{2^{j+1}Q} - b_Q| <= 1 and the norm is 1/2, so each term is at most
    # 1 / ((j+1) * 0.5)
    for j, val in enumerate(per_j, start=1):
        assert val <= 1.0 / ((j + 1) * 0.5) + 1e-12
    assert per_j[-1] <= per_j[0] + 1e-12


def test_bmo_lemma_log_symbol_bounded():
    spec = GridSpec(1, 2.0, 256)
    cubes = make_cube_family(spec, depth=3, translations=2)
    w = constant_weight(spec)
    b = make_symbol(spec, "log_abs")
    out = bmo_lemma_check(b, Cube((0.0078125,), 0.015625), 6, w, 2.0, cubes)
    assert max(out["per_j"]) < 5.0
    assert out["ratio_weighted"] < 10.0


def test_geometric_series_check_presets(spec1, family1):
    w = power_weight(spec1, 0.3)
    d = reverse_doubling_constant(w, family1)
    assert d > 1.0
    out = geometric_series_check(d, 1.0 / EXPS.q - EXPS.kappa / EXPS.p, 12)
    assert out["monotone"]
    assert out["bounded"]


def test_has_monotone_growth():
    assert has_monotone_growth([1.0, 1.1, 1.25, 1.4])
    assert not has_monotone_growth([1.0, 1.0, 1.0])
    assert not has_monotone_growth([1.0, 1.4, 1.2])


def test_worker_env_guard(monkeypatch):
    from wfs.verify import worker_count

    monkeypatch.setenv("WFS_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("WFS_THREADS", "zebra")
    with pytest.raises(ConfigError):
        worker_count()
