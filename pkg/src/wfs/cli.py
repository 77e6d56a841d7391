"""Command-line front end: one JSON config per run, flags only for output control.

Commands: norm, apply, check-condition, verify, sweep.  Every report embeds
the parameters it was produced with, so a run is reproducible from its output
plus the config.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import tempfile
from pathlib import Path

import numpy as np

from .conditions import (
    CONDITION_IDS,
    orlicz_bump_condition,
    power_bump_condition,
    sawyer_condition,
)
from .errors import ConfigError, NumericalError
from .grid import Cube, CubeFamily, GridFunction, GridSpec, make_cube_family
from .operators import build_kernel, commutator, riesz_potential
from .orlicz import YoungFunction, luxemburg_norm
from .report import (
    dumps_report,
    save_field_figure,
    save_ratio_figure,
    save_sweep_figure,
    save_trend_figure,
    sibling,
    write_field_csv,
    write_ratios_csv,
    write_rows_csv,
)
from .spaces import (
    ExponentSet,
    NormResult,
    amalgam_norm,
    bmo_ls_norm,
    bmo_norm,
    default_ell_grid,
    lp_norm,
    morrey_norm,
    weak_amalgam_norm,
    weak_lp_norm,
    weak_morrey_norm,
)
from .verify import (
    THEOREM_IDS,
    FunctionFamily,
    make_symbol,
    verify_amalgam,
    verify_endpoint,
    verify_morrey,
    verify_weak_type_lebesgue,
)
from .weights import Weight, constant_weight, power_product_weight, power_weight, table_weight

NORM_IDS = (
    "lp",
    "weak_lp",
    "morrey",
    "weak_morrey",
    "amalgam",
    "weak_amalgam",
    "bmo",
    "bmo_ls",
    "luxemburg",
)

_SECTION_KEYS = {
    "grid": {"dim", "half_width", "cells_per_axis"},
    "weights": {"w", "nu", "mu"},
    "exponents": {"gamma", "p", "q", "kappa", "alpha", "beta", "s", "r", "m"},
    "cube_family": {"depth", "translations"},
    "ell_grid": {"points", "values"},
    "family": {"generator", "count", "seed", "signed"},
    "function": None,  # validated by the constructor registry
    "symbol": None,
    "cube": {"center", "side"},
    "young": None,
    "norm": {"norm_id"},
    "condition": {"condition_id"},
    "verify": {"theorem_id", "band", "j_max"},
    "sweep": None,
}
_TOP_KEYS = set(_SECTION_KEYS) | {"seed"}


def _check_keys(mapping: dict, allowed, context: str) -> None:
    if allowed is None:
        return
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {context}")


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(cfg, _TOP_KEYS, "config")
    for section, allowed in _SECTION_KEYS.items():
        if section in cfg and allowed is not None:
            if not isinstance(cfg[section], dict):
                raise ConfigError(f"section {section!r} must be a JSON object")
            _check_keys(cfg[section], allowed, f"section {section!r}")
    return cfg


def _require(cfg: dict, section: str) -> dict:
    if section not in cfg:
        raise ConfigError(f"config is missing the {section!r} section")
    return cfg[section]


def build_grid(cfg: dict) -> GridSpec:
    g = _require(cfg, "grid")
    try:
        return GridSpec(
            dim=int(g["dim"]),
            half_width=float(g["half_width"]),
            cells_per_axis=int(g["cells_per_axis"]),
        )
    except KeyError as exc:
        raise ConfigError(f"grid section is missing {exc}") from exc


def build_weight(spec: GridSpec, wcfg: dict, name: str) -> Weight:
    if not isinstance(wcfg, dict) or "kind" not in wcfg:
        raise ConfigError(f"weight {name!r} must be an object with a 'kind'")
    kind = wcfg["kind"]
    if kind == "constant":
        _check_keys(wcfg, {"kind", "c"}, f"weight {name!r}")
        return constant_weight(spec, float(wcfg.get("c", 1.0)))
    if kind == "power":
        _check_keys(wcfg, {"kind", "a"}, f"weight {name!r}")
        return power_weight(spec, float(wcfg["a"]))
    if kind == "power_product":
        _check_keys(wcfg, {"kind", "exponents"}, f"weight {name!r}")
        return power_product_weight(spec, wcfg["exponents"])
    if kind == "table":
        _check_keys(wcfg, {"kind", "values"}, f"weight {name!r}")
        return table_weight(spec, wcfg["values"])
    raise ConfigError(f"unknown weight kind {kind!r} for {name!r}")


def build_weights(spec: GridSpec, cfg: dict) -> dict[str, Weight]:
    wsec = cfg.get("weights", {})
    out = {}
    for name in ("w", "nu", "mu"):
        if name in wsec:
            out[name] = build_weight(spec, wsec[name], name)
        else:
            out[name] = constant_weight(spec, 1.0)
    return out


def _parse_s(value):
    if value is None:
        return None
    if isinstance(value, str):
        if value.lower() in ("inf", "infinity"):
            return math.inf
        raise ConfigError(f"s must be a number or 'inf', got {value!r}")
    return float(value)


def build_exponents(cfg: dict) -> ExponentSet:
    e = _require(cfg, "exponents")
    missing = {"gamma", "p", "q"} - set(e)
    if missing:
        raise ConfigError(f"exponents section is missing {sorted(missing)}")
    return ExponentSet(
        gamma=float(e["gamma"]),
        p=float(e["p"]),
        q=float(e["q"]),
        kappa=None if e.get("kappa") is None else float(e["kappa"]),
        alpha=None if e.get("alpha") is None else float(e["alpha"]),
        beta=None if e.get("beta") is None else float(e["beta"]),
        s=_parse_s(e.get("s")),
        r=None if e.get("r") is None else float(e["r"]),
        m=int(e.get("m", 1)),
    )


def build_cube_family(spec: GridSpec, cfg: dict) -> CubeFamily:
    fam = cfg.get("cube_family", {"depth": 3, "translations": 1})
    return make_cube_family(
        spec, depth=int(fam.get("depth", 3)), translations=int(fam.get("translations", 1))
    )


def build_ell_grid(spec: GridSpec, cfg: dict) -> np.ndarray:
    sec = cfg.get("ell_grid", {})
    if "values" in sec:
        vals = np.asarray([float(v) for v in sec["values"]])
        if vals.size == 0:
            raise ConfigError("ell_grid values must be nonempty")
        return vals
    return default_ell_grid(spec, points=int(sec.get("points", 12)))


def build_family(cfg: dict, seed_override=None) -> FunctionFamily:
    fam = _require(cfg, "family")
    seed = fam.get("seed", cfg.get("seed", 0))
    if seed_override is not None:
        seed = seed_override
    return FunctionFamily(
        generator=fam.get("generator", "indicator_boxes"),
        count=int(fam.get("count", 10)),
        rng_seed=int(seed),
        signed=bool(fam.get("signed", False)),
    )


def build_function(spec: GridSpec, fcfg: dict, context: str = "function") -> GridFunction:
    if not isinstance(fcfg, dict) or "kind" not in fcfg:
        raise ConfigError(f"{context} must be an object with a 'kind'")
    kind = fcfg["kind"]
    centers = spec.axis_centers()
    if spec.dim == 1:
        pts = centers[:, None]
    else:
        x1, x2 = np.meshgrid(centers, centers, indexing="ij")
        pts = np.stack([x1, x2], axis=-1)
    if kind == "constant":
        _check_keys(fcfg, {"kind", "c"}, context)
        return GridFunction(spec, np.full(spec.shape, float(fcfg.get("c", 1.0))))
    if kind in ("step", "log_abs"):
        _check_keys(fcfg, {"kind"}, context)
        return make_symbol(spec, kind)
    if kind == "indicator_box":
        _check_keys(fcfg, {"kind", "corner", "size"}, context)
        corner = [float(v) for v in fcfg["corner"]]
        size = [float(v) for v in fcfg["size"]]
        if len(corner) != spec.dim or len(size) != spec.dim:
            raise ConfigError(f"{context}: corner and size must have {spec.dim} entries")
        inside = np.ones(spec.shape, dtype=bool)
        for k in range(spec.dim):
            xk = pts[..., k]
            inside &= (xk >= corner[k]) & (xk <= corner[k] + size[k])
        return GridFunction(spec, inside.astype(float))
    if kind == "power_bump":
        _check_keys(fcfg, {"kind", "center", "theta", "radius"}, context)
        x0 = np.asarray([float(v) for v in fcfg["center"]])
        theta = float(fcfg["theta"])
        radius = float(fcfg["radius"])
        dist = np.sqrt(((pts - x0) ** 2).sum(axis=-1))
        dist = np.maximum(dist, spec.h / 4.0)
        return GridFunction(spec, np.where(dist <= radius, dist**-theta, 0.0))
    if kind == "gauss_bump":
        _check_keys(fcfg, {"kind", "center", "sigma", "height"}, context)
        x0 = np.asarray([float(v) for v in fcfg["center"]])
        sigma = float(fcfg["sigma"])
        height = float(fcfg.get("height", 1.0))
        d2 = ((pts - x0) ** 2).sum(axis=-1)
        return GridFunction(spec, height * np.exp(-d2 / (2.0 * sigma**2)))
    if kind == "table":
        _check_keys(fcfg, {"kind", "values"}, context)
        return GridFunction(spec, np.asarray(fcfg["values"], dtype=float))
    raise ConfigError(f"unknown {context} kind {kind!r}")


def build_young(ycfg: dict) -> YoungFunction:
    if not isinstance(ycfg, dict) or "kind" not in ycfg:
        raise ConfigError("young section must be an object with a 'kind'")
    kind = ycfg["kind"]
    if kind == "power":
        _check_keys(ycfg, {"kind", "p"}, "young")
        return YoungFunction("power", exponent=float(ycfg["p"]))
    if kind == "logbump":
        _check_keys(ycfg, {"kind", "pprime", "m"}, "young")
        return YoungFunction(
            "logbump", exponent=float(ycfg["pprime"]), log_power=int(ycfg.get("m", 1))
        )
    if kind == "expm1":
        _check_keys(ycfg, {"kind"}, "young")
        return YoungFunction("expm1")
    raise ConfigError(f"unknown young function kind {kind!r}")


def build_cube(cfg: dict) -> Cube:
    c = _require(cfg, "cube")
    return Cube(center=tuple(float(v) for v in c["center"]), side=float(c["side"]))


def run_norm(cfg: dict) -> NormResult:
    spec = build_grid(cfg)
    weights = build_weights(spec, cfg)
    exps = build_exponents(cfg)
    norm_id = _require(cfg, "norm").get("norm_id")
    if norm_id not in NORM_IDS:
        raise ConfigError(f"unknown norm_id {norm_id!r}; choose one of {NORM_IDS}")
    f = build_function(spec, _require(cfg, "function"))
    if norm_id == "lp":
        value = lp_norm(f, weights["w"], exps.p)
        return NormResult(value, "lp", {"p": exps.p})
    if norm_id == "weak_lp":
        value = weak_lp_norm(f, weights["w"], exps.p)
        return NormResult(value, "weak_lp", {"p": exps.p})
    if norm_id == "luxemburg":
        phi = build_young(_require(cfg, "young"))
        value = luxemburg_norm(f, build_cube(cfg), phi)
        return NormResult(value, "luxemburg", {"young": cfg["young"]})
    if norm_id == "morrey":
        if exps.kappa is None or not (0.0 <= exps.kappa < 1.0):
            raise ConfigError(
                f"morrey norm needs kappa in [0, 1), got {exps.kappa}"
            )
        family = build_cube_family(spec, cfg)
        return morrey_norm(f, weights["nu"], weights["w"], exps.p, exps.kappa, family)
    if norm_id == "weak_morrey":
        if exps.kappa is None or not (0.0 <= exps.kappa < 1.0):
            raise ConfigError(
                f"weak morrey norm needs kappa in [0, 1), got {exps.kappa}"
            )
        family = build_cube_family(spec, cfg)
        return weak_morrey_norm(f, weights["w"], exps.p, exps.kappa, family)
    if norm_id == "amalgam":
        if exps.alpha is None or exps.s is None:
            raise ConfigError("amalgam norm needs alpha and s")
        ells = build_ell_grid(spec, cfg)
        return amalgam_norm(
            f, weights["nu"], weights["w"], weights["mu"], exps.p, exps.s, exps.alpha, ells
        )
    if norm_id == "weak_amalgam":
        if exps.s is None:
            raise ConfigError("weak amalgam norm needs s")
        beta = exps.beta if exps.beta is not None else exps.beta_from_alpha()
        ells = build_ell_grid(spec, cfg)
        return weak_amalgam_norm(f, weights["w"], weights["mu"], exps.q, exps.s, beta, ells)
    if norm_id == "bmo":
        family = build_cube_family(spec, cfg)
        return bmo_norm(f, family)
    # bmo_ls
    if exps.s is None:
        raise ConfigError("bmo_ls norm needs s")
    ells = build_ell_grid(spec, cfg)
    return bmo_ls_norm(f, weights["mu"], exps.s, ells)


def run_apply(cfg: dict) -> GridFunction:
    spec = build_grid(cfg)
    exps = build_exponents(cfg)
    exps.validate_gamma(spec.dim)
    kernel = build_kernel(spec, exps.gamma)
    f = build_function(spec, _require(cfg, "function"))
    if "symbol" in cfg:
        b = build_function(spec, cfg["symbol"], context="symbol")
        return commutator(b, f, kernel, m=exps.m)
    return riesz_potential(f, kernel)


def run_condition(cfg: dict, condition_id: str | None):
    spec = build_grid(cfg)
    weights = build_weights(spec, cfg)
    exps = build_exponents(cfg)
    exps.validate_gamma(spec.dim)
    family = build_cube_family(spec, cfg)
    cid = condition_id or cfg.get("condition", {}).get("condition_id")
    if cid not in CONDITION_IDS:
        raise ConfigError(f"unknown condition id {cid!r}; choose one of {CONDITION_IDS}")
    if cid == "SawyerDagger":
        kernel = build_kernel(spec, exps.gamma)
        return sawyer_condition(weights["w"], weights["nu"], exps, kernel, family)
    if cid in ("PowerBumpEq", "PowerBumpStrict"):
        if cid == "PowerBumpEq" and exps.q != exps.p:
            raise ConfigError("PowerBumpEq requires q = p")
        if cid == "PowerBumpStrict" and not exps.q > exps.p:
            raise ConfigError("PowerBumpStrict requires q > p")
        return power_bump_condition(weights["w"], weights["nu"], exps, family)
    if cid == "OrliczBumpM" and exps.m < 2:
        raise ConfigError("OrliczBumpM requires m >= 2 in the exponents")
    if cid == "OrliczBumpEq" and exps.q != exps.p:
        raise ConfigError("OrliczBumpEq requires q = p")
    if cid == "OrliczBumpStrict" and not exps.q > exps.p:
        raise ConfigError("OrliczBumpStrict requires q > p")
    return orlicz_bump_condition(weights["w"], weights["nu"], exps, family)


def _verify_once(cfg: dict, spec: GridSpec, fam: FunctionFamily, ell_grid):
    weights = build_weights(spec, cfg)
    exps = build_exponents(cfg)
    theorem_id = _require(cfg, "verify").get("theorem_id")
    if theorem_id not in THEOREM_IDS:
        raise ConfigError(f"unknown theorem_id {theorem_id!r}; choose one of {THEOREM_IDS}")
    needs_symbol = theorem_id in ("WeakLp_Comm", "Morrey_Comm", "Morrey_CommM", "Amalgam_Comm", "Amalgam_CommM")
    b = build_function(spec, cfg["symbol"], context="symbol") if "symbol" in cfg else None
    if needs_symbol and b is None:
        raise ConfigError(f"theorem {theorem_id} needs a 'symbol' section for b")
    if theorem_id in ("Morrey_CommM", "Amalgam_CommM") and exps.m < 2:
        raise ConfigError(f"theorem {theorem_id} requires m >= 2 in the exponents")
    pair = (weights["w"], weights["nu"])
    triple = (weights["w"], weights["nu"], weights["mu"])
    family = build_cube_family(spec, cfg)
    if theorem_id == "WeakLp_I":
        return verify_weak_type_lebesgue("riesz", None, pair, exps, fam, spec)
    if theorem_id == "WeakLp_Comm":
        return verify_weak_type_lebesgue("comm_m", b, pair, exps, fam, spec)
    if theorem_id in ("Morrey_I", "Morrey_Comm", "Morrey_CommM"):
        op = "riesz" if theorem_id == "Morrey_I" else "comm_m"
        return verify_morrey(op, b, pair, exps, fam, family, spec)
    if theorem_id in ("Amalgam_I", "Amalgam_Comm", "Amalgam_CommM"):
        op = "riesz" if theorem_id == "Amalgam_I" else "comm_m"
        return verify_amalgam(op, b, triple, exps, fam, ell_grid, spec, condition_family=family)
    if theorem_id == "Endpoint_BMO":
        if exps.kappa is None or not exps.is_endpoint_kappa:
            raise ConfigError(
                f"Endpoint_BMO requires kappa = p/q = {exps.p / exps.q}, got {exps.kappa}"
            )
        return verify_endpoint(triple, exps, fam, "BMO", spec, family=family)
    # Endpoint_BMOLs
    if not exps.is_endpoint_s:
        raise ConfigError(
            "Endpoint_BMOLs requires 1/s = 1/alpha - (1/p - 1/q); "
            f"got s={exps.s}, alpha={exps.alpha}, p={exps.p}, q={exps.q}"
        )
    return verify_endpoint(triple, exps, fam, "BMOLs", spec, ell_grid=ell_grid)


def run_verify(cfg: dict, refine: bool, seed_override=None):
    spec = build_grid(cfg)
    fam = build_family(cfg, seed_override)
    # the scale grid is pinned to the coarse grid so a refinement pair compares
    # the same continuous scales
    ell_grid = build_ell_grid(spec, cfg)
    report = _verify_once(cfg, spec, fam, ell_grid)
    if refine:
        fine_spec = GridSpec(spec.dim, spec.half_width, 2 * spec.cells_per_axis)
        fine = _verify_once(cfg, fine_spec, fam, ell_grid)
        band = float(cfg.get("verify", {}).get("band", 0.2))
        stable = None
        if report.c_obs and fine.c_obs:
            stable = bool(abs(fine.c_obs / report.c_obs - 1.0) <= band)
        report = type(report)(
            **{
                **report.__dict__,
                "refinement": {
                    "n": spec.cells_per_axis,
                    "c_obs_n": report.c_obs,
                    "c_obs_2n": fine.c_obs,
                    "band": band,
                    "within_band": stable,
                },
            }
        )
    return report


def _set_by_path(cfg: dict, path: str, value):
    keys = path.split(".")
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value


def run_sweep(cfg: dict, seed_override=None) -> list[dict]:
    import copy
    import itertools

    sweep = cfg.get("sweep")
    if not sweep or not isinstance(sweep, list):
        raise ConfigError("sweep command needs a nonempty 'sweep' list in the config")
    for entry in sweep:
        if not isinstance(entry, dict) or "path" not in entry or "values" not in entry:
            raise ConfigError("each sweep entry needs 'path' and 'values'")
    paths = [entry["path"] for entry in sweep]
    value_lists = [entry["values"] for entry in sweep]
    rows = []
    for combo in itertools.product(*value_lists):
        run_cfg = copy.deepcopy(cfg)
        run_cfg.pop("sweep")
        for path, value in zip(paths, combo):
            _set_by_path(run_cfg, path, value)
        report = run_verify(run_cfg, refine=False, seed_override=seed_override)
        row = {path: value for path, value in zip(paths, combo)}
        row.update(
            {
                "theorem_id": report.theorem_id,
                "c_obs": report.c_obs,
                "samples_used": report.samples_used,
                "samples_skipped": report.samples_skipped,
            }
        )
        rows.append(row)
    return rows


def _emit_json(text: str, out) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfs",
        description="Operators, weight classes, function-space norms, and "
        "inequality verification on truncated uniform grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("norm", "evaluate one norm functional and print it as JSON"),
        ("apply", "apply the operator (or a commutator) and emit the field as CSV"),
        ("check-condition", "scan a two-weight condition over the cube family"),
        ("verify", "run an inequality verification scan"),
        ("sweep", "cartesian sweep over config parameters, one verify run each"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", help="write the primary output to this path")
        p.add_argument(
            "--csv",
            action="store_true",
            help="also write delimited output (and figures) next to --out",
        )
        p.add_argument("--seed", type=int, help="override the family seed")
        if name == "verify":
            p.add_argument(
                "--refine",
                action="store_true",
                help="rerun on a once-refined grid and report the stability pair",
            )
        if name == "check-condition":
            p.add_argument("--condition", help="condition id to check")
            p.add_argument(
                "--scale-trend",
                action="store_true",
                help="include per-scale sups in the report",
            )
    return parser


def _run(args) -> int:
    cfg = load_config(args.config)
    if args.command == "norm":
        result = run_norm(cfg)
        _emit_json(dumps_report(result), args.out)
        return 0
    if args.command == "apply":
        field = run_apply(cfg)
        if args.out:
            write_field_csv(args.out, field)
            if args.csv:
                save_field_figure(sibling(args.out, "", "png"), field, title="operator output")
        else:
            with tempfile.NamedTemporaryFile("r", suffix=".csv") as tmp:
                write_field_csv(tmp.name, field)
                sys.stdout.write(Path(tmp.name).read_text())
        return 0
    if args.command == "check-condition":
        report = run_condition(cfg, getattr(args, "condition", None))
        payload = report if args.scale_trend else type(report)(
            **{**report.__dict__, "per_scale": ()}
        )
        _emit_json(dumps_report(payload), args.out)
        if args.csv and args.out:
            rows = [{"side": s, "sup": v} for s, v in report.per_scale]
            write_rows_csv(sibling(args.out, "_trend", "csv"), rows, ["side", "sup"])
            save_trend_figure(sibling(args.out, "_trend", "png"), report.per_scale)
        return 0
    if args.command == "verify":
        report = run_verify(cfg, refine=bool(getattr(args, "refine", False)), seed_override=args.seed)
        _emit_json(dumps_report(report), args.out)
        if args.csv and args.out:
            write_ratios_csv(sibling(args.out, "_ratios", "csv"), report.ratios)
            save_ratio_figure(
                sibling(args.out, "_ratios", "png"),
                report.ratios,
                report.c_obs,
                title=f"{report.theorem_id}: observed ratios",
            )
            if report.condition is not None:
                save_trend_figure(
                    sibling(args.out, "_trend", "png"),
                    report.condition.per_scale,
                    title=f"{report.condition.condition_id} sup per scale",
                )
        return 0
    # sweep
    rows = run_sweep(cfg, seed_override=args.seed)
    fields = list(rows[0].keys())
    if args.out:
        write_rows_csv(args.out, rows, fields)
        if args.csv:
            save_sweep_figure(sibling(args.out, "", "png"), rows)
    else:
        with tempfile.NamedTemporaryFile("r", suffix=".csv") as tmp:
            write_rows_csv(tmp.name, rows, fields)
            sys.stdout.write(Path(tmp.name).read_text())
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ValueError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
