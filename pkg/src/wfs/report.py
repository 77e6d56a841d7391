"""Report emission: JSON-ready conversion, delimited output, and figure rendering.

Figures are rendered with the Agg backend straight to files, next to the CSV
they illustrate; nothing here opens a window.  Reports carry no timestamps so
identical runs emit identical bytes.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .grid import GridFunction, grid_points

__all__ = [
    "to_jsonable",
    "dumps_report",
    "write_field_csv",
    "write_ratios_csv",
    "write_rows_csv",
    "save_ratio_figure",
    "save_trend_figure",
    "save_field_figure",
    "save_sweep_figure",
]


def to_jsonable(obj):
    """Recursively convert dataclasses / numpy types / infinities to JSON-safe data."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: to_jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        if math.isinf(val):
            return "inf" if val > 0 else "-inf"
        if math.isnan(val):
            return "nan"
        return val
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps_report(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True)


def write_field_csv(path, f: GridFunction) -> None:
    """Cell-center coordinates and values, one row per cell."""
    pts = grid_points(f.spec)
    header = ["x1", "value"] if f.spec.dim == 1 else ["x1", "x2", "value"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for coords, val in zip(pts, f.values.ravel()):
            writer.writerow([f"{c:.12g}" for c in coords] + [f"{val:.12g}"])


def write_ratios_csv(path, ratios) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample", "ratio"])
        for k, r in enumerate(ratios):
            writer.writerow([k, f"{float(r):.12g}"])


def write_rows_csv(path, rows: list[dict], fieldnames: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: to_jsonable(v) for k, v in row.items()})


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def save_ratio_figure(path, ratios, c_obs=None, title: str = "observed ratios") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    vals = [float(r) for r in ratios]
    if vals:
        ax.hist(vals, bins=min(20, max(5, len(vals) // 2)), color="steelblue", alpha=0.8)
    if c_obs is not None:
        ax.axvline(float(c_obs), color="firebrick", linestyle="--", label=f"max = {c_obs:.4g}")
        ax.legend()
    ax.set_xlabel("norm ratio")
    ax.set_ylabel("samples")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trend_figure(path, per_scale, title: str = "condition sup per scale") -> None:
    """per_scale: sequence of (side, sup), largest scale first."""
    plt = _pyplot()
    sides = [float(s) for s, _ in per_scale]
    sups = [float(v) for _, v in per_scale]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(sides, sups, marker="o", color="steelblue")
    ax.set_xscale("log")
    ax.set_xlabel("cube side")
    ax.set_ylabel("sup over cubes at that scale")
    ax.set_title(title)
    ax.invert_xaxis()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_field_figure(path, f: GridFunction, title: str = "field") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    if f.spec.dim == 1:
        ax.plot(f.spec.axis_centers(), f.values, color="steelblue")
        ax.set_xlabel("x")
        ax.set_ylabel("value")
    else:
        extent = [-f.spec.half_width, f.spec.half_width] * 2
        im = ax.imshow(
            f.values.T, origin="lower", extent=extent, cmap="viridis", aspect="equal"
        )
        fig.colorbar(im, ax=ax)
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(path, rows: list[dict], title: str = "sweep") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    c_vals = [row.get("c_obs") for row in rows]
    xs = list(range(len(rows)))
    ys = [float(c) if c is not None else float("nan") for c in c_vals]
    ax.plot(xs, ys, marker="o", color="steelblue")
    ax.set_xlabel("run index")
    ax.set_ylabel("observed constant")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def sibling(path, suffix: str, ext: str) -> Path:
    """out.json -> out<suffix>.<ext>, used to place CSV/figures next to a report."""
    p = Path(path)
    return p.with_name(p.stem + suffix + "." + ext)
