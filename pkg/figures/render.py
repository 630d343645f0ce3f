#!/usr/bin/env python3
"""Render publication-style figures from kerrqed CSV bundles.

Usage: render.py <preset> <csv_dir> <out_png>

Pure post-processing: reads the CSV files written by `kerrqed figure
<preset>`, applies the per-preset recipe (axes, scales, curve styles), and
writes one raster image.  No physics is computed here.  A missing input
file, an empty CSV, or a schema mismatch (missing column) aborts with a
diagnostic naming the offending columns and a non-zero exit code.
"""

import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# caption-faithful styles: solid black / dashed red / dot-dashed green,
# double-dot-dashed blue for guide lines
STYLES = {
    "solid_black": dict(color="black", linestyle="-"),
    "dashed_red": dict(color="red", linestyle="--"),
    "dotdash_green": dict(color="green", linestyle="-."),
    "solid_blue": dict(color="blue", linestyle="-"),
    "guide_blue": dict(color="blue", linestyle=(0, (6, 2, 1, 2, 1, 2))),
}


@dataclass
class Curve:
    file: str
    x: str
    y: str
    style: str
    label: str
    where: tuple = ()  # optional (column, value) row filter


@dataclass
class PlotRecipe:
    preset: str
    curves: list
    xlabel: str
    ylabel: str
    logx: bool = False
    nup_guide: bool = False  # horizontal line at log10(sqrt(N_up)) from the manifest
    extra_files: dict = field(default_factory=dict)


def _fig2_recipe(preset, dds):
    curves = []
    for dd, style in zip(dds, ("solid_black", "dashed_red", "dotdash_green")):
        fname = f"{preset}__dd{dd:g}.csv"
        curves.append(Curve(fname, "omega_mhz", "log10_abs_as_upsweep", style,
                            f"up, $\\Delta_d/2\\pi$ = {dd:g} MHz"))
        curves.append(Curve(fname, "omega_mhz", "log10_abs_as_downsweep", style,
                            f"down, {dd:g} MHz"))
    return PlotRecipe(preset, curves, r"$|\Omega|/2\pi$ (MHz)", r"$\log_{10}|A_s|$",
                      logx=True, nup_guide=True)


def _fig34_scan_recipe(preset, xcol, xlabel):
    return PlotRecipe(preset, [
        Curve(f"{preset}.csv", xcol, "g2", "solid_black", "lower branch",
              where=("branch", "lower")),
        Curve(f"{preset}.csv", xcol, "g2", "dashed_red", "upper branch",
              where=("branch", "upper")),
    ], xlabel, r"$g^{(2)}(0)$", logx=(xcol == "omega_mhz"))


def _fig4_recipe(preset, ycol, ylabel):
    return PlotRecipe(preset, [
        Curve(f"{preset}__dd9.74.csv", "omega_prime_mhz", ycol, "solid_black",
              r"$\Delta_d/2\pi$ = 9.74 MHz"),
        Curve(f"{preset}__dd9.96.csv", "omega_prime_mhz", ycol, "dashed_red",
              r"$\Delta_d/2\pi$ = 9.96 MHz"),
    ], r"$\omega'/2\pi$ (MHz)", ylabel)


RECIPES = {
    "fig1a": PlotRecipe("fig1a", [
        Curve("fig1a.csv", "n_c", "e_free_0", "dotdash_green", "free $|0\\rangle$"),
        Curve("fig1a.csv", "n_c", "e_free_1", "dotdash_green", "free $|1\\rangle$"),
        Curve("fig1a.csv", "n_c", "e_coupled_0", "solid_blue", "coupled lower"),
        Curve("fig1a.csv", "n_c", "e_coupled_1", "solid_blue", "coupled upper"),
    ], r"$n_c$", r"$E/\hbar\chi$"),
    "fig1b": PlotRecipe("fig1b", [
        Curve("fig1b.csv", "n_c", f"e_{k}_mhz", "dotdash_green", f"$E_{k}$")
        for k in range(4)
    ], r"$n_c$", r"$E_k/2\pi$ (MHz)"),
    "fig1c": PlotRecipe("fig1c", [
        Curve("fig1c.csv", "n_c", "mean_n_ratio_1", "dotdash_green", r"$\chi/|\Omega|=1$"),
        Curve("fig1c.csv", "n_c", "mean_n_ratio_10", "dashed_red", r"$\chi/|\Omega|=10$"),
        Curve("fig1c.csv", "n_c", "mean_n_ratio_100", "solid_blue", r"$\chi/|\Omega|=100$"),
    ], r"$n_c$", r"$\langle n\rangle$"),
    "fig2a": _fig2_recipe("fig2a", [-1.0, 0.0, 1.0]),
    "fig2b": _fig2_recipe("fig2b", [36.0, 37.0, 38.0]),
    "fig3a": _fig34_scan_recipe("fig3a", "omega_mhz", r"$|\Omega|/2\pi$ (MHz)"),
    "fig3b": PlotRecipe("fig3b", [
        Curve("fig3b__omega0.01.csv", "tau_us", "g2", "solid_black",
              r"$|\Omega|/2\pi$ = 0.01 MHz"),
        Curve("fig3b__omega1.csv", "tau_us", "g2", "dashed_red",
              r"$|\Omega|/2\pi$ = 1 MHz"),
    ], r"$\tau$ ($\mu$s)", r"$g^{(2)}(\tau)$"),
    "fig3c": _fig34_scan_recipe("fig3c", "delta_d_mhz", r"$\Delta_d/2\pi$ (MHz)"),
    "fig3d": _fig34_scan_recipe("fig3d", "delta_d_mhz", r"$\Delta_d/2\pi$ (MHz)"),
    "fig4a": _fig4_recipe("fig4a", "a_r", r"$A_R(\omega')$"),
    "fig4b": _fig4_recipe("fig4b", "a_i", r"$A_I(\omega')$"),
}


class RenderError(Exception):
    pass


def _load_csv(path: Path):
    if not path.exists():
        raise RenderError(f"missing input file: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise RenderError(f"empty CSV (no header): {path}")
        rows = list(reader)
    if not rows:
        raise RenderError(f"empty CSV (no data rows): {path}")
    return reader.fieldnames, rows


def _check_schema(recipe: PlotRecipe, csv_dir: Path):
    """Every curve may reference only columns present in its paired CSV."""
    tables = {}
    problems = []
    for curve in recipe.curves:
        if curve.file not in tables:
            tables[curve.file] = _load_csv(csv_dir / curve.file)
        header, _ = tables[curve.file]
        needed = [curve.x, curve.y] + ([curve.where[0]] if curve.where else [])
        missing = [c for c in needed if c not in header]
        if missing:
            problems.append(f"{curve.file}: missing column(s) {', '.join(missing)}")
    if problems:
        raise RenderError("schema mismatch: " + "; ".join(problems))
    return tables


def _series(rows, curve: Curve):
    xs, ys = [], []
    for row in rows:
        if curve.where and row[curve.where[0]] != curve.where[1]:
            continue
        sx, sy = row[curve.x], row[curve.y]
        if sx == "" or sy == "":
            continue
        x, y = float(sx), float(sy)
        if math.isfinite(x) and math.isfinite(y):
            xs.append(x)
            ys.append(y)
    return xs, ys


def render(preset: str, csv_dir, out_png) -> Path:
    if preset not in RECIPES:
        raise RenderError(f"unknown preset {preset!r}; choose from {sorted(RECIPES)}")
    csv_dir = Path(csv_dir)
    out_png = Path(out_png)
    recipe = RECIPES[preset]
    tables = _check_schema(recipe, csv_dir)

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    seen_labels = set()
    for curve in recipe.curves:
        _, rows = tables[curve.file]
        xs, ys = _series(rows, curve)
        if not xs:
            continue
        label = curve.label if curve.label not in seen_labels else None
        seen_labels.add(curve.label)
        ax.plot(xs, ys, label=label, linewidth=1.4, **STYLES[curve.style])

    if recipe.nup_guide:
        manifest_path = csv_dir / f"{preset}.manifest.json"
        if manifest_path.exists():
            extras = json.loads(manifest_path.read_text()).get("extras", {})
            n_up = extras.get("n_up")
            if n_up and n_up > 0:
                ax.axhline(0.5 * math.log10(n_up), label=r"$\sqrt{N_{\rm up}}$",
                           linewidth=1.2, **STYLES["guide_blue"])

    if recipe.logx:
        ax.set_xscale("log")
    ax.set_xlabel(recipe.xlabel)
    ax.set_ylabel(recipe.ylabel)
    ax.set_title(preset)
    ax.legend(fontsize=7, loc="best")
    fig.tight_layout()
    out_png.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 3:
        print("usage: render.py <preset> <csv_dir> <out_png>", file=sys.stderr)
        return 2
    preset, csv_dir, out_png = argv
    try:
        render(preset, csv_dir, out_png)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
