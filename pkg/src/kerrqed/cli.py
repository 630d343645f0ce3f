"""Command-line interface: every computation as a subcommand with CSV output.

All frequency flags are ordinary frequencies nu = omega/2pi in MHz.  Grids
use the inclusive syntax start:stop:count.  Each run writes its data files
plus one JSON manifest holding the fully resolved options, so any run can
be reproduced byte-identically with ``kerrqed rerun <manifest>``.

Exit codes: 0 success, 2 flag validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import KerrQEDError
from .model import MHZ, SystemParams, to_mhz
from . import fock_spectrum, io_response, lindblad_oracle, steady_state
from . import fluctuations

SCHEMA_VERSION = 1


class _UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing and formatting helpers

def parse_grid(spec: str) -> np.ndarray:
    """Inclusive linear grid 'start:stop:count'."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise _UsageError(f"grid must be start:stop:count, got {spec!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise _UsageError(f"malformed grid {spec!r}: {exc}") from exc
    if count < 1:
        raise _UsageError(f"grid count must be >= 1 in {spec!r}")
    return np.linspace(start, stop, count)


def parse_log_grid(spec: str) -> np.ndarray:
    """Inclusive logarithmic grid 'start:stop:count' with start, stop > 0."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise _UsageError(f"log grid must be start:stop:count, got {spec!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise _UsageError(f"malformed grid {spec!r}: {exc}") from exc
    if start <= 0 or stop <= 0 or count < 1:
        raise _UsageError(f"log grid needs positive endpoints and count >= 1 in {spec!r}")
    return np.geomspace(start, stop, count)


def parse_ratios(spec: str) -> list[float]:
    try:
        ratios = [float(tok) for tok in spec.split(",") if tok.strip()]
    except ValueError as exc:
        raise _UsageError(f"malformed ratio list {spec!r}: {exc}") from exc
    if not ratios or any(r <= 0 for r in ratios):
        raise _UsageError(f"ratios must be positive, got {spec!r}")
    return ratios


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9e}"
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _params_from_opts(opts: dict) -> SystemParams:
    return SystemParams.from_mhz(
        g_mhz=opts["g"], delta_mhz=opts["delta"], kappa_mhz=opts["kappa"],
        omega_mhz=opts.get("omega", 0.0) or 0.0,
        omega_phase_rad=opts.get("omega_phase", 0.0) or 0.0,
        delta_d_mhz=opts.get("delta_d_scalar", 0.0) or 0.0,
        sigma_z=opts.get("sigma_z", 1),
        gamma_mhz=opts.get("gamma", 0.0) or 0.0,
        gamma_phi_mhz=opts.get("gamma_phi", 0.0) or 0.0,
    )


def _pmap(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# subcommand implementations; each returns (files, extras) where files is a
# list of (name, header, rows)

def run_staircase(opts: dict, workers: int):
    ratios = parse_ratios(opts["ratios"])
    nc = parse_grid(opts["nc"])
    dim = opts.get("dim") or fock_spectrum.default_dim(float(nc.max()) if nc.size else 0.0)
    curves = _pmap(lambda r: fock_spectrum.staircase_curve(r, nc, dim), ratios, workers)
    header = ["n_c"] + [f"mean_n_ratio_{r:g}" for r in ratios]
    rows = [[nc[i]] + [c[i] for c in curves] for i in range(len(nc))]
    return [("staircase.csv", header, rows)], {"dim": dim}


_SWEEP_HEADER = [
    "omega_mhz", "n_roots",
    "nbar_lower", "nbar_middle", "nbar_upper",
    "stable_lower", "stable_middle", "stable_upper",
    "log10_abs_as_lower", "log10_abs_as_middle", "log10_abs_as_upper",
    "log10_abs_as_upsweep", "log10_abs_as_downsweep",
]


def _sweep_rows(result: steady_state.HysteresisSweep):
    rows = []
    for i, om in enumerate(result.omega_values):
        by_branch = {r.branch: r for r in result.points[i]}
        row = [to_mhz(om), len(result.points[i])]
        for name in ("lower", "middle", "upper"):
            r = by_branch.get(name)
            row.append(r.n_bar if r else None)
        for name in ("lower", "middle", "upper"):
            r = by_branch.get(name)
            row.append(r.stable if r else None)
        for name in ("lower", "middle", "upper"):
            r = by_branch.get(name)
            row.append(0.5 * math.log10(r.n_bar) if r and r.n_bar > 0 else None)
        row.append(0.5 * math.log10(result.up_sweep[i]) if result.up_sweep[i] > 0 else None)
        row.append(0.5 * math.log10(result.down_sweep[i]) if result.down_sweep[i] > 0 else None)
        rows.append(row)
    return rows


def run_sweep(opts: dict, workers: int):
    params = _params_from_opts(opts)
    omega_grid = parse_log_grid(opts["omega_log"]) * MHZ
    result = steady_state.hysteresis_sweep(params, omega_grid,
                                           jump_factor=opts.get("jump_factor", 10.0))
    name = opts.get("file_name", "sweep.csv")
    return ([(name, _SWEEP_HEADER, _sweep_rows(result))],
            {"n_up": result.n_up, "sqrt_n_up": math.sqrt(max(result.n_up, 0.0))})


def run_window(opts: dict, workers: int):
    params = _params_from_opts(opts)
    scan = None
    if opts.get("omega_scan"):
        parts = opts["omega_scan"].split(":")
        if len(parts) not in (2, 3):
            raise _UsageError("--omega-scan must be min:max or min:max:points (MHz)")
        lo, hi = float(parts[0]) * MHZ, float(parts[1]) * MHZ
        pts = int(parts[2]) if len(parts) == 3 else 400
        scan = steady_state.OmegaScan(lo, hi, pts)
    window = steady_state.bistability_window(params, omega_scan=scan,
                                             method=opts.get("method", "sweep"))
    row = [None if window.empty else to_mhz(window.delta_minus),
           None if window.empty else to_mhz(window.delta_plus),
           window.method]
    extras = {"delta_minus_mhz": row[0], "delta_plus_mhz": row[1], "empty": window.empty}
    return [("window.csv", ["delta_minus_mhz", "delta_plus_mhz", "method"], [row])], extras


_G2_HEADER = ["tau_us", "branch", "g2", "n_f", "re_anomalous", "im_anomalous"]


def _stable_roots(params: SystemParams):
    roots = [r for r in steady_state.steady_state_roots(params) if r.stable]
    if not roots:
        raise KerrQEDError("no stable steady state at the requested working point")
    return roots


def run_g2(opts: dict, workers: int):
    params = _params_from_opts(opts)
    if opts.get("tau"):
        tau_us = parse_grid(opts["tau"])
    else:
        tau_us = np.linspace(0.0, 10.0 / params.kappa * 1e6, 1001)
    tau_s = tau_us * 1e-6
    rows = []
    for root in _stable_roots(params):
        coeffs = fluctuations.linearize(root, params)
        corr = fluctuations.stationary_correlators(coeffs, tau_s)
        values = fluctuations._g2_from_correlators(coeffs, corr)
        for i in range(len(tau_us)):
            rows.append([tau_us[i], root.branch, float(values[i]), corr.n_f,
                         float(np.real(corr.anomalous[i])), float(np.imag(corr.anomalous[i]))])
    name = opts.get("file_name", "g2.csv")
    return [(name, _G2_HEADER, rows)], {"tau_max_us": float(tau_us.max()) if tau_us.size else 0.0}


def run_g2scan(opts: dict, workers: int):
    params = _params_from_opts(opts)
    dd = opts.get("delta_d")
    om = opts.get("omega_grid")
    if (dd is None) == (om is None):
        raise _UsageError("g2scan needs exactly one of --delta-d <grid> or --omega-grid <loggrid>")
    if dd is not None:
        grid = parse_grid(dd) * MHZ
        column = "delta_d_mhz"
        points = _pmap(lambda v: fluctuations.g2_zero_scan(params, delta_d_values=[v]),
                       grid, workers)
    else:
        grid = parse_log_grid(om) * MHZ
        column = "omega_mhz"
        points = _pmap(lambda v: fluctuations.g2_zero_scan(params, omega_values=[v]),
                       grid, workers)
    rows = []
    for chunk in points:
        for p in chunk:
            rows.append([to_mhz(p.value), p.branch, p.g2_zero, p.n_f,
                         float(np.real(p.anomalous)), float(np.imag(p.anomalous))])
    header = [column, "branch", "g2", "n_f", "re_anomalous", "im_anomalous"]
    name = opts.get("file_name", "g2scan.csv")
    return [(name, header, rows)], {}


_RESPONSE_HEADER = ["omega_prime_mhz", "a_r", "a_i", "abs_s_out", "re_fwm", "im_fwm"]


def run_response(opts: dict, workers: int):
    params = _params_from_opts(opts)
    grid = parse_grid(opts.get("omega_prime") or "-2:2:2001") * MHZ
    roots = _stable_roots(params)
    wanted = opts.get("branch", "auto")
    if wanted == "auto":
        if len(roots) > 1:
            raise _UsageError("bistable working point: select --branch lower or upper")
        root = roots[0]
    else:
        match = [r for r in roots if r.branch == wanted]
        if not match:
            raise _UsageError(f"no stable root on branch {wanted!r}")
        root = match[0]
    coeffs = fluctuations.linearize(root, params)
    spec = io_response.response_spectrum(coeffs, params, grid)
    tag = io_response.classify_lineshape(spec)
    rows = [[to_mhz(grid[i]), float(spec.a_r[i]), float(spec.a_i[i]),
             float(abs(spec.s_out[i])), float(np.real(spec.fwm[i])), float(np.imag(spec.fwm[i]))]
            for i in range(len(grid))]
    name = opts.get("file_name", "response.csv")
    extras = {"lineshape": tag, "branch": root.branch,
              "coherent_amplitude": [float(np.real(spec.coherent_amplitude)),
                                     float(np.imag(spec.coherent_amplitude))]}
    return [(name, _RESPONSE_HEADER, rows)], extras


def run_oracle(opts: dict, workers: int):
    params = _params_from_opts(opts)
    variants = {"full": ["full_dispersive"], "kerr": ["kerr"],
                "both": ["full_dispersive", "kerr"]}[opts.get("variant", "full")]
    dim0 = opts.get("dim0") or 30
    rows = []
    dd_spec = opts.get("delta_d")
    if dd_spec is None:
        raise _UsageError("oracle needs --delta-d (scalar or grid)")
    if ":" in dd_spec:
        dd_grid = parse_grid(dd_spec) * MHZ
        header = ["delta_d_mhz", "branch", "g2", "n_f", "re_anomalous", "im_anomalous", "source"]
        for dd in dd_grid:
            p = params.replace(delta_d=float(dd))
            for point in fluctuations.g2_zero_scan(p, delta_d_values=[dd]):
                rows.append([to_mhz(dd), point.branch, point.g2_zero, point.n_f,
                             float(np.real(point.anomalous)), float(np.imag(point.anomalous)),
                             "linearized"])
            for variant in variants:
                rho, ops = lindblad_oracle.converged_steady_state(p, variant, dim0=dim0)
                _, g2z = lindblad_oracle.observables(rho, ops)
                _, n_f, m = lindblad_oracle.fluctuation_moments(rho, ops)
                rows.append([to_mhz(dd), "-", g2z, n_f, float(np.real(m)), float(np.imag(m)),
                             f"oracle_{'full' if variant == 'full_dispersive' else 'kerr'}"])
    else:
        p = params.replace(delta_d=float(dd_spec) * MHZ)
        tau_us = parse_grid(opts.get("tau") or f"0:{10.0 / p.kappa * 1e6:.9g}:201")
        tau_s = tau_us * 1e-6
        header = ["tau_us", "branch", "g2", "n_f", "re_anomalous", "im_anomalous", "source"]
        for root in _stable_roots(p):
            coeffs = fluctuations.linearize(root, p)
            corr = fluctuations.stationary_correlators(coeffs, tau_s)
            values = fluctuations._g2_from_correlators(coeffs, corr)
            for i in range(len(tau_us)):
                rows.append([tau_us[i], root.branch, float(values[i]), corr.n_f,
                             float(np.real(corr.anomalous[i])), float(np.imag(corr.anomalous[i])),
                             "linearized"])
        for variant in variants:
            rho, ops = lindblad_oracle.converged_steady_state(p, variant, dim0=dim0)
            curve = lindblad_oracle.g2_tau_regression(rho, ops, tau_s)
            _, n_f, m = lindblad_oracle.fluctuation_moments(rho, ops)
            for i in range(len(tau_us)):
                rows.append([tau_us[i], "-", float(curve[i]), n_f,
                             float(np.real(m)), float(np.imag(m)),
                             f"oracle_{'full' if variant == 'full_dispersive' else 'kerr'}"])
    name = opts.get("file_name", "oracle.csv")
    return [(name, header, rows)], {}


# ---------------------------------------------------------------------------
# figure presets

_FIG2_BASE = {"g": 200.0, "delta": 1000.0, "kappa": 0.1, "omega_log": "1e-3:1e2:400"}
_TAU_10_OVER_KAPPA_US = f"0:{100.0 / (2.0 * math.pi):.9f}:1001"  # kappa/2pi = 0.1 MHz


def _figure_files(preset: str, workers: int):
    if preset == "fig1a":
        nc = parse_grid("0:1:401")
        lo_hi = [fock_spectrum.avoided_crossing_two_level(1.0, v, 0.1) for v in nc]
        rows = []
        for v, (lo, hi) in zip(nc, lo_hi):
            mean = 0.5 * (v ** 2 + (1.0 - v) ** 2)
            rows.append([v, v ** 2, (1.0 - v) ** 2, mean + lo, mean + hi])
        header = ["n_c", "e_free_0", "e_free_1", "e_coupled_0", "e_coupled_1"]
        return [("fig1a.csv", header, rows)], {"chi_over_omega": 10.0, "units": "chi"}

    if preset == "fig1b":
        nc = parse_grid("-0.5:3.5:801")
        dim = fock_spectrum.default_dim(3.5)
        k_levels = 4

        def level_row(v):
            h = fock_spectrum.build_hamiltonian(1.0 * MHZ, v, 0.1 * MHZ, dim)
            es = fock_spectrum.eigensystem(h)
            psi0 = es.eigenvectors[:, 0]
            mean_n = float(np.sum(np.arange(dim) * np.abs(psi0) ** 2))
            return [v] + [to_mhz(es.eigenvalues[k]) for k in range(k_levels)] + [mean_n]

        rows = _pmap(level_row, nc, workers)
        header = ["n_c"] + [f"e_{k}_mhz" for k in range(k_levels)] + ["mean_n"]
        return [("fig1b.csv", header, rows)], {"chi_mhz": 1.0, "chi_over_omega": 10.0, "dim": dim}

    if preset == "fig1c":
        files, extras = run_staircase({"ratios": "1,10,100", "nc": "0:3.5:801", "dim": None}, workers)
        return [("fig1c.csv",) + files[0][1:]], extras

    if preset in ("fig2a", "fig2b"):
        dds = [-1.0, 0.0, 1.0] if preset == "fig2a" else [36.0, 37.0, 38.0]
        files = []
        extras = {}
        for dd in dds:
            opts = dict(_FIG2_BASE, delta_d_scalar=dd, file_name=f"{preset}__dd{dd:g}.csv")
            f, e = run_sweep(opts, workers)
            files.extend(f)
            extras.update(e)
        extras["delta_d_mhz_values"] = dds
        return files, extras

    if preset == "fig3a":
        opts = {"g": 200.0, "delta": 1000.0, "kappa": 0.1,
                "delta_d_scalar": 38.5, "omega_grid": "1e-3:10:400",
                "file_name": "fig3a.csv"}
        return run_g2scan(opts, workers)

    if preset == "fig3b":
        files = []
        for om in (0.01, 1.0):
            opts = {"g": 200.0, "delta": 1000.0, "kappa": 0.1, "delta_d_scalar": 38.5,
                    "omega": om, "tau": _TAU_10_OVER_KAPPA_US,
                    "file_name": f"fig3b__omega{om:g}.csv"}
            f, _ = run_g2(opts, workers)
            files.extend(f)
        return files, {"omega_mhz_values": [0.01, 1.0]}

    if preset == "fig3c":
        opts = {"g": 100.0, "delta": 1000.0, "kappa": 0.1, "omega": 0.01,
                "delta_d": "9:11:801", "file_name": "fig3c.csv"}
        return run_g2scan(opts, workers)

    if preset == "fig3d":
        opts = {"g": 200.0, "delta": 1000.0, "kappa": 0.1, "omega": 0.01,
                "delta_d": "36:41:1001", "file_name": "fig3d.csv"}
        return run_g2scan(opts, workers)

    if preset in ("fig4a", "fig4b"):
        files = []
        extras = {"lineshapes": {}}
        for dd in (9.74, 9.96):
            opts = {"g": 100.0, "delta": 1000.0, "kappa": 0.1, "omega": 0.1,
                    "delta_d_scalar": dd, "omega_prime": "-2:2:2001",
                    "file_name": f"{preset}__dd{dd:g}.csv"}
            f, e = run_response(opts, workers)
            files.extend(f)
            extras["lineshapes"][f"{dd:g}"] = e["lineshape"]
        return files, extras

    raise _UsageError(f"unknown figure preset {preset!r}")


FIGURE_PRESETS = ("fig1a", "fig1b", "fig1c", "fig2a", "fig2b",
                  "fig3a", "fig3b", "fig3c", "fig3d", "fig4a", "fig4b")


def run_figure(opts: dict, workers: int):
    return _figure_files(opts["preset"], workers)


_RUNNERS = {
    "staircase": run_staircase,
    "sweep": run_sweep,
    "window": run_window,
    "g2": run_g2,
    "g2scan": run_g2scan,
    "response": run_response,
    "oracle": run_oracle,
    "figure": run_figure,
}


# ---------------------------------------------------------------------------
# dispatch, manifest, entry point

def _execute(subcommand: str, opts: dict, out_dir: Path, workers: int,
             manifest_name: str | None = None) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.monotonic()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        files, extras = _RUNNERS[subcommand](opts, workers)
    written = []
    for name, header, rows in files:
        write_csv(out_dir / name, header, rows)
        written.append(name)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool": "kerrqed",
        "tool_version": __version__,
        "subcommand": subcommand,
        "options": {k: v for k, v in sorted(opts.items())},
        "outputs": written,
        "extras": extras,
        "warnings": [str(w.message) for w in caught],
        "duration_s": time.monotonic() - start,
    }
    if manifest_name is None:
        manifest_name = (opts.get("preset", subcommand) if subcommand == "figure"
                         else subcommand) + ".manifest.json"
    with open(out_dir / manifest_name, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return 0


def _add_physics_flags(p: argparse.ArgumentParser, drive: bool = True):
    p.add_argument("--g", type=float, required=True, help="coupling g/2pi in MHz")
    p.add_argument("--delta", type=float, default=1000.0, help="detuning Delta/2pi in MHz")
    p.add_argument("--kappa", type=float, default=0.1, help="decay kappa/2pi in MHz")
    p.add_argument("--sigma-z", dest="sigma_z", type=int, default=1, choices=(1, -1))
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--gamma-phi", dest="gamma_phi", type=float, default=0.0)
    if drive:
        p.add_argument("--omega", type=float, default=0.0, help="|Omega|/2pi in MHz")
        p.add_argument("--omega-phase", dest="omega_phase", type=float, default=0.0,
                       help="drive phase in rad")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kerrqed",
                                 description="dispersive Kerr cavity simulator")
    ap.add_argument("--version", action="version", version=f"kerrqed {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    common = {"out": lambda p: p.add_argument("--out", default=".", help="output directory"),
              "workers": lambda p: p.add_argument(
                  "--workers", type=int, default=os.cpu_count() or 1,
                  help="parallel workers for grid evaluation")}

    def with_common(p):
        common["out"](p)
        common["workers"](p)
        return p

    p = with_common(sub.add_parser("staircase", help="ground-state photon staircase"))
    p.add_argument("--ratios", default="1,10,100", help="comma list of chi/|Omega| ratios")
    p.add_argument("--nc", default="0:3.5:801", help="n_c grid start:stop:count")
    p.add_argument("--dim", type=int, default=None)

    p = with_common(sub.add_parser("sweep", help="steady-state hysteresis sweep"))
    _add_physics_flags(p, drive=False)
    p.add_argument("--delta-d", dest="delta_d_scalar", type=float, required=True,
                   help="drive detuning Delta_d/2pi in MHz")
    p.add_argument("--omega-log", dest="omega_log", default="1e-3:1e2:400",
                   help="log |Omega| grid start:stop:count in MHz")
    p.add_argument("--jump-factor", dest="jump_factor", type=float, default=10.0)

    p = with_common(sub.add_parser("window", help="bistability window in Delta_d"))
    _add_physics_flags(p, drive=False)
    p.add_argument("--method", choices=("sweep", "formula"), default="sweep")
    p.add_argument("--omega-scan", dest="omega_scan", default=None,
                   help="drive scan min:max[:points] in MHz")

    p = with_common(sub.add_parser("g2", help="second-order coherence g2(tau)"))
    _add_physics_flags(p)
    p.add_argument("--delta-d", dest="delta_d_scalar", type=float, required=True)
    p.add_argument("--tau", default=None, help="tau grid start:stop:count in microseconds")

    p = with_common(sub.add_parser("g2scan", help="g2(0) scan over Delta_d or |Omega|"))
    _add_physics_flags(p)
    p.add_argument("--delta-d", dest="delta_d", default=None,
                   help="Delta_d grid start:stop:count in MHz")
    p.add_argument("--omega-grid", dest="omega_grid", default=None,
                   help="log |Omega| grid start:stop:count in MHz")

    p = with_common(sub.add_parser("response", help="probe response spectrum"))
    _add_physics_flags(p)
    p.add_argument("--delta-d", dest="delta_d_scalar", type=float, required=True)
    p.add_argument("--omega-prime", dest="omega_prime", default="-2:2:2001",
                   help="probe detuning grid start:stop:count in MHz")
    p.add_argument("--branch", default="auto", choices=("auto", "lower", "upper"))

    p = with_common(sub.add_parser("oracle", help="exact master-equation comparison"))
    _add_physics_flags(p)
    p.add_argument("--delta-d", dest="delta_d", required=True,
                   help="Delta_d scalar (with --tau) or grid, MHz")
    p.add_argument("--tau", default=None, help="tau grid start:stop:count in microseconds")
    p.add_argument("--variant", choices=("full", "kerr", "both"), default="full")
    p.add_argument("--dim0", type=int, default=None)

    p = with_common(sub.add_parser("figure", help="figure-reproduction preset bundles"))
    p.add_argument("preset", choices=FIGURE_PRESETS)

    p = sub.add_parser("rerun", help="reproduce a run from its manifest")
    p.add_argument("manifest", help="path to a .manifest.json file")
    p.add_argument("--out", default=None, help="output directory (default: manifest's)")

    return ap


_CONTROL_KEYS = {"subcommand", "out", "workers", "manifest"}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.subcommand == "rerun":
            manifest_path = Path(args.manifest)
            with open(manifest_path) as fh:
                manifest = json.load(fh)
            if manifest.get("schema_version") != SCHEMA_VERSION:
                raise _UsageError(
                    f"unsupported manifest schema {manifest.get('schema_version')!r}")
            out_dir = Path(args.out) if args.out else manifest_path.parent
            return _execute(manifest["subcommand"], manifest["options"], out_dir,
                            workers=os.cpu_count() or 1,
                            manifest_name=manifest_path.name)
        opts = {k: v for k, v in vars(args).items() if k not in _CONTROL_KEYS}
        return _execute(args.subcommand, opts, Path(args.out), max(1, args.workers))
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (KerrQEDError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
