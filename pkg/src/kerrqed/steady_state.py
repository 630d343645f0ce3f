"""Semiclassical steady states of the driven dispersive cavity.

The mean-field amplitude obeys A_s = -i Omega / (kappa + i u(N)) with
u(N) = Delta_d - g^2 sigma_z / E(N) and N = |A_s|^2, so the photon number
is a root of the scalar balance

    G(x) = x * (kappa^2 + u(x)^2) = |Omega|^2.

G is monotone for weak nonlinearity and S-shaped otherwise; its folds are
the turning points of the optical-bistability curve.  All roots are found
by bracketing G on a dense grid (augmented with the analytically located
turning points) and polishing with Brent + Newton steps, which guarantees
every real root is recovered regardless of iteration basins.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import BranchTrackingWarning, GridResolutionError, NumericalError
from .model import SystemParams, drive_resonance_shift, excitation_energy, upper_bound_photons

ROOT_RTOL = 1e-13
RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class SteadyStateRoot:
    """One self-consistent mean-field solution."""

    a_s: complex
    n_bar: float
    stable: bool
    branch: str  # "lower" | "middle" | "upper"


@dataclass(frozen=True)
class BistabilityWindow:
    """Drive-detuning interval supporting two stable steady states."""

    delta_minus: float | None
    delta_plus: float | None
    method: str  # "sweep" | "formula"

    @property
    def empty(self) -> bool:
        return self.delta_minus is None


@dataclass(frozen=True)
class OmegaScan:
    """Drive-amplitude range scanned when locating the bistability window."""

    omega_min: float
    omega_max: float
    points: int = 400

    @classmethod
    def default(cls, params: SystemParams) -> "OmegaScan":
        # The low-photon fold near the window's lower edge requires drives of
        # order 10^3 kappa, so the scan spans well past that.
        return cls(1e-4 * params.kappa, 2e3 * params.kappa, 400)

    def grid(self) -> np.ndarray:
        return np.geomspace(self.omega_min, self.omega_max, self.points)


def _detuning_mismatch(params: SystemParams, x):
    """u(x) = Delta_d - g^2 sigma_z / E(x)."""
    return params.delta_d - drive_resonance_shift(params, x)


def _alpha_signed(params: SystemParams, x):
    """Real parametric coupling 2 g^4 sigma_z x / E(x)^3 at photon number x."""
    e = excitation_energy(params, x)
    return 2.0 * params.g ** 4 * params.sigma_z * np.asarray(x, dtype=float) / e ** 3


def drive_balance(params: SystemParams, x):
    """G(x) = x (kappa^2 + u(x)^2); equals |Omega|^2 at a steady state."""
    u = _detuning_mismatch(params, x)
    return np.asarray(x, dtype=float) * (params.kappa ** 2 + u ** 2)


def drive_balance_slope(params: SystemParams, x):
    """dG/dx = kappa^2 + u^2 + 2 u alpha_s; also the linear stability margin."""
    u = _detuning_mismatch(params, x)
    return params.kappa ** 2 + u ** 2 + 2.0 * u * _alpha_signed(params, x)


def stability_margin(params: SystemParams, n_bar: float) -> float:
    """kappa^2 + Delta_tilde^2 - |alpha|^2 evaluated at photon number n_bar.

    Positive iff both eigenvalues of the linear fluctuation drift have
    negative real part.  Algebraically identical to dG/dx, so the unstable
    middle branch is exactly the negative-slope segment of the S-curve.
    """
    return float(drive_balance_slope(params, n_bar))


def _turning_points(params: SystemParams, x_hi: float, n_grid: int = 3000) -> list[float]:
    """All sign changes of dG/dx in (0, x_hi], refined by Brent."""
    if params.g == 0.0:
        return []
    grid = np.geomspace(max(x_hi * 1e-18, 1e-300), x_hi, n_grid)
    slope = drive_balance_slope(params, grid)
    sign = np.sign(slope)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    points = []
    for i in idx:
        points.append(brentq(lambda x: drive_balance_slope(params, x),
                             grid[i], grid[i + 1], rtol=ROOT_RTOL, maxiter=200))
    return points


def _roots_x_max(params: SystemParams) -> float:
    om2 = abs(params.omega_drive) ** 2
    return max(4.0 * om2 / params.kappa ** 2, 10.0 * abs(upper_bound_photons(params)), 10.0)


def photon_number_roots(params: SystemParams, max_refinements: int = 3) -> list[float]:
    """All real non-negative photon-number roots of G(x) = |Omega|^2, ascending.

    The bracketing grid is logarithmic plus the exact turning points of G,
    so folds cannot hide between grid nodes.  If an even number of crossings
    survives (a bracket was missed), the grid is refined up to
    ``max_refinements`` times before raising GridResolutionError.
    """
    om2 = abs(params.omega_drive) ** 2
    if om2 == 0.0:
        return [0.0]
    x_max = _roots_x_max(params)
    extra = np.asarray(_turning_points(params, x_max), dtype=float)

    n_grid = 600
    roots: list[float] = []
    for _ in range(max_refinements + 1):
        grid = np.unique(np.concatenate((
            [0.0], np.geomspace(x_max * 1e-18, x_max, n_grid), extra)))
        h = drive_balance(params, grid) - om2
        roots = []
        for i in range(len(grid) - 1):
            if h[i] == 0.0:
                roots.append(grid[i])
            elif h[i] * h[i + 1] < 0.0:
                roots.append(brentq(lambda x: float(drive_balance(params, x) - om2),
                                    grid[i], grid[i + 1], rtol=ROOT_RTOL, maxiter=200))
        if h[-1] == 0.0:
            roots.append(grid[-1])
        if len(roots) % 2 == 1:
            break
        n_grid *= 4
    else:
        raise GridResolutionError(
            f"even root count ({len(roots)}) persists after grid refinement; "
            f"|Omega|^2={om2:.6e}, delta_d={params.delta_d:.6e}"
        )

    # Newton polish toward machine-level balance residuals.
    polished = []
    for x in roots:
        for _ in range(3):
            slope = float(drive_balance_slope(params, x))
            if slope == 0.0:
                break
            step = float(drive_balance(params, x) - om2) / slope
            if not math.isfinite(step) or abs(step) > 0.5 * max(x, 1e-300):
                break
            x -= step
            if x < 0.0:
                x = 0.0
                break
        polished.append(x)

    polished.sort()
    deduped: list[float] = []
    for x in polished:
        if not deduped or x - deduped[-1] > 1e-9 * max(x, 1.0e-300):
            deduped.append(x)
    return deduped


def amplitude_from_number(params: SystemParams, n_bar: float) -> complex:
    """Complex amplitude A_s = -i Omega / (kappa + i u(n_bar)) at a balance root.

    Raises if n_bar does not actually satisfy the balance (|A_s|^2 must
    reproduce n_bar to 1e-10 relative).
    """
    u = float(_detuning_mismatch(params, n_bar))
    a_s = -1j * params.omega_drive / (params.kappa + 1j * u)
    if n_bar > 0.0 and abs(abs(a_s) ** 2 - n_bar) > 1e-10 * n_bar:
        raise ValueError(
            f"n_bar={n_bar!r} is not a steady-state root: |A_s|^2={abs(a_s)**2!r}"
        )
    return a_s


def residual(params: SystemParams, a_s: complex) -> float:
    """|A_s (kappa + i u(|A_s|^2)) + i Omega|, the defining equation's defect."""
    u = float(_detuning_mismatch(params, abs(a_s) ** 2))
    return abs(a_s * (params.kappa + 1j * u) + 1j * params.omega_drive)


_BRANCH_NAMES = {1: ("lower",), 2: ("lower", "upper"), 3: ("lower", "middle", "upper")}


def steady_state_roots(params: SystemParams) -> list[SteadyStateRoot]:
    """All steady states with amplitudes, stability flags, and branch labels."""
    xs = photon_number_roots(params)
    names = _BRANCH_NAMES.get(len(xs))
    if names is None:
        names = tuple(f"branch{i}" for i in range(len(xs)))
    out = []
    for x, name in zip(xs, names):
        a_s = amplitude_from_number(params, x)
        out.append(SteadyStateRoot(a_s=a_s, n_bar=x,
                                   stable=stability_margin(params, x) > 0.0,
                                   branch=name))
    return out


def classify_stability(root: SteadyStateRoot, params: SystemParams) -> bool:
    """Stability of a root from the linear fluctuation drift.

    Uses the margin kappa^2 + Delta_tilde^2 - |alpha|^2 > 0 and
    cross-checks it against the drift-matrix eigenvalues except within a
    numerically ambiguous band around the boundary.
    """
    x = root.n_bar
    margin = stability_margin(params, x)

    e = excitation_energy(params, x)
    alpha = 2.0 * params.g ** 4 * root.a_s ** 2 * params.sigma_z / e ** 3
    delta_omega = (params.g ** 2 * params.sigma_z / e ** 3) * (e ** 2 - 2.0 * params.g ** 2 * x)
    dt = params.delta_d - delta_omega
    drift = np.array([[-1j * dt - params.kappa, -1j * alpha],
                      [1j * np.conj(alpha), 1j * dt - params.kappa]])
    max_re = float(np.max(np.linalg.eigvals(drift).real))

    scale = params.kappa ** 2 + dt ** 2 + abs(alpha) ** 2
    if abs(margin) > 1e-9 * scale and (margin > 0.0) != (max_re < 0.0):
        raise NumericalError(
            f"stability criteria disagree: margin={margin:.3e}, max Re eig={max_re:.3e}"
        )
    return margin > 0.0


def three_root_drive_intervals(params: SystemParams) -> list[tuple[float, float]]:
    """Drive-amplitude bands (|Omega| ranges) in which G(x)=|Omega|^2 has 3 roots.

    Each band is a fold of G: the balance values at a (local max, local min)
    turning pair.  Empty when G is monotone at this drive detuning.
    """
    x_hi = max(_roots_x_max(params), 10.0 * _fold_search_ceiling(params))
    turns = _turning_points(params, x_hi)
    bands = []
    for i in range(0, len(turns) - 1, 2):
        g_hi = float(drive_balance(params, turns[i]))      # local max
        g_lo = float(drive_balance(params, turns[i + 1]))  # local min
        if g_hi > g_lo * (1.0 + 1e-12):
            bands.append((math.sqrt(g_lo), math.sqrt(g_hi)))
    return bands


def _fold_search_ceiling(params: SystemParams) -> float:
    """Upper photon number beyond which |alpha| < kappa, so no folds exist."""
    if params.g == 0.0:
        return 1.0
    # |alpha|(x) ~ g/(4 sqrt(x)) for large x; it drops below kappa near (g/4kappa)^2
    return max((params.g / (4.0 * params.kappa)) ** 2 * 4.0, 10.0)


def _fold_x_domain(params: SystemParams) -> tuple[float, float] | None:
    """Photon-number interval where |alpha(x)| > kappa (folds possible)."""
    if params.g == 0.0:
        return None
    s = 0.5 * (1 + params.sigma_z)
    x_peak = (params.delta ** 2 + 4.0 * params.g ** 2 * s) / (2.0 * params.g ** 2)

    def excess(x):
        return abs(float(_alpha_signed(params, x))) - params.kappa

    if excess(x_peak) <= 0.0:
        return None
    lo_bracket = x_peak * 1e-18
    hi_bracket = _fold_search_ceiling(params) + x_peak
    if excess(lo_bracket) >= 0.0 or excess(hi_bracket) >= 0.0:  # pathological parameters
        return None
    x_lo = brentq(excess, lo_bracket, x_peak, rtol=ROOT_RTOL, maxiter=200)
    x_hi = brentq(excess, x_peak, hi_bracket, rtol=ROOT_RTOL, maxiter=200)
    return x_lo, x_hi


def _window_formula(params: SystemParams) -> BistabilityWindow:
    """Window edges from the turning-point condition along the root locus.

    At photon number x the balance curve has zero slope exactly when the
    drive detuning lies in [shift - alpha - R, shift - alpha + R] with
    R = sqrt(alpha^2 - kappa^2); the bistable window is the envelope of
    those intervals over all x with |alpha(x)| > kappa.
    """
    dom = _fold_x_domain(params)
    if dom is None:
        return BistabilityWindow(None, None, "formula")
    x_lo, x_hi = dom

    def edge(x, sign):
        shift = float(drive_resonance_shift(params, x))
        a = float(_alpha_signed(params, x))
        r = math.sqrt(max(a * a - params.kappa ** 2, 0.0))
        return shift - a + sign * r

    def optimize(sign):
        # coarse grid then bounded local refinement; the envelopes are smooth
        grid = np.geomspace(x_lo * (1 + 1e-12), x_hi * (1 - 1e-12), 4000)
        vals = np.array([edge(x, sign) for x in grid])
        k = int(np.argmin(vals)) if sign < 0 else int(np.argmax(vals))
        a = grid[max(k - 1, 0)]
        b = grid[min(k + 1, len(grid) - 1)]
        res = minimize_scalar(lambda x: sign * -edge(x, sign),
                              bounds=(a, b), method="bounded",
                              options={"xatol": max(1e-12 * b, 1e-300)})
        best = edge(float(res.x), sign)
        return min(best, float(vals[k])) if sign < 0 else max(best, float(vals[k]))

    return BistabilityWindow(optimize(-1.0), optimize(+1.0), "formula")


def bistability_window(params: SystemParams, omega_scan: OmegaScan | None = None,
                       method: str = "sweep") -> BistabilityWindow:
    """Drive-detuning interval in which some scanned drive yields three roots.

    method="sweep" (default): for each candidate Delta_d the exact set of
    three-root drive amplitudes (the fold bands of G) is intersected with
    the scan range; edges are refined by bisection to 1e-3 relative.  This
    is equivalent to counting roots on an arbitrarily fine |Omega| grid.

    method="formula": evaluates the turning-point envelope along the root
    locus, ignoring the scan range; used as a consistency check.
    """
    if method == "formula":
        return _window_formula(params)
    if method != "sweep":
        raise ValueError(f"unknown window method {method!r}")

    scan = omega_scan if omega_scan is not None else OmegaScan.default(params)

    def predicate(delta_d: float) -> bool:
        p = params.replace(delta_d=delta_d)
        return any(lo < scan.omega_max and hi > scan.omega_min
                   for lo, hi in three_root_drive_intervals(p))

    seed = _window_formula(params)
    if seed.empty:
        return BistabilityWindow(None, None, "sweep")

    span = seed.delta_plus - seed.delta_minus
    coarse = np.linspace(seed.delta_minus - 1e-3 * span, seed.delta_plus + 1e-3 * span, 121)
    flags = [predicate(d) for d in coarse]
    if not any(flags):
        return BistabilityWindow(None, None, "sweep")
    first = flags.index(True)
    last = len(flags) - 1 - flags[::-1].index(True)

    def bisect(outside, inside):
        # invariant: predicate(outside) is False, predicate(inside) is True
        for _ in range(200):
            if abs(inside - outside) <= 1e-3 * max(abs(outside), abs(inside), 1e-12 * span):
                break
            mid = 0.5 * (outside + inside)
            if predicate(mid):
                inside = mid
            else:
                outside = mid
        return 0.5 * (outside + inside)

    lower = coarse[first] if first == 0 else bisect(coarse[first - 1], coarse[first])
    upper = coarse[last] if last == len(coarse) - 1 else bisect(coarse[last + 1], coarse[last])
    return BistabilityWindow(float(lower), float(upper), "sweep")


@dataclass(frozen=True)
class HysteresisSweep:
    """Multivalued steady-state response along a drive-amplitude grid."""

    omega_values: np.ndarray
    points: tuple  # tuple of lists of SteadyStateRoot, one list per drive value
    up_sweep: np.ndarray    # n_bar tracked with increasing drive
    down_sweep: np.ndarray  # n_bar tracked with decreasing drive
    n_up: float


def hysteresis_sweep(params: SystemParams, omega_values, jump_factor: float = 10.0) -> HysteresisSweep:
    """Roots with stability along a monotone |Omega| grid, plus swept branches.

    The up (down) sweep keeps the stable root nearest in log photon number
    to the previous selection; when the tracked branch terminates at a fold
    the jump to the surviving branch is expected, otherwise a jump larger
    than ``jump_factor`` emits a BranchTrackingWarning.
    """
    omega_values = np.asarray(omega_values, dtype=float)
    if omega_values.size and np.any(np.diff(omega_values) <= 0):
        raise ValueError("omega grid must be strictly increasing")

    points = []
    for om in omega_values:
        points.append(steady_state_roots(params.replace(omega_drive=complex(om))))

    def sweep(indices):
        selected = np.empty(len(points))
        prev = None
        prev_count = None
        for j, i in enumerate(indices):
            stable = [r.n_bar for r in points[i] if r.stable] or [r.n_bar for r in points[i]]
            if prev is None:
                choice = stable[0] if j == 0 and indices[0] < indices[-1] else stable[-1]
            else:
                dists = [abs(math.log(max(c, 1e-300)) - math.log(max(prev, 1e-300))) for c in stable]
                choice = stable[int(np.argmin(dists))]
                ratio = max(choice, 1e-300) / max(prev, 1e-300)
                jumped = ratio > jump_factor or ratio < 1.0 / jump_factor
                if jumped and prev_count == len(points[i]):
                    warnings.warn(
                        f"branch continuation jumped by factor {max(ratio, 1/ratio):.3g} "
                        f"at |Omega|={omega_values[i]:.6e} without a fold; grid may be too coarse",
                        BranchTrackingWarning,
                        stacklevel=3,
                    )
            selected[i] = choice
            prev = choice
            prev_count = len(points[i])
        return selected

    n = len(points)
    up = sweep(list(range(n))) if n else np.empty(0)
    down = sweep(list(range(n - 1, -1, -1))) if n else np.empty(0)
    return HysteresisSweep(omega_values=omega_values, points=tuple(points),
                           up_sweep=up, down_sweep=down,
                           n_up=upper_bound_photons(params))
