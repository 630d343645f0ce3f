"""Physical parameters and shared scalar quantities of the dispersive Kerr cavity.

A qubit detuned far from a cavity mode induces an effective photon-photon
interaction.  Everything downstream (spectra, steady states, fluctuation
statistics, probe response) is controlled by a handful of scalars derived
here: the Kerr strength chi = g^4/Delta^3, the rescaled drive detuning n_c,
the dressed excitation energy E(N) = sqrt(Delta^2 + 4 g^2 N), and the
blockade photon cap N_up = chi/kappa.

Unit convention: all rates and detunings are stored internally as angular
frequencies (rad/s).  External interfaces (JSON, CSV, CLI) use ordinary
frequencies nu = omega/2pi in MHz and convert at the boundary, so Fourier
kernels exp(-i omega tau) need no 2pi bookkeeping internally.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, replace

import numpy as np

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6  # one MHz of ordinary frequency, expressed in rad/s


def from_mhz(nu_mhz):
    """Ordinary frequency in MHz -> angular frequency in rad/s."""
    return np.asarray(nu_mhz, dtype=float) * MHZ if np.ndim(nu_mhz) else float(nu_mhz) * MHZ


def to_mhz(omega):
    """Angular frequency in rad/s -> ordinary frequency in MHz."""
    return np.asarray(omega, dtype=float) / MHZ if np.ndim(omega) else float(omega) / MHZ


@dataclass(frozen=True)
class SystemParams:
    """Parameter set of the driven dispersive qubit-cavity system (rad/s).

    g            qubit-cavity coupling
    delta        qubit-cavity detuning Delta = omega_0 - omega_q (nonzero)
    kappa        cavity amplitude decay rate
    omega_drive  complex drive amplitude Omega
    delta_d      drive-cavity detuning Delta_d = omega_0 - omega_d
    sigma_z      frozen qubit-state sign, +1 (excited) or -1 (ground)
    gamma, gamma_phi
                 qubit decay / dephasing rates, carried only so the regime
                 report can flag realistic inputs; the dynamics neglect them
    """

    g: float
    delta: float
    kappa: float
    omega_drive: complex = 0j
    delta_d: float = 0.0
    sigma_z: int = 1
    gamma: float = 0.0
    gamma_phi: float = 0.0

    def __post_init__(self):
        # g = 0 is allowed: it is the exactly solvable decoupled-cavity limit
        # used as an anchor throughout the tests.
        if not self.g >= 0.0:
            raise ValueError(f"coupling g must be >= 0, got {self.g}")
        if not self.kappa > 0.0:
            raise ValueError(f"decay rate kappa must be > 0, got {self.kappa}")
        if self.delta == 0.0:
            raise ValueError("detuning delta must be nonzero (dispersive expansion is singular)")
        if self.sigma_z not in (1, -1):
            raise ValueError(f"sigma_z must be exactly +1 or -1, got {self.sigma_z}")
        if self.gamma < 0.0 or self.gamma_phi < 0.0:
            raise ValueError("qubit rates gamma, gamma_phi must be >= 0")

    @classmethod
    def from_mhz(cls, g_mhz, delta_mhz, kappa_mhz, omega_mhz=0.0, omega_phase_rad=0.0,
                 delta_d_mhz=0.0, sigma_z=1, gamma_mhz=0.0, gamma_phi_mhz=0.0):
        """Build from /2pi values in MHz (the external unit convention)."""
        drive = from_mhz(omega_mhz) * cmath.exp(1j * omega_phase_rad)
        return cls(
            g=from_mhz(g_mhz),
            delta=from_mhz(delta_mhz),
            kappa=from_mhz(kappa_mhz),
            omega_drive=drive,
            delta_d=from_mhz(delta_d_mhz),
            sigma_z=int(sigma_z),
            gamma=from_mhz(gamma_mhz),
            gamma_phi=from_mhz(gamma_phi_mhz),
        )

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def to_json_dict(self) -> dict:
        """Flat JSON object in MHz; inverse of :func:`params_from_json_dict`."""
        return {
            "g_mhz": to_mhz(self.g),
            "delta_mhz": to_mhz(self.delta),
            "kappa_mhz": to_mhz(self.kappa),
            "omega_mhz": to_mhz(abs(self.omega_drive)),
            "omega_phase_rad": cmath.phase(self.omega_drive) if self.omega_drive != 0 else 0.0,
            "delta_d_mhz": to_mhz(self.delta_d),
            "sigma_z": self.sigma_z,
            "gamma_mhz": to_mhz(self.gamma),
            "gamma_phi_mhz": to_mhz(self.gamma_phi),
        }


_JSON_DEFAULTS = {
    "omega_mhz": 0.0,
    "omega_phase_rad": 0.0,
    "delta_d_mhz": 0.0,
    "sigma_z": 1,
    "gamma_mhz": 0.0,
    "gamma_phi_mhz": 0.0,
}


def params_from_json_dict(d: dict) -> SystemParams:
    """Deserialize the flat MHz JSON object; missing optional keys default."""
    merged = dict(_JSON_DEFAULTS)
    merged.update(d)
    return SystemParams.from_mhz(
        g_mhz=merged["g_mhz"],
        delta_mhz=merged["delta_mhz"],
        kappa_mhz=merged["kappa_mhz"],
        omega_mhz=merged["omega_mhz"],
        omega_phase_rad=merged["omega_phase_rad"],
        delta_d_mhz=merged["delta_d_mhz"],
        sigma_z=merged["sigma_z"],
        gamma_mhz=merged["gamma_mhz"],
        gamma_phi_mhz=merged["gamma_phi_mhz"],
    )


def params_to_json(params: SystemParams) -> str:
    return json.dumps(params.to_json_dict(), sort_keys=True)


def params_from_json(text: str) -> SystemParams:
    return params_from_json_dict(json.loads(text))


def kerr_strength(params: SystemParams) -> float:
    """Photon-photon interaction strength chi = g^4 / Delta^3 (signed)."""
    return params.g ** 4 / params.delta ** 3


def rescaled_detuning(params: SystemParams) -> float:
    """Rescaled drive detuning n_c = (chi - Delta_d) / (2 chi).

    n_c plays the role of a gate charge for the photon staircase: the
    Kerr ladder energy is chi (n - n_c)^2.
    """
    chi = kerr_strength(params)
    if chi == 0.0:
        raise ValueError("rescaled detuning is undefined for chi = 0 (g = 0)")
    return (chi - params.delta_d) / (2.0 * chi)


def excitation_energy(params: SystemParams, n_bar):
    """Dressed excitation energy E = sqrt(Delta^2 + 4 g^2 (n_bar + s)).

    s = (1 + sigma_z)/2 accounts for the qubit's own excitation; n_bar may
    be a scalar or an array of photon numbers.
    """
    n_bar = np.asarray(n_bar, dtype=float)
    if np.any(n_bar < 0):
        raise ValueError("photon number n_bar must be >= 0")
    s = 0.5 * (1 + params.sigma_z)
    e = np.sqrt(params.delta ** 2 + 4.0 * params.g ** 2 * (n_bar + s))
    return float(e) if e.ndim == 0 else e


def drive_resonance_shift(params: SystemParams, n_bar):
    """Photon-number dependent resonance shift g^2 sigma_z / E(n_bar).

    The cavity response peaks when the drive detuning equals this shift;
    it vanishes for g = 0 and in the large-photon-number limit.
    """
    return params.g ** 2 * params.sigma_z / excitation_energy(params, n_bar)


def upper_bound_photons(params: SystemParams) -> float:
    """Blockade photon cap N_up = chi / kappa = g^4 / (Delta^3 kappa)."""
    return kerr_strength(params) / params.kappa


@dataclass(frozen=True)
class RegimeCheck:
    name: str
    lhs: float
    rhs: float
    ratio: float
    passed: bool


@dataclass(frozen=True)
class RegimeReport:
    regime_ratio: float
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]


def validate_regime(params: SystemParams, regime_ratio: float = 0.25) -> RegimeReport:
    """Check the ordering gamma, gamma_phi << kappa << g^2/|Delta| << g << |Delta|.

    Each "<<" is tested as lhs/rhs <= regime_ratio.  The default 0.25 flags
    a 4x separation as acceptable. This is advisory only: violations are
    reported, never raised, so exact limits (g = 0, kappa ~ g, ...) remain
    computable.
    """
    if not 0.0 < regime_ratio < 1.0:
        raise ValueError("regime_ratio must be in (0, 1)")
    g2_over_delta = params.g ** 2 / abs(params.delta)
    pairs = [
        ("gamma << kappa", params.gamma, params.kappa),
        ("gamma_phi << kappa", params.gamma_phi, params.kappa),
        ("kappa << g^2/|delta|", params.kappa, g2_over_delta),
        ("g^2/|delta| << g", g2_over_delta, params.g),
        ("g << |delta|", params.g, abs(params.delta)),
    ]
    checks = []
    for name, lhs, rhs in pairs:
        ratio = math.inf if rhs == 0.0 and lhs > 0.0 else (0.0 if lhs == 0.0 else lhs / rhs)
        checks.append(RegimeCheck(name, lhs, rhs, ratio, ratio <= regime_ratio))
    return RegimeReport(regime_ratio, tuple(checks))
