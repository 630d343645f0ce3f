"""Probe response of the driven cavity via input-output theory.

A weak monochromatic detecting field entering through the input port sees
the linearized cavity; the outgoing amplitude at probe detuning
omega_prime = omega_d - omega is

    s_out(omega_prime) = 1 + sqrt(2 kappa) c_in(omega_prime),

with c_in, c_conj from the fluctuation transfer.  The plotted response
quadratures a_r + i a_i = sqrt(2 kappa) c_in are the scattered part of the
output per unit probe amplitude: dimensionless, of order one on resonance,
and vanishing off resonance.  The c_conj channel feeds a four-wave-mixing
sideband; its coefficient is exposed but not analyzed further.  Because
the probe is amplitude-normalized, none of these quantities depend on the
probe strength.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CoarseGridWarning
from .fluctuations import LinearizedCoefficients, fluctuation_transfer
from .model import SystemParams

# relative prominence below which an extremum is treated as numerical noise
EXTREMUM_PROMINENCE = 1e-8


@dataclass(frozen=True)
class ResponseSpectrum:
    """Probe-frequency response of one stable working point."""

    omega_prime_grid: np.ndarray
    a_r: np.ndarray            # Re of sqrt(2 kappa) c_in, the scattered amplitude
    a_i: np.ndarray            # Im of sqrt(2 kappa) c_in
    s_out: np.ndarray          # 1 + sqrt(2 kappa) c_in, the full output coefficient
    fwm: np.ndarray            # sqrt(2 kappa) c_conj, four-wave-mixing coefficient
    coherent_amplitude: complex  # delta-peak weight (2 kappa A_s + i Omega)/sqrt(2 kappa)
    kappa: float               # cavity linewidth scale used by the classifier


def response_spectrum(coeffs: LinearizedCoefficients, params: SystemParams,
                      omega_prime_grid) -> ResponseSpectrum:
    """Evaluate the probe response on a grid of omega_prime = omega_d - omega."""
    w = np.asarray(omega_prime_grid, dtype=float)
    c_in, c_conj = fluctuation_transfer(coeffs, w)
    root_2k = math.sqrt(2.0 * params.kappa)
    scattered = root_2k * c_in
    return ResponseSpectrum(
        omega_prime_grid=w,
        a_r=np.real(scattered),
        a_i=np.imag(scattered),
        s_out=1.0 + scattered,
        fwm=root_2k * c_conj,
        coherent_amplitude=(2.0 * params.kappa * coeffs.a_s + 1j * params.omega_drive) / root_2k,
        kappa=params.kappa,
    )


def default_probe_grid(kappa: float, halfwidth_linewidths: float = 20.0,
                       points: int = 2001) -> np.ndarray:
    """Symmetric probe grid spanning +-halfwidth_linewidths cavity linewidths."""
    return np.linspace(-halfwidth_linewidths * kappa, halfwidth_linewidths * kappa, points)


def classify_lineshape(spectrum: ResponseSpectrum) -> str:
    """Tag the probe response as "lorentzian" (single line) or "window" (split).

    Counts interior extrema of the absorptive quadrature a_r after
    suppressing reversals smaller than EXTREMUM_PROMINENCE of the full range
    (numerical noise guard): exactly one extremum is a plain resonance line,
    two or more signal a split structure with a transparency window.  The
    modulus |a_r + i a_i|^2 cannot separate the two cases (the split lives in
    the quadratures), so the classifier works on a_r, the curve whose shape
    the tags describe.
    """
    w = spectrum.omega_prime_grid
    if w.size < 8:
        raise ValueError("response grid too short to classify")
    span = float(w[-1] - w[0])
    if span < 20.0 * spectrum.kappa:
        warnings.warn(
            f"probe grid spans {span / spectrum.kappa:.1f} linewidths (< 20); "
            "classification may miss structure",
            CoarseGridWarning,
            stacklevel=2,
        )
    y = spectrum.a_r
    prominence = EXTREMUM_PROMINENCE * float(y.max() - y.min())

    extrema = []
    direction = 0
    anchor = y[0]
    anchor_idx = 0
    for i in range(1, y.size):
        step = y[i] - anchor
        if abs(step) <= prominence:
            continue
        new_dir = 1 if step > 0 else -1
        if direction != 0 and new_dir != direction:
            extrema.append(anchor_idx)
        direction = new_dir
        anchor = y[i]
        anchor_idx = i

    if len(extrema) >= 2:
        gaps = np.diff(sorted(extrema))
        if np.any(gaps < 2):
            warnings.warn(
                "adjacent extrema closer than 2 grid cells; refine the probe grid",
                CoarseGridWarning,
                stacklevel=2,
            )
    return "window" if len(extrema) >= 2 else "lorentzian"
