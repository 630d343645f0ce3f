"""Linearized quantum fluctuations and second-order coherence.

Writing the cavity operator as A_s + A_f(t) and keeping terms linear in the
fluctuation gives a parametric-amplifier model driven by vacuum input,

    dA_f/dt = -(i Delta_tilde + kappa) A_f - i alpha A_f^dag - sqrt(2 kappa) A_in,

with Delta_tilde = Delta_d - delta_omega(N), alpha = 2 g^4 A_s^2 sigma_z / E^3.
Solving in the frequency domain, every stationary correlator reduces to a
real-axis integral of a rational spectral density with denominator

    |d(omega)|^2 = (M - omega^2)^2 + 4 kappa^2 omega^2,   M = kappa^2 + Delta_tilde^2 - |alpha|^2.

Only two real integrals are ever needed,

    C(tau) = int_0^inf 2 cos(omega tau) / |d|^2 domega
    S(tau) = int_0^inf 2 omega sin(omega tau) / |d|^2 domega,

from which

    <A_f^dag(t) A_f(t+tau)>  = (kappa |alpha|^2 / pi) C(tau)
    <A_f(t) A_f(t+tau)>      = (-kappa alpha / pi) [(Delta_tilde + i kappa) C(tau) + i S(tau)].

These integrals are evaluated by adaptive quadrature (QUADPACK Fourier
transforms for tau != 0); closed residue forms exist and serve as an
independent oracle in the test suite only.  The intensity correlation is
assembled from the Gaussian moments with detector ordering, which makes
g2(tau) real and even in tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import NumericalError
from .model import SystemParams, excitation_energy
from .steady_state import SteadyStateRoot, steady_state_roots

QUAD_TAIL_FRACTION = 1e-10  # omitted tail mass relative to the zero-frequency scale


@dataclass(frozen=True)
class LinearizedCoefficients:
    """Drift coefficients of the fluctuation equation about one stable root."""

    delta_tilde: float
    alpha: complex
    delta_omega: float
    a_s: complex
    kappa: float

    @property
    def margin(self) -> float:
        """Stability margin M = kappa^2 + Delta_tilde^2 - |alpha|^2 (> 0 required)."""
        return self.kappa ** 2 + self.delta_tilde ** 2 - abs(self.alpha) ** 2


@dataclass(frozen=True)
class CorrelationSet:
    """Stationary fluctuation correlators sampled on a (signed) tau grid.

    normal[i]    = <A_f^dag(t) A_f(t + tau_i)>
    anomalous[i] = <A_f(t) A_f(t + tau_i)>
    reversed_anomalous[i] = <A_f(t + tau_i) A_f(t)>  (operators do not commute
    at unequal times, so both orderings are kept; the intensity correlation
    needs the reversed one)
    """

    tau_grid: np.ndarray
    n_f: float
    normal: np.ndarray
    anomalous: np.ndarray
    reversed_anomalous: np.ndarray


def linearize(root: SteadyStateRoot, params: SystemParams) -> LinearizedCoefficients:
    """Linearized drift coefficients at a stable steady state."""
    if not root.stable:
        raise ValueError("cannot linearize about an unstable root: correlators diverge")
    x = root.n_bar
    e = excitation_energy(params, x)
    alpha = 2.0 * params.g ** 4 * root.a_s ** 2 * params.sigma_z / e ** 3
    delta_omega = (params.g ** 2 * params.sigma_z / e ** 3) * (e ** 2 - 2.0 * params.g ** 2 * x)
    return LinearizedCoefficients(
        delta_tilde=params.delta_d - delta_omega,
        alpha=alpha,
        delta_omega=delta_omega,
        a_s=root.a_s,
        kappa=params.kappa,
    )


def fluctuation_transfer(coeffs: LinearizedCoefficients, omega):
    """Frequency-domain response: A_f(w) = c_in(w) A_in(w) + c_conj(w) A_in^dag(w).

    c_in  = i sqrt(2 kappa) (Delta_tilde - w + i kappa) / d(w)
    c_conj= i sqrt(2 kappa) alpha / d(w)
    d(w)  = (i w + kappa)^2 + Delta_tilde^2 - |alpha|^2
    """
    if coeffs.margin <= 0.0:
        raise ValueError("fluctuation transfer requires a stable working point")
    w = np.asarray(omega, dtype=float)
    k = coeffs.kappa
    d = (1j * w + k) ** 2 + coeffs.delta_tilde ** 2 - abs(coeffs.alpha) ** 2
    # stable working points keep d(w) away from the real axis
    assert np.all(np.abs(d) > 0.0)
    pref = 1j * math.sqrt(2.0 * k)
    c_in = pref * (coeffs.delta_tilde - w + 1j * k) / d
    c_conj = pref * coeffs.alpha / d
    if np.ndim(omega) == 0:
        return complex(c_in), complex(c_conj)
    return c_in, c_conj


def _abs_d_squared(coeffs: LinearizedCoefficients, w):
    m = coeffs.margin
    return (m - w * w) ** 2 + 4.0 * coeffs.kappa ** 2 * w * w


def _quad_scales(coeffs: LinearizedCoefficients):
    """Mass scale, structure scale, and tail cutoff for the spectral integrals."""
    k = coeffs.kappa
    m = coeffs.margin
    c0 = math.pi / (2.0 * k * m)  # analytic bound: C(tau) <= C(0) = pi/(2 kappa M)
    pole_scale = math.sqrt(abs(coeffs.delta_tilde ** 2 - abs(coeffs.alpha) ** 2)) + 2.0 * k
    # |d|^-2 <= 4/w^4 beyond twice the pole scale; choose W so the omitted
    # tail (<= 4/(3 W^3)) stays below QUAD_TAIL_FRACTION of the mass scale
    w_tail = (4.0 / (3.0 * QUAD_TAIL_FRACTION * c0)) ** (1.0 / 3.0)
    return c0, pole_scale, max(w_tail, 10.0 * pole_scale)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _panel_sum(fvec, edges, phase_tau, weight):
    """Composite 16-point Gauss rule of fvec(w) * cos/sin(w tau) over panels."""
    centers = 0.5 * (edges[1:] + edges[:-1])
    halves = 0.5 * (edges[1:] - edges[:-1])
    nodes = (centers[:, None] + halves[:, None] * _GL_NODES[None, :]).ravel()
    weights = (halves[:, None] * _GL_WEIGHTS[None, :]).ravel()
    osc = np.cos(nodes * phase_tau) if weight == "cos" else np.sin(nodes * phase_tau)
    return float(np.sum(weights * fvec(nodes) * osc))


def _oscillatory_transform(fvec, tau, weight, tol, kappa, pole_scale, w_plain):
    """int_0^W fvec(w) cos/sin(w tau) dw with analytically bounded tail.

    Panels resolve both the kappa-wide resonance poles and the oscillation
    period, so the composite Gauss rule is exact to roundoff; the omitted
    tail is bounded by the plain |f| <= 4/w^4 estimate or, once w tau >> 1,
    by one integration by parts (factor 1/(W tau)), whichever allows the
    smaller cutoff.
    """
    # cutoff from the two tail bounds (f monotone beyond a few pole scales)
    if weight == "cos":
        w_ibp = (8.0 / (tau * tol)) ** 0.25 if tau > 0 else math.inf
    else:
        w_ibp = (8.0 / (tau * tol)) ** (1.0 / 3.0) if tau > 0 else math.inf
    w_cut = max(20.0 * pole_scale, min(w_plain, w_ibp))

    # 16-point Gauss integrates ~1.5 oscillation periods per panel to ~1e-14
    # relative, so the period only weakly constrains the panel width
    h_osc = 3.0 * math.pi / tau if tau > 0 else math.inf
    h_structure = min(kappa / 2.0, pole_scale / 4.0)
    w_dense = min(3.0 * pole_scale, w_cut)
    h1 = min(h_structure, h_osc)
    edges = [np.arange(0.0, w_dense, h1), [w_dense]]
    if w_cut > w_dense:
        h2 = min(pole_scale / 2.0, h_osc)
        edges.insert(1, np.arange(w_dense, w_cut, h2)[1:])
        edges.append([w_cut])
    grid = np.unique(np.concatenate([np.asarray(e, dtype=float) for e in edges]))
    return _panel_sum(fvec, grid, tau, weight)


def _cos_sin_integrals(coeffs: LinearizedCoefficients, tau: float):
    """C(tau) and S(tau) for tau >= 0 by adaptive quadrature."""
    c0, pole_scale, w_cut = _quad_scales(coeffs)
    f = lambda w: 1.0 / _abs_d_squared(coeffs, w)
    g = lambda w: w / _abs_d_squared(coeffs, w)
    if tau == 0.0:
        # all structure sits within a few pole scales; integrate it separately
        # from the smooth w^-4 tail up to the spec'd cutoff
        w_mid = min(20.0 * pole_scale, w_cut)
        total = 0.0
        for a, b in ((0.0, w_mid), (w_mid, w_cut)):
            if b <= a:
                continue
            res = integrate.quad(f, a, b, epsabs=1e-13 * c0, epsrel=1e-12,
                                 limit=800, full_output=1)
            if res[1] > 1e-8 * c0:
                raise NumericalError(
                    f"zero-lag quadrature did not converge: error {res[1]:.3e}")
            total += res[0]
        return 2.0 * total, 0.0
    tol_c = QUAD_TAIL_FRACTION * c0
    tol_s = QUAD_TAIL_FRACTION * c0 * pole_scale
    c_val = 2.0 * _oscillatory_transform(f, tau, "cos", tol_c, coeffs.kappa, pole_scale, w_cut)
    s_val = 2.0 * _oscillatory_transform(g, tau, "sin", tol_s, coeffs.kappa, pole_scale, w_cut)
    return c_val, s_val


def stationary_correlators(coeffs: LinearizedCoefficients, tau_grid) -> CorrelationSet:
    """Vacuum-input stationary correlators on a signed tau grid.

    C is even and S odd in tau, so each |tau| is integrated once.  With
    alpha = 0 the vacuum passes through untouched and every correlator
    vanishes identically.
    """
    if coeffs.margin <= 0.0:
        raise ValueError("correlators require a stable working point")
    tau_grid = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    if not np.all(np.isfinite(tau_grid)):
        raise ValueError("tau grid must be finite")

    if coeffs.alpha == 0:
        zeros = np.zeros(tau_grid.shape, dtype=complex)
        return CorrelationSet(tau_grid=tau_grid, n_f=0.0,
                              normal=zeros, anomalous=zeros.copy(),
                              reversed_anomalous=zeros.copy())

    k = coeffs.kappa
    alpha = coeffs.alpha
    dt = coeffs.delta_tilde
    cache: dict[float, tuple[float, float]] = {}

    def cs(abs_tau):
        if abs_tau not in cache:
            cache[abs_tau] = _cos_sin_integrals(coeffs, abs_tau)
        return cache[abs_tau]

    normal = np.empty(tau_grid.shape, dtype=complex)
    anomalous = np.empty(tau_grid.shape, dtype=complex)
    rev = np.empty(tau_grid.shape, dtype=complex)
    for i, tau in enumerate(tau_grid):
        c_val, s_abs = cs(abs(float(tau)))
        s_val = math.copysign(1.0, tau) * s_abs if tau != 0.0 else 0.0
        normal[i] = (k * abs(alpha) ** 2 / math.pi) * c_val
        anomalous[i] = (-k * alpha / math.pi) * ((dt + 1j * k) * c_val + 1j * s_val)
        rev[i] = (-k * alpha / math.pi) * ((dt + 1j * k) * c_val - 1j * s_val)
    c0_val, _ = cs(0.0)
    n_f = (k * abs(alpha) ** 2 / math.pi) * c0_val
    return CorrelationSet(tau_grid=tau_grid, n_f=n_f, normal=normal,
                          anomalous=anomalous, reversed_anomalous=rev)


def _g2_from_correlators(coeffs: LinearizedCoefficients, corr: CorrelationSet) -> np.ndarray:
    x = abs(coeffs.a_s) ** 2
    if x + corr.n_f <= 0.0:
        raise ValueError("g2 undefined: both coherent amplitude and fluctuations vanish")
    kk = np.conj(corr.reversed_anomalous)  # <A_f^dag(t) A_f^dag(t+tau)>
    num = (2.0 * np.real(coeffs.a_s ** 2 * kk)
           + 2.0 * x * np.real(corr.normal)
           + np.abs(kk) ** 2 + np.abs(corr.normal) ** 2)
    return 1.0 + num / (x + corr.n_f) ** 2


def g2(coeffs: LinearizedCoefficients, tau_grid) -> np.ndarray:
    """Second-order coherence g2(tau) of the total field A_s + A_f.

    Wick's theorem on the Gaussian fluctuations reduces the intensity
    correlation to the pair correlators; with x = |A_s|^2, n = normal(tau)
    and K(tau) = <A_f^dag(t) A_f^dag(t+tau)> = conj(<A_f(t+tau) A_f(t)>),

        g2 = 1 + [2 Re(A_s^2 K) + 2 x Re(n) + |K|^2 + |n|^2] / (x + n_f)^2.

    Detector ordering makes g2 even in tau, so it is evaluated at |tau|.
    """
    tau = np.abs(np.atleast_1d(np.asarray(tau_grid, dtype=float)))
    corr = stationary_correlators(coeffs, tau)
    out = _g2_from_correlators(coeffs, corr)
    return out if np.ndim(tau_grid) else float(out[0])


def g2_zero(coeffs: LinearizedCoefficients) -> float:
    """g2(0), needing only the zero-lag correlators."""
    return float(np.atleast_1d(g2(coeffs, np.array([0.0])))[0])


@dataclass(frozen=True)
class ScanPoint:
    """One stable-branch sample of a g2(0) scan."""

    value: float  # the scanned variable (delta_d or |Omega|), in rad/s
    branch: str
    n_bar: float
    g2_zero: float
    n_f: float
    anomalous: complex


def g2_zero_scan(params: SystemParams, delta_d_values=None, omega_values=None) -> list[ScanPoint]:
    """g2(0) per stable branch along a drive-detuning or drive-amplitude grid.

    Multivalued points contribute one sample per stable branch; grid points
    without any stable root are skipped (gaps, not errors).
    """
    if (delta_d_values is None) == (omega_values is None):
        raise ValueError("provide exactly one of delta_d_values or omega_values")
    if delta_d_values is not None:
        grid = np.asarray(delta_d_values, dtype=float)
        vary = lambda v: params.replace(delta_d=float(v))
    else:
        grid = np.asarray(omega_values, dtype=float)
        vary = lambda v: params.replace(omega_drive=complex(v))

    points: list[ScanPoint] = []
    for v in grid:
        p = vary(v)
        for root in steady_state_roots(p):
            if not root.stable:
                continue
            coeffs = linearize(root, p)
            if coeffs.margin <= 0.0:
                continue
            corr = stationary_correlators(coeffs, np.array([0.0]))
            if root.n_bar + corr.n_f <= 0.0:
                continue
            points.append(ScanPoint(
                value=float(v), branch=root.branch, n_bar=root.n_bar,
                g2_zero=float(_g2_from_correlators(coeffs, corr)[0]),
                n_f=corr.n_f, anomalous=complex(corr.anomalous[0])))
    return points
