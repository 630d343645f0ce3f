import cmath

import numpy as np
import pytest

from kerrqed import (
    SystemParams,
    fluctuation_transfer,
    g2,
    g2_zero,
    g2_zero_scan,
    linearize,
    stationary_correlators,
    steady_state_roots,
)
from kerrqed.model import MHZ
from helpers import gaussian_regression_oracle, residue_correlators


def _working_point(g=100.0, delta_d=9.96, omega=0.01):
    p = SystemParams.from_mhz(g_mhz=g, delta_mhz=1000.0, kappa_mhz=0.1,
                              omega_mhz=omega, delta_d_mhz=delta_d)
    root = [r for r in steady_state_roots(p) if r.stable][0]
    return p, root, linearize(root, p)


def test_linearize_decoupled_limit():
    p = SystemParams.from_mhz(g_mhz=1.0, delta_mhz=1000.0, kappa_mhz=0.1,
                              omega_mhz=0.3, delta_d_mhz=0.2).replace(g=0.0)
    root = steady_state_roots(p)[0]
    c = linearize(root, p)
    assert c.alpha == 0
    assert c.delta_omega == 0.0
    assert c.delta_tilde == pytest.approx(p.delta_d)


def test_linearize_zero_drive():
    from kerrqed.model import excitation_energy
    p = SystemParams.from_mhz(g_mhz=100.0, delta_mhz=1000.0, kappa_mhz=0.1,
                              omega_mhz=0.0, delta_d_mhz=5.0)
    root = steady_state_roots(p)[0]
    c = linearize(root, p)
    assert root.a_s == 0j and c.alpha == 0
    assert c.delta_omega == pytest.approx(p.g ** 2 / excitation_energy(p, 0.0), rel=1e-14)


def test_linearize_rejects_unstable(fig2_params):
    p = fig2_params.replace(delta_d=36.0 * MHZ, omega_drive=0.15 * MHZ)
    middle = steady_state_roots(p)[1]
    assert not middle.stable
    with pytest.raises(ValueError):
        linearize(middle, p)


def test_alpha_magnitude_and_phase(fig4_params):
    from kerrqed.model import excitation_energy
    p = fig4_params.replace(delta_d=9.74 * MHZ)
    root = [r for r in steady_state_roots(p) if r.stable][0]
    c = linearize(root, p)
    e = excitation_energy(p, root.n_bar)
    assert abs(c.alpha) == pytest.approx(2.0 * p.g ** 4 * root.n_bar / e ** 3, rel=1e-12)
    # alpha carries twice the amplitude phase (compare mod 2 pi)
    assert cmath.phase(c.alpha * np.conj(root.a_s) ** 2) == pytest.approx(0.0, abs=1e-9)


def test_transfer_linear_cavity_closed_form():
    p = SystemParams.from_mhz(g_mhz=1.0, delta_mhz=1000.0, kappa_mhz=0.1,
                              omega_mhz=0.1, delta_d_mhz=0.25).replace(g=0.0)
    root = steady_state_roots(p)[0]
    c = linearize(root, p)
    w = np.linspace(-5, 5, 11) * MHZ
    c_in, c_conj = fluctuation_transfer(c, w)
    assert np.all(c_conj == 0)
    direct = -np.sqrt(2 * p.kappa) / (p.kappa + 1j * (w + p.delta_d))
    assert np.allclose(c_in, direct, rtol=1e-12)


def test_transfer_poles_upper_half_plane():
    _, _, c = _working_point(delta_d=9.74, omega=0.1)
    beta = cmath.sqrt(complex(c.delta_tilde ** 2 - abs(c.alpha) ** 2))
    for pole in (beta + 1j * c.kappa, -beta + 1j * c.kappa):
        d = (1j * pole + c.kappa) ** 2 + c.delta_tilde ** 2 - abs(c.alpha) ** 2
        assert abs(d) <= 1e-6 * (c.kappa ** 2 + abs(c.delta_tilde) ** 2)
        assert pole.imag > 0


def test_correlators_vanish_without_parametric_coupling():
    p = SystemParams.from_mhz(g_mhz=1.0, delta_mhz=1000.0, kappa_mhz=0.1,
                              omega_mhz=0.5, delta_d_mhz=0.2).replace(g=0.0)
    root = steady_state_roots(p)[0]
    c = linearize(root, p)
    tau = np.linspace(0.0, 10 / p.kappa, 7)
    corr = stationary_correlators(c, tau)
    assert corr.n_f == 0.0
    assert np.all(corr.normal == 0) and np.all(corr.anomalous == 0)


def test_quadrature_matches_residue_closed_forms():
    _, _, c = _working_point(delta_d=9.74, omega=0.1)
    tau = np.array([0.0, 0.3 / c.kappa, 2.0 / c.kappa, -1.1 / c.kappa])
    corr = stationary_correlators(c, tau)
    for i, t in enumerate(tau):
        n_ref, m_ref, mr_ref = residue_correlators(c, t)
        assert corr.normal[i] == pytest.approx(n_ref, rel=1e-6)
        assert corr.anomalous[i] == pytest.approx(m_ref, rel=1e-6)
        assert corr.reversed_anomalous[i] == pytest.approx(mr_ref, rel=1e-6)


def test_zero_lag_anomalous_residue_contract():
    # tau = 0: quadrature must match the two-pole residue value to 1e-6
    for dd, om in ((9.74, 0.1), (9.96, 0.1), (38.5, 0.01)):
        g_mhz = 100.0 if dd < 20 else 200.0
        _, _, c = _working_point(g=g_mhz, delta_d=dd, omega=om)
        corr = stationary_correlators(c, np.array([0.0]))
        n_ref, m_ref, _ = residue_correlators(c, 0.0)
        assert corr.n_f == pytest.approx(n_ref, rel=1e-6)
        assert corr.anomalous[0] == pytest.approx(m_ref, rel=1e-6)
        # closed form n_f = |alpha|^2 / (2 M)
        assert corr.n_f == pytest.approx(abs(c.alpha) ** 2 / (2.0 * c.margin), rel=1e-6)


def test_correlator_stationarity_and_decay():
    _, _, c = _working_point(delta_d=9.74, omega=0.1)
    tau = np.array([0.7 / c.kappa])
    fwd = stationary_correlators(c, tau)
    bwd = stationary_correlators(c, -tau)
    assert bwd.normal[0] == pytest.approx(np.conj(fwd.normal[0]), rel=1e-10)
    far = stationary_correlators(c, np.array([25.0 / c.kappa]))
    assert abs(far.normal[0]) <= 1e-9 * fwd.n_f
    assert abs(far.anomalous[0]) <= 1e-9 * abs(fwd.anomalous[0]) + 1e-30


def test_n_f_grows_toward_instability():
    # fluctuation occupation diverges as |alpha| approaches the stability
    # boundary sqrt(kappa^2 + delta_tilde^2) at fixed detuning
    from kerrqed.fluctuations import LinearizedCoefficients
    kappa, dt = 1.0, 0.6
    boundary = np.hypot(kappa, dt)
    occupations = []
    for frac in (0.5, 0.9, 0.99, 0.999):
        c = LinearizedCoefficients(delta_tilde=dt, alpha=frac * boundary + 0j,
                                   delta_omega=0.0, a_s=1.0 + 0j, kappa=kappa)
        corr = stationary_correlators(c, np.array([0.0]))
        occupations.append(corr.n_f)
    assert occupations == sorted(occupations)
    assert occupations[-1] > 100.0 * occupations[0]


def test_g2_coherent_state_is_flat():
    p = SystemParams.from_mhz(g_mhz=1.0, delta_mhz=1000.0, kappa_mhz=0.1,
                              omega_mhz=0.5, delta_d_mhz=0.1).replace(g=0.0)
    root = steady_state_roots(p)[0]
    c = linearize(root, p)
    tau = np.linspace(0, 10 / p.kappa, 9)
    assert np.allclose(g2(c, tau), 1.0, atol=1e-12)


def test_g2_matches_exact_gaussian_regression():
    # the same quadratic model solved exactly by quantum regression: the
    # only gap is Fock truncation, so agreement should be essentially exact
    for dd in (9.74, 9.96):
        p, root, c = _working_point(delta_d=dd, omega=0.1)
        tau = np.linspace(0.0, 5.0 / p.kappa, 6)
        ours = g2(c, tau)
        exact, n_ex, m_ex, mrev_ex = gaussian_regression_oracle(c, p.kappa, tau, dim=40)
        assert np.allclose(ours, exact, rtol=1e-6)
        corr = stationary_correlators(c, tau)
        assert np.allclose(corr.normal, n_ex, atol=1e-6 * max(corr.n_f, 1e-12))
        assert np.allclose(corr.anomalous, m_ex, rtol=1e-5, atol=1e-9)
        assert np.allclose(corr.reversed_anomalous, mrev_ex, rtol=1e-5, atol=1e-9)


def test_g2_real_even_and_relaxing():
    p, root, c = _working_point(delta_d=9.74, omega=0.1)
    tau = np.linspace(0.0, 20.0 / p.kappa, 11)
    vals = g2(c, tau)
    assert np.all(np.isreal(vals))
    assert np.allclose(g2(c, -tau), vals, rtol=1e-12)  # detector ordering
    assert abs(vals[-1] - 1.0) < 1e-3


def test_g2_phase_covariance():
    p, root, c = _working_point(delta_d=9.74, omega=0.1)
    q = p.replace(omega_drive=p.omega_drive * cmath.exp(1j * 0.9))
    root_q = [r for r in steady_state_roots(q) if r.stable][0]
    cq = linearize(root_q, q)
    tau = np.linspace(0.0, 3.0 / p.kappa, 5)
    assert np.allclose(g2(c, tau), g2(cq, tau), rtol=1e-9)


def test_g2_rejects_empty_field():
    p = SystemParams.from_mhz(g_mhz=100.0, delta_mhz=1000.0, kappa_mhz=0.1,
                              omega_mhz=0.0, delta_d_mhz=5.0)
    root = steady_state_roots(p)[0]
    c = linearize(root, p)
    with pytest.raises(ValueError):
        g2(c, np.array([0.0]))


def test_g2_paper_blockade_window_values():
    # blockade minimum near 9.96 MHz, classical maximum near 9.74 MHz
    _, _, c_min = _working_point(delta_d=9.96)
    _, _, c_max = _working_point(delta_d=9.74)
    assert g2_zero(c_min) < 1.0 < g2_zero(c_max)


def test_g2_threshold_crossing_near_9p85():
    grid = np.linspace(9.75, 9.95, 41) * MHZ
    p = SystemParams.from_mhz(g_mhz=100.0, delta_mhz=1000.0, kappa_mhz=0.1, omega_mhz=0.01)
    points = g2_zero_scan(p, delta_d_values=grid)
    vals = np.array([q.g2_zero for q in points])
    sign_flips = np.nonzero(np.diff(np.sign(vals - 1.0)))[0]
    assert len(sign_flips) == 1
    crossing = grid[sign_flips[0]] / MHZ
    assert abs(crossing - 9.85) < 0.1


def test_g2_stronger_drive_closer_to_coherent():
    # increasing the drive pushes the field toward classical statistics: the
    # strong-drive deviation envelope sits inside the weak-drive one (the
    # weak-drive curve oscillates through 1, so a pointwise comparison would
    # fail trivially at its unit crossings)
    p = SystemParams.from_mhz(g_mhz=200.0, delta_mhz=1000.0, kappa_mhz=0.1,
                              delta_d_mhz=38.5)
    tau = np.linspace(0.0, 10.0 / p.kappa, 81)
    curves = {}
    for om in (0.01, 1.0):
        q = p.replace(omega_drive=om * MHZ)
        root = [r for r in steady_state_roots(q) if r.stable][0]
        curves[om] = np.asarray(g2(linearize(root, q), tau))
    dev_weak = np.abs(curves[0.01] - 1.0)
    dev_strong = np.abs(curves[1.0] - 1.0)
    assert dev_strong[0] < dev_weak[0]
    assert dev_strong.max() < dev_weak.max()
    # running maximum of the remaining deviation: strong-drive inside weak-drive
    tail_weak = np.maximum.accumulate(dev_weak[::-1])[::-1]
    tail_strong = np.maximum.accumulate(dev_strong[::-1])[::-1]
    assert np.all(tail_strong <= tail_weak + 1e-9)


def test_g2_scan_emits_both_branches_and_gaps(fig2_params):
    # inside the bistable window both stable branches are reported
    p = fig2_params.replace(omega_drive=0.15 * MHZ)
    pts = g2_zero_scan(p, delta_d_values=np.array([36.0 * MHZ]))
    branches = sorted(q.branch for q in pts)
    assert branches == ["lower", "upper"]


def test_g2_scan_large_drive_tends_to_one():
    p = SystemParams.from_mhz(g_mhz=200.0, delta_mhz=1000.0, kappa_mhz=0.1,
                              delta_d_mhz=38.5)
    pts = g2_zero_scan(p, omega_values=np.array([5.0, 50.0]) * MHZ)
    weak, strong = pts[0].g2_zero, pts[-1].g2_zero
    assert abs(strong - 1.0) < abs(weak - 1.0)
    assert abs(strong - 1.0) < 0.03


def test_g2_scan_flat_for_linear_cavity():
    p = SystemParams.from_mhz(g_mhz=1.0, delta_mhz=1000.0, kappa_mhz=0.1,
                              delta_d_mhz=0.2).replace(g=0.0)
    pts = g2_zero_scan(p, omega_values=np.geomspace(0.01, 1.0, 5) * MHZ)
    assert np.allclose([q.g2_zero for q in pts], 1.0, atol=1e-12)
