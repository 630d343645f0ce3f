"""Independent oracles shared by the test modules.

Everything here deliberately avoids the library's production code paths:
residue closed forms for the spectral integrals, an exact quantum-regression
solver for the quadratic (linearized) model, and a brute-force mean-field
time integrator for stability.
"""

import cmath
import math

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply

from kerrqed.lindblad_oracle import FockOperatorSet, _annihilation, steady_state_dm


# ---------------------------------------------------------------------------
# residue closed forms for C(tau), S(tau) and the correlators built from them

def residue_cos_integral(kappa, delta_tilde, alpha_abs, tau):
    """C(tau) = int_-inf^inf cos(w tau)/|d(w)|^2 dw by residues (tau >= 0)."""
    m = kappa ** 2 + delta_tilde ** 2 - alpha_abs ** 2
    beta = cmath.sqrt(complex(delta_tilde ** 2 - alpha_abs ** 2))
    t = abs(tau)
    if beta == 0:
        core = kappa * t + 1.0
    else:
        core = kappa * cmath.sin(beta * t) / beta + cmath.cos(beta * t)
    return (math.pi * math.exp(-kappa * t) / (2.0 * kappa * m) * core).real


def residue_sin_integral(kappa, delta_tilde, alpha_abs, tau):
    """S(tau) = int_-inf^inf w sin(w tau)/|d(w)|^2 dw by residues (signed, odd)."""
    beta = cmath.sqrt(complex(delta_tilde ** 2 - alpha_abs ** 2))
    t = abs(tau)
    core = t if beta == 0 else cmath.sin(beta * t) / beta
    val = (math.pi * math.exp(-kappa * t) / (2.0 * kappa) * core).real
    return math.copysign(1.0, tau) * val if tau != 0.0 else 0.0


def residue_correlators(coeffs, tau):
    """(normal, anomalous, reversed_anomalous) closed forms at one lag."""
    k = coeffs.kappa
    a = coeffs.alpha
    dt = coeffs.delta_tilde
    c = residue_cos_integral(k, dt, abs(a), tau)
    s = residue_sin_integral(k, dt, abs(a), tau)
    normal = (k * abs(a) ** 2 / math.pi) * c
    anomalous = (-k * a / math.pi) * ((dt + 1j * k) * c + 1j * s)
    reversed_anomalous = (-k * a / math.pi) * ((dt + 1j * k) * c - 1j * s)
    return normal, anomalous, reversed_anomalous


# ---------------------------------------------------------------------------
# exact regression oracle for the quadratic fluctuation model

def quadratic_model_liouvillian(coeffs, kappa, dim):
    """Lindblad generator of the linearized model itself (no approximation gap)."""
    a = _annihilation(dim)
    h = (coeffs.delta_tilde * (a.conj().T @ a)
         + 0.5 * coeffs.alpha * (a.conj().T @ a.conj().T)
         + 0.5 * np.conj(coeffs.alpha) * (a @ a))
    ident = sparse.identity(dim, format="csr", dtype=complex)
    h_s = sparse.csr_matrix(h)
    a_s = sparse.csr_matrix(a)
    n_s = sparse.csr_matrix(a.conj().T @ a)
    lind = (-1j * (sparse.kron(ident, h_s) - sparse.kron(h_s.T, ident))
            + 2.0 * kappa * (sparse.kron(a_s.conj(), a_s)
                             - 0.5 * sparse.kron(ident, n_s)
                             - 0.5 * sparse.kron(n_s.T, ident))).tocsr()
    return FockOperatorSet(dim=dim, a=a, hamiltonian=h, variant="quadratic",
                           liouvillian=lind)


def _two_time(lind, rho, left_op, seed_mat, tau):
    """<L(0) R(tau)>-style regression value Tr[left_op e^{L tau} seed_mat]."""
    dim = left_op.shape[0]
    vec = seed_mat.reshape(-1, order="F")
    if tau > 0.0:
        vec = expm_multiply(lind, vec, start=0.0, stop=tau, num=2, endpoint=True)[-1]
    proj = left_op.conj().T.reshape(-1, order="F").conj()
    return complex(proj @ vec)


def gaussian_regression_oracle(coeffs, kappa, tau_grid, dim=30):
    """Exact g2(tau), normal(tau), and both anomalous orderings by regression.

    The coherent amplitude is handled as the operator shift b = A_s + a, so
    the only approximation versus the linearized formulas is Fock truncation.
    """
    ops = quadratic_model_liouvillian(coeffs, kappa, dim)
    rho = steady_state_dm(ops).matrix
    a = ops.a
    b = coeffs.a_s * np.eye(dim, dtype=complex) + a
    nb = b.conj().T @ b
    mean_nb = float(np.trace(rho @ nb).real)
    g2_vals, n_vals, m_vals, mrev_vals = [], [], [], []
    for t in np.asarray(tau_grid, dtype=float):
        g2_vals.append(_two_time(ops.liouvillian, rho, nb, b @ rho @ b.conj().T, t).real
                       / mean_nb ** 2)
        n_vals.append(_two_time(ops.liouvillian, rho, a, rho @ a.conj().T, t))
        m_vals.append(_two_time(ops.liouvillian, rho, a, rho @ a, t))
        mrev_vals.append(_two_time(ops.liouvillian, rho, a, a @ rho, t))
    return (np.array(g2_vals), np.array(n_vals), np.array(m_vals), np.array(mrev_vals))


# ---------------------------------------------------------------------------
# brute-force mean-field dynamics for stability classification

def integrate_mean_field(params, a0, t_end, rtol=1e-10, atol=1e-12):
    """Integrate dA/dt = -[kappa + i(Delta_d - shift(|A|^2))] A - i Omega."""
    from kerrqed.model import drive_resonance_shift

    def rhs(_, y):
        a = y[0] + 1j * y[1]
        shift = drive_resonance_shift(params, abs(a) ** 2)
        da = -(params.kappa + 1j * (params.delta_d - shift)) * a - 1j * params.omega_drive
        return [da.real, da.imag]

    sol = solve_ivp(rhs, (0.0, t_end), [a0.real, a0.imag], rtol=rtol, atol=atol,
                    method="RK45", dense_output=False)
    return sol.y[0, -1] + 1j * sol.y[1, -1]
