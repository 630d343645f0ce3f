"""Truncated Fock-space spectrum of the driven Kerr ladder.

The effective Hamiltonian chi (n - n_c)^2 + (Omega a^dag + Omega^* a) is the
photon analog of a Cooper-pair box: chi is the charging energy, n_c the gate
charge, |Omega| the tunneling energy.  Diagonalizing it on a truncated Fock
basis gives the level curves near avoided crossings and the ground-state
photon staircase.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceWarning, NumericalError

HERMITICITY_RTOL = 1e-12
EIGEN_RESIDUAL_RTOL = 1e-9


@dataclass(frozen=True)
class TruncatedKerrHamiltonian:
    """Kerr ladder Hamiltonian on Fock states |0> ... |dim-1> (rad/s, hbar = 1)."""

    dim: int
    chi: float
    n_c: float
    omega: complex
    matrix: np.ndarray


@dataclass(frozen=True)
class EigenSystem:
    """Sorted spectrum with orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def build_hamiltonian(chi: float, n_c: float, omega: complex, dim: int) -> TruncatedKerrHamiltonian:
    """Kerr diagonal chi (n - n_c)^2 with drive on the first off-diagonals.

    <n+1|H|n> = Omega sqrt(n+1); all other off-diagonal elements vanish.
    """
    if dim < 2:
        raise ValueError(f"Fock truncation dim must be >= 2, got {dim}")
    n = np.arange(dim, dtype=float)
    h = np.diag(chi * (n - n_c) ** 2).astype(complex)
    ladder = np.sqrt(n[1:])  # sqrt(1) ... sqrt(dim-1)
    h += np.diag(omega * ladder, -1)          # <n+1|H|n> = Omega sqrt(n+1)
    h += np.diag(np.conj(omega) * ladder, 1)  # Hermitian partner
    return TruncatedKerrHamiltonian(dim=dim, chi=chi, n_c=n_c, omega=omega, matrix=h)


def eigensystem(h: TruncatedKerrHamiltonian) -> EigenSystem:
    """Full sorted spectrum with deterministically phased eigenvectors.

    Each eigenvector is rotated so its largest-magnitude amplitude is real
    and positive; near-degenerate pairs are ordered by their dominant Fock
    index so repeated runs (and drive-phase rotations) give identical output.
    """
    try:
        vals, vecs = np.linalg.eigh(h.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigensolver failed for chi={h.chi}, n_c={h.n_c}, omega={h.omega}, dim={h.dim}"
        ) from exc

    scale = max(abs(vals[0]), abs(vals[-1]), 1e-300)
    order = np.arange(h.dim)
    # stable ordering inside degenerate clusters
    i = 0
    while i < h.dim:
        j = i + 1
        while j < h.dim and vals[j] - vals[i] <= 1e-12 * scale:
            j += 1
        if j - i > 1:
            dom = [int(np.argmax(np.abs(vecs[:, k]))) for k in order[i:j]]
            order[i:j] = order[i:j][np.argsort(dom, kind="stable")]
        i = j
    vals = vals[order]
    vecs = vecs[:, order]

    for k in range(h.dim):
        lead = np.argmax(np.abs(vecs[:, k]))
        phase = vecs[lead, k] / abs(vecs[lead, k])
        vecs[:, k] = vecs[:, k] / phase

    residual = np.linalg.norm(h.matrix @ vecs - vecs * vals, axis=0)
    if np.any(residual > EIGEN_RESIDUAL_RTOL * scale):
        raise NumericalError(
            f"eigenpair residual {residual.max():.3e} exceeds "
            f"{EIGEN_RESIDUAL_RTOL:.1e} * ||H|| for chi={h.chi}, n_c={h.n_c}, "
            f"omega={h.omega}, dim={h.dim}"
        )
    return EigenSystem(eigenvalues=vals, eigenvectors=vecs)


def default_dim(n_c_max: float) -> int:
    """Truncation heuristic: ground states localize near n ~ n_c for chi >> |Omega|."""
    return int(np.ceil(4.0 * (max(n_c_max, 0.0) + 1.0))) + 20


def ground_state_mean_photon(chi_over_omega: float, n_c: float, dim: int | None = None,
                             check_tol: float = 1e-6) -> float:
    """Mean photon number <n> of the ground state, for a given chi/|Omega| ratio.

    Only the ratio matters, so the Hamiltonian is built with chi = 1.  The
    result is recomputed at dim+10; a change above ``check_tol`` emits a
    ConvergenceWarning carrying both values.
    """
    if not chi_over_omega > 0.0:
        raise ValueError("chi/|Omega| ratio must be > 0")
    if dim is None:
        dim = default_dim(n_c)

    def mean_n(d):
        h = build_hamiltonian(1.0, n_c, 1.0 / chi_over_omega, d)
        es = eigensystem(h)
        psi0 = es.eigenvectors[:, 0]
        return float(np.sum(np.arange(d) * np.abs(psi0) ** 2))

    value = mean_n(dim)
    value_up = mean_n(dim + 10)
    if abs(value - value_up) > check_tol:
        warnings.warn(
            f"staircase truncation not converged at dim={dim}: "
            f"<n>={value:.9g} vs <n>={value_up:.9g} at dim+10",
            ConvergenceWarning,
            stacklevel=2,
        )
    return value


def staircase_curve(chi_over_omega: float, n_c_values, dim: int | None = None) -> np.ndarray:
    """<n> along an n_c grid at fixed chi/|Omega|."""
    n_c_values = np.asarray(n_c_values, dtype=float)
    if dim is None:
        dim = default_dim(float(n_c_values.max()) if n_c_values.size else 0.0)
    return np.array([ground_state_mean_photon(chi_over_omega, nc, dim) for nc in n_c_values])


def avoided_crossing_two_level(chi: float, n_c: float, omega: complex):
    """Eigenvalue pair of the two-level crossing model at half-integer n_c.

    Restricting the ladder to {|0>, |1>} near n_c = 0.5 gives a traceless
    two-level Hamiltonian with level distance chi (n_c - 0.5) and coupling
    Omega; the pair -/+ sqrt(chi^2 (n_c-0.5)^2 + |Omega|^2) is returned
    relative to the mean of the two levels.
    """
    s = np.hypot(chi * (n_c - 0.5), abs(omega))
    return (-s, +s)
