"""Exact small-dimension master-equation solver used as verification oracle.

The driven cavity with frozen qubit sign evolves under

    drho/dt = -i [H, rho] + 2 kappa D[a] rho,

where D[a] is the standard dissipator and the rate 2 kappa is fixed so the
decoupled (g = 0) steady state reproduces the semiclassical photon number
|Omega|^2 / (kappa^2 + Delta_d^2).  Two Hamiltonian variants are supported
in the drive rotating frame:

    full_dispersive: Delta_d n - (sigma_z/2) E(n + s),   s = (1+sigma_z)/2
    kerr:            Delta_d n - sigma_z g^2 (n+s)/Delta + sigma_z chi (n+s)^2

The kerr variant is the quartic expansion of the full diagonal in the same
laboratory detuning convention, so the two converge as g/Delta shrinks and
can be compared point by point.  Steady states come from a trace-anchored
sparse solve of the vectorized Liouvillian; two-time correlators use the
quantum regression theorem with Krylov propagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply, splu

from .errors import DegenerateSteadyStateError, NumericalError
from .model import SystemParams, excitation_energy, kerr_strength

VARIANTS = ("full_dispersive", "kerr")

TRACE_TOL = 1e-10
HERM_TOL = 1e-10
EIGVAL_FLOOR = -1e-8
DIM_CAP = 120


@dataclass(frozen=True)
class FockOperatorSet:
    """Truncated Fock-space operators and the vectorized Liouvillian."""

    dim: int
    a: np.ndarray
    hamiltonian: np.ndarray
    variant: str
    liouvillian: sparse.csr_matrix


class DensityMatrix:
    """Validated density matrix: unit trace, Hermitian, nonnegative spectrum."""

    def __init__(self, matrix: np.ndarray):
        tr = np.trace(matrix)
        if abs(tr - 1.0) > TRACE_TOL:
            raise NumericalError(f"density matrix trace {tr} deviates from 1 beyond {TRACE_TOL}")
        herm_defect = np.max(np.abs(matrix - matrix.conj().T))
        if herm_defect > HERM_TOL:
            raise NumericalError(f"density matrix hermiticity defect {herm_defect:.3e}")
        clean = 0.5 * (matrix + matrix.conj().T)
        eigs = np.linalg.eigvalsh(clean)
        if eigs.min() < EIGVAL_FLOOR:
            raise NumericalError(f"density matrix eigenvalue {eigs.min():.3e} below {EIGVAL_FLOOR}")
        self.matrix = clean / np.trace(clean).real
        self.eigenvalues = eigs


def _annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, dim)), 1)


def _diagonal(params: SystemParams, variant: str, dim: int) -> np.ndarray:
    n = np.arange(dim, dtype=float)
    s = 0.5 * (1 + params.sigma_z)
    if variant == "full_dispersive":
        return params.delta_d * n - 0.5 * params.sigma_z * excitation_energy(params, n)
    if variant == "kerr":
        chi = kerr_strength(params)
        return (params.delta_d * n
                - params.sigma_z * params.g ** 2 * (n + s) / params.delta
                + params.sigma_z * chi * (n + s) ** 2)
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def build_liouvillian(params: SystemParams, variant: str = "full_dispersive",
                      dim: int = 30) -> FockOperatorSet:
    """Assemble H and the vectorized generator L with dissipator 2 kappa D[a]."""
    if dim < 3:
        raise ValueError(f"oracle needs dim >= 3, got {dim}")
    a = _annihilation(dim)
    h = np.diag(_diagonal(params, variant, dim)).astype(complex)
    h += params.omega_drive * a.conj().T + np.conj(params.omega_drive) * a

    ident = sparse.identity(dim, format="csr", dtype=complex)
    h_s = sparse.csr_matrix(h)
    a_s = sparse.csr_matrix(a)
    n_s = sparse.csr_matrix(a.conj().T @ a)

    # column-stacking convention: vec(A rho B) = kron(B^T, A) vec(rho)
    lind = (-1j * (sparse.kron(ident, h_s) - sparse.kron(h_s.T, ident))
            + 2.0 * params.kappa * (sparse.kron(a_s.conj(), a_s)
                                    - 0.5 * sparse.kron(ident, n_s)
                                    - 0.5 * sparse.kron(n_s.T, ident)))
    return FockOperatorSet(dim=dim, a=a, hamiltonian=h, variant=variant,
                           liouvillian=lind.tocsr())


def _vec(m: np.ndarray) -> np.ndarray:
    return m.reshape(-1, order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape((dim, dim), order="F")


def _anchored_solve(ops: FockOperatorSet, anchor_row: int) -> np.ndarray:
    """Null vector of L with unit trace via a rank-one trace anchor."""
    dim = ops.dim
    n2 = dim * dim
    lind = ops.liouvillian
    weight = max(np.abs(lind.data).max(), 1.0) if lind.nnz else 1.0
    trace_row = sparse.csr_matrix(
        (np.ones(dim), (np.zeros(dim, dtype=int), np.arange(0, n2, dim + 1))),
        shape=(1, n2), dtype=complex)
    anchor = sparse.csr_matrix(([1.0], ([anchor_row], [0])), shape=(n2, 1), dtype=complex)
    modified = (lind + weight * (anchor @ trace_row)).tocsc()
    rhs = np.zeros(n2, dtype=complex)
    rhs[anchor_row] = weight
    try:
        return splu(modified).solve(rhs)
    except RuntimeError as exc:  # exactly singular factor
        raise DegenerateSteadyStateError(
            f"trace-anchored Liouvillian is singular ({exc}); null space is degenerate"
        ) from exc


def steady_state_dm(ops: FockOperatorSet) -> DensityMatrix:
    """Trace-one steady state with residual and degeneracy checks.

    Solving with two different anchor rows detects a degenerate null space:
    with a one-dimensional kernel both solves agree, otherwise the two
    candidates differ and are reported.
    """
    v1 = _anchored_solve(ops, 0)
    v2 = _anchored_solve(ops, ops.dim + 1)  # anchor on the |1><1| component
    if np.max(np.abs(v1 - v2)) > 1e-8 * max(np.abs(v1).max(), 1.0):
        raise DegenerateSteadyStateError(
            "steady state is not unique: two trace anchors gave different null vectors",
            basis=(v1, v2))

    lind_norm = sparse.linalg.norm(ops.liouvillian)
    res = np.linalg.norm(ops.liouvillian @ v1)
    if res > 1e-10 * lind_norm:
        raise NumericalError(
            f"steady-state residual ||L rho|| = {res:.3e} exceeds 1e-10 ||L|| = {1e-10 * lind_norm:.3e}")
    return DensityMatrix(_unvec(v1, ops.dim))


def observables(rho: DensityMatrix, ops: FockOperatorSet) -> tuple[float, float]:
    """(mean photon number, zero-delay second-order coherence)."""
    m = rho.matrix
    n_op = ops.a.conj().T @ ops.a
    mean_n = float(np.trace(m @ n_op).real)
    aa = ops.a @ ops.a
    if mean_n <= 0.0:
        raise ValueError("g2(0) undefined for a state with <n> = 0")
    g2_num = float(np.trace(m @ (aa.conj().T @ aa)).real)
    return mean_n, g2_num / mean_n ** 2


def fluctuation_moments(rho: DensityMatrix, ops: FockOperatorSet):
    """Fluctuation occupation and anomalous moment about the coherent part.

    Returns (<a>, <n> - |<a>|^2, <aa> - <a>^2) for side-by-side comparison
    with the linearized correlators.
    """
    m = rho.matrix
    a_mean = complex(np.trace(m @ ops.a))
    n_mean = float(np.trace(m @ (ops.a.conj().T @ ops.a)).real)
    aa_mean = complex(np.trace(m @ (ops.a @ ops.a)))
    return a_mean, n_mean - abs(a_mean) ** 2, aa_mean - a_mean ** 2


def g2_tau_regression(rho: DensityMatrix, ops: FockOperatorSet, tau_grid) -> np.ndarray:
    """g2(tau) by the quantum regression theorem.

    Propagates the operator-dressed state a rho a^dag under L and projects
    onto the number operator.  The generator is trace preserving, so the
    trace of the propagated matrix must stay at <n>; drift beyond 1e-9
    triggers one retry with halved Krylov steps before raising.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.ndim != 1 or tau_grid.size == 0:
        raise ValueError("tau grid must be a nonempty 1-D array")
    if np.any(tau_grid < 0.0):
        raise ValueError("regression propagates forward: tau must be >= 0")

    n_op = ops.a.conj().T @ ops.a
    mean_n = float(np.trace(rho.matrix @ n_op).real)
    if mean_n <= 0.0:
        raise ValueError("g2(tau) undefined for a state with <n> = 0")
    seed = _vec(ops.a @ rho.matrix @ ops.a.conj().T)
    seed_trace = np.sum(seed[:: ops.dim + 1]).real  # equals <n>
    proj = _vec(n_op).conj()

    spacing = np.diff(tau_grid)
    uniform = (tau_grid.size > 2 and tau_grid[0] == 0.0 and spacing.size
               and np.allclose(spacing, spacing[0], rtol=1e-12, atol=0.0))

    def check_trace(tr, t, sub_steps):
        if abs(tr - seed_trace) > 1e-9 * max(abs(seed_trace), 1.0):
            raise NumericalError(
                f"trace drift {abs(tr - seed_trace):.3e} at tau={t:.3e} "
                f"with {sub_steps} substep(s)")

    def propagate(sub_steps: int) -> np.ndarray:
        if uniform and sub_steps == 1:
            states = expm_multiply(ops.liouvillian, seed, start=tau_grid[0],
                                   stop=tau_grid[-1], num=tau_grid.size, endpoint=True)
            for t, state in zip(tau_grid, states):
                check_trace(np.sum(state[:: ops.dim + 1]).real, t, sub_steps)
            return np.real(states @ proj)
        values = np.empty(tau_grid.size)
        order = np.argsort(tau_grid)
        state = seed.copy()
        t_prev = 0.0
        for idx in order:
            t = tau_grid[idx]
            dt = t - t_prev
            if dt > 0.0:
                for _ in range(sub_steps):
                    state = expm_multiply(ops.liouvillian, state,
                                          start=0.0, stop=dt / sub_steps, num=2,
                                          endpoint=True)[-1]
            check_trace(np.sum(state[:: ops.dim + 1]).real, t, sub_steps)
            values[idx] = np.real(proj @ state)
            t_prev = t
        return values

    try:
        values = propagate(1)
    except NumericalError as first_error:
        try:
            values = propagate(2)
        except NumericalError as second_error:
            raise NumericalError(
                f"regression propagation failed even with halved steps: "
                f"{first_error}; retry: {second_error}") from second_error
    return values / mean_n ** 2


def converged_steady_state(params: SystemParams, variant: str = "full_dispersive",
                           dim0: int = 30, tol: float = 1e-8,
                           dim_cap: int = DIM_CAP):
    """Auto-double the truncation until <n> is stationary to ``tol`` (relative).

    Returns (DensityMatrix, FockOperatorSet) at the converged dimension.
    """
    dim = max(3, dim0)
    ops = build_liouvillian(params, variant, dim)
    rho = steady_state_dm(ops)
    n_prev = float(np.trace(rho.matrix @ (ops.a.conj().T @ ops.a)).real)
    while dim < dim_cap:
        dim = min(2 * dim, dim_cap)
        ops_next = build_liouvillian(params, variant, dim)
        rho_next = steady_state_dm(ops_next)
        n_next = float(np.trace(rho_next.matrix @ (ops_next.a.conj().T @ ops_next.a)).real)
        if abs(n_next - n_prev) <= tol * max(abs(n_next), 1.0):
            return rho_next, ops_next
        ops, rho, n_prev = ops_next, rho_next, n_next
    raise NumericalError(
        f"<n> not converged to {tol:g} at the truncation cap dim={dim_cap}")
