"""Dispersive circuit-QED Kerr cavity simulator.

Covers the full analysis chain of a strongly dispersive qubit-cavity
system at desk scale: Kerr spectrum and photon staircase, semiclassical
bistability and hysteresis, linearized fluctuation statistics g2(tau),
probe transparency spectra, and an exact master-equation oracle.
"""

__version__ = "0.1.0"

from .model import (
    MHZ,
    RegimeReport,
    SystemParams,
    drive_resonance_shift,
    excitation_energy,
    from_mhz,
    kerr_strength,
    params_from_json,
    params_to_json,
    rescaled_detuning,
    to_mhz,
    upper_bound_photons,
    validate_regime,
)
from .fock_spectrum import (
    EigenSystem,
    TruncatedKerrHamiltonian,
    avoided_crossing_two_level,
    build_hamiltonian,
    eigensystem,
    ground_state_mean_photon,
    staircase_curve,
)
from .steady_state import (
    BistabilityWindow,
    HysteresisSweep,
    OmegaScan,
    SteadyStateRoot,
    amplitude_from_number,
    bistability_window,
    classify_stability,
    hysteresis_sweep,
    photon_number_roots,
    steady_state_roots,
)
from .fluctuations import (
    CorrelationSet,
    LinearizedCoefficients,
    fluctuation_transfer,
    g2,
    g2_zero,
    g2_zero_scan,
    linearize,
    stationary_correlators,
)
from .io_response import ResponseSpectrum, classify_lineshape, response_spectrum
from .lindblad_oracle import (
    DensityMatrix,
    FockOperatorSet,
    build_liouvillian,
    converged_steady_state,
    g2_tau_regression,
    observables,
    steady_state_dm,
)

__all__ = [name for name in dir() if not name.startswith("_")]
