import pytest

from kerrqed import SystemParams


@pytest.fixture
def fig2_params():
    """Strong-coupling working point: g/2pi=200 MHz, Delta/2pi=1 GHz, kappa/2pi=0.1 MHz."""
    return SystemParams.from_mhz(g_mhz=200.0, delta_mhz=1000.0, kappa_mhz=0.1)


@pytest.fixture
def fig3c_params():
    """Weak-drive scan point: g/2pi=100 MHz, |Omega|/2pi=0.01 MHz."""
    return SystemParams.from_mhz(g_mhz=100.0, delta_mhz=1000.0, kappa_mhz=0.1,
                                 omega_mhz=0.01)


@pytest.fixture
def fig4_params():
    """Probe-response working point: g/2pi=100 MHz, |Omega|/2pi=0.1 MHz."""
    return SystemParams.from_mhz(g_mhz=100.0, delta_mhz=1000.0, kappa_mhz=0.1,
                                 omega_mhz=0.1)
