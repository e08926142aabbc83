import math

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from optomech_bae import ProbeParams, SystemParams, bogolyubov

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def params():
    return SystemParams()


@pytest.fixture(scope="session")
def calG(params):
    return bogolyubov(params).calG


@pytest.fixture(scope="session")
def probe(calG):
    return ProbeParams(G_p=1e-3 * calG, G_q=1e-3 * calG)


@st.composite
def admissible_params(draw):
    """Sideband-resolved parameter sets with G_minus > G_plus."""
    kE = draw(st.floats(0.5, 0.95))
    g_minus = draw(st.floats(0.01, 0.08))
    return SystemParams(
        kappa_E=kE, kappa_I=1 - kE,
        gamma=10 ** draw(st.floats(-6, -4)),
        delta=draw(st.floats(0.05, 0.5)),
        G_minus=g_minus, G_plus=draw(st.floats(0.0, 0.95)) * g_minus,
        n_1=draw(st.floats(0, 20)), n_2=draw(st.floats(0, 20)),
        n_E=draw(st.floats(0, 1)), n_I=draw(st.floats(0, 1)),
    )


phases = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)
