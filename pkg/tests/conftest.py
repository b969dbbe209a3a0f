import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(rng, umax=0.2):
    """Positive populations near a random equilibrium."""
    from cskf.moments import equilibrium

    u = rng.uniform(-1, 1, 3)
    u *= umax * rng.random() / max(np.linalg.norm(u), 1e-12)
    rho = rng.uniform(0.8, 1.2)
    f = equilibrium(rho, u)[:, 0]
    return f * (1.0 + 0.05 * rng.standard_normal(27))
