import numpy as np
import pytest

from nonholo import systems
from nonholo.integrate import lift
from nonholo.model import forces_at


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=systems.names())
def builtin(request):
    return systems.get(request.param)


def random_force_system(name, rng):
    """Builtin system with constant random forces in [-2, 2]."""
    n = systems.get(name).n
    return systems.get(name, forces=rng.uniform(-2.0, 2.0, n))


def state_pair(b, s):
    vs = lift(b.parametric, s)
    return vs, forces_at(b.spec, vs.q, vs.qdot)


def rel_err(got, ref):
    got = np.asarray(got, dtype=float)
    ref = np.asarray(ref, dtype=float)
    return float(np.linalg.norm(got - ref) / max(1.0, np.linalg.norm(ref)))
