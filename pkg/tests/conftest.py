import numpy as np
import pytest

from broadcast_control import CollectiveState, GainSchedule


def unit_sched(a: float, c: float) -> GainSchedule:
    """Valid schedule whose gains at t=0 are exactly (a, c).

    With t_v = 1 the power terms are 1**p = 1, so a(0) = a0 and c(0) = c0
    exactly; the exponents satisfy the validity conditions.
    """
    return GainSchedule(a0=a, a_p=1.0, c0=c, c_p=0.2, t_v=1.0)


def scalar_state(*values: float) -> CollectiveState:
    return CollectiveState(n=1, N=len(values), values=np.asarray(values, dtype=float))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
