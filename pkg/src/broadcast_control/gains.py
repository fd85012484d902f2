"""Power-law gain schedules and their validity conditions.

The step-size sequence ``a(t) = a0 / (t + t_v)**a_p`` and probe-radius
sequence ``c(t) = c0 / (t + t_v)**c_p`` drive both control laws.  A schedule
is valid when

    t_v > 0,    0 < a_p <= 1,    c_p > 0,
    2*a_p - 2*c_p > 1,    a_p + 2*c_p > 1,

which by the p-series criteria makes ``sum a(t)`` diverge while
``sum (a/c)**2`` and ``sum a*c**2`` converge, the decay rates the stochastic
gradient iteration needs.  The two-stage law consumes the same schedule
stair-stepped: steps ``2t`` and ``2t+1`` both use the single-stage gains at
``t``, so a pair of its steps matches one single-stage step.
"""

from __future__ import annotations

from dataclasses import dataclass


class InvalidScheduleError(ValueError):
    """Raised when a gain is requested from an invalid schedule."""


@dataclass(frozen=True)
class GainSchedule:
    a0: float
    a_p: float
    c0: float
    c_p: float
    t_v: float

    def violations(self) -> list[str]:
        """Return each violated validity condition, empty when valid."""
        out = []
        if not self.t_v > 0:
            out.append(f"t_v > 0 violated (t_v = {self.t_v:g})")
        if not (0 < self.a_p <= 1):
            out.append(f"0 < a_p <= 1 violated (a_p = {self.a_p:g})")
        if not self.c_p > 0:
            out.append(f"c_p > 0 violated (c_p = {self.c_p:g})")
        if not 2 * self.a_p - 2 * self.c_p > 1:
            out.append(
                "2*a_p - 2*c_p > 1 violated "
                f"(2*{self.a_p:g} - 2*{self.c_p:g} = {2 * self.a_p - 2 * self.c_p:g})"
            )
        if not self.a_p + 2 * self.c_p > 1:
            out.append(
                "a_p + 2*c_p > 1 violated "
                f"({self.a_p:g} + 2*{self.c_p:g} = {self.a_p + 2 * self.c_p:g})"
            )
        if not self.a0 > 0:
            out.append(f"a0 > 0 violated (a0 = {self.a0:g})")
        if not self.c0 > 0:
            out.append(f"c0 > 0 violated (c0 = {self.c0:g})")
        return out

    @property
    def is_valid(self) -> bool:
        return not self.violations()

    def _require_valid(self) -> None:
        bad = self.violations()
        if bad:
            raise InvalidScheduleError("; ".join(bad))


def validate_schedule(sched: GainSchedule) -> list[str]:
    """Diagnostic form of the validity check: list of violated conditions."""
    return sched.violations()


def gain_a(sched: GainSchedule, t: int) -> float:
    """Step size at step ``t``: strictly positive, strictly decreasing."""
    sched._require_valid()
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return sched.a0 / (t + sched.t_v) ** sched.a_p


def gain_c(sched: GainSchedule, t: int) -> float:
    """Probe radius at step ``t``: strictly positive, strictly decreasing."""
    sched._require_valid()
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return sched.c0 / (t + sched.t_v) ** sched.c_p


def bc_gains_at(sched: GainSchedule, t_bc: int) -> tuple[float, float]:
    """Stair-stepped gains for the two-stage law at its own step counter.

    Steps ``2t`` and ``2t+1`` share the single-stage gains at ``t``, so
    ``bc_gains_at(sched, 2*t) == (gain_a(sched, t), gain_c(sched, t))``
    exactly.
    """
    if t_bc < 0:
        raise ValueError(f"t_bc must be nonnegative, got {t_bc}")
    t = t_bc // 2
    return gain_a(sched, t), gain_c(sched, t)
