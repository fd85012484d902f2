"""The two control laws as pure step functions.

Both laws descend an objective ``J`` using randomized forward differences:
probe ``J`` at ``x + c*sigma`` for sign vectors ``sigma``, divide the change
by ``c``, and multiply element-wise by ``sigma`` again (each sign vector is
its own element-wise inverse).

BC, the baseline two-stage law, physically moves every agent by ``c*sigma``
on even steps and, on odd steps, cancels the probe while stepping along the
resulting gradient estimate.  PBC replaces the physical probe with ``K``
virtual perturbed states evaluated centrally; the supervisor broadcasts the
``K`` objective differences and each agent moves once per step, combining
them with its own private signs.

Local inputs are computed from the broadcast vector, the agent's own signs,
and the gains alone; no agent-to-agent information exists anywhere in these
functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gains import GainSchedule, bc_gains_at, gain_a, gain_c
from .state import CollectiveState, PerturbationBlock, apply_input


class NonFiniteObjectiveError(ValueError):
    """Objective returned NaN or infinity."""


def _checked_j(J, values: np.ndarray) -> float:
    v = float(J(values))
    if not np.isfinite(v):
        raise NonFiniteObjectiveError(f"objective evaluated to {v!r}")
    return v


def _estimate_term(a: float, delta_j: float, c: float, sigma: np.ndarray) -> np.ndarray:
    # -a * (delta_j / c) * sigma, with a fixed association shared by both laws
    # so that paired runs agree bit-for-bit wherever the algebra does.
    return (-a) * ((delta_j / c) * sigma)


@dataclass
class BcLocalState:
    """Per-run memory of the two-stage law.

    ``phi1`` holds the sign vector of the preceding even step, ``phi2`` the
    objective value broadcast at that step, and ``parity`` the step parity
    expected next (0 = even).  The zero initialization is inert: the first
    even step never reads it.
    """

    phi1: np.ndarray
    phi2: float
    parity: int = 0

    @classmethod
    def initial(cls, nN: int) -> "BcLocalState":
        return cls(phi1=np.zeros(nN), phi2=0.0, parity=0)


def bc_step(
    x: CollectiveState,
    local: BcLocalState,
    t: int,
    sched: GainSchedule,
    sigma_block: PerturbationBlock | None,
    J,
    j_x: float | None = None,
):
    """One step of the two-stage law.  Returns ``(x', local', u)``.

    Even ``t``: every agent takes the random probe ``u = c*sigma`` (slice
    ``k=0`` of the block) and remembers ``(sigma, J(x))``.  Odd ``t``: the
    probe is cancelled and the remembered objective difference, scaled by
    ``a/c`` and the remembered signs, is descended:

        u = -c*phi1 - a * (J(x) - phi2)/c * phi1

    ``j_x`` may carry a precomputed ``J(x.values)`` so a caller tracing the
    objective costs one evaluation per step.
    """
    if t % 2 != local.parity:
        raise ValueError(f"step {t} does not match controller parity {local.parity}")
    a, c = bc_gains_at(sched, t)
    nu = _checked_j(J, x.values) if j_x is None else float(j_x)
    if t % 2 == 0:
        if sigma_block is None:
            raise ValueError("even steps require a perturbation block")
        sigma = sigma_block.signs[0]
        u = c * sigma
        local2 = BcLocalState(phi1=sigma, phi2=nu, parity=1)
    else:
        u = (-c) * local.phi1 + _estimate_term(a, nu - local.phi2, c, local.phi1)
        local2 = BcLocalState(phi1=local.phi1, phi2=nu, parity=0)
    return apply_input(x, u), local2, u


@dataclass
class PbcBroadcast:
    """The broadcast payload: one objective difference per virtual probe."""

    nu: np.ndarray

    def __post_init__(self) -> None:
        nu = np.asarray(self.nu, dtype=np.float64)
        if nu.ndim != 1:
            raise ValueError("broadcast payload must be a flat vector")
        if not np.all(np.isfinite(nu)):
            raise NonFiniteObjectiveError("broadcast contains non-finite entries")
        self.nu = nu

    @property
    def K(self) -> int:
        return self.nu.shape[0]


def pbc_broadcast(
    x: CollectiveState,
    block: PerturbationBlock,
    c: float,
    J,
    j_x: float | None = None,
) -> PbcBroadcast:
    """Evaluate the K virtual probes: ``nu[k] = J(x + c*sigma_k) - J(x)``.

    Exactly ``K + 1`` objective evaluations (``K`` when ``j_x`` is supplied).
    The virtual states are local temporaries; agents never visit them.
    """
    if not c > 0:
        raise ValueError(f"probe radius must be positive, got {c}")
    base = _checked_j(J, x.values) if j_x is None else float(j_x)
    nu = np.empty(block.K)
    for k in range(block.K):
        u_hat = c * block.signs[k]
        nu[k] = _checked_j(J, x.values + u_hat) - base
    return PbcBroadcast(nu=nu)


def pbc_local_input(
    nu: PbcBroadcast, block: PerturbationBlock, a: float, c: float
) -> np.ndarray:
    """Combine the broadcast with the agent's own signs:

        u = -a * (1/K) * sum_k (nu[k]/c) * sigma_k
    """
    if not (a > 0 and c > 0):
        raise ValueError(f"gains must be positive, got a={a}, c={c}")
    if nu.K != block.K:
        raise ValueError(f"broadcast K={nu.K} does not match block K={block.K}")
    acc = _estimate_term(a, nu.nu[0], c, block.signs[0])
    for k in range(1, block.K):
        acc += _estimate_term(a, nu.nu[k], c, block.signs[k])
    return acc / block.K


def pbc_step(
    x: CollectiveState,
    t: int,
    sched: GainSchedule,
    block: PerturbationBlock,
    J,
    j_x: float | None = None,
):
    """One step of the virtual-perturbation law.  Returns ``(x', u)``.

    Single-stage: broadcast the K probe differences, form the local input,
    and move once.
    """
    a, c = gain_a(sched, t), gain_c(sched, t)
    nu = pbc_broadcast(x, block, c, J, j_x=j_x)
    u = pbc_local_input(nu, block, a, c)
    return apply_input(x, u), u
