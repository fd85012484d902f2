"""Exact verifiers for the estimator identities and the paired-law claims.

Everything here is brute force on purpose: expectations over sign vectors
are computed by full enumeration of the outcome space (capped so checks stay
exact and fast), gradients are cross-checked by central differences, and the
paired-run claims are measured directly on trajectories.  None of these code
paths share arithmetic with the controllers they certify.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .engine import TrialRecord
from .gains import GainSchedule, bc_gains_at

ENUMERATION_CAP = 22  # outcome space 2**(nN*K); beyond this we refuse, never sample
_CHUNK = 1 << 16


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class EnumerationDomain:
    """Size guard for exact enumeration over sign assignments."""

    nN: int
    K: int

    def __post_init__(self) -> None:
        if self.nN < 1 or self.K < 1:
            raise ValueError("nN and K must be positive")
        if self.nN * self.K > ENUMERATION_CAP:
            raise EnumerationTooLarge(
                f"enumeration over 2**{self.nN * self.K} outcomes exceeds the "
                f"cap of 2**{ENUMERATION_CAP}; this oracle never falls back to sampling"
            )

    @property
    def outcomes(self) -> int:
        return 1 << (self.nN * self.K)


def enumerate_signs(d: int) -> np.ndarray:
    """All 2**d sign vectors as a (2**d, d) array.

    Row ``m`` reads the bits of ``m`` most-significant-first: bit set gives
    +1.  The order is fixed so enumerated reductions are deterministic.
    """
    m = np.arange(1 << d, dtype=np.int64)
    bits = (m[:, None] >> np.arange(d - 1, -1, -1)[None, :]) & 1
    return np.where(bits == 1, 1.0, -1.0)


def spsa_estimate(x: np.ndarray, sigma: np.ndarray, c: float, J) -> np.ndarray:
    """Single-probe gradient estimate ``(J(x + c*sigma) - J(x))/c * sigma``."""
    x = np.asarray(x, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if not c > 0:
        raise ValueError(f"probe radius must be positive, got {c}")
    if not np.all(np.abs(sigma) == 1.0):
        raise ValueError("sigma entries must be exactly -1 or +1")
    return ((float(J(x + c * sigma)) - float(J(x))) / c) * sigma


def _all_estimates(x: np.ndarray, c: float, J) -> np.ndarray:
    """Gradient estimates for every sign vector: (2**d, d)."""
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[0]
    signs = enumerate_signs(d)
    base = float(J(x))
    g = np.empty_like(signs)
    for m in range(signs.shape[0]):
        g[m] = ((float(J(x + c * signs[m])) - base) / c) * signs[m]
    return g


def enumerate_expected_gradient(x: np.ndarray, c: float, K: int, J) -> np.ndarray:
    """Exact expectation of the K-probe mean estimate over all sign draws.

    The mean of ``(1/K) sum_k g(sigma_k)`` over the full product space
    collapses, term by term, to the mean of ``g`` over the 2**d single-probe
    outcomes, so that smaller sum is what gets computed (it is the same
    number with less floating-point work).
    """
    x = np.asarray(x, dtype=np.float64)
    EnumerationDomain(nN=x.shape[0], K=K)
    return _all_estimates(x, c, J).mean(axis=0)


def finite_difference_gradient(J, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient, coordinate by coordinate."""
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (float(J(x + e)) - float(J(x - e))) / (2.0 * h)
    return grad


def _iter_mean_estimates(x: np.ndarray, c: float, K: int, J):
    """Yield chunks of the K-probe mean estimate, one row per outcome of the
    full 2**(d*K) product space, in fixed mixed-radix order."""
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[0]
    dom = EnumerationDomain(nN=d, K=K)
    g = _all_estimates(x, c, J)
    base = 1 << d
    total = dom.outcomes
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        idx = np.empty((codes.shape[0], K), dtype=np.int64)
        rem = codes
        for k in range(K - 1, -1, -1):
            idx[:, k] = rem % base
            rem = rem // base
        yield g[idx].mean(axis=1)


def enumerate_estimator_variance(x: np.ndarray, c: float, K: int, J) -> np.ndarray:
    """Componentwise variance of the K-probe mean estimate, enumerated over
    the full product space (this is the honest route; no 1/K shortcut)."""
    acc = None
    acc2 = None
    count = 0
    for chunk in _iter_mean_estimates(x, c, K, J):
        s = chunk.sum(axis=0)
        s2 = (chunk * chunk).sum(axis=0)
        acc = s if acc is None else acc + s
        acc2 = s2 if acc2 is None else acc2 + s2
        count += chunk.shape[0]
    mean = acc / count
    return acc2 / count - mean * mean


def expected_next_cost(x: np.ndarray, a: float, c: float, K: int, J) -> float:
    """Exact ``E[J(x - a * mean_k g(sigma_k))]`` by full enumeration."""
    x = np.asarray(x, dtype=np.float64)
    total = 0.0
    count = 0
    for chunk in _iter_mean_estimates(x, c, K, J):
        nxt = x[None, :] - a * chunk
        total += sum(float(J(nxt[m])) for m in range(nxt.shape[0]))
        count += chunk.shape[0]
    return total / count


def expected_distance_power(
    x: np.ndarray, a: float, c: float, K: int, kappa: float, J, n: int = 1
) -> float:
    """Exact ``E[sum_i |u_i|**kappa]`` of the per-step move, by enumeration.

    ``n`` is the per-agent dimension used to slice the flat input.
    """
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] % n != 0:
        raise ValueError(f"state length {x.shape[0]} is not a multiple of n={n}")
    total = 0.0
    count = 0
    for chunk in _iter_mean_estimates(x, c, K, J):
        u = -a * chunk
        per_agent = np.linalg.norm(u.reshape(u.shape[0], -1, n), axis=2)
        total += float((per_agent**kappa).sum())
        count += chunk.shape[0]
    return total / count


# ---------------------------------------------------------------------------
# paired-run checks


@dataclass
class TwiceSpeedReport:
    """Deviation between the single-stage run at t and the two-stage run at 2t."""

    max_state_deviation: float
    max_objective_deviation: float  # relative: |dJ| / (1 + J)
    steps_compared: int


def check_twice_speed(rec_bc: TrialRecord, rec_pbc: TrialRecord) -> TwiceSpeedReport:
    """Measure ``sup_t |x_pbc(t) - x_bc(2t)|_inf`` and the matching
    objective deviation over the paired horizon."""
    T = rec_pbc.steps
    if rec_bc.steps < 2 * T:
        raise ValueError(
            f"two-stage record holds {rec_bc.steps} steps, need {2 * T} for pairing"
        )
    x_bc = rec_bc.states[0 : 2 * T + 1 : 2]
    dev = np.abs(rec_pbc.states - x_bc).max()
    j_bc = rec_bc.j_trace[0 : 2 * T + 1 : 2]
    j_dev = (np.abs(rec_pbc.j_trace - j_bc) / (1.0 + rec_pbc.j_trace)).max()
    return TwiceSpeedReport(
        max_state_deviation=float(dev),
        max_objective_deviation=float(j_dev),
        steps_compared=T,
    )


@dataclass
class DistanceDominanceReport:
    min_margin: float
    margins: np.ndarray  # D_bc(2t) - D_pbc(t), t = 0..T
    final_margin: float
    expected_bound: Optional[np.ndarray]  # sqrt(n)*N*sum c(2tau), if convex declared


def check_distance_dominance(
    rec_bc: TrialRecord,
    rec_pbc: TrialRecord,
    sched: Optional[GainSchedule] = None,
    convexity_declared: bool = False,
) -> DistanceDominanceReport:
    """Path-wise distance comparison ``D_bc(2t) - D_pbc(t)`` over the pair.

    When the caller declares the objective (quasi-)convex along the run, the
    statistical lower bound ``sqrt(n) * N * sum_{tau<t} c(2*tau)`` on the
    expected margin is evaluated for reporting (it applies to the mean over
    sample paths, not to each path).
    """
    T = rec_pbc.steps
    if rec_bc.steps < 2 * T:
        raise ValueError(
            f"two-stage record holds {rec_bc.steps} steps, need {2 * T} for pairing"
        )
    margins = rec_bc.d_trace[0 : 2 * T + 1 : 2] - rec_pbc.d_trace
    bound = None
    if convexity_declared:
        if sched is None:
            raise ValueError("the expected-margin bound needs the gain schedule")
        c_even = np.array([bc_gains_at(sched, 2 * tau)[1] for tau in range(T)])
        bound = np.concatenate([[0.0], np.sqrt(rec_pbc.n) * rec_pbc.N * np.cumsum(c_even)])
    return DistanceDominanceReport(
        min_margin=float(margins.min()),
        margins=margins,
        final_margin=float(margins[-1]),
        expected_bound=bound,
    )


# ---------------------------------------------------------------------------
# probe-count ordering


@dataclass
class KMonotonicityReport:
    K_list: tuple
    cost_values: tuple
    distance_values: dict  # kappa -> tuple of values
    direction: Optional[str]  # "convex", "concave", or None (raw report)
    verdict: Optional[bool]


def check_k_monotonicity(
    x: np.ndarray,
    a: float,
    c: float,
    K_list,
    J,
    direction: Optional[str] = None,
    kappas=(1.0, 2.0),
    n: int = 1,
) -> KMonotonicityReport:
    """Enumerate expected next cost and per-step distance powers across probe
    counts.

    With ``direction='convex'`` the verdict asserts the expected cost is
    non-increasing in K; ``'concave'`` asserts the reversed ordering; with no
    declared direction only the raw values are reported (the per-step cost
    ordering is a convexity statement).  Distance powers must be
    non-increasing in K regardless of direction and are folded into the
    verdict whenever one is issued.
    """
    K_list = tuple(int(k) for k in K_list)
    costs = tuple(expected_next_cost(x, a, c, k, J) for k in K_list)
    dists = {
        float(kappa): tuple(
            expected_distance_power(x, a, c, k, kappa, J, n=n) for k in K_list
        )
        for kappa in kappas
    }
    verdict: Optional[bool] = None
    if direction is not None:
        if direction not in ("convex", "concave"):
            raise ValueError(f"direction must be 'convex' or 'concave', got {direction!r}")
        pairs = list(zip(K_list, costs))
        pairs.sort(key=lambda kv: kv[0])
        ordered = [v for _, v in pairs]
        tol = 1e-12
        if direction == "convex":
            ok = all(b <= a_ + tol * (1 + abs(a_)) for a_, b in zip(ordered, ordered[1:]))
        else:
            ok = all(b >= a_ - tol * (1 + abs(a_)) for a_, b in zip(ordered, ordered[1:]))
        for vals in dists.values():
            dv = [v for _, v in sorted(zip(K_list, vals), key=lambda kv: kv[0])]
            ok = ok and all(
                b <= a_ + tol * (1 + abs(a_)) for a_, b in zip(dv, dv[1:])
            )
        verdict = ok
    return KMonotonicityReport(
        K_list=K_list,
        cost_values=costs,
        distance_values=dists,
        direction=direction,
        verdict=verdict,
    )


def random_spd_matrix(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    """Well-conditioned random symmetric positive-definite matrix."""
    A = rng.standard_normal((d, d)) / np.sqrt(d)
    H = A @ A.T + 0.5 * np.eye(d)
    return scale * 0.5 * (H + H.T)


def descent_fraction(j_traces: np.ndarray, window: int = 50) -> float:
    """Fraction of trials whose trailing-window mean objective sits below the
    leading-window mean (the empirical convergence corollary)."""
    j = np.atleast_2d(np.asarray(j_traces, dtype=np.float64))
    if j.shape[1] < 2 * window:
        raise ValueError(
            f"traces of length {j.shape[1]} cannot fit two windows of {window}"
        )
    leading = j[:, :window].mean(axis=1)
    trailing = j[:, -window:].mean(axis=1)
    return float((trailing < leading).mean())
