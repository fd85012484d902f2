"""Trajectory simulation, metrics, Monte Carlo aggregation, and run outputs.

A trial is fully determined by ``(config, trial_index)``: all randomness is
keyed, so reruns are bit-identical and trials may execute on any number of
workers.  Aggregation always happens in trial-index order, making parallel
and serial runs emit identical bytes.

Divergence (non-finite state or objective) excludes the trial from the
aggregate and is reported, rather than aborting the whole run: the barrier
objective makes divergence pathological, but a misconfigured run must not
poison the statistics silently.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._version import __version__
from .config import ExperimentConfig
from .controllers import (
    BcLocalState,
    NonFiniteObjectiveError,
    bc_step,
    pbc_step,
)
from .objectives import make_objective_fn
from .state import SIGN_GENERATOR_ID, draw_block

LAW_BC = "bc"
LAW_PBC = "pbc"
LAW_PAIRED = "paired"


class DivergenceError(RuntimeError):
    def __init__(self, trial: int, step: int, reason: str):
        super().__init__(f"trial {trial} diverged at step {step}: {reason}")
        self.trial = trial
        self.step = step
        self.reason = reason


@dataclass
class TrialRecord:
    """Everything one seeded run produced."""

    law: str
    K: int
    master_seed: int
    trial: int
    n: int
    N: int
    states: np.ndarray  # (T+1, nN)
    inputs: np.ndarray  # (T, nN)
    j_trace: np.ndarray  # (T+1,)
    d_trace: np.ndarray  # (T+1,)

    @property
    def steps(self) -> int:
        return self.inputs.shape[0]


@dataclass
class SummaryStats:
    """Per-time-step mean and standard deviation across trials.

    The SD uses the unbiased (n-1) denominator and is defined as zero for a
    single trial.
    """

    j_mean: np.ndarray
    j_sd: np.ndarray
    d_mean: np.ndarray
    d_sd: np.ndarray
    trials: int


@dataclass
class MonteCarloResult:
    stats: Optional[SummaryStats]
    records: list
    excluded: list  # (trial_index, reason) pairs


SignStream = Callable[[int, int, int], "PerturbationBlock"]  # noqa: F821


def moving_distance(inputs: np.ndarray, n: int) -> np.ndarray:
    """Cumulative total path length: ``D(t) = sum_{s<t} sum_i |u_i(s)|``.

    ``D(0) = 0`` and the trace is non-decreasing.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.size == 0:
        return np.zeros(inputs.shape[0] + 1)
    steps = inputs.shape[0]
    per_agent = np.linalg.norm(inputs.reshape(steps, -1, n), axis=2)
    d = np.empty(steps + 1)
    d[0] = 0.0
    np.cumsum(per_agent.sum(axis=1), out=d[1:])
    return d


def _default_sign_stream(config: ExperimentConfig) -> SignStream:
    def stream(trial: int, t: int, K: int):
        return draw_block(config.master_seed, trial, t, config.n, config.N, K)

    return stream


def _horizon(config: ExperimentConfig, law: str) -> int:
    if law == LAW_BC and config.mode == "theorem":
        return 2 * config.steps
    return config.steps


def _simulate(
    config: ExperimentConfig,
    law: str,
    steps: int,
    trial_index: int,
    sign_stream: Optional[SignStream],
) -> TrialRecord:
    spec = config.objective_spec()
    J = make_objective_fn(spec)
    sched = config.schedule()
    x = config.initial_state()
    stream = sign_stream or _default_sign_stream(config)
    nN = x.nN

    states = np.empty((steps + 1, nN))
    inputs = np.empty((steps, nN))
    j_trace = np.empty(steps + 1)
    states[0] = x.values

    local = BcLocalState.initial(nN)
    t = 0
    try:
        for t in range(steps):
            jx = float(J(x.values))
            if not np.isfinite(jx):
                raise NonFiniteObjectiveError(f"objective evaluated to {jx!r}")
            j_trace[t] = jx
            if law == LAW_BC:
                block = stream(trial_index, t // 2, 1) if t % 2 == 0 else None
                x, local, u = bc_step(x, local, t, sched, block, J, j_x=jx)
            else:
                block = stream(trial_index, t, config.K)
                x, u = pbc_step(x, t, sched, block, J, j_x=jx)
            inputs[t] = u
            states[t + 1] = x.values
        j_final = float(J(x.values))
        if not np.isfinite(j_final):
            raise NonFiniteObjectiveError(f"objective evaluated to {j_final!r}")
        j_trace[steps] = j_final
    except (NonFiniteObjectiveError, ValueError) as err:
        raise DivergenceError(trial_index, t, str(err)) from err

    return TrialRecord(
        law=law,
        K=1 if law == LAW_BC else config.K,
        master_seed=config.master_seed,
        trial=trial_index,
        n=config.n,
        N=config.N,
        states=states,
        inputs=inputs,
        j_trace=j_trace,
        d_trace=moving_distance(inputs, config.n),
    )


def run_trial(
    config: ExperimentConfig,
    trial_index: int,
    sign_stream: Optional[SignStream] = None,
) -> TrialRecord:
    """Run one seeded trial of the configured law.

    Deterministic in ``(config, trial_index)``.  Raises ``DivergenceError``
    on non-finite state or objective.
    """
    config.validate()
    if config.law == LAW_PAIRED:
        raise ValueError("run_trial runs a single law; use run_paired for pairs")
    return _simulate(
        config, config.law, _horizon(config, config.law), trial_index, sign_stream
    )


def run_paired(config: ExperimentConfig, trial_index: int = 0):
    """Run both laws on the identical sign stream and stair-stepped gains.

    Requires ``K = 1`` (the pairing is defined for a single perturbation).
    In theorem mode the two-stage law runs ``2T`` steps against ``T``
    single-stage steps, aligning ``x_bc(2t)`` with ``x_pbc(t)``; in figure
    mode both run ``T`` steps for same-axis plots.

    Returns ``(record_bc, record_pbc)``.
    """
    config.validate()
    if config.K != 1:
        raise ValueError(f"paired runs require K = 1, got K = {config.K}")
    bc_steps = 2 * config.steps if config.mode == "theorem" else config.steps
    rec_bc = _simulate(config, LAW_BC, bc_steps, trial_index, None)
    rec_pbc = _simulate(config, LAW_PBC, config.steps, trial_index, None)
    return rec_bc, rec_pbc


def _aggregate(records: list) -> Optional[SummaryStats]:
    if not records:
        return None
    j = np.stack([r.j_trace for r in records])
    d = np.stack([r.d_trace for r in records])
    if len(records) == 1:
        j_sd = np.zeros(j.shape[1])
        d_sd = np.zeros(d.shape[1])
    else:
        j_sd = j.std(axis=0, ddof=1)
        d_sd = d.std(axis=0, ddof=1)
    return SummaryStats(
        j_mean=j.mean(axis=0),
        j_sd=j_sd,
        d_mean=d.mean(axis=0),
        d_sd=d_sd,
        trials=len(records),
    )


def _trial_job(args):
    config, trial_index = args
    try:
        return trial_index, run_trial(config, trial_index), None
    except DivergenceError as err:
        return trial_index, None, str(err)


def run_monte_carlo(
    config: ExperimentConfig,
    sign_stream: Optional[SignStream] = None,
    workers: Optional[int] = None,
) -> MonteCarloResult:
    """Run ``config.trials`` independent trials and aggregate their traces.

    Trials are independent work units; with ``workers > 1`` they execute in a
    process pool, and the aggregation is keyed by trial index so the result
    is identical at any worker count.  Diverged trials are excluded from the
    aggregate and reported in ``excluded``.
    """
    config.validate()
    workers = config.workers if workers is None else workers
    results: dict[int, TrialRecord] = {}
    excluded: list = []

    if workers > 1 and sign_stream is None:
        jobs = [(config, i) for i in range(config.trials)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, rec, err in pool.map(_trial_job, jobs, chunksize=8):
                if rec is not None:
                    results[idx] = rec
                else:
                    excluded.append((idx, err))
    else:
        for i in range(config.trials):
            try:
                results[i] = run_trial(config, i, sign_stream)
            except DivergenceError as err:
                excluded.append((i, str(err)))

    records = [results[i] for i in sorted(results)]
    excluded.sort(key=lambda pair: pair[0])
    return MonteCarloResult(
        stats=_aggregate(records), records=records, excluded=excluded
    )


# ---------------------------------------------------------------------------
# file outputs


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_summary_csv(path: str, stats: SummaryStats) -> None:
    lines = ["t,J_mean,J_sd,D_mean,D_sd"]
    for t in range(stats.j_mean.shape[0]):
        lines.append(
            f"{t},{_fmt(stats.j_mean[t])},{_fmt(stats.j_sd[t])},"
            f"{_fmt(stats.d_mean[t])},{_fmt(stats.d_sd[t])}"
        )
    _write_lines(path, lines)


def write_trajectory_csv(path: str, record: TrialRecord) -> None:
    header = "t,agent," + ",".join(f"x_{d + 1}" for d in range(record.n))
    lines = [header]
    for t in range(record.states.shape[0]):
        row = record.states[t].reshape(record.N, record.n)
        for i in range(record.N):
            coords = ",".join(_fmt(v) for v in row[i])
            lines.append(f"{t},{i},{coords}")
    _write_lines(path, lines)


def write_manifest(
    path: str,
    config: ExperimentConfig,
    excluded: list,
    trajectories_written: int,
    extra: Optional[dict] = None,
) -> None:
    """Echo every value that shaped the run.

    ``out_dir`` and ``workers`` are in the echo for completeness but do not
    affect output bytes; ``retain_trajectories`` selects which files exist,
    not their contents.
    """
    lines = ["# run manifest"]
    lines.extend(config.serialize().rstrip("\n").split("\n"))
    lines.append(f"generator = {SIGN_GENERATOR_ID}")
    lines.append(f"package_version = {__version__}")
    lines.append(f"excluded_trials = {len(excluded)}")
    for idx, reason in excluded:
        lines.append(f"excluded_trial_{idx} = {reason}")
    lines.append(f"trajectories_written = {trajectories_written}")
    for key in sorted(extra or {}):
        lines.append(f"{key} = {extra[key]}")
    _write_lines(path, lines)


def _write_lines(path: str, lines: list) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _should_retain(config: ExperimentConfig) -> bool:
    if config.retain_trajectories == "true":
        return True
    if config.retain_trajectories == "false":
        return False
    return config.trials <= 10


def run_and_write(config: ExperimentConfig) -> MonteCarloResult:
    """Execute ``config`` and emit ``summary.csv``, retained trajectories,
    and the ``manifest`` into ``config.out_dir``.

    Paired law writes the single-stage summary as ``summary.csv`` and the
    two-stage partner as ``summary_bc.csv``.
    """
    out = config.out_dir
    os.makedirs(out, exist_ok=True)
    retain = _should_retain(config)

    if config.law == LAW_PAIRED:
        recs_bc = []
        recs_pbc = []
        excluded: list = []
        for i in range(config.trials):
            try:
                rb, rp = run_paired(config, i)
                recs_bc.append(rb)
                recs_pbc.append(rp)
            except DivergenceError as err:
                excluded.append((i, str(err)))
        stats = _aggregate(recs_pbc)
        if stats is not None:
            write_summary_csv(os.path.join(out, "summary.csv"), stats)
        stats_bc = _aggregate(recs_bc)
        if stats_bc is not None:
            write_summary_csv(os.path.join(out, "summary_bc.csv"), stats_bc)
        written = 0
        if retain:
            for rec in recs_pbc:
                write_trajectory_csv(
                    os.path.join(out, f"trajectory_{rec.trial}.csv"), rec
                )
                written += 1
            for rec in recs_bc:
                write_trajectory_csv(
                    os.path.join(out, f"trajectory_bc_{rec.trial}.csv"), rec
                )
                written += 1
        write_manifest(
            os.path.join(out, "manifest"), config, excluded, written
        )
        return MonteCarloResult(stats=stats, records=recs_pbc, excluded=excluded)

    result = run_monte_carlo(config)
    if result.stats is not None:
        write_summary_csv(os.path.join(out, "summary.csv"), result.stats)
    written = 0
    if retain:
        for rec in result.records:
            write_trajectory_csv(os.path.join(out, f"trajectory_{rec.trial}.csv"), rec)
            written += 1
    write_manifest(os.path.join(out, "manifest"), config, result.excluded, written)
    return result
