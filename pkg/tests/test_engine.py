import math

import numpy as np
import pytest

import broadcast_control.engine as engine_mod
from broadcast_control import (
    ExperimentConfig,
    draw_block,
    gain_c,
    moving_distance,
    run_monte_carlo,
    run_paired,
    run_trial,
)


def small_config(**kw) -> ExperimentConfig:
    base = dict(task="rendezvous", law="pbc", K=1, N=4, n=2, steps=20, trials=3,
                master_seed=7, formation_count=4)
    base.update(kw)
    return ExperimentConfig(**base).validate()


def test_moving_distance_examples():
    d = moving_distance(np.array([[3.0, 4.0]]), n=2)
    assert np.array_equal(d, [0.0, 5.0])
    d = moving_distance(np.zeros((4, 6)), n=2)
    assert np.array_equal(d, np.zeros(5))
    assert moving_distance(np.zeros((0, 4)), n=2).tolist() == [0.0]


def test_moving_distance_non_decreasing(rng):
    d = moving_distance(rng.normal(size=(30, 8)), n=2)
    assert np.all(np.diff(d) >= 0)
    assert d[0] == 0.0


def test_bc_even_step_distance_increment():
    # the even probe moves every agent by c*sigma, adding sqrt(n)*N*c
    config = small_config(law="bc", steps=2)
    rec = run_trial(config, 0)
    c0 = gain_c(config.schedule(), 0)
    expected = math.sqrt(config.n) * config.N * c0
    assert rec.d_trace[1] - rec.d_trace[0] == pytest.approx(expected, rel=1e-12)


def test_run_trial_bit_identical():
    config = small_config()
    a = run_trial(config, 1)
    b = run_trial(config, 1)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.inputs, b.inputs)
    assert np.array_equal(a.j_trace, b.j_trace)
    assert np.array_equal(a.d_trace, b.d_trace)


def test_run_trial_zero_steps():
    rec = run_trial(small_config(steps=0), 0)
    assert rec.states.shape[0] == 1
    assert rec.d_trace.tolist() == [0.0]
    assert rec.inputs.shape == (0, 8)


def test_trials_differ():
    config = small_config()
    a = run_trial(config, 0)
    b = run_trial(config, 1)
    assert not np.array_equal(a.states, b.states)


def test_states_match_inputs_exactly():
    rec = run_trial(small_config(), 0)
    for t in range(rec.steps):
        assert np.array_equal(rec.states[t + 1], rec.states[t] + rec.inputs[t])


def test_objective_evaluation_counts(monkeypatch):
    # one evaluation per state per step: K+1 for the virtual law (plus the
    # final trace point), one per step for the two-stage law
    counts = {"n": 0}
    original = engine_mod.make_objective_fn

    def counting(spec):
        J = original(spec)

        def wrapped(values):
            counts["n"] += 1
            return J(values)

        return wrapped

    monkeypatch.setattr(engine_mod, "make_objective_fn", counting)
    config = small_config(K=3, steps=10)
    run_trial(config, 0)
    assert counts["n"] == 10 * (3 + 1) + 1
    counts["n"] = 0
    run_trial(small_config(law="bc", steps=10), 0)
    assert counts["n"] == 10 + 1


def test_run_paired_shares_initial_state_and_signs():
    config = small_config(law="paired", mode="theorem", steps=10)
    rec_bc, rec_pbc = run_paired(config, 0)
    assert np.array_equal(rec_bc.states[0], rec_pbc.states[0])
    assert rec_bc.steps == 20
    assert rec_pbc.steps == 10
    # even-step probe inputs equal c * (shared k=0 slice)
    sched = config.schedule()
    for tau in range(10):
        sigma = draw_block(config.master_seed, 0, tau, config.n, config.N, 1).signs[0]
        np.testing.assert_array_equal(
            rec_bc.inputs[2 * tau], gain_c(sched, tau) * sigma
        )


def test_run_paired_requires_k1():
    with pytest.raises(ValueError):
        run_paired(small_config(law="pbc", K=2), 0)


def test_run_paired_figure_mode_same_horizon():
    rec_bc, rec_pbc = run_paired(small_config(law="paired", mode="figure", steps=12), 0)
    assert rec_bc.steps == 12
    assert rec_pbc.steps == 12


def test_twice_speed_small():
    config = small_config(law="paired", mode="theorem", steps=30)
    rec_bc, rec_pbc = run_paired(config, 0)
    dev = np.abs(rec_pbc.states - rec_bc.states[0:61:2]).max()
    assert dev <= 1e-9


def test_single_trial_sd_zero():
    res = run_monte_carlo(small_config(trials=1))
    assert np.array_equal(res.stats.j_sd, np.zeros_like(res.stats.j_sd))
    assert np.array_equal(res.stats.d_sd, np.zeros_like(res.stats.d_sd))
    assert res.stats.trials == 1


def test_forced_identical_randomness_gives_sd_zero():
    # a sign stream that ignores the trial index makes trials degenerate
    config = small_config(trials=2)
    stream = lambda trial, t, K: draw_block(99, 0, t, config.n, config.N, K)
    res = run_monte_carlo(config, sign_stream=stream)
    assert np.allclose(res.stats.j_sd, 0.0, atol=0.0)
    assert np.allclose(res.stats.d_sd, 0.0, atol=0.0)


def test_sd_uses_unbiased_denominator():
    config = small_config(trials=3)
    res = run_monte_carlo(config)
    j = np.stack([r.j_trace for r in res.records])
    assert np.allclose(res.stats.j_sd, j.std(axis=0, ddof=1))


def test_divergent_trial_excluded_not_fatal():
    # a state far outside the float-safe range overflows the quadratic
    # objective to infinity on the first evaluation
    config = ExperimentConfig(
        task="quadratic", law="pbc", N=4, n=2, steps=5, trials=2,
        master_seed=3, x0=(1e200,) * 8,
    ).validate()
    res = run_monte_carlo(config)
    assert len(res.excluded) == 2
    assert res.stats is None
    for idx, reason in res.excluded:
        assert "diverged" in reason


def test_workers_do_not_change_results():
    config = small_config(trials=6, steps=10)
    serial = run_monte_carlo(config, workers=1)
    parallel = run_monte_carlo(config, workers=3)
    assert serial.stats.trials == parallel.stats.trials == 6
    assert np.array_equal(serial.stats.j_mean, parallel.stats.j_mean)
    assert np.array_equal(serial.stats.j_sd, parallel.stats.j_sd)
    assert np.array_equal(serial.stats.d_mean, parallel.stats.d_mean)
    for a, b in zip(serial.records, parallel.records):
        assert np.array_equal(a.states, b.states)


def test_run_trial_rejects_paired_and_invalid():
    with pytest.raises(ValueError):
        run_trial(small_config(law="paired"), 0)
    from broadcast_control import ConfigError

    with pytest.raises(ConfigError):
        run_trial(ExperimentConfig(task="nope"), 0)
