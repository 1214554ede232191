"""Tests for ladder construction and the tempering chain's two move types."""
import math

import numpy as np
import pytest
from scipy.stats import chi2_contingency

from stlmc import (
    GaussianMixture,
    RetriesExhaustedError,
    RunParams,
    TemperatureLadder,
    TemperingState,
    log_partition_quadrature,
    make_ladder,
    run_stlmc,
    run_tempering_batch,
    tempering_step,
    type2_accept_prob,
    write_trace_csv,
)
from stlmc.tempering_chain import merge_batch_stats, new_batch_stats


def test_make_ladder_desk_closed_form(desk):
    ladder = make_ladder(desk)
    assert ladder.L == 15
    assert ladder.betas[0] == pytest.approx(1.0 / 9.0, rel=1e-12)
    spacing = 1.0 / (9.0 * (1.0 + math.log(2.0)))
    np.testing.assert_allclose(np.diff(ladder.betas)[:-1], spacing, rtol=1e-12)
    assert ladder.betas[-1] == 1.0
    np.testing.assert_allclose(ladder.rel_weights, 1.0 / 15.0)
    assert ladder.r == 1.0


def test_make_ladder_centered_target_is_single_level():
    single = GaussianMixture([1.0], [[0.0, 0.0]], 1.0)
    ladder = make_ladder(single)
    assert ladder.L == 1
    np.testing.assert_allclose(ladder.betas, [1.0])


def test_make_ladder_invariants_random_mixtures():
    rng = np.random.default_rng(12)
    for _ in range(30):
        k = int(rng.integers(1, 4))
        d = int(rng.integers(1, 3))
        w = rng.dirichlet(np.ones(k))
        w = np.clip(w, 1e-3, None)
        w = w / w.sum()
        mix = GaussianMixture(w, rng.uniform(-3, 3, size=(k, d)),
                              float(rng.uniform(0.5, 2.0)))
        c1 = float(rng.uniform(0.5, 2.0))
        c2 = float(rng.uniform(0.5, 2.0))
        ladder = make_ladder(mix, c1, c2)
        b = ladder.betas
        assert b[-1] == 1.0
        assert np.all(np.diff(b) > 0)
        if mix.D > 0:
            assert b[0] <= c1 * mix.sigma2 / mix.D**2 + 1e-15
            cap = c2 * mix.sigma2 / (mix.D**2 * (mix.d + math.log(1.0 / mix.w_min)))
            assert np.all(np.diff(b) <= cap + 1e-15)
        assert ladder.rel_weights.sum() == pytest.approx(1.0)


def test_ladder_validation():
    with pytest.raises(ValueError):
        TemperatureLadder(np.array([0.5, 0.4, 1.0]), np.full(3, 1 / 3))
    with pytest.raises(ValueError):
        TemperatureLadder(np.array([0.5, 0.9]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        TemperatureLadder(np.array([0.5, 1.0]), np.array([0.7, 0.7]))
    with pytest.raises(ValueError):
        TemperatureLadder(np.array([0.5, 1.0]), np.array([0.5, 0.5]),
                          proposal_mode="sideways")


def test_type2_accept_prob_values():
    ladder = TemperatureLadder(np.array([0.5, 1.0]), np.array([0.5, 0.5]))
    assert type2_accept_prob(3.7, 1, 1, ladder, np.zeros(2)) == 1.0
    assert type2_accept_prob(0.0, 1, 2, ladder, np.zeros(2)) == 1.0
    assert type2_accept_prob(2.0, 1, 2, ladder, np.zeros(2)) == pytest.approx(
        math.exp(-1.0), rel=1e-12
    )
    # moving toward a flatter level is always accepted
    assert type2_accept_prob(2.0, 2, 1, ladder, np.zeros(2)) == 1.0


def test_type2_detailed_balance_ratio():
    # min(1, e^a) / min(1, e^-a) = e^a for every a, which is exactly the
    # flow-balance identity for the level move at fixed x
    betas = np.array([0.2, 0.55, 1.0])
    ladder = TemperatureLadder(betas, np.full(3, 1 / 3))
    lz = np.array([0.0, -0.8, -1.3])
    rng = np.random.default_rng(3)
    for _ in range(50):
        f_x = float(rng.uniform(0.0, 8.0))
        k, kp = rng.choice([1, 2, 3], size=2, replace=False)
        fwd = type2_accept_prob(f_x, int(k), int(kp), ladder, lz)
        bwd = type2_accept_prob(f_x, int(kp), int(k), ladder, lz)
        log_flow = (betas[k - 1] - betas[kp - 1]) * f_x + lz[k - 1] - lz[kp - 1]
        assert math.log(fwd) - math.log(bwd) == pytest.approx(log_flow, abs=1e-10)


def test_tempering_step_single_level_is_pure_langevin():
    single = GaussianMixture([1.0], [[0.0]], 1.0)
    ladder = TemperatureLadder(np.array([1.0]), np.array([1.0]))
    params = RunParams(eta=0.1, T=0.5, t=1)
    rng = np.random.default_rng(0)
    state = TemperingState(np.array([2.0]), 1)
    moved = 0
    for _ in range(40):
        state = tempering_step(state, single, ladder, np.zeros(1), params, rng)
        assert state.level == 1
        moved += int(state.x[0] != 2.0)
    assert moved > 0


def test_level_flip_rate_with_frozen_point():
    # with x pinned near a zero-energy point every proposed flip is
    # accepted, so the two-level neighbor chain flips with probability
    # 1/2 (type-2 coin) * 1/2 (direction) = 1/4
    single = GaussianMixture([1.0], [[0.0]], 1.0)
    ladder = TemperatureLadder(np.array([0.5, 1.0]), np.array([0.5, 0.5]))
    params = RunParams(eta=1e-8, T=1e-7, t=1)
    rng = np.random.default_rng(2)
    state = TemperingState(np.zeros(1), 1)
    flips = 0
    n_steps = 4000
    for _ in range(n_steps):
        new = tempering_step(state, single, ladder, np.zeros(2), params, rng)
        flips += int(new.level != state.level)
        state = new
    se = math.sqrt(0.25 * 0.75 / n_steps)
    assert abs(flips / n_steps - 0.25) <= 3.0 * se + 1e-3


def test_run_stlmc_single_level_returns_immediately():
    single = GaussianMixture([1.0], [[0.0]], 1.0)
    ladder = TemperatureLadder(np.array([1.0]), np.array([1.0]))
    params = RunParams(eta=0.1, T=0.5, t=25)
    x, trace = run_stlmc(single, ladder, np.zeros(1), params, np.random.default_rng(1))
    assert x.shape == (1,)
    assert len(trace) == 25
    steps, levels, move_types, accepted = zip(*[row[:4] for row in trace])
    assert steps == tuple(range(1, 26))
    assert set(levels) == {1}
    assert set(move_types) <= {1, 2}


def test_run_stlmc_retries_exhausted():
    desk = GaussianMixture([0.5, 0.5], [[-3.0], [3.0]], 1.0)
    ladder = TemperatureLadder(np.array([1.0 / 9.0, 1.0]), np.array([0.5, 0.5]))
    # a wildly wrong normalizer estimate suppresses moves to the top level
    lz = np.array([0.0, 60.0])
    params = RunParams(eta=0.1, T=0.5, t=10, max_retries=4)
    with pytest.raises(RetriesExhaustedError) as exc:
        run_stlmc(desk, ladder, lz, params, np.random.default_rng(0))
    assert exc.value.attempts == 4
    assert exc.value.final_levels == {1: 4}


def test_run_stlmc_validates_log_zhat_length(desk):
    ladder = make_ladder(desk)
    params = RunParams(eta=0.1, T=0.5, t=5)
    with pytest.raises(ValueError, match="one entry per ladder level"):
        run_stlmc(desk, ladder, np.zeros(3), params, np.random.default_rng(0))


def test_returned_samples_match_top_level_slice(cheap):
    # the retry rule must not distort the distribution: samples returned
    # by the retrying runner agree with the top-level endpoint slice of
    # independent fixed-length runs
    ladder = make_ladder(cheap)
    lzq = np.array([log_partition_quadrature(cheap, b) for b in ladder.betas])
    lz = lzq - lzq[0]
    params = RunParams(eta=0.1, T=0.5, t=80)
    rng = np.random.default_rng(30)
    returned = np.array(
        [run_stlmc(cheap, ladder, lz, params, rng)[0][0] for _ in range(600)]
    )
    x, lev = run_tempering_batch(
        cheap, ladder.betas, lz, 4000, params, np.random.default_rng(31)
    )
    endpoints = x[lev == ladder.L - 1][:, 0]
    edges = np.array([-np.inf, -2.25, -1.5, -0.75, 0.0, 0.75, 1.5, 2.25, np.inf])
    table = np.vstack(
        [np.histogram(returned, bins=edges)[0], np.histogram(endpoints, bins=edges)[0]]
    )
    _, p_value, _, _ = chi2_contingency(table)
    assert p_value > 0.01


def test_batch_runner_is_deterministic(cheap):
    ladder = make_ladder(cheap)
    params = RunParams(eta=0.1, T=0.5, t=40)
    x1, l1 = run_tempering_batch(
        cheap, ladder.betas, np.zeros(ladder.L), 300, params, np.random.default_rng(9)
    )
    x2, l2 = run_tempering_batch(
        cheap, ladder.betas, np.zeros(ladder.L), 300, params, np.random.default_rng(9)
    )
    np.testing.assert_array_equal(x1, x2)
    np.testing.assert_array_equal(l1, l2)


def test_batch_stats_accounting(cheap):
    ladder = make_ladder(cheap)
    params = RunParams(eta=0.1, T=0.5, t=40)
    stats = new_batch_stats(ladder.L)
    burn = 10
    n_chains = 200
    run_tempering_batch(
        cheap, ladder.betas, np.zeros(ladder.L), n_chains, params,
        np.random.default_rng(9), stats=stats, occupancy_burn_in=burn,
    )
    assert stats["chains"] == n_chains
    assert stats["occupancy"].sum() == n_chains * (params.t - burn)
    assert np.all(stats["accepts"] <= stats["proposals"])
    assert stats["grad_evals"] > 0
    # neighbor proposals only touch adjacent levels
    off = np.abs(np.subtract.outer(np.arange(ladder.L), np.arange(ladder.L)))
    assert stats["proposals"][off != 1].sum() == 0
    merged = merge_batch_stats(new_batch_stats(ladder.L), stats)
    assert merged["chains"] == n_chains
    np.testing.assert_array_equal(merged["occupancy"], stats["occupancy"])


def test_uniform_proposal_reaches_all_levels(cheap):
    ladder = make_ladder(cheap, proposal_mode="uniform")
    params = RunParams(eta=0.1, T=0.5, t=40)
    stats = new_batch_stats(ladder.L)
    run_tempering_batch(
        cheap, ladder.betas, np.zeros(ladder.L), 200, params,
        np.random.default_rng(10), proposal_mode="uniform", stats=stats,
    )
    off = np.abs(np.subtract.outer(np.arange(ladder.L), np.arange(ladder.L)))
    assert stats["proposals"][off > 1].sum() > 0


def test_write_trace_csv(tmp_path, desk):
    ladder = TemperatureLadder(np.array([1.0]), np.array([1.0]))
    params = RunParams(eta=0.1, T=0.5, t=5)
    _, trace = run_stlmc(desk, ladder, np.zeros(1), params, np.random.default_rng(3))
    path = tmp_path / "trace.csv"
    write_trace_csv(path, trace, d=1)
    lines = path.read_text().splitlines()
    assert lines[0] == "# stlmc trace v1"
    assert lines[1] == "step,level,move_type,accepted,x_1"
    assert len(lines) == 2 + len(trace)
    first = lines[2].split(",")
    assert first[0] == "1"
    float(first[4])


def test_run_params_validation():
    with pytest.raises(ValueError):
        RunParams(eta=-0.1, T=0.5, t=10)
    with pytest.raises(ValueError):
        RunParams(eta=0.1, T=0.0, t=10)
    with pytest.raises(ValueError):
        RunParams(eta=0.1, T=0.5, t=0)
    with pytest.raises(ValueError):
        RunParams(eta=0.1, T=0.5, t=10, m=0)
    with pytest.raises(ValueError):
        RunParams(eta=0.1, T=0.5, t=10, max_retries=0)
