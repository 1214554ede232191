"""Tests for the inductive partition-function estimator and its oracles."""
import math

import numpy as np
import pytest

from stlmc import (
    BoundViolationError,
    GaussianMixture,
    PartitionEstimates,
    RunParams,
    concentration_check,
    estimate_next_z,
    load_estimates,
    log_partition_quadrature,
    make_ladder,
    run_main_algorithm,
    sample_exact,
    save_estimates,
)


class _NegativeEnergy:
    """Stand-in target whose energy dips below zero with no declared slack."""

    d = 1

    def f(self, x):
        return np.full(np.asarray(x).shape[0], -1.0)


def test_estimate_next_z_degenerate_cases():
    g = GaussianMixture([1.0], [[2.0]], 1.0)
    samples = np.random.default_rng(0).normal(2.0, 1.0, size=(50, 1))
    assert estimate_next_z(samples, g, 0.5, 0.5, -0.3) == pytest.approx(-0.3)
    # zero-energy samples leave the estimate unchanged
    at_mode = np.full((50, 1), 2.0)
    assert estimate_next_z(at_mode, g, 0.5, 0.9, -0.3) == pytest.approx(-0.3)


def test_estimate_next_z_validation():
    g = GaussianMixture([1.0], [[0.0]], 1.0)
    with pytest.raises(ValueError, match="at least one sample"):
        estimate_next_z(np.zeros((0, 1)), g, 0.5, 0.6, 0.0)
    with pytest.raises(ValueError, match="non-decreasing"):
        estimate_next_z(np.zeros((5, 1)), g, 0.6, 0.5, 0.0)


def test_estimate_next_z_ratio_factor_never_positive():
    g = GaussianMixture([0.5, 0.5], [[-1.0], [1.0]], 1.0)
    rng = np.random.default_rng(1)
    lz = 0.0
    beta = 0.4
    for beta_next in (0.6, 0.8, 1.0):
        xs = sample_exact(g, 500, rng, beta=beta)
        nxt = estimate_next_z(xs, g, beta, beta_next, lz)
        assert nxt <= lz + 1e-12
        lz, beta = nxt, beta_next
    with pytest.raises(BoundViolationError):
        estimate_next_z(np.zeros((10, 1)), _NegativeEnergy(), 0.5, 1.0, 0.0)


def test_single_gaussian_ratio_estimate():
    # Z_beta = sqrt(2 pi / beta), so the one-level ratio is
    # sqrt(beta_l / beta_next)
    g = GaussianMixture([1.0], [[0.0]], 1.0)
    beta_l, beta_next = 0.5, 0.7
    xs = sample_exact(g, 10_000, np.random.default_rng(18), beta=beta_l)
    est = estimate_next_z(xs, g, beta_l, beta_next, 0.0)
    assert math.exp(est) == pytest.approx(math.sqrt(beta_l / beta_next), rel=0.05)


def test_partition_estimates_validation():
    PartitionEstimates(np.array([0.0, -0.5]))
    with pytest.raises(ValueError, match="must be 0"):
        PartitionEstimates(np.array([0.1, -0.5]))
    with pytest.raises(ValueError, match="finite"):
        PartitionEstimates(np.array([0.0, np.nan]))
    with pytest.raises(ValueError):
        PartitionEstimates(np.zeros((2, 2)))


def test_run_main_algorithm_single_level():
    single = GaussianMixture([1.0], [[0.0, 0.0]], 1.0)
    res = run_main_algorithm(
        single, RunParams(eta=0.1, T=0.5, t=30, seed=0), n_samples=50
    )
    assert res.ladder.L == 1
    np.testing.assert_allclose(res.estimates.log_zhat, [0.0])
    assert res.samples.shape == (50, 2)
    assert len(res.stats["phases"]) == 1
    assert res.stats["grad_evals"] > 0


def test_run_main_algorithm_requires_seed(cheap):
    with pytest.raises(ValueError, match="seed"):
        run_main_algorithm(cheap, RunParams(eta=0.1, T=0.5, t=30), n_samples=10)


def test_run_main_algorithm_is_deterministic(cheap):
    params = RunParams(eta=0.1, T=0.5, t=60, seed=21)
    a = run_main_algorithm(cheap, params, n_samples=40)
    b = run_main_algorithm(cheap, params, n_samples=40)
    np.testing.assert_array_equal(a.samples, b.samples)
    np.testing.assert_array_equal(a.estimates.log_zhat, b.estimates.log_zhat)


def test_run_main_algorithm_worker_invariance(cheap):
    params = RunParams(eta=0.1, T=0.5, t=60, seed=21)
    a = run_main_algorithm(cheap, params, n_samples=40)
    c = run_main_algorithm(cheap, params, n_samples=40, workers=2)
    np.testing.assert_array_equal(a.samples, c.samples)
    np.testing.assert_array_equal(a.estimates.log_zhat, c.estimates.log_zhat)


def test_estimates_track_quadrature_over_seeds(cheap):
    # every level's estimate stays inside the compounding (1 + 1/L)^(l-1)
    # envelope around the true log ratio, across independent seeds
    ladder = make_ladder(cheap)
    L = ladder.L
    lzq = np.array([log_partition_quadrature(cheap, b) for b in ladder.betas])
    true_lz = lzq - lzq[0]
    env = np.arange(L) * math.log(1.0 + 1.0 / L)
    failures = 0
    n_runs = 40
    for seed in range(n_runs):
        res = run_main_algorithm(
            cheap, RunParams(eta=0.1, T=0.5, t=80, seed=seed), n_samples=0
        )
        assert res.samples.shape == (0, 1)
        err = np.abs(res.estimates.log_zhat - true_lz)
        if np.any(err > env + 1e-12):
            failures += 1
    assert failures / n_runs <= 0.05


def test_concentration_check_identical_levels(cheap):
    res = concentration_check(cheap, 0.7, 0.7, n_samples=50, n_trials=40, seed=0)
    assert res.failure_rate == 0.0
    assert res.ratio == pytest.approx(1.0, abs=1e-9)
    assert res.C == 1.0


def test_concentration_check_desk_pair(desk):
    betas = make_ladder(desk).betas
    res = concentration_check(
        desk, float(betas[4]), float(betas[5]), n_samples=400, n_trials=60, seed=3
    )
    assert res.failure_rate <= res.envelope + 3.0 * math.sqrt(0.25 / res.n_trials)
    assert 0.0 < res.ratio <= 1.0


def test_sample_exact_moments(desk):
    xs = sample_exact(desk, 20_000, np.random.default_rng(5))
    assert xs.shape == (20_000, 1)
    # symmetric modes at +-3 with unit variance: mean 0, second moment 10
    assert float(np.mean(xs)) == pytest.approx(0.0, abs=0.1)
    assert float(np.mean(xs**2)) == pytest.approx(10.0, rel=0.05)
    flat = sample_exact(desk, 5000, np.random.default_rng(6), beta=0.2)
    assert float(np.mean(flat**2)) > float(np.mean(xs**2))


def test_sample_exact_validation(desk):
    with pytest.raises(ValueError):
        sample_exact(desk, 10, np.random.default_rng(0), beta=0.0)
    with pytest.raises(ValueError):
        sample_exact(desk, 10, np.random.default_rng(0), beta=1.2)
    with pytest.raises(TypeError):
        sample_exact(object(), 10, np.random.default_rng(0))


def test_log_partition_quadrature_closed_form():
    g = GaussianMixture([1.0], [[0.0]], 1.0)
    # the fixed integration window truncates more mass as beta shrinks
    for beta, rel in ((0.25, 1e-4), (0.5, 1e-7), (1.0, 1e-8)):
        expected = 0.5 * math.log(2.0 * math.pi / beta)
        assert log_partition_quadrature(g, beta) == pytest.approx(expected, rel=rel)
    g2 = GaussianMixture([1.0], [[0.0, 0.0]], 1.0)
    assert log_partition_quadrature(g2, 1.0) == pytest.approx(
        math.log(2.0 * math.pi), rel=1e-6
    )
    g3 = GaussianMixture([1.0], [[0.0, 0.0, 0.0]], 1.0)
    with pytest.raises(ValueError, match="d <= 2"):
        log_partition_quadrature(g3, 1.0)


def test_save_load_estimates_round_trip(tmp_path, cheap):
    ladder = make_ladder(cheap)
    est = PartitionEstimates(np.array([0.0, -0.3, -0.6, -0.7]))
    params = RunParams(eta=0.1, T=0.5, t=80, seed=12)
    path = tmp_path / "estimates.json"
    save_estimates(path, ladder, est, 12, params)
    payload = load_estimates(path)
    np.testing.assert_allclose(payload["betas"], ladder.betas)
    np.testing.assert_allclose(payload["log_zhat"], est.log_zhat)
    assert payload["seed"] == 12
    assert payload["params"]["t"] == 80
    assert payload["params"]["proposal_mode"] == "neighbor"
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "something-else"}\n')
    with pytest.raises(ValueError, match="format"):
        load_estimates(bad)
