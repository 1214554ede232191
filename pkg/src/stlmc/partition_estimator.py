"""Inductive partition-function estimation along the temperature ladder.

Level 1's normalizer anchors the scale (log zhat_1 = 0). Each stage
runs the tempering chain restricted to the first ell ladder levels,
keeps the replicas that finish at level ell, and extends the estimate
with the sample mean of ``exp((beta_ell - beta_{ell+1}) f(x))``, all in
the log domain. Replicas advance in fixed-size blocks whose generator
streams are derived from (seed, stage, round, block), so results do not
depend on how many workers execute the blocks.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import nquad, quad
from scipy.special import logsumexp

from .errors import BoundViolationError, RetriesExhaustedError
from .langevin_kernel import LangevinParams, check_step_size
from .mixture_target import GaussianMixture
from .tempering_chain import (
    RunParams,
    TemperatureLadder,
    make_ladder,
    merge_batch_stats,
    new_batch_stats,
    run_tempering_batch,
)

__all__ = [
    "PartitionEstimates",
    "MainResult",
    "ConcentrationResult",
    "estimate_next_z",
    "run_main_algorithm",
    "concentration_check",
    "sample_exact",
    "log_partition_quadrature",
    "save_estimates",
    "load_estimates",
]

_BLOCK = 512
_MAX_ROUNDS = 100


@dataclass(frozen=True)
class PartitionEstimates:
    """Log-domain partition estimates, one entry per ladder level."""

    log_zhat: np.ndarray

    def __post_init__(self):
        lz = np.asarray(self.log_zhat, dtype=float)
        if lz.ndim != 1 or lz.size == 0:
            raise ValueError("log_zhat must be a non-empty 1-d sequence")
        if lz[0] != 0.0:
            raise ValueError("the first estimate anchors the scale and must be 0")
        if not np.all(np.isfinite(lz)):
            raise ValueError("estimates must be finite")
        lz = lz.copy()
        lz.flags.writeable = False
        object.__setattr__(self, "log_zhat", lz)

    @property
    def L(self) -> int:
        return self.log_zhat.shape[0]


@dataclass
class MainResult:
    samples: np.ndarray
    estimates: PartitionEstimates
    ladder: TemperatureLadder
    stats: dict


@dataclass(frozen=True)
class ConcentrationResult:
    failure_rate: float
    envelope: float
    ratio: float
    C: float
    n_samples: int
    epsilon: float
    n_trials: int


def estimate_next_z(samples, target, beta_l, beta_next, log_zhat_l) -> float:
    """Extend the running estimate by one level from level-ell samples.

    Returns ``log_zhat_l`` plus the log of the sample mean of
    ``exp((beta_l - beta_next) f(x_j))``. For non-negative energies and
    an increasing ladder the mean factor cannot exceed 1; when the
    target carries a perturbation the factor is allowed the matching
    ``exp((beta_next - beta_l) * delta)`` headroom.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("need at least one sample to extend the estimate")
    if beta_next < beta_l:
        raise ValueError("the ladder must be non-decreasing")
    fs = np.atleast_1d(target.f(samples))
    a = (beta_l - beta_next) * fs
    log_ratio = float(logsumexp(a) - math.log(fs.shape[0]))
    allowance = (beta_next - beta_l) * getattr(target, "delta", 0.0)
    if log_ratio > allowance + 1e-12:
        raise BoundViolationError("estimate ratio factor", log_ratio, allowance)
    return float(log_zhat_l) + log_ratio


def _run_block(target, betas, log_zhat, n_chains, params, proposal_mode, seed, spawn_key):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=spawn_key))
    st = new_batch_stats(len(betas))
    x, lev = run_tempering_batch(
        target, betas, log_zhat, n_chains, params, rng, proposal_mode, stats=st
    )
    return x, lev, st


def _run_block_star(args):
    return _run_block(*args)


def _collect_top(target, betas, log_zhat, n_want, params, proposal_mode, stage, workers):
    """Gather n_want replica endpoints that finished at the top prefix level."""
    top = len(betas) - 1
    stats = new_batch_stats(len(betas))
    final_levels = np.zeros(len(betas), dtype=np.int64)
    chunks = []
    got = 0
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for rnd in range(_MAX_ROUNDS):
            if got >= n_want:
                break
            # one extra factor covers the sub-uniform top-level occupancy
            want_chains = int(math.ceil((n_want - got) * len(betas) * 1.25))
            n_blocks = max(1, math.ceil(want_chains / _BLOCK))
            work = [
                (target, betas, log_zhat, _BLOCK, params, proposal_mode,
                 params.seed, (stage, rnd, b))
                for b in range(n_blocks)
            ]
            if executor is not None:
                results = list(executor.map(_run_block_star, work))
            else:
                results = [_run_block(*args) for args in work]
            for x, lev, st in results:
                merge_batch_stats(stats, st)
                final_levels += np.bincount(lev, minlength=len(betas))
                sel = x[lev == top]
                chunks.append(sel)
                got += sel.shape[0]
        else:
            raise RetriesExhaustedError(
                _MAX_ROUNDS,
                {lv + 1: int(c) for lv, c in enumerate(final_levels) if c},
                message=(
                    f"stage {stage}: {got}/{n_want} top-level replicas after "
                    f"{_MAX_ROUNDS} rounds"
                ),
            )
    finally:
        if executor is not None:
            executor.shutdown()
    return np.concatenate(chunks, axis=0)[:n_want], stats


def run_main_algorithm(
    target,
    params: RunParams,
    c1=1.0,
    c2=1.0,
    n_samples=1000,
    proposal_mode="neighbor",
    workers=1,
) -> MainResult:
    """Build the ladder, estimate all partition ratios, then sample.

    Stage ell runs the tempering chain on the first ell levels with the
    estimates found so far and collects ``params.m`` (default 10 L^2)
    level-ell endpoints to extend the estimates; the final stage
    collects ``n_samples`` top-level points from the full ladder.
    """
    if params.seed is None:
        raise ValueError("params.seed is required for reproducible runs")
    check_step_size(LangevinParams(params.eta, params.T), target)
    ladder = make_ladder(target, c1, c2, proposal_mode)
    L = ladder.L
    m = int(params.m) if params.m is not None else 10 * L * L
    lz = [0.0]
    phases = []
    grad_total = 0
    for ell in range(1, L):
        try:
            xs, st = _collect_top(
                target, ladder.betas[:ell], np.asarray(lz), m, params,
                proposal_mode, ell, workers,
            )
        except RetriesExhaustedError as exc:
            raise RetriesExhaustedError(
                exc.attempts, exc.final_levels,
                message=f"estimation stage {ell} of {L} failed: {exc}",
            ) from exc
        grad_total += st["grad_evals"]
        phases.append({"stage": ell, "chains": st["chains"], "grad_evals": st["grad_evals"]})
        lz.append(estimate_next_z(xs, target, ladder.betas[ell - 1], ladder.betas[ell], lz[-1]))
    estimates = PartitionEstimates(np.asarray(lz))
    if n_samples > 0:
        samples, final_st = _collect_top(
            target, ladder.betas, estimates.log_zhat, int(n_samples), params,
            proposal_mode, L, workers,
        )
        grad_total += final_st["grad_evals"]
        phases.append({"stage": L, "chains": final_st["chains"],
                       "grad_evals": final_st["grad_evals"]})
    else:
        samples = np.zeros((0, target.d))
        final_st = new_batch_stats(L)
    stats = {
        "grad_evals": grad_total,
        "occupancy": final_st["occupancy"],
        "proposals": final_st["proposals"],
        "accepts": final_st["accepts"],
        "chains": final_st["chains"],
        "phases": phases,
    }
    return MainResult(samples=samples, estimates=estimates, ladder=ladder, stats=stats)


def sample_exact(mixture: GaussianMixture, n, rng, beta=1.0):
    """Draw n exact samples from the density proportional to exp(-beta f).

    Proposes from the mixture with weights proportional to ``w_i^beta``
    and per-component variance ``sigma2 / beta``; since the proposal
    envelope dominates ``exp(-beta f)`` for beta <= 1 the rejection step
    is exact, and at beta = 1 every proposal is accepted.
    """
    if not isinstance(mixture, GaussianMixture):
        raise TypeError("exact sampling needs an unperturbed mixture")
    if not (0.0 < beta <= 1.0):
        raise ValueError(f"beta must lie in (0, 1], got {beta!r}")
    wb = mixture.weights**beta
    wb = wb / wb.sum()
    comp_sd = math.sqrt(mixture.sigma2 / beta)
    out = []
    got = 0
    while got < n:
        batch = max(2 * (n - got), 128)
        comp = rng.choice(mixture.n, size=batch, p=wb)
        xs = mixture.means[comp] + comp_sd * rng.standard_normal((batch, mixture.d))
        a, _ = mixture._log_terms(xs)
        log_g = -beta * np.atleast_1d(mixture.f(xs))
        log_q = logsumexp(beta * a, axis=1)
        keep = np.log(1.0 - rng.random(batch)) < log_g - log_q
        out.append(xs[keep])
        got += int(keep.sum())
    return np.concatenate(out, axis=0)[:n]


def log_partition_quadrature(target, beta) -> float:
    """log of the normalizer of exp(-beta f), by adaptive quadrature.

    Integrates over the box [-(D + 8 sigma), D + 8 sigma]^d; available
    for d <= 2 only.
    """
    R = target.D + 8.0 * math.sqrt(target.sigma2)
    if target.d == 1:
        val, _ = quad(lambda u: math.exp(-beta * target.f(np.array([u]))), -R, R, limit=200)
    elif target.d == 2:
        val, _ = nquad(
            lambda u, v: math.exp(-beta * target.f(np.array([u, v]))),
            [[-R, R], [-R, R]],
        )
    else:
        raise ValueError("quadrature oracle supports d <= 2 only")
    return math.log(val)


def concentration_check(
    mixture, beta_l, beta_next, n_samples=1000, epsilon=0.1, n_trials=1000, seed=0
) -> ConcentrationResult:
    """Empirical tail of the one-level ratio estimator against its envelope.

    Each trial draws ``n_samples`` exact points from the level-beta_l
    density and estimates the partition ratio to the next level; a trial
    fails when the relative error exceeds ``epsilon``. The returned
    envelope is ``exp(-n eps^2 / (2 C^4))`` with
    ``C = max(1, 1/ratio)``, which the failure rate should stay below up
    to binomial noise.
    """
    lr = log_partition_quadrature(mixture, beta_next) - log_partition_quadrature(mixture, beta_l)
    ratio = math.exp(lr)
    C = max(1.0, 1.0 / ratio)
    fails = 0
    for trial in range(n_trials):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))
        xs = sample_exact(mixture, n_samples, rng, beta=beta_l)
        rbar = float(np.mean(np.exp((beta_l - beta_next) * np.atleast_1d(mixture.f(xs)))))
        if abs(rbar / ratio - 1.0) > epsilon:
            fails += 1
    envelope = math.exp(-n_samples * epsilon**2 / (2.0 * C**4))
    return ConcentrationResult(
        failure_rate=fails / n_trials,
        envelope=envelope,
        ratio=ratio,
        C=C,
        n_samples=n_samples,
        epsilon=epsilon,
        n_trials=n_trials,
    )


def save_estimates(path, ladder: TemperatureLadder, estimates: PartitionEstimates,
                   seed, params: RunParams) -> None:
    """Persist estimates with enough context to resume or audit a run."""
    payload = {
        "format": "stlmc-estimates-v1",
        "betas": [float(b) for b in ladder.betas],
        "log_zhat": [float(v) for v in estimates.log_zhat],
        "seed": seed,
        "params": {
            "eta": params.eta,
            "T": params.T,
            "t": int(params.t),
            "m": None if params.m is None else int(params.m),
            "max_retries": int(params.max_retries),
            "proposal_mode": ladder.proposal_mode,
        },
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_estimates(path) -> dict:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != "stlmc-estimates-v1":
        raise ValueError(f"unrecognized estimates file format in {path}")
    payload["betas"] = np.asarray(payload["betas"], dtype=float)
    payload["log_zhat"] = np.asarray(payload["log_zhat"], dtype=float)
    return payload
