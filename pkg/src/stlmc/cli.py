"""Batch command-line front end.

Subcommands: ``sample`` (run the full sampler and write samples.csv,
estimates.json and a summary), ``compare`` (tempering vs plain Langevin
at a matched gradient budget), ``estimate-z`` (normalizer estimation
only), ``analyze`` (discretized-generator spectra across the ladder) and
``verify`` (seeded property suites). Exit codes: 0 success, 1 property
or runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .chain_analysis import discretize_langevin_generator, z_ratio_bound_check
from .diagnostics import (
    Histogram,
    default_box,
    exact_bin_masses,
    mode_occupancy,
    tv_distance,
)
from .errors import (
    BoundViolationError,
    ConfigError,
    NonConvergenceError,
    NonFiniteGradientError,
    RetriesExhaustedError,
)
from .langevin_kernel import LangevinParams, check_step_size, run_macro_step
from .mixture_target import GaussianMixture, PerturbedTarget, target_from_config
from .partition_estimator import (
    log_partition_quadrature,
    run_main_algorithm,
    save_estimates,
)
from .tempering_chain import RunParams, make_ladder, run_stlmc, write_trace_csv
from .verification import available_suites, run_suites

_RUN_DEFAULTS = {
    "eta": 0.1,
    "T": 0.5,
    "t": 300,
    "m": None,
    "seed": None,
    "max_retries": 100,
    "c1": 1.0,
    "c2": 1.0,
    "proposal_mode": "neighbor",
    "workers": 1,
}


def _load_config(path):
    if path is None:
        raise ConfigError("a --config file with a target section is required")
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict) or "target" not in cfg:
        raise ConfigError("config must be a JSON object with a 'target' section")
    return cfg


def _merge_run_params(cfg, args, require_seed):
    """Config 'run' section with CLI flags on top; flags win."""
    run = dict(_RUN_DEFAULTS)
    section = cfg.get("run", {})
    unknown = set(section) - set(_RUN_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown run options {sorted(unknown)}")
    run.update(section)
    for key in _RUN_DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            run[key] = flag
    if require_seed and run["seed"] is None:
        raise ConfigError("a seed is required (give --seed or set run.seed)")
    workers = int(run.pop("workers"))
    if workers < 1:
        raise ConfigError("workers must be at least 1")
    mode = run.pop("proposal_mode")
    scales = (float(run.pop("c1")), float(run.pop("c2")))
    params = RunParams(
        eta=float(run["eta"]), T=float(run["T"]), t=int(run["t"]),
        m=None if run["m"] is None else int(run["m"]),
        seed=None if run["seed"] is None else int(run["seed"]),
        max_retries=int(run["max_retries"]),
    )
    return params, mode, workers, scales


def _out_dir(args, cfg):
    out = args.out or cfg.get("output_dir") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _mode_centers(target):
    base = target.base if isinstance(target, PerturbedTarget) else target
    return base.means


def _mode_radius(args, cfg, target):
    r = args.mode_radius if args.mode_radius is not None else cfg.get("mode_radius")
    if r is not None:
        return float(r)
    return 3.0 * math.sqrt(target.sigma2)


def _write_samples_csv(path, samples):
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    with open(path, "w") as fh:
        fh.write("# stlmc samples v1\n")
        fh.write("sample," + ",".join(f"x_{j + 1}" for j in range(samples.shape[1])) + "\n")
        for i, row in enumerate(samples):
            fh.write(str(i) + "," + ",".join(f"{v:.17g}" for v in row) + "\n")


def _occupancy_lines(stats, L):
    occ = stats["occupancy"]
    lines = []
    if occ.sum() > 0:
        frac = occ / occ.sum()
        lines.append("level occupancy (final stage, after burn-in):")
        lines.append("  " + " ".join(f"{v:.4f}" for v in frac))
    prop = stats["proposals"]
    acc = stats["accepts"]
    pairs = [
        f"  {i + 1}->{j + 1}: {acc[i, j]}/{prop[i, j]} ({acc[i, j] / prop[i, j]:.3f})"
        for i in range(L) for j in range(L) if prop[i, j] > 0
    ]
    if pairs:
        lines.append("level-move acceptance (final stage):")
        lines.extend(pairs)
    return lines


def _quality_lines(target, samples, centers, radius, bins):
    lines = []
    frac, rest = mode_occupancy(samples, centers, radius)
    lines.append(f"mode fractions (radius {radius:.3g}): "
                 + " ".join(f"{v:.4f}" for v in frac)
                 + f"  unassigned {rest:.4f}")
    if target.d <= 2:
        lo, hi = default_box(target)
        hist = Histogram.from_samples(samples, lo, hi, bins=bins)
        tv = tv_distance(hist, exact_bin_masses(target, hist))
        lines.append(f"TV distance vs quadrature density ({bins} bins): {tv:.4f}")
    else:
        lines.append("TV distance: skipped (d > 2)")
    return lines


def cmd_sample(args) -> int:
    cfg = _load_config(args.config)
    target = target_from_config(cfg["target"])
    params, mode, workers, (c1, c2) = _merge_run_params(cfg, args, require_seed=True)
    check_step_size(LangevinParams(params.eta, params.T), target)
    n_samples = args.n_samples if args.n_samples is not None else int(cfg.get("n_samples", 2000))
    if n_samples < 1:
        raise ConfigError("n_samples must be positive for sample")
    out = _out_dir(args, cfg)

    result = run_main_algorithm(target, params, c1=c1, c2=c2,
                                n_samples=n_samples, proposal_mode=mode, workers=workers)
    _write_samples_csv(os.path.join(out, "samples.csv"), result.samples)
    save_estimates(os.path.join(out, "estimates.json"), result.ladder,
                   result.estimates, params.seed, params)

    lines = [
        "# stlmc sample summary v1",
        f"target: d={target.d} modes={_mode_centers(target).shape[0]} "
        f"sigma2={target.sigma2:.6g} D={target.D:.6g}",
        f"ladder: L={result.ladder.L} proposal_mode={mode}",
        "betas: " + " ".join(f"{b:.6f}" for b in result.ladder.betas),
        "log_zhat: " + " ".join(f"{v:.6f}" for v in result.estimates.log_zhat),
        f"run: eta={params.eta} T={params.T} t={params.t} "
        f"m={params.m if params.m is not None else 10 * result.ladder.L**2} "
        f"seed={params.seed} workers={workers}",
        f"samples: {n_samples}",
        f"gradient evaluations: {result.stats['grad_evals']}",
    ]
    lines += _occupancy_lines(result.stats, result.ladder.L)
    lines += _quality_lines(target, result.samples, _mode_centers(target),
                            _mode_radius(args, cfg, target), args.bins)
    text = "\n".join(lines) + "\n"
    with open(os.path.join(out, "summary.txt"), "w") as fh:
        fh.write(text)
    sys.stdout.write(text)

    if args.trace:
        rng = np.random.default_rng(np.random.SeedSequence(params.seed, spawn_key=(1_000_000,)))
        _, trace = run_stlmc(target, result.ladder, result.estimates.log_zhat, params, rng)
        write_trace_csv(os.path.join(out, "trace.csv"), trace, target.d)
    return 0


class _UnequalScaleDemo:
    """Two Gaussians with different widths (report-only comparison demo).

    Sampler guarantees assume one shared variance, so tempering is
    expected to degrade here; the comparison reports what happens.
    """

    def __init__(self):
        self.weights = np.array([0.5, 0.5])
        self.mus = np.array([-3.0, 3.0])
        self.vars = np.array([1.0, 0.1])
        self.d = 1
        self.sigma2 = float(self.vars.min())
        self.D = 3.0
        self.w_min = 0.5
        self.means = self.mus.reshape(-1, 1)

    def _logits(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
        diff = x[:, None] - self.mus[None, :]
        a = (np.log(self.weights) - 0.5 * np.log(2 * np.pi * self.vars)
             - diff**2 / (2 * self.vars))
        return x, diff, a

    def f(self, x):
        _, _, a = self._logits(x)
        m = a.max(axis=1)
        out = -(m + np.log(np.exp(a - m[:, None]).sum(axis=1)))
        return out if out.size > 1 else float(out[0])

    def f_and_grad(self, x):
        xs, diff, a = self._logits(x)
        m = a.max(axis=1, keepdims=True)
        e = np.exp(a - m)
        resp = e / e.sum(axis=1, keepdims=True)
        grad = (resp * diff / self.vars).sum(axis=1)
        fv = -(m[:, 0] + np.log(e.sum(axis=1)))
        if np.asarray(x).ndim == 2:
            return fv, grad.reshape(-1, 1)
        return (float(fv[0]), grad.reshape(np.asarray(x).shape))

    def grad(self, x):
        return self.f_and_grad(x)[1]


def _matched_langevin(target, params, n_chains, grad_budget, start, rng):
    """Plain level-1.0 chains from ``start`` burning the same gradient count."""
    steps = max(1, grad_budget // n_chains)
    lp = LangevinParams(eta=params.eta, T=steps * params.eta, beta=1.0)
    x = np.tile(np.asarray(start, dtype=float).reshape(1, -1), (n_chains, 1))
    return run_macro_step(target, lp, x, rng), steps * n_chains


def _compare_scenario(label, target, params, mode, workers, n_samples, radius,
                      bins, rows, c1=1.0, c2=1.0):
    try:
        result = run_main_algorithm(target, params, n_samples=n_samples,
                                    proposal_mode=mode, workers=workers,
                                    c1=c1, c2=c2)
    except (RetriesExhaustedError, BoundViolationError) as exc:
        rows.append((label, "tempering", "failed: " + str(exc)))
        return
    budget = result.stats["grad_evals"]
    centers = _mode_centers(target)
    rows.append((label, "tempering",
                 _describe(target, result.samples, centers, radius, bins, budget)))
    rng = np.random.default_rng(np.random.SeedSequence(params.seed, spawn_key=(2_000_000,)))
    plain, used = _matched_langevin(target, params, n_samples, budget, centers[0], rng)
    rows.append((label, "plain-langevin",
                 _describe(target, plain, centers, radius, bins, used)))


def _describe(target, samples, centers, radius, bins, grad_evals):
    frac, rest = mode_occupancy(samples, centers, radius)
    desc = ("mode fractions " + "/".join(f"{v:.4f}" for v in frac)
            + f" unassigned {rest:.4f}")
    if target.d <= 2:
        lo, hi = default_box(target)
        hist = Histogram.from_samples(samples, lo, hi, bins=bins)
        tv = tv_distance(hist, exact_bin_masses(target, hist))
        desc += f" tv {tv:.4f}"
    return desc + f" grad_evals {grad_evals}"


def cmd_compare(args) -> int:
    cfg = _load_config(args.config)
    target = target_from_config(cfg["target"])
    params, mode, workers, (c1, c2) = _merge_run_params(cfg, args, require_seed=True)
    check_step_size(LangevinParams(params.eta, params.T), target)
    n_samples = args.n_samples if args.n_samples is not None else int(cfg.get("n_samples", 2000))
    out = _out_dir(args, cfg)
    radius = _mode_radius(args, cfg, target)

    rows = []
    _compare_scenario("standard", target, params, mode, workers, n_samples,
                      radius, args.bins, rows, c1=c1, c2=c2)
    if not args.skip_demo:
        demo = _UnequalScaleDemo()
        demo_params = RunParams(eta=0.02, T=0.5, t=params.t, m=params.m,
                                seed=params.seed, max_retries=params.max_retries)
        _compare_scenario("unequal-covariance (report only)", demo, demo_params,
                          mode, workers, min(n_samples, 500), radius, args.bins,
                          rows, c1=10.0, c2=10.0)

    lines = ["# stlmc compare v1"]
    for label, method, desc in rows:
        lines.append(f"{label:<32} {method:<15} {desc}")
    text = "\n".join(lines) + "\n"
    with open(os.path.join(out, "compare.txt"), "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return 0


def cmd_estimate_z(args) -> int:
    cfg = _load_config(args.config)
    target = target_from_config(cfg["target"])
    params, mode, workers, (c1, c2) = _merge_run_params(cfg, args, require_seed=True)
    check_step_size(LangevinParams(params.eta, params.T), target)
    out = _out_dir(args, cfg)
    result = run_main_algorithm(target, params, c1=c1, c2=c2, n_samples=0,
                                proposal_mode=mode, workers=workers)
    save_estimates(os.path.join(out, "estimates.json"), result.ladder,
                   result.estimates, params.seed, params)
    lines = ["# stlmc estimate-z report v1",
             f"L={result.ladder.L} seed={params.seed}"]
    if target.d <= 2:
        log_z1 = log_partition_quadrature(target, result.ladder.betas[0])
        worst = 0.0
        for lvl, (b, lz) in enumerate(zip(result.ladder.betas, result.estimates.log_zhat), 1):
            truth = log_partition_quadrature(target, b) - log_z1
            dev = lz - truth
            worst = max(worst, abs(dev))
            lines.append(f"level {lvl}: beta={b:.6f} log_zhat={lz:+.6f} "
                         f"quadrature={truth:+.6f} deviation={dev:+.6f}")
        lines.append(f"max |deviation| = {worst:.6f}")
    else:
        lines += [f"level {lvl}: beta={b:.6f} log_zhat={lz:+.6f}"
                  for lvl, (b, lz) in enumerate(
                      zip(result.ladder.betas, result.estimates.log_zhat), 1)]
        lines.append("quadrature comparison skipped (d > 2)")
    text = "\n".join(lines) + "\n"
    with open(os.path.join(out, "estimate_z.txt"), "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return 0


def cmd_analyze(args) -> int:
    cfg = _load_config(args.config)
    target = target_from_config(cfg["target"])
    if target.d > 2:
        raise ConfigError("analyze needs a dense eigen-solve and supports d <= 2 only")
    _, mode, _, (c1, c2) = _merge_run_params(cfg, args, require_seed=False)
    out = _out_dir(args, cfg)
    ladder = make_ladder(target, c1, c2, proposal_mode=mode)
    cells = args.cells if args.cells is not None else (400 if target.d == 1 else 40)
    n_modes = _mode_centers(target).shape[0]
    sigma = math.sqrt(target.sigma2)

    lines = ["# stlmc analyze report v1",
             f"grid: {cells} cells per axis, d={target.d}",
             f"eigenvalues of minus the generator, lambda_1..lambda_{n_modes + 2}:"]
    dens = []
    shared_R = target.D + 6.0 * sigma / math.sqrt(ladder.betas[0])
    for b in ladder.betas:
        gen = discretize_langevin_generator(target, float(b), shared_R, cells)
        ev = gen.eigenvalues(n_modes + 2)
        lines.append(f"  beta={b:.6f}: " + " ".join(f"{v:.6e}" for v in ev))
        dens.append(gen.weights)
    lines.append("adjacent-level overlap (whole-space affinity):")
    for i in range(1, ladder.L):
        aff = float(np.minimum(dens[i - 1], dens[i]).sum())
        lines.append(f"  {i}->{i + 1}: {aff:.4f}")
    if isinstance(target, GaussianMixture):
        lines.append("adjacent-level partition-ratio margins:")
        for i in range(1, ladder.L):
            ratio, lower = z_ratio_bound_check(target, float(ladder.betas[i - 1]),
                                               float(ladder.betas[i]))
            lines.append(f"  {i}->{i + 1}: ratio={ratio:.4f} lower={lower:.4e} "
                         f"margin={ratio / lower:.1f}x")
    text = "\n".join(lines) + "\n"
    with open(os.path.join(out, "analyze.txt"), "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    wanted = args.suite or ["all"]
    known = set(available_suites()) | {"all"}
    for name in wanted:
        if name.replace("_", "-") not in known:
            sys.stderr.write(
                f"error: unknown suite '{name}'; choose from "
                + ", ".join(sorted(known)) + "\n")
            return 2
    results = run_suites(wanted)
    failed = 0
    for suite, checks in results.items():
        for check in checks:
            status = "PASS" if check.ok else "FAIL"
            failed += 0 if check.ok else 1
            sys.stdout.write(f"[{status}] {suite}: {check.name} - {check.detail}\n")
    total = sum(len(c) for c in results.values())
    sys.stdout.write(f"{total - failed}/{total} checks passed\n")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stlmc",
        description="Simulated tempering Langevin Monte Carlo sampler and chain analysis tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed_required):
        p.add_argument("--config", help="JSON config file with target and run sections")
        p.add_argument("--out", help="output directory (default: config output_dir or '.')")
        p.add_argument("--seed", type=int, help="RNG seed"
                       + (" (required)" if seed_required else ""))
        p.add_argument("--eta", type=float, help="Langevin step size")
        p.add_argument("--T", type=float, dest="T", help="time interval per macro step")
        p.add_argument("--t", type=int, dest="t", help="tempering steps per chain")
        p.add_argument("--m", type=int, help="samples per estimation stage (default 10 L^2)")
        p.add_argument("--max-retries", type=int, dest="max_retries")
        p.add_argument("--c1", type=float, help="first-level temperature scale")
        p.add_argument("--c2", type=float, help="temperature spacing scale")
        p.add_argument("--proposal-mode", dest="proposal_mode",
                       choices=["uniform", "neighbor"])
        p.add_argument("--workers", type=int, help="parallel replica workers")
        p.add_argument("--bins", type=int, default=100, help="histogram bins per axis")
        p.add_argument("--mode-radius", type=float, dest="mode_radius",
                       help="radius for mode-occupancy reporting")

    p = sub.add_parser("sample", help="run the sampler and write samples + estimates")
    add_common(p, True)
    p.add_argument("--n-samples", type=int, dest="n_samples")
    p.add_argument("--trace", action="store_true",
                   help="also write a single-chain trace.csv")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("compare", help="tempering vs plain Langevin at matched budget")
    add_common(p, True)
    p.add_argument("--n-samples", type=int, dest="n_samples")
    p.add_argument("--skip-demo", action="store_true",
                   help="skip the unequal-covariance demo scenario")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("estimate-z", help="estimate normalizers only")
    add_common(p, True)
    p.set_defaults(func=cmd_estimate_z)

    p = sub.add_parser("analyze", help="spectral report across the ladder")
    add_common(p, False)
    p.add_argument("--cells", type=int, help="grid cells per axis")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="run seeded property suites")
    p.add_argument("--suite", action="append",
                   help="suite name (repeatable); default all")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, NonConvergenceError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (BoundViolationError, RetriesExhaustedError, NonFiniteGradientError) as exc:
        sys.stderr.write(f"failure: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
