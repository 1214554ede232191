"""Sampling-quality diagnostics: histogram TV distance, finite divergences,
mixture divergence inequalities, and mode-occupancy summaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

from .errors import BoundViolationError
from .mixture_target import GaussianMixture, _as_points
from .partition_estimator import log_partition_quadrature

__all__ = [
    "Histogram",
    "default_box",
    "tv_from_masses",
    "tv_distance",
    "exact_bin_masses",
    "chi_sq_divergence",
    "chi_sq_mixture_check",
    "kl_divergence",
    "kl_decomposition_check",
    "mode_occupancy",
]


@dataclass(frozen=True)
class Histogram:
    """Counts on a uniform grid over a box; draws outside stay in ``total``."""

    box_lo: np.ndarray
    box_hi: np.ndarray
    bins: int
    counts: np.ndarray
    total: int

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.box_lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.box_hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1 or np.any(hi <= lo):
            raise ValueError("box_hi must exceed box_lo componentwise")
        counts = np.asarray(self.counts)
        if counts.shape != (self.bins,) * lo.size or np.any(counts < 0):
            raise ValueError("counts must be a non-negative (bins,)*d array")
        if self.total < counts.sum():
            raise ValueError("total cannot be smaller than the binned count")
        for arr in (lo, hi):
            arr.flags.writeable = False
        object.__setattr__(self, "box_lo", lo)
        object.__setattr__(self, "box_hi", hi)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_samples(cls, points, box_lo, box_hi, bins=100):
        lo = np.atleast_1d(np.asarray(box_lo, dtype=float))
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.shape[1] != lo.size:
            raise ValueError("points dimension does not match the box")
        hi = np.atleast_1d(np.asarray(box_hi, dtype=float))
        counts, _ = np.histogramdd(
            pts, bins=(bins,) * lo.size, range=list(zip(lo, hi))
        )
        return cls(lo, hi, bins, counts.astype(np.int64), pts.shape[0])

    @property
    def d(self) -> int:
        return self.box_lo.size

    def edges(self, axis=0):
        return np.linspace(self.box_lo[axis], self.box_hi[axis], self.bins + 1)

    def masses(self):
        """Per-bin empirical probability mass."""
        if self.total == 0:
            raise ValueError("histogram holds no samples")
        return self.counts / self.total

    def out_of_box_mass(self) -> float:
        return 1.0 - self.counts.sum() / self.total

    def merge(self, other: "Histogram") -> "Histogram":
        if (self.bins != other.bins
                or not np.array_equal(self.box_lo, other.box_lo)
                or not np.array_equal(self.box_hi, other.box_hi)):
            raise ValueError("histograms cover different grids")
        return Histogram(self.box_lo, self.box_hi, self.bins,
                         self.counts + other.counts, self.total + other.total)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("# stlmc histogram v1\n")
            fh.write(f"# total={self.total} binned={int(self.counts.sum())}\n")
            if self.d == 1:
                fh.write("x_lo,x_hi,count\n")
                e = self.edges()
                for i in range(self.bins):
                    fh.write(f"{e[i]:.17g},{e[i + 1]:.17g},{int(self.counts[i])}\n")
            elif self.d == 2:
                fh.write("x_lo,x_hi,y_lo,y_hi,count\n")
                ex, ey = self.edges(0), self.edges(1)
                for i in range(self.bins):
                    for j in range(self.bins):
                        fh.write(f"{ex[i]:.17g},{ex[i + 1]:.17g},"
                                 f"{ey[j]:.17g},{ey[j + 1]:.17g},"
                                 f"{int(self.counts[i, j])}\n")
            else:
                raise ValueError("CSV dump supports d <= 2")


def default_box(target):
    """Measurement box [-D - 6 sigma, D + 6 sigma]^d."""
    half = target.D + 6.0 * math.sqrt(target.sigma2)
    return -half * np.ones(target.d), half * np.ones(target.d)


def tv_from_masses(a, b) -> float:
    """Total variation between two sub-probability mass vectors.

    Mass missing from either vector is treated as one shared extra
    bin, which keeps the value symmetric and inside [0, 1].
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError("mass vectors must have matching shapes")
    if a.min() < -1e-12 or b.min() < -1e-12 or a.sum() > 1 + 1e-9 or b.sum() > 1 + 1e-9:
        raise ValueError("inputs must be sub-probability vectors")
    rest = abs((1.0 - a.sum()) - (1.0 - b.sum()))
    return float(0.5 * (np.abs(a - b).sum() + rest))


def tv_distance(histogram: Histogram, exact_masses) -> float:
    """TV between a sample histogram and exact per-bin masses.

    Out-of-box mass on either side enters the distance as an extra bin.
    """
    exact = np.asarray(exact_masses, dtype=float)
    if exact.shape != histogram.counts.shape:
        raise ValueError("exact_masses must match the histogram grid")
    return tv_from_masses(histogram.masses(), exact)


def exact_bin_masses(target, histogram: Histogram, beta=1.0):
    """Exact probability mass of the level-beta density in each bin.

    Plain mixtures at beta = 1 use the closed-form Gaussian cell masses;
    otherwise 1D bins are integrated adaptively and 2D bins with a
    12-point product Gauss-Legendre rule, normalized by the quadrature
    partition value.
    """
    if histogram.d != target.d:
        raise ValueError("histogram and target dimensions differ")
    if isinstance(target, GaussianMixture) and beta == 1.0:
        sigma = math.sqrt(target.sigma2)
        per_axis = []
        for axis in range(target.d):
            e = histogram.edges(axis)
            z = (e[None, :] - target.means[:, axis, None]) / sigma
            per_axis.append(np.diff(ndtr(z), axis=1))
        if target.d == 1:
            return target.weights @ per_axis[0]
        return np.einsum("k,ki,kj->ij", target.weights, per_axis[0], per_axis[1])
    log_z = log_partition_quadrature(target, beta)
    if target.d == 1:
        e = histogram.edges()
        dens = lambda x: math.exp(-beta * float(target.f(x)) - log_z)
        return np.array([
            quad(dens, e[i], e[i + 1], limit=100)[0] for i in range(histogram.bins)
        ])
    nodes, gl_w = np.polynomial.legendre.leggauss(12)
    ex, ey = histogram.edges(0), histogram.edges(1)
    hx, hy = ex[1] - ex[0], ey[1] - ey[0]
    gx = (ex[:-1, None] + hx * (nodes[None, :] + 1.0) / 2.0).ravel()
    gy = (ey[:-1, None] + hy * (nodes[None, :] + 1.0) / 2.0).ravel()
    xx, yy = np.meshgrid(gx, gy, indexing="ij")
    vals = np.exp(-beta * target.f(np.column_stack([xx.ravel(), yy.ravel()])) - log_z)
    vals = vals.reshape(histogram.bins, 12, histogram.bins, 12)
    return np.einsum("iajb,a,b->ij", vals, gl_w, gl_w) * (hx / 2.0) * (hy / 2.0)


def _check_dist(v, name):
    v = np.asarray(v, dtype=float).ravel()
    if np.any(v < 0) or abs(v.sum() - 1.0) > 1e-9:
        raise ValueError(f"{name} must be a probability distribution")
    return v


def chi_sq_divergence(p, q) -> float:
    """chi-square divergence with q in the numerator: sum q_i^2 / p_i - 1.

    Atoms where q puts mass but p does not make the divergence infinite.
    """
    p = _check_dist(p, "p")
    q = _check_dist(q, "q")
    if p.shape != q.shape:
        raise ValueError("p and q must have matching shapes")
    if np.any((p == 0) & (q > 0)):
        return math.inf
    live = p > 0
    return max(float(np.sum(q[live] ** 2 / p[live]) - 1.0), 0.0)


def chi_sq_mixture_check(components, weights, q):
    """Mixture convexity of the chi-square divergence in its first argument.

    Checks ``chi2(sum_i w_i p_i || q) <= sum_i w_i chi2(p_i || q)`` and
    returns (lhs, rhs).
    """
    w = _check_dist(weights, "weights")
    comps = [np.asarray(c, dtype=float) for c in components]
    if len(comps) != w.size:
        raise ValueError("need one weight per component")
    mix = sum(wi * ci for wi, ci in zip(w, comps))
    lhs = chi_sq_divergence(mix, q)
    parts = [chi_sq_divergence(c, q) for c in comps]
    rhs = math.inf if any(math.isinf(t) for t in parts) else float(np.dot(w, parts))
    if lhs > rhs + 1e-9:
        raise BoundViolationError("chi-square mixture convexity", lhs, rhs)
    return lhs, rhs


def kl_divergence(p, q) -> float:
    """KL(p || q) with 0 log 0 = 0 and infinity when q misses mass of p."""
    p = _check_dist(p, "p")
    q = _check_dist(q, "q")
    if p.shape != q.shape:
        raise ValueError("p and q must have matching shapes")
    if np.any((q == 0) & (p > 0)):
        return math.inf
    live = p > 0
    return max(float(np.sum(p[live] * np.log(p[live] / q[live]))), 0.0)


def kl_decomposition_check(w, w_prime, components_p, components_q):
    """Chain-rule upper bound for the KL divergence of two finite mixtures.

    Checks ``KL(sum w_i p_i || sum w'_i q_i) <= KL(w || w') +
    sum_i w_i KL(p_i || q_i)`` and returns (lhs, rhs).
    """
    w = _check_dist(w, "w")
    wp = _check_dist(w_prime, "w_prime")
    ps = [np.asarray(c, dtype=float) for c in components_p]
    qs = [np.asarray(c, dtype=float) for c in components_q]
    if not (len(ps) == len(qs) == w.size == wp.size):
        raise ValueError("need matching weight and component counts")
    mix_p = sum(wi * ci for wi, ci in zip(w, ps))
    mix_q = sum(wi * ci for wi, ci in zip(wp, qs))
    lhs = kl_divergence(mix_p, mix_q)
    rhs = kl_divergence(w, wp)
    for wi, pi, qi in zip(w, ps, qs):
        if wi > 0:
            term = kl_divergence(pi, qi)
            rhs = math.inf if math.isinf(term) else rhs + wi * term
            if math.isinf(rhs):
                break
    if lhs > rhs + 1e-9:
        raise BoundViolationError("KL mixture decomposition", lhs, rhs)
    return lhs, rhs


def mode_occupancy(points, centers, radius):
    """Fraction of points within ``radius`` of each center.

    Points are assigned to the nearest center only, so the fractions sum
    to at most 1; the leftover fraction is returned separately.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    pts, _ = _as_points(points, centers.shape[1])
    if pts.shape[0] == 0:
        raise ValueError("need at least one point")
    if radius <= 0:
        raise ValueError("radius must be positive")
    dist = np.linalg.norm(pts[:, None, :] - centers[None, :, :], axis=2)
    nearest = np.argmin(dist, axis=1)
    within = dist[np.arange(pts.shape[0]), nearest] <= radius
    fractions = np.bincount(nearest[within], minlength=centers.shape[0]) / pts.shape[0]
    return fractions, float(1.0 - fractions.sum())
