"""Monte Carlo cross-checks for the quadrature entropies and the analytic
variance and uniformity claims.

The entropy estimator samples ``Y = U + Z`` and averages ``-log2 p(Y)`` under
the exact mixture density, so it is unbiased and shares no code with the
quadrature kernels. Sampling is split into fixed-size blocks keyed by
``(seed, block)``; estimates do not depend on how blocks are distributed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import DiscreteDistribution
from .errors import InsufficientSamples, InvalidParameter

MIN_MC_SAMPLES = 10_000
MIN_KS_SAMPLES = 1_000
BLOCK = 1 << 16
_CHUNK = 1 << 13


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    samples: int
    seed: int

    def within(self, target: float, n_se: float = 3.0) -> bool:
        return abs(self.value - target) <= n_se * self.std_error


def _check_samples(samples, minimum):
    if int(samples) != samples or samples < minimum:
        raise InsufficientSamples(f"need at least {minimum} samples, got {samples}")
    return int(samples)


def _blocks(n):
    return [(b, min(BLOCK, n - b * BLOCK)) for b in range(math.ceil(n / BLOCK))]


def _neglog2_density(y, loc, logw, sigma):
    out = np.empty(y.size)
    lognorm = -0.5 * math.log(2.0 * math.pi * sigma * sigma)
    step = max(1, _CHUNK * 64 // max(1, loc.size))
    for a in range(0, y.size, step):
        v = (y[a:a + step, None] - loc[None, :]) / sigma
        v *= v
        v *= -0.5
        v += logw
        top = v.max(axis=1)
        v -= top[:, None]
        np.exp(v, out=v)
        out[a:a + step] = -(top + np.log(v.sum(axis=1)) + lognorm) / math.log(2.0)
    return out


def mc_entropy(u: DiscreteDistribution, sigma: float, samples: int, seed: int) -> McEstimate:
    """Unbiased estimate of ``h(U + Z)`` in bits with its standard error."""
    n = _check_samples(samples, MIN_MC_SAMPLES)
    if not sigma > 0:
        raise InvalidParameter("sigma must be > 0")
    keep = u.probabilities > 0
    loc = u.locations[keep]
    p = u.probabilities[keep] / u.probabilities[keep].sum()
    logw = np.log(p)
    total = 0.0
    total_sq = 0.0
    for b, size in _blocks(n):
        rng = np.random.default_rng([seed, b])
        y = loc[rng.choice(loc.size, size=size, p=p)] + sigma * rng.standard_normal(size)
        v = _neglog2_density(y, loc, logw, sigma)
        total += v.sum()
        total_sq += (v * v).sum()
    mean = total / n
    var = max(0.0, (total_sq - n * mean * mean) / (n - 1))
    return McEstimate(float(mean), math.sqrt(var / n), n, int(seed))


def mc_variance(sample_fn, extractor, samples: int, seed: int) -> McEstimate:
    """Unbiased sample variance of ``extractor(sample_fn(n, seed))``.

    ``sample_fn(n, seed)`` must return ``n`` symbols deterministically. The
    standard error is the large-sample one, ``sqrt((m4 - v^2 (n-3)/(n-1)) / n)``.
    """
    n = _check_samples(samples, MIN_MC_SAMPLES)
    x = np.asarray(extractor(sample_fn(n, seed)), dtype=float)
    if x.size != n:
        raise InvalidParameter(f"extractor returned {x.size} values for {n} samples")
    c = x - x.mean()
    v = float(c @ c) / (n - 1)
    m4 = float(np.mean(c ** 4))
    se = math.sqrt(max(0.0, m4 - v * v * (n - 3) / (n - 1)) / n)
    return McEstimate(v, se, n, int(seed))


def ks_uniform_test(samples, a: float) -> float:
    """Asymptotic Kolmogorov-Smirnov p-value against ``Unif[0, a]``."""
    x = np.asarray(samples, dtype=float).ravel()
    _check_samples(x.size, MIN_KS_SAMPLES)
    if not a > 0:
        raise InvalidParameter("a must be > 0")
    return float(stats.kstest(x, stats.uniform(loc=0.0, scale=a).cdf, method="asymp").pvalue)


def chi2_uniform_test(labels) -> float:
    """Chi-square p-value that the observed discrete labels are equally likely."""
    lab = np.asarray(labels).ravel()
    _check_samples(lab.size, MIN_KS_SAMPLES)
    _, counts = np.unique(lab, return_counts=True)
    return float(stats.chisquare(counts).pvalue)


def chi2_independence_test(a, b) -> float:
    """Chi-square contingency p-value for independence of two discrete samples."""
    a, b = np.asarray(a).ravel(), np.asarray(b).ravel()
    if a.size != b.size:
        raise InvalidParameter("samples must have equal length")
    _check_samples(a.size, MIN_KS_SAMPLES)
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(table, (ia, ib), 1)
    if min(table.shape) < 2:
        return 1.0
    return float(stats.chi2_contingency(table).pvalue)


def grid_corpus(cases: int, seed: int, max_atoms: int = 64, sigma_range=(0.25, 4.0)):
    """Random ``(DiscreteDistribution, sigma)`` pairs on evenly spaced grids.

    Each case draws up to ``max_atoms`` atoms from a grid of random spacing
    with Dirichlet weights, and ``sigma`` log-uniform in ``sigma_range``.
    """
    rng = np.random.default_rng([seed, 0xC0])
    out = []
    for _ in range(cases):
        m = int(rng.integers(1, max_atoms + 1))
        spacing = float(rng.uniform(0.25, 5.0))
        idx = np.sort(rng.choice(2 * max_atoms, size=m, replace=False))
        p = rng.dirichlet(np.ones(m))
        sigma = float(np.exp(rng.uniform(*np.log(sigma_range))))
        out.append((DiscreteDistribution(idx * spacing, p), sigma))
    return out
