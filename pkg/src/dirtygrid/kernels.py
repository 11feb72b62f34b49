"""Inner loops of the entropy quadrature.

Each kernel has a loop implementation (compiled by numba when enabled) and a
vectorised numpy twin. The public wrappers pick one according to
``DIRTYGRID_NUMBA``; pass ``use_numba`` explicitly to override.
"""
import math

import numpy as np

from ._accel import kernel, numba_enabled

_CHUNK = 1 << 15


@kernel
def _mixture_logpdf_loop(y, loc, logw, sigma):
    n = y.shape[0]
    m = loc.shape[0]
    out = np.empty(n)
    inv2v = 0.5 / (sigma * sigma)
    lognorm = -0.5 * math.log(2.0 * math.pi * sigma * sigma)
    for i in range(n):
        best = -np.inf
        for j in range(m):
            d = y[i] - loc[j]
            v = logw[j] - d * d * inv2v
            if v > best:
                best = v
        acc = 0.0
        for j in range(m):
            d = y[i] - loc[j]
            acc += math.exp(logw[j] - d * d * inv2v - best)
        out[i] = best + math.log(acc) + lognorm
    return out


def _mixture_logpdf_numpy(y, loc, logw, sigma):
    out = np.empty(y.shape[0])
    inv2v = 0.5 / (sigma * sigma)
    lognorm = -0.5 * math.log(2.0 * math.pi * sigma * sigma)
    step = max(1, _CHUNK // max(1, loc.shape[0]))
    for start in range(0, y.shape[0], step):
        d = y[start:start + step, None] - loc[None, :]
        v = logw[None, :] - d * d * inv2v
        best = v.max(axis=1)
        out[start:start + step] = best + np.log(np.exp(v - best[:, None]).sum(axis=1)) + lognorm
    return out


def mixture_logpdf(y, loc, logw, sigma, use_numba=None):
    """Natural-log density of ``sum_j exp(logw_j) N(y; loc_j, sigma^2)``."""
    y = np.ascontiguousarray(y, dtype=float)
    loc = np.ascontiguousarray(loc, dtype=float)
    logw = np.ascontiguousarray(logw, dtype=float)
    if use_numba is None:
        use_numba = numba_enabled()
    if use_numba:
        return _mixture_logpdf_loop(y, loc, logw, float(sigma))
    return _mixture_logpdf_numpy(y, loc, logw, float(sigma))


@kernel
def _lattice_density_loop(weights, stride, g):
    n = weights.shape[0]
    k = g.shape[0]
    out = np.zeros((n - 1) * stride + k)
    for i in range(n):
        w = weights[i]
        if w == 0.0:
            continue
        base = i * stride
        for j in range(k):
            out[base + j] += w * g[j]
    return out


def _lattice_density_numpy(weights, stride, g):
    up = np.zeros((weights.shape[0] - 1) * stride + 1)
    up[::stride] = weights
    return np.convolve(up, g)


def lattice_density(weights, stride, g, use_numba=None):
    """Superpose copies of the sampled kernel ``g`` placed every ``stride`` samples."""
    weights = np.ascontiguousarray(weights, dtype=float)
    g = np.ascontiguousarray(g, dtype=float)
    if use_numba is None:
        use_numba = numba_enabled()
    if use_numba:
        return _lattice_density_loop(weights, int(stride), g)
    return _lattice_density_numpy(weights, int(stride), g)


@kernel
def _neg_plogp_sum_loop(p):
    acc = 0.0
    for i in range(p.shape[0]):
        if p[i] > 0.0:
            acc -= p[i] * math.log(p[i])
    return acc


def _neg_plogp_sum_numpy(p):
    q = p[p > 0]
    return float(-(q * np.log(q)).sum())


def neg_plogp_sum(p, use_numba=None):
    """``-sum p ln p`` over the positive entries of ``p`` (nats)."""
    p = np.ascontiguousarray(p, dtype=float)
    if use_numba is None:
        use_numba = numba_enabled()
    if use_numba:
        return _neg_plogp_sum_loop(p)
    return _neg_plogp_sum_numpy(p)
