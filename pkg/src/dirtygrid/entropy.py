"""Differential entropy of discrete laws blurred by Gaussian noise.

All values are in bits. For ``h(U + Z)`` with ``U`` discrete and
``Z ~ N(0, sigma^2)`` the density is a Gaussian mixture; it is integrated by
trapezoid rules on a window of ``tail_sigmas`` standard deviations beyond
the extreme atoms, halving the step until two successive estimates agree.

Atoms separated by more than ``2 * tail_sigmas * sigma`` are treated as
independent clusters: ``h = H(cluster masses) + sum_c m_c h_c``. The overlap
neglected there is below the tail mass already dropped by the window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import DiscreteDistribution
from .errors import InvalidParameter, NumericalFailure

LN2 = math.log(2.0)
_GAUSS_CONST = 0.5 * math.log2(2.0 * math.pi * math.e)


@dataclass(frozen=True)
class QuadratureConfig:
    tail_sigmas: float = 8.0
    tolerance_bits: float = 1e-6
    max_refinements: int = 20

    def __post_init__(self):
        if not self.tail_sigmas >= 4:
            raise InvalidParameter("tail_sigmas must be >= 4")
        if not self.tolerance_bits > 0:
            raise InvalidParameter("tolerance_bits must be > 0")
        if self.max_refinements < 1:
            raise InvalidParameter("max_refinements must be >= 1")


DEFAULT_CONFIG = QuadratureConfig()


def gaussian_entropy(sigma: float) -> float:
    """``0.5 * log2(2 pi e sigma^2)``."""
    if not sigma > 0:
        raise InvalidParameter(f"sigma must be > 0, got {sigma!r}")
    return _GAUSS_CONST + math.log2(sigma)


def discrete_entropy(d) -> float:
    """Shannon entropy in bits of a :class:`DiscreteDistribution` or a
    probability vector (zeros allowed)."""
    p = d.probabilities if isinstance(d, DiscreteDistribution) else np.asarray(d, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def _clusters(positions, max_gap):
    """Split sorted positions into runs whose internal gaps are <= max_gap."""
    cuts = np.flatnonzero(np.diff(positions) > max_gap) + 1
    bounds = np.concatenate(([0], cuts, [positions.size]))
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def _check_sigma(sigma):
    if not sigma > 0:
        raise InvalidParameter(f"sigma must be > 0, got {sigma!r}")


def mixture_entropy(u: DiscreteDistribution, sigma: float,
                    cfg: QuadratureConfig | None = None) -> float:
    """``h(U + Z)`` in bits for discrete ``U`` and ``Z ~ N(0, sigma^2)``.

    Raises
    ------
    NumericalFailure
        if the step-halving does not settle within ``cfg.max_refinements``.
    """
    _check_sigma(sigma)
    cfg = cfg or DEFAULT_CONFIG
    keep = u.probabilities > 0
    loc = u.locations[keep]
    p = u.probabilities[keep]
    p = p / p.sum()

    parts = _clusters(loc, 2.0 * cfg.tail_sigmas * sigma)
    if len(parts) == 1:
        return _cluster_entropy(loc, p, sigma, cfg)
    masses = np.array([p[a:b].sum() for a, b in parts])
    total = discrete_entropy(masses)
    for (a, b), m in zip(parts, masses):
        total += m * _cluster_entropy(loc[a:b], p[a:b] / m, sigma, cfg)
    return total


def _cluster_entropy(loc, p, sigma, cfg):
    if loc.size == 1:
        return gaussian_entropy(sigma)
    logw = np.log(p)
    lo = loc[0] - cfg.tail_sigmas * sigma
    hi = loc[-1] + cfg.tail_sigmas * sigma
    n = int(math.ceil((hi - lo) / (sigma / 8.0)))
    h = (hi - lo) / n

    def integrand(y):
        lp = kernels.mixture_logpdf(y, loc, logw, sigma)
        return -np.exp(lp) * lp

    f = integrand(lo + h * np.arange(n + 1))
    inner = f[1:-1].sum()
    ends = 0.5 * (f[0] + f[-1])
    est = h * (inner + ends) / LN2
    gap = math.inf
    for _ in range(cfg.max_refinements):
        mids = integrand(lo + h * (np.arange(n) + 0.5))
        inner += mids.sum()
        h *= 0.5
        n *= 2
        new = h * (inner + ends) / LN2
        gap = abs(new - est)
        est = new
        if gap < cfg.tolerance_bits:
            return float(est)
    raise NumericalFailure(
        f"mixture entropy did not converge in {cfg.max_refinements} refinements",
        estimate=float(est), gap=float(gap))


def lattice_mixture_entropy(weights, spacing: float, sigma: float,
                            cfg: QuadratureConfig | None = None) -> float:
    """``h(U + Z)`` in bits for ``U`` supported on ``{i * spacing}``.

    ``weights[i]`` is ``P(U = i * spacing)`` up to normalisation; zeros are
    allowed. Agrees with :func:`mixture_entropy` but samples the density on a
    grid commensurate with the lattice, so the Gaussian kernel is tabulated
    once per refinement level and superposed instead of re-evaluated.
    """
    _check_sigma(sigma)
    if not spacing > 0:
        raise InvalidParameter("spacing must be > 0")
    cfg = cfg or DEFAULT_CONFIG
    w = np.asarray(weights, dtype=float)
    nz = np.flatnonzero(w > 0)
    if nz.size == 0:
        raise InvalidParameter("weights must have positive mass")
    w = w / w.sum()
    max_gap = 2.0 * cfg.tail_sigmas * sigma / spacing
    parts = _clusters(nz, max_gap)
    if len(parts) == 1:
        a, b = nz[0], nz[-1] + 1
        return _lattice_cluster_entropy(w[a:b], spacing, sigma, cfg)
    total = 0.0
    masses = []
    for a, b in parts:
        lo, hi = nz[a], nz[b - 1] + 1
        m = w[lo:hi].sum()
        masses.append(m)
        total += m * _lattice_cluster_entropy(w[lo:hi] / m, spacing, sigma, cfg)
    return total + discrete_entropy(np.array(masses))


def _lattice_cluster_entropy(w, spacing, sigma, cfg):
    if w.size == 1:
        return gaussian_entropy(sigma)
    stride = max(1, int(math.ceil(8.0 * spacing / sigma)))
    est = None
    gap = math.inf
    for _ in range(cfg.max_refinements + 1):
        h = spacing / stride
        half = int(math.ceil(cfg.tail_sigmas * sigma / h))
        x = h * np.arange(-half, half + 1)
        g = np.exp(-0.5 * (x / sigma) ** 2) / (math.sqrt(2.0 * math.pi) * sigma)
        dens = kernels.lattice_density(w, stride, g)
        new = h * kernels.neg_plogp_sum(dens) / LN2
        if est is not None:
            gap = abs(new - est)
            if gap < cfg.tolerance_bits:
                return float(new)
        est = new
        stride *= 2
    raise NumericalFailure(
        f"lattice mixture entropy did not converge in {cfg.max_refinements} refinements",
        estimate=float(est), gap=float(gap))


def conditional_mixture_entropy(joint, sigma: float,
                                cfg: QuadratureConfig | None = None) -> float:
    """``h(U + Z | T)`` from ``(t, P_{U|T=t}, P(t))`` triples."""
    probs = np.array([pt for _, _, pt in joint], dtype=float)
    if probs.size == 0 or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
        raise InvalidParameter("conditioning probabilities must be >= 0 and sum to 1")
    total = 0.0
    for (_, cond, pt) in joint:
        if pt > 0:
            total += pt * mixture_entropy(cond, sigma, cfg)
    return total
