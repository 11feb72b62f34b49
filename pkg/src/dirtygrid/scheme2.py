"""Deterministic grid precoder.

With codeword alphabet ``{0, d, ..., (K'-1) d}`` and a state on the ``d``-grid,
the encoder forms ``u = phi(t, s) = (t + (K'-1) s) mod (K' d) + s`` and sends
``x = u - s``. The receiver sees ``y = u + z`` and recovers ``t = u mod K' d``.

Internally every amplitude is an integer multiple of ``d``; the float
interface converts at the boundary so the modular arithmetic is exact.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .bounds import RateValue
from .core import GRID_RTOL, DiscreteDistribution, GridAlphabet
from .entropy import DEFAULT_CONFIG, QuadratureConfig, gaussian_entropy, lattice_mixture_entropy
from .errors import InvalidParameter


@dataclass(frozen=True)
class Scheme2Params:
    """Peak ``A`` and state-grid spacing ``delta``.

    ``K' = floor(A / delta) + 1`` codeword levels fit under the peak;
    ``A' = (K'-1) delta <= A``. ``A = 0`` gives the one-level code ``{0}``.
    """

    peak_A: float
    delta: float

    def __post_init__(self):
        if not (self.peak_A >= 0 and math.isfinite(self.peak_A)):
            raise InvalidParameter("peak_A must be finite and >= 0")
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise InvalidParameter("delta must be finite and > 0")

    @property
    def k_prime(self) -> int:
        # grid tolerance so that A = m * delta is not floored to m - 1
        return int(math.floor(self.peak_A / self.delta * (1.0 + GRID_RTOL))) + 1

    @property
    def a_prime(self) -> float:
        return (self.k_prime - 1) * self.delta

    @property
    def a_prime_delta(self) -> float:
        return self.k_prime * self.delta

    @property
    def t_grid(self) -> GridAlphabet:
        return GridAlphabet.from_spacing(self.delta, self.k_prime)

    def t_index(self, t):
        return self.t_grid.index_of(t)

    def s_index(self, s):
        s = np.asarray(s, dtype=float)
        ratio = s / self.delta
        idx = np.rint(ratio).astype(np.int64)
        if np.any(np.abs(ratio - idx) > GRID_RTOL) or np.any(idx < 0):
            raise InvalidParameter(f"state value(s) not on the {self.delta}-grid: {np.atleast_1d(s)[:5]}")
        return idx if idx.ndim else int(idx)


def _phi_idx(t_idx, s_idx, k):
    return np.mod(t_idx + (k - 1) * s_idx, k) + s_idx


def map_phi(t, s, params: Scheme2Params):
    u = _phi_idx(params.t_index(t), params.s_index(s), params.k_prime) * params.delta
    return float(u) if np.ndim(u) == 0 else u


def recover_t(u, params: Scheme2Params):
    """``u mod (K' delta)``, which inverts :func:`map_phi` in its first argument."""
    t = np.mod(params.s_index(u), params.k_prime) * params.delta
    return float(t) if np.ndim(t) == 0 else t


def encode(t, s, params: Scheme2Params):
    x = np.mod(params.t_index(t) - params.s_index(s), params.k_prime) * params.delta
    return float(x) if np.ndim(x) == 0 else x


def _lattice_dist(idx, prob, spacing):
    w = np.bincount(idx, weights=prob)
    nz = np.flatnonzero(w > 0)
    return DiscreteDistribution(nz * spacing, w[nz] / w[nz].sum())


@dataclass(frozen=True, eq=False)
class PrecodedJoint:
    """Exact joint law of ``(T, S, U, X)`` for independent ``T`` and ``S``.

    ``table`` rows are ``(t_idx, s_idx, u_idx, x_idx, probability)`` in units
    of ``params.delta``, one per support pair.
    """

    params: Scheme2Params
    t_dist: DiscreteDistribution
    s_dist: DiscreteDistribution
    t_idx: np.ndarray
    s_idx: np.ndarray
    u_idx: np.ndarray
    x_idx: np.ndarray
    prob: np.ndarray

    @property
    def delta(self):
        return self.params.delta

    @property
    def u_dist(self) -> DiscreteDistribution:
        return _lattice_dist(self.u_idx, self.prob, self.delta)

    @property
    def x_dist(self) -> DiscreteDistribution:
        return _lattice_dist(self.x_idx, self.prob, self.delta)

    @property
    def u_joint(self):
        """List of ``(t, u, probability)`` with distinct ``(t, u)``."""
        key = self.t_idx * (self.u_idx.max() + 1) + self.u_idx
        uniq, inv = np.unique(key, return_inverse=True)
        p = np.bincount(inv, weights=self.prob)
        span = self.u_idx.max() + 1
        return [((k // span) * self.delta, (k % span) * self.delta, float(pk))
                for k, pk in zip(uniq.tolist(), p.tolist())]

    def conditionals(self):
        """``(t, P_{U|T=t}, P(t))`` triples."""
        out = []
        for ti in np.unique(self.t_idx):
            m = self.t_idx == ti
            pt = self.prob[m].sum()
            out.append((ti * self.delta, _lattice_dist(self.u_idx[m], self.prob[m] / pt, self.delta), float(pt)))
        return out

    def x_given_s(self):
        """``{s: P_{X|S=s}}`` for every state in the support."""
        out = {}
        for si in np.unique(self.s_idx):
            m = self.s_idx == si
            out[si * self.delta] = _lattice_dist(self.x_idx[m], self.prob[m] / self.prob[m].sum(), self.delta)
        return out

    def entropy_u(self, sigma, cfg=None):
        """``h(U + Z)``."""
        return lattice_mixture_entropy(np.bincount(self.u_idx, weights=self.prob), self.delta, sigma, cfg)

    def entropy_x(self, sigma, cfg=None):
        """``h(X + Z)``."""
        return lattice_mixture_entropy(np.bincount(self.x_idx, weights=self.prob), self.delta, sigma, cfg)

    def conditional_entropy_u(self, sigma, cfg=None):
        """``h(U + Z | T)``.

        Given ``T = t`` every ``u`` lies on ``t + K' delta Z``, so each
        conditional law is handled on that coarser lattice; identical
        conditional laws are integrated once.
        """
        cfg = cfg or DEFAULT_CONFIG
        k = self.params.k_prime
        coarse = (self.u_idx - self.t_idx) // k
        t_vals, t_pos = np.unique(self.t_idx, return_inverse=True)
        rows = np.zeros((t_vals.size, int(coarse.max()) + 1))
        np.add.at(rows, (t_pos, coarse), self.prob)
        pt = rows.sum(axis=1)
        rows = rows / pt[:, None]
        spacing = k * self.delta
        if spacing > 2.0 * cfg.tail_sigmas * sigma:
            # atoms never share a window: h = h(Z) + H(U | T = t)
            with np.errstate(divide="ignore", invalid="ignore"):
                hrow = -np.where(rows > 0, rows * np.log2(rows), 0.0).sum(axis=1)
            return float(gaussian_entropy(sigma) + pt @ hrow)
        cache = {}
        total = 0.0
        for row, p in zip(rows, pt):
            key = row.tobytes()
            if key not in cache:
                cache[key] = lattice_mixture_entropy(row, spacing, sigma, cfg)
            total += p * cache[key]
        return total

    def mutual_information(self, sigma, cfg=None) -> float:
        """``I(T; U + Z) = h(U + Z) - h(U + Z | T)`` in bits (unclamped)."""
        return self.entropy_u(sigma, cfg) - self.conditional_entropy_u(sigma, cfg)

    def rows(self):
        d = self.delta
        for ti, si, ui, xi, p in zip(self.t_idx.tolist(), self.s_idx.tolist(), self.u_idx.tolist(),
                                     self.x_idx.tolist(), self.prob.tolist()):
            yield ti * d, si * d, ui * d, xi * d, p

    def to_csv(self, path=None):
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("t", "s", "u", "x", "probability"))
        for row in self.rows():
            writer.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return None


def build_joint(t_dist: DiscreteDistribution, s_dist: DiscreteDistribution,
                params: Scheme2Params) -> PrecodedJoint:
    """Enumerate every ``(t, s)`` support pair of independent ``T`` and ``S``."""
    ti = params.t_index(t_dist.locations)
    si = params.s_index(s_dist.locations)
    ti = np.atleast_1d(ti)
    si = np.atleast_1d(si)
    tt, ss = np.meshgrid(ti, si, indexing="ij")
    pp = np.outer(t_dist.probabilities, s_dist.probabilities)
    tt, ss, pp = tt.ravel(), ss.ravel(), pp.ravel()
    keep = pp > 0
    tt, ss, pp = tt[keep], ss[keep], pp[keep]
    k = params.k_prime
    u = _phi_idx(tt, ss, k)
    return PrecodedJoint(params, t_dist, s_dist, tt, ss, u, u - ss, pp)


def rate_r2(t_dist: DiscreteDistribution, s_dist: DiscreteDistribution, sigma: float,
            params: Scheme2Params, cfg: QuadratureConfig | None = None) -> RateValue:
    """Achievable rate ``I(T; Y) = h(U + Z) - h(U + Z | T)``."""
    if not sigma > 0:
        raise InvalidParameter("sigma must be > 0")
    return RateValue(build_joint(t_dist, s_dist, params).mutual_information(sigma, cfg))


def esdu_on_grid(count: int, spacing: float) -> DiscreteDistribution:
    """Uniform law on ``{0, spacing, ..., (count-1) spacing}``; ``count = 1`` is ``{0}``."""
    return DiscreteDistribution.uniform(GridAlphabet.from_spacing(spacing, count).points)

