"""Symbol-level model of the dithered modulo precoder on a K-point grid.

Transmitter::

    x  = [t - q(alpha s + w) - w'] mod (A + D),   D = A / (K - 1)

where ``q`` quantises to multiples of ``D``, ``w ~ Unif[0, A + D)`` and
``w'`` is a uniform grid dither shared with the receiver. Receiver::

    y' = [alpha y + w + w'] mod (A + D) = [t + w0 + (alpha - 1) x + alpha z] mod (A + D)

with ``w0 = (alpha s + w) mod D``. No decoder is modelled.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .core import DiscreteDistribution, GridAlphabet, mod_reduce, quantize
from .errors import InvalidParameter

BLOCK = 1 << 16
CSV_COLUMNS = ("t", "s", "w", "w_prime", "x", "z", "y", "y_prime", "w0", "z_tilde")


@dataclass(frozen=True)
class Scheme1Params:
    peak_A: float
    K: int
    alpha: float
    sigma: float

    def __post_init__(self):
        if not self.peak_A > 0:
            raise InvalidParameter("peak_A must be > 0")
        if int(self.K) != self.K or self.K < 2:
            raise InvalidParameter("K must be an integer >= 2")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidParameter("alpha must lie in [0, 1]")
        if not self.sigma > 0:
            raise InvalidParameter("sigma must be > 0")

    @property
    def delta(self) -> float:
        return self.peak_A / (self.K - 1)

    @property
    def a_delta(self) -> float:
        return self.peak_A + self.delta

    @property
    def grid(self) -> GridAlphabet:
        return GridAlphabet(self.peak_A, self.K)


def _encode_idx(t_idx, s, w, wp_idx, p: Scheme1Params):
    q, _ = quantize(p.alpha * np.asarray(s, dtype=float) + w, p.delta)
    q_idx = np.rint(np.asarray(q) / p.delta).astype(np.int64)
    return np.mod(t_idx - q_idx - wp_idx, p.K)


def encode(t, s, w, w_prime, params: Scheme1Params):
    """Transmitted amplitude; lies on the K-point grid of ``[0, A]``.

    Raises :class:`InvalidParameter` if ``t`` or ``w_prime`` is off-grid,
    ``w`` is outside ``[0, A + D)`` or ``s`` is negative.
    """
    grid = params.grid
    t_idx = grid.index_of(t)
    wp_idx = grid.index_of(w_prime)
    w = np.asarray(w, dtype=float)
    if np.any(w < 0) or np.any(w >= params.a_delta):
        raise InvalidParameter("dither w must lie in [0, A + D)")
    if np.any(np.asarray(s) < 0):
        raise InvalidParameter("state must be nonnegative")
    x = grid.points[_encode_idx(t_idx, s, w, wp_idx, params)]
    return float(x) if np.ndim(x) == 0 else x


def receive(y, w, w_prime, params: Scheme1Params):
    """Receiver statistic ``[alpha y + w + w'] mod (A + D)``."""
    return mod_reduce(params.alpha * np.asarray(y, dtype=float) + w + w_prime, params.a_delta)


def effective_noise(t, s, w, w_prime, z, params: Scheme1Params):
    """Return ``(w0, z_tilde)`` with ``z_tilde = w0 + (alpha-1) x + alpha z``."""
    x = encode(t, s, w, w_prime, params)
    w0 = mod_reduce(params.alpha * np.asarray(s, dtype=float) + w, params.delta)
    z_tilde = w0 + (params.alpha - 1.0) * np.asarray(x) + params.alpha * np.asarray(z, dtype=float)
    if np.ndim(z_tilde) == 0:
        return float(w0), float(z_tilde)
    return w0, z_tilde


@dataclass(frozen=True, eq=False)
class Scheme1Samples:
    """Column arrays of simulated symbols."""

    t: np.ndarray
    s: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray
    x: np.ndarray
    z: np.ndarray
    y: np.ndarray
    y_prime: np.ndarray
    w0: np.ndarray
    z_tilde: np.ndarray

    def __len__(self):
        return self.t.size

    def columns(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_csv(self, path=None) -> str | None:
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        cols = [getattr(self, c) for c in CSV_COLUMNS]
        for row in zip(*cols):
            writer.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return None


def _simulate_block(params: Scheme1Params, state: DiscreteDistribution, seed: int,
                    block: int, n: int):
    rng = np.random.default_rng([seed, block])
    grid_pts = params.grid.points
    t_idx = rng.integers(0, params.K, size=n)
    wp_idx = rng.integers(0, params.K, size=n)
    w = rng.random(n) * params.a_delta
    s = state.sample(rng, n)
    z = rng.standard_normal(n) * params.sigma
    x = grid_pts[_encode_idx(t_idx, s, w, wp_idx, params)]
    t = grid_pts[t_idx]
    wp = grid_pts[wp_idx]
    y = x + s + z
    y_prime = receive(y, w, wp, params)
    w0 = mod_reduce(params.alpha * s + w, params.delta)
    z_tilde = w0 + (params.alpha - 1.0) * x + params.alpha * z
    return t, s, w, wp, x, z, y, y_prime, w0, z_tilde


def _run_blocks(args):
    params, state, seed, blocks, n_total = args
    out = []
    for b in blocks:
        size = min(BLOCK, n_total - b * BLOCK)
        out.append(_simulate_block(params, state, seed, b, size))
    return out


def simulate(params: Scheme1Params, state_dist: DiscreteDistribution, n: int, seed: int,
             workers: int = 1) -> Scheme1Samples:
    """Draw ``n`` i.i.d. symbols.

    ``T, W' ~ ESDU(A, K)``, ``W ~ Unif[0, A + D)``, ``S ~ state_dist`` and
    ``Z ~ N(0, sigma^2)``. Randomness is keyed on ``(seed, block index)`` with
    fixed-size blocks, so the output does not depend on ``workers``.
    """
    if int(n) != n or n < 1:
        raise InvalidParameter("n must be a positive integer")
    n = int(n)
    n_blocks = math.ceil(n / BLOCK)
    if workers <= 1 or n_blocks == 1:
        parts = _run_blocks((params, state_dist, seed, range(n_blocks), n))
    else:
        shards = [range(i, n_blocks, workers) for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_blocks, [(params, state_dist, seed, sh, n) for sh in shards]))
        by_block = {}
        for sh, res in zip(shards, results):
            by_block.update(zip(sh, res))
        parts = [by_block[b] for b in range(n_blocks)]
    cols = [np.concatenate(c) for c in zip(*parts)]
    return Scheme1Samples(*cols)
