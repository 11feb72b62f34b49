"""Grid alphabets, discrete distributions and modulo arithmetic."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter

PROB_ATOL = 1e-12
GRID_RTOL = 1e-9


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridAlphabet:
    """Evenly spaced points ``{i * peak / (count - 1)}`` on ``[0, peak]``.

    ``count == 1`` is the singleton ``{0}`` and requires ``peak == 0``.
    """

    peak: float
    count: int

    def __post_init__(self):
        if self.count < 1 or int(self.count) != self.count:
            raise InvalidParameter(f"count must be a positive integer, got {self.count!r}")
        if not (self.peak >= 0 and math.isfinite(self.peak)):
            raise InvalidParameter(f"peak must be finite and >= 0, got {self.peak!r}")
        if self.count == 1 and self.peak != 0:
            raise InvalidParameter("a one-point grid is the singleton {0}; peak must be 0")
        if self.count > 1 and self.peak == 0:
            raise InvalidParameter("a grid with count > 1 needs peak > 0")
        object.__setattr__(self, "count", int(self.count))

    @classmethod
    def from_spacing(cls, spacing: float, count: int) -> "GridAlphabet":
        if count == 1:
            return cls(0.0, 1)
        return cls(spacing * (count - 1), count)

    @property
    def spacing(self) -> float:
        if self.count == 1:
            return 0.0
        return self.peak / (self.count - 1)

    @property
    def points(self) -> np.ndarray:
        if self.count == 1:
            return np.zeros(1)
        pts = np.arange(self.count) * self.peak / (self.count - 1)
        pts[-1] = self.peak
        return pts

    def index_of(self, x, rtol: float = GRID_RTOL):
        """Grid index of ``x`` (scalar or array); raises if any value is off-grid."""
        x = np.asarray(x, dtype=float)
        if self.count == 1:
            ok = np.abs(x) <= rtol
            idx = np.zeros(x.shape, dtype=np.int64)
        else:
            ratio = x / self.spacing
            idx = np.rint(ratio).astype(np.int64)
            ok = (np.abs(ratio - idx) <= rtol) & (idx >= 0) & (idx < self.count)
        if not np.all(ok):
            bad = x[~ok] if x.ndim else x
            raise InvalidParameter(f"value(s) {np.atleast_1d(bad)[:5]} not on {self}")
        return idx if idx.ndim else int(idx)

    def contains(self, x, rtol: float = GRID_RTOL) -> bool:
        try:
            self.index_of(x, rtol)
        except InvalidParameter:
            return False
        return True


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability mass function on finitely many real atoms.

    Locations must be strictly increasing and probabilities must sum to one.
    Use :meth:`from_weights` to merge duplicates and normalise raw weights.
    """

    locations: np.ndarray
    probabilities: np.ndarray = field(repr=False)

    def __post_init__(self):
        loc = _frozen(self.locations)
        prob = _frozen(self.probabilities)
        if loc.size == 0 or loc.shape != prob.shape:
            raise InvalidParameter("need one probability per location and at least one atom")
        if not np.all(np.isfinite(loc)):
            raise InvalidParameter("locations must be finite")
        if np.any(np.diff(loc) <= 0):
            raise InvalidParameter("locations must be strictly increasing")
        if np.any(prob < 0) or abs(prob.sum() - 1.0) > PROB_ATOL:
            raise InvalidParameter(f"probabilities must be >= 0 and sum to 1 (sum={prob.sum()!r})")
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "probabilities", prob)

    @classmethod
    def from_weights(cls, locations, weights) -> "DiscreteDistribution":
        loc = np.asarray(locations, dtype=float).reshape(-1)
        w = np.asarray(weights, dtype=float).reshape(-1)
        if loc.shape != w.shape or loc.size == 0:
            raise InvalidParameter("locations and weights must be non-empty and equally long")
        if np.any(w < 0) or w.sum() <= 0:
            raise InvalidParameter("weights must be nonnegative with a positive total")
        uniq, inv = np.unique(loc, return_inverse=True)
        merged = np.bincount(inv, weights=w)
        keep = merged > 0
        return cls(uniq[keep], merged[keep] / merged[keep].sum())

    @classmethod
    def point_mass(cls, location: float = 0.0) -> "DiscreteDistribution":
        return cls([location], [1.0])

    @classmethod
    def uniform(cls, locations) -> "DiscreteDistribution":
        loc = np.unique(np.asarray(locations, dtype=float))
        return cls(loc, np.full(loc.size, 1.0 / loc.size))

    def __len__(self):
        return self.locations.size

    def __eq__(self, other):
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return (
            self.locations.shape == other.locations.shape
            and np.array_equal(self.locations, other.locations)
            and np.array_equal(self.probabilities, other.probabilities)
        )

    __hash__ = None

    @property
    def atoms(self):
        return list(zip(self.locations.tolist(), self.probabilities.tolist()))

    def mean(self) -> float:
        return float(self.probabilities @ self.locations)

    def variance(self) -> float:
        mu = self.mean()
        return float(self.probabilities @ (self.locations - mu) ** 2)

    def shift(self, c: float) -> "DiscreteDistribution":
        return DiscreteDistribution(self.locations + c, self.probabilities)

    def scale(self, c: float) -> "DiscreteDistribution":
        if c <= 0:
            raise InvalidParameter("scale factor must be positive")
        return DiscreteDistribution(self.locations * c, self.probabilities)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        idx = rng.choice(self.locations.size, size=n, p=self.probabilities)
        return self.locations[idx]


@dataclass(frozen=True)
class DpcParams:
    """Peak-constrained dirty paper channel ``Y = X + S + Z``.

    ``state_grid`` is the declared state alphabet ``G_{B,N}``; only its
    spacing matters downstream, ``B`` and ``N`` are kept as metadata.
    """

    peak_A: float
    sigma: float
    state: DiscreteDistribution
    state_grid: GridAlphabet

    def __post_init__(self):
        if not self.peak_A > 0:
            raise InvalidParameter("peak_A must be > 0")
        if not self.sigma > 0:
            raise InvalidParameter("sigma must be > 0")
        if self.state_grid.count <= 2:
            raise InvalidParameter("the state grid needs N > 2 points")
        if np.any(self.state.locations < 0):
            raise InvalidParameter("state atoms must be nonnegative")
        self.state_grid.index_of(self.state.locations)

    @property
    def B(self) -> float:
        return self.state_grid.peak

    @property
    def N(self) -> int:
        return self.state_grid.count

    @property
    def state_spacing(self) -> float:
        return self.state_grid.spacing


def esdu(a: float, m: int) -> DiscreteDistribution:
    """Uniform law on ``m`` evenly spaced points of ``[0, a]``."""
    if not (a > 0 and math.isfinite(a)):
        raise InvalidParameter(f"a must be > 0, got {a!r}")
    if int(m) != m or m < 2:
        raise InvalidParameter(f"m must be an integer >= 2, got {m!r}")
    pts = GridAlphabet(float(a), int(m)).points
    return DiscreteDistribution(pts, np.full(int(m), 1.0 / m))


def mod_reduce(x, a):
    """``x mod a`` reduced into ``[0, a)``, also for negative ``x``.

    Works elementwise on arrays.
    """
    if not a > 0:
        raise InvalidParameter(f"modulus must be > 0, got {a!r}")
    r = np.mod(x, a)
    # np.mod can round up to exactly a for tiny negative x
    r = np.where(r >= a, r - a, r)
    return float(r) if np.ndim(r) == 0 else r


def quantize(x, a):
    """Split ``x`` into a multiple of ``a`` and the remainder in ``[0, a)``.

    Returns ``(q, e)`` with ``e = mod_reduce(x, a)`` and ``q + e == x`` up to
    rounding.
    """
    e = mod_reduce(x, a)
    q = a * np.rint((np.asarray(x, dtype=float) - e) / a)
    return (float(q), e) if np.ndim(q) == 0 else (q, e)
