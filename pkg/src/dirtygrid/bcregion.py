"""Two-user peak-constrained broadcast channel built on the grid precoder.

User 1 (weaker noise) carries ``T``; user 2's codeword plays the role of the
state ``S`` that the transmitter pre-cancels. The channel input is
``X_BC = X + S`` with ``X = phi(T, S) - S``. Rate pairs::

    R1 = I(T; Y1)            = h(U + Z1) - h(U + Z1 | T)
    R2 = I(S; Y2)            = h(U + Z2) - h(X + Z2)

the second using ``U = X + S`` with ``X`` independent of ``S``.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import RateValue, state_free_ub
from .core import DiscreteDistribution
from .entropy import QuadratureConfig
from .errors import ConsistencyFailure, InvalidParameter
from .scheme2 import Scheme2Params, build_joint, esdu_on_grid

STATE_RULES = ("subset", "full")
REGION_COLUMNS = ("r1_bits", "r2_bits", "delta0", "K", "K1", "is_hull_vertex")


@dataclass(frozen=True)
class BcParams:
    """Peak ``P`` and noise levels with unit gains; user 1 is the stronger one."""

    peak_P: float
    sigma1: float
    sigma2: float

    def __post_init__(self):
        for name in ("peak_P", "sigma1", "sigma2"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise InvalidParameter(f"{name} must be finite and > 0")
        if self.sigma1 > self.sigma2:
            raise InvalidParameter("sigma1 must not exceed sigma2")


def grid_size(peak: float, delta0: float) -> int:
    """``K = max{2, ceil(P / delta0)}``."""
    if not delta0 > 0:
        raise InvalidParameter("delta0 must be > 0")
    return max(2, math.ceil(peak / delta0))


@dataclass(frozen=True)
class SweepSetting:
    """One point of the parameter sweep.

    ``T ~ ESDU((K1-1) D, K1)`` with ``D = P/(K-1)``; ``S`` is uniform over
    ``n_states`` points of the ``D``-grid on ``[0, P - (K1-1) D]``, spread as
    evenly as the grid allows and always containing both end points.
    ``n_states = K - K1 + 1`` is the whole grid.
    """

    delta0: float
    K: int
    K1: int
    n_states: int
    peak_P: float

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 2:
            raise InvalidParameter("K must be an integer >= 2")
        if not 1 <= self.K1 <= self.K:
            raise InvalidParameter("K1 must lie in [1, K]")
        top = self.K - self.K1
        lo = 1 if top == 0 else 2
        if not lo <= self.n_states <= top + 1:
            raise InvalidParameter(f"n_states must lie in [{lo}, {top + 1}] for K={self.K}, K1={self.K1}")

    @property
    def delta(self) -> float:
        return self.peak_P / (self.K - 1)

    @property
    def key(self):
        return (self.delta0, self.K, self.K1, self.n_states)

    def state_indices(self) -> np.ndarray:
        top = self.K - self.K1
        if self.n_states == 1:
            return np.zeros(1, dtype=np.int64)
        j = np.arange(self.n_states, dtype=np.int64)
        return (j * top) // (self.n_states - 1)

    @property
    def params(self) -> Scheme2Params:
        return Scheme2Params((self.K1 - 1) * self.delta, self.delta)

    @property
    def t_dist(self) -> DiscreteDistribution:
        return esdu_on_grid(self.K1, self.delta)

    @property
    def s_dist(self) -> DiscreteDistribution:
        return DiscreteDistribution.uniform(self.state_indices() * self.delta)


@dataclass(frozen=True)
class RatePoint:
    r1: float
    r2: float
    setting: SweepSetting | None = None

    @property
    def xy(self):
        return (self.r1, self.r2)


def settings_for(bc: BcParams, delta0: float, state_rule: str = "subset"):
    """All sweep settings for one reference spacing."""
    if state_rule not in STATE_RULES:
        raise InvalidParameter(f"state_rule must be one of {STATE_RULES}")
    K = grid_size(bc.peak_P, delta0)
    out = []
    for k1 in range(1, K + 1):
        top = K - k1
        if state_rule == "full" or top == 0:
            counts = [top + 1]
        else:
            counts = range(2, top + 2)
        out.extend(SweepSetting(float(delta0), K, k1, n, bc.peak_P) for n in counts)
    return out


def rate_pair(setting: SweepSetting, bc: BcParams, cfg: QuadratureConfig | None = None) -> RatePoint:
    joint = build_joint(setting.t_dist, setting.s_dist, setting.params)
    r1 = joint.mutual_information(bc.sigma1, cfg) if setting.K1 > 1 else 0.0
    r2 = joint.entropy_u(bc.sigma2, cfg) - joint.entropy_x(bc.sigma2, cfg) if setting.n_states > 1 else 0.0
    return RatePoint(RateValue(r1).clamped_bits, RateValue(r2).clamped_bits, setting)


def _eval_chunk(args):
    settings, bc, cfg = args
    return [rate_pair(s, bc, cfg) for s in settings]


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> list[tuple[float, float]]:
    """Upper-right hull of ``points`` plus ``(0,0)`` and both axis intercepts.

    Returns vertices ordered by decreasing ``R2``: ``(0, R2max)``, the Pareto
    frontier, ``(R1max, 0)`` and finally ``(0, 0)``. Collinear points are
    dropped.
    """
    pts = [tuple(map(float, p.xy if isinstance(p, RatePoint) else p)) for p in points]
    r1max = max((p[0] for p in pts), default=0.0)
    r2max = max((p[1] for p in pts), default=0.0)
    pts = sorted(set(pts) | {(0.0, 0.0), (r1max, 0.0), (0.0, r2max)})
    if len(pts) <= 2:
        return sorted(pts, key=lambda p: (-p[1], -p[0]))
    # Andrew's monotone chain; the upper chain runs from (0, r2max) rightwards
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    upper.reverse()
    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    # counter-clockwise ring, starting at the leftmost-lowest point (0, 0)
    ring = lower[:-1] + upper[::-1][:-1]
    ring = ring[::-1]  # clockwise: (0,0) -> (0, r2max) -> ... -> (r1max, 0)
    start = ring.index((0.0, r2max)) if (0.0, r2max) in ring else 0
    return ring[start:] + ring[:start]


@dataclass(frozen=True, eq=False)
class RateRegion:
    points: list = field(default_factory=list)
    hull: list = field(default_factory=list)

    def hull_set(self):
        return set(self.hull)

    def contains(self, pt, slack: float = 1e-9) -> bool:
        """True if ``pt`` lies inside or on the hull (within ``slack``)."""
        h = self.hull
        if len(h) == 1:
            return math.hypot(pt[0] - h[0][0], pt[1] - h[0][1]) <= slack
        if len(h) == 2:
            (a, b), seg = h, math.dist(h[0], h[1])
            along = ((pt[0] - a[0]) * (b[0] - a[0]) + (pt[1] - a[1]) * (b[1] - a[1])) / seg
            return abs(_cross(a, b, pt)) / seg <= slack and -slack <= along <= seg + slack
        n = len(h)
        for i in range(n):
            a, b = h[i], h[(i + 1) % n]
            # clockwise ring: interior is to the right of every edge
            seg = math.dist(a, b)
            if seg == 0:
                continue
            if _cross(a, b, pt) / seg > slack:
                return False
        return True

    def boundary_distance(self, pt) -> float:
        """Euclidean distance from ``pt`` to the nearest hull edge."""
        h = self.hull
        if len(h) == 1:
            return math.dist(pt, h[0])
        best = math.inf
        for i in range(len(h)):
            a, b = np.asarray(h[i]), np.asarray(h[(i + 1) % len(h)])
            ab = b - a
            L = float(ab @ ab)
            f = 0.0 if L == 0 else min(1.0, max(0.0, float((np.asarray(pt) - a) @ ab) / L))
            best = min(best, math.dist(pt, a + f * ab))
        return best

    def to_csv(self, path=None):
        hs = self.hull_set()
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REGION_COLUMNS)
        for p in self.points:
            s = p.setting
            meta = [repr(s.delta0), s.K, s.K1] if s is not None else ["", "", ""]
            writer.writerow([repr(p.r1), repr(p.r2), *meta, int(p.xy in hs)])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return None


def sweep(bc: BcParams, delta0_list, cfg: QuadratureConfig | None = None,
          workers: int = 1, state_rule: str = "subset") -> RateRegion:
    """Evaluate every setting for every ``delta0`` and take the hull.

    Results are sorted by setting key before the hull is built, so the
    region does not depend on ``workers``.
    """
    delta0_list = list(delta0_list)
    if not delta0_list:
        raise InvalidParameter("delta0_list must be nonempty")
    settings = []
    for d0 in delta0_list:
        settings.extend(settings_for(bc, d0, state_rule))
    if workers <= 1:
        points = _eval_chunk((settings, bc, cfg))
    else:
        chunks = [settings[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            points = [p for part in ex.map(_eval_chunk, [(c, bc, cfg) for c in chunks]) for p in part]
    points.sort(key=lambda p: p.setting.key)
    return RateRegion(points, convex_hull(points))


@dataclass(frozen=True)
class OuterBound:
    """``R1 <= c1``, ``R2 <= c2`` and ``R1 + R2 <= c_sum``."""

    c1: float
    c2: float
    c_sum: float

    def violations(self, pt, slack: float = 1e-6):
        r1, r2 = pt
        out = []
        if r1 > self.c1 + slack:
            out.append("R1")
        if r2 > self.c2 + slack:
            out.append("R2")
        if r1 + r2 > self.c_sum + slack:
            out.append("R1+R2")
        return out


def simple_outer_bound(bc: BcParams) -> OuterBound:
    c1 = state_free_ub(bc.peak_P, bc.sigma1).raw_bits
    c2 = state_free_ub(bc.peak_P, bc.sigma2).raw_bits
    return OuterBound(c1, c2, c1)


def check_inner_inside_outer(region: RateRegion, bc: BcParams, slack: float = 1e-6) -> dict:
    """Every hull vertex must satisfy the simple outer bound.

    Returns a report dict; raises :class:`ConsistencyFailure` carrying the
    offending vertices otherwise.
    """
    ob = simple_outer_bound(bc)
    bad = []
    for v in region.hull:
        which = ob.violations(v, slack)
        if which:
            bad.append({"vertex": list(v), "violated": which})
    report = {"checked": len(region.hull), "violations": bad,
              "outer_bound": {"R1": ob.c1, "R2": ob.c2, "R1+R2": ob.c_sum}}
    if bad:
        raise ConsistencyFailure(f"{len(bad)} hull vertex(es) outside the outer bound", offending=bad)
    return report
