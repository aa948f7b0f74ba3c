"""The logistic family g_a(y) = a*y*(1-y): lap counts, entropy, interval
spanning growth.

Lap counting iterates exact closed-form preimages of the critical point 1/2
instead of sampling orbits; sampling undercounts laps near tangencies.  A
preimage exists when the discriminant 1 - 4t/a is nonnegative, and the only
numerically delicate case is a near-tangency, which raises a certification
error rather than guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CertificationError, InputError

N_MAX_CAP = 22
_TANGENT_EXACT = 1e-13
_TANGENT_AMBIGUOUS = 1e-10
_DEDUP_SPACING = 1e-11


@dataclass(frozen=True)
class LogisticMap:
    a: float

    def __post_init__(self):
        if not (0.0 <= self.a <= 4.0):
            raise InputError("logistic parameter must lie in [0, 4]")

    def __call__(self, y):
        return self.a * y * (1.0 - y)

    def orbit(self, y, n):
        out = [y]
        for _ in range(n):
            y = self(y)
            out.append(y)
        return out


@dataclass(frozen=True)
class LapTable:
    """laps[k] = number of maximal monotone pieces of the (k+1)-st iterate."""

    a: float
    laps: tuple

    def __post_init__(self):
        laps = tuple(int(v) for v in self.laps)
        object.__setattr__(self, "laps", laps)
        if laps and laps[0] > 2:
            raise InputError("first iterate of a quadratic has at most 2 laps")
        if any(laps[i + 1] < laps[i] for i in range(len(laps) - 1)):
            raise InputError("lap counts must be nondecreasing")
        for m in range(1, len(laps) + 1):
            for n in range(1, len(laps) + 1 - m):
                if laps[m + n - 1] > laps[m - 1] * laps[n - 1]:
                    raise InputError("lap counts must be submultiplicative")

    def lap(self, n):
        return self.laps[n - 1]


def _preimages(a, targets):
    """All solutions of a*y*(1-y) = t in (0, 1) for each t, with tangency
    certification on the discriminant."""
    if a <= 0:
        return np.empty(0)
    t = np.asarray(targets, dtype=float)
    disc = 1.0 - 4.0 * t / a
    bad = (disc > _TANGENT_EXACT) & (disc < _TANGENT_AMBIGUOUS)
    if bad.any():
        i = int(np.argmax(bad))
        raise CertificationError(
            "near-tangent preimage: discriminant inside the ambiguous band",
            detail=(float(t[i]), float(disc[i])))
    tangent = np.abs(disc) <= _TANGENT_EXACT
    regular = disc >= _TANGENT_AMBIGUOUS
    roots = [np.full(int(tangent.sum()), 0.5)]
    if regular.any():
        r = 0.5 * np.sqrt(disc[regular])
        roots.append(0.5 - r)
        roots.append(0.5 + r)
    pts = np.concatenate(roots) if roots else np.empty(0)
    return pts[(pts > 0.0) & (pts < 1.0)]


def turning_points(map_: LogisticMap, n):
    """Sorted turning points of the n-th iterate with their first level k
    (smallest k with g^k(point) = 1/2), as (points, levels)."""
    if n < 1 or n > N_MAX_CAP:
        raise InputError(f"need 1 <= n <= {N_MAX_CAP}")
    pts_all = []
    lvl_all = []
    current = np.array([0.5])
    pts_all.append(current)
    lvl_all.append(np.zeros(1, dtype=int))
    for k in range(1, n):
        current = _preimages(map_.a, current)
        if current.size == 0:
            break
        pts_all.append(current)
        lvl_all.append(np.full(current.size, k, dtype=int))
    pts = np.concatenate(pts_all)
    lvls = np.concatenate(lvl_all)
    order = np.argsort(pts, kind="stable")
    pts, lvls = pts[order], lvls[order]
    if pts.size:
        keep = np.empty(pts.size, dtype=bool)
        keep[0] = True
        keep[1:] = np.diff(pts) > _DEDUP_SPACING
        # a deduped point keeps its smallest level
        group = np.cumsum(keep) - 1
        first_lvl = np.full(int(group[-1]) + 1, np.iinfo(np.int64).max)
        np.minimum.at(first_lvl, group, lvls)
        pts = pts[keep]
        lvls = first_lvl
    return pts, lvls


def lap_number(map_: LogisticMap, n):
    """Exact lap count of the n-th iterate: 1 + number of interior turning
    points of g, g^2, .., g^n (preimages of 1/2 of depth < n)."""
    pts, _ = turning_points(map_, n)
    return 1 + int(pts.size)


def lap_table(map_: LogisticMap, n_max):
    pts, lvls = turning_points(map_, n_max)
    laps = []
    for n in range(1, n_max + 1):
        laps.append(1 + int((lvls < n).sum()))
    return LapTable(map_.a, tuple(laps))


@dataclass(frozen=True)
class EntropyFit:
    estimate: float
    err: float
    laps: tuple
    n_max: int
    window: tuple

    def to_json(self):
        return {"estimate": self.estimate, "err": self.err, "n_max": self.n_max,
                "window": list(self.window), "laps": list(self.laps)}


def _slope(ns, logs):
    ns = np.asarray(ns, dtype=float)
    logs = np.asarray(logs, dtype=float)
    nbar = ns.mean()
    denom = ((ns - nbar) ** 2).sum()
    return float(((ns - nbar) * (logs - logs.mean())).sum() / denom)


def logistic_entropy(map_: LogisticMap, n_max=14):
    """Topological entropy estimate from lap growth.

    Least-squares slope of log laps over the final third of the table; the
    spread of slopes over neighboring window starts doubles as the error bar
    (the true limit is subadditive and approached from one side).
    """
    if n_max < 6:
        raise InputError("n_max must be >= 6")
    table = lap_table(map_, n_max)
    logs = [math.log(v) for v in table.laps]
    ns = list(range(1, n_max + 1))
    n0 = max(1, (2 * n_max) // 3)
    slopes = []
    for start in (n0 - 1, n0, n0 + 1):
        if 1 <= start <= n_max - 2:
            slopes.append(_slope(ns[start - 1:], logs[start - 1:]))
    est = _slope(ns[n0 - 1:], logs[n0 - 1:])
    err = max(1e-4, (max(slopes) - min(slopes)) / 2.0) if len(slopes) > 1 else 1e-4
    return EntropyFit(est, err, table.laps, n_max, (n0, n_max))


@dataclass(frozen=True)
class ScanReport:
    entries: tuple        # rows (a, estimate, err)
    violations: tuple     # rows (a_i, a_next, drop)
    slack: float

    @property
    def clean(self):
        return not self.violations

    def to_json(self):
        return {
            "slack": self.slack,
            "clean": self.clean,
            "entries": [{"a": a, "h": h, "err": e} for (a, h, e) in self.entries],
            "violations": [{"a": a, "a_next": b, "drop": d}
                           for (a, b, d) in self.violations],
        }


def entropy_monotonicity_scan(grid, n_max=14, slack=0.02, estimates=None):
    """Flag adjacent grid pairs where the entropy estimate drops by more
    than `slack`.  `estimates` lets a harness inject perturbed values."""
    grid = [float(a) for a in grid]
    if any(not (0.0 <= a <= 4.0) for a in grid):
        raise InputError("grid must lie in [0, 4]")
    if sorted(grid) != grid:
        raise InputError("grid must be increasing")
    entries = []
    for i, a in enumerate(grid):
        if estimates is not None:
            h, err = float(estimates[i]), 0.0
        else:
            fit = logistic_entropy(LogisticMap(a), n_max)
            h, err = fit.estimate, fit.err
        entries.append((a, h, err))
    violations = []
    for (a1, h1, _), (a2, h2, _) in zip(entries, entries[1:]):
        if h1 > h2 + slack:
            violations.append((a1, a2, h1 - h2))
    return ScanReport(tuple(entries), tuple(violations), slack)


@dataclass(frozen=True)
class IntervalEntropy:
    estimate: float
    counts: tuple
    n: int
    epsilon: float
    window: tuple

    def to_json(self):
        return {"estimate": self.estimate, "n": self.n, "epsilon": self.epsilon,
                "window": list(self.window), "counts": list(self.counts)}


def interval_entropy(map_: LogisticMap, sub, n=14, epsilon=1.0 / 256.0):
    """Spanning growth of a subinterval: the entropy the interval carries.

    For each k <= n the interval splits at the turning points of iterates
    below k; on each joint-monotone piece every iterate is monotone, so the
    greedy (k, eps)-spanning count of the piece is the ceiling of its largest
    iterate variation over 2*eps.  The estimate is the least-squares slope of
    log counts over the final third, which cancels the 1/eps offset that a
    raw (1/n) log r_n would carry.
    """
    alpha, beta = float(sub[0]), float(sub[1])
    if not (0.0 <= alpha < beta <= 1.0):
        raise InputError("need a non-degenerate subinterval of [0, 1]")
    if n < 6:
        raise InputError("n must be >= 6")
    pts, lvls = turning_points(map_, n)
    inside = (pts > alpha) & (pts < beta)
    pts, lvls = pts[inside], lvls[inside]

    counts = []
    for k in range(1, n + 1):
        # joint monotonicity under d_k needs g^s monotone for s <= k-1,
        # i.e. splitting at turning points of level <= k-2
        cut_pts = pts[lvls < k - 1] if k > 1 else pts[:0]
        ends = np.concatenate(([alpha], cut_pts, [beta]))
        # orbits of the piece endpoints for k steps
        orbit = np.empty((k + 1, ends.size))
        orbit[0] = ends
        y = ends.copy()
        for step in range(1, k + 1):
            y = map_.a * y * (1.0 - y)
            orbit[step] = y
        var = np.abs(np.diff(orbit[:k], axis=1)).max(axis=0)
        pieces = np.maximum(1, np.ceil(var / (2.0 * epsilon))).sum()
        counts.append(int(pieces))

    logs = [math.log(c) for c in counts]
    ns = list(range(1, n + 1))
    n0 = max(1, (2 * n) // 3)
    est = _slope(ns[n0 - 1:], logs[n0 - 1:])
    est = max(0.0, est)
    return IntervalEntropy(est, tuple(counts), n, epsilon, (n0, n))


def fe_proxy_audit(a, sub=None, n=14, epsilon=1.0 / 256.0, tol=0.07, n_max=14):
    """Numerical proxy for the full-interval-entropy property at parameter a:
    the subinterval spanning growth should match the global lap entropy.

    This proxy can produce false positives; callers must surface its status.
    """
    map_ = LogisticMap(a)
    glob = logistic_entropy(map_, n_max)
    sub = sub if sub is not None else (0.3, 0.4)
    local = interval_entropy(map_, sub, n, epsilon)
    return {
        "a": a,
        "global": glob.estimate,
        "interval": local.estimate,
        "gap": abs(glob.estimate - local.estimate),
        "passes": abs(glob.estimate - local.estimate) <= tol,
        "proxy": "numerical interval-entropy match; not a certification",
    }
