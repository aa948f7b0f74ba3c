"""Gauge functions on the integers: positive, nonincreasing, decaying to 0.

Three forms are supported: closed-form exponential n -> exp(-s*n), finite
tables with a declared geometric tail, and piecewise gauges produced by
stitching a dominating chain at cut points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Gauge:
    kind: str                      # "exp" | "table" | "piecewise"
    rate: float = 0.0              # exp form
    values: tuple = ()             # table form, values[0] is b(1)
    tail_rate: float = 0.0         # table form decay rate beyond the table
    pieces: tuple = ()             # piecewise: gauges, one more than cuts
    cuts: tuple = ()               # piecewise: increasing ints; piece p active on [cut_{p-1}, cut_p)

    def __call__(self, n):
        if n < 1:
            raise InputError("gauges are defined for n >= 1")
        if self.kind == "exp":
            return math.exp(-self.rate * n)
        if self.kind == "table":
            if n <= len(self.values):
                return self.values[n - 1]
            return self.values[-1] * math.exp(-self.tail_rate * (n - len(self.values)))
        p = 0
        for cut in self.cuts:
            if n >= cut:
                p += 1
            else:
                break
        return self.pieces[p](n)

    def sample(self, n_lo, n_hi):
        return np.array([self(n) for n in range(n_lo, n_hi + 1)], dtype=float)

    def to_json(self):
        if self.kind == "exp":
            return {"type": "exp", "s": self.rate}
        if self.kind == "table":
            return {"type": "table", "values": list(self.values), "tail_rate": self.tail_rate}
        return {
            "type": "piecewise",
            "segments": [
                {"start": 1 if p == 0 else self.cuts[p - 1], "gauge": g.to_json()}
                for p, g in enumerate(self.pieces)
            ],
        }

    @classmethod
    def from_json(cls, obj):
        try:
            kind = obj["type"]
            if kind == "exp":
                return exp_gauge(float(obj["s"]))
            if kind == "table":
                return table_gauge(obj["values"], float(obj["tail_rate"]))
            if kind == "piecewise":
                segs = obj["segments"]
                pieces = tuple(cls.from_json(s["gauge"]) for s in segs)
                cuts = tuple(int(s["start"]) for s in segs[1:])
                return piecewise_gauge(pieces, cuts)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad gauge JSON: {exc}") from exc
        raise InputError(f"unknown gauge type {obj.get('type')!r}")


def exp_gauge(s):
    """The gauge n -> exp(-s*n); requires s > 0."""
    if not s > 0:
        raise InputError("exponential gauge needs rate s > 0")
    return Gauge("exp", rate=float(s))


def table_gauge(values, tail_rate):
    """A tabulated gauge with a declared geometric tail.

    Decay to zero cannot be certified from finitely many values, so the tail
    rate is required and the table itself is checked for positivity and
    monotonicity.
    """
    vals = tuple(float(v) for v in values)
    if not vals:
        raise InputError("table gauge needs at least one value")
    if any(v <= 0 for v in vals):
        raise InputError("gauge values must be positive")
    if any(vals[i + 1] > vals[i] for i in range(len(vals) - 1)):
        raise InputError("gauge values must be nonincreasing")
    if not tail_rate > 0:
        raise InputError("table gauge needs a positive declared tail rate")
    return Gauge("table", values=vals, tail_rate=float(tail_rate))


def piecewise_gauge(pieces, cuts):
    if len(pieces) != len(cuts) + 1:
        raise InputError("piecewise gauge needs one more piece than cuts")
    if any(cuts[i] >= cuts[i + 1] for i in range(len(cuts) - 1)):
        raise InputError("cuts must be strictly increasing")
    if cuts and cuts[0] < 1:
        raise InputError("cuts must be >= 1")
    return Gauge("piecewise", pieces=tuple(pieces), cuts=tuple(int(c) for c in cuts))


@dataclass(frozen=True)
class DominationReport:
    ok: bool
    ratios: tuple          # b_star(n)/b(n) for n = 1..horizon
    horizon: int
    tol: float
    reason: str = ""


def dominates(b: Gauge, b_star: Gauge, horizon=200, tol=1e-6):
    """Finite-horizon check that b_star(n)/b(n) -> 0.

    True iff the ratio is below tol at the horizon and nonincreasing over the
    final quartile of samples.  The limit statement itself is untestable; this
    is the documented approximation, and the full ratio table is returned
    either way.
    """
    if horizon < 2:
        raise InputError("horizon must be >= 2")
    ratios = tuple(b_star(n) / b(n) for n in range(1, horizon + 1))
    reason = ""
    ok = True
    if not ratios[-1] < tol:
        ok = False
        reason = f"ratio at horizon is {ratios[-1]:.3g}, not below tol {tol:.3g}"
    q = max(2, (3 * horizon) // 4)
    tail = ratios[q - 1:]
    slack = 1e-12
    if ok and any(tail[i + 1] > tail[i] * (1 + slack) + slack for i in range(len(tail) - 1)):
        ok = False
        reason = "ratio not nonincreasing over the final quartile"
    return DominationReport(ok, ratios, horizon, tol, reason)


def choose_cutpoints(gauges, horizon=200, tol=1e-6):
    """Cut points l_1 < l_2 < .. with gauges[p](n) < gauges[p-1](n) past l_p.

    Each gauge must dominate the next (per `dominates`); the returned cuts are
    the smallest admissible ones, verified by a direct inequality scan up to
    the horizon.
    """
    gauges = tuple(gauges)
    if len(gauges) <= 1:
        return []
    cuts = []
    prev_cut = 0
    for p in range(1, len(gauges)):
        rep = dominates(gauges[p - 1], gauges[p], horizon=horizon, tol=tol)
        if not rep.ok:
            raise InputError(
                f"gauge {p - 1} does not dominate gauge {p}: {rep.reason}")
        worst = 0
        for n in range(1, horizon + 1):
            if gauges[p](n) >= gauges[p - 1](n):
                worst = n
        cut = max(worst + 1, prev_cut + 1, 1)
        for n in range(cut, horizon + 1):
            if gauges[p](n) >= gauges[p - 1](n):
                raise InputError(f"domination scan failed for pair ({p - 1}, {p}) at n={n}")
        cuts.append(cut)
        prev_cut = cut
    return cuts


def stitch_gauges(gauges, cuts, verify_horizon=400):
    """The stitched gauge equal to gauges[p] on [l_{p-1}, l_p), l_0 = 1.

    Monotonicity is re-verified on the sampled range; a violation at a seam
    raises with the seam index.  Pointwise, the stitched gauge is below every
    chain member from that member's cut onward.
    """
    gauges = tuple(gauges)
    cuts = [int(c) for c in cuts]
    if len(gauges) == 1 and not cuts:
        return gauges[0]
    if len(cuts) != len(gauges) - 1:
        raise InputError("need exactly one cut between consecutive gauges")
    g = piecewise_gauge(gauges, cuts)
    horizon = max(verify_horizon, (cuts[-1] + 2) if cuts else 2)
    prev = g(1)
    for n in range(2, horizon + 1):
        cur = g(n)
        if cur > prev * (1 + 1e-12):
            seam = sum(1 for c in cuts if c <= n)
            raise InputError(f"stitched gauge not monotone at n={n} (seam index {seam})")
        prev = cur
    return g


def assert_stitched_below(stitched: Gauge, gauges, cuts, horizon=400):
    """Pointwise check b(n) <= b_i(n) for n >= l_{i-1}, for every chain member."""
    starts = [1] + list(cuts)
    for i, gi in enumerate(gauges):
        for n in range(starts[i], horizon + 1):
            if stitched(n) > gi(n) * (1 + 1e-12):
                return False, (i, n)
    return True, None
