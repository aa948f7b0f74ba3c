"""Weighted (fractional) cover values, their LP duality, and Frostman measures.

The weighted cover value W is the optimum of the fractional covering LP over
cylinders with depths in [N, D]; its dual distributes mass over the set's
depth-D atoms subject to gauge caps on every cylinder.  Normalizing the dual
optimum gives a probability measure whose ball masses are dominated by
b(n)/W: a finite Frostman measure.  One deterministic simplex solve yields
both sides, and strong duality is the advertised consistency check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .coverpack import inflated_cover_value, min_cover_value, vitali_select
from .errors import InfeasibleError, InputError
from .gauges import Gauge, choose_cutpoints, stitch_gauges
from .simplex import solve_packing_lp
from .symbolic import EPSILON, Ball, BallFamily, CylinderSet, SubshiftSystem

ATOM_CAP = 20000


@dataclass(frozen=True)
class WeightedCover:
    """An optimal fractional cover: pairs (cylinder ball, coefficient)."""

    system: SubshiftSystem
    kset: CylinderSet
    gauge: Gauge
    pairs: tuple           # ((word, order), coefficient) with coefficient > 0
    value: float
    n_min: int
    depth: int
    epsilon: float = EPSILON
    exact: bool = False

    def to_json(self):
        return {
            "value": self.value,
            "N": self.n_min,
            "depth": self.depth,
            "epsilon": self.epsilon,
            "pairs": [{"word": list(w), "c": c} for (w, _n), c in self.pairs],
        }


@dataclass(frozen=True)
class TreeMeasure:
    """Probability weights on depth-D cylinders of a subshift."""

    weights: dict
    depth: int

    def __post_init__(self):
        total = sum(self.weights.values())
        if abs(total - 1.0) > 1e-9:
            raise InputError(f"weights sum to {total}, not 1")
        if any(w < -1e-15 for w in self.weights.values()):
            raise InputError("negative weight")
        if any(len(word) != self.depth for word in self.weights):
            raise InputError("all atoms must sit at the stated depth")

    def mass(self, word):
        """Measure of the cylinder [word] for len(word) <= depth."""
        word = tuple(word)
        if len(word) > self.depth:
            raise InputError("cylinder deeper than the measure's resolution")
        k = len(word)
        return sum(w for atom, w in self.weights.items() if atom[:k] == word)

    def to_json(self):
        return {
            "depth": self.depth,
            "atoms": [{"word": list(w), "weight": wt}
                      for w, wt in sorted(self.weights.items())],
        }


def _instance(system, kset, n_min, depth):
    """Atoms (depth-D words meeting K) and candidate balls with atom ranges.

    DFS order makes each ball's atoms a contiguous range of the atom list.
    """
    if n_min < 1 or n_min > depth:
        raise InputError(f"need 1 <= N <= D, got N={n_min}, D={depth}")
    if kset.is_empty():
        raise InputError("empty set")
    if kset.max_depth() > depth:
        raise InputError("cylinder deeper than D; raise D")
    words = kset.words()
    atoms = []
    balls = []

    def state(prefix):
        d = len(prefix)
        free = False
        active = False
        for w in words:
            k = min(d, len(w))
            if prefix[:k] == w[:k]:
                if len(w) <= d:
                    free = True
                    break
                active = True
        return free, active

    def rec(prefix):
        d = len(prefix)
        if d == depth:
            atoms.append(prefix)
            if len(atoms) > ATOM_CAP:
                raise InputError(f"more than {ATOM_CAP} atoms at depth {depth}")
            return
        mark = None
        if d >= n_min:
            mark = len(atoms)
        symbols = (range(system.alphabet_size) if not prefix
                   else system.successors(prefix[-1]))
        for s in symbols:
            nxt = prefix + (s,)
            free, active = state(nxt)
            if free or active:
                rec(nxt)
        if mark is not None and len(atoms) > mark:
            balls.append((prefix, d, mark, len(atoms)))

    root_free, root_active = state(())
    if root_free or root_active:
        rec(())
    # depth-D atoms are themselves admissible balls (mark logic above skips
    # the deepest level, so add them explicitly when depth >= n_min)
    for idx, atom in enumerate(atoms):
        balls.append((atom, depth, idx, idx + 1))
    return atoms, balls


def _solve(system, kset, b: Gauge, n_min, depth, exact=None):
    atoms, balls = _instance(system, kset, n_min, depth)
    rows = [tuple(range(lo, hi)) for (_w, _n, lo, hi) in balls]
    bounds = [b(n) for (_w, n, _lo, _hi) in balls]
    sol = solve_packing_lp(rows, bounds, len(atoms), exact=exact)
    return atoms, balls, sol


def weighted_cover_value(system, kset, b: Gauge, n_min, depth, exact=None):
    """The fractional cover LP optimum with coefficients as witness.

    The reported value is the primal objective (coefficient-weighted gauge
    cost); the dual packing objective must agree by strong duality, which is
    checked here, and frostman_measure reports the dual side, so comparing
    the two quantities downstream is a genuine two-route consistency check.
    """
    atoms, balls, sol = _solve(system, kset, b, n_min, depth, exact)
    pairs = []
    primal_cost = 0.0
    for (word, order, _lo, _hi), coef in zip(balls, sol.duals):
        if coef > 1e-12:
            pairs.append(((word, order), coef))
            primal_cost += coef * b(order)
    if abs(primal_cost - sol.value) > 1e-8 * max(1.0, abs(sol.value)):
        raise InputError(
            f"duality gap {primal_cost - sol.value:.3g} exceeds tolerance; "
            "LP solve is suspect")
    return WeightedCover(system, kset, b, tuple(pairs), primal_cost, n_min,
                         depth, EPSILON, sol.exact)


def frostman_measure(system, kset, b: Gauge, n_min, depth, exact=None):
    """A measure on K's depth-D atoms with mu([w]) <= b(|w|)/c for all
    cylinders with depths in [N, D]; c is the weighted cover value."""
    atoms, balls, sol = _solve(system, kset, b, n_min, depth, exact)
    c = sol.value
    if c <= 0:
        raise InfeasibleError("weighted cover value is zero; no mass to normalize",
                              achievable=c)
    weights = {}
    for atom, y in zip(atoms, sol.y):
        if y > 0:
            weights[atom] = y / c
    # make the total exactly 1 against float round-off
    total = sum(weights.values())
    weights = {wd: w / total for wd, w in weights.items()}
    mu = TreeMeasure(weights, depth)
    audit_frostman_constraints(mu, system, kset, b, n_min, depth, c)
    return mu, c


def audit_frostman_constraints(mu: TreeMeasure, system, kset, b, n_min, depth, c,
                               tol=1e-9):
    """Check mu([w]) * c <= b(|w|) + tol on every cylinder with depth in [N, D]."""
    atoms, balls = _instance(system, kset, n_min, depth)
    masses = [mu.weights.get(a, 0.0) for a in atoms]
    prefix = [0.0]
    for m in masses:
        prefix.append(prefix[-1] + m)
    for (word, order, lo, hi) in balls:
        mass = prefix[hi] - prefix[lo]
        if mass * c > b(order) + tol:
            raise InfeasibleError(
                f"Frostman constraint violated on {word[:order]}: "
                f"{mass * c:.12g} > {b(order):.12g}")
    return True


@dataclass(frozen=True)
class SandwichReport:
    lower: float
    weighted: float
    upper: float
    holds: bool
    n_min: int
    depth: int

    def to_json(self):
        return {"lower": self.lower, "W": self.weighted, "upper": self.upper,
                "holds": self.holds, "N": self.n_min, "depth": self.depth}


def sandwich_check(system, kset, b: Gauge, n_min, depth, tol=1e-8):
    """Tripled-radius cover value <= weighted cover value <= cover value.

    The inequality always holds mathematically; holds=False marks an
    implementation bug, not a property of the instance.
    """
    lower = inflated_cover_value(system, kset, b, n_min, depth, 3.0 * EPSILON).value
    upper = min_cover_value(system, kset, b, n_min, depth, with_witness=False).value
    w = weighted_cover_value(system, kset, b, n_min, depth).value
    holds = (lower <= w + tol) and (w <= upper + tol)
    return SandwichReport(lower, w, upper, holds, n_min, depth)


@dataclass(frozen=True)
class RoundingLedger:
    rounds: int
    per_round_cost: tuple
    cleared_cost: float     # sum of u(B) * b(B) after clearing denominators
    denominator: int
    holds: bool


def round_weighted_cover(cover: WeightedCover, t, max_denominator=10 ** 6):
    """Turn a rational fractional cover into m disjoint ball families.

    Coefficients are cleared to integers u_i with a common denominator L and
    m = ceil(t * L); each round Vitali-selects a disjoint family from the
    balls with remaining multiplicity, whose tripled balls cover the set.
    The bookkeeping  m * M <= sum_j cost(round j) <= sum_i u_i b(n_i)  is
    verified and returned.
    """
    if not (0 < t < 1):
        raise InputError("t must lie in (0, 1)")
    if not cover.pairs:
        raise InputError("empty cover")
    fracs = []
    for (_wn, coef) in cover.pairs:
        f = Fraction(coef).limit_denominator(max_denominator)
        if abs(float(f) - coef) > 1e-9:
            raise InputError(f"coefficient {coef} is not rational within tolerance")
        fracs.append(f)
    denom = 1
    for f in fracs:
        denom = denom * f.denominator // math.gcd(denom, f.denominator)
    mult = {i: int(f * denom) for i, f in enumerate(fracs)}
    m = math.ceil(t * denom)

    atoms, _balls = _instance(cover.system, cover.kset, cover.n_min, cover.depth)
    ball_list = [Ball(w, n) for ((w, n), _c) in cover.pairs]

    def atoms_covered_count(mult_map):
        # minimum covering multiplicity over the atoms
        worst = None
        for atom in atoms:
            s = sum(mult_map[i] for i, ball in enumerate(ball_list)
                    if atom[: ball.order] == ball.core)
            worst = s if worst is None else min(worst, s)
        return worst if worst is not None else 0

    if atoms_covered_count(mult) < m:
        raise InputError(
            f"cleared cover multiplicity {atoms_covered_count(mult)} below m={m}; "
            "the fractional cover does not dominate t on the set")

    rounds = []
    costs = []
    v = dict(mult)
    for j in range(m):
        active = [i for i, u in v.items() if u >= 1]
        fam = BallFamily(tuple(ball_list[i] for i in active), cover.epsilon)
        selected = vitali_select(fam)
        sel_idx = []
        for ball in selected.balls:
            for i in active:
                if ball_list[i].core == ball.core and i not in sel_idx:
                    sel_idx.append(i)
                    break
        for i in sel_idx:
            v[i] -= 1
        rounds.append(selected)
        costs.append(sum(cover.gauge(ball.order) for ball in selected.balls))
        remaining = {i: u for i, u in v.items()}
        if j < m - 1 and atoms_covered_count(remaining) < m - j - 1:
            raise InfeasibleError(
                f"multiplicity invariant broke after round {j + 1}")

    cleared = sum(mult[i] * cover.gauge(ball_list[i].order) for i in mult)
    holds = sum(costs) <= cleared + 1e-9
    return rounds, RoundingLedger(m, tuple(costs), cleared, denom, holds)


@dataclass(frozen=True)
class GaugeSearchResult:
    accepted: bool
    gauge: Gauge | None
    value: float
    threshold: float
    refusals: tuple      # per-gauge (value, witness cost) when refused

    def to_json(self):
        out = {"accepted": self.accepted, "value": self.value,
               "threshold": self.threshold}
        if self.gauge is not None:
            out["gauge"] = self.gauge.to_json()
        if self.refusals:
            out["refusals"] = [
                {"gauge_index": i, "cover_value": v} for (i, v) in self.refusals]
        return out


def nonnull_gauge_search(system, kset, gauges, n_min, depth, threshold=0.01,
                         horizon=None, tol=1e-3):
    """Stitch a dominating chain and accept iff the stitched weighted cover
    value clears the threshold; otherwise report, per chain member, the cheap
    cover witnessing near-nullity at this depth.

    Refusal is a value, not an error.  At finite depth the refusal is a
    weaker certificate than the limit statement: only total covers are
    enumerable here.
    """
    gauges = list(gauges)
    if not gauges:
        raise InputError("empty gauge chain")
    horizon = horizon or max(4 * depth, 200)
    if len(gauges) == 1:
        stitched = gauges[0]
    else:
        cuts = choose_cutpoints(gauges, horizon=horizon, tol=tol)
        stitched = stitch_gauges(gauges, cuts, verify_horizon=horizon)
    w = weighted_cover_value(system, kset, stitched, n_min, depth)
    if w.value >= threshold:
        return GaugeSearchResult(True, stitched, w.value, threshold, ())
    refusals = []
    for i, g in enumerate(gauges):
        cv = min_cover_value(system, kset, g, n_min, depth, with_witness=False)
        refusals.append((i, cv.value))
    return GaugeSearchResult(False, None, w.value, threshold, tuple(refusals))
