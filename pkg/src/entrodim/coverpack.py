"""Cover values, packing values, critical exponents, and ball selection.

All quantities live on the word tree of an SFT at the canonical symbolic
radius epsilon = 1/2, where Bowen balls are cylinders and both the minimal
cover value and the maximal packing value are exact tree dynamic programs:

    cover cost(node) = min(b(depth) if depth >= N, sum over children)
    pack  best(node) = max(e^(-s*depth) if depth >= N, sum over children)

Nodes whose cylinder misses the target set cost nothing and pack nothing.
Subtrees lying entirely inside the target set ("free" nodes) depend only on
(depth, last symbol), which keeps deep computations cheap via memoization.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .errors import InfeasibleError, InputError
from .gauges import Gauge, exp_gauge
from .symbolic import (
    EPSILON,
    Ball,
    BallFamily,
    CylinderSet,
    SubshiftSystem,
    balls_disjoint,
    forced_prefix_length,
    spanning_number,
)

_INF = float("inf")


@dataclass(frozen=True)
class CoverValue:
    value: float
    depth: int
    n_min: int
    epsilon: float
    witness: BallFamily | None

    def to_json(self):
        return {
            "value": self.value,
            "depth": self.depth,
            "N": self.n_min,
            "epsilon": self.epsilon,
            "witness": self.witness.to_json() if self.witness else None,
        }


@dataclass(frozen=True)
class PackValue:
    value: float
    depth: int
    n_min: int
    epsilon: float
    witness: BallFamily | None

    def to_json(self):
        return {
            "value": self.value,
            "depth": self.depth,
            "N": self.n_min,
            "epsilon": self.epsilon,
            "witness": self.witness.to_json() if self.witness else None,
        }


def _validate_range(zset: CylinderSet, n_min, depth):
    if n_min < 1 or n_min > depth:
        raise InputError(f"need 1 <= N <= D, got N={n_min}, D={depth}")
    if zset.is_empty():
        raise InputError("empty set")
    if any(c.anchor != 0 for c in zset.cylinders):
        raise InputError("cover/pack machinery expects cylinders anchored at 0")
    if zset.max_depth() > depth:
        raise InputError(
            f"cylinder of depth {zset.max_depth()} exceeds D={depth}; raise D")


class _Tree:
    """Lazy exploration of the word tree of (system, zset) down to `depth`.

    Node state is (prefix, free): free marks that some target cylinder is a
    full prefix of the path, so the whole subtree meets the set.  Free
    subtree aggregates are memoized on (depth, last symbol).
    """

    def __init__(self, system: SubshiftSystem, zset: CylinderSet, depth):
        self.sys = system
        self.depth = depth
        self.words = zset.words()

    def state(self, prefix):
        d = len(prefix)
        free = False
        active = False
        for w in self.words:
            k = min(d, len(w))
            if prefix[:k] == w[:k]:
                if len(w) <= d:
                    free = True
                    break
                active = True
        return free, active

    def child_symbols(self, prefix):
        if not prefix:
            return range(self.sys.alphabet_size)
        return self.sys.successors(prefix[-1])


def _cover_free_values(tree: _Tree, b: Gauge, n_min):
    """memo[(d, a)] = optimal cover cost of the full admissible subtree."""
    memo = {}
    depth = tree.depth
    bvals = [0.0] * (depth + 1)
    for n in range(1, depth + 1):
        bvals[n] = b(n)
    for d in range(depth, 0, -1):
        for a in range(tree.sys.alphabet_size):
            if d == depth:
                memo[(d, a)] = bvals[depth]
                continue
            child = sum(memo[(d + 1, s)] for s in tree.sys.successors(a))
            own = bvals[d] if d >= n_min else _INF
            memo[(d, a)] = own if own <= child else child
    return memo, bvals


def min_cover_value(system, zset, b: Gauge, n_min, depth, with_witness=True):
    """Exact infimum of sum b(n_i) over covers of the set by cylinders
    with depths in [N, D].  Ties prefer the shallower ball, which keeps
    witnesses small and deterministic."""
    _validate_range(zset, n_min, depth)
    tree = _Tree(system, zset, depth)
    free_memo, bvals = _cover_free_values(tree, b, n_min)

    def cost(prefix, free):
        d = len(prefix)
        if free:
            return free_memo[(d, prefix[-1])]
        if d == depth:
            return bvals[depth]
        child = 0.0
        for s in tree.child_symbols(prefix):
            nxt = prefix + (s,)
            f, act = tree.state(nxt)
            if f or act:
                child += cost(nxt, f)
        own = bvals[d] if d >= n_min else _INF
        return own if own <= child else child

    root_free, root_active = tree.state(())
    total = cost((), root_free) if (root_free or root_active) else 0.0

    witness = None
    if with_witness:
        picks = []

        def walk(prefix, free):
            # mirror the DP decision: own wins ties
            d = len(prefix)
            if d == depth:
                picks.append(Ball(prefix, d))
                return
            if free:
                kids = [(prefix + (s,), True) for s in tree.sys.successors(prefix[-1])]
            else:
                kids = []
                for s in tree.child_symbols(prefix):
                    nxt = prefix + (s,)
                    f, act = tree.state(nxt)
                    if f or act:
                        kids.append((nxt, f))
            child = sum(cost(p, f) for p, f in kids)
            own = bvals[d] if d >= n_min else _INF
            if own <= child:
                picks.append(Ball(prefix, d))
                return
            for p, f in kids:
                walk(p, f)

        if root_free or root_active:
            walk((), root_free)
        witness = BallFamily(tuple(picks), EPSILON)
    return CoverValue(total, depth, n_min, EPSILON, witness)


def inflated_cover_value(system, zset, b: Gauge, n_min, depth, radius):
    """Cover value when a ball of order n only pins down its forced prefix.

    At radius r, an order-n ball equals the cylinder of length
    forced_prefix_length(n, r); covering with such balls is again a tree DP
    over cylinder levels, with level L costing the cheapest order whose
    forced length is L.  Radius >= 1 makes every ball the whole space, so the
    value collapses to min b(n).  This is the 3-epsilon side of the sandwich.
    """
    _validate_range(zset, n_min, depth)
    level_cost = {}
    for n in range(n_min, depth + 1):
        lvl = forced_prefix_length(n, radius)
        c = b(n)
        if lvl not in level_cost or c < level_cost[lvl]:
            level_cost[lvl] = c
    if 0 in level_cost:
        return CoverValue(level_cost[0], depth, n_min, radius, None)

    tree = _Tree(system, zset, depth)
    max_level = max(level_cost)
    memo = {}

    def free_cost(d, a):
        if (d, a) in memo:
            return memo[(d, a)]
        own = level_cost.get(d, _INF)
        if d >= max_level:
            val = own if own < _INF else _INF
        else:
            child = sum(free_cost(d + 1, s) for s in tree.sys.successors(a))
            val = own if own <= child else child
        memo[(d, a)] = val
        return val

    def cost(prefix, free):
        d = len(prefix)
        if free:
            return free_cost(d, prefix[-1])
        own = level_cost.get(d, _INF)
        if d >= max_level:
            return own
        child = 0.0
        for s in tree.child_symbols(prefix):
            nxt = prefix + (s,)
            f, act = tree.state(nxt)
            if f or act:
                child += cost(nxt, f)
        return own if own <= child else child

    root_free, root_active = tree.state(())
    total = cost((), root_free) if (root_free or root_active) else 0.0
    return CoverValue(total, depth, n_min, radius, None)


def pack_value(system, zset, s, n_min, depth, with_witness=True):
    """Exact supremum of sum e^(-s*n_i) over pairwise disjoint cylinder
    families with depths in [N, D] and centers in the set."""
    _validate_range(zset, n_min, depth)
    tree = _Tree(system, zset, depth)
    w = [math.exp(-s * n) for n in range(depth + 1)]
    memo = {}

    def free_best(d, a):
        if (d, a) in memo:
            return memo[(d, a)]
        if d == depth:
            memo[(d, a)] = w[depth]
            return w[depth]
        child = sum(free_best(d + 1, sym) for sym in tree.sys.successors(a))
        own = w[d] if d >= n_min else -_INF
        val = own if own >= child else child
        memo[(d, a)] = val
        return val

    def best(prefix, free):
        d = len(prefix)
        if free:
            return free_best(d, prefix[-1])
        if d == depth:
            return w[depth]
        child = 0.0
        for sym in tree.child_symbols(prefix):
            nxt = prefix + (sym,)
            f, act = tree.state(nxt)
            if f or act:
                child += best(nxt, f)
        own = w[d] if d >= n_min else -_INF
        return own if own >= child else child

    root_free, root_active = tree.state(())
    total = best((), root_free) if (root_free or root_active) else 0.0

    witness = None
    if with_witness:
        picks = []

        def center(prefix, free):
            # extend prefix to a depth-D word meeting the set
            cur, f = prefix, free
            while len(cur) < depth:
                for sym in tree.child_symbols(cur):
                    nxt = cur + (sym,)
                    nf, act = tree.state(nxt)
                    if nf or act:
                        cur, f = nxt, nf
                        break
                else:
                    break
            return cur

        def walk(prefix, free):
            # mirror the DP decision: own wins ties
            d = len(prefix)
            if d == depth:
                picks.append(Ball(prefix, d))
                return
            if free:
                kids = [(prefix + (sym,), True) for sym in tree.sys.successors(prefix[-1])]
            else:
                kids = []
                for sym in tree.child_symbols(prefix):
                    nxt = prefix + (sym,)
                    f, act = tree.state(nxt)
                    if f or act:
                        kids.append((nxt, f))
            child = sum(best(p, f) for p, f in kids)
            own = w[d] if d >= n_min else -_INF
            if own >= child:
                picks.append(Ball(center(prefix, free), d))
                return
            for p, f in kids:
                walk(p, f)

        if root_free or root_active:
            walk((), root_free)
        witness = BallFamily(tuple(picks), EPSILON)
    return PackValue(total, depth, n_min, EPSILON, witness)


def packing_outer_value(system, zset, s, n_min, depth, parts, max_cylinders=12):
    """Finite analogue of the packing outer value: minimize the sum of
    pack values over partitions of the listed cylinders into <= `parts`
    groups.  Exact by enumeration; restricting to finitely many parts is
    strictly weaker than the countable decompositions of the limit object,
    which is why this never exceeds pack_value."""
    if parts < 1:
        raise InputError("parts must be >= 1")
    _validate_range(zset, n_min, depth)
    cyls = list(zset.cylinders)
    if parts == 1 or len(cyls) == 1:
        return pack_value(system, zset, s, n_min, depth, with_witness=False).value
    if len(cyls) > max_cylinders:
        raise InputError(
            f"{len(cyls)} cylinders exceeds the enumeration bound {max_cylinders}; "
            "use heuristic mode by partitioning manually")

    best_val = _INF

    def rec(idx, blocks):
        nonlocal best_val
        if idx == len(cyls):
            total = 0.0
            for blk in blocks:
                sub = CylinderSet(tuple(blk))
                total += pack_value(system, sub, s, n_min, depth, with_witness=False).value
            best_val = min(best_val, total)
            return
        c = cyls[idx]
        for blk in blocks:
            blk.append(c)
            rec(idx + 1, blocks)
            blk.pop()
        if len(blocks) < parts:
            blocks.append([c])
            rec(idx + 1, blocks)
            blocks.pop()

    rec(0, [])
    return best_val


def critical_exponent(value_at, bracket, target=1.0, tol=1e-4):
    """Bisection for the s where a monotone-decreasing value crosses target.

    Requires value_at(lo) > target > value_at(hi); the returned s* is the
    bracket midpoint once the bracket width is <= tol.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise InputError("bracket must satisfy lo < hi")
    v_lo, v_hi = value_at(lo), value_at(hi)
    if not (v_lo > target > v_hi):
        raise InputError(
            f"bracket does not straddle target: value({lo})={v_lo:.6g}, "
            f"value({hi})={v_hi:.6g}, target={target}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if value_at(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class EntropyEstimate:
    estimate: float
    uncertainty: float
    table: tuple        # rows (N, D, s_star, delta)
    kind: str

    def to_json(self):
        return {
            "estimate": self.estimate,
            "uncertainty": self.uncertainty,
            "kind": self.kind,
            "table": [
                {"N": n, "D": d, "s_star": s, "delta": delta}
                for (n, d, s, delta) in self.table
            ],
        }


def _exponent_at(system, zset, n_min, depth, tol, value_fn):
    lo = 1e-9
    hi = math.log(system.alphabet_size) + 1.0
    v_lo = value_fn(lo, n_min, depth)
    if v_lo <= 1.0:
        return 0.0
    return critical_exponent(lambda s: value_fn(s, n_min, depth), (lo, hi), 1.0, tol)


def bowen_entropy(system, zset, schedule, tol=1e-4):
    """Critical exponent of the cover value along an (N, D) schedule.

    The final entry is the estimate and the last two-step delta is reported
    as its uncertainty; no limit is pretended.
    """
    sched = [(int(n), int(d)) for (n, d) in schedule]
    if not sched:
        raise InputError("schedule must be nonempty")
    if any(sched[i][1] > sched[i + 1][1] for i in range(len(sched) - 1)):
        raise InputError("schedule depths must be nondecreasing")

    def value_fn(s, n_min, depth):
        return min_cover_value(system, zset, exp_gauge(max(s, 1e-300)), n_min, depth,
                               with_witness=False).value

    return _entropy_over_schedule(system, zset, sched, tol, value_fn, "bowen")


def packing_entropy(system, zset, schedule, tol=1e-4):
    """Critical exponent of the packing value along an (N, D) schedule."""
    sched = [(int(n), int(d)) for (n, d) in schedule]
    if not sched:
        raise InputError("schedule must be nonempty")

    def value_fn(s, n_min, depth):
        return pack_value(system, zset, s, n_min, depth, with_witness=False).value

    return _entropy_over_schedule(system, zset, sched, tol, value_fn, "packing")


def _entropy_over_schedule(system, zset, sched, tol, value_fn, kind):
    rows = []
    prev = None
    for (n_min, depth) in sched:
        s_star = _exponent_at(system, zset, n_min, depth, tol, value_fn)
        delta = abs(s_star - prev) if prev is not None else float("nan")
        rows.append((n_min, depth, s_star, delta))
        prev = s_star
    final = rows[-1]
    uncertainty = final[3] if len(rows) > 1 and not math.isnan(final[3]) else tol
    return EntropyEstimate(final[2], uncertainty, tuple(rows), kind)


def spanning_growth_exponent(system, zset, depth, n_min=1):
    """max over n in [n_min, depth] of log(spanning number at n) / n."""
    best = 0.0
    for n in range(n_min, depth + 1):
        r = spanning_number(system, zset, n)
        if r > 0:
            best = max(best, math.log(r) / n)
    return best


# ---------------------------------------------------------------------------
# Vitali selection and finite disjoint families

def vitali_select(family: BallFamily):
    """Greedy minimal-order-first selection of pairwise disjoint balls.

    Ties among equal minimal orders break lexicographically on the center,
    so the output is deterministic.  Every input ball intersects a selected
    ball of no larger order, hence lies inside that ball's core cylinder and
    a fortiori inside its tripled inflation.
    """
    order = sorted(family.balls, key=lambda b: (b.order, b.word))
    chosen = []
    for b in order:
        if all(balls_disjoint(b, c) for c in chosen):
            chosen.append(b)
    return BallFamily(tuple(chosen), family.epsilon)


def tripled_ball_core(ball: Ball, epsilon=EPSILON):
    """Core word of the ball inflated to radius 3*epsilon; () is the whole space."""
    length = forced_prefix_length(ball.order, 3.0 * epsilon)
    return ball.word[:length]


def vitali_triples_cover(selected: BallFamily, original: BallFamily):
    """Check that every original ball sits inside some selected triple."""
    triples = [tripled_ball_core(b, selected.epsilon) for b in selected.balls]
    for b in original.balls:
        core = b.core
        ok = any(core[: len(t)] == t for t in triples)
        if not ok:
            return False
    return True


def finite_disjoint_family(system, zset, s, epsilon, n_min, lower, upper, depth):
    """A disjoint ball family with centers in the set, orders in [N, D], and
    gauge mass strictly between `lower` and `upper`.

    Greedy accumulation toward the midpoint of (lower, upper): balls whose
    weight would push past `upper` are refined into their children instead.
    Infeasibility at depth D reports the achievable supremum.
    """
    if not (0 <= lower < upper):
        raise InputError("need 0 <= a < b")
    if epsilon != EPSILON:
        raise InputError("finite_disjoint_family is exact only at epsilon = 1/2")
    _validate_range(zset, n_min, depth)
    supremum = pack_value(system, zset, s, n_min, depth, with_witness=False).value
    if supremum <= lower:
        raise InfeasibleError(
            f"packing supremum {supremum:.6g} at depth {depth} does not exceed a={lower}",
            achievable=supremum)

    tree = _Tree(system, zset, depth)
    target = 0.5 * (lower + upper)

    def level_nodes(prefix, free, want):
        if len(prefix) == want:
            yield prefix, free
            return
        for sym in tree.child_symbols(prefix):
            nxt = prefix + (sym,)
            f, act = tree.state(nxt)
            if f or act:
                yield from level_nodes(nxt, f, want)

    root_free, _ = tree.state(())
    work = deque(level_nodes((), root_free, n_min))
    chosen = []
    total = 0.0
    while work and total < target:
        prefix, free = work.popleft()
        d = len(prefix)
        weight = math.exp(-s * d)
        if total + weight < upper:
            chosen.append((prefix, free, d))
            total += weight
        elif d < depth:
            kids = []
            for sym in tree.child_symbols(prefix):
                nxt = prefix + (sym,)
                f, act = tree.state(nxt)
                if f or act:
                    kids.append((nxt, f))
            work.extendleft(reversed(kids))
        # else: ball unusable at max depth, drop it
    if not (total > lower):
        raise InfeasibleError(
            f"greedy accumulation reached {total:.6g} <= a={lower} at depth {depth}",
            achievable=max(total, supremum if supremum < upper else total))

    balls = []
    for prefix, free, d in chosen:
        cur, f = prefix, free
        while len(cur) < depth:
            extended = False
            for sym in tree.child_symbols(cur):
                nxt = cur + (sym,)
                nf, act = tree.state(nxt)
                if nf or act:
                    cur, f = nxt, nf
                    extended = True
                    break
            if not extended:
                break
        balls.append(Ball(cur, d))
    return BallFamily(tuple(balls), EPSILON)
