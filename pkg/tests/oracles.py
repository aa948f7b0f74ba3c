"""Independent brute-force oracles used to pin expected values.

These deliberately avoid the package's DP shortcuts: covers and packings are
found by enumerating antichains of the materialized word tree, so agreement
with the fast implementations is a genuine two-route check.
"""

import itertools
import math

from entrodim.symbolic import CylinderSet, SubshiftSystem


def materialize_tree(system, zset, depth):
    """Explicit word tree: {prefix: needed} for all admissible prefixes with
    len <= depth whose subtree meets the set's depth hull."""
    words = zset.words()

    def meets(prefix):
        d = len(prefix)
        for w in words:
            k = min(d, len(w))
            if prefix[:k] == w[:k]:
                return True
        return False

    nodes = {}

    def rec(prefix):
        if not meets(prefix):
            return
        nodes[prefix] = True
        if len(prefix) == depth:
            return
        symbols = (range(system.alphabet_size) if not prefix
                   else system.successors(prefix[-1]))
        for s in symbols:
            rec(prefix + (s,))

    rec(())
    return nodes


def enumerate_antichain_covers(system, zset, depth, n_min):
    """Yield every minimal antichain cover (as a tuple of prefixes) of the
    needed depth-D nodes, using cylinders with depths in [n_min, depth]."""
    nodes = materialize_tree(system, zset, depth)

    def rec(prefix):
        # returns list of covers (each a frozenset of prefixes) of the subtree
        d = len(prefix)
        own = [frozenset([prefix])] if d >= n_min else []
        if d == depth:
            return own if own else []
        symbols = (range(system.alphabet_size) if not prefix
                   else system.successors(prefix[-1]))
        kids = [prefix + (s,) for s in symbols if (prefix + (s,)) in nodes]
        if not kids:
            return own
        child_cover_lists = [rec(k) for k in kids]
        combos = []
        for combo in itertools.product(*child_cover_lists):
            merged = frozenset().union(*combo)
            combos.append(merged)
        return own + combos

    root_kids = [p for p in nodes if len(p) == 1]
    if not root_kids:
        return []
    lists = [rec(k) for k in sorted(root_kids)]
    covers = []
    for combo in itertools.product(*lists):
        covers.append(frozenset().union(*combo))
    return covers


def brute_min_cover(system, zset, gauge, n_min, depth):
    best = math.inf
    for cover in enumerate_antichain_covers(system, zset, depth, n_min):
        cost = sum(gauge(len(p)) for p in cover)
        best = min(best, cost)
    return best


def enumerate_antichains(system, zset, depth, n_min):
    """All antichains of needed nodes with depths in [n_min, depth]."""
    nodes = [p for p in materialize_tree(system, zset, depth)
             if n_min <= len(p) <= depth]
    nodes.sort()
    results = []

    def compatible(chain, p):
        for q in chain:
            k = min(len(p), len(q))
            if p[:k] == q[:k]:
                return False
        return True

    def rec(idx, chain):
        results.append(tuple(chain))
        for i in range(idx, len(nodes)):
            if compatible(chain, nodes[i]):
                chain.append(nodes[i])
                rec(i + 1, chain)
                chain.pop()

    rec(0, [])
    return results


def brute_max_pack(system, zset, depth, n_min, s):
    best = 0.0
    for chain in enumerate_antichains(system, zset, depth, n_min):
        val = sum(math.exp(-s * len(p)) for p in chain)
        best = max(best, val)
    return best


def brute_fractional_cover(system, zset, gauge, n_min, depth):
    """LP optimum of the fractional cover on a tree instance.

    Subtree-incidence matrices are totally balanced, so the covering LP has
    integral optimal vertices and the optimum equals the best antichain
    cover; checked separately against random feasible fractional solutions.
    """
    return brute_min_cover(system, zset, gauge, n_min, depth)


def random_sft(rng, max_symbols=3):
    """A random small SFT with no stranded symbols."""
    m = int(rng.integers(2, max_symbols + 1))
    while True:
        t = (rng.random((m, m)) < 0.7).astype(int)
        if all(t[i].any() for i in range(m)) and all(t[:, j].any() for j in range(m)):
            return SubshiftSystem(m, tuple(tuple(int(v) for v in row) for row in t))


def random_cylinder_set(rng, system, depth, max_cyls=4):
    """A random nonempty union of admissible cylinders with depths <= depth."""
    k = int(rng.integers(1, max_cyls + 1))
    words = []
    for _ in range(k):
        n = int(rng.integers(1, depth + 1))
        w = [int(rng.integers(0, system.alphabet_size))]
        for _ in range(n - 1):
            succ = system.successors(w[-1])
            w.append(int(succ[rng.integers(0, len(succ))]))
        words.append(tuple(w))
    return CylinderSet.from_words(words)


GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0
LOG_GOLDEN = math.log(GOLDEN_RATIO)
