"""Subshifts of finite type, cylinders, Bowen balls, and symbolic metrics.

The canonical radius is epsilon = 1/2 under the metric
d(x, y) = 2^(-min{k : x_k != y_k}), so the Bowen ball of order n around x
is exactly the cylinder on x's first n symbols.  All cover and packing
machinery downstream relies on that identification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InputError, WindowResolutionError

EPSILON = 0.5


def _as_matrix(transitions):
    return tuple(tuple(int(v) for v in row) for row in transitions)


@dataclass(frozen=True)
class SubshiftSystem:
    """An SFT over {0, .., M-1} given by a 0/1 transition matrix.

    Words w are admissible when transitions[w[i]][w[i+1]] == 1 for all i.
    `sided` is "one" or "two"; the word combinatorics are identical, the
    flag only matters for anchored cylinders and the sqrt-scale metric.
    """

    alphabet_size: int
    transitions: tuple
    sided: str = "one"

    def __post_init__(self):
        m = self.alphabet_size
        if m < 1:
            raise InputError("alphabet_size must be >= 1")
        if self.sided not in ("one", "two"):
            raise InputError("sided must be 'one' or 'two'")
        t = _as_matrix(self.transitions)
        object.__setattr__(self, "transitions", t)
        if len(t) != m or any(len(row) != m for row in t):
            raise InputError("transitions must be an MxM matrix")
        if any(v not in (0, 1) for row in t for v in row):
            raise InputError("transitions entries must be 0 or 1")
        if any(not any(row) for row in t):
            raise InputError("stranded symbol: a row of transitions is all zero")
        if any(not any(t[i][j] for i in range(m)) for j in range(m)):
            raise InputError("stranded symbol: a column of transitions is all zero")

    @classmethod
    def full_shift(cls, m, sided="one"):
        return cls(m, tuple(tuple(1 for _ in range(m)) for _ in range(m)), sided)

    @classmethod
    def golden_mean(cls, sided="one"):
        """Binary shift forbidding the word 11."""
        return cls(2, ((1, 1), (1, 0)), sided)

    def successors(self, a):
        return tuple(b for b in range(self.alphabet_size) if self.transitions[a][b])

    def is_admissible(self, word):
        t = self.transitions
        return all(t[word[i]][word[i + 1]] for i in range(len(word) - 1))

    def count_words(self, n):
        """Exact number of admissible words of length n (transfer matrix power)."""
        if n < 1:
            raise InputError("n must be >= 1")
        m = self.alphabet_size
        vec = [1] * m
        for _ in range(n - 1):
            vec = [sum(self.transitions[a][b] * vec[b] for b in range(m)) for a in range(m)]
        return sum(vec)

    def extension_counts(self, length):
        """extension_counts(L)[a] = number of admissible words of length L+1 starting at a."""
        m = self.alphabet_size
        vec = [1] * m
        for _ in range(length):
            vec = [sum(self.transitions[a][b] * vec[b] for b in range(m)) for a in range(m)]
        return vec

    def to_json(self):
        return {
            "alphabet": self.alphabet_size,
            "transitions": [list(row) for row in self.transitions],
            "sided": self.sided,
        }

    @classmethod
    def from_json(cls, obj):
        try:
            return cls(int(obj["alphabet"]), obj["transitions"], obj.get("sided", "one"))
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad system JSON: {exc}") from exc


@dataclass(frozen=True)
class Cylinder:
    """A finite word constraint; anchor 0 for one-sided shifts.

    The cylinder [w] is the set of sequences agreeing with w on positions
    anchor, .., anchor + len(w) - 1.
    """

    word: tuple
    anchor: int = 0

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(s) for s in self.word))
        if len(self.word) < 1:
            raise InputError("cylinder word must have length >= 1")

    @property
    def depth(self):
        return len(self.word)

    def to_json(self):
        return {"word": list(self.word), "anchor": self.anchor}


def cylinder_contains(outer: Cylinder, inner: Cylinder):
    """[inner] subset of [outer]: outer's constraints implied by inner's."""
    lo, hi = outer.anchor, outer.anchor + len(outer.word)
    ilo, ihi = inner.anchor, inner.anchor + len(inner.word)
    if lo < ilo or hi > ihi:
        return False
    return all(outer.word[i] == inner.word[lo + i - ilo] for i in range(hi - lo))


@dataclass(frozen=True)
class CylinderSet:
    """A finite union of cylinders, the computable stand-in for a subset Z.

    Normalization drops duplicates and any cylinder contained in another
    listed cylinder, so the word tree of the set is well founded.
    """

    cylinders: tuple

    def __post_init__(self):
        cyls = [c if isinstance(c, Cylinder) else Cylinder(**c) for c in self.cylinders]
        keep = []
        for c in cyls:
            if any(cylinder_contains(o, c) for o in cyls if o is not c and not _same(o, c)):
                continue
            if any(_same(k, c) for k in keep):
                continue
            keep.append(c)
        keep.sort(key=lambda c: (c.anchor, c.word))
        object.__setattr__(self, "cylinders", tuple(keep))

    @classmethod
    def full(cls, system: SubshiftSystem):
        """The whole space, as the union of all length-1 cylinders."""
        return cls(tuple(Cylinder((a,)) for a in range(system.alphabet_size)))

    @classmethod
    def from_words(cls, words):
        return cls(tuple(Cylinder(tuple(w)) for w in words))

    def is_empty(self):
        return len(self.cylinders) == 0

    def max_depth(self):
        return max((c.depth for c in self.cylinders), default=0)

    def words(self):
        return tuple(c.word for c in self.cylinders)

    def to_json(self):
        return {"cylinders": [c.to_json() for c in self.cylinders]}

    @classmethod
    def from_json(cls, obj):
        try:
            return cls(tuple(Cylinder(tuple(c["word"]), int(c.get("anchor", 0)))
                             for c in obj["cylinders"]))
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad cylinder set JSON: {exc}") from exc


def _same(a: Cylinder, b: Cylinder):
    return a.word == b.word and a.anchor == b.anchor


@dataclass(frozen=True)
class Ball:
    """A Bowen ball descriptor: center word (length >= order) and order n."""

    word: tuple
    order: int

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(s) for s in self.word))
        if self.order < 1:
            raise InputError("ball order must be >= 1")
        if len(self.word) < self.order:
            raise InputError("ball center word shorter than its order")

    @property
    def core(self):
        """The cylinder word the ball equals at epsilon = 1/2."""
        return self.word[: self.order]

    def to_json(self):
        return {"word": list(self.word), "order": self.order}


@dataclass(frozen=True)
class BallFamily:
    balls: tuple
    epsilon: float = EPSILON

    def __post_init__(self):
        balls = tuple(b if isinstance(b, Ball) else Ball(**b) for b in self.balls)
        object.__setattr__(self, "balls", balls)
        if self.epsilon <= 0:
            raise InputError("epsilon must be positive")

    def to_json(self):
        return {"epsilon": self.epsilon, "balls": [b.to_json() for b in self.balls]}

    @classmethod
    def from_json(cls, obj):
        try:
            return cls(tuple(Ball(tuple(b["word"]), int(b["order"])) for b in obj["balls"]),
                       float(obj.get("epsilon", EPSILON)))
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad ball family JSON: {exc}") from exc


def forced_prefix_length(order, radius):
    """Length of the cylinder equal to a Bowen ball of given order and radius.

    Under d(x,y) = 2^(-first difference), the constraint d_n(x,y) <= r forces
    agreement on K extra coordinates past each of the n windows, where
    K = #{k >= 0 : 2^-k > r}.  K = 0 means no coordinate is forced at all and
    the ball is the whole space (this is what happens at the tripled radius
    3/2: any ball of any order is everything).
    """
    if radius >= 1.0:
        return 0
    k = 0
    while 2.0 ** (-k) > radius:
        k += 1
    return 0 if k == 0 else order - 1 + k


def balls_disjoint(a: Ball, b: Ball):
    """Two cylinder balls are disjoint iff neither core is a prefix of the other."""
    wa, wb = a.core, b.core
    n = min(len(wa), len(wb))
    return wa[:n] != wb[:n]


def ball_contains_ball(outer: Ball, inner: Ball):
    wo, wi = outer.core, inner.core
    return len(wo) <= len(wi) and wi[: len(wo)] == wo


# ---------------------------------------------------------------------------
# spanning numbers

def _meets_state(prefix, zwords):
    """Constraint bookkeeping for a path `prefix` against the target words.

    Returns (free, active): free means some target word is a prefix of the
    path (the whole subtree lies in the set's depth hull); active lists the
    target words strictly longer than the path that agree with it so far.
    """
    d = len(prefix)
    free = False
    active = []
    for w in zwords:
        k = min(d, len(w))
        if prefix[:k] == w[:k]:
            if len(w) <= d:
                free = True
            else:
                active.append(w)
    return free, active


def spanning_number(system: SubshiftSystem, zset: CylinderSet, n):
    """Number of admissible length-n words whose cylinder meets the set.

    At epsilon = 1/2 this is exactly the minimal (n, 1/2)-spanning cardinality
    of the set, since distinct length-n cylinders are disjoint.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    if zset.is_empty():
        raise InputError("empty set")
    if any(c.anchor != 0 for c in zset.cylinders):
        raise InputError("spanning_number expects cylinders anchored at 0")
    zwords = zset.words()
    ext = {}

    def free_count(symbol, depth):
        # admissible extensions of length n - depth starting from `symbol`
        rem = n - depth
        if rem not in ext:
            ext[rem] = system.extension_counts(rem)
        return ext[rem][symbol]

    def rec(prefix):
        free, active = _meets_state(prefix, zwords)
        d = len(prefix)
        if free:
            return free_count(prefix[-1], d) if d >= 1 else system.count_words(n)
        if not active:
            return 0
        if d == n:
            return 1
        total = 0
        symbols = range(system.alphabet_size) if d == 0 else system.successors(prefix[-1])
        for s in symbols:
            total += rec(prefix + (s,))
        return total

    return rec(())


# ---------------------------------------------------------------------------
# the sqrt-scale two-sided metric

@dataclass(frozen=True)
class SqrtMetricResult:
    """Outcome of a sqrt-scale distance query on finite windows.

    exact=True: value = 2^-n_sup (or 0.0 for identical-to-resolution with
    n_sup = None is never used; identical windows return exact=False with
    upper bound 2^-L).
    """

    exact: bool
    value: float
    lower: float
    upper: float
    n_sup: int | None
    verified_up_to: int


def sqrt_metric_distance(x, y, lo=0, require_exact=False):
    """Distance 2^-N with N = sup{k >= 0 : x_m = y_m for all -sqrt(k) < m < k}.

    x and y are equal-length sequences holding symbols at positions
    lo, lo+1, .., lo+len-1 of two-sided points.  N = 0 iff x_0 != y_0.
    When the window is too short to settle N, the result is the certified
    interval [0, 2^-K] for the largest verified K; with require_exact=True
    that case raises WindowResolutionError instead.
    """
    if len(x) != len(y):
        raise InputError("windows must have equal length")
    hi = lo + len(x)  # positions lo..hi-1
    if not (lo <= 0 < hi):
        raise InputError("window must contain position 0")
    sym = {p: (x[p - lo], y[p - lo]) for p in range(lo, hi)}
    if sym[0][0] != sym[0][1]:
        return SqrtMetricResult(True, 1.0, 1.0, 1.0, 0, 0)

    k = 1
    verified = 0
    while True:
        # condition C(k): agreement on all integer m with -sqrt(k) < m < k;
        # the smallest such m is -(isqrt(k)-1) when k is a perfect square,
        # else -isqrt(k)
        r = math.isqrt(k)
        left = -(r - 1) if r * r == k else -r
        needed = range(left, k)
        covered = [m for m in needed if lo <= m < hi]
        if any(sym[m][0] != sym[m][1] for m in covered):
            # a covered disagreement settles C(k) even if the window is short
            return SqrtMetricResult(True, 2.0 ** (-verified), 2.0 ** (-verified),
                                    2.0 ** (-verified), verified, verified)
        if len(covered) < len(needed):
            res = SqrtMetricResult(False, 2.0 ** (-verified), 0.0, 2.0 ** (-verified),
                                   None, verified)
            if require_exact:
                raise WindowResolutionError(
                    f"window too short to verify k={k}",
                    detail=(res.lower, res.upper))
            return res
        verified = k
        k += 1


def sqrt_star_index(n):
    """The left edge n* of the order-n column: minimal integer > -sqrt(n)."""
    r = math.isqrt(n)
    return -(r - 1) if r * r == n else -r
