"""Local entropies of measures, variational-gap checks, restricted measures,
and pointwise-dimension estimates for dyadic measures.

Limits are replaced by window tail statistics with the window reported:
liminf and limsup of -(1/n) log mu(B_n) become the min and max over an
explicit range of n, and all Monte Carlo outputs carry (seed, count,
half-width).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coverpack import bowen_entropy
from .errors import InputError
from .frostman import TreeMeasure
from .symbolic import CylinderSet, SubshiftSystem, cylinder_contains


@dataclass(frozen=True)
class MarkovMeasure:
    """A stationary Markov measure supported on an SFT's transitions."""

    system: SubshiftSystem
    matrix: tuple        # row-stochastic, zero off the transition support
    stationary: tuple

    def __post_init__(self):
        m = self.system.alphabet_size
        p = np.array(self.matrix, dtype=float)
        pi = np.array(self.stationary, dtype=float)
        if p.shape != (m, m) or pi.shape != (m,):
            raise InputError("matrix/stationary shapes do not match the system")
        if (p < -1e-15).any() or np.abs(p.sum(axis=1) - 1.0).max() > 1e-12:
            raise InputError("matrix rows must be probabilities summing to 1")
        t = np.array(self.system.transitions)
        if (p[t == 0] > 1e-15).any():
            raise InputError("measure support leaves the transition matrix")
        if np.abs(pi @ p - pi).max() > 1e-12 or abs(pi.sum() - 1.0) > 1e-12:
            raise InputError("stationary vector is not invariant")
        object.__setattr__(self, "matrix", tuple(map(tuple, p)))
        object.__setattr__(self, "stationary", tuple(pi))

    @classmethod
    def bernoulli(cls, probs):
        probs = tuple(float(q) for q in probs)
        m = len(probs)
        if abs(sum(probs) - 1.0) > 1e-12 or any(q < 0 for q in probs):
            raise InputError("bernoulli weights must be a probability vector")
        sys_ = SubshiftSystem.full_shift(m)
        p = tuple(probs for _ in range(m))
        return cls(sys_, p, probs)

    @classmethod
    def parry(cls, system):
        """The maximal-entropy Markov measure from the transition matrix's
        spectral data."""
        a = np.array(system.transitions, dtype=float)
        lam, r = _power_iteration(a)
        _, l = _power_iteration(a.T)
        p = a * r[None, :] / (lam * r[:, None])
        p = p / p.sum(axis=1, keepdims=True)
        pi = l * r
        pi = pi / pi.sum()
        return cls(system, tuple(map(tuple, p)), tuple(pi))

    def entropy_rate(self):
        """Shannon rate: -sum_i pi_i sum_j P_ij log P_ij."""
        total = 0.0
        for i, row in enumerate(self.matrix):
            for q in row:
                if q > 0:
                    total -= self.stationary[i] * q * math.log(q)
        return total

    def log_mass(self, word):
        """log of the cylinder mass; -inf off the support."""
        if not word:
            return 0.0
        q = self.stationary[word[0]]
        if q <= 0:
            return -math.inf
        total = math.log(q)
        for a, b in zip(word, word[1:]):
            q = self.matrix[a][b]
            if q <= 0:
                return -math.inf
            total += math.log(q)
        return total

    def sample_paths(self, count, length, rng):
        m = self.system.alphabet_size
        p = np.array(self.matrix)
        cum = np.cumsum(p, axis=1)
        paths = np.empty((count, length), dtype=np.int64)
        paths[:, 0] = rng.choice(m, size=count, p=np.array(self.stationary))
        for t in range(1, length):
            u = rng.random(count)
            paths[:, t] = (cum[paths[:, t - 1]] < u[:, None]).sum(axis=1)
        return paths

    def to_json(self):
        return {"system": self.system.to_json(),
                "matrix": [list(r) for r in self.matrix],
                "stationary": list(self.stationary)}


def _power_iteration(a, iters=2000, tol=1e-14):
    v = np.ones(a.shape[0])
    lam = 1.0
    for _ in range(iters):
        w = a @ v
        new_lam = np.linalg.norm(w)
        if new_lam == 0:
            raise InputError("transition matrix is nilpotent")
        w = w / new_lam
        if np.abs(w - v).max() < tol:
            v = w
            lam = new_lam
            break
        v, lam = w, new_lam
    return float(lam), np.abs(v)


def ball_measure(mu: MarkovMeasure, word, n):
    """Exact mass of the order-n Bowen ball around the word (its n-prefix)."""
    if n > len(word):
        raise InputError("word too short for the requested order")
    lm = mu.log_mass(tuple(word[:n]))
    return 0.0 if lm == -math.inf else math.exp(lm)


@dataclass(frozen=True)
class LocalEntropySample:
    point: tuple
    values: tuple          # -(1/n) log mu(B_n) for n in [n_lo, n_hi]
    window: tuple
    liminf_proxy: float
    limsup_proxy: float

    def to_json(self):
        return {"point": list(self.point), "window": list(self.window),
                "liminf": self.liminf_proxy, "limsup": self.limsup_proxy,
                "values": list(self.values)}


def local_entropy(mu: MarkovMeasure, word, window):
    """Per-n local entropy curve with window tail min/max as liminf/limsup
    proxies."""
    n_lo, n_hi = int(window[0]), int(window[1])
    if not (1 <= n_lo <= n_hi <= len(word)):
        raise InputError("window must fit inside the given word")
    word = tuple(word)
    if mu.log_mass(word[:n_hi]) == -math.inf:
        raise InputError("point leaves the measure's support inside the window")
    logs = np.empty(n_hi)
    total = math.log(mu.stationary[word[0]])
    logs[0] = total
    for i in range(1, n_hi):
        total += math.log(mu.matrix[word[i - 1]][word[i]])
        logs[i] = total
    ns = np.arange(1, n_hi + 1)
    values = -logs / ns
    tail = values[n_lo - 1:]
    return LocalEntropySample(word, tuple(float(v) for v in tail),
                              (n_lo, n_hi), float(tail.min()), float(tail.max()))


@dataclass(frozen=True)
class MeasureEntropyEstimate:
    upper: float
    lower: float
    half_width: float
    count: int
    window: tuple
    seed: int

    def to_json(self):
        return {"upper": self.upper, "lower": self.lower,
                "half_width": self.half_width, "count": self.count,
                "window": list(self.window), "seed": self.seed}


def measure_entropy(mu: MarkovMeasure, sample_count=500, window=(1000, 2000),
                    seed=0):
    """Monte Carlo average of local window tails over mu-sampled points.

    For ergodic Markov measures both estimates concentrate at the Shannon
    rate; the reported half-width is the 1.96-sigma band of the mean.
    """
    if sample_count < 1:
        raise InputError("sample_count must be >= 1")
    n_lo, n_hi = int(window[0]), int(window[1])
    rng = np.random.default_rng(seed)
    paths = mu.sample_paths(sample_count, n_hi, rng)
    p = np.array(mu.matrix)
    pi = np.array(mu.stationary)
    with np.errstate(divide="ignore"):
        logp = np.log(np.where(p > 0, p, 1.0))
        logpi = np.log(pi)
    step_logs = logp[paths[:, :-1], paths[:, 1:]]
    cum = np.cumsum(np.concatenate([logpi[paths[:, [0]]], step_logs], axis=1),
                    axis=1)
    ns = np.arange(1, n_hi + 1)
    values = -cum / ns
    tail = values[:, n_lo - 1:]
    mins = tail.min(axis=1)
    maxs = tail.max(axis=1)
    upper = float(maxs.mean())
    lower = float(mins.mean())
    spread = float(max(maxs.std(ddof=1), mins.std(ddof=1))) if sample_count > 1 else 0.0
    half = 1.96 * spread / math.sqrt(sample_count)
    return MeasureEntropyEstimate(upper, lower, half, sample_count,
                                  (n_lo, n_hi), seed)


def variational_gap(system, zset: CylinderSet, candidates, depth=16,
                    sample_count=200, window=(200, 400), seed=0, tol=0.05):
    """Check sup over candidate measures of conditioned lower-entropy
    estimates against the set's Bowen entropy estimate.

    Candidates giving the set zero hull mass are skipped with a notice.
    """
    h_b = bowen_entropy(system, zset, [(2, depth)]).estimate
    rows = []
    best = None
    hull_depth = zset.max_depth()
    words = zset.words()
    rng = np.random.default_rng(seed)
    for idx, mu in enumerate(candidates):
        mass = sum(math.exp(mu.log_mass(w)) for w in words
                   if mu.log_mass(w) > -math.inf)
        if mass <= 1e-12:
            rows.append({"candidate": idx, "skipped": True,
                         "notice": "measure gives the set zero mass"})
            continue
        n_lo, n_hi = window
        paths = mu.sample_paths(sample_count * 4, n_hi, rng)
        accept = []
        for path in paths:
            prefix = tuple(path[:hull_depth])
            if any(prefix[: len(w)] == w[: len(prefix)] for w in words):
                accept.append(path)
            if len(accept) >= sample_count:
                break
        if not accept:
            rows.append({"candidate": idx, "skipped": True,
                         "notice": "no sampled path hit the set hull"})
            continue
        log_mass = math.log(mass)
        mins = []
        for path in accept:
            sample = local_entropy(mu, tuple(path), (n_lo, n_hi))
            # conditioning divides ball masses by the hull mass
            shifted = [v + log_mass / n
                       for v, n in zip(sample.values, range(n_lo, n_hi + 1))]
            mins.append(min(shifted))
        est = float(np.mean(mins))
        rows.append({"candidate": idx, "skipped": False, "lower_estimate": est,
                     "gap": h_b - est, "holds": est <= h_b + tol})
        if best is None or est > best[1]:
            best = (idx, est)
    return {"bowen": h_b, "candidates": rows,
            "best": None if best is None else {"candidate": best[0],
                                               "lower_estimate": best[1]},
            "holds": all(r.get("holds", True) for r in rows)}


def restrict_and_recheck(mu: MarkovMeasure, zset: CylinderSet, yset: CylinderSet,
                         sample_count=100, window=(200, 400), seed=0, tol=0.05):
    """Compare lower local-entropy tails of the normalized restriction onto Y
    against the original measure's, at sampled points of Y.

    Inside Y's cylinders and past their depth, restricted ball masses are
    exactly mu(B_n)/mu(Y), so the tails shift by log mu(Y) / n.
    """
    for yc in yset.cylinders:
        if not any(cylinder_contains(zc, yc) for zc in zset.cylinders):
            raise InputError("Y must be contained in Z cylinder-wise")
    words = yset.words()
    mass = sum(math.exp(mu.log_mass(w)) for w in words
               if mu.log_mass(w) > -math.inf)
    if mass <= 0:
        raise InputError("mu(Y) = 0")
    n_lo, n_hi = int(window[0]), int(window[1])
    y_depth = yset.max_depth()
    if n_lo <= y_depth:
        raise InputError("window must start beyond Y's cylinder depth")
    rng = np.random.default_rng(seed)
    rows = []
    holds = True
    for _ in range(sample_count):
        w = words[int(rng.integers(0, len(words)))]
        path = _sample_path_from(mu, w, n_hi, rng)
        base = local_entropy(mu, path, (n_lo, n_hi))
        shift = math.log(mass)
        restricted_vals = [v + shift / n
                           for v, n in zip(base.values, range(n_lo, n_hi + 1))]
        r_min = min(restricted_vals)
        ok = r_min >= base.liminf_proxy - tol
        holds = holds and ok
        rows.append({"point": list(path[:8]), "mu_liminf": base.liminf_proxy,
                     "nu_liminf": r_min, "holds": ok})
    return {"mu_mass_y": mass, "samples": rows, "holds": holds,
            "window": [n_lo, n_hi]}


def _sample_path_from(mu: MarkovMeasure, prefix, length, rng):
    p = np.array(mu.matrix)
    cum = np.cumsum(p, axis=1)
    path = list(prefix)
    while len(path) < length:
        u = float(rng.random())
        path.append(int((cum[path[-1]] < u).sum()))
    return tuple(path[:length])


def finite_slice_audit(system, parts, depth=12, tol=None):
    """Per-part and union Bowen estimates for an explicit finite
    decomposition, with the attainment flag.

    At any finite truncation some part attains the union's value (the
    union's cover splits over parts); the infinite increasing-slice
    phenomenon is exactly what this finite shadow cannot produce.  Dropping
    to a part loses at most log(M)/depth of exponent at this resolution, so
    that is the default attainment tolerance.
    """
    parts = list(parts)
    if not parts:
        raise InputError("empty decomposition")
    if tol is None:
        tol = math.log(system.alphabet_size) / depth + 5e-3
    union = CylinderSet(tuple(c for p in parts for c in p.cylinders))
    # compare parts at matched atom-level resolution (N = D); a smaller N
    # lets shallow covers dominate small parts and skews the comparison
    h_union = bowen_entropy(system, union, [(depth, depth)]).estimate
    rows = []
    for i, part in enumerate(parts):
        h = bowen_entropy(system, part, [(depth, depth)]).estimate
        rows.append({"part": i, "h_bowen": h, "attains": h >= h_union - tol})
    attained = [r["part"] for r in rows if r["attains"]]
    return {
        "union": h_union,
        "parts": rows,
        "attained": attained,
        "tolerance": tol,
        "ties": attained if len(attained) > 1 else [],
        "note": ("a finite decomposition always has an attaining part; "
                 "only countable decompositions can slice strictly below"),
    }


# ---------------------------------------------------------------------------
# dyadic measures and pointwise dimension

class BinaryHmmMeasure:
    """A hidden-Markov measure on binary sequences: per-bit transfer
    operators over a finite state set.  Masses of bit prefixes come from
    matrix products, so deep cylinders never need enumeration."""

    def __init__(self, initial, op0, op1):
        self.initial = np.asarray(initial, dtype=float)
        self.op = (np.asarray(op0, dtype=float), np.asarray(op1, dtype=float))
        total = self.op[0] + self.op[1]
        if np.abs(total.sum(axis=1) - 1.0).max() > 1e-9:
            raise InputError("bit operators must combine to a stochastic matrix")
        if abs(self.initial.sum() - 1.0) > 1e-9:
            raise InputError("initial distribution must sum to 1")

    def log2_mass_profile(self, bits):
        """log2 mu([b_1 .. b_g]) for g = 1 .. len(bits)."""
        v = self.initial.copy()
        out = np.empty(len(bits))
        scale = 0.0
        for g, b in enumerate(bits):
            v = v @ self.op[int(b)]
            s = v.sum()
            if s <= 0:
                out[g:] = -np.inf
                return out
            scale += math.log2(s)
            v = v / s
            out[g] = scale
        return out

    def sample_atoms(self, count, depth, rng):
        states = rng.choice(len(self.initial), size=count, p=self.initial)
        bits = np.empty((count, depth), dtype=np.int8)
        p = np.stack([self.op[0].sum(axis=1), self.op[1].sum(axis=1)], axis=1)
        # per-state bit probabilities then conditional state transitions
        for t in range(depth):
            pu = p[states]
            pu = pu / pu.sum(axis=1, keepdims=True)
            u = rng.random(count)
            b = (u > pu[:, 0]).astype(np.int8)
            bits[:, t] = b
            new_states = np.empty_like(states)
            for bit in (0, 1):
                mask = b == bit
                if not mask.any():
                    continue
                rows = self.op[bit][states[mask]]
                rows = rows / rows.sum(axis=1, keepdims=True)
                cum = np.cumsum(rows, axis=1)
                uu = rng.random(int(mask.sum()))
                new_states[mask] = (cum < uu[:, None]).sum(axis=1)
            states = new_states
        return bits


class TreeMeasureDyadic:
    """Adapter exposing a binary TreeMeasure as a dyadic measure."""

    def __init__(self, tree: TreeMeasure):
        if any(s not in (0, 1) for w in tree.weights for s in w):
            raise InputError("dyadic adapter needs binary atoms")
        self.tree = tree
        self.depth = tree.depth

    def log2_mass_profile(self, bits):
        bits = tuple(int(b) for b in bits)
        out = np.empty(len(bits))
        for g in range(1, len(bits) + 1):
            m = self.tree.mass(bits[:g])
            out[g - 1] = math.log2(m) if m > 0 else -np.inf
        return out

    def sample_atoms(self, count, depth, rng):
        atoms = sorted(self.tree.weights)
        weights = np.array([self.tree.weights[a] for a in atoms])
        weights = weights / weights.sum()
        idx = rng.choice(len(atoms), size=count, p=weights)
        return np.array([atoms[i][:depth] for i in idx], dtype=np.int8)

    def enumerate_atoms(self):
        return sorted(w for w, v in self.tree.weights.items() if v > 0)


class MixtureDyadicMeasure:
    """A finite convex mixture of dyadic measures."""

    def __init__(self, components, weights):
        w = np.asarray(weights, dtype=float)
        if abs(w.sum() - 1.0) > 1e-9 or (w < 0).any():
            raise InputError("mixture weights must be a probability vector")
        self.components = list(components)
        self.weights = w

    def log2_mass_profile(self, bits):
        profiles = np.stack([c.log2_mass_profile(bits) for c in self.components])
        logw = np.log2(np.where(self.weights > 0, self.weights, 1.0))[:, None]
        combined = profiles + logw
        top = combined.max(axis=0)
        with np.errstate(invalid="ignore"):
            out = top + np.log2(np.power(2.0, combined - top).sum(axis=0))
        return np.where(np.isfinite(top), out, -np.inf)

    def sample_atoms(self, count, depth, rng):
        picks = rng.choice(len(self.components), size=count, p=self.weights)
        bits = np.empty((count, depth), dtype=np.int8)
        for i, comp in enumerate(self.components):
            mask = picks == i
            if mask.any():
                bits[mask] = comp.sample_atoms(int(mask.sum()), depth, rng)
        return bits


def bernoulli_coin_measure(p_heads):
    """Product Bernoulli(p) coin measure as a one-state HMM."""
    p = float(p_heads)
    if not (0 < p < 1):
        raise InputError("need 0 < p < 1")
    return BinaryHmmMeasure([1.0], [[1.0 - p]], [[p]])


def design_entropy_sgap(target_h, max_gap=16):
    """A gap set S whose gap shift has entropy close to the target.

    Greedy digit construction on the identity sum_{s in S} x^-(s+1) = 1:
    gaps are added while the resulting growth rate stays at or below the
    target, so the residual shrinks geometrically in max_gap.
    """
    if not (0.0 < target_h <= math.log(2.0)):
        raise InputError("target entropy must lie in (0, log 2]")
    s_set = []
    for gap in range(max_gap + 1):
        trial = s_set + [gap]
        lam = _sgap_growth(trial)
        if math.log(lam) <= target_h + 1e-12:
            s_set = trial
    if not s_set:
        raise InputError("no gap set fits under the target")
    lam = _sgap_growth(s_set)
    return s_set, math.log(lam)


def _sgap_growth(s_set):
    def g(x):
        return sum(x ** (-(s + 1)) for s in s_set)

    if g(1.0) <= 1.0 + 1e-15:
        return 1.0
    lo, hi = 1.0, 2.0
    while g(hi) > 1.0:
        hi += 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sgap_binary_measure(s_set):
    """The maximal-entropy measure of the gap shift, as a binary HMM.

    States count the distance since the last 1; a 1 is allowed exactly when
    the current distance lies in S.  Probabilities follow the spectral data
    of the state graph.
    """
    k = max(s_set) + 1
    a = np.zeros((k, k))
    for st in range(k - 1):
        a[st, st + 1] = 1.0
    for st in s_set:
        a[st, 0] = 1.0
    lam, r = _power_iteration(a)
    _, l = _power_iteration(a.T)
    p = a * r[None, :] / (lam * r[:, None])
    p = p / p.sum(axis=1, keepdims=True)
    pi = l * r
    pi = pi / pi.sum()
    op1 = np.zeros((k, k))
    op0 = np.zeros((k, k))
    for st in range(k):
        if st in s_set:
            op1[st, 0] = p[st, 0]
        if st + 1 < k:
            op0[st, st + 1] = p[st, st + 1]
    return BinaryHmmMeasure(pi, op0, op1)


def prop_upper_dim_mixture(terms=4, max_gap=16):
    """The truncated mixture sum 2^-n mu_{s_n} over designed gap shifts with
    dimensions s_n = 1 - 2^-n, weights renormalized at the truncation."""
    comps = []
    dims = []
    for n in range(1, terms + 1):
        s_n = 1.0 - 2.0 ** (-n)
        s_set, h = design_entropy_sgap(s_n * math.log(2.0), max_gap)
        comps.append(sgap_binary_measure(s_set))
        dims.append(h / math.log(2.0))
    w = np.array([2.0 ** (-n) for n in range(1, terms + 1)])
    w = w / w.sum()
    return MixtureDyadicMeasure(comps, w), dims


def measure_dimension(mu, depth, window=None, n_samples=2000, seed=0,
                      quantiles=(0.05, 0.95), exact_cap=20000):
    """Essential bounds of the lower pointwise dimension on the dyadic ladder.

    Per atom, the liminf proxy is the minimum over the window of
    -(1/g) log2 mu(I_g).  Explicit tree measures below `exact_cap` atoms are
    enumerated exactly; otherwise atoms are sampled from mu and the essential
    bounds are the stated quantiles, which ignore vanishing-mass outliers the
    way essential bounds must.
    """
    if window is None:
        window = (max(1, depth // 2), depth)
    g_lo, g_hi = int(window[0]), int(window[1])
    if not (1 <= g_lo <= g_hi <= depth):
        raise InputError("window must fit inside [1, depth]")

    if isinstance(mu, TreeMeasure):
        mu = TreeMeasureDyadic(mu)

    def proxy(bits):
        profile = mu.log2_mass_profile(bits[:g_hi])
        gs = np.arange(1, g_hi + 1)
        vals = -profile / gs
        return float(vals[g_lo - 1:].min())

    if isinstance(mu, TreeMeasureDyadic) and len(mu.tree.weights) <= exact_cap:
        proxies = [proxy(np.array(a, dtype=np.int8))
                   for a in mu.enumerate_atoms()]
        return {"lower": min(proxies), "upper": max(proxies),
                "mode": "exact", "atoms": len(proxies),
                "window": [g_lo, g_hi]}

    rng = np.random.default_rng(seed)
    bits = mu.sample_atoms(n_samples, g_hi, rng)
    proxies = np.array([proxy(bits[i]) for i in range(n_samples)])
    lo_q, hi_q = quantiles
    return {"lower": float(np.quantile(proxies, lo_q)),
            "upper": float(np.quantile(proxies, hi_q)),
            "mode": "sampled", "samples": n_samples, "seed": seed,
            "quantiles": [lo_q, hi_q], "window": [g_lo, g_hi]}
