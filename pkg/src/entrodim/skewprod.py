"""Plateau profiles and the diagonal-curve skew product over [0,1]^2.

A nondecreasing smooth profile rises through a ladder of plateaus and feeds
the fiber parameter a(x) = 4*phi(x) of the skew map (x, y) -> (x, a(x)y(1-y)).
Restricted diagonal pieces then carry strictly less entropy than log 2 while
plateau fibers near x = 1 carry almost all of it; both sides are estimated
numerically by the quadratic-family machinery.

All constructions are truncated at P plateaus and every claim is reported
relative to the truncation, never as a limit.  Past the last plateau the
profile continues as a constant, which makes smoothness at x = 1 exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, InputError
from .quadratic import LogisticMap, interval_entropy, logistic_entropy

_D_FLOOR = 1e-300


def smooth_step(x):
    """The standard flat-ended step s = B(x) / (B(x) + B(1-x)), B(t) = e^{-1/t}.

    s(0) = 0, s(1) = 1, s(1/2) = 1/2, all derivatives vanish at both ends.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    lo = x <= 0.0
    hi = x >= 1.0
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    t = x[mid]
    b = np.exp(-1.0 / t)
    b1 = np.exp(-1.0 / (1.0 - t))
    out[mid] = b / (b + b1)
    return float(out[0]) if scalar else out


def _step_derivative_sup(order, grid=20001):
    """sup |s^(order)| on (0,1) by dense central finite differences."""
    h = 1.0 / (grid - 1)
    xs = np.linspace(0.0, 1.0, grid)
    vals = smooth_step(xs)
    d = vals
    for _ in range(order):
        d = np.gradient(d, h)
    return float(np.abs(d).max())


_STEP_SUP_CACHE = {}


def step_derivative_sup(order):
    if order not in _STEP_SUP_CACHE:
        _STEP_SUP_CACHE[order] = _step_derivative_sup(order)
    return _STEP_SUP_CACHE[order]


@dataclass(frozen=True)
class PlateauSpec:
    """Interleaved plateau geometry and retarget sample values.

    0 < u_1 < v_1 < .. < u_P < v_P < 1; e_samples sorted in [0, 1) with
    supremum near 1 at the truncation depth P = len(u).
    """

    u: tuple
    v: tuple
    e_samples: tuple
    audit_orders: tuple = (1,)

    def __post_init__(self):
        u = tuple(float(x) for x in self.u)
        v = tuple(float(x) for x in self.v)
        e = tuple(float(x) for x in self.e_samples)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "e_samples", e)
        if len(u) != len(v) or len(u) < 2:
            raise InputError("need matching u, v ladders with P >= 2")
        ladder = [0.0]
        for a_, b_ in zip(u, v):
            ladder.extend([a_, b_])
        ladder.append(1.0)
        if any(ladder[i] >= ladder[i + 1] for i in range(len(ladder) - 1)):
            raise InputError("need 0 < u_1 < v_1 < .. < u_P < v_P < 1")
        if list(e) != sorted(e) or any(not (0.0 <= c < 1.0) for c in e):
            raise InputError("e_samples must be sorted inside [0, 1)")

    @property
    def depth(self):
        return len(self.u)

    def to_json(self):
        return {"u": list(self.u), "v": list(self.v),
                "e_samples": list(self.e_samples),
                "audit_orders": list(self.audit_orders)}

    @classmethod
    def from_json(cls, obj):
        try:
            return cls(tuple(obj["u"]), tuple(obj["v"]),
                       tuple(obj["e_samples"]),
                       tuple(obj.get("audit_orders", (1,))))
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad plateau spec JSON: {exc}") from exc


@dataclass(frozen=True)
class Segment:
    kind: str      # "ramp" | "plateau"
    x0: float
    x1: float
    y0: float
    y1: float

    def eval(self, x):
        if self.kind == "plateau":
            return np.full_like(np.asarray(x, dtype=float), self.y0)
        tau = (np.asarray(x, dtype=float) - self.x0) / (self.x1 - self.x0)
        return self.y0 + (self.y1 - self.y0) * smooth_step(tau)


@dataclass(frozen=True)
class SmoothProfile:
    """Piecewise profile phi on [0, 1] with a plateau registry.

    plateaus: tuple of (u_i, v_i, alpha_i) with alpha_i the exact constant;
    metadata records construction choices (retarget picks, proxy status).
    """

    segments: tuple
    plateaus: tuple
    psi_one: float            # pre-normalization value at 1
    metadata: dict = field(default_factory=dict)

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xs = np.atleast_1d(x).astype(float)
        if (xs < 0).any() or (xs > 1).any():
            raise InputError("profile domain is [0, 1]")
        edges = np.array([seg.x0 for seg in self.segments[1:]])
        idx = np.searchsorted(edges, xs, side="right")
        out = np.empty_like(xs)
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if mask.any():
                out[mask] = seg.eval(xs[mask])
        return float(out[0]) if scalar else out

    def a(self, x):
        """Fiber parameter a(x) = 4 * phi(x)."""
        return 4.0 * self.phi(x)

    def plateau_alpha(self, i):
        return self.plateaus[i - 1][2]

    def derivative_samples(self, x0, x1, order, samples=2001):
        xs = np.linspace(x0, x1, samples)
        h = xs[1] - xs[0]
        d = self.phi(xs)
        for _ in range(order):
            d = np.gradient(d, h)
        return xs, d

    def derivatives_at_one(self, step, orders=(1, 2, 3, 4)):
        """Backward finite differences of phi at x = 1."""
        coeffs = {
            1: [1.0, -1.0],
            2: [1.0, -2.0, 1.0],
            3: [1.0, -3.0, 3.0, -1.0],
            4: [1.0, -4.0, 6.0, -4.0, 1.0],
        }
        out = {}
        for k in orders:
            c = coeffs[k]
            val = sum(ci * self.phi(1.0 - j * step) for j, ci in enumerate(c))
            out[k] = abs(val) / step ** k
        return out

    def to_json(self, sample_count=256):
        xs = np.linspace(0.0, 1.0, sample_count)
        return {
            "plateaus": [{"u": u, "v": v, "alpha": a} for (u, v, a) in self.plateaus],
            "samples": [{"x": float(x), "phi": float(p)}
                        for x, p in zip(xs, self.phi(xs))],
            "metadata": self.metadata,
        }


def default_plateau_spec(depth=6):
    """The default truncation geometry.

    The plateau ladder sits inside [0.93, 0.99] so the slice points 1 - 1/j
    for small j land on the initial ramp, where the profile is still well
    below 1 and the fiber entropy margin under log 2 is comfortable.
    e_samples are midpoints of the value bands [alpha_i, alpha_(i+1)] plus a
    tail accumulating at 1, so retargeting is exercised at the truncation.
    """
    if depth != 6:
        raise InputError("the default geometry is built for P = 6")
    u = (0.930, 0.944, 0.956, 0.966, 0.9745, 0.9825)
    v = (0.938, 0.950, 0.961, 0.970, 0.9780, 0.9860)
    base = build_psi(PlateauSpec(u, v, (0.5,)))
    alphas = [a for (_u, _v, a) in base.plateaus]
    e = sorted({
        0.5 * (alphas[1] + alphas[2]),
        0.5 * (alphas[3] + alphas[4]),
        0.5 * (alphas[4] + alphas[5]),
        1.0 - 0.25 * (1.0 - alphas[4]),
    })
    return PlateauSpec(u, v, tuple(e))


def build_psi(spec: PlateauSpec):
    """The plateau profile: gamma_1 = 1/2 of the range, then ever-smaller
    increments found by halving until the sampled ramp-derivative bound
    |psi^(j)| < (1 - v_p) / p holds for the audited orders.

    The ratio condition 2(gamma_{p+1} - gamma_p) < gamma_p - gamma_{p-1} is
    enforced by construction and re-verified.  After the last plateau the
    profile continues as the constant gamma_P and everything is normalized
    by that value, so phi(1) = 1 exactly.
    """
    u, v, depth = spec.u, spec.v, spec.depth
    gammas = [0.0, 0.5]
    segments = [Segment("ramp", 0.0, u[0], 0.0, 0.5),
                Segment("plateau", u[0], v[0], 0.5, 0.5)]
    for p in range(2, depth + 1):
        width = u[p - 1] - v[p - 2]
        bound = (1.0 - v[p - 1]) / p
        d = 0.499 * (gammas[p - 1] - gammas[p - 2])
        while True:
            ok = all(d * step_derivative_sup(j) / width ** j < bound
                     for j in spec.audit_orders)
            if ok:
                break
            d *= 0.5
            if d < _D_FLOOR:
                raise InfeasibleError(
                    f"ramp increment underflow searching d_{p}")
        g = gammas[p - 1] + d
        segments.append(Segment("ramp", v[p - 2], u[p - 1], gammas[p - 1], g))
        segments.append(Segment("plateau", u[p - 1], v[p - 1], g, g))
        gammas.append(g)
    psi_one = gammas[-1]
    segments.append(Segment("plateau", v[depth - 1], 1.0, psi_one, psi_one))

    norm = psi_one
    segments = tuple(Segment(s.kind, s.x0, s.x1, s.y0 / norm, s.y1 / norm)
                     for s in segments)
    alphas = [g / norm for g in gammas[1:]]
    for i in range(1, len(alphas) - 1):
        if not 2.0 * (alphas[i + 1] - alphas[i]) < alphas[i] - alphas[i - 1]:
            raise InfeasibleError(f"ratio condition fails at plateau {i + 1}")
    plateaus = tuple((u[i], v[i], alphas[i]) for i in range(depth))
    profile = SmoothProfile(segments, plateaus, psi_one,
                            {"retargets": [], "normalized_by": psi_one})
    _audit_monotone(profile)
    return profile


def _audit_monotone(profile, grid=100001):
    xs = np.linspace(0.0, 1.0, grid)
    vals = profile.phi(xs)
    drops = np.diff(vals) < -1e-12
    if drops.any():
        raise InfeasibleError(
            f"profile not monotone near x = {xs[int(np.argmax(drops))]:.6f}")
    for (u_i, v_i, alpha) in profile.plateaus:
        sub = vals[(xs >= u_i) & (xs <= v_i)]
        if sub.size and np.abs(sub - alpha).max() > 1e-12:
            raise InfeasibleError("plateau not exactly constant")


def retarget_plateaus(profile: SmoothProfile, e_samples):
    """Move a subsequence of plateau constants onto values from e_samples.

    Greedy first-admissible choice: the p-th retarget needs a sample c with
    alpha_(n_{p-1}+2) < c < 1 lying in some band [alpha_i, alpha_(i+1)] with
    i >= n_{p-1} + 2; the adjacent ramps are rescaled affinely, with factors
    in [0, 2] by the ratio condition, so |eta^(k)| <= 2 |psi^(k)| pointwise.
    An inadmissible first step is an error naming the gap; later steps simply
    stop at the truncation.
    """
    e = sorted(float(c) for c in e_samples)
    if not e:
        raise InputError("empty e_samples")
    alphas = [a for (_u, _v, a) in profile.plateaus]
    depth = len(alphas)
    segments = list(profile.segments)
    plateaus = list(profile.plateaus)
    picks = []
    prev_n = 0
    while True:
        lower_idx = prev_n + 2 if picks else 2
        if lower_idx > depth - 1:
            break
        lower_val = alphas[lower_idx - 1]
        choice = None
        for c in e:
            if not (lower_val < c < 1.0):
                continue
            # a sample equal to a plateau's own value is a no-op retarget
            for i in range(lower_idx, depth + 1):
                if alphas[i - 1] == c:
                    choice = (i, c)
                    break
            if choice is None:
                for i in range(lower_idx, depth):
                    if alphas[i - 1] <= c <= alphas[i]:
                        choice = (i, c)
                        break
            if choice:
                break
        if choice is None:
            if not picks:
                raise InputError(
                    f"no admissible retarget value: need alpha_{lower_idx} = "
                    f"{lower_val:.6g} < c < 1 inside a plateau band")
            break
        i, c = choice
        # plateau i sits at segment index 2i - 1; ramps at 2i - 2 and 2i
        ramp_in = segments[2 * i - 2]
        plat = segments[2 * i - 1]
        ramp_out = segments[2 * i]
        segments[2 * i - 2] = Segment("ramp", ramp_in.x0, ramp_in.x1, ramp_in.y0, c)
        segments[2 * i - 1] = Segment("plateau", plat.x0, plat.x1, c, c)
        segments[2 * i] = Segment(ramp_out.kind, ramp_out.x0, ramp_out.x1, c,
                                  ramp_out.y1)
        plateaus[i - 1] = (plateaus[i - 1][0], plateaus[i - 1][1], c)
        picks.append({"plateau": i, "value": c, "rule": "greedy first-admissible"})
        prev_n = i
    meta = dict(profile.metadata)
    meta["retargets"] = picks
    meta["fe_proxy"] = "plateau values are proxy parameters; audit via fe_proxy_audit"
    out = SmoothProfile(tuple(segments), tuple(plateaus), profile.psi_one, meta)
    _audit_monotone(out)
    _audit_retarget_derivatives(profile, out)
    return out


def _audit_retarget_derivatives(before: SmoothProfile, after: SmoothProfile,
                                orders=(1, 2), samples=801):
    for seg_b, seg_a in zip(before.segments, after.segments):
        if seg_b.kind != "ramp":
            continue
        for order in orders:
            _xs, db = before.derivative_samples(seg_b.x0, seg_b.x1, order, samples)
            _xs, da = after.derivative_samples(seg_a.x0, seg_a.x1, order, samples)
            if np.abs(da).max() > 2.0 * np.abs(db).max() + 1e-9:
                raise InfeasibleError(
                    f"retarget derivative bound broke on [{seg_b.x0}, {seg_b.x1}] "
                    f"order {order}")


@dataclass(frozen=True)
class SkewProduct:
    """T(x, y) = (x, a(x) * y * (1 - y)), the fiberwise logistic action."""

    profile: SmoothProfile

    def __post_init__(self):
        xs = np.linspace(0.0, 1.0, 4097)
        av = self.profile.a(xs)
        if (av < -1e-12).any() or (av > 4.0 + 1e-12).any():
            raise InputError("fiber parameter leaves [0, 4]")

    def __call__(self, x, y):
        return x, self.profile.a(x) * y * (1.0 - y)

    def fiber_orbit(self, x, y0, n):
        a = self.profile.a(x)
        ys = [y0]
        y = y0
        for _ in range(n):
            y = a * y * (1.0 - y)
            ys.append(y)
        return ys


def skew_map(profile: SmoothProfile):
    return SkewProduct(profile)


def diagonal_slice_entropy_upper(profile: SmoothProfile, j, n_max=14):
    """Upper bound for the entropy of the diagonal piece up to 1 - 1/j:
    every invariant measure there sits on one fiber, so the bound is the
    fiber entropy at the right edge, a(1 - 1/j)."""
    if j < 2:
        raise InputError("j must be >= 2")
    a_val = profile.a(1.0 - 1.0 / j)
    fit = logistic_entropy(LogisticMap(min(4.0, max(0.0, a_val))), n_max)
    return {"j": j, "a": a_val, "upper": fit.estimate,
            "margin": math.log(2.0) - fit.estimate}


def diagonal_full_entropy_lower(profile: SmoothProfile, i, n=14,
                                epsilon=1.0 / 256.0):
    """Lower-bound proxy for the diagonal piece over plateau i: the factor
    onto the fiber carries it to the interval [u_i, v_i] under the plateau
    logistic map."""
    if not (1 <= i <= len(profile.plateaus)):
        raise InputError("no such plateau in the registry")
    u_i, v_i, alpha = profile.plateaus[i - 1]
    a_val = 4.0 * alpha
    est = interval_entropy(LogisticMap(min(4.0, a_val)), (u_i, v_i), n, epsilon)
    return {"i": i, "a": a_val, "interval": (u_i, v_i), "lower": est.estimate}
