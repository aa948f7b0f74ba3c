"""Pure request -> response functions shared by the FastAPI app and the CLI.

Every response embeds the fully resolved request (config echo) and the tool
version, so identical configs reproduce byte-identical artifacts.
"""

from __future__ import annotations

import math

import numpy as np

from .. import __version__
from ..coverpack import (
    bowen_entropy,
    min_cover_value,
    pack_value,
    packing_entropy,
    packing_outer_value,
    spanning_growth_exponent,
    vitali_select,
    vitali_triples_cover,
)
from ..dimension import (
    DyadicSet,
    doubling_correspondence,
    hausdorff_dimension,
    sqrt_metric_dimension,
)
from ..errors import CertificationError, InputError
from ..frostman import (
    frostman_measure,
    nonnull_gauge_search,
    sandwich_check,
    weighted_cover_value,
)
from ..gauges import Gauge, choose_cutpoints, dominates, stitch_gauges
from ..localent import (
    MarkovMeasure,
    finite_slice_audit,
    local_entropy,
    measure_dimension,
    measure_entropy,
    prop_upper_dim_mixture,
    restrict_and_recheck,
    variational_gap,
)
from ..quadratic import (
    LogisticMap,
    entropy_monotonicity_scan,
    fe_proxy_audit,
    interval_entropy,
    lap_table,
    logistic_entropy,
)
from ..simplex import SimplexError
from ..skewprod import (
    PlateauSpec,
    build_psi,
    default_plateau_spec,
    diagonal_full_entropy_lower,
    diagonal_slice_entropy_upper,
    retarget_plateaus,
)
from ..symbolic import BallFamily, CylinderSet, SubshiftSystem
from . import models as m


def _system(model: m.SystemModel) -> SubshiftSystem:
    return SubshiftSystem(model.alphabet,
                          tuple(tuple(r) for r in model.transitions),
                          model.sided)


def _zset(model, system):
    if model is None:
        return CylinderSet.full(system)
    return CylinderSet(tuple(
        {"word": tuple(c.word), "anchor": c.anchor} for c in model.cylinders))


def _gauge(model: m.GaugeModel) -> Gauge:
    return Gauge.from_json(model.model_dump(exclude_none=True))


def _family(model: m.BallFamilyModel) -> BallFamily:
    return BallFamily.from_json(model.model_dump())


def _family_model(fam: BallFamily) -> m.BallFamilyModel:
    return m.BallFamilyModel(
        balls=[m.BallModel(word=list(b.word), order=b.order) for b in fam.balls],
        epsilon=fam.epsilon)


def _measure(model: m.MeasureModel) -> MarkovMeasure:
    if model.kind == "bernoulli":
        if not model.probs:
            raise InputError("bernoulli measure needs probs")
        return MarkovMeasure.bernoulli(tuple(model.probs))
    if model.kind == "parry":
        if model.system is None:
            raise InputError("parry measure needs a system")
        return MarkovMeasure.parry(_system(model.system))
    if model.matrix is None or model.stationary is None or model.system is None:
        raise InputError("matrix measure needs system, matrix, stationary")
    return MarkovMeasure(_system(model.system),
                         tuple(tuple(r) for r in model.matrix),
                         tuple(model.stationary))


def _envelope(req) -> dict:
    return {"config": req.model_dump(), "version": __version__}


def handle_entropy(req: m.EntropyRequest) -> m.EntropyResponse:
    system = _system(req.system)
    zset = _zset(req.zset, system)
    schedule = req.schedule
    if schedule is None:
        if req.depth is None:
            raise InputError("give either a schedule or a depth")
        d = int(req.depth)
        if req.kind == "bowen":
            schedule = [(2, max(2, d // 2)), (2, d)]
        else:
            schedule = [(max(1, d // 2), max(1, d // 2)), (d, d)]
    fn = bowen_entropy if req.kind == "bowen" else packing_entropy
    est = fn(system, zset, schedule, tol=req.tol)
    rows = [m.ScheduleRow(N=n, D=d, s_star=s,
                          delta=None if math.isnan(delta) else delta)
            for (n, d, s, delta) in est.table]
    return m.EntropyResponse(estimate=est.estimate, uncertainty=est.uncertainty,
                             kind=est.kind, table=rows, **_envelope(req))


def handle_cover(req: m.CoverRequest) -> m.CoverResponse:
    system = _system(req.system)
    zset = _zset(req.zset, system)
    cv = min_cover_value(system, zset, _gauge(req.gauge), req.n_min, req.depth,
                         with_witness=req.witness)
    witness = _family_model(cv.witness) if cv.witness is not None else None
    return m.CoverResponse(value=cv.value, N=cv.n_min, depth=cv.depth,
                           epsilon=cv.epsilon, witness=witness, **_envelope(req))


def handle_pack(req: m.PackRequest) -> m.PackResponse:
    system = _system(req.system)
    zset = _zset(req.zset, system)
    pv = pack_value(system, zset, req.s, req.n_min, req.depth,
                    with_witness=req.witness)
    outer = None
    if req.parts is not None:
        outer = packing_outer_value(system, zset, req.s, req.n_min, req.depth,
                                    req.parts)
    witness = _family_model(pv.witness) if pv.witness is not None else None
    return m.PackResponse(value=pv.value, N=pv.n_min, depth=pv.depth,
                          epsilon=pv.epsilon, outer_value=outer,
                          witness=witness, **_envelope(req))


def handle_vitali(req: m.VitaliRequest) -> m.VitaliResponse:
    fam = _family(req.family)
    selected = vitali_select(fam)
    return m.VitaliResponse(selected=_family_model(selected),
                            triples_cover=vitali_triples_cover(selected, fam),
                            **_envelope(req))


def handle_frostman(req: m.FrostmanRequest) -> m.FrostmanResponse:
    system = _system(req.system)
    kset = _zset(req.kset, system)
    gauge = _gauge(req.gauge)
    mu, c = frostman_measure(system, kset, gauge, req.n_min, req.depth)
    w = weighted_cover_value(system, kset, gauge, req.n_min, req.depth)
    rep = sandwich_check(system, kset, gauge, req.n_min, req.depth)
    if not rep.holds:
        raise CertificationError("sandwich inequality failed", detail=rep.to_json())
    if abs(c - w.value) > 1e-6:
        raise CertificationError("LP duality gap exceeds 1e-6",
                                 detail={"c": c, "W": w.value})
    atoms = [m.AtomWeight(word=list(wd), weight=wt)
             for wd, wt in sorted(mu.weights.items())]
    return m.FrostmanResponse(
        c=c, depth=mu.depth, atoms=atoms,
        sandwich=m.SandwichModel(lower=rep.lower, W=rep.weighted,
                                 upper=rep.upper, holds=rep.holds),
        constraints_ok=True, **_envelope(req))


def handle_gauge(req: m.GaugeOpRequest) -> m.OpResponse:
    gauges = [_gauge(g) for g in req.gauges]
    if req.op == "dominates":
        if len(gauges) != 2:
            raise InputError("dominates needs exactly two gauges")
        rep = dominates(gauges[0], gauges[1], horizon=req.horizon, tol=req.tol)
        result = {"ok": rep.ok, "reason": rep.reason,
                  "ratios": list(rep.ratios)}
    elif req.op == "cutpoints":
        result = {"cuts": choose_cutpoints(gauges, horizon=req.horizon,
                                           tol=req.tol)}
    elif req.op == "stitch":
        cuts = req.cuts
        if cuts is None:
            cuts = choose_cutpoints(gauges, horizon=req.horizon, tol=req.tol)
        stitched = stitch_gauges(gauges, cuts, verify_horizon=req.horizon)
        result = {"cuts": list(cuts), "gauge": stitched.to_json()}
    else:
        if req.system is None or req.kset is None:
            raise InputError("gauge search needs a system and a target set")
        system = _system(req.system)
        kset = _zset(req.kset, system)
        res = nonnull_gauge_search(system, kset, gauges, req.n_min, req.depth,
                                   threshold=req.threshold, horizon=req.horizon,
                                   tol=req.tol)
        result = res.to_json()
    return m.OpResponse(result=result, **_envelope(req))


def handle_logistic(req: m.LogisticRequest) -> m.OpResponse:
    if req.op == "entropy":
        if req.a is None:
            raise InputError("entropy op needs a parameter a")
        result = logistic_entropy(LogisticMap(req.a), req.n_max).to_json()
    elif req.op == "laps":
        if req.a is None:
            raise InputError("laps op needs a parameter a")
        table = lap_table(LogisticMap(req.a), req.n_max)
        result = {"a": req.a, "laps": list(table.laps)}
    elif req.op == "scan":
        if not req.grid:
            raise InputError("scan needs a grid")
        result = entropy_monotonicity_scan(req.grid, req.n_max, req.slack).to_json()
    elif req.op == "interval":
        if req.a is None or req.sub is None:
            raise InputError("interval op needs a and sub")
        result = interval_entropy(LogisticMap(req.a), req.sub, req.n,
                                  req.epsilon).to_json()
    else:
        if req.a is None:
            raise InputError("fe_proxy needs a parameter a")
        result = fe_proxy_audit(req.a, sub=req.sub, n=req.n,
                                epsilon=req.epsilon, n_max=req.n_max)
    return m.OpResponse(result=result, **_envelope(req))


def handle_skew(req: m.SkewRequest) -> m.OpResponse:
    if req.spec is None:
        spec = default_plateau_spec()
    else:
        spec = PlateauSpec(tuple(req.spec.u), tuple(req.spec.v),
                           tuple(req.spec.e_samples),
                           tuple(req.spec.audit_orders))
    profile = build_psi(spec)
    if req.retarget:
        profile = retarget_plateaus(profile, spec.e_samples)
    uppers = [diagonal_slice_entropy_upper(profile, j, req.n_max)
              for j in req.slices]
    lowers = []
    if req.lowers:
        lowers = [diagonal_full_entropy_lower(profile, i, req.n, req.epsilon)
                  for i in range(1, len(profile.plateaus) + 1)]
    result = {
        "plateaus": [{"u": u, "v": v, "alpha": a}
                     for (u, v, a) in profile.plateaus],
        "uppers": uppers,
        "lowers": lowers,
        "metadata": profile.metadata,
    }
    return m.OpResponse(result=result, **_envelope(req))


def handle_dim(req: m.DimRequest) -> m.OpResponse:
    if req.op == "doubling":
        if req.zset is None:
            raise InputError("doubling needs a binary cylinder set")
        system = SubshiftSystem.full_shift(2)
        zset = _zset(req.zset, system)
        result = doubling_correspondence(zset, req.depth, tol=req.tol)
    elif req.op == "hausdorff":
        if req.zset is None:
            raise InputError("hausdorff needs a binary cylinder set")
        system = SubshiftSystem.full_shift(2)
        zset = _zset(req.zset, system)
        dset = DyadicSet.from_binary_cylinders(zset)
        schedule = req.schedule or [req.depth]
        result = hausdorff_dimension(dset, schedule, tol=req.tol).to_json()
    else:
        if req.system is None:
            raise InputError("sqrt correspondence needs a two-sided system")
        result = sqrt_metric_dimension(_system(req.system), req.depth,
                                       tol=req.tol)
    return m.OpResponse(result=result, **_envelope(req))


def handle_localent(req: m.LocalentRequest) -> m.OpResponse:
    if req.op == "measure_entropy":
        mu = _measure(req.measure)
        result = measure_entropy(mu, req.samples, req.window, req.seed).to_json()
    elif req.op == "local":
        mu = _measure(req.measure)
        if req.word is None:
            raise InputError("local op needs a word")
        result = local_entropy(mu, tuple(req.word), req.window).to_json()
    elif req.op == "variational":
        system = _system(req.system)
        zset = _zset(req.zset, system)
        cands = [_measure(c) for c in (req.candidates or [])]
        result = variational_gap(system, zset, cands, depth=req.depth,
                                 sample_count=req.samples,
                                 window=req.window, seed=req.seed)
    elif req.op == "restrict":
        mu = _measure(req.measure)
        system = _system(req.system) if req.system else mu.system
        zset = _zset(req.zset, system)
        yset = _zset(req.yset, system)
        result = restrict_and_recheck(mu, zset, yset, sample_count=req.samples,
                                      window=req.window, seed=req.seed)
    elif req.op == "dimension":
        mix, dims = prop_upper_dim_mixture(terms=req.mixture_terms)
        rep = measure_dimension(mix, req.depth, window=req.window,
                                n_samples=req.samples, seed=req.seed,
                                quantiles=req.quantiles)
        result = {"component_dims": dims, **rep}
    else:
        system = _system(req.system)
        parts = [_zset(p, system) for p in (req.parts or [])]
        result = finite_slice_audit(system, parts, depth=req.depth)
    return m.OpResponse(result=result, **_envelope(req))


def handle_audit(req: m.AuditRequest) -> m.AuditResponse:
    from ..frostman import audit_frostman_constraints

    suites = {}
    rng = np.random.default_rng(req.seed)

    def run_vitali():
        from ..symbolic import Ball, balls_disjoint
        failures = []
        for trial in range(req.count):
            balls = []
            for _ in range(int(rng.integers(1, 101))):
                n = int(rng.integers(1, 9))
                word = tuple(int(v) for v in rng.integers(0, 2, size=n + 2))
                balls.append(Ball(word, n))
            fam = BallFamily(tuple(balls))
            out = vitali_select(fam)
            disjoint = all(balls_disjoint(a, b)
                           for i, a in enumerate(out.balls)
                           for b in out.balls[i + 1:])
            covered = vitali_triples_cover(out, fam)
            if not (disjoint and covered):
                failures.append(trial)
        return failures

    def sandwich_like(check_duality):
        from ..gauges import exp_gauge
        failures = []
        for trial in range(req.count):
            m_sym = int(rng.integers(2, 4))
            while True:
                t = (rng.random((m_sym, m_sym)) < 0.7).astype(int)
                if all(t[i].any() for i in range(m_sym)) and \
                        all(t[:, j].any() for j in range(m_sym)):
                    break
            system = SubshiftSystem(m_sym, tuple(map(tuple, t)))
            depth = int(rng.integers(3, req.depth + 1))
            words = []
            for _ in range(int(rng.integers(1, 5))):
                n = int(rng.integers(1, depth + 1))
                w = [int(rng.integers(0, m_sym))]
                for _ in range(n - 1):
                    succ = system.successors(w[-1])
                    w.append(int(succ[rng.integers(0, len(succ))]))
                words.append(tuple(w))
            zset = CylinderSet.from_words(words)
            n_min = int(rng.integers(1, min(depth, 4) + 1))
            gauge = exp_gauge(0.2 + float(rng.random()))
            rep = sandwich_check(system, zset, gauge, n_min, depth)
            ok = rep.holds
            if ok and check_duality:
                try:
                    mu, c = frostman_measure(system, zset, gauge, n_min, depth)
                    w_val = weighted_cover_value(system, zset, gauge, n_min,
                                                 depth).value
                    ok = abs(c - w_val) <= 1e-6
                    audit_frostman_constraints(mu, system, zset, gauge, n_min,
                                               depth, c)
                except (InputError, SimplexError):
                    ok = False
            if not ok:
                failures.append(trial)
        return failures

    def run_order():
        failures = []
        for trial in range(req.count):
            m_sym = int(rng.integers(2, 4))
            while True:
                t = (rng.random((m_sym, m_sym)) < 0.7).astype(int)
                if all(t[i].any() for i in range(m_sym)) and \
                        all(t[:, j].any() for j in range(m_sym)):
                    break
            system = SubshiftSystem(m_sym, tuple(map(tuple, t)))
            words = []
            for _ in range(int(rng.integers(1, 4))):
                n = int(rng.integers(1, 5))
                w = [int(rng.integers(0, m_sym))]
                for _ in range(n - 1):
                    succ = system.successors(w[-1])
                    w.append(int(succ[rng.integers(0, len(succ))]))
                words.append(tuple(w))
            zset = CylinderSet.from_words(words)
            n_min, depth = 2, req.depth
            h_b = bowen_entropy(system, zset, [(n_min, depth)]).estimate
            h_p = packing_entropy(system, zset, [(n_min, depth)]).estimate
            h_s = spanning_growth_exponent(system, zset, depth, n_min)
            mixing = math.log(depth - n_min + 1) / n_min
            if not (h_b <= h_p + 2e-4 and h_p <= h_s + mixing + 2e-4):
                failures.append(trial)
        return failures

    if req.suite in ("vitali", "all"):
        fails = run_vitali()
        suites["vitali"] = {"count": req.count, "failures": fails}
    if req.suite in ("sandwich", "all"):
        fails = sandwich_like(check_duality=False)
        suites["sandwich"] = {"count": req.count, "failures": fails}
    if req.suite in ("duality", "all"):
        fails = sandwich_like(check_duality=True)
        suites["duality"] = {"count": req.count, "failures": fails}
    if req.suite in ("order", "all"):
        fails = run_order()
        suites["order"] = {"count": req.count, "failures": fails}
    passed = all(not s["failures"] for s in suites.values())
    return m.AuditResponse(passed=passed, suites=suites, **_envelope(req))
