"""Thin command-line client for the entrodim service.

Every subcommand builds a typed request, dispatches it to the service layer
(in process by default, over HTTP with --base-url), and writes the response
as a JSON or CSV artifact.  Outputs embed the resolved config and the tool
version and are byte-identical for identical configs and seeds.

Exit codes: 0 success, 2 validation error, 3 numerical-certification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor

from pydantic import ValidationError

from . import __version__
from .errors import CertificationError, EntrodimError, InputError
from .service import handlers
from .service import models as m

_HANDLERS = {
    "entropy": (m.EntropyRequest, handlers.handle_entropy),
    "cover": (m.CoverRequest, handlers.handle_cover),
    "pack": (m.PackRequest, handlers.handle_pack),
    "vitali": (m.VitaliRequest, handlers.handle_vitali),
    "frostman": (m.FrostmanRequest, handlers.handle_frostman),
    "gauge": (m.GaugeOpRequest, handlers.handle_gauge),
    "logistic": (m.LogisticRequest, handlers.handle_logistic),
    "skew": (m.SkewRequest, handlers.handle_skew),
    "dim": (m.DimRequest, handlers.handle_dim),
    "localent": (m.LocalentRequest, handlers.handle_localent),
    "audit": (m.AuditRequest, handlers.handle_audit),
}

_BUILTIN_SYSTEMS = {
    "full2": {"alphabet": 2, "transitions": [[1, 1], [1, 1]], "sided": "one"},
    "full2-two": {"alphabet": 2, "transitions": [[1, 1], [1, 1]], "sided": "two"},
    "golden": {"alphabet": 2, "transitions": [[1, 1], [1, 0]], "sided": "one"},
    "golden-two": {"alphabet": 2, "transitions": [[1, 1], [1, 0]], "sided": "two"},
}


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"{path}: {exc}", 2) from exc


def _system_arg(value):
    if value in _BUILTIN_SYSTEMS:
        return dict(_BUILTIN_SYSTEMS[value])
    return _load_json(value)


def _gauge_arg(value):
    if value.startswith("exp:"):
        return {"type": "exp", "s": float(value[4:])}
    return _load_json(value)


def dispatch(command, request, base_url=None):
    """Run a request against the in-process service or a remote one."""
    if base_url is None:
        _model, fn = _HANDLERS[command]
        return fn(request).model_dump()
    url = f"{base_url.rstrip('/')}/v1/{command}"
    data = json.dumps(request.model_dump()).encode()
    req = urllib.request.Request(url, data=data,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            return json.loads(resp.read().decode())
    except urllib.error.HTTPError as exc:
        body = exc.read().decode(errors="replace")
        code = 2 if exc.code == 422 else 3
        raise CliError(f"server rejected the request ({exc.code}): {body}",
                       code) from exc
    except urllib.error.URLError as exc:
        raise CliError(f"cannot reach {url}: {exc}", 2) from exc


def _emit(payload, args, csv_rows=None):
    if args.format == "csv":
        if csv_rows is None:
            raise CliError("this command has no CSV table; use --format json", 2)
        header, rows = csv_rows
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(
                "" if v is None else repr(float(v)) if isinstance(v, float)
                else str(v) for v in row))
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _seed_override(value):
    env = os.environ.get("ENTRODIM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise CliError(f"ENTRODIM_SEED must be an integer, got {env!r}", 2) from exc
    return value


def _add_common(p):
    p.add_argument("--out", help="artifact path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--base-url", default=None,
                   help="dispatch to a running server instead of in-process")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel requests across parameter grids")


def build_parser():
    ap = argparse.ArgumentParser(prog="entrodim", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="Bowen/packing critical exponents")
    p.add_argument("--system", required=True)
    p.add_argument("--set", dest="zset", default=None)
    p.add_argument("--kind", choices=("bowen", "packing"), default="bowen")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--schedule", default=None,
                   help="comma list of N:D pairs, e.g. 2:10,2:16")
    p.add_argument("--tol", type=float, default=1e-4)
    _add_common(p)

    p = sub.add_parser("cover", help="minimal gauge-cover value")
    p.add_argument("--system", required=True)
    p.add_argument("--set", dest="zset", required=True)
    p.add_argument("--gauge", required=True, help="gauge JSON path or exp:RATE")
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--no-witness", action="store_true")
    _add_common(p)

    p = sub.add_parser("pack", help="maximal packing value")
    p.add_argument("--system", required=True)
    p.add_argument("--set", dest="zset", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--parts", type=int, default=None)
    p.add_argument("--no-witness", action="store_true")
    _add_common(p)

    p = sub.add_parser("vitali", help="greedy disjoint ball selection")
    p.add_argument("--family", required=True)
    _add_common(p)

    p = sub.add_parser("frostman", help="weighted cover LP and Frostman measure")
    p.add_argument("--system", required=True)
    p.add_argument("--set", dest="kset", required=True)
    p.add_argument("--gauge", required=True)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--depth", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("gauge", help="domination, cutpoints, stitching, search")
    p.add_argument("--op", choices=("dominates", "cutpoints", "stitch", "search"),
                   required=True)
    p.add_argument("--gauges", required=True,
                   help="comma list of gauge JSON paths or exp:RATE entries")
    p.add_argument("--horizon", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--cuts", default=None, help="comma list of integers")
    p.add_argument("--system", default=None)
    p.add_argument("--set", dest="kset", default=None)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--threshold", type=float, default=0.01)
    _add_common(p)

    p = sub.add_parser("logistic", help="lap entropy, scans, interval growth")
    p.add_argument("--op", choices=("entropy", "scan", "interval", "laps",
                                    "fe_proxy"), default="entropy")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--grid", default=None,
                   help="comma list, or lo:hi:count for a uniform grid")
    p.add_argument("--n-max", type=int, default=14)
    p.add_argument("--slack", type=float, default=0.02)
    p.add_argument("--sub", default=None, help="alpha,beta subinterval")
    p.add_argument("--n", type=int, default=14)
    p.add_argument("--epsilon", type=float, default=1.0 / 256.0)
    _add_common(p)

    p = sub.add_parser("skew", help="plateau profile and diagonal entropies")
    p.add_argument("--spec", default=None, help="plateau spec JSON (default: built in)")
    p.add_argument("--slices", default="2,3,4")
    p.add_argument("--no-lowers", action="store_true")
    p.add_argument("--no-retarget", action="store_true")
    p.add_argument("--n-max", type=int, default=14)
    p.add_argument("--n", type=int, default=14)
    p.add_argument("--epsilon", type=float, default=1.0 / 256.0)
    _add_common(p)

    p = sub.add_parser("dim", help="Hausdorff dimension and correspondences")
    p.add_argument("--op", choices=("hausdorff", "doubling", "sqrt"),
                   required=True)
    p.add_argument("--set", dest="zset", default=None)
    p.add_argument("--system", default=None)
    p.add_argument("--depth", type=int, default=16)
    p.add_argument("--schedule", default=None, help="comma list of depths")
    p.add_argument("--tol", type=float, default=1e-4)
    _add_common(p)

    p = sub.add_parser("localent", help="local entropies, measure dimensions")
    p.add_argument("--op", choices=("measure_entropy", "local", "variational",
                                    "restrict", "dimension", "slices"),
                   required=True)
    p.add_argument("--measure", default=None,
                   help="measure JSON path, bernoulli:P1,P2..., or parry")
    p.add_argument("--system", default=None)
    p.add_argument("--set", dest="zset", default=None)
    p.add_argument("--yset", default=None)
    p.add_argument("--parts", default=None, help="comma list of set JSON paths")
    p.add_argument("--word", default=None, help="comma list of symbols")
    p.add_argument("--window", default="1000,2000")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=16)
    p.add_argument("--mixture-terms", type=int, default=4)
    _add_common(p)

    p = sub.add_parser("audit", help="randomized certification suites")
    p.add_argument("--suite", choices=("vitali", "sandwich", "duality",
                                       "order", "all"), default="all")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=8)
    _add_common(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8711)

    return ap


def _measure_arg(value, system_json):
    if value is None:
        raise CliError("this operation needs --measure", 2)
    if value.startswith("bernoulli:"):
        probs = [float(x) for x in value.split(":", 1)[1].split(",")]
        return {"kind": "bernoulli", "probs": probs}
    if value == "parry":
        if system_json is None:
            raise CliError("parry measure needs --system", 2)
        return {"kind": "parry", "system": system_json}
    return _load_json(value)


def _build_request(args):
    cmd = args.command
    if cmd == "entropy":
        schedule = None
        if args.schedule:
            schedule = [tuple(int(v) for v in pair.split(":"))
                        for pair in args.schedule.split(",")]
        return m.EntropyRequest(
            system=_system_arg(args.system),
            zset=_load_json(args.zset) if args.zset else None,
            kind=args.kind, depth=args.depth, schedule=schedule, tol=args.tol)
    if cmd == "cover":
        return m.CoverRequest(
            system=_system_arg(args.system), zset=_load_json(args.zset),
            gauge=_gauge_arg(args.gauge), n_min=args.n_min, depth=args.depth,
            witness=not args.no_witness)
    if cmd == "pack":
        return m.PackRequest(
            system=_system_arg(args.system), zset=_load_json(args.zset),
            s=args.s, n_min=args.n_min, depth=args.depth, parts=args.parts,
            witness=not args.no_witness)
    if cmd == "vitali":
        return m.VitaliRequest(family=_load_json(args.family))
    if cmd == "frostman":
        return m.FrostmanRequest(
            system=_system_arg(args.system), kset=_load_json(args.kset),
            gauge=_gauge_arg(args.gauge), n_min=args.n_min, depth=args.depth)
    if cmd == "gauge":
        req = m.GaugeOpRequest(
            op=args.op,
            gauges=[_gauge_arg(v) for v in args.gauges.split(",")],
            horizon=args.horizon, tol=args.tol,
            cuts=[int(v) for v in args.cuts.split(",")] if args.cuts else None,
            system=_system_arg(args.system) if args.system else None,
            kset=_load_json(args.kset) if args.kset else None,
            n_min=args.n_min, depth=args.depth, threshold=args.threshold)
        return req
    if cmd == "logistic":
        grid = None
        if args.grid:
            if ":" in args.grid:
                lo, hi, count = args.grid.split(":")
                lo, hi, count = float(lo), float(hi), int(count)
                step = (hi - lo) / (count - 1) if count > 1 else 0.0
                grid = [lo + i * step for i in range(count)]
            else:
                grid = [float(v) for v in args.grid.split(",")]
        sub = tuple(float(v) for v in args.sub.split(",")) if args.sub else None
        return m.LogisticRequest(op=args.op, a=args.a, grid=grid,
                                 n_max=args.n_max, slack=args.slack, sub=sub,
                                 n=args.n, epsilon=args.epsilon)
    if cmd == "skew":
        return m.SkewRequest(
            spec=_load_json(args.spec) if args.spec else None,
            slices=[int(v) for v in args.slices.split(",")],
            lowers=not args.no_lowers, retarget=not args.no_retarget,
            n_max=args.n_max, n=args.n, epsilon=args.epsilon)
    if cmd == "dim":
        return m.DimRequest(
            op=args.op,
            zset=_load_json(args.zset) if args.zset else None,
            system=_system_arg(args.system) if args.system else None,
            depth=args.depth,
            schedule=[int(v) for v in args.schedule.split(",")]
            if args.schedule else None,
            tol=args.tol)
    if cmd == "localent":
        system_json = _system_arg(args.system) if args.system else None
        measure = None
        if args.op in ("measure_entropy", "local", "restrict"):
            measure = _measure_arg(args.measure, system_json)
        candidates = None
        if args.op == "variational":
            candidates = [_measure_arg(v, system_json)
                          for v in (args.measure or "").split(";") if v]
        return m.LocalentRequest(
            op=args.op, measure=measure, candidates=candidates,
            system=system_json,
            zset=_load_json(args.zset) if args.zset else None,
            yset=_load_json(args.yset) if args.yset else None,
            parts=[_load_json(v) for v in args.parts.split(",")]
            if args.parts else None,
            word=[int(v) for v in args.word.split(",")] if args.word else None,
            window=tuple(int(v) for v in args.window.split(",")),
            samples=args.samples, seed=_seed_override(args.seed),
            depth=args.depth, mixture_terms=args.mixture_terms)
    if cmd == "audit":
        return m.AuditRequest(suite=args.suite, count=args.count,
                              seed=_seed_override(args.seed), depth=args.depth)
    raise CliError(f"unknown command {cmd}", 2)


def _csv_table(command, args, payload):
    if command == "entropy":
        rows = [(r["N"], r["D"], r["s_star"], r["delta"])
                for r in payload["table"]]
        return ("N", "D", "s_star", "delta"), rows
    if command == "logistic" and payload["config"]["op"] == "scan":
        rows = [(e["a"], e["h"], e["err"])
                for e in payload["result"]["entries"]]
        return ("a", "h_estimate", "err"), rows
    if command == "logistic" and payload["config"]["op"] == "laps":
        a = payload["result"]["a"]
        rows = [(a, n + 1, laps)
                for n, laps in enumerate(payload["result"]["laps"])]
        return ("a", "n", "laps"), rows
    if command == "localent" and payload["config"]["op"] == "local":
        start = payload["result"]["window"][0]
        rows = [(start + i, v)
                for i, v in enumerate(payload["result"]["values"])]
        return ("n", "value"), rows
    if command == "skew":
        rows = [(u["j"], u["upper"], u["margin"])
                for u in payload["result"]["uppers"]]
        return ("j", "upper", "margin"), rows
    if command == "dim" and payload["config"]["op"] == "hausdorff":
        rows = [(r["depth"], r["s_star"]) for r in payload["result"]["table"]]
        return ("depth", "s_star"), rows
    return None


def _run_scan_jobs(args, request, base_url):
    """Fan a monotonicity scan out as per-point entropy requests, then merge
    in grid order and re-derive the violation table."""
    grid = request.grid

    def one(a):
        sub = m.LogisticRequest(op="entropy", a=a, n_max=request.n_max)
        payload = dispatch("logistic", sub, base_url)
        return payload["result"]

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        fits = list(pool.map(one, grid))
    entries = [{"a": a, "h": f["estimate"], "err": f["err"]}
               for a, f in zip(grid, fits)]
    violations = []
    for e1, e2 in zip(entries, entries[1:]):
        if e1["h"] > e2["h"] + request.slack:
            violations.append({"a": e1["a"], "a_next": e2["a"],
                               "drop": e1["h"] - e2["h"]})
    return {
        "result": {"slack": request.slack, "clean": not violations,
                   "entries": entries, "violations": violations},
        "config": request.model_dump(),
        "version": __version__,
    }


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors already
        return int(exc.code or 0)

    if args.command == "serve":
        import uvicorn

        from .service.app import app
        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    try:
        request = _build_request(args)
        if (args.command == "logistic" and request.op == "scan"
                and args.jobs > 1):
            payload = _run_scan_jobs(args, request, args.base_url)
        else:
            payload = dispatch(args.command, request, args.base_url)
        csv_rows = _csv_table(args.command, args, payload) \
            if args.format == "csv" else None
        _emit(payload, args, csv_rows)
        if args.command == "audit" and not payload["passed"]:
            return 3
        return 0
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InputError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return 3
    except EntrodimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
