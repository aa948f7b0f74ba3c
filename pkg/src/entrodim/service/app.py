"""FastAPI application wrapping the toolkit behind typed endpoints."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import CertificationError, EntrodimError, InputError
from . import handlers
from . import models as m


def create_app() -> FastAPI:
    app = FastAPI(title="entrodim", version=__version__)

    def guard(fn, req):
        try:
            return fn(req)
        except InputError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except CertificationError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except EntrodimError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/entropy", response_model=m.EntropyResponse)
    def entropy(req: m.EntropyRequest):
        return guard(handlers.handle_entropy, req)

    @app.post("/v1/cover", response_model=m.CoverResponse)
    def cover(req: m.CoverRequest):
        return guard(handlers.handle_cover, req)

    @app.post("/v1/pack", response_model=m.PackResponse)
    def pack(req: m.PackRequest):
        return guard(handlers.handle_pack, req)

    @app.post("/v1/vitali", response_model=m.VitaliResponse)
    def vitali(req: m.VitaliRequest):
        return guard(handlers.handle_vitali, req)

    @app.post("/v1/frostman", response_model=m.FrostmanResponse)
    def frostman(req: m.FrostmanRequest):
        return guard(handlers.handle_frostman, req)

    @app.post("/v1/gauge", response_model=m.OpResponse)
    def gauge(req: m.GaugeOpRequest):
        return guard(handlers.handle_gauge, req)

    @app.post("/v1/logistic", response_model=m.OpResponse)
    def logistic(req: m.LogisticRequest):
        return guard(handlers.handle_logistic, req)

    @app.post("/v1/skew", response_model=m.OpResponse)
    def skew(req: m.SkewRequest):
        return guard(handlers.handle_skew, req)

    @app.post("/v1/dim", response_model=m.OpResponse)
    def dim(req: m.DimRequest):
        return guard(handlers.handle_dim, req)

    @app.post("/v1/localent", response_model=m.OpResponse)
    def localent(req: m.LocalentRequest):
        return guard(handlers.handle_localent, req)

    @app.post("/v1/audit", response_model=m.AuditResponse)
    def audit(req: m.AuditRequest):
        return guard(handlers.handle_audit, req)

    return app


app = create_app()
