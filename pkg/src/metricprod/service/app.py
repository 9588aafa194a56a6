"""FastAPI application exposing the validators and probes over HTTP.

Check failures are ordinary responses with passed=false; only malformed
requests map to HTTP errors.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__, configio
from . import handlers, models


def _guarded(handler, request):
    try:
        return handler(request)
    except configio.ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def create_app() -> FastAPI:
    app = FastAPI(title="metricprod", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/validate-phi", response_model=models.PhiValidationResponse)
    def validate_phi(req: models.PhiValidationRequest):
        return _guarded(handlers.validate_phi, req)

    @app.post("/check-norm", response_model=models.NormCheckResponse)
    def check_norm(req: models.NormCheckRequest):
        return _guarded(handlers.check_norm, req)

    @app.post("/counterexample", response_model=models.CounterexampleResponse)
    def counterexample(req: models.CounterexampleRequest):
        return _guarded(handlers.run_counterexample, req)

    @app.post("/probe-rank", response_model=models.RankProbeResponse)
    def probe_rank(req: models.RankProbeRequest):
        return _guarded(handlers.probe_rank, req)

    @app.post("/decompose", response_model=models.DecomposeResponse)
    def decompose(req: models.DecomposeRequest):
        return _guarded(handlers.decompose, req)

    @app.post("/length", response_model=models.LengthResponse)
    def length(req: models.LengthRequest):
        return _guarded(handlers.curve_length, req)

    return app
