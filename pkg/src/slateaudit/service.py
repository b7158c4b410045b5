"""HTTP API consumed by the moderator dashboard.

Stateless beyond the loaded session and embedding cache; every response body
comes from the same canonical serializer as the CLI, so identical inputs
produce byte-identical documents. Provider-bound endpoints share a small
concurrency gate.
"""

from __future__ import annotations

import threading
import time
from pathlib import Path

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .embedding import ProviderError
from .pipeline import (
    AppState,
    export_document,
    heatmap_for_ids,
    run_audit,
    run_generate,
    run_optimize,
    run_random,
)
from .sessionio import dumps_canonical, session_to_document

PROVIDER_CONCURRENCY = 2


class AuditRequest(BaseModel):
    slate: list[str] | None = Field(
        default=None, description="question ids; omit to audit the human slate"
    )
    witnesses: int = 10
    algorithm: str = "fast"


class OptimizeRequest(BaseModel):
    grid: str | None = None
    solver: str = "auto"
    timeout: float | None = None
    witnesses: int = 10


class RandomRequest(BaseModel):
    seed: int = 0
    witnesses: int = 10


class GenerateRequest(BaseModel):
    samples: int = Field(default=100, ge=1)
    seed: int = 0
    temperature: float = 1.0
    llm: str = "mock"


def _canonical(doc: dict, elapsed: float) -> Response:
    return Response(
        content=dumps_canonical(doc),
        media_type="application/json",
        headers={"X-Elapsed-Seconds": f"{elapsed:.6f}"},
    )


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="slateaudit", version="0.1.0")
    gate = threading.Semaphore(PROVIDER_CONCURRENCY)

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(KeyError)
    async def key_error_handler(request: Request, exc: KeyError):
        return JSONResponse(status_code=400, content={"error": str(exc.args[0])})

    @app.exception_handler(ProviderError)
    async def provider_error_handler(request: Request, exc: ProviderError):
        return JSONResponse(
            status_code=503,
            content={"error": str(exc)},
            headers={"Retry-After": "30"},
        )

    @app.get("/session")
    def get_session():
        started = time.perf_counter()
        doc = session_to_document(state.session, state.embeddings_ref)
        return _canonical(doc, time.perf_counter() - started)

    @app.post("/audit")
    def post_audit(body: AuditRequest):
        started = time.perf_counter()
        doc = run_audit(
            state,
            slate_ids=body.slate,
            witnesses=body.witnesses,
            algorithm=body.algorithm,
        )
        return _canonical(doc, time.perf_counter() - started)

    @app.post("/optimize")
    def post_optimize(body: OptimizeRequest):
        started = time.perf_counter()
        doc = run_optimize(
            state,
            grid_spec=body.grid,
            solver=body.solver,
            timeout=body.timeout,
            witnesses=body.witnesses,
        )
        return _canonical(doc, time.perf_counter() - started)

    @app.post("/random")
    def post_random(body: RandomRequest):
        started = time.perf_counter()
        doc = run_random(state, seed=body.seed, witnesses=body.witnesses)
        return _canonical(doc, time.perf_counter() - started)

    @app.post("/generate")
    def post_generate(body: GenerateRequest):
        started = time.perf_counter()
        with gate:
            doc = run_generate(
                state,
                samples=body.samples,
                shuffle_seed=body.seed,
                temperature=body.temperature,
                llm=body.llm,
            )
        return _canonical(doc, time.perf_counter() - started)

    @app.get("/heatmap")
    def get_heatmap(slate: str = Query(..., description="comma-separated question ids")):
        started = time.perf_counter()
        ids = [s.strip() for s in slate.split(",") if s.strip()]
        if not ids:
            raise ValueError("slate query parameter is empty")
        doc = heatmap_for_ids(state, ids)
        return _canonical(doc, time.perf_counter() - started)

    @app.get("/export")
    def get_export():
        started = time.perf_counter()
        return _canonical(export_document(state), time.perf_counter() - started)

    ui_dist = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_dist.is_dir():  # serve the dashboard when it has been built
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dist, html=True), name="ui")

    return app


def serve_api(state: AppState, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    uvicorn.run(create_app(state), host=host, port=port, log_level="info")
