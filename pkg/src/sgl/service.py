"""HTTP facade: submit statements, upload tables, inspect the catalog."""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.concurrency import run_in_threadpool
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import __version__
from .datasource import Database, csv_from_text
from .diagnostics import Diagnostic, SglError
from .engine import SglEngine
from .renderer import RenderConfig

MAX_UPLOAD_BYTES = 32 * 1024 * 1024


class QueryRequest(BaseModel):
    sgl: str = Field(min_length=1)
    seed: int | None = None
    width: int | None = None
    height: int | None = None


def _diagnostics_response(status: int, diagnostics: list[Diagnostic]) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"diagnostics": [d.to_dict() for d in diagnostics]},
    )


def create_app(
    db: Database | None = None,
    config: RenderConfig | None = None,
    console_dir: str | Path | None = None,
) -> FastAPI:
    engine = SglEngine(db=db, config=config)
    app = FastAPI(title="sgl", version=__version__)
    app.state.engine = engine
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    @app.exception_handler(Exception)
    async def internal_error(request: Request, exc: Exception) -> JSONResponse:
        return _diagnostics_response(500, [Diagnostic("E_INTERNAL", f"internal error: {exc}")])

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/tables")
    def tables() -> dict:
        return {"tables": [schema.to_dict() for schema in engine.db.tables()]}

    @app.put("/tables/{name}", status_code=201)
    async def upload_table(name: str, request: Request):
        body = await request.body()
        if len(body) > MAX_UPLOAD_BYTES:
            return _diagnostics_response(413, [Diagnostic(
                "E_TOO_LARGE", f"upload exceeds {MAX_UPLOAD_BYTES} bytes",
            )])
        try:
            # ingestion holds the catalog lock; keep it off the event loop
            schema = await run_in_threadpool(
                engine.db.load_csv, csv_from_text(body.decode("utf-8")), name,
            )
        except SglError as exc:
            return _diagnostics_response(400, exc.diagnostics)
        except UnicodeDecodeError:
            return _diagnostics_response(400, [Diagnostic("EmptyFile", "body is not UTF-8 text")])
        return schema.to_dict()

    @app.post("/query")
    def query(request: QueryRequest, raw: Request):
        try:
            result = engine.run(
                request.sgl, seed=request.seed or 0,
                width=request.width, height=request.height,
            )
        except SglError as exc:
            return _diagnostics_response(400, exc.diagnostics)
        accept = raw.headers.get("accept", "")
        if "image/svg+xml" in accept:
            return Response(content=result.svg, media_type="image/svg+xml")
        return {
            "svg": result.svg,
            "warnings": [w.to_dict() for w in result.warnings],
            "timing_ms": result.timing_ms,
        }

    console = console_dir or os.environ.get("SGL_CONSOLE_DIR")
    if console and Path(console).is_dir():
        app.mount("/", StaticFiles(directory=str(console), html=True), name="console")
    return app


def serve(
    db: Database | None = None,
    host: str = "127.0.0.1",
    port: int | None = None,
    config: RenderConfig | None = None,
    console_dir: str | Path | None = None,
) -> None:
    """Run the service until interrupted (uvicorn, single process)."""
    import uvicorn

    if port is None:
        port = int(os.environ.get("SGL_PORT", "8080"))
    app = create_app(db=db, config=config, console_dir=console_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
