"""Stateless JSON-over-HTTP service wrapping the render/extract pipeline.

Endpoints (all under /api): render (WAV bytes out), render/params (the
parameter dump for the identical request), extract, roundtrip, health,
defaults. The editor bundle, when built, is served from the site root.

The service holds no sessions: every request carries the full document, so
concurrent identical requests return identical bodies. Rendering runs on a
bounded worker pool (default: logical CPU count).
"""
from __future__ import annotations

import asyncio
import base64
import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import fileio, pipeline
from .performance import DEFAULT_CONFIG
from .score import DEFAULT_NORMALIZATION

_FRONTEND_DIRS = (
    Path(__file__).resolve().parents[2] / "frontend" / "dist",
    Path("frontend") / "dist",
)


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


async def _json_body(request: Request) -> dict:
    try:
        return json.loads(await request.body())
    except json.JSONDecodeError as exc:
        raise fileio.ScoreParseError(f"invalid JSON: {exc}") from None


def create_app(worker_count: int | None = None,
               frontend_dir: str | os.PathLike | None = None) -> FastAPI:
    app = FastAPI(title="notesynth", docs_url=None, redoc_url=None)
    pool = ThreadPoolExecutor(max_workers=worker_count or os.cpu_count() or 1)

    async def _run(fn, *args):
        return await asyncio.get_running_loop().run_in_executor(
            pool, fn, *args)

    def _handle(exc: Exception) -> JSONResponse:
        # malformed input -> 400, semantically invalid documents -> 422
        if isinstance(exc, fileio.ScoreValidationError):
            return _error(422, str(exc))
        if isinstance(exc, (fileio.ScoreParseError, json.JSONDecodeError)):
            return _error(400, str(exc))
        if isinstance(exc, ValueError):
            return _error(422, str(exc))
        raise exc

    @app.get("/api/health")
    async def health():
        return {"status": "ok"}

    @app.get("/api/defaults")
    async def defaults():
        return {
            "noise_seed": 0,
            "config": dataclasses.asdict(DEFAULT_CONFIG),
            "normalization": dataclasses.asdict(DEFAULT_NORMALIZATION),
            "default_expression": {name: 0.5 for name in (
                "volume", "volume_fluctuation", "volume_peak_position",
                "vibrato", "brightness", "attack_noise")},
        }

    @app.post("/api/render")
    async def render(request: Request):
        try:
            body = await _json_body(request)
            req = pipeline.request_from_dict(body)
            result = await _run(pipeline.run_render, req)
        except Exception as exc:  # noqa: BLE001 - mapped to 4xx below
            return _handle(exc)
        return Response(result.wav_bytes, media_type="audio/wav",
                        headers={"X-Params-URL": "/api/render/params"})

    @app.post("/api/render/params")
    async def render_params(request: Request):
        fmt = request.query_params.get("format", "json")
        if fmt not in ("json", "binary"):
            return _error(400, f"unknown params format {fmt!r}")
        try:
            body = await _json_body(request)
            req = pipeline.request_from_dict(body)
            result = await _run(pipeline.run_render, req)
        except Exception as exc:  # noqa: BLE001
            return _handle(exc)
        if fmt == "binary":
            return Response(fileio.write_params(result.params),
                            media_type="application/octet-stream")
        doc = json.loads(fileio.write_params(result.params, text=True))
        doc["clamps"] = result.report.as_dict()["clamps"]
        return JSONResponse(doc)

    @app.post("/api/extract")
    async def extract(request: Request):
        try:
            body = await _json_body(request)
            if not isinstance(body, dict) or "score" not in body:
                raise fileio.ScoreParseError(
                    "extract request needs 'score' and parameter data")
            if "params_base64" in body:
                raw = base64.b64decode(body["params_base64"])
            elif "params" in body:
                raw = json.dumps(body["params"]).encode()
            else:
                raise fileio.ScoreParseError(
                    "missing 'params' or 'params_base64'")
            params = fileio.read_params(raw)
            seq, _ = fileio.parse_score_dict(body["score"])
            expressions = await _run(pipeline.run_extract, params, seq)
        except Exception as exc:  # noqa: BLE001
            return _handle(exc)
        return {"expressions": [e.as_dict() for e in expressions]}

    @app.post("/api/roundtrip")
    async def roundtrip(request: Request):
        try:
            body = await _json_body(request)
            req = pipeline.request_from_dict(body)
            report = await _run(pipeline.run_roundtrip, req)
        except Exception as exc:  # noqa: BLE001
            return _handle(exc)
        return report

    static_dir = Path(frontend_dir) if frontend_dir else next(
        (d for d in _FRONTEND_DIRS if d.is_dir()), None)
    if static_dir is not None and static_dir.is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="editor")
    return app
