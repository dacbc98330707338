"""HTTP shell: chat with streamed replies, ingestion, metrics, adherence.

The chat reply streams as plain text chunks followed by a single trailer
line: a NUL byte then "META:" then the JSON metadata (routes, techniques,
rec_id). Clients split on the NUL to separate prose from structure.
"""

from __future__ import annotations

import json
import logging
from datetime import date
from pathlib import Path
from typing import Iterator, Optional

from fastapi import Depends, FastAPI, HTTPException, Query, Request, Response
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles

from ..errors import SleepCoachError, Unavailable
from .config import ServiceConfig
from .schemas import AdherenceRequest, ChatMeta, ChatRequest, IngestResponse, MetricsResponse
from .state import AppState

logger = logging.getLogger(__name__)

META_PREFIX = "\n\x00META:"
CHUNK_CHARS = 48


def _stream_chunks(text: str, meta: ChatMeta) -> Iterator[str]:
    for start in range(0, len(text), CHUNK_CHARS):
        yield text[start:start + CHUNK_CHARS]
    yield META_PREFIX + meta.model_dump_json()


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="sleepcoach", version="0.1.0")
    app.state.engine = state

    def current_user(request: Request) -> str:
        header = request.headers.get("authorization", "")
        token = header.removeprefix("Bearer ").strip() if header.startswith("Bearer ") else None
        user_id = state.authenticate(token)
        if user_id is None:
            raise HTTPException(status_code=401, detail="unknown user")
        return user_id

    @app.post("/api/chat")
    def chat(req: ChatRequest, user_id: str = Depends(current_user)) -> StreamingResponse:
        if req.user_id != user_id:
            raise HTTPException(status_code=401, detail="token does not match user_id")
        if not req.message.strip():
            raise HTTPException(status_code=422, detail="message must be non-empty")
        if req.mode is not None and req.mode not in ("coach", "baseline"):
            raise HTTPException(status_code=422, detail="mode must be coach or baseline")
        try:
            outcome = state.chat(user_id, req.message, req.mode)
        except Exception as exc:  # session is intact; surface as service error
            logger.exception("chat turn failed")
            raise HTTPException(status_code=503, detail="internal failure") from exc
        meta = ChatMeta(
            routes=sorted(r.value for r in outcome.turn.routes_taken),
            techniques=sorted(t.value for t in outcome.turn.techniques_used),
            rec_id=outcome.rec_id,
        )
        return StreamingResponse(_stream_chunks(outcome.turn.text, meta),
                                 media_type="text/plain; charset=utf-8")

    @app.post("/api/ingest", response_model=IngestResponse)
    async def ingest(request: Request, user_id: str = Depends(current_user)) -> IngestResponse:
        body = (await request.body()).decode("utf-8")
        report, applied = state.ingest(body.splitlines())
        return IngestResponse(counts=report.counts, errors=report.errors,
                              rewards_applied=applied)

    @app.get("/api/metrics/{user_id}", response_model=MetricsResponse)
    def metrics(
        user_id: str,
        start: date = Query(alias="from"),
        end: date = Query(alias="to"),
        metric: str = Query(default="total_sleep_duration"),
        aggregate: str = Query(default="mean"),
        auth_user: str = Depends(current_user),
    ) -> MetricsResponse:
        if auth_user != user_id:
            raise HTTPException(status_code=401, detail="token does not match user")
        try:
            result = state.metrics(user_id, metric, aggregate, start, end)
        except Unavailable as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except (SleepCoachError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return MetricsResponse(
            user_id=user_id,
            metric=metric,
            aggregate=aggregate,
            value=result.value,
            unit=result.unit,
            n=result.n,
            facts=list(result.facts),
            series=list(result.series) if result.series is not None else None,
        )

    @app.post("/api/adherence", status_code=204)
    def adherence(req: AdherenceRequest, user_id: str = Depends(current_user)) -> Response:
        if not req.rec_id.startswith(f"{user_id}-r"):
            raise HTTPException(status_code=404, detail="unknown rec_id")
        if not state.record_adherence(req.rec_id, req.followed):
            raise HTTPException(status_code=404, detail="unknown rec_id")
        return Response(status_code=204)

    static_dir = state.config.static_dir
    if static_dir and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def create_app_from_config(config: ServiceConfig, **kwargs) -> FastAPI:
    return create_app(AppState(config, **kwargs))


def parse_stream(body: str) -> tuple[str, Optional[dict]]:
    """Split a streamed chat body into (reply text, meta dict). Helper for
    clients and tests; the UI does the same split."""
    if "\x00META:" not in body:
        return body, None
    text, _, trailer = body.partition("\x00META:")
    return text.rstrip("\n"), json.loads(trailer)
