"""Loopback HTTP API over the session store.

Request bodies are parsed by hand so malformed JSON maps to 400 rather than
a framework-shaped 422. Reads are served from the persisted store only, and
mutations to one session are serialized behind a per-session lock; distinct
sessions proceed in parallel. Config overrides apply to the run they create;
later mutations use the service's base configuration.
"""

from __future__ import annotations

import json
import tempfile
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from starlette.concurrency import run_in_threadpool

from .config import load_config
from .errors import ConfigError, ImmutablePartition, NotFound, StoreCorrupt, UnknownTriple
from .pipeline import Runtime, add_opinion, review_triple, run_case
from .rdf import serialize
from .store import load_session, save_session
from .views import conflict_views, events_since, export_dataset, session_summary, triple_views

GRAPH_FORMATS = ("turtle", "nquads", "json")

_MEDIA_TYPES = {"turtle": "text/turtle", "nquads": "application/n-quads"}


class _LockTable:
    """One mutation lock per session id, created on demand."""

    def __init__(self):
        self._guard = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}

    def get(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())


def _deep_merge(base: dict, overrides: dict) -> dict:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise HTTPException(400, "request body must be valid JSON")
    if not isinstance(body, dict):
        raise HTTPException(400, "request body must be a JSON object")
    return body


def _require_str(body: dict, key: str, allow_empty: bool = True) -> str:
    value = body.get(key)
    if isinstance(value, str) and (allow_empty or value.strip()):
        return value
    kind = "a string" if allow_empty else "a non-empty string"
    raise HTTPException(400, f"{key} must be {kind}")


def create_app(runtime: Runtime, store_root, token: str = "", config_path: str = "") -> FastAPI:
    app = FastAPI(title="lag", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    locks = _LockTable()
    root = Path(store_root)

    if token:

        @app.middleware("http")
        async def _check_token(request: Request, call_next):
            if request.url.path != "/health":
                expected = f"Bearer {token}"
                if request.headers.get("authorization") != expected:
                    return JSONResponse({"detail": "unauthorized"}, status_code=401)
            return await call_next(request)

    def _load(session_id: str):
        try:
            return load_session(root, session_id)
        except NotFound:
            raise HTTPException(404, f"unknown session {session_id}")
        except StoreCorrupt as exc:
            raise HTTPException(500, str(exc))

    def _override_runtime(overrides: dict) -> Runtime:
        if not config_path:
            raise HTTPException(400, "config_overrides need the service to know its config file")
        base = json.loads(Path(config_path).read_text(encoding="utf-8"))
        merged = _deep_merge(base, overrides)
        handle = tempfile.NamedTemporaryFile(
            mode="w",
            suffix=".json",
            dir=Path(config_path).parent,
            delete=False,
            encoding="utf-8",
        )
        try:
            json.dump(merged, handle)
            handle.close()
            try:
                config = load_config(handle.name)
            except ConfigError as exc:
                raise HTTPException(400, f"config_overrides rejected: {exc}")
            try:
                return Runtime.from_config(config)
            except Exception as exc:
                raise HTTPException(503, f"cannot stand up the requested configuration: {exc}")
        finally:
            Path(handle.name).unlink(missing_ok=True)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/sessions", status_code=202)
    async def create_session(request: Request) -> dict:
        body = await _json_body(request)
        case_text = _require_str(body, "case_text")
        overrides = body.get("config_overrides") or {}
        if not isinstance(overrides, dict):
            raise HTTPException(400, "config_overrides must be an object")
        blind = bool(body.get("blind", False))
        rt = _override_runtime(overrides) if overrides else runtime
        # Identical creates persist identical bytes, so no lock is needed here;
        # the per-session locks guard mutations of existing sessions.
        session = await run_in_threadpool(
            run_case, case_text, rt, store_root=root, blind_default=blind
        )
        return {"id": session.id, "status": session.status}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return session_summary(_load(session_id))

    @app.get("/sessions/{session_id}/graph")
    def get_graph(
        session_id: str,
        format: str = "json",
        partition: str | None = None,
        include_rejected: bool = False,
    ):
        if format not in GRAPH_FORMATS:
            raise HTTPException(400, f"format must be one of {', '.join(GRAPH_FORMATS)}")
        session = _load(session_id)
        if format == "json":
            return JSONResponse(triple_views(session, partition, include_rejected))
        dataset = export_dataset(session, partition, include_rejected)
        value = dataset if format == "nquads" else dataset.union_graph()
        return PlainTextResponse(serialize(value, format), media_type=_MEDIA_TYPES[format])

    @app.post("/sessions/{session_id}/opinions")
    async def post_opinion(session_id: str, request: Request) -> dict:
        body = await _json_body(request)
        expert_id = _require_str(body, "expert_id", allow_empty=False)
        text = _require_str(body, "text", allow_empty=False)
        blind = body.get("blind")

        def work() -> dict:
            with locks.get(session_id):
                session = _load(session_id)
                use_blind = session.blind_default if blind is None else bool(blind)
                try:
                    add_opinion(session, expert_id, text, runtime, blind=use_blind, store_root=root)
                except ValueError as exc:
                    raise HTTPException(400, str(exc))
                return session_summary(session)

        return await run_in_threadpool(work)

    @app.post("/sessions/{session_id}/review")
    async def post_review(session_id: str, request: Request) -> dict:
        body = await _json_body(request)
        triple = _require_str(body, "triple", allow_empty=False)
        verdict = _require_str(body, "verdict", allow_empty=False)
        reviewer = body.get("reviewer", "reviewer")
        if not isinstance(reviewer, str) or not reviewer:
            raise HTTPException(400, "reviewer must be a non-empty string")

        def work() -> dict:
            with locks.get(session_id):
                session = _load(session_id)
                try:
                    review_triple(session, triple, verdict, runtime.schema, reviewer=reviewer)
                except ImmutablePartition as exc:
                    raise HTTPException(409, str(exc))
                except UnknownTriple as exc:
                    raise HTTPException(422, str(exc))
                except ValueError as exc:
                    raise HTTPException(400, str(exc))
                save_session(session, root)
                return session_summary(session)

        return await run_in_threadpool(work)

    @app.get("/sessions/{session_id}/conflicts")
    def get_conflicts(session_id: str) -> dict:
        session = _load(session_id)
        return {
            "session": session.id,
            "count": len(session.conflicts),
            "conflicts": conflict_views(session),
        }

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str, since: int = -1) -> dict:
        session = _load(session_id)
        latest = session.audit[-1]["seq"] if session.audit else since
        return {"events": events_since(session, since), "latest": latest}

    return app


def serve(
    runtime: Runtime,
    store_root,
    host: str = "127.0.0.1",
    port: int = 8080,
    token: str = "",
    config_path: str = "",
) -> None:
    """Block serving the API until interrupted."""
    import uvicorn

    uvicorn.run(
        create_app(runtime, store_root, token=token, config_path=config_path),
        host=host,
        port=port,
        log_level="warning",
    )
