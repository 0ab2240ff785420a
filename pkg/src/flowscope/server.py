"""Read-only HTTP API over an immutable store snapshot.

Every endpoint is a pure function of (snapshot, query parameters); responses
for the three views are byte-identical to the corresponding CLI exports.
Query parameters override task-definition defaults per request without
mutating any state.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .export import (
    flow_view_bytes,
    sequence_view_bytes,
    task_view_bytes,
    to_json_bytes,
)
from .extraction import TaskAnalysis, analyze_task, time_on_task
from .model import NotFoundError, Sequence, SessionStore, TaskDefinition
from .sequence_view import (
    DEFAULT_DISPLAY_REGION,
    DEFAULT_LONG_GLANCE_MS,
    DEFAULT_PAD_MS,
)

DEFAULT_BIND = "127.0.0.1:8000"
BIND_ENV_VAR = "FLOWSCOPE_BIND"


def build_analyses(
    store: SessionStore, tasks: list[TaskDefinition]
) -> dict[str, TaskAnalysis]:
    analyses: dict[str, TaskAnalysis] = {}
    for task in tasks:
        if task.task_id in analyses:
            raise ValueError(f"duplicate task id {task.task_id!r}")
        analyses[task.task_id] = analyze_task(store, task)
    return analyses


class Snapshot:
    """Immutable bundle of the store and its per-task analyses."""

    def __init__(self, store: SessionStore, analyses: dict[str, TaskAnalysis]):
        self.store = store
        self.analyses = analyses
        self._sequences: dict[str, tuple[TaskAnalysis, Sequence]] = {}
        for analysis in analyses.values():
            for seq in analysis.sequences:
                self._sequences[seq.sequence_id] = (analysis, seq)

    def analysis_for(self, task_ref: str) -> TaskAnalysis:
        if task_ref in self.analyses:
            return self.analyses[task_ref]
        for analysis in self.analyses.values():
            if analysis.task.name == task_ref:
                return analysis
        raise NotFoundError(f"unknown task {task_ref!r}")

    def sequence_for(self, sequence_id: str) -> tuple[TaskAnalysis, Sequence]:
        if sequence_id not in self._sequences:
            raise NotFoundError(f"unknown sequence {sequence_id!r}")
        return self._sequences[sequence_id]


def tasks_payload(snapshot: Snapshot) -> dict:
    return {
        "tasks": [
            {
                "task_id": a.task_id,
                "name": a.task.name,
                "sequence_count": a.flow_table.total_sequences,
                "flow_count": len(a.flow_table.flows),
                "p_min_default": a.task.p_min,
            }
            for a in snapshot.analyses.values()
        ]
    }


def flow_sequences_payload(analysis: TaskAnalysis, flow_id: str) -> dict:
    flow = analysis.flow_table.flow_by_id(flow_id)
    by_id = {s.sequence_id: s for s in analysis.sequences}
    return {
        "flow_id": flow.flow_id,
        "sequences": [
            {
                "sequence_id": sid,
                "session_id": by_id[sid].session_id,
                "time_on_task_ms": time_on_task(by_id[sid]),
            }
            for sid in flow.sequence_ids
        ],
    }


def create_app(
    store: SessionStore,
    tasks: list[TaskDefinition],
    static_dir: Path | str | None = None,
) -> FastAPI:
    snapshot = Snapshot(store, build_analyses(store, tasks))
    app = FastAPI(title="flowscope", docs_url=None, redoc_url=None)
    app.state.snapshot = snapshot

    @app.exception_handler(RequestValidationError)
    async def bad_parameter(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors()[0]["msg"])})

    @app.exception_handler(NotFoundError)
    async def not_found(request: Request, exc: NotFoundError):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(ValueError)
    async def bad_value(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    def json_bytes_response(body: bytes) -> Response:
        return Response(content=body, media_type="application/json")

    @app.get("/tasks")
    def list_tasks() -> Response:
        return json_bytes_response(to_json_bytes(tasks_payload(snapshot)))

    @app.get("/tasks/{task_ref}/sankey")
    def task_sankey(task_ref: str, p_min: float | None = None) -> Response:
        analysis = snapshot.analysis_for(task_ref)
        return json_bytes_response(task_view_bytes(analysis, p_min=p_min))

    @app.get("/tasks/{task_ref}/flows")
    def task_flows(
        task_ref: str,
        metric: str = "time_on_task",
        p_min: float | None = None,
        target_ms: float | None = None,
        region: str = DEFAULT_DISPLAY_REGION,
    ) -> Response:
        analysis = snapshot.analysis_for(task_ref)
        return json_bytes_response(
            flow_view_bytes(
                analysis,
                snapshot.store,
                metric=metric,
                p_min=p_min,
                target_ms=target_ms,
                display_region=region,
            )
        )

    @app.get("/tasks/{task_ref}/flows/{flow_id}/sequences")
    def flow_sequences(task_ref: str, flow_id: str) -> Response:
        analysis = snapshot.analysis_for(task_ref)
        return json_bytes_response(to_json_bytes(flow_sequences_payload(analysis, flow_id)))

    @app.get("/sequences/{sequence_id}/timeline")
    def sequence_timeline(
        sequence_id: str,
        pad_ms: int = DEFAULT_PAD_MS,
        region: str = DEFAULT_DISPLAY_REGION,
        long_ms: int = DEFAULT_LONG_GLANCE_MS,
    ) -> Response:
        _, sequence = snapshot.sequence_for(sequence_id)
        return json_bytes_response(
            sequence_view_bytes(
                sequence,
                snapshot.store,
                pad_ms=pad_ms,
                display_region=region,
                long_glance_threshold_ms=long_ms,
            )
        )

    if static_dir is not None and Path(static_dir).is_dir():
        # mounted last so the API routes above take precedence
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def resolve_bind(bind: str | None = None) -> tuple[str, int]:
    """Bind address from the CLI flag, FLOWSCOPE_BIND, or the default."""
    raw = bind or os.environ.get(BIND_ENV_VAR) or DEFAULT_BIND
    host, _, port = raw.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"invalid bind address {raw!r}; expected HOST:PORT")
    return host, int(port)


def serve(
    store: SessionStore,
    tasks: list[TaskDefinition],
    bind: str | None = None,
    static_dir: Path | str | None = None,
) -> None:
    """Run the read-only API (blocking)."""
    import uvicorn

    host, port = resolve_bind(bind)
    app = create_app(store, tasks, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
