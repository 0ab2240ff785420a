"""Shared view-export serialization.

The CLI `export` command and the HTTP endpoints both go through these
functions, so a served response is byte-identical to the file the CLI writes
for the same parameters.
"""

from __future__ import annotations

import json

from .extraction import TaskAnalysis
from .flow_view import flow_distributions, flow_view_payload
from .model import Sequence, SessionStore
from .sequence_view import (
    DEFAULT_DISPLAY_REGION,
    DEFAULT_LONG_GLANCE_MS,
    DEFAULT_PAD_MS,
    build_timeline,
    timeline_payload,
)
from .task_view import build_sankey, sankey_payload


def to_json_bytes(payload: dict) -> bytes:
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def task_view_bytes(analysis: TaskAnalysis, p_min: float | None = None) -> bytes:
    if p_min is None:
        p_min = analysis.task.p_min
    graph = build_sankey(analysis.flow_table, analysis.collapsed, p_min)
    return to_json_bytes(sankey_payload(graph))


def flow_view_bytes(
    analysis: TaskAnalysis,
    store: SessionStore | None,
    metric: str = "time_on_task",
    p_min: float | None = None,
    target_ms: float | None = None,
    display_region: str = DEFAULT_DISPLAY_REGION,
) -> bytes:
    if p_min is None:
        p_min = analysis.task.p_min
    if not 0.0 <= p_min <= 1.0:
        raise ValueError("p_min must lie in [0, 1]")
    distributions = flow_distributions(
        analysis.flow_table,
        analysis.sequences,
        metric,
        p_min=p_min,
        store=store,
        display_region=display_region,
    )
    return to_json_bytes(flow_view_payload(distributions, target_ms=target_ms))


def sequence_view_bytes(
    sequence: Sequence,
    store: SessionStore,
    pad_ms: int = DEFAULT_PAD_MS,
    display_region: str = DEFAULT_DISPLAY_REGION,
    long_glance_threshold_ms: int = DEFAULT_LONG_GLANCE_MS,
) -> bytes:
    timeline = build_timeline(
        sequence,
        store,
        pad_ms=pad_ms,
        display_region=display_region,
        long_glance_threshold_ms=long_glance_threshold_ms,
    )
    return to_json_bytes(timeline_payload(timeline))
