"""Task sequence extraction, repeat collapsing, and flow grouping.

A sequence opens at a configured start event, closes at the first later end
event, and is cleansed (discarded whole) when any adjacent inter-event gap
exceeds t_max or any contained event matches a termination element. Matches
never overlap: scanning resumes after the closing event. Surviving sequences
with the same collapsed ordering of (element, gesture) labels share a flow.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .model import (
    InteractionEvent,
    NotFoundError,
    Sequence,
    SessionStore,
    TaskDefinition,
)

ANALYSIS_FORMAT = "flowscope-analysis"
ANALYSIS_VERSION = 1


@dataclass(frozen=True, slots=True)
class CollapsedGroup:
    """A run of equal consecutive events shown as one step."""

    label: str
    first_ts: int
    last_ts: int
    raw_count: int


@dataclass(frozen=True, slots=True)
class CollapsedSequence:
    sequence_id: str
    groups: tuple[CollapsedGroup, ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(g.label for g in self.groups)


@dataclass(frozen=True, slots=True)
class Flow:
    flow_id: str
    labels: tuple[str, ...]
    sequence_ids: tuple[str, ...]
    count: int
    relative_frequency: float


@dataclass(frozen=True)
class FlowTable:
    """All flows of one task, ordered by descending count."""

    task_id: str
    flows: tuple[Flow, ...]
    total_sequences: int

    def flow_by_id(self, flow_id: str) -> Flow:
        for flow in self.flows:
            if flow.flow_id == flow_id:
                return flow
        raise NotFoundError(f"unknown flow {flow_id!r}")

    def flow_of_sequence(self) -> dict[str, str]:
        return {sid: f.flow_id for f in self.flows for sid in f.sequence_ids}


def _passes_cleansing(
    span: tuple[InteractionEvent, ...], task: TaskDefinition, t_max_ms: int | None
) -> bool:
    for ev in span:
        if ev.key in task.termination_elements:
            return False
    if t_max_ms is not None:
        for prev, cur in zip(span, span[1:]):
            if cur.ts - prev.ts > t_max_ms:
                return False
    return True


def extract_sequences(store: SessionStore, task: TaskDefinition) -> list[Sequence]:
    """Extract all surviving task sequences from every session of the store.

    Sessions are scanned in sorted id order and sequence ids are assigned in
    scan order, so the result is deterministic for a given store. A start
    event firing inside an open match is treated as an ordinary event; end
    matching requires a strictly later event than the opening one.
    """
    t_max_ms = task.t_max_ms
    out: list[Sequence] = []
    counter = 0
    for sid in store.session_ids():
        events = store.events_for(sid)
        n = len(events)
        i = 0
        while i < n:
            if events[i].key not in task.start_events:
                i += 1
                continue
            close = None
            for k in range(i + 1, n):
                if events[k].key in task.end_events:
                    close = k
                    break
            if close is None:
                # no end event remains, so no later start can close either
                break
            span = events[i : close + 1]
            if _passes_cleansing(span, task, t_max_ms):
                counter += 1
                out.append(
                    Sequence(
                        sequence_id=f"{task.task_id}-{counter:06d}",
                        task_id=task.task_id,
                        flow_id="",
                        session_id=sid,
                        events=span,
                    )
                )
            i = close + 1
    return out


def collapse_repeats(
    sequence: Sequence, aggregate_elements: frozenset[str] | set[str]
) -> CollapsedSequence:
    """Merge maximal runs of equal consecutive events of aggregated elements.

    Only events whose ui_element is configured for aggregation collapse, and
    only while the (element, gesture) pair stays identical; everything else
    becomes a singleton group carrying its own timestamp.
    """
    groups: list[list] = []  # [label, first_ts, last_ts, raw_count]
    for ev in sequence.events:
        if (
            groups
            and ev.ui_element in aggregate_elements
            and groups[-1][0] == ev.label
        ):
            groups[-1][2] = ev.ts
            groups[-1][3] += 1
        else:
            groups.append([ev.label, ev.ts, ev.ts, 1])
    return CollapsedSequence(
        sequence_id=sequence.sequence_id,
        groups=tuple(CollapsedGroup(*g) for g in groups),
    )


def assign_flow_ids(
    task_id: str, collapsed: list[CollapsedSequence]
) -> FlowTable:
    """Group collapsed sequences by their exact ordered label list.

    Flows are ordered by descending count, ties broken lexicographically by
    label list, and numbered flow-1, flow-2, ... in that order.
    """
    by_labels: dict[tuple[str, ...], list[str]] = {}
    for c in collapsed:
        by_labels.setdefault(c.labels, []).append(c.sequence_id)
    total = sum(len(ids) for ids in by_labels.values())
    ranked = sorted(by_labels.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    flows = tuple(
        Flow(
            flow_id=f"flow-{rank}",
            labels=labels,
            sequence_ids=tuple(ids),
            count=len(ids),
            relative_frequency=len(ids) / total,
        )
        for rank, (labels, ids) in enumerate(ranked, start=1)
    )
    return FlowTable(task_id=task_id, flows=flows, total_sequences=total)


def time_on_task(sequence: Sequence) -> int:
    """Duration from the sequence's first to last event, in ms."""
    if not sequence.events:
        raise ValueError("sequence has no events")
    return sequence.events[-1].ts - sequence.events[0].ts


@dataclass(frozen=True)
class TaskAnalysis:
    """Everything the views need for one task over one store snapshot."""

    task: TaskDefinition
    sequences: tuple[Sequence, ...]
    collapsed: dict[str, CollapsedSequence]
    flow_table: FlowTable

    @property
    def task_id(self) -> str:
        return self.task.task_id

    def sequence_by_id(self, sequence_id: str) -> Sequence:
        for seq in self.sequences:
            if seq.sequence_id == sequence_id:
                return seq
        raise NotFoundError(f"unknown sequence {sequence_id!r}")


def analyze_task(store: SessionStore, task: TaskDefinition) -> TaskAnalysis:
    """Extract, collapse, and group one task's sequences from the store."""
    extracted = extract_sequences(store, task)
    collapsed = {
        seq.sequence_id: collapse_repeats(seq, task.aggregate_elements)
        for seq in extracted
    }
    flow_table = assign_flow_ids(task.task_id, list(collapsed.values()))
    flow_of = flow_table.flow_of_sequence()
    sequences = tuple(
        replace(seq, flow_id=flow_of[seq.sequence_id]) for seq in extracted
    )
    return TaskAnalysis(
        task=task, sequences=sequences, collapsed=collapsed, flow_table=flow_table
    )


def analysis_to_document(analysis: TaskAnalysis) -> dict:
    return {
        "format": ANALYSIS_FORMAT,
        "version": ANALYSIS_VERSION,
        "task": analysis.task.to_dict(),
        "task_id": analysis.task_id,
        "total_sequences": analysis.flow_table.total_sequences,
        "sequences": [
            {
                "sequence_id": s.sequence_id,
                "flow_id": s.flow_id,
                "session_id": s.session_id,
                "events": [[e.ts, e.ui_element, e.gesture] for e in s.events],
            }
            for s in analysis.sequences
        ],
        "flows": [
            {
                "flow_id": f.flow_id,
                "labels": list(f.labels),
                "count": f.count,
                "relative_frequency": f.relative_frequency,
                "sequence_ids": list(f.sequence_ids),
            }
            for f in analysis.flow_table.flows
        ],
    }


def analysis_from_document(doc: dict) -> TaskAnalysis:
    if doc.get("format") != ANALYSIS_FORMAT:
        raise ValueError("not a flowscope analysis document")
    if doc.get("version") != ANALYSIS_VERSION:
        raise ValueError(f"unsupported analysis version {doc.get('version')!r}")
    task = TaskDefinition.from_dict(doc["task"])
    sequences = tuple(
        Sequence(
            sequence_id=s["sequence_id"],
            task_id=doc["task_id"],
            flow_id=s["flow_id"],
            session_id=s["session_id"],
            events=tuple(
                InteractionEvent(s["session_id"], ts, element, gesture)
                for ts, element, gesture in s["events"]
            ),
        )
        for s in doc["sequences"]
    )
    collapsed = {
        seq.sequence_id: collapse_repeats(seq, task.aggregate_elements)
        for seq in sequences
    }
    flows = tuple(
        Flow(
            flow_id=f["flow_id"],
            labels=tuple(f["labels"]),
            sequence_ids=tuple(f["sequence_ids"]),
            count=f["count"],
            relative_frequency=f["relative_frequency"],
        )
        for f in doc["flows"]
    )
    flow_table = FlowTable(
        task_id=doc["task_id"], flows=flows, total_sequences=doc["total_sequences"]
    )
    return TaskAnalysis(
        task=task, sequences=sequences, collapsed=collapsed, flow_table=flow_table
    )


def save_analysis(analysis: TaskAnalysis, path: Path | str) -> None:
    doc = analysis_to_document(analysis)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_analysis(path: Path | str) -> TaskAnalysis:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"analysis not found: {path}")
    return analysis_from_document(json.loads(path.read_text("utf-8")))


def load_task_definition(path: Path | str) -> TaskDefinition:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"task definition not found: {path}")
    return TaskDefinition.from_dict(json.loads(path.read_text("utf-8")))
