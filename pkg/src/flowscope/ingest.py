"""Parsing, session assembly, anonymization, and store persistence.

The three log streams are newline-delimited JSON, one record per line:

* ``events.jsonl``  — ``session_id`` (str), ``ts`` (int ms), ``ui_element``
  (str), ``gesture`` (str, one of tap/drag/other)
* ``glances.jsonl`` — ``session_id``, ``start`` (int ms), ``end`` (int ms),
  ``region`` (str)
* ``driving.jsonl`` — ``session_id``, ``ts`` (int ms), ``speed`` (float km/h),
  ``steering`` (float deg)

Malformed lines are collected as errors with their line numbers, never
silently dropped. The assembled :class:`~flowscope.model.SessionStore` is
persisted as a gzip-compressed JSON document (see README for the layout).
"""

from __future__ import annotations

import gzip
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Generic, Iterable, Iterator, TypeVar

from .model import (
    GESTURES,
    MS_PER_DAY,
    DrivingSample,
    GlanceRecord,
    InteractionEvent,
    SessionStore,
)

SCHEMA_VERSION = 1

STORE_FORMAT = "flowscope-store"
STORE_VERSION = 1

T = TypeVar("T")


@dataclass(frozen=True, slots=True)
class ParseIssue:
    line_no: int
    message: str


@dataclass
class ParseResult(Generic[T]):
    records: list[T] = field(default_factory=list)
    errors: list[ParseIssue] = field(default_factory=list)
    warnings: list[ParseIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def _iter_lines(stream: bytes | IO[bytes]) -> Iterator[tuple[int, str]]:
    if isinstance(stream, (bytes, bytearray)):
        lines: Iterable[bytes] = io.BytesIO(stream)
    else:
        lines = stream
    for line_no, raw in enumerate(lines, start=1):
        text = raw.decode("utf-8", errors="replace") if isinstance(raw, bytes) else raw
        text = text.strip()
        if text:
            yield line_no, text


def _parse_object(line_no: int, text: str, out: ParseResult) -> dict | None:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        out.errors.append(ParseIssue(line_no, f"invalid JSON: {exc.msg}"))
        return None
    if not isinstance(obj, dict):
        out.errors.append(ParseIssue(line_no, "record is not a JSON object"))
        return None
    return obj


def _get_str(obj: dict, key: str) -> str | None:
    v = obj.get(key)
    if isinstance(v, str) and v:
        return v
    return None


def _get_int(obj: dict, key: str) -> int | None:
    v = obj.get(key)
    if isinstance(v, int) and not isinstance(v, bool):
        return v
    return None


def _get_number(obj: dict, key: str) -> float | None:
    v = obj.get(key)
    if isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v):
        return float(v)
    return None


def parse_event_log(stream: bytes | IO[bytes]) -> ParseResult[InteractionEvent]:
    """Parse events.jsonl; unknown gesture strings map to ``other`` with a warning."""
    out: ParseResult[InteractionEvent] = ParseResult()
    for line_no, text in _iter_lines(stream):
        obj = _parse_object(line_no, text, out)
        if obj is None:
            continue
        session_id = _get_str(obj, "session_id")
        ts = _get_int(obj, "ts")
        ui_element = _get_str(obj, "ui_element")
        gesture = obj.get("gesture")
        if session_id is None:
            out.errors.append(ParseIssue(line_no, "missing or empty session_id"))
            continue
        if ts is None or ts < 0:
            out.errors.append(ParseIssue(line_no, "ts must be a non-negative integer"))
            continue
        if ui_element is None:
            out.errors.append(ParseIssue(line_no, "missing or empty ui_element"))
            continue
        if not isinstance(gesture, str) or not gesture:
            out.errors.append(ParseIssue(line_no, "missing or empty gesture"))
            continue
        if gesture not in GESTURES:
            out.warnings.append(
                ParseIssue(line_no, f"unknown gesture {gesture!r} mapped to 'other'")
            )
            gesture = "other"
        out.records.append(InteractionEvent(session_id, ts, ui_element, gesture))
    return out


def parse_glance_log(stream: bytes | IO[bytes]) -> ParseResult[GlanceRecord]:
    """Parse glances.jsonl; zero or negative durations are rejected as errors.

    Overlapping glances within a session are kept but flagged as warnings; the
    upstream on-vehicle processing is supposed to emit disjoint intervals.
    """
    out: ParseResult[GlanceRecord] = ParseResult()
    lined: list[tuple[int, GlanceRecord]] = []
    for line_no, text in _iter_lines(stream):
        obj = _parse_object(line_no, text, out)
        if obj is None:
            continue
        session_id = _get_str(obj, "session_id")
        start = _get_int(obj, "start")
        end = _get_int(obj, "end")
        region = _get_str(obj, "region")
        if session_id is None:
            out.errors.append(ParseIssue(line_no, "missing or empty session_id"))
            continue
        if start is None or start < 0:
            out.errors.append(ParseIssue(line_no, "start must be a non-negative integer"))
            continue
        if end is None:
            out.errors.append(ParseIssue(line_no, "end must be an integer"))
            continue
        if region is None:
            out.errors.append(ParseIssue(line_no, "missing or empty region"))
            continue
        if end == start:
            out.errors.append(ParseIssue(line_no, "empty glance (end == start)"))
            continue
        if end < start:
            out.errors.append(ParseIssue(line_no, "negative glance duration (end < start)"))
            continue
        rec = GlanceRecord(session_id, start, end, region)
        lined.append((line_no, rec))
        out.records.append(rec)

    by_session: dict[str, list[tuple[int, GlanceRecord]]] = {}
    for line_no, rec in lined:
        by_session.setdefault(rec.session_id, []).append((line_no, rec))
    for session_id, items in by_session.items():
        items.sort(key=lambda it: (it[1].start, it[1].end))
        for (_, prev), (line_no, cur) in zip(items, items[1:]):
            if cur.start < prev.end:
                out.warnings.append(
                    ParseIssue(
                        line_no,
                        f"glance [{cur.start}, {cur.end}] overlaps previous glance "
                        f"in session {session_id!r}",
                    )
                )
    return out


def parse_driving_log(stream: bytes | IO[bytes]) -> ParseResult[DrivingSample]:
    """Parse driving.jsonl; negative or non-finite speeds are errors."""
    out: ParseResult[DrivingSample] = ParseResult()
    for line_no, text in _iter_lines(stream):
        obj = _parse_object(line_no, text, out)
        if obj is None:
            continue
        session_id = _get_str(obj, "session_id")
        ts = _get_int(obj, "ts")
        speed = _get_number(obj, "speed")
        steering = _get_number(obj, "steering")
        if session_id is None:
            out.errors.append(ParseIssue(line_no, "missing or empty session_id"))
            continue
        if ts is None or ts < 0:
            out.errors.append(ParseIssue(line_no, "ts must be a non-negative integer"))
            continue
        if speed is None:
            out.errors.append(ParseIssue(line_no, "missing or non-finite speed"))
            continue
        if speed < 0:
            out.errors.append(ParseIssue(line_no, "negative speed"))
            continue
        if steering is None:
            out.errors.append(ParseIssue(line_no, "missing or non-finite steering"))
            continue
        out.records.append(DrivingSample(session_id, ts, speed, steering))
    return out


def assemble_store(
    events: Iterable[InteractionEvent],
    glances: Iterable[GlanceRecord],
    driving: Iterable[DrivingSample],
) -> SessionStore:
    """Group records by session and sort each channel by time.

    Sorting is stable, so records sharing a timestamp keep their input order.
    Sessions appearing in only some streams are kept with the other channels
    empty.
    """
    ev_by: dict[str, list[InteractionEvent]] = {}
    for ev in events:
        ev_by.setdefault(ev.session_id, []).append(ev)
    gl_by: dict[str, list[GlanceRecord]] = {}
    for gl in glances:
        gl_by.setdefault(gl.session_id, []).append(gl)
    dr_by: dict[str, list[DrivingSample]] = {}
    for dr in driving:
        dr_by.setdefault(dr.session_id, []).append(dr)

    return SessionStore(
        events={
            sid: tuple(sorted(ev_by[sid], key=lambda e: e.ts)) for sid in sorted(ev_by)
        },
        glances={
            sid: tuple(sorted(gl_by[sid], key=lambda g: (g.start, g.end)))
            for sid in sorted(gl_by)
        },
        driving={
            sid: tuple(sorted(dr_by[sid], key=lambda d: d.ts)) for sid in sorted(dr_by)
        },
    )


def _session_epoch(store: SessionStore, session_id: str) -> int:
    bounds = store.session_bounds(session_id)
    return 0 if bounds is None else bounds[0]


def anonymize(store: SessionStore, seed: int) -> SessionStore:
    """Rebase every session to a pseudo-random day offset and re-key it.

    Each session's first datapoint lands at an offset in [0, 86_400_000) ms
    derived from ``seed`` and the original id; all within-session deltas are
    preserved exactly. Session ids are replaced by opaque hex tokens and the
    mapping is discarded.
    """
    originals = store.session_ids()
    tokens: dict[str, str] = {}
    offsets: dict[str, int] = {}
    for sid in originals:
        digest = hashlib.sha256(f"{seed}:{sid}".encode("utf-8")).hexdigest()
        tokens[sid] = digest[:16]
        offsets[sid] = int(digest[16:28], 16) % MS_PER_DAY
    if len(set(tokens.values())) != len(originals):
        # vanishingly unlikely, but keep tokens unique deterministically
        for idx, sid in enumerate(originals):
            tokens[sid] = f"{tokens[sid]}-{idx}"

    events: dict[str, tuple[InteractionEvent, ...]] = {}
    glances: dict[str, tuple[GlanceRecord, ...]] = {}
    driving: dict[str, tuple[DrivingSample, ...]] = {}
    for sid in originals:
        token = tokens[sid]
        shift = offsets[sid] - _session_epoch(store, sid)
        if store.events_for(sid):
            events[token] = tuple(
                InteractionEvent(token, e.ts + shift, e.ui_element, e.gesture)
                for e in store.events_for(sid)
            )
        if store.glances_for(sid):
            glances[token] = tuple(
                GlanceRecord(token, g.start + shift, g.end + shift, g.region)
                for g in store.glances_for(sid)
            )
        if store.driving_for(sid):
            driving[token] = tuple(
                DrivingSample(token, d.ts + shift, d.speed, d.steering)
                for d in store.driving_for(sid)
            )
    return SessionStore(
        events={sid: events[sid] for sid in sorted(events)},
        glances={sid: glances[sid] for sid in sorted(glances)},
        driving={sid: driving[sid] for sid in sorted(driving)},
    )


@dataclass(frozen=True)
class LogBundle:
    """The three log files produced by one fleet export."""

    events_path: Path
    glances_path: Path
    driving_path: Path
    schema_version: int = SCHEMA_VERSION

    def validate(self) -> None:
        for path in (self.events_path, self.glances_path, self.driving_path):
            if not path.exists():
                raise FileNotFoundError(f"log file not found: {path}")
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported schema_version {self.schema_version}; "
                f"this build reads version {SCHEMA_VERSION}"
            )

    @classmethod
    def from_dir(cls, directory: Path | str) -> LogBundle:
        directory = Path(directory)
        manifest_path = directory / "manifest.json"
        version = SCHEMA_VERSION
        names = {"events": "events.jsonl", "glances": "glances.jsonl", "driving": "driving.jsonl"}
        if manifest_path.exists():
            manifest = json.loads(manifest_path.read_text("utf-8"))
            version = int(manifest.get("schema_version", SCHEMA_VERSION))
            names.update(manifest.get("files", {}))
        return cls(
            events_path=directory / names["events"],
            glances_path=directory / names["glances"],
            driving_path=directory / names["driving"],
            schema_version=version,
        )


@dataclass
class IngestReport:
    events: ParseResult[InteractionEvent]
    glances: ParseResult[GlanceRecord]
    driving: ParseResult[DrivingSample]

    @property
    def error_count(self) -> int:
        return len(self.events.errors) + len(self.glances.errors) + len(self.driving.errors)

    @property
    def warning_count(self) -> int:
        return (
            len(self.events.warnings)
            + len(self.glances.warnings)
            + len(self.driving.warnings)
        )


def ingest_bundle(bundle: LogBundle) -> tuple[SessionStore, IngestReport]:
    """Parse all three files of a bundle and assemble the session store."""
    bundle.validate()
    with open(bundle.events_path, "rb") as fh:
        events = parse_event_log(fh)
    with open(bundle.glances_path, "rb") as fh:
        glances = parse_glance_log(fh)
    with open(bundle.driving_path, "rb") as fh:
        driving = parse_driving_log(fh)
    store = assemble_store(events.records, glances.records, driving.records)
    return store, IngestReport(events, glances, driving)


def store_to_document(store: SessionStore) -> dict:
    sessions: dict[str, dict] = {}
    for sid in store.session_ids():
        sessions[sid] = {
            "events": [[e.ts, e.ui_element, e.gesture] for e in store.events_for(sid)],
            "glances": [[g.start, g.end, g.region] for g in store.glances_for(sid)],
            "driving": [[d.ts, d.speed, d.steering] for d in store.driving_for(sid)],
        }
    return {"format": STORE_FORMAT, "version": STORE_VERSION, "sessions": sessions}


def store_from_document(doc: dict) -> SessionStore:
    if doc.get("format") != STORE_FORMAT:
        raise ValueError("not a flowscope store document")
    if doc.get("version") != STORE_VERSION:
        raise ValueError(f"unsupported store version {doc.get('version')!r}")
    events: dict[str, tuple[InteractionEvent, ...]] = {}
    glances: dict[str, tuple[GlanceRecord, ...]] = {}
    driving: dict[str, tuple[DrivingSample, ...]] = {}
    for sid, channels in doc["sessions"].items():
        if channels["events"]:
            events[sid] = tuple(
                InteractionEvent(sid, ts, element, gesture)
                for ts, element, gesture in channels["events"]
            )
        if channels["glances"]:
            glances[sid] = tuple(
                GlanceRecord(sid, start, end, region)
                for start, end, region in channels["glances"]
            )
        if channels["driving"]:
            driving[sid] = tuple(
                DrivingSample(sid, ts, speed, steering)
                for ts, speed, steering in channels["driving"]
            )
    return SessionStore(events=events, glances=glances, driving=driving)


def save_store(store: SessionStore, path: Path | str) -> None:
    payload = json.dumps(store_to_document(store), separators=(",", ":")).encode("utf-8")
    # mtime=0 keeps gzip output byte-stable across runs
    Path(path).write_bytes(gzip.compress(payload, mtime=0))


def load_store(path: Path | str) -> SessionStore:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"store not found: {path}")
    try:
        payload = gzip.decompress(path.read_bytes())
        doc = json.loads(payload)
    except (OSError, ValueError) as exc:
        raise ValueError(f"could not read store {path}: {exc}") from exc
    return store_from_document(doc)
