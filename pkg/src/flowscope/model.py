"""Canonical domain types shared across the analytics pipeline.

All timestamps are integer milliseconds relative to the session epoch, and a
session is linked across the three signal classes only by its opaque session
ID. Every type here is an immutable value after construction and safe to
share between threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

GESTURES = ("tap", "drag", "other")

#: Nominal spacing of driving samples (5 Hz).
DRIVING_PERIOD_MS = 200
#: Gaps between consecutive driving samples above this are reported as anomalies.
DRIVING_GAP_ANOMALY_MS = 400

MS_PER_DAY = 86_400_000


class NotFoundError(LookupError):
    """A session, task, flow, sequence, node, or link id did not resolve."""


def normalize_gesture(raw: str) -> str:
    """Collapse anything outside the tap/drag vocabulary to ``other``."""
    return raw if raw in ("tap", "drag") else "other"


def event_label(ui_element: str, gesture: str) -> str:
    """Annotated display label, e.g. ``NavigateToButton_tap``."""
    return f"{ui_element}_{gesture}"


@dataclass(frozen=True, slots=True)
class InteractionEvent:
    """One timestamped touch interaction on the center display."""

    session_id: str
    ts: int
    ui_element: str
    gesture: str

    @property
    def label(self) -> str:
        return event_label(self.ui_element, self.gesture)

    @property
    def key(self) -> tuple[str, str]:
        return (self.ui_element, self.gesture)


@dataclass(frozen=True, slots=True)
class GlanceRecord:
    """A glance toward one region of interest, recorded as a time interval."""

    session_id: str
    start: int
    end: int
    region: str

    @property
    def duration(self) -> int:
        return self.end - self.start


@dataclass(frozen=True, slots=True)
class DrivingSample:
    """One 5 Hz sample of vehicle speed (km/h) and steering angle (deg)."""

    session_id: str
    ts: int
    speed: float
    steering: float


_SLUG_RE = re.compile(r"[^a-z0-9]+")


def slugify(name: str) -> str:
    slug = _SLUG_RE.sub("-", name.lower()).strip("-")
    return slug or "task"


@dataclass(frozen=True)
class TaskDefinition:
    """Start/end conditions and cleansing rules that bound one analyzable task.

    ``start_events``, ``end_events``, and ``termination_elements`` are sets of
    ``(ui_element, gesture)`` pairs. ``t_max_s`` is the maximum number of
    seconds allowed between two consecutive events of a candidate sequence;
    ``aggregate_elements`` lists UI elements whose consecutive repeats are
    shown as a single step; ``p_min`` is the default minimum relative flow
    frequency for the task view.
    """

    name: str
    start_events: frozenset[tuple[str, str]]
    end_events: frozenset[tuple[str, str]]
    termination_elements: frozenset[tuple[str, str]] = frozenset()
    t_max_s: float | None = None
    aggregate_elements: frozenset[str] = frozenset()
    p_min: float = 0.0

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("task name must be non-empty")
        if not self.start_events:
            raise ValueError("task needs at least one start event")
        if not self.end_events:
            raise ValueError("task needs at least one end event")
        if self.t_max_s is not None and not self.t_max_s > 0:
            raise ValueError("t_max_s must be > 0 when set")
        if not 0.0 <= self.p_min <= 1.0:
            raise ValueError("p_min must lie in [0, 1]")

    @property
    def task_id(self) -> str:
        return slugify(self.name)

    @property
    def t_max_ms(self) -> int | None:
        return None if self.t_max_s is None else int(round(self.t_max_s * 1000))

    @classmethod
    def from_dict(cls, doc: dict) -> TaskDefinition:
        """Parse the task-definition JSON document format."""

        def pairs(items: list[dict]) -> frozenset[tuple[str, str]]:
            return frozenset((d["element"], d["gesture"]) for d in items)

        termination = doc.get("termination") or {}
        return cls(
            name=doc["name"],
            start_events=pairs(doc["start"]),
            end_events=pairs(doc["end"]),
            termination_elements=pairs(termination.get("elements", [])),
            t_max_s=termination.get("t_max_s"),
            aggregate_elements=frozenset(doc.get("aggregate", [])),
            p_min=float(doc.get("p_min", 0.0)),
        )

    def to_dict(self) -> dict:
        def pairs(items: frozenset[tuple[str, str]]) -> list[dict]:
            return [{"element": e, "gesture": g} for e, g in sorted(items)]

        return {
            "name": self.name,
            "start": pairs(self.start_events),
            "end": pairs(self.end_events),
            "termination": {
                "elements": pairs(self.termination_elements),
                "t_max_s": self.t_max_s,
            },
            "aggregate": sorted(self.aggregate_elements),
            "p_min": self.p_min,
        }


@dataclass(frozen=True, slots=True)
class Sequence:
    """One concrete execution of a task: an ordered run of events in a session."""

    sequence_id: str
    task_id: str
    flow_id: str
    session_id: str
    events: tuple[InteractionEvent, ...]


@dataclass(frozen=True)
class SessionStore:
    """Per-session, time-sorted views of all three signal classes.

    Sessions present in only some streams are kept; the missing channels are
    simply empty. Treated as immutable once assembled.
    """

    events: dict[str, tuple[InteractionEvent, ...]]
    glances: dict[str, tuple[GlanceRecord, ...]]
    driving: dict[str, tuple[DrivingSample, ...]]

    def session_ids(self) -> list[str]:
        return sorted(set(self.events) | set(self.glances) | set(self.driving))

    def has_session(self, session_id: str) -> bool:
        return (
            session_id in self.events
            or session_id in self.glances
            or session_id in self.driving
        )

    def events_for(self, session_id: str) -> tuple[InteractionEvent, ...]:
        return self.events.get(session_id, ())

    def glances_for(self, session_id: str) -> tuple[GlanceRecord, ...]:
        return self.glances.get(session_id, ())

    def driving_for(self, session_id: str) -> tuple[DrivingSample, ...]:
        return self.driving.get(session_id, ())

    def session_bounds(self, session_id: str) -> tuple[int, int] | None:
        """Earliest and latest timestamp seen on any channel of the session."""
        lows: list[int] = []
        highs: list[int] = []
        evs = self.events_for(session_id)
        if evs:
            lows.append(evs[0].ts)
            highs.append(evs[-1].ts)
        gls = self.glances_for(session_id)
        if gls:
            lows.append(min(g.start for g in gls))
            highs.append(max(g.end for g in gls))
        drv = self.driving_for(session_id)
        if drv:
            lows.append(drv[0].ts)
            highs.append(drv[-1].ts)
        if not lows:
            return None
        return (min(lows), max(highs))


@dataclass(frozen=True, slots=True)
class Violation:
    kind: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    session_id: str
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_session(session_id: str, store: SessionStore) -> ValidationReport:
    """Check one session's stored data against the model invariants.

    Reports ordering violations, non-positive glance durations, and driving
    sampling gaps above :data:`DRIVING_GAP_ANOMALY_MS`. An empty report means
    every invariant holds.
    """
    if not store.has_session(session_id):
        raise NotFoundError(f"unknown session {session_id!r}")

    found: list[Violation] = []
    events = store.events_for(session_id)
    for prev, cur in zip(events, events[1:]):
        if cur.ts < prev.ts:
            found.append(
                Violation("event_order", f"event at {cur.ts} ms follows {prev.ts} ms")
            )
    glances = store.glances_for(session_id)
    for g in glances:
        if g.end <= g.start:
            found.append(
                Violation(
                    "negative_glance_duration",
                    f"glance [{g.start}, {g.end}] has duration {g.duration} ms",
                )
            )
    for prev, cur in zip(glances, glances[1:]):
        if cur.start < prev.start:
            found.append(
                Violation(
                    "glance_order",
                    f"glance starting {cur.start} ms follows {prev.start} ms",
                )
            )
    driving = store.driving_for(session_id)
    for prev, cur in zip(driving, driving[1:]):
        if cur.ts <= prev.ts:
            found.append(
                Violation(
                    "driving_order",
                    f"driving sample at {cur.ts} ms not after {prev.ts} ms",
                )
            )
        elif cur.ts - prev.ts > DRIVING_GAP_ANOMALY_MS:
            found.append(
                Violation(
                    "sampling_gap",
                    f"{cur.ts - prev.ts} ms between driving samples at {prev.ts} ms",
                )
            )
    return ValidationReport(session_id, tuple(found))
