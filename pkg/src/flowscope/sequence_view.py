"""Sequence level view: one sequence's interactions fused with glance and
driving context on a shared time axis.

Driving series pass through at their native 5 Hz; point metrics use the
nearest recorded sample instead of interpolating, so no fabricated values can
creep into safety-relevant readings.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

from .model import NotFoundError, Sequence, SessionStore

DEFAULT_PAD_MS = 2000
DEFAULT_DISPLAY_REGION = "CENTER_DISPLAY"
DEFAULT_LONG_GLANCE_MS = 2000

GLANCE_SHORT = "short"
GLANCE_LONG = "long"


def classify_glance(duration_ms: int, threshold_ms: int = DEFAULT_LONG_GLANCE_MS) -> str:
    """Long iff strictly above the threshold; a boundary glance counts as short."""
    return GLANCE_LONG if duration_ms > threshold_ms else GLANCE_SHORT


@dataclass(frozen=True, slots=True)
class TimelineGlance:
    start: int
    end: int
    duration: int
    glance_class: str


@dataclass(frozen=True)
class SequenceTimeline:
    sequence_id: str
    window: tuple[int, int]
    interactions: tuple[tuple[int, str], ...]
    glances: tuple[TimelineGlance, ...]
    speed: tuple[tuple[int, float], ...]
    steering: tuple[tuple[int, float], ...]
    has_glance_channel: bool
    has_driving_channel: bool
    long_glance_threshold_ms: int


def build_timeline(
    sequence: Sequence,
    store: SessionStore,
    *,
    pad_ms: int = DEFAULT_PAD_MS,
    display_region: str = DEFAULT_DISPLAY_REGION,
    long_glance_threshold_ms: int = DEFAULT_LONG_GLANCE_MS,
) -> SequenceTimeline:
    """Fuse one sequence with its session's glance and driving channels.

    The window spans [first event - pad, last event + pad], clipped to the
    session's recorded extent. Glances are filtered to the display region and
    clipped to the window with their duration recomputed over the clipped
    part; driving samples inside the window pass through unchanged. Channels
    the session never recorded are flagged, not fabricated.
    """
    if pad_ms < 0:
        raise ValueError("pad_ms must be >= 0")
    if long_glance_threshold_ms <= 0:
        raise ValueError("long glance threshold must be > 0")
    sid = sequence.session_id
    if not store.has_session(sid):
        raise NotFoundError(f"unknown session {sid!r} for sequence {sequence.sequence_id!r}")
    if not sequence.events:
        raise ValueError("sequence has no events")

    bounds = store.session_bounds(sid)
    assert bounds is not None
    t0 = max(sequence.events[0].ts - pad_ms, bounds[0])
    t1 = min(sequence.events[-1].ts + pad_ms, bounds[1])

    glances = []
    for g in store.glances_for(sid):
        if g.region != display_region:
            continue
        cs, ce = max(g.start, t0), min(g.end, t1)
        if ce - cs > 0:
            glances.append(
                TimelineGlance(cs, ce, ce - cs, classify_glance(ce - cs, long_glance_threshold_ms))
            )

    speed = tuple(
        (d.ts, d.speed) for d in store.driving_for(sid) if t0 <= d.ts <= t1
    )
    steering = tuple(
        (d.ts, d.steering) for d in store.driving_for(sid) if t0 <= d.ts <= t1
    )

    return SequenceTimeline(
        sequence_id=sequence.sequence_id,
        window=(t0, t1),
        interactions=tuple((e.ts, e.label) for e in sequence.events),
        glances=tuple(glances),
        speed=speed,
        steering=steering,
        has_glance_channel=bool(store.glances_for(sid)),
        has_driving_channel=bool(store.driving_for(sid)),
        long_glance_threshold_ms=long_glance_threshold_ms,
    )


def _nearest(series: tuple[tuple[int, float], ...], t: int) -> float:
    """Value at the sample nearest to t; the earlier sample wins ties."""
    ts_list = [ts for ts, _ in series]
    i = bisect_left(ts_list, t)
    if i == 0:
        return series[0][1]
    if i == len(series):
        return series[-1][1]
    before, after = series[i - 1], series[i]
    return after[1] if after[0] - t < t - before[0] else before[1]


@dataclass(frozen=True)
class TimelineMetrics:
    glance_count: int
    long_glance_count: int
    total_glance_ms: int
    interaction_count: int
    mean_speed: float | None
    speed_delta: float | None
    max_abs_steering_delta: float | None


def timeline_metrics(timeline: SequenceTimeline) -> TimelineMetrics:
    """Window-level summary; driving metrics are absent when the channel is."""
    mean_speed = speed_delta = max_steer = None
    if timeline.speed:
        mean_speed = sum(v for _, v in timeline.speed) / len(timeline.speed)
        first_ts = timeline.interactions[0][0]
        last_ts = timeline.interactions[-1][0]
        speed_delta = _nearest(timeline.speed, last_ts) - _nearest(timeline.speed, first_ts)
    if timeline.steering:
        base = timeline.steering[0][1]
        max_steer = max(abs(v - base) for _, v in timeline.steering)
    return TimelineMetrics(
        glance_count=len(timeline.glances),
        long_glance_count=sum(
            1 for g in timeline.glances if g.glance_class == GLANCE_LONG
        ),
        total_glance_ms=sum(g.duration for g in timeline.glances),
        interaction_count=len(timeline.interactions),
        mean_speed=mean_speed,
        speed_delta=speed_delta,
        max_abs_steering_delta=max_steer,
    )


def timeline_payload(timeline: SequenceTimeline) -> dict:
    """JSON contract consumed by the explorer UI and `export --view sequence`."""
    metrics = timeline_metrics(timeline)
    metrics_doc: dict = {
        "glance_count": metrics.glance_count,
        "long_glance_count": metrics.long_glance_count,
        "total_glance_ms": metrics.total_glance_ms,
        "interaction_count": metrics.interaction_count,
    }
    if metrics.mean_speed is not None:
        metrics_doc["mean_speed"] = round(metrics.mean_speed, 3)
        metrics_doc["speed_delta"] = round(metrics.speed_delta, 3)
    if metrics.max_abs_steering_delta is not None:
        metrics_doc["max_abs_steering_delta"] = round(metrics.max_abs_steering_delta, 3)
    return {
        "window": [timeline.window[0], timeline.window[1]],
        "interactions": [{"ts": ts, "label": label} for ts, label in timeline.interactions],
        "glances": [
            {"start": g.start, "end": g.end, "duration": g.duration, "class": g.glance_class}
            for g in timeline.glances
        ],
        "speed": [[ts, v] for ts, v in timeline.speed],
        "steering": [[ts, v] for ts, v in timeline.steering],
        "metrics": metrics_doc,
        "flags": {
            "glances": timeline.has_glance_channel,
            "driving": timeline.has_driving_channel,
        },
    }
