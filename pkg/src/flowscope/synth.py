"""Deterministic synthetic fleet generator.

Stands in for the proprietary telematics feed: emits the three jsonl log
files for a configurable number of sessions, each containing one (or more)
task episodes drawn from a path mixture, surrounded by unrelated noise
interactions, with tiling glance intervals and a 5 Hz driving trace matching
the scenario. Output is byte-identical for a given config, and every session
is generated from its own seed derived from (fleet seed, session id) so
generation could be parallelized without changing the result.

Transition times are lognormal (parameterized by median and sigma): they are
non-negative and right-skewed, matching observed long-tailed time-on-task
distributions.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from .ingest import SCHEMA_VERSION, LogBundle
from .model import DrivingSample, GlanceRecord, InteractionEvent


@dataclass(frozen=True)
class TransitionModel:
    """Lognormal duration model: exp(Normal(ln median, sigma))."""

    median_ms: float
    sigma: float

    def sample(self, rng: random.Random) -> int:
        value = self.median_ms * math.exp(self.sigma * rng.gauss(0.0, 1.0))
        return max(1, int(round(value)))

    def to_dict(self) -> dict:
        return {"median_ms": self.median_ms, "sigma": self.sigma}

    @classmethod
    def from_dict(cls, doc: dict) -> TransitionModel:
        return cls(median_ms=float(doc["median_ms"]), sigma=float(doc["sigma"]))


@dataclass(frozen=True)
class PathStep:
    """One step of a path template.

    ``enter`` models the gap from the previous event to this step's first
    event (ignored on the first step). A step with a ``repeat`` range emits
    that many events separated by ``intra`` gaps, e.g. keyboard tap bursts.
    """

    element: str
    gesture: str = "tap"
    enter: TransitionModel | None = None
    repeat: tuple[int, int] | None = None
    intra: TransitionModel | None = None

    def to_dict(self) -> dict:
        doc: dict = {"element": self.element, "gesture": self.gesture}
        if self.enter is not None:
            doc["enter"] = self.enter.to_dict()
        if self.repeat is not None:
            doc["repeat"] = {"min": self.repeat[0], "max": self.repeat[1]}
            doc["intra"] = self.intra.to_dict() if self.intra else None
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> PathStep:
        repeat = None
        intra = None
        if "repeat" in doc:
            repeat = (int(doc["repeat"]["min"]), int(doc["repeat"]["max"]))
            intra = TransitionModel.from_dict(doc["intra"])
        return cls(
            element=doc["element"],
            gesture=doc.get("gesture", "tap"),
            enter=TransitionModel.from_dict(doc["enter"]) if "enter" in doc else None,
            repeat=repeat,
            intra=intra,
        )


@dataclass(frozen=True)
class PathTemplate:
    name: str
    probability: float
    steps: tuple[PathStep, ...]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "probability": self.probability,
            "steps": [s.to_dict() for s in self.steps],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> PathTemplate:
        return cls(
            name=doc["name"],
            probability=float(doc["probability"]),
            steps=tuple(PathStep.from_dict(s) for s in doc["steps"]),
        )


@dataclass(frozen=True)
class GlanceModel:
    per_interaction_p: float = 0.7
    duration: TransitionModel = field(
        default_factory=lambda: TransitionModel(median_ms=1100, sigma=0.5)
    )
    lead_ms: tuple[int, int] = (150, 600)
    display_region: str = "CENTER_DISPLAY"
    road_region: str = "ROAD"

    def to_dict(self) -> dict:
        return {
            "per_interaction_p": self.per_interaction_p,
            "duration": self.duration.to_dict(),
            "lead_ms": list(self.lead_ms),
            "display_region": self.display_region,
            "road_region": self.road_region,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> GlanceModel:
        return cls(
            per_interaction_p=float(doc.get("per_interaction_p", 0.7)),
            duration=TransitionModel.from_dict(doc["duration"]),
            lead_ms=tuple(doc.get("lead_ms", [150, 600])),
            display_region=doc.get("display_region", "CENTER_DISPLAY"),
            road_region=doc.get("road_region", "ROAD"),
        )


@dataclass(frozen=True)
class DrivingModel:
    cruise_kmh: tuple[float, float] = (30.0, 110.0)
    typing_dip_frac: float = 0.15
    steering_sigma_deg: float = 1.2
    stop_and_type_p: float = 0.05
    sample_period_ms: int = 200

    def to_dict(self) -> dict:
        return {
            "cruise_kmh": list(self.cruise_kmh),
            "typing_dip_frac": self.typing_dip_frac,
            "steering_sigma_deg": self.steering_sigma_deg,
            "stop_and_type_p": self.stop_and_type_p,
            "sample_period_ms": self.sample_period_ms,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> DrivingModel:
        return cls(
            cruise_kmh=tuple(doc.get("cruise_kmh", [30.0, 110.0])),
            typing_dip_frac=float(doc.get("typing_dip_frac", 0.15)),
            steering_sigma_deg=float(doc.get("steering_sigma_deg", 1.2)),
            stop_and_type_p=float(doc.get("stop_and_type_p", 0.05)),
            sample_period_ms=int(doc.get("sample_period_ms", 200)),
        )


@dataclass(frozen=True)
class NoiseModel:
    pre_events: tuple[int, int] = (1, 3)
    post_events: tuple[int, int] = (0, 2)
    gap_ms: tuple[int, int] = (1200, 6000)
    elements: tuple[str, ...] = (
        "MediaButton",
        "HomeBar",
        "VolumeSlider",
        "ClimateButton",
    )

    def to_dict(self) -> dict:
        return {
            "pre_events": list(self.pre_events),
            "post_events": list(self.post_events),
            "gap_ms": list(self.gap_ms),
            "elements": list(self.elements),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> NoiseModel:
        return cls(
            pre_events=tuple(doc.get("pre_events", [1, 3])),
            post_events=tuple(doc.get("post_events", [0, 2])),
            gap_ms=tuple(doc.get("gap_ms", [1200, 6000])),
            elements=tuple(doc.get("elements", cls.elements)),
        )


@dataclass(frozen=True)
class FleetConfig:
    seed: int = 7
    n_sessions: int = 500
    episodes_per_session: int = 1
    paths: tuple[PathTemplate, ...] = ()
    glances: GlanceModel = field(default_factory=GlanceModel)
    driving: DrivingModel = field(default_factory=DrivingModel)
    noise: NoiseModel = field(default_factory=NoiseModel)

    def __post_init__(self) -> None:
        if self.n_sessions < 0:
            raise ValueError("n_sessions must be >= 0")
        if self.episodes_per_session < 0:
            raise ValueError("episodes_per_session must be >= 0")
        if self.paths:
            total = sum(p.probability for p in self.paths)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"path mixture probabilities sum to {total}, expected 1")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_sessions": self.n_sessions,
            "episodes_per_session": self.episodes_per_session,
            "paths": [p.to_dict() for p in self.paths],
            "glances": self.glances.to_dict(),
            "driving": self.driving.to_dict(),
            "noise": self.noise.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> FleetConfig:
        base = default_config()
        return cls(
            seed=int(doc.get("seed", base.seed)),
            n_sessions=int(doc.get("n_sessions", base.n_sessions)),
            episodes_per_session=int(doc.get("episodes_per_session", 1)),
            paths=tuple(PathTemplate.from_dict(p) for p in doc["paths"])
            if "paths" in doc
            else base.paths,
            glances=GlanceModel.from_dict(doc["glances"]) if "glances" in doc else base.glances,
            driving=DrivingModel.from_dict(doc["driving"]) if "driving" in doc else base.driving,
            noise=NoiseModel.from_dict(doc["noise"]) if "noise" in doc else base.noise,
        )


def default_config(seed: int = 7, n_sessions: int = 500) -> FleetConfig:
    """Navigation-task fleet with a 62/28/7/3 % path mixture.

    Destination entry via keyboard dominates; selecting from pre-entered
    favorites is modeled faster than scrolling previous destinations, and
    keyboard sessions run close to twice the favorites time on task.
    """
    start = PathStep(element="NavigateToButton")
    list_pick = PathStep(
        element="List", enter=TransitionModel(median_ms=1800, sigma=0.4)
    )
    confirm = PathStep(
        element="StartNavigationButton", enter=TransitionModel(median_ms=1500, sigma=0.35)
    )
    keyboard = PathTemplate(
        name="keyboard",
        probability=0.62,
        steps=(
            start,
            PathStep(
                element="OnScreenKeyboard",
                enter=TransitionModel(median_ms=1200, sigma=0.3),
                repeat=(8, 18),
                intra=TransitionModel(median_ms=500, sigma=0.35),
            ),
            list_pick,
            confirm,
        ),
    )
    previous = PathTemplate(
        name="previous_destinations",
        probability=0.28,
        steps=(
            start,
            PathStep(
                element="PreviousDestinationsButton",
                enter=TransitionModel(median_ms=1500, sigma=0.35),
            ),
            PathStep(element="List", enter=TransitionModel(median_ms=3000, sigma=0.4)),
            confirm,
        ),
    )
    favorites = PathTemplate(
        name="favorites",
        probability=0.07,
        steps=(
            start,
            PathStep(
                element="FavoritesButton",
                enter=TransitionModel(median_ms=1500, sigma=0.35),
            ),
            PathStep(element="List", enter=TransitionModel(median_ms=2300, sigma=0.4)),
            confirm,
        ),
    )
    text_field_first = PathTemplate(
        name="text_field_first",
        probability=0.03,
        steps=(
            start,
            PathStep(
                element="TextField",
                enter=TransitionModel(median_ms=1800, sigma=0.5),
            ),
            PathStep(
                element="OnScreenKeyboard",
                enter=TransitionModel(median_ms=1200, sigma=0.4),
                repeat=(8, 18),
                intra=TransitionModel(median_ms=500, sigma=0.35),
            ),
            list_pick,
            confirm,
        ),
    )
    return FleetConfig(
        seed=seed,
        n_sessions=n_sessions,
        paths=(keyboard, previous, favorites, text_field_first),
    )


def default_task_document() -> dict:
    """Task definition matching the default fleet's navigation episode."""
    return {
        "name": "start_navigation",
        "start": [{"element": "NavigateToButton", "gesture": "tap"}],
        "end": [{"element": "StartNavigationButton", "gesture": "tap"}],
        "termination": {"elements": [], "t_max_s": 60},
        "aggregate": ["OnScreenKeyboard"],
        "p_min": 0.005,
    }


@dataclass
class FleetRecords:
    events: list[InteractionEvent]
    glances: list[GlanceRecord]
    driving: list[DrivingSample]


def _session_rng(seed: int, session_id: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{session_id}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _episode_events(
    sid: str, path: PathTemplate, start_ts: int, rng: random.Random
) -> list[InteractionEvent]:
    events: list[InteractionEvent] = []
    t = start_ts
    for idx, step in enumerate(path.steps):
        if idx > 0:
            assert step.enter is not None, "non-initial steps need an enter model"
            t += step.enter.sample(rng)
        events.append(InteractionEvent(sid, t, step.element, step.gesture))
        if step.repeat is not None:
            count = rng.randint(step.repeat[0], step.repeat[1])
            assert step.intra is not None
            for _ in range(count - 1):
                t += step.intra.sample(rng)
                events.append(InteractionEvent(sid, t, step.element, step.gesture))
    return events


def _merge_intervals(intervals: list[tuple[int, int]]) -> list[tuple[int, int]]:
    merged: list[tuple[int, int]] = []
    for start, end in sorted(intervals):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def _session_glances(
    sid: str,
    cfg: GlanceModel,
    episode_events: list[InteractionEvent],
    span_end: int,
    rng: random.Random,
) -> list[GlanceRecord]:
    """Display glances near interactions, road glances tiling the rest."""
    display: list[tuple[int, int]] = []
    for ev in episode_events:
        if rng.random() < cfg.per_interaction_p:
            lead = rng.randint(cfg.lead_ms[0], cfg.lead_ms[1])
            start = max(0, ev.ts - lead)
            display.append((start, start + cfg.duration.sample(rng)))
    display = [(s, min(e, span_end)) for s, e in _merge_intervals(display) if s < span_end]
    display = [(s, e) for s, e in display if e > s]

    glances: list[GlanceRecord] = []
    cursor = 0
    for start, end in display:
        if start > cursor:
            glances.append(GlanceRecord(sid, cursor, start, cfg.road_region))
        glances.append(GlanceRecord(sid, start, end, cfg.display_region))
        cursor = end
    if cursor < span_end:
        glances.append(GlanceRecord(sid, cursor, span_end, cfg.road_region))
    return glances


def _session_driving(
    sid: str,
    cfg: DrivingModel,
    episode_events: list[InteractionEvent],
    span_end: int,
    stop_and_type: bool,
    rng: random.Random,
) -> list[DrivingSample]:
    cruise = rng.uniform(cfg.cruise_kmh[0], cfg.cruise_kmh[1])
    first_int = episode_events[0].ts if episode_events else None
    last_int = episode_events[-1].ts if episode_events else None
    margin = 1000
    ramp = 6000

    samples: list[DrivingSample] = []
    steering = 0.0
    for ts in range(0, span_end + 1, cfg.sample_period_ms):
        if stop_and_type and first_int is not None:
            zero_from = first_int - margin
            zero_to = last_int + margin
            if ts < zero_from - ramp:
                base = cruise
            elif ts < zero_from:
                base = cruise * (zero_from - ts) / ramp
            elif ts <= zero_to:
                base = 0.0
            elif ts <= zero_to + ramp:
                base = cruise * (ts - zero_to) / ramp
            else:
                base = cruise
        else:
            base = cruise
            if first_int is not None and first_int <= ts <= last_int:
                base = cruise * (1.0 - cfg.typing_dip_frac)
        if base > 0.0:
            speed = max(0.0, base + rng.gauss(0.0, 0.8))
        else:
            speed = 0.0
        steering = steering * 0.97 + rng.gauss(0.0, cfg.steering_sigma_deg * 0.25)
        samples.append(DrivingSample(sid, ts, round(speed, 1), round(steering, 2)))
    return samples


def _generate_session(config: FleetConfig, index: int) -> FleetRecords:
    sid = f"s{index:05d}"
    rng = _session_rng(config.seed, sid)
    noise = config.noise
    events: list[InteractionEvent] = []
    episode_events: list[InteractionEvent] = []

    def gap() -> int:
        return rng.randint(noise.gap_ms[0], noise.gap_ms[1])

    def noise_event(ts: int) -> InteractionEvent:
        element = rng.choice(noise.elements)
        gesture = "drag" if rng.random() < 0.2 else "tap"
        return InteractionEvent(sid, ts, element, gesture)

    t = gap()
    for _ in range(rng.randint(noise.pre_events[0], noise.pre_events[1])):
        events.append(noise_event(t))
        t += gap()
    weights = [p.probability for p in config.paths]
    for _ in range(config.episodes_per_session):
        path = rng.choices(config.paths, weights=weights)[0]
        episode = _episode_events(sid, path, t, rng)
        events.extend(episode)
        episode_events.extend(episode)
        t = episode[-1].ts + gap()
    for _ in range(rng.randint(noise.post_events[0], noise.post_events[1])):
        events.append(noise_event(t))
        t += gap()

    span_end = t + 1000
    stop_and_type = bool(episode_events) and rng.random() < config.driving.stop_and_type_p
    glances = _session_glances(sid, config.glances, episode_events, span_end, rng)
    driving = _session_driving(
        sid, config.driving, episode_events, span_end, stop_and_type, rng
    )
    return FleetRecords(events=events, glances=glances, driving=driving)


def generate_fleet(config: FleetConfig) -> FleetRecords:
    """Generate all sessions of the fleet, in session-id order."""
    if config.episodes_per_session > 0 and not config.paths:
        raise ValueError("config has episodes to generate but no paths")
    records = FleetRecords(events=[], glances=[], driving=[])
    for index in range(config.n_sessions):
        session = _generate_session(config, index)
        records.events.extend(session.events)
        records.glances.extend(session.glances)
        records.driving.extend(session.driving)
    return records


def _dump(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"))


def write_fleet(config: FleetConfig, out_dir: Path | str) -> LogBundle:
    """Generate the fleet and write the three jsonl files plus a manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = generate_fleet(config)

    events_path = out_dir / "events.jsonl"
    with open(events_path, "w", encoding="utf-8") as fh:
        for e in records.events:
            fh.write(
                _dump(
                    {
                        "session_id": e.session_id,
                        "ts": e.ts,
                        "ui_element": e.ui_element,
                        "gesture": e.gesture,
                    }
                )
                + "\n"
            )
    glances_path = out_dir / "glances.jsonl"
    with open(glances_path, "w", encoding="utf-8") as fh:
        for g in records.glances:
            fh.write(
                _dump(
                    {
                        "session_id": g.session_id,
                        "start": g.start,
                        "end": g.end,
                        "region": g.region,
                    }
                )
                + "\n"
            )
    driving_path = out_dir / "driving.jsonl"
    with open(driving_path, "w", encoding="utf-8") as fh:
        for d in records.driving:
            fh.write(
                _dump(
                    {
                        "session_id": d.session_id,
                        "ts": d.ts,
                        "speed": d.speed,
                        "steering": d.steering,
                    }
                )
                + "\n"
            )
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "seed": config.seed,
        "n_sessions": config.n_sessions,
        "files": {
            "events": "events.jsonl",
            "glances": "glances.jsonl",
            "driving": "driving.jsonl",
        },
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return LogBundle(
        events_path=events_path,
        glances_path=glances_path,
        driving_path=driving_path,
        schema_version=SCHEMA_VERSION,
    )


def load_config(path: Path | str) -> FleetConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"fleet config not found: {path}")
    return FleetConfig.from_dict(json.loads(path.read_text("utf-8")))
