from __future__ import annotations

import pytest

from flowscope.extraction import analyze_task
from flowscope.ingest import assemble_store
from flowscope.model import InteractionEvent, SessionStore, TaskDefinition
from flowscope.synth import default_config, default_task_document, generate_fleet


def make_event(
    sid: str, ts: int, element: str, gesture: str = "tap"
) -> InteractionEvent:
    return InteractionEvent(sid, ts, element, gesture)


def store_from_events(events: list[InteractionEvent]) -> SessionStore:
    return assemble_store(events, [], [])


@pytest.fixture(scope="session")
def nav_task() -> TaskDefinition:
    return TaskDefinition.from_dict(default_task_document())


@pytest.fixture(scope="session")
def fleet_store() -> SessionStore:
    records = generate_fleet(default_config(seed=7, n_sessions=2000))
    return assemble_store(records.events, records.glances, records.driving)


@pytest.fixture(scope="session")
def fleet_analysis(fleet_store, nav_task):
    return analyze_task(fleet_store, nav_task)
