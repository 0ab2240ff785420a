"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest -s tests/test_acceptance.py` to see them).
"""

from __future__ import annotations

import contextlib
import json
import random
import time

import pytest
from fastapi.testclient import TestClient

from flowscope.cli import main
from flowscope.extraction import analyze_task, extract_sequences, time_on_task
from flowscope.flow_view import flow_distributions, summary_stats
from flowscope.ingest import assemble_store, ingest_bundle, load_store
from flowscope.model import TaskDefinition
from flowscope.sequence_view import build_timeline, classify_glance, timeline_metrics
from flowscope.server import create_app
from flowscope.synth import FleetConfig, default_config, default_task_document, write_fleet, generate_fleet
from flowscope.task_view import build_sankey
from oracles import brute_force_extract, nearest_sample, quantile_type7

from conftest import make_event, store_from_events
from fixtures_timeline import keyboard_heavy_fixture, stop_and_type_fixture


@contextlib.contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {name}: FAIL")
        raise
    print(f"ACCEPTANCE {name}: PASS")


@pytest.fixture(scope="module")
def mixture_run(tmp_path_factory, nav_task):
    """Full-scale pipeline on the default config at N = 10,000 sessions."""
    root = tmp_path_factory.mktemp("mixture")
    t0 = time.perf_counter()
    bundle = write_fleet(default_config(seed=101, n_sessions=10_000), root)
    store, report = ingest_bundle(bundle)
    analysis = analyze_task(store, nav_task)
    graph = build_sankey(analysis.flow_table, analysis.collapsed, nav_task.p_min)
    elapsed = time.perf_counter() - t0
    return {
        "elapsed": elapsed,
        "graph": graph,
        "analysis": analysis,
        "report": report,
        "store": store,
    }


def test_01_extraction_oracle_equivalence(nav_task):
    task = TaskDefinition(
        name="oracle-task",
        start_events=frozenset({("A", "tap")}),
        end_events=frozenset({("Z", "tap")}),
        termination_elements=frozenset({("Q", "tap")}),
        t_max_s=60,
    )
    rng = random.Random(20_240)
    vocabulary = ["A", "B", "C", "Z", "Q", "T", "A", "Z"]
    sessions: dict[str, list] = {}
    for i in range(1_000):
        sid = f"r{i:04d}"
        events = []
        ts = 0
        for _ in range(rng.randint(0, 50)):
            ts += rng.choice([40, 300, 2_000, 15_000, 61_500])
            events.append(make_event(sid, ts, rng.choice(vocabulary)))
        sessions[sid] = events

    with criterion("extraction-oracle-equivalence"):
        t0 = time.perf_counter()
        store = store_from_events([e for evs in sessions.values() for e in evs])
        got = extract_sequences(store, task)
        by_session: dict[str, list] = {}
        for seq in got:
            by_session.setdefault(seq.session_id, []).append(seq)
        for sid, events in sessions.items():
            expected = brute_force_extract(events, task)
            actual = by_session.get(sid, [])
            assert len(actual) == len(expected), sid
            for seq, (i, j) in zip(actual, expected):
                assert seq.events == tuple(events[i : j + 1]), sid
        elapsed = time.perf_counter() - t0
        assert elapsed < 10.0, f"oracle sweep took {elapsed:.1f}s"
        assert len({s.sequence_id for s in got}) == len(got)


def test_02_cleansing_under_t_max(nav_task):
    task = TaskDefinition.from_dict(
        {
            **default_task_document(),
            "termination": {
                "elements": [{"element": "CancelButton", "gesture": "tap"}],
                "t_max_s": 60,
            },
        }
    )
    rng = random.Random(7_331)
    events = []
    violated = 0
    clean = 0
    for i in range(300):
        sid = f"c{i:03d}"
        base = [
            make_event(sid, 0, "NavigateToButton"),
            make_event(sid, 1_200, "OnScreenKeyboard"),
            make_event(sid, 3_500, "List"),
            make_event(sid, 5_000, "StartNavigationButton"),
        ]
        kind = rng.choice(["clean", "gap", "termination"])
        if kind == "gap":
            # push the tail 61 s out: gap above t_max between steps 2 and 3
            base = base[:2] + [
                make_event(sid, 62_500, "List"),
                make_event(sid, 64_000, "StartNavigationButton"),
            ]
            violated += 1
        elif kind == "termination":
            base.insert(2, make_event(sid, 2_000, "CancelButton"))
            violated += 1
        else:
            clean += 1
        events.extend(base)

    with criterion("cleansing"):
        store = store_from_events(events)
        sequences = extract_sequences(store, task)
        assert len(sequences) == clean, "injected violations must be 100% cleansed"
        for seq in sequences:
            gaps = [b.ts - a.ts for a, b in zip(seq.events, seq.events[1:])]
            assert max(gaps) <= 60_000
            assert all(e.key not in task.termination_elements for e in seq.events)


def test_03_sankey_conservation_over_random_fleets(nav_task):
    rng = random.Random(99)
    with criterion("sankey-conservation"):
        for trial in range(100):
            base = default_config(seed=rng.randrange(1_000_000), n_sessions=30)
            weights = [rng.random() + 0.05 for _ in base.paths]
            total = sum(weights)
            doc = base.to_dict()
            for path_doc, w in zip(doc["paths"], weights):
                path_doc["probability"] = w / total
            config = FleetConfig.from_dict(doc)
            records = generate_fleet(config)
            store = assemble_store(records.events, records.glances, records.driving)
            analysis = analyze_task(store, nav_task)
            graph = build_sankey(analysis.flow_table, analysis.collapsed, 0.0)
            for node in graph.nodes:
                inward = sum(l.weight for l in graph.links if l.target == node.node_id)
                outward = sum(l.weight for l in graph.links if l.source == node.node_id)
                if inward and outward:
                    assert inward == outward == node.cardinality, f"trial {trial}"
                elif node.step == 0:
                    assert outward == node.cardinality
                else:
                    assert inward == node.cardinality


def test_04_mixture_reproduction(mixture_run):
    expected = {
        "OnScreenKeyboard_tap": 0.62,
        "PreviousDestinationsButton_tap": 0.28,
        "FavoritesButton_tap": 0.07,
        "TextField_tap": 0.03,
    }
    with criterion("mixture-reproduction"):
        assert mixture_run["report"].error_count == 0
        graph = mixture_run["graph"]
        start_id = "0:NavigateToButton_tap"
        start = graph.node_by_id(start_id)
        step1 = {l.target.split(":", 1)[1]: l.weight for l in graph.links if l.source == start_id}
        assert set(step1) == set(expected)
        for label, p in expected.items():
            relative = step1[label] / start.cardinality
            assert abs(relative - p) <= 0.02, f"{label}: {relative:.4f} vs {p}"
        assert mixture_run["elapsed"] < 60.0, f"pipeline took {mixture_run['elapsed']:.1f}s"


def test_05_p_min_filtering():
    # 1,000 sequences: a flow of 4 (0.004) must drop, a flow of 6 (0.006) must stay
    from flowscope.extraction import assign_flow_ids, collapse_repeats
    from flowscope.model import Sequence

    collapsed = {}
    ordered = []
    n = 0
    for labels, copies in ((["A", "B"], 990), (["A", "C"], 6), (["A", "D"], 4)):
        for _ in range(copies):
            n += 1
            sid = f"p{n:04d}"
            events = tuple(make_event("s1", i * 1_000, el) for i, el in enumerate(labels))
            c = collapse_repeats(Sequence(sid, "t", "", "s1", events), set())
            collapsed[sid] = c
            ordered.append(c)
    table = assign_flow_ids("t", ordered)

    with criterion("p-min-filtering"):
        graph = build_sankey(table, collapsed, p_min=0.005)
        labels = {n.label for n in graph.nodes}
        assert "C_tap" in labels, "flow at 0.006 must be present"
        assert "D_tap" not in labels, "flow at 0.004 must be absent"


def test_06_normalization_ranks(mixture_run):
    with criterion("normalization"):
        graph = mixture_run["graph"]
        assert graph.links
        assert all(0.0 <= l.normalized_time <= 1.0 for l in graph.links)
        by_norm = max(graph.links, key=lambda l: l.normalized_time)
        by_mean = max(graph.links, key=lambda l: l.mean_transition_ms)
        assert by_norm is by_mean
        source_label = by_norm.source.split(":", 1)[1]
        assert source_label == "OnScreenKeyboard_tap", (
            "slowest link must leave the collapsed keyboard node"
        )


def test_07_flow_statistics(mixture_run):
    rng = random.Random(271_828)
    with criterion("flow-statistics"):
        for _ in range(1_000):
            samples = [rng.uniform(0, 1e6) for _ in range(rng.randint(1, 80))]
            stats = summary_stats(samples)
            assert stats.q1 == pytest.approx(quantile_type7(samples, 0.25), rel=1e-9)
            assert stats.median == pytest.approx(quantile_type7(samples, 0.5), rel=1e-9)
            assert stats.q3 == pytest.approx(quantile_type7(samples, 0.75), rel=1e-9)
            assert stats.min == min(samples)
            assert stats.max == max(samples)

        analysis = mixture_run["analysis"]
        dists = flow_distributions(
            analysis.flow_table, analysis.sequences, "time_on_task", p_min=0.005
        )
        by_id = {d.flow_id: d for d in dists}
        ratio = by_id["flow-1"].stats.mean / by_id["flow-3"].stats.mean
        assert 1.8 <= ratio <= 2.2, f"keyboard/favorites mean ratio {ratio:.3f}"


def test_08_glance_classification():
    with criterion("glance-classification"):
        assert [classify_glance(d) for d in (1_999, 2_000, 2_001)] == [
            "short",
            "short",
            "long",
        ]


def test_09_timeline_fidelity():
    with criterion("timeline-fidelity"):
        store, sequence = keyboard_heavy_fixture()
        metrics = timeline_metrics(build_timeline(sequence, store))
        assert metrics.interaction_count == 14
        assert metrics.glance_count == 8
        assert metrics.long_glance_count == 5

        store_c, sequence_c = stop_and_type_fixture()
        timeline = build_timeline(sequence_c, store_c)
        ts_list = [ts for ts, _ in timeline.speed]
        values = [v for _, v in timeline.speed]
        for ev_ts, _ in timeline.interactions:
            assert nearest_sample(ts_list, values, ev_ts) == 0.0


def _run_pipeline(root, sessions: int = 80, seed: int = 31) -> dict[str, bytes]:
    root.mkdir(parents=True, exist_ok=True)
    logs = root / "logs"
    task_path = root / "task.json"
    task_path.write_text(json.dumps(default_task_document()), encoding="utf-8")
    store_path = root / "store.bin"
    analysis_path = root / "analysis.json"
    assert main(["synth", "--out", str(logs), "--sessions", str(sessions), "--seed", str(seed)]) == 0
    assert main([
        "ingest",
        "--events", str(logs / "events.jsonl"),
        "--glances", str(logs / "glances.jsonl"),
        "--driving", str(logs / "driving.jsonl"),
        "--out", str(store_path),
    ]) == 0
    assert main([
        "extract", "--store", str(store_path), "--task", str(task_path),
        "--out", str(analysis_path),
    ]) == 0
    outputs: dict[str, bytes] = {}
    for name in ("events.jsonl", "glances.jsonl", "driving.jsonl"):
        outputs[name] = (logs / name).read_bytes()
    for view, extra in (("task", []), ("flow", ["--metric", "time_on_task"])):
        out = root / f"view_{view}.json"
        assert main([
            "export", "--analysis", str(analysis_path), "--store", str(store_path),
            "--view", view, "--out", str(out), *extra,
        ]) == 0
        outputs[f"view_{view}.json"] = out.read_bytes()
    first_seq = json.loads(analysis_path.read_text())["sequences"][0]["sequence_id"]
    out = root / "view_sequence.json"
    assert main([
        "export", "--analysis", str(analysis_path), "--store", str(store_path),
        "--view", "sequence", "--id", first_seq, "--out", str(out),
    ]) == 0
    outputs["view_sequence.json"] = out.read_bytes()
    outputs["_paths"] = (store_path, task_path, analysis_path)  # type: ignore[assignment]
    return outputs


def test_10_determinism(tmp_path):
    with criterion("determinism"):
        run_a = _run_pipeline(tmp_path / "a")
        run_b = _run_pipeline(tmp_path / "b")
        for key in ("events.jsonl", "glances.jsonl", "driving.jsonl",
                    "view_task.json", "view_flow.json", "view_sequence.json"):
            assert run_a[key] == run_b[key], f"{key} differs between identical runs"


def test_11_service_cli_parity(tmp_path):
    with criterion("service-cli-parity"):
        outputs = _run_pipeline(tmp_path)
        store_path, task_path, analysis_path = outputs["_paths"]
        store = load_store(store_path)
        task = TaskDefinition.from_dict(json.loads(task_path.read_text()))
        client = TestClient(create_app(store, [task]))

        resp = client.get("/tasks/start-navigation/sankey")
        assert resp.content == outputs["view_task.json"]
        resp = client.get("/tasks/start-navigation/flows?metric=time_on_task")
        assert resp.content == outputs["view_flow.json"]
        first_seq = json.loads(analysis_path.read_text())["sequences"][0]["sequence_id"]
        resp = client.get(f"/sequences/{first_seq}/timeline")
        assert resp.content == outputs["view_sequence.json"]
