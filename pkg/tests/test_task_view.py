from __future__ import annotations

import random

import pytest

from flowscope.extraction import assign_flow_ids, collapse_repeats
from flowscope.model import NotFoundError, Sequence
from flowscope.task_view import (
    build_sankey,
    link_summary,
    node_id_for,
    node_summary,
    normalize_link_times,
    sankey_payload,
    transition_duration,
)
from oracles import brute_force_link_counts, brute_force_node_counts

from conftest import make_event


def _collapsed_set(paths: list[tuple[list[str], int]], gap_ms: int = 1_000):
    """Build (flow_table, collapsed dict) from (label path, copies) specs."""
    collapsed = {}
    order = []
    n = 0
    for labels, copies in paths:
        for _ in range(copies):
            n += 1
            sid = f"seq-{n:04d}"
            events = tuple(
                make_event("s1", i * gap_ms, label) for i, label in enumerate(labels)
            )
            c = collapse_repeats(Sequence(sid, "t", "", "s1", events), set())
            collapsed[sid] = c
            order.append(c)
    return assign_flow_ids("t", order), collapsed


# --- build_sankey ---------------------------------------------------------------


def test_single_flow_builds_path_graph():
    table, collapsed = _collapsed_set([(["A", "B", "C"], 10)])
    graph = build_sankey(table, collapsed, p_min=0.0)
    assert [n.cardinality for n in graph.nodes] == [10, 10, 10]
    assert [l.weight for l in graph.links] == [10, 10]
    assert graph.sequences_displayed == 10
    assert not graph.below_threshold


def test_step1_cardinalities_follow_mixture(fleet_analysis, nav_task):
    graph = build_sankey(
        fleet_analysis.flow_table, fleet_analysis.collapsed, nav_task.p_min
    )
    start = graph.node_by_id(node_id_for(0, "NavigateToButton_tap"))
    shares = {
        n.label: n.cardinality / start.cardinality
        for n in graph.nodes
        if n.step == 1
    }
    assert abs(shares["OnScreenKeyboard_tap"] - 0.62) < 0.03
    assert abs(shares["PreviousDestinationsButton_tap"] - 0.28) < 0.03
    assert abs(shares["FavoritesButton_tap"] - 0.07) < 0.02


def test_p_min_filters_rare_flows_strictly():
    table, collapsed = _collapsed_set(
        [(["A", "B"], 990), (["A", "C"], 6), (["A", "D"], 4)]
    )
    graph = build_sankey(table, collapsed, p_min=0.005)
    labels = {n.label for n in graph.nodes}
    assert "C_tap" in labels  # 6/1000 = 0.006 > 0.005 kept
    assert "D_tap" not in labels  # 4/1000 = 0.004 <= 0.005 excluded
    assert graph.sequences_displayed == 996


def test_all_flows_filtered_flags_below_threshold():
    table, collapsed = _collapsed_set([(["A", "B"], 3)])
    graph = build_sankey(table, collapsed, p_min=1.0)
    assert graph.nodes == ()
    assert graph.links == ()
    assert graph.below_threshold


def test_conservation_against_brute_force_on_random_tables():
    rng = random.Random(42)
    for _ in range(30):
        paths = []
        for _ in range(rng.randint(1, 6)):
            length = rng.randint(2, 6)
            labels = [rng.choice("ABCDE") for _ in range(length - 1)] + ["Z"]
            paths.append((labels, rng.randint(1, 20)))
        table, collapsed = _collapsed_set(paths)
        graph = build_sankey(table, collapsed, p_min=0.0)

        label_lists = [list(c.labels) for c in collapsed.values()]
        node_counts = brute_force_node_counts(label_lists)
        link_counts = brute_force_link_counts(label_lists)
        assert {
            (n.step, n.label): n.cardinality for n in graph.nodes
        } == dict(node_counts)
        assert {
            (int(l.source.split(":", 1)[0]), l.source.split(":", 1)[1], l.target.split(":", 1)[1]): l.weight
            for l in graph.links
        } == dict(link_counts)

        # flow conservation at nodes with both directions
        for node in graph.nodes:
            inc = sum(l.weight for l in graph.links if l.target == node.node_id)
            out = sum(l.weight for l in graph.links if l.source == node.node_id)
            if inc and out:
                assert inc == out == node.cardinality


def test_graph_is_order_independent(fleet_analysis, nav_task):
    table = fleet_analysis.flow_table
    rng = random.Random(5)
    shuffled_flows = list(table.flows)
    rng.shuffle(shuffled_flows)
    shuffled = type(table)(
        task_id=table.task_id,
        flows=tuple(shuffled_flows),
        total_sequences=table.total_sequences,
    )
    a = sankey_payload(build_sankey(table, fleet_analysis.collapsed, nav_task.p_min))
    b = sankey_payload(build_sankey(shuffled, fleet_analysis.collapsed, nav_task.p_min))
    assert a == b


def test_p_min_monotonicity(fleet_analysis):
    sizes = []
    for p_min in (0.0, 0.005, 0.05, 0.3, 0.7):
        graph = build_sankey(fleet_analysis.flow_table, fleet_analysis.collapsed, p_min)
        sizes.append((len(graph.nodes), len(graph.links)))
    assert sizes == sorted(sizes, reverse=True)


def test_same_label_shares_color_key_across_steps(fleet_analysis, nav_task):
    graph = build_sankey(fleet_analysis.flow_table, fleet_analysis.collapsed, nav_task.p_min)
    by_label = {}
    for node in graph.nodes:
        by_label.setdefault(node.label, set()).add(node.color_key)
    assert all(len(keys) == 1 for keys in by_label.values())


# --- transition_duration ----------------------------------------------------------


def test_transition_duration_between_singletons():
    events = (make_event("s1", 1_000, "Fav"), make_event("s1", 3_300, "List"))
    c = collapse_repeats(Sequence("x", "t", "", "s1", events), set())
    assert transition_duration(c, 0) == 2_300


def test_transition_duration_attributes_typing_span_to_outgoing_link():
    events = tuple(
        [make_event("s1", ts, "K") for ts in range(2_000, 9_001, 1_000)]
        + [make_event("s1", 10_000, "List")]
    )
    c = collapse_repeats(Sequence("x", "t", "", "s1", events), {"K"})
    assert [g.label for g in c.groups] == ["K_tap", "List_tap"]
    assert transition_duration(c, 0) == 8_000


def test_transition_duration_zero_gap():
    events = (make_event("s1", 500, "A"), make_event("s1", 500, "B"))
    c = collapse_repeats(Sequence("x", "t", "", "s1", events), set())
    assert transition_duration(c, 0) == 0


def test_transition_duration_out_of_range():
    events = (make_event("s1", 0, "A"),)
    c = collapse_repeats(Sequence("x", "t", "", "s1", events), set())
    with pytest.raises(ValueError):
        transition_duration(c, 0)


# --- normalize_link_times ----------------------------------------------------------


def _graph_with_means(means_ms: list[float]):
    paths = [([f"A{i}", f"B{i}"], 1) for i in range(len(means_ms))]
    table, collapsed = _collapsed_set(paths)
    # rebuild collapsed with controlled gaps
    rebuilt = {}
    for (sid, c), mean in zip(sorted(collapsed.items()), means_ms):
        events = (
            make_event("s1", 0, c.groups[0].label.rsplit("_", 1)[0]),
            make_event("s1", int(mean), c.groups[1].label.rsplit("_", 1)[0]),
        )
        rebuilt[sid] = collapse_repeats(Sequence(sid, "t", "", "s1", events), set())
    return build_sankey(table, rebuilt, p_min=0.0)


def test_normalization_maps_min_max_to_unit_interval():
    graph = _graph_with_means([2_000, 3_000, 4_000])
    normalized = sorted(l.normalized_time for l in graph.links)
    assert normalized == [0.0, 0.5, 1.0]


def test_normalization_single_link_midpoint():
    graph = _graph_with_means([2_000])
    assert [l.normalized_time for l in graph.links] == [0.5]


def test_normalization_all_equal_midpoint():
    graph = _graph_with_means([2_000, 2_000, 2_000])
    assert [l.normalized_time for l in graph.links] == [0.5, 0.5, 0.5]


def test_normalization_preserves_argmax(fleet_analysis, nav_task):
    graph = build_sankey(fleet_analysis.flow_table, fleet_analysis.collapsed, nav_task.p_min)
    by_norm = max(graph.links, key=lambda l: l.normalized_time)
    by_mean = max(graph.links, key=lambda l: l.mean_transition_ms)
    assert by_norm == by_mean
    assert all(0.0 <= l.normalized_time <= 1.0 for l in graph.links)
    idempotent = normalize_link_times(graph)
    assert idempotent == graph


# --- summaries ----------------------------------------------------------------------


def test_node_summary_source_and_internal():
    table, collapsed = _collapsed_set([(["A", "B", "C"], 7)])
    graph = build_sankey(table, collapsed, p_min=0.0)
    source = node_summary(graph, node_id_for(0, "A_tap"))
    assert source.incoming == ()
    assert len(source.outgoing) == 1
    internal = node_summary(graph, node_id_for(1, "B_tap"))
    assert len(internal.incoming) == 1
    assert len(internal.outgoing) == 1
    assert internal.node.cardinality == 7
    with pytest.raises(NotFoundError):
        node_summary(graph, "9:Nope_tap")


def test_node_summary_counts_match_recount(fleet_analysis, nav_task):
    graph = build_sankey(fleet_analysis.flow_table, fleet_analysis.collapsed, nav_task.p_min)
    for node in graph.nodes:
        summary = node_summary(graph, node.node_id)
        assert len(summary.incoming) == sum(1 for l in graph.links if l.target == node.node_id)
        assert len(summary.outgoing) == sum(1 for l in graph.links if l.source == node.node_id)


def test_link_summary_relative_share():
    table, collapsed = _collapsed_set([(["A", "B"], 62), (["A", "C"], 38)])
    graph = build_sankey(table, collapsed, p_min=0.0)
    link = next(l for l in graph.links if l.target == node_id_for(1, "B_tap"))
    summary = link_summary(graph, link.link_id)
    assert summary.relative == pytest.approx(0.62)
    with pytest.raises(NotFoundError):
        link_summary(graph, "0:A_tap->9:Nope_tap")


def test_link_summary_single_path_all_relative_one():
    table, collapsed = _collapsed_set([(["A", "B", "C", "D"], 5)])
    graph = build_sankey(table, collapsed, p_min=0.0)
    for link in graph.links:
        assert link_summary(graph, link.link_id).relative == 1.0


def test_link_relative_matches_brute_force(fleet_analysis, nav_task):
    graph = build_sankey(fleet_analysis.flow_table, fleet_analysis.collapsed, nav_task.p_min)
    label_lists = []
    displayed = {
        sid
        for f in fleet_analysis.flow_table.flows
        if f.relative_frequency > nav_task.p_min
        for sid in f.sequence_ids
    }
    for sid in displayed:
        label_lists.append(list(fleet_analysis.collapsed[sid].labels))
    node_counts = brute_force_node_counts(label_lists)
    link_counts = brute_force_link_counts(label_lists)
    for link in graph.links:
        step, src = link.source.split(":", 1)
        _, tgt = link.target.split(":", 1)
        expected = link_counts[(int(step), src, tgt)] / node_counts[(int(step), src)]
        assert link_summary(graph, link.link_id).relative == pytest.approx(expected)


# --- payload -------------------------------------------------------------------------


def test_payload_contract_shape():
    table, collapsed = _collapsed_set([(["A", "B"], 4)])
    payload = sankey_payload(build_sankey(table, collapsed, p_min=0.0))
    assert set(payload) == {"nodes", "links", "totals"}
    assert set(payload["nodes"][0]) == {"id", "label", "step", "cardinality", "color_key"}
    assert set(payload["links"][0]) == {
        "source",
        "target",
        "weight",
        "relative",
        "mean_ms",
        "normalized",
    }
    totals = payload["totals"]
    assert totals["sequences_total"] == 4
    assert totals["below_threshold"] is False
