"""Task level view: a step-aligned flow graph with time-colored links.

Sequences of every flow above the frequency floor are superimposed step by
step. Node height data is the event cardinality per step, link width data is
the transition count, and link color data is the mean transition time
min-max-normalized over the whole graph (0 = fastest, 1 = slowest).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from typing import Mapping

from .extraction import CollapsedSequence, FlowTable
from .model import NotFoundError


@dataclass(frozen=True, slots=True)
class SankeyNode:
    node_id: str
    label: str
    step: int
    cardinality: int
    color_key: str


@dataclass(frozen=True, slots=True)
class SankeyLink:
    source: str
    target: str
    weight: int
    mean_transition_ms: float
    normalized_time: float

    @property
    def link_id(self) -> str:
        return f"{self.source}->{self.target}"


@dataclass(frozen=True)
class SankeyGraph:
    task_id: str
    nodes: tuple[SankeyNode, ...]
    links: tuple[SankeyLink, ...]
    p_min: float
    sequences_total: int
    sequences_displayed: int
    flows_total: int
    flows_displayed: int

    @property
    def below_threshold(self) -> bool:
        return self.flows_total > 0 and self.flows_displayed == 0

    def node_by_id(self, node_id: str) -> SankeyNode:
        for node in self.nodes:
            if node.node_id == node_id:
                return node
        raise NotFoundError(f"unknown node {node_id!r}")

    def link_by_id(self, link_id: str) -> SankeyLink:
        for link in self.links:
            if link.link_id == link_id:
                return link
        raise NotFoundError(f"unknown link {link_id!r}")


def node_id_for(step: int, label: str) -> str:
    return f"{step}:{label}"


def color_key_for(label: str) -> str:
    """Stable per-label color key; equal labels share it across steps."""
    return hashlib.sha256(label.encode("utf-8")).hexdigest()[:8]


def transition_duration(collapsed: CollapsedSequence, step: int) -> int:
    """Time from the start of group `step` to the start of group `step + 1`.

    Measuring from the group's first event attributes the whole intra-group
    span (all the typing of a collapsed keyboard run) to its outgoing link.
    """
    if step + 1 >= len(collapsed.groups):
        raise ValueError(f"no transition at step {step}")
    return collapsed.groups[step + 1].first_ts - collapsed.groups[step].first_ts


def build_sankey(
    flow_table: FlowTable,
    collapsed: Mapping[str, CollapsedSequence],
    p_min: float = 0.0,
) -> SankeyGraph:
    """Superimpose all flows with relative frequency strictly above p_min."""
    if not 0.0 <= p_min <= 1.0:
        raise ValueError("p_min must lie in [0, 1]")
    surviving = [f for f in flow_table.flows if f.relative_frequency > p_min]
    cardinality: dict[tuple[int, str], int] = {}
    link_weight: dict[tuple[int, str, str], int] = {}
    link_time_sum: dict[tuple[int, str, str], int] = {}
    displayed = 0
    for flow in surviving:
        for sid in flow.sequence_ids:
            displayed += 1
            groups = collapsed[sid].groups
            for step, group in enumerate(groups):
                key = (step, group.label)
                cardinality[key] = cardinality.get(key, 0) + 1
            for step in range(len(groups) - 1):
                key = (step, groups[step].label, groups[step + 1].label)
                link_weight[key] = link_weight.get(key, 0) + 1
                link_time_sum[key] = link_time_sum.get(key, 0) + transition_duration(
                    collapsed[sid], step
                )

    nodes = tuple(
        SankeyNode(
            node_id=node_id_for(step, label),
            label=label,
            step=step,
            cardinality=count,
            color_key=color_key_for(label),
        )
        for (step, label), count in sorted(
            cardinality.items(), key=lambda kv: (kv[0][0], -kv[1], kv[0][1])
        )
    )
    links = tuple(
        SankeyLink(
            source=node_id_for(step, src),
            target=node_id_for(step + 1, tgt),
            weight=weight,
            mean_transition_ms=link_time_sum[(step, src, tgt)] / weight,
            normalized_time=0.0,
        )
        for (step, src, tgt), weight in sorted(
            link_weight.items(), key=lambda kv: (kv[0][0], -kv[1], kv[0][1], kv[0][2])
        )
    )
    graph = SankeyGraph(
        task_id=flow_table.task_id,
        nodes=nodes,
        links=links,
        p_min=p_min,
        sequences_total=flow_table.total_sequences,
        sequences_displayed=displayed,
        flows_total=len(flow_table.flows),
        flows_displayed=len(surviving),
    )
    return normalize_link_times(graph)


def normalize_link_times(graph: SankeyGraph) -> SankeyGraph:
    """Min-max-normalize mean transition times over all links of the graph.

    Higher values mean slower transitions; when every link has the same mean
    the scale is degenerate and all links sit at the 0.5 midpoint.
    """
    if not graph.links:
        return graph
    means = [link.mean_transition_ms for link in graph.links]
    lo, hi = min(means), max(means)
    if hi == lo:
        links = tuple(replace(link, normalized_time=0.5) for link in graph.links)
    else:
        links = tuple(
            replace(link, normalized_time=(link.mean_transition_ms - lo) / (hi - lo))
            for link in graph.links
        )
    return replace(graph, links=links)


@dataclass(frozen=True)
class NodeSummary:
    node: SankeyNode
    incoming: tuple[SankeyLink, ...]
    outgoing: tuple[SankeyLink, ...]


@dataclass(frozen=True)
class LinkSummary:
    link: SankeyLink
    relative: float
    mean_transition_ms: float


def node_summary(graph: SankeyGraph, node_id: str) -> NodeSummary:
    """Cardinality plus incoming and outgoing links of one node."""
    node = graph.node_by_id(node_id)
    incoming = tuple(l for l in graph.links if l.target == node_id)
    outgoing = tuple(l for l in graph.links if l.source == node_id)
    return NodeSummary(node=node, incoming=incoming, outgoing=outgoing)


def link_summary(graph: SankeyGraph, link_id: str) -> LinkSummary:
    """Absolute weight, share of the source node, and mean transition time."""
    link = graph.link_by_id(link_id)
    source = graph.node_by_id(link.source)
    return LinkSummary(
        link=link,
        relative=link.weight / source.cardinality,
        mean_transition_ms=link.mean_transition_ms,
    )


def sankey_payload(graph: SankeyGraph) -> dict:
    """JSON contract consumed by the explorer UI and `export --view task`."""
    card_by_id = {node.node_id: node.cardinality for node in graph.nodes}
    return {
        "nodes": [
            {
                "id": n.node_id,
                "label": n.label,
                "step": n.step,
                "cardinality": n.cardinality,
                "color_key": n.color_key,
            }
            for n in graph.nodes
        ],
        "links": [
            {
                "source": l.source,
                "target": l.target,
                "weight": l.weight,
                "relative": round(l.weight / card_by_id[l.source], 6),
                "mean_ms": round(l.mean_transition_ms, 3),
                "normalized": round(l.normalized_time, 6),
            }
            for l in graph.links
        ],
        "totals": {
            "task_id": graph.task_id,
            "sequences_total": graph.sequences_total,
            "sequences_displayed": graph.sequences_displayed,
            "flows_total": graph.flows_total,
            "flows_displayed": graph.flows_displayed,
            "p_min": graph.p_min,
            "below_threshold": graph.below_threshold,
        },
    }
