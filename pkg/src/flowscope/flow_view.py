"""Flow level view: per-flow metric distributions for violin rendering.

Quantiles use linear interpolation between closest ranks (type 7), the most
common default, so numbers compare cleanly against other tooling. Densities
are Gaussian KDEs with Silverman's rule-of-thumb bandwidth, clipped to the
observed sample range because the rendered violins terminate at min/max.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence as SequenceType

import numpy as np

from .extraction import FlowTable, time_on_task
from .model import Sequence, SessionStore

METRICS = ("time_on_task", "interaction_count", "glance_count")

MIN_DENSITY_SAMPLES = 5


@dataclass(frozen=True, slots=True)
class Stats:
    min: float
    max: float
    mean: float
    median: float
    q1: float
    q3: float


def summary_stats(samples: SequenceType[float]) -> Stats:
    """Min/max, arithmetic mean, and type-7 quartiles of a sample set."""
    if len(samples) == 0:
        raise ValueError("summary_stats needs at least one sample")
    arr = np.asarray(samples, dtype=float)
    q1, median, q3 = np.quantile(arr, [0.25, 0.5, 0.75])
    return Stats(
        min=float(arr.min()),
        max=float(arr.max()),
        mean=float(arr.mean()),
        median=float(median),
        q1=float(q1),
        q3=float(q3),
    )


def silverman_bandwidth(samples: SequenceType[float]) -> float:
    """Rule-of-thumb bandwidth 0.9 * min(std, IQR/1.34) * n^(-1/5)."""
    arr = np.asarray(samples, dtype=float)
    std = float(arr.std())
    q75, q25 = np.quantile(arr, [0.75, 0.25])
    iqr = float(q75 - q25)
    scale = min(std, iqr / 1.34) if iqr > 0 else std
    if scale <= 0:
        raise ValueError("degenerate distribution (zero spread)")
    return 0.9 * scale * len(arr) ** (-0.2)


def density_curve(
    samples: SequenceType[float],
    grid_size: int = 64,
    bandwidth: float | None = None,
) -> tuple[tuple[float, float], ...]:
    """Gaussian KDE sampled on an even grid spanning [min, max].

    Requires at least MIN_DENSITY_SAMPLES samples with nonzero spread; the
    support is clipped to the observed range, so the curve integrates to the
    KDE mass inside [min, max] rather than to exactly 1.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.size < MIN_DENSITY_SAMPLES:
        raise ValueError(f"density needs >= {MIN_DENSITY_SAMPLES} samples")
    lo, hi = float(arr.min()), float(arr.max())
    if hi == lo:
        raise ValueError("degenerate distribution (zero spread)")
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    bw = silverman_bandwidth(arr) if bandwidth is None else float(bandwidth)
    if bw <= 0:
        raise ValueError("bandwidth must be > 0")
    grid = np.linspace(lo, hi, grid_size)
    z = (grid[:, None] - arr[None, :]) / bw
    dens = np.exp(-0.5 * z * z).sum(axis=1) / (arr.size * bw * np.sqrt(2 * np.pi))
    return tuple((float(v), float(d)) for v, d in zip(grid, dens))


def shorten_flow_label(labels: Iterable[str]) -> str:
    """Compact display label for a flow: trailing 'Button' dropped per element."""
    parts = []
    for label in labels:
        element, _, gesture = label.rpartition("_")
        parts.append(f"{element.removesuffix('Button')}_{gesture}")
    return " → ".join(parts)


@dataclass(frozen=True)
class FlowDistribution:
    flow_id: str
    label: str
    samples: tuple[float, ...]
    stats: Stats
    density: tuple[tuple[float, float], ...]
    sample_count: int
    low_sample: bool


def _metric_fn(metric: str, store: SessionStore | None, display_region: str):
    if metric == "time_on_task":
        return lambda seq: float(time_on_task(seq))
    if metric == "interaction_count":
        return lambda seq: float(len(seq.events))
    if metric == "glance_count":
        if store is None:
            raise ValueError("metric 'glance_count' needs a session store with glance data")

        def count_glances(seq: Sequence) -> float:
            t0, t1 = seq.events[0].ts, seq.events[-1].ts
            n = 0
            for g in store.glances_for(seq.session_id):
                if g.region == display_region and min(g.end, t1) - max(g.start, t0) > 0:
                    n += 1
            return float(n)

        return count_glances
    raise ValueError(f"unknown metric {metric!r}; supported metrics: {', '.join(METRICS)}")


def flow_distributions(
    flow_table: FlowTable,
    sequences: Iterable[Sequence],
    metric: str = "time_on_task",
    *,
    p_min: float = 0.0,
    store: SessionStore | None = None,
    display_region: str = "CENTER_DISPLAY",
    grid_size: int = 64,
) -> list[FlowDistribution]:
    """One distribution per flow above p_min, in flow-table order.

    Flows with fewer than MIN_DENSITY_SAMPLES samples (or zero spread) carry
    no density curve; the low-sample flag marks the former for the UI.
    """
    fn = _metric_fn(metric, store, display_region)
    by_id = {seq.sequence_id: seq for seq in sequences}
    out: list[FlowDistribution] = []
    for flow in flow_table.flows:
        if flow.relative_frequency <= p_min:
            continue
        samples = tuple(fn(by_id[sid]) for sid in flow.sequence_ids)
        low_sample = len(samples) < MIN_DENSITY_SAMPLES
        density: tuple[tuple[float, float], ...] = ()
        if not low_sample and max(samples) > min(samples):
            density = density_curve(samples, grid_size=grid_size)
        out.append(
            FlowDistribution(
                flow_id=flow.flow_id,
                label=shorten_flow_label(flow.labels),
                samples=samples,
                stats=summary_stats(samples),
                density=density,
                sample_count=len(samples),
                low_sample=low_sample,
            )
        )
    return out


def flow_view_payload(
    distributions: list[FlowDistribution], target_ms: float | None = None
) -> dict:
    """JSON contract consumed by the explorer UI and `export --view flow`."""
    payload: dict = {
        "flows": [
            {
                "flow_id": d.flow_id,
                "label": d.label,
                "count": d.sample_count,
                "stats": {
                    "min": round(d.stats.min, 6),
                    "max": round(d.stats.max, 6),
                    "mean": round(d.stats.mean, 6),
                    "median": round(d.stats.median, 6),
                    "q1": round(d.stats.q1, 6),
                    "q3": round(d.stats.q3, 6),
                },
                "density": [[round(v, 6), round(dens, 9)] for v, dens in d.density],
                "low_sample": d.low_sample,
            }
            for d in distributions
        ]
    }
    if target_ms is not None:
        payload["target_ms"] = target_ms
    return payload
