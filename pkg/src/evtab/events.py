"""Temporal resolution: aligns events and boxplot statistics onto one shared axis.

Every temporal value is resolved relative to a configurable reference event
(or the session's frozen current time) and divided by a configurable time
unit, so events and similar-item statistics land in the same axis-unit
coordinate space. Also computes axis domains and bins events for group
heatmaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from . import kernels
from .model import CURRENT_TIME, MS_PER_DAY, STAT_KEYS, ItemRow

if TYPE_CHECKING:
    from .query import FilterSpec, SortKey

DEFAULT_HEATMAP_BINS = 24


class ViewError(ValueError):
    """Invalid view state or resolution key."""


@dataclass(frozen=True)
class ViewState:
    """Complete interaction state of one table view.

    ``now_ms`` is frozen when the session starts so resolution against the
    current time stays deterministic. ``reference`` and ``boxplot_anchor``
    are either an event-type key or the CURRENT_TIME token.
    """

    now_ms: int
    reference: str = CURRENT_TIME
    time_unit_ms: int = MS_PER_DAY
    visible_events: frozenset[str] = frozenset()
    show_boxplot: bool = True
    boxplot_anchor: str = CURRENT_TIME
    overview: bool = False
    overview_stat: str = "median"
    zoom_domain: tuple[float, float] | None = None
    sort: tuple[SortKey, ...] = ()
    group_by: str | None = None
    group_bins: tuple[float, ...] | None = None
    filters: tuple[FilterSpec, ...] = ()
    selected: str | None = None
    heatmap_bins: int = DEFAULT_HEATMAP_BINS

    def __post_init__(self) -> None:
        if self.time_unit_ms <= 0:
            raise ViewError(f"time_unit_ms must be positive, got {self.time_unit_ms!r}")
        if self.overview_stat not in STAT_KEYS:
            raise ViewError(f"overview_stat must be one of {STAT_KEYS}, got {self.overview_stat!r}")
        if self.zoom_domain is not None:
            lo, hi = self.zoom_domain
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ViewError(f"zoom domain must satisfy lo < hi, got {self.zoom_domain!r}")
        if self.heatmap_bins < 1:
            raise ViewError(f"heatmap_bins must be >= 1, got {self.heatmap_bins!r}")
        if self.group_bins is not None:
            edges = self.group_bins
            if len(edges) < 2 or any(not math.isfinite(e) for e in edges):
                raise ViewError(f"group bins need >= 2 finite edges, got {edges!r}")
            if any(a >= b for a, b in zip(edges, edges[1:])):
                raise ViewError(f"group bins must be strictly ascending, got {edges!r}")


@dataclass(frozen=True)
class EventBinGrid:
    """Uniform bin counts of one event type over an axis domain.

    Bins are half-open [e_i, e_{i+1}) with the last bin closed; ``excluded``
    counts present values that fell outside the domain.
    """

    event_type: str
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    excluded: int


def resolve_event_value(
    row: ItemRow,
    key: str,
    view: ViewState,
    known_events: Iterable[str] | None = None,
) -> float | None:
    """Resolve an event type or boxplot statistic to axis units, or None.

    The reference timestamp is the frozen now (CURRENT_TIME) or this row's
    reference event; a missing reference makes every value absent. Statistic
    keys resolve as (anchor - reference + statistic) / unit, so the boxplot
    re-anchors to any event without touching stored data.
    """
    if known_events is not None and key not in STAT_KEYS and key not in set(known_events):
        raise ViewError(f"unknown key {key!r}")
    if view.reference == CURRENT_TIME:
        ref_ts: int | None = view.now_ms
    else:
        ref_ts = row.events.get(view.reference)
    if ref_ts is None:
        return None
    if key in STAT_KEYS:
        box = row.similar_box
        if box is None:
            return None
        if view.boxplot_anchor == CURRENT_TIME:
            anchor_ts: int | None = view.now_ms
        else:
            anchor_ts = row.events.get(view.boxplot_anchor)
        if anchor_ts is None:
            return None
        # Integer subtraction first keeps alignment exact under timestamp shifts.
        return ((anchor_ts - ref_ts) + box.stat(key)) / view.time_unit_ms
    ts = row.events.get(key)
    if ts is None:
        return None
    return (ts - ref_ts) / view.time_unit_ms


def axis_domain(rows: Sequence[ItemRow], view: ViewState) -> tuple[float, float]:
    """Shared axis domain in axis units for the given rows.

    An explicit zoom domain passes through. Otherwise the domain spans the
    min/max over all resolved visible events (and all five statistics when
    the boxplot is shown), padded by 5% of the span per side; a zero span
    pads by one unit per side, and no values at all yields [-1, 1].
    """
    if view.zoom_domain is not None:
        return view.zoom_domain
    lo = math.inf
    hi = -math.inf
    keys = list(view.visible_events) + (list(STAT_KEYS) if view.show_boxplot else [])
    for row in rows:
        for key in keys:
            value = resolve_event_value(row, key, view)
            if value is None:
                continue
            lo = min(lo, value)
            hi = max(hi, value)
    if lo > hi:
        return (-1.0, 1.0)
    span = hi - lo
    if span == 0:
        return (lo - 1.0, hi + 1.0)
    pad = span * 0.05
    return (lo - pad, hi + pad)


def bin_event_counts(
    rows: Sequence[ItemRow],
    event_type: str,
    domain: tuple[float, float],
    bin_count: int,
    view: ViewState,
) -> EventBinGrid:
    """Bin the rows' resolved values of one event type over the domain.

    Absent values are skipped entirely; present values outside the domain are
    reported via ``excluded`` so sum(counts) + excluded equals the number of
    rows where the event resolves to a value.
    """
    lo, hi = domain
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ViewError(f"domain must satisfy lo < hi, got {domain!r}")
    if bin_count < 1:
        raise ViewError(f"bin_count must be >= 1, got {bin_count!r}")
    edges = np.linspace(lo, hi, bin_count + 1)
    values = []
    for row in rows:
        value = resolve_event_value(row, event_type, view)
        if value is not None:
            values.append(value)
    counts, excluded = kernels.bin_counts(np.asarray(values, dtype=np.float64), edges)
    return EventBinGrid(
        event_type=event_type,
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
        excluded=excluded,
    )


def zoom(view: ViewState, new_domain: tuple[float, float]) -> ViewState:
    """Set the zoom domain; raises on a degenerate domain."""
    lo, hi = new_domain
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ViewError(f"zoom domain must satisfy lo < hi, got {new_domain!r}")
    return replace(view, zoom_domain=(float(lo), float(hi)))


def pan(view: ViewState, delta_units: float) -> ViewState:
    """Shift the zoom domain by delta; a no-op when no zoom is set."""
    if view.zoom_domain is None:
        return view
    lo, hi = view.zoom_domain
    return replace(view, zoom_domain=(lo + delta_units, hi + delta_units))


def reset_zoom(view: ViewState) -> ViewState:
    """Clear the zoom domain so the axis recomputes from the data."""
    return replace(view, zoom_domain=None)
