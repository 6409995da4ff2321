"""Filtering, multi-key sorting, grouping with aggregates, and overview layout.

Sorting works over one unified key namespace: attribute columns compare by
cell value, event types and boxplot statistic keys compare by their resolved
axis position under the current view. Missing values always order last, under
both sort directions.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .events import EventBinGrid, ViewState, axis_domain, bin_event_counts, resolve_event_value
from .model import (
    STAT_KEYS,
    BoxplotSummary,
    ColumnType,
    ItemRow,
    Table,
    compare_cells,
)
from .similarity import five_number_summary

# Token accepted by category_in to match missing cells; also the group label
# for rows whose group column is missing.
MISSING_TOKEN = "(missing)"
OUT_OF_RANGE_TOKEN = "(out of range)"

FULL = "full"
COMPRESSED = "compressed"


class QueryError(ValueError):
    """Invalid filter, sort, or grouping request."""


@dataclass(frozen=True)
class CategoryIn:
    """Keep rows whose cell is one of the given tokens (categorical columns).

    Include MISSING_TOKEN among the values to keep rows with a missing cell.
    """

    column: str
    values: frozenset[str]


@dataclass(frozen=True)
class RangeFilter:
    """Keep rows with lo <= cell <= hi (number or date columns, bounds optional)."""

    column: str
    lo: float | None = None
    hi: float | None = None

    def __post_init__(self) -> None:
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            raise QueryError(f"range bounds out of order: {self.lo!r} > {self.hi!r}")


@dataclass(frozen=True)
class BoolEquals:
    """Keep rows whose boolean cell equals the given value."""

    column: str
    value: bool


@dataclass(frozen=True)
class TextContains:
    """Keep rows whose category token contains the given substring."""

    column: str
    text: str


FilterSpec = Union[CategoryIn, RangeFilter, BoolEquals, TextContains]

ASCENDING = "ascending"
DESCENDING = "descending"


@dataclass(frozen=True)
class SortKey:
    """One sort criterion: an attribute column, event type, or statistic key."""

    target: str
    direction: str = ASCENDING

    def __post_init__(self) -> None:
        if self.direction not in (ASCENDING, DESCENDING):
            raise QueryError(f"direction must be {ASCENDING!r} or {DESCENDING!r}")


SortSpec = tuple[SortKey, ...]


@dataclass(frozen=True)
class GroupAggregate:
    """Per-group summaries: event heatmaps, categorical histograms, numeric boxplots."""

    group_key: str
    row_count: int
    event_heatmaps: tuple[EventBinGrid, ...]
    categorical_histograms: Mapping[str, Mapping[str, int]]
    numeric_boxplots: Mapping[str, BoxplotSummary]


@dataclass(frozen=True)
class RowLayout:
    """Display order with a height class per row (overview compression)."""

    entries: tuple[tuple[str, str], ...]


def _check_filter(spec: FilterSpec, table: Table) -> None:
    kind = table.descriptor(spec.column).kind
    if isinstance(spec, CategoryIn) and kind is not ColumnType.CATEGORICAL:
        raise QueryError(f"category_in requires a categorical column, {spec.column!r} is {kind.value}")
    if isinstance(spec, RangeFilter) and kind not in (ColumnType.NUMBER, ColumnType.DATE):
        raise QueryError(f"range requires a number or date column, {spec.column!r} is {kind.value}")
    if isinstance(spec, BoolEquals) and kind is not ColumnType.BOOLEAN:
        raise QueryError(f"equals requires a boolean column, {spec.column!r} is {kind.value}")
    if isinstance(spec, TextContains) and kind is not ColumnType.CATEGORICAL:
        raise QueryError(f"text_contains requires a categorical column, {spec.column!r} is {kind.value}")


def _passes(row: ItemRow, spec: FilterSpec) -> bool:
    value = row.cells.get(spec.column)
    if isinstance(spec, CategoryIn):
        if value is None:
            return MISSING_TOKEN in spec.values
        return value in spec.values
    if value is None:
        # Missing fails every other predicate.
        return False
    if isinstance(spec, RangeFilter):
        if spec.lo is not None and value < spec.lo:
            return False
        if spec.hi is not None and value > spec.hi:
            return False
        return True
    if isinstance(spec, BoolEquals):
        return value is spec.value
    if isinstance(spec, TextContains):
        return spec.text in value
    raise QueryError(f"unknown filter spec {spec!r}")


def apply_filters(table: Table, filters: Sequence[FilterSpec]) -> list[str]:
    """Ids of rows passing every filter, in table order."""
    for spec in filters:
        _check_filter(spec, table)
    return [row.id for row in table.rows if all(_passes(row, spec) for spec in filters)]


def _sort_values(table: Table, ids: Sequence[str], key: SortKey, view: ViewState):
    """Per-id comparable values for one sort key, plus a pairwise comparator."""
    names = set(table.column_names)
    if key.target in names:
        kind = table.descriptor(key.target).kind
        values = {i: table.row(i).cells.get(key.target) for i in ids}

        def base(a, b):
            return compare_cells(values[a], values[b], kind)

        return values, base
    if key.target in STAT_KEYS or key.target in table.event_types:
        known = table.event_types
        values = {i: resolve_event_value(table.row(i), key.target, view, known) for i in ids}

        def base(a, b):
            va, vb = values[a], values[b]
            if va is None and vb is None:
                return 0
            if va is None:
                return 1
            if vb is None:
                return -1
            return -1 if va < vb else (1 if va > vb else 0)

        return values, base
    raise QueryError(f"unknown sort target {key.target!r}")


def sort_rows(table: Table, ids: Sequence[str], sort: SortSpec, view: ViewState) -> list[str]:
    """Stable lexicographic multi-key sort of the given ids.

    Attribute targets compare via compare_cells; event and statistic targets
    compare resolved axis values. Missing/absent values order last under both
    directions; rows equal under all keys keep their input order. Attribute
    columns shadow an event type of the same name.
    """
    ids = list(ids)
    comparators = []
    for key in sort:
        values, base = _sort_values(table, ids, key, view)
        sign = 1 if key.direction == ASCENDING else -1
        comparators.append((values, base, sign))

    def cmp(a: str, b: str) -> int:
        for values, base, sign in comparators:
            va, vb = values[a], values[b]
            if va is None or vb is None:
                c = 0 if va is vb else (1 if va is None else -1)
            else:
                c = base(a, b) * sign
            if c:
                return c
        return 0

    return sorted(ids, key=functools.cmp_to_key(cmp))


def _bin_label(lo: float, hi: float, last: bool) -> str:
    close = "]" if last else ")"
    return f"[{lo:g}, {hi:g}{close}"


def group_rows(
    table: Table,
    ids: Sequence[str],
    group_by: str,
    bin_edges: Sequence[float] | None = None,
) -> list[tuple[str, list[str]]]:
    """Partition ids by the group column's value.

    Categorical and boolean columns group by value; number and date columns
    require explicit ascending bin edges and group by half-open bins (last
    bin closed). Missing cells form their own "(missing)" group; numeric
    values outside the edges fall into an "(out of range)" group so the
    groups always partition the input. Groups are ordered by their key,
    special groups last.
    """
    kind = table.descriptor(group_by).kind
    missing: list[str] = []
    if kind in (ColumnType.CATEGORICAL, ColumnType.BOOLEAN):
        buckets: dict[object, list[str]] = {}
        for i in ids:
            value = table.row(i).cells.get(group_by)
            if value is None:
                missing.append(i)
            else:
                buckets.setdefault(value, []).append(i)
        keys = sorted(buckets, key=functools.cmp_to_key(lambda a, b: compare_cells(a, b, kind)))
        out = [(str(k).lower() if kind is ColumnType.BOOLEAN else str(k), buckets[k]) for k in keys]
    else:
        if bin_edges is None or len(bin_edges) < 2:
            raise QueryError(
                f"grouping by {kind.value} column {group_by!r} requires explicit bin edges"
            )
        edges = [float(e) for e in bin_edges]
        if any(not math.isfinite(e) for e in edges) or any(
            a >= b for a, b in zip(edges, edges[1:])
        ):
            raise QueryError(f"bin edges must be finite and strictly ascending, got {bin_edges!r}")
        nbins = len(edges) - 1
        binned: list[list[str]] = [[] for _ in range(nbins)]
        out_of_range: list[str] = []
        for i in ids:
            value = table.row(i).cells.get(group_by)
            if value is None:
                missing.append(i)
                continue
            if value < edges[0] or value > edges[-1]:
                out_of_range.append(i)
                continue
            if value == edges[-1]:
                binned[nbins - 1].append(i)
                continue
            j = 0
            while value >= edges[j + 1]:
                j += 1
            binned[j].append(i)
        out = [
            (_bin_label(edges[j], edges[j + 1], j == nbins - 1), members)
            for j, members in enumerate(binned)
            if members
        ]
        if out_of_range:
            out.append((OUT_OF_RANGE_TOKEN, out_of_range))
    if missing:
        out.append((MISSING_TOKEN, missing))
    return out


def aggregate_group(
    table: Table,
    group_ids: Sequence[str],
    view: ViewState,
    group_key: str = "",
    domain: tuple[float, float] | None = None,
) -> GroupAggregate:
    """Summarize one group: per-event heatmaps over the shared axis domain,
    token histograms for categorical/boolean columns, five-number boxplots
    for number columns (skipped when a column has no values in the group).

    ``domain`` should be the view-wide axis domain so heatmaps share the
    header axis; it defaults to this group's own domain for standalone use.
    """
    rows = [table.row(i) for i in group_ids]
    if domain is None:
        domain = axis_domain(rows, view)
    heatmaps = tuple(
        bin_event_counts(rows, event, domain, view.heatmap_bins, view)
        for event in table.event_types
        if event in view.visible_events
    )
    histograms: dict[str, dict[str, int]] = {}
    boxplots: dict[str, BoxplotSummary] = {}
    for descriptor in table.descriptors:
        values = [row.cells.get(descriptor.name) for row in rows]
        present = [v for v in values if v is not None]
        if descriptor.kind in (ColumnType.CATEGORICAL, ColumnType.BOOLEAN):
            counts: dict[str, int] = {}
            for v in present:
                token = str(v).lower() if descriptor.kind is ColumnType.BOOLEAN else str(v)
                counts[token] = counts.get(token, 0) + 1
            histograms[descriptor.name] = counts
        elif descriptor.kind is ColumnType.NUMBER and present:
            boxplots[descriptor.name] = five_number_summary(present)
    return GroupAggregate(
        group_key=group_key,
        row_count=len(group_ids),
        event_heatmaps=heatmaps,
        categorical_histograms=histograms,
        numeric_boxplots=boxplots,
    )


def layout_rows(ordered_ids: Sequence[str], view: ViewState) -> RowLayout:
    """Height class per row: outside overview all rows are full; in overview
    every row is compressed except the selected one."""
    if not view.overview:
        return RowLayout(tuple((i, FULL) for i in ordered_ids))
    return RowLayout(
        tuple((i, FULL if i == view.selected else COMPRESSED) for i in ordered_ids)
    )


def similar_view(table: Table, history: Table, selected_id: str) -> tuple[list[ItemRow], list[str]]:
    """History rows referenced by the selected row's similar_ids, in that order.

    Ids absent from the history table are reported as warnings, not errors.
    Raises on an unknown selected id.
    """
    selected = table.row(selected_id)
    rows: list[ItemRow] = []
    warnings: list[str] = []
    for sid in selected.similar_ids:
        if history.has_row(sid):
            rows.append(history.row(sid))
        else:
            warnings.append(f"{sid} not found")
    return rows, warnings
