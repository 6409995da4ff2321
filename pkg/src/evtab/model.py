"""Typed table data model: columns, cells, per-item event maps, and boxplot summaries.

Tables are immutable after construction; every structural invariant is checked
in :func:`build_table`. All timestamps are integer epoch milliseconds, all
durations are milliseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence, Union

# Reserved keys of the boxplot statistics namespace. Event types must never
# collide with these, nor with the current-time reference token.
STAT_KEYS: tuple[str, ...] = ("min", "q1", "median", "q3", "max")
CURRENT_TIME = "CURRENT_TIME"
RESERVED_KEYS: frozenset[str] = frozenset(STAT_KEYS) | {CURRENT_TIME}

MS_PER_DAY = 86_400_000
MS_PER_HOUR = 3_600_000


class TableError(ValueError):
    """Structural violation in table construction or cell validation."""


class ColumnType(Enum):
    """Kind of an attribute column."""

    BOOLEAN = "boolean"
    NUMBER = "number"
    CATEGORICAL = "categorical"
    DATE = "date"


# A cell is one of: bool, finite float (number), str token (categorical),
# int epoch-ms (date), or None for missing.
CellValue = Union[bool, float, str, int, None]


@dataclass(frozen=True)
class ColumnDescriptor:
    """Declares one attribute column: unique name, kind, optional display unit."""

    name: str
    kind: ColumnType
    unit: str | None = None


@dataclass(frozen=True)
class BoxplotSummary:
    """Five-number summary of a duration distribution, in milliseconds.

    ``durations`` keeps the raw values the summary was computed from so the
    summary stays recomputable and the underlying items auditable.
    """

    min: float
    q1: float
    median: float
    q3: float
    max: float
    durations: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        stats = (self.min, self.q1, self.median, self.q3, self.max)
        for v in stats:
            if not math.isfinite(v):
                raise TableError(f"boxplot statistic not finite: {v!r}")
        if not (self.min <= self.q1 <= self.median <= self.q3 <= self.max):
            raise TableError(f"boxplot statistics out of order: {stats}")

    def stat(self, key: str) -> float:
        """Return the statistic stored under a reserved key name."""
        if key not in STAT_KEYS:
            raise TableError(f"unknown boxplot statistic {key!r}")
        return getattr(self, key)


@dataclass(frozen=True)
class ItemRow:
    """One item: unique id, attribute cells, event map, and similar-item data.

    ``events`` maps event-type key to epoch-ms timestamp; each event type
    occurs at most once. ``flags`` carries per-row data-quality warnings
    (e.g. negative similar durations, id/duration count mismatch).
    """

    id: str
    cells: Mapping[str, CellValue]
    events: Mapping[str, int]
    similar_ids: tuple[str, ...] = ()
    similar_box: BoxplotSummary | None = None
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class Table:
    """Immutable validated table: column descriptors, declared event types, rows."""

    descriptors: tuple[ColumnDescriptor, ...]
    event_types: tuple[str, ...]
    rows: tuple[ItemRow, ...]
    _by_name: Mapping[str, ColumnDescriptor] = field(repr=False, compare=False, default_factory=dict)
    _by_id: Mapping[str, ItemRow] = field(repr=False, compare=False, default_factory=dict)

    def descriptor(self, name: str) -> ColumnDescriptor:
        try:
            return self._by_name[name]
        except KeyError:
            raise TableError(f"unknown column {name!r}") from None

    def row(self, item_id: str) -> ItemRow:
        try:
            return self._by_id[item_id]
        except KeyError:
            raise TableError(f"unknown row id {item_id!r}") from None

    def has_row(self, item_id: str) -> bool:
        return item_id in self._by_id

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.descriptors)

    def __len__(self) -> int:
        return len(self.rows)


def check_cell(value: CellValue, kind: ColumnType) -> CellValue:
    """Validate and normalize one cell value against its column kind.

    Numbers are normalized to float, dates to int; missing (None) is valid in
    every kind. Raises TableError on kind mismatch or non-finite numbers.
    """
    if value is None:
        return None
    if kind is ColumnType.BOOLEAN:
        if isinstance(value, bool):
            return value
        raise TableError(f"expected boolean, got {value!r}")
    if kind is ColumnType.NUMBER:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TableError(f"expected number, got {value!r}")
        out = float(value)
        if not math.isfinite(out):
            raise TableError(f"number not finite: {value!r}")
        return out
    if kind is ColumnType.CATEGORICAL:
        if isinstance(value, str):
            return value
        raise TableError(f"expected category token, got {value!r}")
    if kind is ColumnType.DATE:
        if isinstance(value, bool) or not isinstance(value, int):
            raise TableError(f"expected timestamp-ms integer, got {value!r}")
        return value
    raise TableError(f"unknown column kind {kind!r}")


def build_table(
    descriptors: Sequence[ColumnDescriptor],
    event_types: Sequence[str],
    rows: Sequence[ItemRow],
) -> Table:
    """Validate components and assemble an immutable Table.

    Checks: unique column names, unique row ids, event types disjoint from the
    reserved statistic/current-time keys, every row cell naming a declared
    column with a kind-correct value, and every row event key declared.
    """
    by_name: dict[str, ColumnDescriptor] = {}
    for d in descriptors:
        if d.name in by_name:
            raise TableError(f"duplicate column name {d.name!r}")
        by_name[d.name] = d

    declared_events: list[str] = []
    for key in event_types:
        if key in RESERVED_KEYS:
            raise TableError(f"reserved statistic key used as event type: {key!r}")
        if key in declared_events:
            raise TableError(f"duplicate event type {key!r}")
        declared_events.append(key)
    event_set = frozenset(declared_events)

    by_id: dict[str, ItemRow] = {}
    out_rows: list[ItemRow] = []
    for row in rows:
        if row.id in by_id:
            raise TableError(f"duplicate row id {row.id}")
        cells: dict[str, CellValue] = {}
        for name, value in row.cells.items():
            if name not in by_name:
                raise TableError(f"row {row.id}: cell names undeclared column {name!r}")
            try:
                cells[name] = check_cell(value, by_name[name].kind)
            except TableError as exc:
                raise TableError(f"row {row.id}, column {name!r}: {exc}") from None
        for key, ts in row.events.items():
            if key in RESERVED_KEYS:
                raise TableError(f"row {row.id}: reserved statistic key used as event type: {key!r}")
            if key not in event_set:
                raise TableError(f"row {row.id}: undeclared event key {key!r}")
            if isinstance(ts, bool) or not isinstance(ts, int):
                raise TableError(f"row {row.id}, event {key!r}: timestamp must be integer ms, got {ts!r}")
        normalized = ItemRow(
            id=row.id,
            cells=cells,
            events=dict(row.events),
            similar_ids=tuple(row.similar_ids),
            similar_box=row.similar_box,
            flags=tuple(row.flags),
        )
        by_id[row.id] = normalized
        out_rows.append(normalized)

    return Table(
        descriptors=tuple(descriptors),
        event_types=tuple(declared_events),
        rows=tuple(out_rows),
        _by_name=by_name,
        _by_id=by_id,
    )


def compare_cells(a: CellValue, b: CellValue, kind: ColumnType) -> int:
    """Total order over cells of one kind: -1 less, 0 equal, 1 greater.

    Booleans order false < true, numbers and dates numerically, categories
    lexicographically. Missing orders after every non-missing value; two
    missing values are equal. Sort direction is the caller's concern and
    applies to non-missing values only.
    """
    if a is None and b is None:
        return 0
    if a is None:
        return 1
    if b is None:
        return -1
    av = check_cell(a, kind)
    bv = check_cell(b, kind)
    if av < bv:  # type: ignore[operator]
        return -1
    if av > bv:  # type: ignore[operator]
        return 1
    return 0
