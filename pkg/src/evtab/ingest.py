"""Dataset loading through the five-field mapping, plus synthetic dataset generators.

Input is RFC-4180-style CSV with a header row. A FieldMapping names the id
column, general data columns (types are inferred), one date column per event
type, and the optional similar-item payload columns (semicolon-separated
durations and ids). All timestamps are parsed to epoch milliseconds, UTC.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .model import (
    MS_PER_DAY,
    MS_PER_HOUR,
    ColumnDescriptor,
    ColumnType,
    ItemRow,
    Table,
    build_table,
)
from .similarity import NEGATIVE_DURATION_FLAG, five_number_summary

SIMILAR_SEPARATOR = ";"
MISMATCH_FLAG = "similar ids/durations count mismatch"

DURATION_UNITS: Mapping[str, int] = {"days": MS_PER_DAY, "hours": MS_PER_HOUR, "ms": 1}

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_DATETIME_RE = re.compile(r"^\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2}$")
_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")

_BOOL_LITERALS = frozenset({"true", "false", "TRUE", "FALSE", "0", "1"})
_BOOL_ALPHA = frozenset({"true", "false", "TRUE", "FALSE"})
_BOOL_TRUE = frozenset({"true", "TRUE", "1"})


class ParseError(ValueError):
    """Malformed input data, mapping, or cell token."""


@dataclass(frozen=True)
class FieldMapping:
    """Maps the five input fields onto source CSV columns.

    ``event_data`` maps each event-type key to its date column. Only ``id``
    is mandatory. ``duration_unit`` records the unit the file's similar
    durations are stored in, so readers need no out-of-band knowledge; when
    unset, loaders fall back to "days" and writers to "ms".
    """

    id: str
    data_columns: tuple[str, ...] = ()
    event_data: Mapping[str, str] = field(default_factory=dict)
    similar_data_duration: str | None = None
    similar_data_ids: str | None = None
    duration_unit: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ParseError("mapping requires an id column")
        if self.duration_unit is not None and self.duration_unit not in DURATION_UNITS:
            raise ParseError(f"unknown duration unit {self.duration_unit!r}")


_MAPPING_KEYS = {
    "id",
    "data_columns",
    "event_data",
    "similar_data_duration",
    "similar_data_ids",
    "duration_unit",
}


def mapping_from_dict(d: Mapping[str, object]) -> FieldMapping:
    unknown = set(d) - _MAPPING_KEYS
    if unknown:
        raise ParseError(f"unknown mapping keys: {sorted(unknown)}")
    if "id" not in d:
        raise ParseError("mapping requires an id column")
    return FieldMapping(
        id=str(d["id"]),
        data_columns=tuple(str(c) for c in d.get("data_columns", ())),
        event_data={str(k): str(v) for k, v in dict(d.get("event_data", {})).items()},
        similar_data_duration=d.get("similar_data_duration"),  # type: ignore[arg-type]
        similar_data_ids=d.get("similar_data_ids"),  # type: ignore[arg-type]
        duration_unit=d.get("duration_unit"),  # type: ignore[arg-type]
    )


def mapping_to_dict(mapping: FieldMapping) -> dict:
    return {
        "id": mapping.id,
        "data_columns": list(mapping.data_columns),
        "event_data": dict(mapping.event_data),
        "similar_data_duration": mapping.similar_data_duration,
        "similar_data_ids": mapping.similar_data_ids,
        "duration_unit": mapping.duration_unit,
    }


def load_mapping(path: str | Path) -> FieldMapping:
    with open(path, encoding="utf-8") as fh:
        return mapping_from_dict(json.load(fh))


def parse_timestamp(text: str) -> int:
    """Parse ``YYYY-MM-DD`` or ``YYYY-MM-DD HH:MM:SS`` (naive, UTC) to epoch ms."""
    if _DATETIME_RE.match(text):
        fmt = "%Y-%m-%d %H:%M:%S"
    elif _DATE_RE.match(text):
        fmt = "%Y-%m-%d"
    else:
        raise ParseError(f"not a timestamp: {text!r}")
    try:
        dt = datetime.strptime(text, fmt).replace(tzinfo=timezone.utc)
    except ValueError:
        raise ParseError(f"not a valid calendar date: {text!r}") from None
    return int((dt - _EPOCH).total_seconds()) * 1000


def format_timestamp(ts_ms: int) -> str:
    """Inverse of parse_timestamp; rejects sub-second timestamps."""
    if ts_ms % 1000 != 0:
        raise ParseError(f"timestamp {ts_ms} not representable at second resolution")
    dt = _EPOCH + (datetime.fromtimestamp(ts_ms / 1000, tz=timezone.utc) - _EPOCH)
    return dt.strftime("%Y-%m-%d %H:%M:%S")


def _parse_number(token: str) -> float:
    if not _NUMBER_RE.match(token):
        raise ParseError(f"not a number: token {token!r}")
    value = float(token)
    if not math.isfinite(value):
        raise ParseError(f"not a finite number: token {token!r}")
    return value


def _is_date(token: str) -> bool:
    try:
        parse_timestamp(token)
        return True
    except ParseError:
        return False


def infer_column_type(values: Iterable[str]) -> ColumnType:
    """Infer a column's type from its raw tokens, ignoring empty (missing) ones.

    Precedence: boolean (all tokens in {true,false,TRUE,FALSE,0,1} with at
    least one alphabetic token), then number, then date, then categorical.
    A column with no non-missing tokens is categorical.
    """
    tokens = [t for t in values if t != ""]
    if not tokens:
        return ColumnType.CATEGORICAL
    if all(t in _BOOL_LITERALS for t in tokens) and any(t in _BOOL_ALPHA for t in tokens):
        return ColumnType.BOOLEAN
    if all(_NUMBER_RE.match(t) for t in tokens):
        return ColumnType.NUMBER
    if all(_is_date(t) for t in tokens):
        return ColumnType.DATE
    return ColumnType.CATEGORICAL


def parse_delimited_numbers(text: str, separator: str = SIMILAR_SEPARATOR) -> list[float]:
    """Parse a separator-joined list of decimals; empty text yields an empty list."""
    if text.strip() == "":
        return []
    out = []
    for raw in text.split(separator):
        token = raw.strip()
        if not token:
            raise ParseError(f"not a number: token {token!r}")
        out.append(_parse_number(token))
    return out


def _parse_cell(token: str, kind: ColumnType):
    if token == "":
        return None
    if kind is ColumnType.BOOLEAN:
        if token in _BOOL_LITERALS:
            return token in _BOOL_TRUE
        raise ParseError(f"not a boolean: token {token!r}")
    if kind is ColumnType.NUMBER:
        return _parse_number(token)
    if kind is ColumnType.DATE:
        return parse_timestamp(token)
    return token


def _read_records(source: str | Path | IO[str]) -> list[list[str]]:
    if hasattr(source, "read"):
        return list(csv.reader(source))
    with open(source, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def load_dataset(
    source: str | Path | IO[str],
    mapping: FieldMapping,
    duration_unit: str | None = None,
) -> Table:
    """Load a CSV through the field mapping into a validated Table.

    Data columns are typed by inference; event columns are parsed as
    timestamps (empty cell = event absent); similar durations are converted
    to ms by ``duration_unit`` (when None: the mapping's recorded unit, else
    "days") and summarized into each row's boxplot. An id/duration count
    mismatch becomes a per-row flag, not an error.
    """
    if duration_unit is None:
        duration_unit = mapping.duration_unit or "days"
    if duration_unit not in DURATION_UNITS:
        raise ParseError(f"unknown duration unit {duration_unit!r}")
    unit_ms = DURATION_UNITS[duration_unit]
    records = _read_records(source)
    if not records:
        raise ParseError("input has no header row")
    header, data = records[0], records[1:]

    positions: dict[str, list[int]] = {}
    for idx, name in enumerate(header):
        positions.setdefault(name, []).append(idx)

    def index_of(name: str) -> int:
        found = positions.get(name)
        if not found:
            raise ParseError(f"column {name!r} not found")
        if len(found) > 1:
            raise ParseError(f"column {name!r} appears {len(found)} times in header")
        return found[0]

    id_idx = index_of(mapping.id)
    data_idx = {name: index_of(name) for name in mapping.data_columns}
    event_idx = {key: index_of(col) for key, col in mapping.event_data.items()}
    dur_idx = index_of(mapping.similar_data_duration) if mapping.similar_data_duration else None
    ids_idx = index_of(mapping.similar_data_ids) if mapping.similar_data_ids else None

    width = len(header)
    rows: list[list[str]] = []
    for rnum, rec in enumerate(data, start=1):
        if len(rec) > width:
            raise ParseError(f"row {rnum}: {len(rec)} fields, header has {width}")
        rows.append(rec + [""] * (width - len(rec)))

    kinds = {
        name: infer_column_type(rec[idx] for rec in rows) for name, idx in data_idx.items()
    }
    descriptors = [ColumnDescriptor(name, kinds[name]) for name in mapping.data_columns]
    event_types = list(mapping.event_data)

    items: list[ItemRow] = []
    for rnum, rec in enumerate(rows, start=1):
        row_id = rec[id_idx]
        if row_id == "":
            raise ParseError(f"row {rnum}: empty id")
        cells = {}
        for name, idx in data_idx.items():
            try:
                cells[name] = _parse_cell(rec[idx], kinds[name])
            except ParseError as exc:
                raise ParseError(f"row {rnum}, column {name!r}: {exc}") from None
        events = {}
        for key, idx in event_idx.items():
            token = rec[idx]
            if token == "":
                continue
            try:
                events[key] = parse_timestamp(token)
            except ParseError as exc:
                raise ParseError(
                    f"row {rnum}, column {mapping.event_data[key]!r}: {exc}"
                ) from None

        flags: list[str] = []
        durations_ms: list[float] = []
        if dur_idx is not None:
            try:
                raw = parse_delimited_numbers(rec[dur_idx])
            except ParseError as exc:
                raise ParseError(
                    f"row {rnum}, column {mapping.similar_data_duration!r}: {exc}"
                ) from None
            durations_ms = [d * unit_ms for d in raw]
        similar_ids: tuple[str, ...] = ()
        if ids_idx is not None:
            similar_ids = tuple(
                t.strip() for t in rec[ids_idx].split(SIMILAR_SEPARATOR) if t.strip()
            )
        if durations_ms and similar_ids and len(durations_ms) != len(similar_ids):
            flags.append(MISMATCH_FLAG)
        if any(d < 0 for d in durations_ms):
            flags.append(NEGATIVE_DURATION_FLAG)
        items.append(
            ItemRow(
                id=row_id,
                cells=cells,
                events=events,
                similar_ids=similar_ids,
                similar_box=five_number_summary(durations_ms) if durations_ms else None,
                flags=tuple(flags),
            )
        )
    return build_table(descriptors, event_types, items)


def default_mapping(table: Table) -> FieldMapping:
    """Mapping that matches write_dataset's default column naming."""
    return FieldMapping(
        id="id",
        data_columns=table.column_names,
        event_data={key: key for key in table.event_types},
        similar_data_duration=(
            "similar_durations" if any(r.similar_box for r in table.rows) else None
        ),
        similar_data_ids="similar_ids" if any(r.similar_ids for r in table.rows) else None,
    )


def _format_cell(value, kind: ColumnType) -> str:
    if value is None:
        return ""
    if kind is ColumnType.BOOLEAN:
        return "true" if value else "false"
    if kind is ColumnType.NUMBER:
        return repr(value)
    if kind is ColumnType.DATE:
        return format_timestamp(value)
    return str(value)


def write_dataset(
    table: Table,
    target: str | Path | IO[str],
    duration_unit: str | None = None,
    mapping: FieldMapping | None = None,
) -> None:
    """Write a Table to CSV so the same mapping loads it back.

    Without an explicit mapping the layout follows default_mapping (columns
    and events written under their own names). Durations are written in
    ``duration_unit`` (when None: the mapping's recorded unit, else "ms",
    which round-trips loaded values exactly).
    """
    if duration_unit is None:
        duration_unit = (mapping.duration_unit if mapping else None) or "ms"
    if duration_unit not in DURATION_UNITS:
        raise ParseError(f"unknown duration unit {duration_unit!r}")
    unit_ms = DURATION_UNITS[duration_unit]
    if mapping is None:
        mapping = default_mapping(table)
    if set(mapping.data_columns) != set(table.column_names):
        raise ParseError("mapping data columns do not match the table's columns")
    missing_events = [key for key in table.event_types if key not in mapping.event_data]
    if missing_events:
        raise ParseError(f"mapping lacks event columns for {missing_events}")
    header = (
        [mapping.id]
        + list(table.column_names)
        + [mapping.event_data[key] for key in table.event_types]
        + ([mapping.similar_data_duration] if mapping.similar_data_duration else [])
        + ([mapping.similar_data_ids] if mapping.similar_data_ids else [])
    )
    kinds = {d.name: d.kind for d in table.descriptors}

    def emit(fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in table.rows:
            rec = [row.id]
            rec += [_format_cell(row.cells.get(name), kinds[name]) for name in table.column_names]
            for key in table.event_types:
                ts = row.events.get(key)
                rec.append("" if ts is None else format_timestamp(ts))
            if mapping.similar_data_duration:
                durations = row.similar_box.durations if row.similar_box else ()
                rec.append(SIMILAR_SEPARATOR.join(repr(d / unit_ms) for d in durations))
            if mapping.similar_data_ids:
                rec.append(SIMILAR_SEPARATOR.join(row.similar_ids))
            writer.writerow(rec)

    if hasattr(target, "write"):
        emit(target)
    else:
        with open(target, "w", newline="", encoding="utf-8") as fh:
            emit(fh)


def dataset_to_csv(
    table: Table, duration_unit: str | None = None, mapping: FieldMapping | None = None
) -> str:
    buf = io.StringIO()
    write_dataset(table, buf, duration_unit, mapping)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Synthetic datasets


@dataclass(frozen=True)
class GeneratorConfig:
    """Deterministic generator parameters; identical configs give identical output."""

    row_count: int
    seed: int
    now: int  # epoch ms, frozen "current time" of the dataset

    def __post_init__(self) -> None:
        if self.row_count <= 0:
            raise ValueError(f"row_count must be positive, got {self.row_count!r}")


STEEL_CATEGORIES = ("DC01", "DX51D", "HC340LA", "S235JR", "S355MC")
STEEL_WAREHOUSES = ("W1", "W2", "W3")
STEEL_EVENTS = ("hot_rolled", "galvanizing_planned", "shipping", "pickled")


def steel_mapping() -> FieldMapping:
    return FieldMapping(
        id="id",
        data_columns=("steel_category", "coil_width_mm", "warehouse", "urgent", "shipping_date"),
        event_data={key: key for key in STEEL_EVENTS},
    )


def generate_steel_dataset(config: GeneratorConfig) -> Table:
    """Synthetic coil logistics table with a historical partition.

    Active coils (ids C*) carry a past hot_rolled event, a future shipping
    event within 60 days, and a planned galvanizing date on roughly 40% of
    rows; the shipping timestamp is mirrored into the shipping_date column so
    it stays range-filterable. Historical coils (ids H*) carry hot_rolled
    plus a realized pickled event, so their storage duration is known and
    usable as similarity history. Every hot_rolled is strictly before now;
    every shipping is at or after now.
    """
    rng = np.random.default_rng(config.seed)
    now = config.now - (config.now % 1000)
    n_hist = config.row_count // 2
    n_cand = config.row_count - n_hist
    descriptors = [
        ColumnDescriptor("steel_category", ColumnType.CATEGORICAL),
        ColumnDescriptor("coil_width_mm", ColumnType.NUMBER, unit="mm"),
        ColumnDescriptor("warehouse", ColumnType.CATEGORICAL),
        ColumnDescriptor("urgent", ColumnType.BOOLEAN),
        ColumnDescriptor("shipping_date", ColumnType.DATE),
    ]

    def attributes() -> dict:
        return {
            "steel_category": STEEL_CATEGORIES[int(rng.integers(0, len(STEEL_CATEGORIES)))],
            "coil_width_mm": round(float(rng.uniform(900.0, 2100.0)), 1),
            "warehouse": STEEL_WAREHOUSES[int(rng.integers(0, len(STEEL_WAREHOUSES)))],
            "urgent": bool(rng.random() < 0.15),
        }

    def seconds(lo_s: int, hi_s: int) -> int:
        return int(rng.integers(lo_s, hi_s)) * 1000

    rows: list[ItemRow] = []
    for i in range(n_cand):
        cells = attributes()
        events = {
            "hot_rolled": now - seconds(1, 30 * 86400),
            "shipping": now + seconds(0, 60 * 86400),
        }
        if rng.random() < 0.4:
            events["galvanizing_planned"] = now + seconds(1, 20 * 86400)
        cells["shipping_date"] = events["shipping"]
        rows.append(ItemRow(id=f"C{i + 1:05d}", cells=cells, events=events))

    for i in range(n_hist):
        cells = attributes()
        hot_rolled = now - seconds(70 * 86400, 430 * 86400)
        cat_index = STEEL_CATEGORIES.index(cells["steel_category"])
        duration_days = (
            3.0
            + 2.5 * cat_index
            + (cells["coil_width_mm"] - 900.0) / 1200.0 * 8.0
            + float(rng.exponential(4.0))
        )
        duration_days = min(max(duration_days, 1.0), 59.0)
        duration_ms = int(round(duration_days * 86400)) * 1000
        events = {"hot_rolled": hot_rolled, "pickled": hot_rolled + duration_ms}
        rows.append(ItemRow(id=f"H{i + 1:05d}", cells=cells, events=events))

    return build_table(descriptors, STEEL_EVENTS, rows)


ECOMMERCE_CITIES = (
    ("sao paulo", "SP", 25),
    ("rio de janeiro", "RJ", 13),
    ("belo horizonte", "MG", 8),
    ("brasilia", "DF", 6),
    ("curitiba", "PR", 5),
    ("campinas", "SP", 4),
    ("porto alegre", "RS", 4),
    ("salvador", "BA", 3),
    ("guarulhos", "SP", 3),
    ("niteroi", "RJ", 2),
)
ECOMMERCE_EVENTS = (
    "purchase",
    "approved",
    "delivered_carrier",
    "delivered_customer",
    "estimated_delivery",
)


def ecommerce_mapping() -> FieldMapping:
    return FieldMapping(
        id="order_id",
        data_columns=("customer_city", "customer_state", "freight_value", "price"),
        event_data={key: key for key in ECOMMERCE_EVENTS},
    )


def generate_ecommerce_dataset(config: GeneratorConfig) -> Table:
    """Synthetic marketplace orders shaped like the public Brazilian corpus.

    Roughly three quarters of orders are delivered (all five events realized,
    old enough that delivery lies in the past); the rest are in transit with
    no customer delivery yet. Carriers tend to beat the estimate, and
    low-freight orders get nearer estimated delivery dates than high-freight
    ones; both tendencies are what the dashboards surface downstream.
    """
    rng = np.random.default_rng(config.seed)
    now = config.now - (config.now % 1000)
    descriptors = [
        ColumnDescriptor("customer_city", ColumnType.CATEGORICAL),
        ColumnDescriptor("customer_state", ColumnType.CATEGORICAL),
        ColumnDescriptor("freight_value", ColumnType.NUMBER, unit="BRL"),
        ColumnDescriptor("price", ColumnType.NUMBER, unit="BRL"),
    ]
    weights = np.array([w for _, _, w in ECOMMERCE_CITIES], dtype=np.float64)
    weights /= weights.sum()

    def seconds(lo_s: int, hi_s: int) -> int:
        return int(rng.integers(lo_s, hi_s)) * 1000

    rows: list[ItemRow] = []
    for i in range(config.row_count):
        city, state, _ = ECOMMERCE_CITIES[int(rng.choice(len(ECOMMERCE_CITIES), p=weights))]
        freight = round(float(np.exp(rng.normal(np.log(17.0), 0.55))), 2)
        price = round(float(np.exp(rng.normal(np.log(90.0), 0.8))), 2)
        delivered = bool(rng.random() < 0.75)
        if delivered:
            purchase = now - seconds(40 * 86400, 700 * 86400)
        else:
            purchase = now - seconds(0, 10 * 86400)
        approved = purchase + seconds(600, 2 * 86400)
        carrier = approved + seconds(6 * 3600, 4 * 86400)
        freight_norm = min(freight / 60.0, 1.0)
        est_days = max(2.0, 5.0 + 20.0 * freight_norm + float(rng.normal(0.0, 1.5)))
        events = {
            "purchase": purchase,
            "approved": approved,
            "delivered_carrier": carrier,
            "estimated_delivery": approved + int(round(est_days * 86400)) * 1000,
        }
        if delivered:
            deliver_days = 1.0 + 6.0 * freight_norm * float(rng.uniform(0.3, 1.0)) + float(
                rng.exponential(2.0)
            )
            deliver_days = min(max(deliver_days, 0.5), 30.0)
            events["delivered_customer"] = carrier + int(round(deliver_days * 86400)) * 1000
        rows.append(
            ItemRow(
                id=f"O{i + 1:06d}",
                cells={
                    "customer_city": city,
                    "customer_state": state,
                    "freight_value": freight,
                    "price": price,
                },
                events=events,
            )
        )
    return build_table(descriptors, ECOMMERCE_EVENTS, rows)
