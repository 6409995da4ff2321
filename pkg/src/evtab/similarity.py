"""Similar-item derivation: attribute matchers, duration extraction, five-number summaries.

Similar historical items are found per candidate by user-defined matchers
(exact, numeric tolerance, recency), the duration between a fixed source and
target event is extracted for each, and the distribution is summarized as a
five-number boxplot. Derivation is a preprocessing step over immutable
tables; matching runs through :mod:`evtab.kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import kernels
from .model import BoxplotSummary, ColumnType, ItemRow, Table, build_table

NEGATIVE_DURATION_FLAG = "negative similar duration"


class SimilarityError(ValueError):
    """Invalid similarity spec or matcher/column mismatch."""


@dataclass(frozen=True)
class ExactMatch:
    """Keep history rows whose cell equals the query's cell (categorical/boolean)."""

    column: str


@dataclass(frozen=True)
class NumericTolerance:
    """Keep history rows within +/- epsilon of the query's number cell."""

    column: str
    epsilon: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.epsilon) or self.epsilon < 0:
            raise SimilarityError(f"tolerance epsilon must be finite and >= 0, got {self.epsilon!r}")


@dataclass(frozen=True)
class RecencyMatch:
    """After attribute matching, keep the k candidates with the latest ``by`` event."""

    k: int
    by: str

    def __post_init__(self) -> None:
        if self.k < 1:
            raise SimilarityError(f"recency k must be positive, got {self.k!r}")


Matcher = Union[ExactMatch, NumericTolerance, RecencyMatch]


@dataclass(frozen=True)
class SimilaritySpec:
    """Matchers plus the fixed source/target events and the query cutoff time.

    ``as_of`` bounds the target event: history rows whose target event falls
    after it are never matched (no future leakage).
    """

    matchers: tuple[Matcher, ...]
    source_event: str
    target_event: str
    as_of: int

    def __post_init__(self) -> None:
        if self.source_event == self.target_event:
            raise SimilarityError("source_event and target_event must differ")
        recency = [m for m in self.matchers if isinstance(m, RecencyMatch)]
        if len(recency) > 1:
            raise SimilarityError("at most one recency matcher is allowed")

    @property
    def recency(self) -> RecencyMatch | None:
        for m in self.matchers:
            if isinstance(m, RecencyMatch):
                return m
        return None


@dataclass(frozen=True)
class SimilarSet:
    """Derived similar items: ids, their realized durations (ms), and the summary."""

    ids: tuple[str, ...]
    durations_ms: tuple[float, ...]
    summary: BoxplotSummary | None

    def __post_init__(self) -> None:
        if len(self.ids) != len(self.durations_ms):
            raise SimilarityError("ids and durations must have equal length")


def five_number_summary(durations_ms: Sequence[float]) -> BoxplotSummary:
    """Five-number summary (min, q1, median, q3, max) of a non-empty list.

    Quartiles use linear interpolation between closest ranks at positions
    (n-1) * {0.25, 0.5, 0.75} over the sorted values.
    """
    if len(durations_ms) == 0:
        raise ValueError("five_number_summary requires a non-empty list")
    values = np.asarray(durations_ms, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError("five_number_summary requires finite values")
    mn, q1, med, q3, mx = kernels.five_number(values)
    return BoxplotSummary(
        min=mn, q1=q1, median=med, q3=q3, max=mx, durations=tuple(float(v) for v in values)
    )


def event_duration(row: ItemRow, source_event: str, target_event: str) -> int | None:
    """ts(target) - ts(source) in ms, or None when either event is absent.

    Negative durations are preserved; they signal data problems and are
    flagged downstream rather than dropped.
    """
    src = row.events.get(source_event)
    tgt = row.events.get(target_event)
    if src is None or tgt is None:
        return None
    return tgt - src


def validate_spec(spec: SimilaritySpec, history: Table, candidates: Table | None = None) -> None:
    """Check that the spec's matcher columns and events exist with the right kinds."""
    for event in (spec.source_event, spec.target_event):
        if event not in history.event_types:
            raise SimilarityError(f"event {event!r} not declared in history table")
    for m in spec.matchers:
        if isinstance(m, RecencyMatch):
            if m.by not in history.event_types:
                raise SimilarityError(f"recency event {m.by!r} not declared in history table")
            continue
        for table, label in ((history, "history"), (candidates, "candidates")):
            if table is None:
                continue
            kind = table.descriptor(m.column).kind
            if isinstance(m, ExactMatch) and kind not in (
                ColumnType.CATEGORICAL,
                ColumnType.BOOLEAN,
            ):
                raise SimilarityError(
                    f"exact matcher requires a categorical/boolean column, "
                    f"{label} column {m.column!r} is {kind.value}"
                )
            if isinstance(m, NumericTolerance) and kind is not ColumnType.NUMBER:
                raise SimilarityError(
                    f"numeric_tolerance requires a number column, "
                    f"{label} column {m.column!r} is {kind.value}"
                )


class _MatchContext:
    """Columnar encoding of one (history, spec) pair, reused across query rows."""

    def __init__(self, history: Table, spec: SimilaritySpec):
        validate_spec(spec, history)
        self.history = history
        self.spec = spec
        rows = history.rows
        n = len(rows)

        def ts_array(key: str) -> np.ndarray:
            out = np.full(n, kernels.MISSING_TS, dtype=np.int64)
            for i, row in enumerate(rows):
                ts = row.events.get(key)
                if ts is not None:
                    out[i] = ts
            return out

        self.ts_src = ts_array(spec.source_event)
        self.ts_tgt = ts_array(spec.target_event)
        self.eligible = (
            (self.ts_src != kernels.MISSING_TS)
            & (self.ts_tgt != kernels.MISSING_TS)
            & (self.ts_tgt <= spec.as_of)
        )

        # Lexicographic rank of each row id; unique ids make this a total order.
        order = sorted(range(n), key=lambda i: rows[i].id)
        self.id_rank = np.empty(n, dtype=np.int64)
        for rank, i in enumerate(order):
            self.id_rank[i] = rank
        self._index_by_id = {row.id: i for i, row in enumerate(rows)}

        self.exact_matchers = [m for m in spec.matchers if isinstance(m, ExactMatch)]
        self.tol_matchers = [m for m in spec.matchers if isinstance(m, NumericTolerance)]

        self.vocabs: list[dict[object, int]] = []
        codes = np.full((len(self.exact_matchers), n), -1, dtype=np.int64)
        for j, m in enumerate(self.exact_matchers):
            vocab: dict[object, int] = {}
            for i, row in enumerate(rows):
                value = row.cells.get(m.column)
                if value is None:
                    continue
                code = vocab.setdefault(value, len(vocab))
                codes[j, i] = code
            self.vocabs.append(vocab)
        self.exact_codes = np.ascontiguousarray(codes)

        tol = np.full((len(self.tol_matchers), n), np.nan, dtype=np.float64)
        for j, m in enumerate(self.tol_matchers):
            for i, row in enumerate(rows):
                value = row.cells.get(m.column)
                if value is not None:
                    tol[j, i] = value
        self.tol_values = np.ascontiguousarray(tol)
        self.tol_eps = np.array([m.epsilon for m in self.tol_matchers], dtype=np.float64)

        recency = spec.recency
        if recency is None:
            self.k = -1
            self.ts_by = np.zeros(n, dtype=np.int64)
        else:
            self.k = recency.k
            self.ts_by = ts_array(recency.by)

    def match(self, query_row: ItemRow) -> list[int]:
        q_exact = np.empty(len(self.exact_matchers), dtype=np.int64)
        for j, m in enumerate(self.exact_matchers):
            value = query_row.cells.get(m.column)
            q_exact[j] = -1 if value is None else self.vocabs[j].get(value, -1)
        q_tol = np.empty(len(self.tol_matchers), dtype=np.float64)
        for j, m in enumerate(self.tol_matchers):
            value = query_row.cells.get(m.column)
            q_tol[j] = np.nan if value is None else float(value)
        self_idx = self._index_by_id.get(query_row.id, -1)
        picked = kernels.match_candidates(
            self.eligible,
            self.exact_codes,
            q_exact,
            self.tol_values,
            q_tol,
            self.tol_eps,
            self.ts_by,
            self.id_rank,
            self.k,
            self_idx,
        )
        # Stable result order: most recently completed target first, ties by id.
        return sorted(picked.tolist(), key=lambda i: (-int(self.ts_tgt[i]), self.history.rows[i].id))

    def similar_set(self, query_row: ItemRow) -> SimilarSet:
        indices = self.match(query_row)
        if not indices:
            return SimilarSet((), (), None)
        ids = tuple(self.history.rows[i].id for i in indices)
        durations = tuple(float(self.ts_tgt[i] - self.ts_src[i]) for i in indices)
        return SimilarSet(ids, durations, five_number_summary(durations))


def derive_similar_items(query_row: ItemRow, history: Table, spec: SimilaritySpec) -> SimilarSet:
    """Find the query row's similar historical items under the given spec.

    Candidates are history rows (other than the query's own id) with both the
    source and target event present and ts(target) <= as_of. Exact and
    tolerance matchers filter on attributes (a missing value on either side
    matches nothing); a recency matcher then keeps the k remaining rows with
    the latest ``by`` event, ties broken by ascending id. Result ids are
    ordered by descending target timestamp, then ascending id.
    """
    return _MatchContext(history, spec).similar_set(query_row)


def enrich_dataset(candidates: Table, history: Table, spec: SimilaritySpec) -> Table:
    """Populate similar_ids and similar_box on every candidate row.

    Rows with no matches keep empty similar fields. Rows whose similar set
    contains a negative duration get a data-quality flag instead of having
    the value dropped.
    """
    validate_spec(spec, history, candidates)
    context = _MatchContext(history, spec)
    new_rows = []
    for row in candidates.rows:
        similar = context.similar_set(row)
        flags = tuple(f for f in row.flags if f != NEGATIVE_DURATION_FLAG)
        if any(d < 0 for d in similar.durations_ms):
            flags = flags + (NEGATIVE_DURATION_FLAG,)
        new_rows.append(
            ItemRow(
                id=row.id,
                cells=row.cells,
                events=row.events,
                similar_ids=similar.ids,
                similar_box=similar.summary,
                flags=flags,
            )
        )
    return build_table(candidates.descriptors, candidates.event_types, new_rows)
