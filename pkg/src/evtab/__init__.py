"""Unified event-sequence + attribute tables for item-level decision support.

The package keeps each item's dated events and its regular attribute columns
in one sortable, filterable, groupable table; aligns all timelines to a
configurable reference event; and estimates durations for open items from the
realized durations of similar historical items.
"""

from __future__ import annotations

from .events import EventBinGrid, ViewError, ViewState, axis_domain, bin_event_counts, resolve_event_value
from .ingest import (
    FieldMapping,
    GeneratorConfig,
    ParseError,
    generate_ecommerce_dataset,
    generate_steel_dataset,
    infer_column_type,
    load_dataset,
    parse_timestamp,
    write_dataset,
)
from .model import (
    CURRENT_TIME,
    STAT_KEYS,
    BoxplotSummary,
    ColumnDescriptor,
    ColumnType,
    ItemRow,
    Table,
    TableError,
    build_table,
    compare_cells,
)
from .query import (
    BoolEquals,
    CategoryIn,
    GroupAggregate,
    QueryError,
    RangeFilter,
    RowLayout,
    SortKey,
    TextContains,
    apply_filters,
    group_rows,
    layout_rows,
    aggregate_group,
    similar_view,
    sort_rows,
)
from .similarity import (
    ExactMatch,
    NumericTolerance,
    RecencyMatch,
    SimilarSet,
    SimilarityError,
    SimilaritySpec,
    derive_similar_items,
    enrich_dataset,
    five_number_summary,
)

__version__ = "0.1.0"

__all__ = [
    "BoolEquals",
    "BoxplotSummary",
    "CategoryIn",
    "ColumnDescriptor",
    "ColumnType",
    "CURRENT_TIME",
    "EventBinGrid",
    "ExactMatch",
    "FieldMapping",
    "GeneratorConfig",
    "GroupAggregate",
    "ItemRow",
    "NumericTolerance",
    "ParseError",
    "QueryError",
    "RangeFilter",
    "RecencyMatch",
    "RowLayout",
    "SimilarSet",
    "SimilarityError",
    "SimilaritySpec",
    "SortKey",
    "STAT_KEYS",
    "Table",
    "TableError",
    "TextContains",
    "ViewError",
    "ViewState",
    "aggregate_group",
    "apply_filters",
    "axis_domain",
    "bin_event_counts",
    "build_table",
    "compare_cells",
    "derive_similar_items",
    "enrich_dataset",
    "five_number_summary",
    "generate_ecommerce_dataset",
    "generate_steel_dataset",
    "group_rows",
    "infer_column_type",
    "layout_rows",
    "load_dataset",
    "parse_timestamp",
    "resolve_event_value",
    "similar_view",
    "sort_rows",
    "write_dataset",
    "__version__",
]
