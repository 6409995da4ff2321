from __future__ import annotations

import pytest

from evtab.ingest import GeneratorConfig, generate_steel_dataset, parse_timestamp
from evtab.model import ColumnDescriptor, ColumnType, ItemRow, build_table

NOW = parse_timestamp("2024-01-15 00:00:00")
DAY = 86_400_000


def table_of(columns, event_types, rows):
    """Compact table builder: columns as (name, kind) pairs, rows as dicts with
    keys id / cells / events / similar_ids / similar_box / flags."""
    descriptors = [ColumnDescriptor(name, kind) for name, kind in columns]
    items = [
        ItemRow(
            id=r["id"],
            cells=r.get("cells", {}),
            events=r.get("events", {}),
            similar_ids=tuple(r.get("similar_ids", ())),
            similar_box=r.get("similar_box"),
            flags=tuple(r.get("flags", ())),
        )
        for r in rows
    ]
    return build_table(descriptors, event_types, items)


@pytest.fixture(scope="session")
def steel_table():
    return generate_steel_dataset(GeneratorConfig(row_count=120, seed=3, now=NOW))


@pytest.fixture
def mixed_table():
    """Small hand-built table touching every column kind and missing cells."""
    columns = [
        ("city", ColumnType.CATEGORICAL),
        ("weight", ColumnType.NUMBER),
        ("urgent", ColumnType.BOOLEAN),
        ("due", ColumnType.DATE),
    ]
    rows = [
        {
            "id": "A",
            "cells": {"city": "porto", "weight": 10.0, "urgent": False, "due": NOW + 3 * DAY},
            "events": {"start": NOW - 5 * DAY, "finish": NOW + 3 * DAY},
        },
        {
            "id": "B",
            "cells": {"city": "porto", "weight": 4.5, "urgent": True},
            "events": {"start": NOW - 2 * DAY},
        },
        {
            "id": "C",
            "cells": {"weight": 4.5, "urgent": False, "due": NOW + 1 * DAY},
            "events": {"finish": NOW + 1 * DAY},
        },
        {
            "id": "D",
            "cells": {"city": "acre"},
            "events": {},
        },
    ]
    return table_of(columns, ("start", "finish"), rows)
