"""Lossless JSON codecs for view state, filters, sort keys, and similarity specs.

Every codec pair here satisfies ``from_dict(to_dict(x)) == x`` so saved view
states restore exactly and two serializations of the same state are
byte-identical under canonical JSON.
"""

from __future__ import annotations

import json
from typing import Mapping, Sequence

from .events import ViewState
from .ingest import parse_timestamp
from .query import (
    ASCENDING,
    BoolEquals,
    CategoryIn,
    FilterSpec,
    RangeFilter,
    SortKey,
    TextContains,
)
from .similarity import ExactMatch, Matcher, NumericTolerance, RecencyMatch, SimilaritySpec


class StateError(ValueError):
    """Malformed serialized state."""


def to_canonical_json(payload) -> bytes:
    """Serialize with sorted keys and no whitespace, so equal values give equal bytes."""
    return json.dumps(
        payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False
    ).encode("utf-8")


def _require(d: Mapping, key: str, context: str):
    if key not in d:
        raise StateError(f"{context}: missing field {key!r}")
    return d[key]


# -- filters ----------------------------------------------------------------

def filter_to_dict(spec: FilterSpec) -> dict:
    if isinstance(spec, CategoryIn):
        return {"type": "category_in", "column": spec.column, "values": sorted(spec.values)}
    if isinstance(spec, RangeFilter):
        return {"type": "range", "column": spec.column, "lo": spec.lo, "hi": spec.hi}
    if isinstance(spec, BoolEquals):
        return {"type": "bool_equals", "column": spec.column, "value": spec.value}
    if isinstance(spec, TextContains):
        return {"type": "text_contains", "column": spec.column, "text": spec.text}
    raise StateError(f"unknown filter {spec!r}")


def filter_from_dict(d: Mapping) -> FilterSpec:
    kind = _require(d, "type", "filter")
    column = str(_require(d, "column", "filter"))
    if kind == "category_in":
        return CategoryIn(column, frozenset(str(v) for v in _require(d, "values", "filter")))
    if kind == "range":
        lo, hi = d.get("lo"), d.get("hi")
        return RangeFilter(column, lo=lo, hi=hi)
    if kind == "bool_equals":
        return BoolEquals(column, bool(_require(d, "value", "filter")))
    if kind == "text_contains":
        return TextContains(column, str(_require(d, "text", "filter")))
    raise StateError(f"unknown filter type {kind!r}")


def sort_key_to_dict(key: SortKey) -> dict:
    return {"target": key.target, "direction": key.direction}


def sort_key_from_dict(d: Mapping) -> SortKey:
    return SortKey(
        target=str(_require(d, "target", "sort key")),
        direction=str(d.get("direction", ASCENDING)),
    )


# -- view state -------------------------------------------------------------

def view_state_to_dict(view: ViewState) -> dict:
    return {
        "now_ms": view.now_ms,
        "reference": view.reference,
        "time_unit_ms": view.time_unit_ms,
        "visible_events": sorted(view.visible_events),
        "show_boxplot": view.show_boxplot,
        "boxplot_anchor": view.boxplot_anchor,
        "overview": view.overview,
        "overview_stat": view.overview_stat,
        "zoom_domain": list(view.zoom_domain) if view.zoom_domain else None,
        "sort": [sort_key_to_dict(k) for k in view.sort],
        "group_by": view.group_by,
        "group_bins": list(view.group_bins) if view.group_bins else None,
        "filters": [filter_to_dict(f) for f in view.filters],
        "selected": view.selected,
        "heatmap_bins": view.heatmap_bins,
    }


def view_state_from_dict(d: Mapping) -> ViewState:
    zoom = d.get("zoom_domain")
    bins = d.get("group_bins")
    try:
        return ViewState(
            now_ms=int(_require(d, "now_ms", "view state")),
            reference=str(d.get("reference", "CURRENT_TIME")),
            time_unit_ms=int(d.get("time_unit_ms", 86_400_000)),
            visible_events=frozenset(str(e) for e in d.get("visible_events", ())),
            show_boxplot=bool(d.get("show_boxplot", True)),
            boxplot_anchor=str(d.get("boxplot_anchor", "CURRENT_TIME")),
            overview=bool(d.get("overview", False)),
            overview_stat=str(d.get("overview_stat", "median")),
            zoom_domain=(float(zoom[0]), float(zoom[1])) if zoom else None,
            sort=tuple(sort_key_from_dict(k) for k in d.get("sort", ())),
            group_by=d.get("group_by"),
            group_bins=tuple(float(e) for e in bins) if bins else None,
            filters=tuple(filter_from_dict(f) for f in d.get("filters", ())),
            selected=d.get("selected"),
            heatmap_bins=int(d.get("heatmap_bins", 24)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, StateError):
            raise
        raise StateError(f"invalid view state: {exc}") from None


# -- similarity specs -------------------------------------------------------

def matcher_to_dict(matcher: Matcher) -> dict:
    if isinstance(matcher, ExactMatch):
        return {"type": "exact", "column": matcher.column}
    if isinstance(matcher, NumericTolerance):
        return {"type": "numeric_tolerance", "column": matcher.column, "epsilon": matcher.epsilon}
    if isinstance(matcher, RecencyMatch):
        return {"type": "recency", "k": matcher.k, "by": matcher.by}
    raise StateError(f"unknown matcher {matcher!r}")


def matcher_from_dict(d: Mapping) -> Matcher:
    kind = _require(d, "type", "matcher")
    if kind == "exact":
        return ExactMatch(str(_require(d, "column", "matcher")))
    if kind == "numeric_tolerance":
        return NumericTolerance(
            str(_require(d, "column", "matcher")),
            float(_require(d, "epsilon", "matcher")),
        )
    if kind == "recency":
        return RecencyMatch(int(_require(d, "k", "matcher")), str(_require(d, "by", "matcher")))
    raise StateError(f"unknown matcher type {kind!r}")


def spec_to_dict(spec: SimilaritySpec) -> dict:
    return {
        "matchers": [matcher_to_dict(m) for m in spec.matchers],
        "source_event": spec.source_event,
        "target_event": spec.target_event,
        "as_of": spec.as_of,
    }


def spec_from_dict(d: Mapping) -> SimilaritySpec:
    as_of = _require(d, "as_of", "similarity spec")
    if isinstance(as_of, str):
        as_of = parse_timestamp(as_of)
    return SimilaritySpec(
        matchers=tuple(matcher_from_dict(m) for m in d.get("matchers", ())),
        source_event=str(_require(d, "source_event", "similarity spec")),
        target_event=str(_require(d, "target_event", "similarity spec")),
        as_of=int(as_of),
    )


def load_spec(path) -> SimilaritySpec:
    with open(path, encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))
