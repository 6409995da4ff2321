"""Session-scoped HTTP service: hosts tables, applies view commands, and serves
resolved view models for the UI.

The view model is rebuilt from (table, ViewState) on every request through the
fixed pipeline filter -> sort -> group -> aggregate -> layout -> resolve, and
serialized as canonical JSON so identical state yields identical bytes.
Commands are compute-then-commit: a failing command leaves the session's view
state untouched.
"""

from __future__ import annotations

import hashlib
import json
import re
import tempfile
import threading
import time
import uuid
from dataclasses import dataclass, field
from dataclasses import replace as dc_replace
from pathlib import Path
from typing import Mapping, Sequence

from fastapi import FastAPI, HTTPException
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import events as ev
from . import kernels
from . import query as q
from .ingest import (
    FieldMapping,
    ParseError,
    dataset_to_csv,
    load_dataset,
    load_mapping,
    mapping_from_dict,
)
from .model import CURRENT_TIME, STAT_KEYS, ColumnType, ItemRow, Table, TableError, build_table
from .similarity import SimilarityError, SimilaritySpec, enrich_dataset, validate_spec
from .stateio import (
    StateError,
    filter_from_dict,
    load_spec,
    sort_key_from_dict,
    spec_from_dict,
    to_canonical_json,
    view_state_from_dict,
    view_state_to_dict,
)

MAIN_VIEW = "main"
SIMILAR_VIEW = "similar"

COMMANDS = frozenset(
    {
        "set_filters",
        "set_sort",
        "set_group",
        "set_reference",
        "set_unit",
        "toggle_event",
        "toggle_boxplot",
        "set_boxplot_anchor",
        "set_zoom",
        "pan",
        "set_overview",
        "set_overview_stat",
        "select_item",
        "clear_selection",
    }
)

_STATE_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,63}$")

_USER_ERRORS = (ParseError, TableError, SimilarityError, StateError, q.QueryError, ev.ViewError)


class CommandError(ValueError):
    """Unknown command or invalid command payload."""


@dataclass
class Session:
    """One hosted dataset with its main and similar-items view states."""

    id: str
    candidates: Table
    history: Table
    spec: SimilaritySpec | None
    view: ev.ViewState
    similar_view_state: ev.ViewState
    dataset_key: str
    now_ms: int
    lock: threading.Lock = field(default_factory=threading.Lock)


def default_view_state(table: Table, now_ms: int) -> ev.ViewState:
    """Initial view: current-time reference, one-day unit, all events visible,
    boxplot shown."""
    return ev.ViewState(now_ms=now_ms, visible_events=frozenset(table.event_types))


def dataset_fingerprint(candidates: Table, history: Table) -> str:
    digest = hashlib.sha256()
    digest.update(dataset_to_csv(candidates).encode("utf-8"))
    digest.update(b"\x00")
    digest.update(dataset_to_csv(history).encode("utf-8"))
    return digest.hexdigest()[:16]


# ---------------------------------------------------------------------------
# View model assembly


def _cell_payload(row: ItemRow, kinds: Mapping[str, ColumnType]) -> dict:
    return {name: row.cells.get(name) for name in kinds}


def _boxplot_payload(row: ItemRow, view: ev.ViewState) -> dict | None:
    if not view.show_boxplot or row.similar_box is None:
        return None
    return {key: ev.resolve_event_value(row, key, view) for key in STAT_KEYS}


def _heatmap_payload(grid: ev.EventBinGrid) -> dict:
    return {
        "event": grid.event_type,
        "edges": list(grid.bin_edges),
        "counts": list(grid.counts),
        "excluded": grid.excluded,
    }


def _aggregate_payload(agg: q.GroupAggregate) -> dict:
    return {
        "row_count": agg.row_count,
        "event_heatmaps": [_heatmap_payload(g) for g in agg.event_heatmaps],
        "categorical_histograms": {
            col: dict(counts) for col, counts in agg.categorical_histograms.items()
        },
        "numeric_boxplots": {
            col: {"min": b.min, "q1": b.q1, "median": b.median, "q3": b.q3, "max": b.max}
            for col, b in agg.numeric_boxplots.items()
        },
    }


def build_view_model(
    table: Table, view: ev.ViewState, warnings: Sequence[str] = ()
) -> dict:
    """Resolve one table under one view state into a JSON-safe view model."""
    filtered = q.apply_filters(table, view.filters)
    ordered = q.sort_rows(table, filtered, view.sort, view)
    if view.group_by is not None:
        grouped = q.group_rows(table, ordered, view.group_by, view.group_bins)
    else:
        grouped = [("", list(ordered))]
    flat = [rid for _, members in grouped for rid in members]
    height = dict(q.layout_rows(flat, view).entries)

    domain = ev.axis_domain([table.row(rid) for rid in filtered], view)
    kinds = {d.name: d.kind for d in table.descriptors}
    visible = [e for e in table.event_types if e in view.visible_events]

    groups_payload = []
    for key, members in grouped:
        rows_payload = []
        for rid in members:
            row = table.row(rid)
            rows_payload.append(
                {
                    "id": rid,
                    "height_class": height[rid],
                    "cells": _cell_payload(row, kinds),
                    "events": {e: ev.resolve_event_value(row, e, view) for e in visible},
                    "boxplot": _boxplot_payload(row, view),
                    "flags": list(row.flags),
                    "similar_count": len(row.similar_ids),
                }
            )
        aggregate = None
        if view.group_by is not None and members:
            aggregate = _aggregate_payload(
                q.aggregate_group(table, members, view, key, domain)
            )
        groups_payload.append(
            {
                "key": key,
                "row_count": len(members),
                "rows": rows_payload,
                "aggregate": aggregate,
            }
        )

    return {
        "axis": {
            "domain": [domain[0], domain[1]],
            "reference": view.reference,
            "unit_ms": view.time_unit_ms,
        },
        "columns": [
            {"name": d.name, "kind": d.kind.value, "unit": d.unit} for d in table.descriptors
        ],
        "events": [{"key": e, "visible": e in view.visible_events} for e in table.event_types],
        "groups": groups_payload,
        "row_count": len(filtered),
        "selected": view.selected,
        "view_state": view_state_to_dict(view),
        "warnings": list(warnings),
    }


def view_model_bytes(table: Table, view: ev.ViewState, warnings: Sequence[str] = ()) -> bytes:
    return to_canonical_json(build_view_model(table, view, warnings))


# ---------------------------------------------------------------------------
# Commands


def apply_command(
    view: ev.ViewState, table: Table, command: str, payload: Mapping
) -> ev.ViewState:
    """Return the view state the command produces; raises on bad input."""

    def need(key: str):
        if key not in payload:
            raise CommandError(f"command {command!r} requires field {key!r}")
        return payload[key]

    if command == "set_filters":
        return dc_replace(
            view, filters=tuple(filter_from_dict(f) for f in need("filters"))
        )
    if command == "set_sort":
        return dc_replace(view, sort=tuple(sort_key_from_dict(k) for k in need("sort")))
    if command == "set_group":
        column = payload.get("column")
        edges = payload.get("bin_edges")
        if column is not None and not any(d.name == column for d in table.descriptors):
            raise CommandError(f"unknown group column {column!r}")
        return dc_replace(
            view,
            group_by=column,
            group_bins=tuple(float(e) for e in edges) if edges else None,
        )
    if command == "set_reference":
        reference = str(need("reference"))
        if reference != CURRENT_TIME and reference not in table.event_types:
            raise CommandError(f"unknown reference {reference!r}")
        return dc_replace(view, reference=reference)
    if command == "set_unit":
        return dc_replace(view, time_unit_ms=int(need("unit_ms")))
    if command == "toggle_event":
        key = str(need("event"))
        if key not in table.event_types:
            raise CommandError(f"unknown event type {key!r}")
        wanted = payload.get("visible")
        turn_on = (key not in view.visible_events) if wanted is None else bool(wanted)
        visible = set(view.visible_events)
        (visible.add if turn_on else visible.discard)(key)
        return dc_replace(view, visible_events=frozenset(visible))
    if command == "toggle_boxplot":
        wanted = payload.get("visible")
        return dc_replace(
            view, show_boxplot=(not view.show_boxplot) if wanted is None else bool(wanted)
        )
    if command == "set_boxplot_anchor":
        anchor = str(need("anchor"))
        if anchor != CURRENT_TIME and anchor not in table.event_types:
            raise CommandError(f"unknown anchor {anchor!r}")
        return dc_replace(view, boxplot_anchor=anchor)
    if command == "set_zoom":
        domain = need("domain")
        if domain is None:
            return ev.reset_zoom(view)
        lo, hi = (float(domain[0]), float(domain[1]))
        return ev.zoom(view, (lo, hi))
    if command == "pan":
        return ev.pan(view, float(need("delta")))
    if command == "set_overview":
        return dc_replace(view, overview=bool(need("enabled")))
    if command == "set_overview_stat":
        return dc_replace(view, overview_stat=str(need("stat")))
    if command == "select_item":
        rid = str(need("id"))
        if not table.has_row(rid):
            raise CommandError(f"unknown item {rid!r}")
        return dc_replace(view, selected=rid)
    if command == "clear_selection":
        return dc_replace(view, selected=None)
    raise CommandError(f"unknown command {command!r}")


# ---------------------------------------------------------------------------
# State store


class StateStore:
    """Named view states as JSON documents in a directory, keyed by
    (dataset fingerprint, name) so states never leak across datasets."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, dataset_key: str, name: str) -> Path:
        if not _STATE_NAME_RE.match(name):
            raise StateError(f"invalid state name {name!r}")
        return self.root / f"{dataset_key}__{name}.json"

    def save(self, dataset_key: str, name: str, view: ev.ViewState) -> dict:
        payload = {
            "name": name,
            "saved_at": int(time.time() * 1000),
            "view": view_state_to_dict(view),
        }
        self._path(dataset_key, name).write_text(
            json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8"
        )
        return payload

    def load(self, dataset_key: str, name: str) -> ev.ViewState:
        path = self._path(dataset_key, name)
        if not path.exists():
            raise KeyError(name)
        data = json.loads(path.read_text(encoding="utf-8"))
        return view_state_from_dict(data["view"])


# ---------------------------------------------------------------------------
# Session construction


def _empty_like(table: Table) -> Table:
    return build_table(table.descriptors, table.event_types, [])


def make_session(
    candidates: Table,
    history: Table | None,
    spec: SimilaritySpec | None,
    now_ms: int,
    enrich: bool = True,
) -> Session:
    """Assemble a session from loaded tables, enriching candidates when a
    similarity spec is given and the data does not already carry similar items."""
    if history is None:
        history = _empty_like(candidates)
    if spec is not None and len(history):
        validate_spec(spec, history, candidates)
        if enrich:
            candidates = enrich_dataset(candidates, history, spec)
    return Session(
        id=uuid.uuid4().hex[:12],
        candidates=candidates,
        history=history,
        spec=spec,
        view=default_view_state(candidates, now_ms),
        similar_view_state=default_view_state(history, now_ms),
        dataset_key=dataset_fingerprint(candidates, history),
        now_ms=now_ms,
    )


def _similar_rows(session: Session) -> tuple[Table, list[str]]:
    """The similar-items table for the current selection, plus notices."""
    if session.view.selected is None:
        return _empty_like(session.history), ["no item selected"]
    rows, warnings = q.similar_view(session.candidates, session.history, session.view.selected)
    return build_table(session.history.descriptors, session.history.event_types, rows), warnings


# ---------------------------------------------------------------------------
# HTTP app


class SessionRequest(BaseModel):
    candidates: str
    mapping: dict | str
    history: str | None = None
    history_mapping: dict | str | None = None
    spec: dict | str | None = None
    # None: the unit recorded in each file's mapping, falling back to days.
    duration_unit: str | None = None
    now_ms: int | None = None


class CommandRequest(BaseModel):
    command: str
    payload: dict = Field(default_factory=dict)
    target: str = MAIN_VIEW


class SaveStateRequest(BaseModel):
    target: str = MAIN_VIEW


def _resolve_mapping(raw: dict | str) -> FieldMapping:
    return load_mapping(raw) if isinstance(raw, str) else mapping_from_dict(raw)


def _resolve_spec(raw: dict | str | None) -> SimilaritySpec | None:
    if raw is None:
        return None
    return load_spec(raw) if isinstance(raw, str) else spec_from_dict(raw)


def create_app(state_dir: str | Path | None = None, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="evtab", docs_url=None, redoc_url=None)
    sessions: dict[str, Session] = {}
    store = StateStore(state_dir or tempfile.mkdtemp(prefix="evtab-state-"))
    app.state.sessions = sessions
    app.state.store = store

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    def json_response(raw: bytes) -> Response:
        return Response(content=raw, media_type="application/json")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "kernel_backend": kernels.backend_name()}

    @app.get("/sessions")
    def list_sessions() -> dict:
        return {"sessions": sorted(sessions)}

    @app.post("/sessions")
    def create_session(req: SessionRequest) -> dict:
        try:
            mapping = _resolve_mapping(req.mapping)
            candidates = load_dataset(req.candidates, mapping, req.duration_unit)
            history = None
            if req.history is not None:
                history_mapping = (
                    _resolve_mapping(req.history_mapping) if req.history_mapping else mapping
                )
                history = load_dataset(req.history, history_mapping, req.duration_unit)
            spec = _resolve_spec(req.spec)
            already_similar = bool(
                mapping.similar_data_duration or mapping.similar_data_ids
            )
            now_ms = req.now_ms if req.now_ms is not None else int(time.time() * 1000)
            session = make_session(
                candidates, history, spec, now_ms, enrich=not already_similar
            )
        except (*_USER_ERRORS, OSError, json.JSONDecodeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        sessions[session.id] = session
        return {
            "session": session.id,
            "rows": len(session.candidates),
            "history_rows": len(session.history),
            "events": list(session.candidates.event_types),
            "columns": list(session.candidates.column_names),
            "now_ms": session.now_ms,
        }

    @app.get("/sessions/{session_id}/view")
    def get_view(session_id: str) -> Response:
        session = get_session(session_id)
        with session.lock:
            return json_response(view_model_bytes(session.candidates, session.view))

    @app.get("/sessions/{session_id}/similar-view")
    def get_similar_view(session_id: str) -> Response:
        session = get_session(session_id)
        with session.lock:
            table, warnings = _similar_rows(session)
            return json_response(
                view_model_bytes(table, session.similar_view_state, warnings)
            )

    @app.post("/sessions/{session_id}/commands")
    def post_command(session_id: str, req: CommandRequest) -> Response:
        session = get_session(session_id)
        if req.target not in (MAIN_VIEW, SIMILAR_VIEW):
            raise HTTPException(status_code=400, detail=f"unknown target {req.target!r}")
        if req.command not in COMMANDS:
            raise HTTPException(status_code=400, detail=f"unknown command {req.command!r}")
        with session.lock:
            try:
                if req.target == MAIN_VIEW:
                    new_view = apply_command(
                        session.view, session.candidates, req.command, req.payload
                    )
                    raw = view_model_bytes(session.candidates, new_view)
                    session.view = new_view
                else:
                    table, warnings = _similar_rows(session)
                    new_view = apply_command(
                        session.similar_view_state, table, req.command, req.payload
                    )
                    raw = view_model_bytes(table, new_view, warnings)
                    session.similar_view_state = new_view
            except (CommandError, *_USER_ERRORS, TypeError) as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
        return json_response(raw)

    @app.post("/sessions/{session_id}/state/{name}")
    def save_state(session_id: str, name: str, req: SaveStateRequest | None = None) -> dict:
        session = get_session(session_id)
        target = req.target if req is not None else MAIN_VIEW
        with session.lock:
            view = session.view if target == MAIN_VIEW else session.similar_view_state
            try:
                return store.save(session.dataset_key, name, view)
            except StateError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None

    @app.get("/sessions/{session_id}/state/{name}")
    def load_state(session_id: str, name: str, target: str = MAIN_VIEW) -> Response:
        session = get_session(session_id)
        with session.lock:
            try:
                view = store.load(session.dataset_key, name)
            except KeyError:
                raise HTTPException(status_code=404, detail=f"unknown state {name!r}") from None
            except StateError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
            try:
                if target == SIMILAR_VIEW:
                    table, warnings = _similar_rows(session)
                    raw = view_model_bytes(table, view, warnings)
                    session.similar_view_state = view
                else:
                    raw = view_model_bytes(session.candidates, view)
                    session.view = view
            except _USER_ERRORS as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
        return json_response(raw)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def add_session(app: FastAPI, session: Session) -> str:
    """Register an already-built session (used by the CLI and tests)."""
    app.state.sessions[session.id] = session
    return session.id
