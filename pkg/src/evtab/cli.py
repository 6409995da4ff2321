"""Command-line entry points: serve the dashboard, preprocess datasets,
generate synthetic fixtures, and export resolved views headlessly."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import sys
import time
from pathlib import Path

import click

from .ingest import (
    GeneratorConfig,
    ecommerce_mapping,
    generate_ecommerce_dataset,
    generate_steel_dataset,
    load_dataset,
    load_mapping,
    mapping_to_dict,
    parse_timestamp,
    steel_mapping,
    write_dataset,
)
from .model import STAT_KEYS
from .service import add_session, build_view_model, create_app, make_session
from .similarity import ExactMatch, NumericTolerance, RecencyMatch, SimilaritySpec
from .stateio import load_spec, spec_to_dict, to_canonical_json, view_state_from_dict


def _parse_now(text: str | None) -> int:
    if text is None:
        return int(time.time() * 1000)
    stripped = text.strip()
    if stripped.lstrip("+-").isdigit():
        return int(stripped)
    return parse_timestamp(stripped)


def _load_tables(candidates, history, mapping_path, history_mapping_path, duration_unit):
    mapping = load_mapping(mapping_path)
    table = load_dataset(candidates, mapping, duration_unit)
    history_table = None
    if history is not None:
        history_mapping = (
            load_mapping(history_mapping_path) if history_mapping_path else mapping
        )
        history_table = load_dataset(history, history_mapping, duration_unit)
    return table, history_table, mapping


@click.group()
def main() -> None:
    """Event-table decision support: unified event sequences and attributes."""


@main.command()
@click.option("--candidates", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--history", type=click.Path(exists=True, dir_okay=False))
@click.option("--mapping", "mapping_path", required=True, type=click.Path(exists=True))
@click.option("--history-mapping", "history_mapping_path", type=click.Path(exists=True))
@click.option("--spec", "spec_path", type=click.Path(exists=True))
@click.option("--duration-unit", default=None,
              help="Unit of similar durations in the input (default: the mapping's recorded unit, else days).")
@click.option("--now", "now_text", default=None, help="Frozen current time (epoch ms or timestamp).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--state-dir", default="evtab_state", show_default=True)
@click.option("--ui-dir", default=None, type=click.Path(file_okay=False))
def serve(
    candidates,
    history,
    mapping_path,
    history_mapping_path,
    spec_path,
    duration_unit,
    now_text,
    host,
    port,
    state_dir,
    ui_dir,
) -> None:
    """Load a dataset, open a session, and serve the HTTP API and UI."""
    table, history_table, mapping = _load_tables(
        candidates, history, mapping_path, history_mapping_path, duration_unit
    )
    spec = load_spec(spec_path) if spec_path else None
    already_similar = bool(mapping.similar_data_duration or mapping.similar_data_ids)
    session = make_session(
        table, history_table, spec, _parse_now(now_text), enrich=not already_similar
    )
    if ui_dir is None:
        bundled = Path(__file__).parent / "ui"
        ui_dir = bundled if bundled.is_dir() else None
    app = create_app(state_dir=state_dir, ui_dir=ui_dir)
    add_session(app, session)
    click.echo(f"session {session.id}: {len(session.candidates)} rows, "
               f"{len(session.history)} history rows")
    click.echo(f"serving on http://{host}:{port}")
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")


def _mapping_with_similar(mapping):
    """The input mapping extended with similar-item output columns."""
    taken = {mapping.id, *mapping.data_columns, *mapping.event_data.values()}

    def claim(current: str | None, default: str) -> str:
        if current is not None:
            return current
        if default in taken:
            raise click.ClickException(
                f"cannot add output column {default!r}: the mapping already uses that name"
            )
        taken.add(default)
        return default

    return dataclasses.replace(
        mapping,
        similar_data_duration=claim(mapping.similar_data_duration, "similar_durations"),
        similar_data_ids=claim(mapping.similar_data_ids, "similar_ids"),
    )


@main.command()
@click.option("--candidates", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--history", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mapping", "mapping_path", required=True, type=click.Path(exists=True))
@click.option("--history-mapping", "history_mapping_path", type=click.Path(exists=True))
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True))
@click.option("--duration-unit", default=None,
              help="Unit of similar durations in the input (default: the mapping's recorded unit, else days).")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--out-duration-unit", default="ms", show_default=True,
              help="Unit for similar durations in the output file (ms round-trips exactly).")
@click.option("--mapping-out", type=click.Path(dir_okay=False),
              help="Write the mapping describing the enriched file.")
def preprocess(
    candidates,
    history,
    mapping_path,
    history_mapping_path,
    spec_path,
    duration_unit,
    out,
    out_duration_unit,
    mapping_out,
) -> None:
    """Derive similar items for every candidate row and write the enriched CSV."""
    from .similarity import enrich_dataset

    table, history_table, mapping = _load_tables(
        candidates, history, mapping_path, history_mapping_path, duration_unit
    )
    spec = load_spec(spec_path)
    enriched = enrich_dataset(table, history_table, spec)
    # Record the written unit in the mapping so later loads need no flag.
    out_mapping = dataclasses.replace(
        _mapping_with_similar(mapping), duration_unit=out_duration_unit
    )
    write_dataset(enriched, out, mapping=out_mapping)
    with_similar = sum(1 for row in enriched.rows if row.similar_ids)
    click.echo(f"wrote {out}: {len(enriched)} rows, {with_similar} with similar items")
    if mapping_out:
        Path(mapping_out).write_text(
            json.dumps(mapping_to_dict(out_mapping), indent=2) + "\n", encoding="utf-8"
        )
        click.echo(f"wrote {mapping_out}")


def _write_fixture(table, out, mapping, spec, mapping_out, spec_out) -> None:
    write_dataset(table, out, duration_unit="ms", mapping=mapping)
    click.echo(f"wrote {out}: {len(table)} rows")
    if mapping_out:
        Path(mapping_out).write_text(
            json.dumps(mapping_to_dict(mapping), indent=2) + "\n", encoding="utf-8"
        )
        click.echo(f"wrote {mapping_out}")
    if spec_out:
        Path(spec_out).write_text(
            json.dumps(spec_to_dict(spec), indent=2) + "\n", encoding="utf-8"
        )
        click.echo(f"wrote {spec_out}")


@main.command("generate-steel")
@click.option("--rows", default=500, show_default=True, type=int)
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--now", "now_text", default="2024-01-15 00:00:00", show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--mapping-out", type=click.Path(dir_okay=False))
@click.option("--spec-out", type=click.Path(dir_okay=False))
def generate_steel(rows, seed, now_text, out, mapping_out, spec_out) -> None:
    """Write a deterministic synthetic coil-logistics dataset."""
    now = _parse_now(now_text)
    table = generate_steel_dataset(GeneratorConfig(row_count=rows, seed=seed, now=now))
    spec = SimilaritySpec(
        matchers=(ExactMatch("steel_category"), NumericTolerance("coil_width_mm", 50.0)),
        source_event="hot_rolled",
        target_event="pickled",
        as_of=now,
    )
    _write_fixture(table, out, steel_mapping(), spec, mapping_out, spec_out)


@main.command("generate-ecommerce")
@click.option("--rows", default=6000, show_default=True, type=int)
@click.option("--seed", default=11, show_default=True, type=int)
@click.option("--now", "now_text", default="2024-01-15 00:00:00", show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--mapping-out", type=click.Path(dir_okay=False))
@click.option("--spec-out", type=click.Path(dir_okay=False))
def generate_ecommerce(rows, seed, now_text, out, mapping_out, spec_out) -> None:
    """Write a deterministic synthetic marketplace-orders dataset."""
    now = _parse_now(now_text)
    table = generate_ecommerce_dataset(GeneratorConfig(row_count=rows, seed=seed, now=now))
    spec = SimilaritySpec(
        matchers=(ExactMatch("customer_city"), RecencyMatch(k=60, by="approved")),
        source_event="approved",
        target_event="delivered_customer",
        as_of=now,
    )
    _write_fixture(table, out, ecommerce_mapping(), spec, mapping_out, spec_out)


def _view_model_csv(model: dict) -> str:
    events = [entry["key"] for entry in model["events"] if entry["visible"]]
    columns = [col["name"] for col in model["columns"]]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["id", "group", "height_class"]
        + columns
        + [f"event:{e}" for e in events]
        + [f"stat:{s}" for s in STAT_KEYS]
    )
    for group in model["groups"]:
        for row in group["rows"]:
            box = row["boxplot"] or {}
            writer.writerow(
                [row["id"], group["key"], row["height_class"]]
                + [row["cells"].get(c) for c in columns]
                + [row["events"].get(e) for e in events]
                + [box.get(s) for s in STAT_KEYS]
            )
    return buf.getvalue()


@main.command()
@click.option("--candidates", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--history", type=click.Path(exists=True, dir_okay=False))
@click.option("--mapping", "mapping_path", required=True, type=click.Path(exists=True))
@click.option("--history-mapping", "history_mapping_path", type=click.Path(exists=True))
@click.option("--spec", "spec_path", type=click.Path(exists=True))
@click.option("--state", "state_path", type=click.Path(exists=True), help="Saved view state JSON.")
@click.option("--duration-unit", default=None,
              help="Unit of similar durations in the input (default: the mapping's recorded unit, else days).")
@click.option("--now", "now_text", default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json",
              show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output path (default: stdout).")
def export(
    candidates,
    history,
    mapping_path,
    history_mapping_path,
    spec_path,
    state_path,
    duration_unit,
    now_text,
    fmt,
    out,
) -> None:
    """Resolve the current view headlessly and emit it as JSON or CSV."""
    table, history_table, mapping = _load_tables(
        candidates, history, mapping_path, history_mapping_path, duration_unit
    )
    spec = load_spec(spec_path) if spec_path else None
    already_similar = bool(mapping.similar_data_duration or mapping.similar_data_ids)
    session = make_session(
        table, history_table, spec, _parse_now(now_text), enrich=not already_similar
    )
    view = session.view
    if state_path:
        doc = json.loads(Path(state_path).read_text(encoding="utf-8"))
        view = view_state_from_dict(doc.get("view", doc))
    model = build_view_model(session.candidates, view)
    if fmt == "json":
        text = to_canonical_json(model).decode("utf-8") + "\n"
    else:
        text = _view_model_csv(model)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
