"""Command-line interface: fixture generation, preprocessing, headless export."""

from __future__ import annotations

import csv
import io
import json

import pytest
from click.testing import CliRunner
from conftest import NOW

from evtab.cli import main
from evtab.ingest import load_dataset, load_mapping
from evtab.stateio import load_spec


@pytest.fixture()
def runner():
    return CliRunner()


def run(runner, *args):
    result = runner.invoke(main, list(args), catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


@pytest.fixture(scope="module")
def steel_fixture(tmp_path_factory):
    """Generated steel dataset plus mapping and spec files."""
    root = tmp_path_factory.mktemp("cli-steel")
    paths = {
        "csv": root / "steel.csv",
        "mapping": root / "mapping.json",
        "spec": root / "spec.json",
    }
    result = CliRunner().invoke(
        main,
        [
            "generate-steel",
            "--rows", "80",
            "--seed", "5",
            "--now", "2024-01-15 00:00:00",
            "--out", str(paths["csv"]),
            "--mapping-out", str(paths["mapping"]),
            "--spec-out", str(paths["spec"]),
        ],
        catch_exceptions=False,
    )
    assert result.exit_code == 0, result.output
    return paths


class TestGenerateCommands:
    def test_steel_outputs_load_together(self, steel_fixture):
        mapping = load_mapping(steel_fixture["mapping"])
        table = load_dataset(steel_fixture["csv"], mapping, "ms")
        assert len(table) == 80
        spec = load_spec(steel_fixture["spec"])
        assert spec.source_event == "hot_rolled"
        assert spec.target_event == "pickled"
        assert spec.as_of == NOW

    def test_generation_is_deterministic(self, runner, tmp_path, steel_fixture):
        out = tmp_path / "again.csv"
        run(
            runner, "generate-steel", "--rows", "80", "--seed", "5",
            "--now", "2024-01-15 00:00:00", "--out", str(out),
        )
        assert out.read_bytes() == steel_fixture["csv"].read_bytes()

    def test_ecommerce_fixture(self, runner, tmp_path):
        out = tmp_path / "orders.csv"
        mapping_out = tmp_path / "orders_mapping.json"
        spec_out = tmp_path / "orders_spec.json"
        run(
            runner, "generate-ecommerce", "--rows", "120", "--seed", "2",
            "--now", "2024-01-15 00:00:00",
            "--out", str(out), "--mapping-out", str(mapping_out),
            "--spec-out", str(spec_out),
        )
        mapping = load_mapping(mapping_out)
        assert mapping.id == "order_id"
        table = load_dataset(out, mapping, "ms")
        assert len(table) == 120
        spec = load_spec(spec_out)
        assert spec.target_event == "delivered_customer"

    def test_epoch_now_accepted(self, runner, tmp_path):
        out = tmp_path / "steel.csv"
        run(
            runner, "generate-steel", "--rows", "10", "--seed", "1",
            "--now", str(NOW), "--out", str(out),
        )
        assert out.exists()


class TestPreprocess:
    def test_enriched_file_round_trips(self, runner, steel_fixture, tmp_path):
        out = tmp_path / "enriched.csv"
        mapping_out = tmp_path / "enriched_mapping.json"
        result = run(
            runner, "preprocess",
            "--candidates", str(steel_fixture["csv"]),
            "--history", str(steel_fixture["csv"]),
            "--mapping", str(steel_fixture["mapping"]),
            "--spec", str(steel_fixture["spec"]),
            "--duration-unit", "ms",
            "--out", str(out),
            "--mapping-out", str(mapping_out),
        )
        assert "with similar items" in result.output
        out_mapping = load_mapping(mapping_out)
        assert out_mapping.similar_data_duration == "similar_durations"
        assert out_mapping.similar_data_ids == "similar_ids"
        enriched = load_dataset(out, out_mapping, "ms")
        assert len(enriched) == 80
        with_similar = [r for r in enriched.rows if r.similar_ids]
        assert with_similar
        for row in with_similar:
            assert row.similar_box is not None
            assert len(row.similar_box.durations) == len(row.similar_ids)
            assert all(sid.startswith("H") for sid in row.similar_ids)

    def test_mapping_out_records_duration_unit(self, runner, steel_fixture, tmp_path):
        # The enriched file stores durations in ms by default; the written
        # mapping must say so, so that later loads and exports need no flag.
        out = tmp_path / "enriched.csv"
        mapping_out = tmp_path / "enriched_mapping.json"
        run(
            runner, "preprocess",
            "--candidates", str(steel_fixture["csv"]),
            "--history", str(steel_fixture["csv"]),
            "--mapping", str(steel_fixture["mapping"]),
            "--spec", str(steel_fixture["spec"]),
            "--out", str(out),
            "--mapping-out", str(mapping_out),
        )
        out_mapping = load_mapping(mapping_out)
        assert out_mapping.duration_unit == "ms"

        # Loading without an explicit unit resolves to the recorded one.
        implicit = load_dataset(out, out_mapping)
        explicit = load_dataset(out, out_mapping, "ms")
        pairs = [
            (a.similar_box, b.similar_box)
            for a, b in zip(implicit.rows, explicit.rows)
            if b.similar_box is not None
        ]
        assert pairs
        for got, want in pairs:
            assert got is not None and got.durations == want.durations

        # A headless export of the enriched file now resolves stats at day
        # scale instead of misreading ms-valued durations as days.
        result = run(
            runner, "export",
            "--candidates", str(out),
            "--mapping", str(mapping_out),
            "--now", str(NOW),
        )
        model = json.loads(result.output)
        medians = [
            row["boxplot"]["median"]
            for group in model["groups"]
            for row in group["rows"]
            if row["boxplot"] is not None
        ]
        assert medians
        assert all(abs(m) < 1000 for m in medians)  # days, not milliseconds


class TestExport:
    def test_json_export_to_stdout(self, runner, steel_fixture):
        result = run(
            runner, "export",
            "--candidates", str(steel_fixture["csv"]),
            "--history", str(steel_fixture["csv"]),
            "--mapping", str(steel_fixture["mapping"]),
            "--spec", str(steel_fixture["spec"]),
            "--duration-unit", "ms",
            "--now", str(NOW),
        )
        model = json.loads(result.output)
        assert model["row_count"] == 80
        assert model["axis"]["reference"] == "CURRENT_TIME"

    def test_export_is_deterministic(self, runner, steel_fixture, tmp_path):
        args = [
            "export",
            "--candidates", str(steel_fixture["csv"]),
            "--history", str(steel_fixture["csv"]),
            "--mapping", str(steel_fixture["mapping"]),
            "--spec", str(steel_fixture["spec"]),
            "--duration-unit", "ms",
            "--now", str(NOW),
        ]
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        run(runner, *args, "--out", str(first))
        run(runner, *args, "--out", str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_csv_export_with_saved_state(self, runner, steel_fixture, tmp_path):
        state = tmp_path / "state.json"
        state.write_text(
            json.dumps(
                {
                    "view": {
                        "now_ms": NOW,
                        "visible_events": ["shipping"],
                        "sort": [{"target": "coil_width_mm", "direction": "descending"}],
                        "show_boxplot": False,
                    }
                }
            ),
            encoding="utf-8",
        )
        result = run(
            runner, "export",
            "--candidates", str(steel_fixture["csv"]),
            "--history", str(steel_fixture["csv"]),
            "--mapping", str(steel_fixture["mapping"]),
            "--spec", str(steel_fixture["spec"]),
            "--duration-unit", "ms",
            "--now", str(NOW),
            "--state", str(state),
            "--format", "csv",
        )
        reader = csv.reader(io.StringIO(result.output))
        header = next(reader)
        assert header[:3] == ["id", "group", "height_class"]
        assert "event:shipping" in header
        assert "event:pickled" not in header  # hidden by the saved state
        rows = list(reader)
        assert len(rows) == 80
        widths = [float(r[header.index("coil_width_mm")]) for r in rows]
        assert widths == sorted(widths, reverse=True)

    def test_bare_view_state_document_accepted(self, runner, steel_fixture, tmp_path):
        state = tmp_path / "bare.json"
        state.write_text(json.dumps({"now_ms": NOW, "selected": None}), encoding="utf-8")
        result = run(
            runner, "export",
            "--candidates", str(steel_fixture["csv"]),
            "--mapping", str(steel_fixture["mapping"]),
            "--duration-unit", "ms",
            "--now", str(NOW),
            "--state", str(state),
        )
        assert json.loads(result.output)["row_count"] == 80
