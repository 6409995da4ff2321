from __future__ import annotations

import dataclasses
import io

import pytest

from evtab.ingest import (
    MISMATCH_FLAG,
    FieldMapping,
    GeneratorConfig,
    dataset_to_csv,
    default_mapping,
    ecommerce_mapping,
    format_timestamp,
    generate_ecommerce_dataset,
    generate_steel_dataset,
    infer_column_type,
    load_dataset,
    mapping_from_dict,
    mapping_to_dict,
    parse_delimited_numbers,
    parse_timestamp,
    steel_mapping,
    write_dataset,
    ParseError,
)
from evtab.model import ColumnType
from evtab.similarity import NEGATIVE_DURATION_FLAG

from conftest import DAY, NOW


class TestParseTimestamp:
    def test_epoch(self):
        assert parse_timestamp("1970-01-01 00:00:00") == 0

    def test_date_only_is_midnight_utc(self):
        assert parse_timestamp("1970-01-02") == 86_400_000

    def test_rejects_other_shapes(self):
        for bad in ("1970/01/02", "1970-01-02T00:00:00", "02-01-1970", "today", ""):
            with pytest.raises(ParseError, match="not a timestamp"):
                parse_timestamp(bad)

    def test_rejects_impossible_dates(self):
        with pytest.raises(ParseError, match="calendar"):
            parse_timestamp("2024-13-01")
        with pytest.raises(ParseError, match="calendar"):
            parse_timestamp("2024-02-30 00:00:00")

    def test_format_round_trip(self):
        for ts in (0, 86_400_000, NOW, -86_400_000):
            assert parse_timestamp(format_timestamp(ts)) == ts

    def test_format_rejects_subsecond(self):
        with pytest.raises(ParseError, match="second resolution"):
            format_timestamp(1500)


class TestInferColumnType:
    def test_boolean_needs_alphabetic_token(self):
        assert infer_column_type(["true", "FALSE", "1"]) is ColumnType.BOOLEAN
        # all-digit 0/1 columns are numbers, not booleans
        assert infer_column_type(["0", "1", "0"]) is ColumnType.NUMBER

    def test_number(self):
        assert infer_column_type(["1", "2.5", "-3e2", ".5"]) is ColumnType.NUMBER

    def test_date(self):
        assert infer_column_type(["2017-10-02 10:56:33", "2018-01-01"]) is ColumnType.DATE

    def test_invalid_calendar_date_falls_back_to_categorical(self):
        assert infer_column_type(["2017-13-99"]) is ColumnType.CATEGORICAL

    def test_mixed_falls_back_to_categorical(self):
        assert infer_column_type(["1", "x"]) is ColumnType.CATEGORICAL

    def test_empty_tokens_ignored(self):
        assert infer_column_type(["", "3", ""]) is ColumnType.NUMBER

    def test_empty_input_is_categorical(self):
        assert infer_column_type([]) is ColumnType.CATEGORICAL
        assert infer_column_type(["", ""]) is ColumnType.CATEGORICAL


def test_parse_delimited_numbers():
    assert parse_delimited_numbers("2;4;6") == [2.0, 4.0, 6.0]
    assert parse_delimited_numbers("") == []
    assert parse_delimited_numbers("  ") == []
    with pytest.raises(ParseError, match="not a number"):
        parse_delimited_numbers("2;x;6")


class TestMappingCodec:
    def test_round_trip(self):
        mapping = steel_mapping()
        assert mapping_from_dict(mapping_to_dict(mapping)) == mapping

    def test_requires_id(self):
        with pytest.raises(ParseError, match="id"):
            mapping_from_dict({"data_columns": ["a"]})

    def test_rejects_unknown_keys(self):
        with pytest.raises(ParseError, match="unknown mapping keys"):
            mapping_from_dict({"id": "x", "similar": "y"})

    def test_duration_unit_round_trips(self):
        mapping = dataclasses.replace(SAMPLE_MAPPING, duration_unit="ms")
        assert mapping_from_dict(mapping_to_dict(mapping)) == mapping
        assert mapping_from_dict({"id": "x"}).duration_unit is None

    def test_invalid_duration_unit_rejected(self):
        with pytest.raises(ParseError, match="unknown duration unit"):
            FieldMapping(id="x", duration_unit="weeks")


SAMPLE = """id,city,width,ok,made,shipped,dur,sim
r1,porto,100.5,true,2024-01-01,2024-01-10,2;4;6,h1;h2;h3
r2,acre,90,false,2024-01-02,,4,h9
r3,,110,true,2024-01-03 06:00:00,2024-01-20,,
"""

SAMPLE_MAPPING = FieldMapping(
    id="id",
    data_columns=("city", "width", "ok"),
    event_data={"made": "made", "shipped": "shipped"},
    similar_data_duration="dur",
    similar_data_ids="sim",
)


class TestLoadDataset:
    def load(self, text=SAMPLE, mapping=SAMPLE_MAPPING, unit="days"):
        return load_dataset(io.StringIO(text), mapping, duration_unit=unit)

    def test_five_field_mapping(self):
        table = self.load()
        assert len(table) == 3
        assert table.descriptor("city").kind is ColumnType.CATEGORICAL
        assert table.descriptor("width").kind is ColumnType.NUMBER
        assert table.descriptor("ok").kind is ColumnType.BOOLEAN
        r1 = table.row("r1")
        assert r1.events["made"] == parse_timestamp("2024-01-01")
        assert r1.similar_ids == ("h1", "h2", "h3")

    def test_durations_convert_by_unit(self):
        # "2;4;6" days: median 4 days = 345,600,000 ms
        assert self.load().row("r1").similar_box.median == 345_600_000
        assert self.load(unit="hours").row("r1").similar_box.median == 4 * 3_600_000
        assert self.load(unit="ms").row("r1").similar_box.median == 4
        with pytest.raises(ParseError, match="unknown duration unit"):
            self.load(unit="weeks")

    def test_mapping_recorded_unit_used_when_no_explicit_unit(self):
        hours = dataclasses.replace(SAMPLE_MAPPING, duration_unit="hours")
        assert self.load(mapping=hours, unit=None).row("r1").similar_box.median == 4 * 3_600_000
        # An explicit argument overrides the recorded unit.
        assert self.load(mapping=hours, unit="ms").row("r1").similar_box.median == 4
        # Without either, days remain the default.
        assert self.load(unit=None).row("r1").similar_box.median == 345_600_000

    def test_writer_honors_mapping_recorded_unit(self):
        table = self.load(unit="hours")  # whole hours divide evenly either way
        hours_mapping = dataclasses.replace(SAMPLE_MAPPING, duration_unit="hours")
        text = dataset_to_csv(table, mapping=hours_mapping)
        assert ",2.0;4.0;6.0," in text.splitlines()[1]
        again = load_dataset(io.StringIO(text), hours_mapping)
        assert again.row("r1").similar_box.durations == table.row("r1").similar_box.durations

    def test_missing_event_cell_means_absent(self):
        assert "shipped" not in self.load().row("r2").events

    def test_missing_attribute_cell(self):
        assert self.load().row("r3").cells.get("city") is None
        assert self.load().row("r3").similar_box is None

    def test_unmapped_column_reports_name(self):
        mapping = FieldMapping(id="id", data_columns=("ship",))
        with pytest.raises(ParseError, match="column 'ship' not found"):
            self.load(mapping=mapping)

    def test_duplicate_header_column_rejected(self):
        text = "id,x,x\nr1,1,2\n"
        with pytest.raises(ParseError, match="'x' appears 2 times"):
            self.load(text=text, mapping=FieldMapping(id="id", data_columns=("x",)))

    def test_count_mismatch_is_flag_not_error(self):
        text = "id,dur,sim\nr1,2;4;6,h1;h2\n"
        mapping = FieldMapping(id="id", similar_data_duration="dur", similar_data_ids="sim")
        row = self.load(text=text, mapping=mapping).row("r1")
        assert MISMATCH_FLAG in row.flags
        assert row.similar_ids == ("h1", "h2")
        assert len(row.similar_box.durations) == 3

    def test_negative_duration_flagged(self):
        text = "id,dur\nr1,-2;4\n"
        mapping = FieldMapping(id="id", similar_data_duration="dur")
        row = self.load(text=text, mapping=mapping).row("r1")
        assert NEGATIVE_DURATION_FLAG in row.flags

    def test_bad_cell_names_row_and_column(self):
        text = "id,width\nr1,12\nr2,1..2\n"
        mapping = FieldMapping(id="id", data_columns=("width",))
        # inference falls back to categorical, so this loads fine...
        table = self.load(text=text, mapping=mapping)
        assert table.descriptor("width").kind is ColumnType.CATEGORICAL
        # ...but a bad timestamp in a mapped event column is a positioned error
        text = "id,made\nr1,2024-01-01\nr2,2024-99-01\n"
        mapping = FieldMapping(id="id", event_data={"made": "made"})
        with pytest.raises(ParseError, match=r"row 2, column 'made'"):
            self.load(text=text, mapping=mapping)

    def test_empty_id_rejected(self):
        text = "id,x\n,1\n"
        with pytest.raises(ParseError, match="row 1: empty id"):
            self.load(text=text, mapping=FieldMapping(id="id"))

    def test_duplicate_ids_rejected(self):
        text = "id\nr1\nr1\n"
        with pytest.raises(Exception, match="duplicate row id r1"):
            self.load(text=text, mapping=FieldMapping(id="id"))

    def test_short_rows_padded_long_rows_rejected(self):
        text = "id,x\nr1\n"
        table = self.load(text=text, mapping=FieldMapping(id="id", data_columns=("x",)))
        assert table.row("r1").cells.get("x") is None
        with pytest.raises(ParseError, match="row 1: 3 fields"):
            self.load(text="id,x\nr1,1,2\n", mapping=FieldMapping(id="id"))

    def test_no_header_rejected(self):
        with pytest.raises(ParseError, match="no header"):
            self.load(text="")

    def test_reserved_event_key_via_mapping_rejected(self):
        mapping = FieldMapping(id="id", event_data={"median": "made"})
        text = "id,made\nr1,2024-01-01\n"
        with pytest.raises(Exception, match="reserved statistic key"):
            self.load(text=text, mapping=mapping)


class TestRoundTrip:
    def test_loaded_table_round_trips(self):
        table = load_dataset(io.StringIO(SAMPLE), SAMPLE_MAPPING)
        text = dataset_to_csv(table)
        again = load_dataset(io.StringIO(text), default_mapping(table), duration_unit="ms")
        assert dataset_to_csv(again) == text
        assert [r.id for r in again.rows] == [r.id for r in table.rows]
        assert again.row("r1").similar_box == table.row("r1").similar_box

    def test_generated_tables_round_trip(self):
        table = generate_steel_dataset(GeneratorConfig(row_count=60, seed=1, now=NOW))
        text = dataset_to_csv(table)
        again = load_dataset(io.StringIO(text), steel_mapping(), duration_unit="ms")
        assert dataset_to_csv(again) == text


class TestGenerators:
    def test_deterministic_bytes(self):
        cfg = GeneratorConfig(row_count=80, seed=9, now=NOW)
        a = dataset_to_csv(generate_steel_dataset(cfg))
        b = dataset_to_csv(generate_steel_dataset(cfg))
        assert a == b
        c = dataset_to_csv(generate_ecommerce_dataset(cfg))
        d = dataset_to_csv(generate_ecommerce_dataset(cfg))
        assert c == d

    def test_zero_rows_rejected(self):
        with pytest.raises(ValueError, match="row_count"):
            GeneratorConfig(row_count=0, seed=1, now=NOW)

    def test_steel_time_invariants(self):
        table = generate_steel_dataset(GeneratorConfig(row_count=200, seed=2, now=NOW))
        candidates = [r for r in table.rows if r.id.startswith("C")]
        history = [r for r in table.rows if r.id.startswith("H")]
        assert len(candidates) + len(history) == 200
        for row in candidates:
            assert row.events["hot_rolled"] < NOW
            assert row.events["hot_rolled"] >= NOW - 30 * DAY
            assert NOW <= row.events["shipping"] <= NOW + 60 * DAY
            assert row.cells["shipping_date"] == row.events["shipping"]
            galv = row.events.get("galvanizing_planned")
            assert galv is None or galv > NOW
        for row in history:
            assert "shipping" not in row.events
            assert row.events["pickled"] <= NOW
            assert row.events["pickled"] > row.events["hot_rolled"]
        share = sum(1 for r in candidates if "galvanizing_planned" in r.events) / len(candidates)
        assert 0.25 < share < 0.55

    def test_steel_columns(self):
        table = generate_steel_dataset(GeneratorConfig(row_count=10, seed=2, now=NOW))
        kinds = {d.name: d.kind for d in table.descriptors}
        assert kinds == {
            "steel_category": ColumnType.CATEGORICAL,
            "coil_width_mm": ColumnType.NUMBER,
            "warehouse": ColumnType.CATEGORICAL,
            "urgent": ColumnType.BOOLEAN,
            "shipping_date": ColumnType.DATE,
        }
        cats = {r.cells["steel_category"] for r in table.rows}
        houses = {r.cells["warehouse"] for r in table.rows}
        assert cats <= {"DC01", "DX51D", "HC340LA", "S235JR", "S355MC"}
        assert houses <= {"W1", "W2", "W3"}

    def test_ecommerce_event_ordering(self):
        table = generate_ecommerce_dataset(GeneratorConfig(row_count=300, seed=4, now=NOW))
        delivered = 0
        for row in table.rows:
            ev = row.events
            assert ev["purchase"] <= ev["approved"] <= ev["delivered_carrier"]
            assert ev["estimated_delivery"] > ev["approved"]
            if "delivered_customer" in ev:
                delivered += 1
                assert ev["delivered_customer"] >= ev["delivered_carrier"]
        assert 0.6 < delivered / len(table) < 0.9
        assert ecommerce_mapping().id == "order_id"

    def test_written_file_loads_back(self, tmp_path):
        table = generate_ecommerce_dataset(GeneratorConfig(row_count=40, seed=4, now=NOW))
        mapping = ecommerce_mapping()
        path = tmp_path / "orders.csv"
        write_dataset(table, path, mapping=mapping)
        again = load_dataset(path, mapping, duration_unit="ms")
        assert dataset_to_csv(again, mapping=mapping) == dataset_to_csv(table, mapping=mapping)
