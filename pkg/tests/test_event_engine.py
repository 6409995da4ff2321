"""Temporal resolution, axis domains, event binning, and zoom/pan state."""

from __future__ import annotations

import numpy as np
import pytest
from conftest import DAY, NOW, table_of

from evtab.events import (
    DEFAULT_HEATMAP_BINS,
    ViewError,
    ViewState,
    axis_domain,
    bin_event_counts,
    pan,
    reset_zoom,
    resolve_event_value,
    zoom,
)
from evtab.model import CURRENT_TIME, MS_PER_DAY, MS_PER_HOUR, ColumnType, ItemRow
from evtab.similarity import five_number_summary

EVENTS = ("hot_rolled", "shipping", "pickled")


def row_with(events, box=None):
    return ItemRow(id="R", cells={}, events=events, similar_box=box)


def view(**overrides):
    defaults = dict(now_ms=NOW, visible_events=frozenset(EVENTS))
    defaults.update(overrides)
    return ViewState(**defaults)


class TestResolveEventValue:
    def test_event_relative_to_current_time(self):
        row = row_with({"shipping": NOW + 10 * DAY, "hot_rolled": NOW - 3 * DAY})
        v = view()
        assert resolve_event_value(row, "shipping", v) == 10.0
        assert resolve_event_value(row, "hot_rolled", v) == -3.0

    def test_reference_event_self_alignment(self):
        row = row_with({"shipping": NOW + 10 * DAY, "hot_rolled": NOW - 3 * DAY})
        v = view(reference="shipping")
        assert resolve_event_value(row, "shipping", v) == 0.0
        assert resolve_event_value(row, "hot_rolled", v) == -13.0

    def test_missing_event_is_none(self):
        row = row_with({"shipping": NOW})
        assert resolve_event_value(row, "pickled", view()) is None

    def test_missing_reference_event_blanks_everything(self):
        row = row_with({"shipping": NOW + DAY})
        v = view(reference="hot_rolled")
        assert resolve_event_value(row, "shipping", v) is None

    def test_unit_changes_scale(self):
        row = row_with({"shipping": NOW + 2 * DAY})
        assert resolve_event_value(row, "shipping", view(time_unit_ms=MS_PER_HOUR)) == 48.0
        assert resolve_event_value(row, "shipping", view(time_unit_ms=1)) == 2 * DAY

    def test_statistic_resolves_via_anchor(self):
        box = five_number_summary([2.0 * DAY, 4.0 * DAY, 6.0 * DAY])
        row = row_with({"hot_rolled": NOW - 1 * DAY}, box=box)
        v = view(boxplot_anchor="hot_rolled")
        # (anchor - now + median) / day = (-1d + 4d) / 1d
        assert resolve_event_value(row, "median", v) == 3.0
        assert resolve_event_value(row, "min", v) == 1.0
        assert resolve_event_value(row, "max", v) == 5.0

    def test_statistic_anchored_to_current_time(self):
        box = five_number_summary([4.0 * DAY])
        row = row_with({}, box=box)
        assert resolve_event_value(row, "median", view()) == 4.0

    def test_statistic_without_box_or_anchor_is_none(self):
        v = view(boxplot_anchor="hot_rolled")
        assert resolve_event_value(row_with({"hot_rolled": NOW}), "median", v) is None
        box = five_number_summary([DAY])
        assert resolve_event_value(row_with({}, box=box), "median", v) is None

    def test_statistic_relative_to_event_reference(self):
        box = five_number_summary([4.0 * DAY])
        row = row_with({"hot_rolled": NOW - 10 * DAY}, box=box)
        v = view(reference="hot_rolled")  # anchor stays CURRENT_TIME
        # (now - hot_rolled + 4d) / day = (10d + 4d) / 1d
        assert resolve_event_value(row, "median", v) == 14.0

    def test_known_events_guard(self):
        row = row_with({"shipping": NOW})
        with pytest.raises(ViewError, match="unknown key"):
            resolve_event_value(row, "nope", view(), known_events=EVENTS)
        # Statistic keys always pass the guard.
        assert resolve_event_value(row, "median", view(), known_events=EVENTS) is None
        # Without the guard an unknown key just resolves to absent.
        assert resolve_event_value(row, "nope", view()) is None

    def test_shift_invariance_for_event_references(self):
        rng = np.random.default_rng(13)
        for delta in (1, -1, 400 * DAY, -400 * DAY):
            ts = {k: NOW + int(rng.integers(-50, 50)) * DAY for k in EVENTS}
            row = row_with(ts, box=five_number_summary([3.0 * DAY, 9.0 * DAY]))
            shifted = row_with(
                {k: t + delta for k, t in ts.items()},
                box=five_number_summary([3.0 * DAY, 9.0 * DAY]),
            )
            v = view(reference="hot_rolled", boxplot_anchor="shipping")
            sv = view(now_ms=NOW + delta, reference="hot_rolled", boxplot_anchor="shipping")
            for key in ("shipping", "pickled", "median", "min", "max"):
                assert resolve_event_value(row, key, v) == resolve_event_value(shifted, key, sv)


class TestAxisDomain:
    def rows_at(self, *day_offsets):
        return [
            ItemRow(id=f"R{i}", cells={}, events={"shipping": NOW + d * DAY})
            for i, d in enumerate(day_offsets)
        ]

    def test_pads_five_percent_each_side(self):
        v = view(show_boxplot=False)
        assert axis_domain(self.rows_at(0, 10), v) == (-0.5, 10.5)

    def test_single_value_pads_one_unit(self):
        v = view(show_boxplot=False)
        assert axis_domain(self.rows_at(3), v) == (2.0, 4.0)

    def test_no_values_default_domain(self):
        assert axis_domain([], view()) == (-1.0, 1.0)
        v = view(reference="pickled")  # reference missing on every row
        assert axis_domain(self.rows_at(1, 2), v) == (-1.0, 1.0)

    def test_zoom_passes_through(self):
        v = view(zoom_domain=(-7.0, 7.0))
        assert axis_domain(self.rows_at(0, 100), v) == (-7.0, 7.0)

    def test_hidden_events_excluded(self):
        rows = [
            ItemRow(
                id="R0",
                cells={},
                events={"shipping": NOW + 10 * DAY, "hot_rolled": NOW - 100 * DAY},
            )
        ]
        v = view(visible_events=frozenset({"shipping"}), show_boxplot=False)
        lo, hi = axis_domain(rows, v)
        assert lo == 9.0 and hi == 11.0

    def test_boxplot_statistics_widen_domain(self):
        box = five_number_summary([0.0, 40.0 * DAY])
        rows = [ItemRow(id="R0", cells={}, events={"shipping": NOW + DAY}, similar_box=box)]
        lo_without, hi_without = axis_domain(rows, view(show_boxplot=False))
        lo_with, hi_with = axis_domain(rows, view(show_boxplot=True))
        assert hi_without == 2.0  # single value at 1.0, padded one unit per side
        assert hi_with > 40.0
        assert lo_with <= lo_without


class TestViewStateValidation:
    def test_defaults(self):
        v = ViewState(now_ms=NOW)
        assert v.reference == CURRENT_TIME
        assert v.time_unit_ms == MS_PER_DAY
        assert v.show_boxplot is True
        assert v.heatmap_bins == DEFAULT_HEATMAP_BINS

    def test_rejections(self):
        with pytest.raises(ViewError):
            ViewState(now_ms=NOW, time_unit_ms=0)
        with pytest.raises(ViewError):
            ViewState(now_ms=NOW, overview_stat="mean")
        with pytest.raises(ViewError):
            ViewState(now_ms=NOW, zoom_domain=(5.0, 5.0))
        with pytest.raises(ViewError):
            ViewState(now_ms=NOW, zoom_domain=(0.0, float("inf")))
        with pytest.raises(ViewError):
            ViewState(now_ms=NOW, heatmap_bins=0)
        with pytest.raises(ViewError):
            ViewState(now_ms=NOW, group_bins=(1.0,))
        with pytest.raises(ViewError):
            ViewState(now_ms=NOW, group_bins=(1.0, float("nan")))
        with pytest.raises(ViewError):
            ViewState(now_ms=NOW, group_bins=(1.0, 1.0))
        with pytest.raises(ViewError):
            ViewState(now_ms=NOW, group_bins=(2.0, 1.0))


class TestBinEventCounts:
    def test_counts_and_exact_edges(self):
        # unit=1 and integer offsets make resolved values exact integers.
        rows = [
            ItemRow(id=f"R{i}", cells={}, events={"shipping": NOW + off})
            for i, off in enumerate([0, 1, 2, 2, 9, 10])
        ]
        v = view(time_unit_ms=1)
        grid = bin_event_counts(rows, "shipping", (0.0, 10.0), 5, v)
        assert grid.event_type == "shipping"
        assert grid.bin_edges == (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
        # Half-open bins: the two 2.0 values belong to [2,4); 10.0 (the exact
        # upper edge) lands in the last, closed bin beside 9.
        assert grid.counts == (2, 2, 0, 0, 2)
        assert grid.excluded == 0

    def test_out_of_domain_reported_not_dropped(self):
        rows = [
            ItemRow(id=f"R{i}", cells={}, events={"shipping": NOW + off})
            for i, off in enumerate([-5, 3, 20])
        ]
        rows.append(ItemRow(id="R3", cells={}, events={}))  # absent: not counted anywhere
        v = view(time_unit_ms=1)
        grid = bin_event_counts(rows, "shipping", (0.0, 10.0), 2, v)
        assert sum(grid.counts) == 1
        assert grid.excluded == 2

    def test_conservation_over_random_domains(self):
        rng = np.random.default_rng(42)
        rows = [
            ItemRow(id=f"R{i}", cells={}, events={"shipping": NOW + int(rng.integers(-30, 30)) * DAY})
            for i in range(200)
        ]
        v = view()
        for _ in range(50):
            lo = float(rng.uniform(-40, 20))
            hi = lo + float(rng.uniform(0.5, 60))
            nbins = int(rng.integers(1, 30))
            grid = bin_event_counts(rows, "shipping", (lo, hi), nbins, v)
            assert sum(grid.counts) + grid.excluded == len(rows)
            assert len(grid.counts) == nbins
            assert len(grid.bin_edges) == nbins + 1

    def test_rejects_bad_arguments(self):
        with pytest.raises(ViewError, match="domain"):
            bin_event_counts([], "shipping", (1.0, 1.0), 4, view())
        with pytest.raises(ViewError, match="bin_count"):
            bin_event_counts([], "shipping", (0.0, 1.0), 0, view())


class TestZoomPan:
    def test_zoom_sets_domain_and_is_pure(self):
        v = view()
        zoomed = zoom(v, (-2.0, 5.0))
        assert zoomed.zoom_domain == (-2.0, 5.0)
        assert v.zoom_domain is None

    def test_zoom_rejects_degenerate(self):
        with pytest.raises(ViewError):
            zoom(view(), (3.0, 3.0))
        with pytest.raises(ViewError):
            zoom(view(), (3.0, float("nan")))

    def test_pan_shifts_zoomed_domain(self):
        v = zoom(view(), (0.0, 10.0))
        assert pan(v, 2.5).zoom_domain == (2.5, 12.5)
        assert pan(v, -4.0).zoom_domain == (-4.0, 6.0)

    def test_pan_without_zoom_is_noop(self):
        v = view()
        assert pan(v, 3.0) is v

    def test_reset_clears_zoom(self):
        v = zoom(view(), (0.0, 10.0))
        assert reset_zoom(v).zoom_domain is None


def test_date_column_and_event_share_axis_coordinates(mixed_table):
    """A date cell mirroring an event timestamp resolves to the same position."""
    v = ViewState(now_ms=NOW, visible_events=frozenset({"start", "finish"}))
    row = mixed_table.rows[0]  # "A": due == finish timestamp
    assert row.cells["due"] == row.events["finish"]
    resolved = resolve_event_value(row, "finish", v)
    assert resolved == (row.cells["due"] - NOW) / MS_PER_DAY


def test_mixed_table_guard_has_column_kinds(mixed_table):
    kinds = {d.name: d.kind for d in mixed_table.descriptors}
    assert kinds["due"] is ColumnType.DATE
