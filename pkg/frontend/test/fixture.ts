/** Shared view-model fixtures for tests. */

import type {
  Boxplot,
  GroupModel,
  RowModel,
  ViewModel,
  ViewStateDto,
} from "../src/types.js";

export const DAY_MS = 86_400_000;

export function baseViewState(overrides: Partial<ViewStateDto> = {}): ViewStateDto {
  return {
    now_ms: 1_700_000_000_000,
    reference: "shipping",
    time_unit_ms: DAY_MS,
    visible_events: ["hot_rolled", "shipping", "pickled"],
    show_boxplot: true,
    boxplot_anchor: "shipping",
    overview: false,
    overview_stat: "median",
    zoom_domain: null,
    sort: [],
    group_by: null,
    group_bins: null,
    filters: [],
    selected: null,
    heatmap_bins: 5,
    ...overrides,
  };
}

export function makeRow(
  id: string,
  events: Record<string, number | null>,
  options: Partial<Pick<RowModel, "height_class" | "boxplot" | "flags" | "similar_count" | "cells">> = {},
): RowModel {
  return {
    id,
    height_class: options.height_class ?? "full",
    cells: options.cells ?? { id },
    events,
    boxplot: options.boxplot ?? null,
    flags: options.flags ?? [],
    similar_count: options.similar_count ?? 0,
  };
}

export const SAMPLE_BOX: Boxplot = { min: 1, q1: 2, median: 3, q3: 4, max: 5 };

/**
 * Three full rows over a [0, 10] day axis. r2 and r3 share an equal
 * hot_rolled value so equal resolved values must land on equal x.
 */
export function threeRowFixture(): ViewModel {
  const rows = [
    makeRow(
      "r1",
      { hot_rolled: 0, shipping: 3.2, pickled: 10 },
      { boxplot: SAMPLE_BOX, similar_count: 4 },
    ),
    makeRow("r2", { hot_rolled: 2.5, shipping: 6.25, pickled: null }),
    makeRow("r3", { hot_rolled: 2.5, shipping: null, pickled: 9.9 }),
  ];
  return makeVm(rows);
}

export function makeVm(
  rows: RowModel[],
  viewState: Partial<ViewStateDto> = {},
  groups?: GroupModel[],
): ViewModel {
  const vs = baseViewState(viewState);
  return {
    axis: { domain: [0, 10], reference: vs.reference, unit_ms: vs.time_unit_ms },
    columns: [
      { name: "steel_category", kind: "categorical", unit: null },
      { name: "coil_width_mm", kind: "number", unit: "mm" },
      { name: "urgent", kind: "boolean", unit: null },
      { name: "shipping_date", kind: "date", unit: null },
    ],
    events: [
      { key: "hot_rolled", visible: vs.visible_events.includes("hot_rolled") },
      { key: "shipping", visible: vs.visible_events.includes("shipping") },
      { key: "pickled", visible: vs.visible_events.includes("pickled") },
    ],
    groups: groups ?? [{ key: "", row_count: rows.length, rows, aggregate: null }],
    row_count: rows.length,
    selected: vs.selected,
    view_state: vs,
    warnings: [],
  };
}
