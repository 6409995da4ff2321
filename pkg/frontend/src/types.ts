/** JSON shapes served by the session service, mirrored verbatim. */

export const STAT_KEYS = ["min", "q1", "median", "q3", "max"] as const;
export type StatKey = (typeof STAT_KEYS)[number];

export const CURRENT_TIME = "CURRENT_TIME";

export type ColumnKind = "boolean" | "number" | "categorical" | "date";

export interface ColumnInfo {
  name: string;
  kind: ColumnKind;
  unit: string | null;
}

export interface EventInfo {
  key: string;
  visible: boolean;
}

export interface AxisInfo {
  domain: [number, number];
  reference: string;
  unit_ms: number;
}

export type Boxplot = Record<StatKey, number>;

export interface RowModel {
  id: string;
  height_class: "full" | "compressed";
  cells: Record<string, unknown>;
  /** Resolved axis values for visible events; null when unresolvable. */
  events: Record<string, number | null>;
  /** Resolved boxplot statistics, or null when absent/unanchorable. */
  boxplot: Boxplot | null;
  flags: string[];
  similar_count: number;
}

export interface EventHeatmap {
  event: string;
  /** Bin edges in axis units; counts has one fewer entry. */
  edges: number[];
  counts: number[];
  excluded: number;
}

export interface GroupAggregate {
  row_count: number;
  event_heatmaps: EventHeatmap[];
  categorical_histograms: Record<string, Record<string, number>>;
  numeric_boxplots: Record<string, Boxplot>;
}

export interface GroupModel {
  key: string;
  row_count: number;
  rows: RowModel[];
  aggregate: GroupAggregate | null;
}

export interface SortKeyDto {
  target: string;
  direction: "ascending" | "descending";
}

export type FilterDto =
  | { type: "category_in"; column: string; values: string[] }
  | { type: "range"; column: string; lo?: number | null; hi?: number | null }
  | { type: "bool_equals"; column: string; value: boolean }
  | { type: "text_contains"; column: string; text: string };

export interface ViewStateDto {
  now_ms: number;
  reference: string;
  time_unit_ms: number;
  visible_events: string[];
  show_boxplot: boolean;
  boxplot_anchor: string;
  overview: boolean;
  overview_stat: StatKey;
  zoom_domain: [number, number] | null;
  sort: SortKeyDto[];
  group_by: string | null;
  group_bins: number[] | null;
  filters: FilterDto[];
  selected: string | null;
  heatmap_bins: number;
}

export interface ViewModel {
  axis: AxisInfo;
  columns: ColumnInfo[];
  events: EventInfo[];
  groups: GroupModel[];
  row_count: number;
  selected: string | null;
  view_state: ViewStateDto;
  warnings: string[];
}

export type CommandName =
  | "set_filters"
  | "set_sort"
  | "set_group"
  | "set_reference"
  | "set_unit"
  | "toggle_event"
  | "toggle_boxplot"
  | "set_boxplot_anchor"
  | "set_zoom"
  | "pan"
  | "set_overview"
  | "set_overview_stat"
  | "select_item"
  | "clear_selection";

export function findRow(vm: ViewModel, id: string): RowModel | null {
  for (const group of vm.groups) {
    for (const row of group.rows) {
      if (row.id === id) return row;
    }
  }
  return null;
}
