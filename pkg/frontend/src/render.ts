/**
 * Pure view-model -> draw-plan computation.
 *
 * Horizontal positions are a single affine map from the axis domain onto
 * [0, width] pixels with no outer padding, so equal resolved values always
 * land on equal x. Vertical layout is left to the DOM layer; the plan only
 * fixes x coordinates, sizes, and colors.
 */

import type {
  Boxplot,
  EventHeatmap,
  GroupModel,
  RowModel,
  StatKey,
  ViewModel,
} from "./types.js";
import { CURRENT_TIME } from "./types.js";
import type { ColorAssignment } from "./colors.js";
import { assignColors } from "./colors.js";

export const CIRCLE_RADIUS = 5;
export const MARK_WIDTH = 3;
export const MARK_HEIGHT = 4;

export interface CirclePrimitive {
  kind: "circle";
  event: string;
  x: number;
  r: number;
  color: string;
  clipped: boolean;
}

export interface MarkPrimitive {
  kind: "mark";
  event: string;
  x: number;
  w: number;
  h: number;
  color: string;
  clipped: boolean;
}

export interface BoxPrimitive {
  kind: "box";
  /** Whisker span. */
  xMin: number;
  xMax: number;
  /** Quartile box span and median line. */
  xQ1: number;
  xQ3: number;
  xMedian: number;
  clipped: boolean;
}

export interface StatTickPrimitive {
  kind: "stat_tick";
  stat: StatKey;
  x: number;
  clipped: boolean;
}

export interface AxisTick {
  x: number;
  label: string;
}

export interface HeatCell {
  x1: number;
  x2: number;
  /** In [0, 1], normalized to the hottest bin of this event within the group. */
  intensity: number;
}

export interface HeatStripPlan {
  event: string;
  color: string;
  cells: HeatCell[];
  excluded: number;
}

export interface HistogramBarPlan {
  token: string;
  count: number;
  /** In [0, 1], normalized to the tallest bar of this column within the group. */
  frac: number;
  color: string;
}

export interface HeaderBoxPlan {
  /** Boxplot statistics normalized per column across all groups, in [0, 1]. */
  stats: Boxplot;
}

export interface HeaderPlan {
  rowCount: number;
  heatStrips: HeatStripPlan[];
  histograms: Record<string, HistogramBarPlan[]>;
  boxplots: Record<string, HeaderBoxPlan>;
}

export interface RowPlan {
  id: string;
  mode: "full" | "compressed";
  circles: CirclePrimitive[];
  marks: MarkPrimitive[];
  box: BoxPrimitive | null;
  statTick: StatTickPrimitive | null;
  selected: boolean;
  flags: string[];
  similarCount: number;
}

export interface GroupPlan {
  key: string;
  header: HeaderPlan | null;
  rows: RowPlan[];
}

export interface AxisPlan {
  domain: [number, number];
  ticks: AxisTick[];
  /** e.g. "days from shipping" or "hours from now". */
  unitLabel: string;
}

export interface RenderPlan {
  width: number;
  axis: AxisPlan;
  groups: GroupPlan[];
  warnings: string[];
}

const UNIT_NAMES: ReadonlyMap<number, string> = new Map([
  [1, "ms"],
  [1000, "seconds"],
  [60_000, "minutes"],
  [3_600_000, "hours"],
  [86_400_000, "days"],
  [604_800_000, "weeks"],
]);

export function unitName(unitMs: number): string {
  return UNIT_NAMES.get(unitMs) ?? `${unitMs} ms`;
}

export function axisUnitLabel(unitMs: number, reference: string): string {
  const ref = reference === CURRENT_TIME ? "now" : reference;
  return `${unitName(unitMs)} from ${ref}`;
}

/** Affine value->pixel map over [lo, hi] -> [0, width]; clamps to pane edges. */
export class Scale {
  private readonly lo: number;
  private readonly span: number;
  readonly width: number;

  constructor(domain: [number, number], width: number) {
    this.lo = domain[0];
    this.span = domain[1] - domain[0];
    this.width = width;
  }

  raw(value: number): number {
    if (this.span <= 0) return this.width / 2;
    return ((value - this.lo) / this.span) * this.width;
  }

  clamped(value: number): { x: number; clipped: boolean } {
    const x = this.raw(value);
    if (!Number.isFinite(x)) return { x: this.width / 2, clipped: true };
    if (x < 0) return { x: 0, clipped: true };
    if (x > this.width) return { x: this.width, clipped: true };
    return { x, clipped: false };
  }
}

function niceStep(rough: number): number {
  if (!(rough > 0) || !Number.isFinite(rough)) return 1;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const frac = rough / mag;
  if (frac <= 1) return mag;
  if (frac <= 2) return 2 * mag;
  if (frac <= 5) return 5 * mag;
  return 10 * mag;
}

function formatSigned(v: number): string {
  const rounded = Math.abs(v) < 1e-12 ? 0 : v;
  const text = Number.isInteger(rounded)
    ? String(rounded)
    : String(Number(rounded.toPrecision(6)));
  return rounded > 0 ? `+${text}` : text;
}

export function axisTicks(
  domain: [number, number],
  scale: Scale,
  maxTicks = 6,
): AxisTick[] {
  const [lo, hi] = domain;
  if (!(hi > lo)) {
    return [{ x: scale.width / 2, label: formatSigned(lo) }];
  }
  const step = niceStep((hi - lo) / Math.max(1, maxTicks - 1));
  const ticks: AxisTick[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    const { x } = scale.clamped(v);
    ticks.push({ x, label: formatSigned(v) });
  }
  return ticks;
}

function planFullRow(
  row: RowModel,
  scale: Scale,
  colors: ColorAssignment,
  showBoxplot: boolean,
  selected: string | null,
): RowPlan {
  const circles: CirclePrimitive[] = [];
  for (const [event, value] of Object.entries(row.events)) {
    if (value === null) continue;
    const { x, clipped } = scale.clamped(value);
    circles.push({
      kind: "circle",
      event,
      x,
      r: CIRCLE_RADIUS,
      color: colors.events.get(event) ?? "#888888",
      clipped,
    });
  }
  let box: BoxPrimitive | null = null;
  if (showBoxplot && row.boxplot) {
    const b = row.boxplot;
    const pMin = scale.clamped(b.min);
    const pQ1 = scale.clamped(b.q1);
    const pMed = scale.clamped(b.median);
    const pQ3 = scale.clamped(b.q3);
    const pMax = scale.clamped(b.max);
    box = {
      kind: "box",
      xMin: pMin.x,
      xMax: pMax.x,
      xQ1: pQ1.x,
      xQ3: pQ3.x,
      xMedian: pMed.x,
      clipped:
        pMin.clipped || pQ1.clipped || pMed.clipped || pQ3.clipped || pMax.clipped,
    };
  }
  return {
    id: row.id,
    mode: "full",
    circles,
    marks: [],
    box,
    statTick: null,
    selected: row.id === selected,
    flags: row.flags,
    similarCount: row.similar_count,
  };
}

function planCompressedRow(
  row: RowModel,
  scale: Scale,
  colors: ColorAssignment,
  stat: StatKey,
  selected: string | null,
): RowPlan {
  const marks: MarkPrimitive[] = [];
  for (const [event, value] of Object.entries(row.events)) {
    if (value === null) continue;
    const { x, clipped } = scale.clamped(value);
    marks.push({
      kind: "mark",
      event,
      x,
      w: MARK_WIDTH,
      h: MARK_HEIGHT,
      color: colors.events.get(event) ?? "#888888",
      clipped,
    });
  }
  let statTick: StatTickPrimitive | null = null;
  if (row.boxplot) {
    const { x, clipped } = scale.clamped(row.boxplot[stat]);
    statTick = { kind: "stat_tick", stat, x, clipped };
  }
  return {
    id: row.id,
    mode: "compressed",
    circles: [],
    marks,
    box: null,
    statTick,
    selected: row.id === selected,
    flags: row.flags,
    similarCount: row.similar_count,
  };
}

function planHeatStrip(
  hm: EventHeatmap,
  scale: Scale,
  colors: ColorAssignment,
): HeatStripPlan {
  const maxCount = hm.counts.reduce((a, b) => Math.max(a, b), 0);
  const cells: HeatCell[] = [];
  for (let i = 0; i < hm.counts.length; i++) {
    const lo = hm.edges[i];
    const hi = hm.edges[i + 1];
    if (lo === undefined || hi === undefined) continue;
    const count = hm.counts[i] ?? 0;
    cells.push({
      x1: scale.clamped(lo).x,
      x2: scale.clamped(hi).x,
      intensity: maxCount > 0 ? count / maxCount : 0,
    });
  }
  return {
    event: hm.event,
    color: colors.events.get(hm.event) ?? "#888888",
    cells,
    excluded: hm.excluded,
  };
}

/** Per-column value extent across every group, for cross-group normalization. */
function numericExtents(groups: GroupModel[]): Map<string, [number, number]> {
  const extents = new Map<string, [number, number]>();
  for (const group of groups) {
    const agg = group.aggregate;
    if (!agg) continue;
    for (const [column, box] of Object.entries(agg.numeric_boxplots)) {
      const prev = extents.get(column);
      const lo = prev ? Math.min(prev[0], box.min) : box.min;
      const hi = prev ? Math.max(prev[1], box.max) : box.max;
      extents.set(column, [lo, hi]);
    }
  }
  return extents;
}

function planHeader(
  group: GroupModel,
  scale: Scale,
  colors: ColorAssignment,
  extents: Map<string, [number, number]>,
): HeaderPlan | null {
  const agg = group.aggregate;
  if (!agg) return null;
  const heatStrips = agg.event_heatmaps.map((hm) => planHeatStrip(hm, scale, colors));
  const histograms: Record<string, HistogramBarPlan[]> = {};
  for (const [column, byToken] of Object.entries(agg.categorical_histograms)) {
    const entries = Object.entries(byToken).sort(
      (a, b) => b[1] - a[1] || (a[0] < b[0] ? -1 : 1),
    );
    const maxCount = entries.reduce((m, [, c]) => Math.max(m, c), 0);
    histograms[column] = entries.map(([token, count]) => ({
      token,
      count,
      frac: maxCount > 0 ? count / maxCount : 0,
      color: colors.tokens.get(token) ?? "#cccccc",
    }));
  }
  const boxplots: Record<string, HeaderBoxPlan> = {};
  for (const [column, box] of Object.entries(agg.numeric_boxplots)) {
    const [lo, hi] = extents.get(column) ?? [box.min, box.max];
    const span = hi - lo;
    const norm = (v: number): number => (span > 0 ? (v - lo) / span : 0.5);
    boxplots[column] = {
      stats: {
        min: norm(box.min),
        q1: norm(box.q1),
        median: norm(box.median),
        q3: norm(box.q3),
        max: norm(box.max),
      },
    };
  }
  return { rowCount: agg.row_count, heatStrips, histograms, boxplots };
}

function collectTokens(vm: ViewModel): string[] {
  const tokens: string[] = [];
  const seen = new Set<string>();
  for (const group of vm.groups) {
    const agg = group.aggregate;
    if (!agg) continue;
    for (const byToken of Object.values(agg.categorical_histograms)) {
      for (const token of Object.keys(byToken)) {
        if (!seen.has(token)) {
          seen.add(token);
          tokens.push(token);
        }
      }
    }
  }
  return tokens.sort();
}

/**
 * Computes the complete draw plan for one pane.
 *
 * Guarantees: every full row gets one circle per visible resolved event and
 * never compressed marks; every compressed row gets marks and at most one
 * statistic tick and never circles; all x positions come from one shared
 * affine scale; out-of-pane positions are clamped to the edge and flagged
 * `clipped` rather than erroring.
 */
export function renderView(
  vm: ViewModel,
  width: number,
  colors?: ColorAssignment,
): RenderPlan {
  const palette =
    colors ??
    assignColors(
      vm.events.map((e) => e.key),
      collectTokens(vm),
    );
  const scale = new Scale(vm.axis.domain, width);
  const extents = numericExtents(vm.groups);
  const stat = vm.view_state.overview_stat;
  const showBoxplot = vm.view_state.show_boxplot;
  const groups: GroupPlan[] = vm.groups.map((group) => ({
    key: group.key,
    header: planHeader(group, scale, palette, extents),
    rows: group.rows.map((row) =>
      row.height_class === "full"
        ? planFullRow(row, scale, palette, showBoxplot, vm.selected)
        : planCompressedRow(row, scale, palette, stat, vm.selected),
    ),
  }));
  return {
    width,
    axis: {
      domain: vm.axis.domain,
      ticks: axisTicks(vm.axis.domain, scale),
      unitLabel: axisUnitLabel(vm.axis.unit_ms, vm.axis.reference),
    },
    groups,
    warnings: [...vm.warnings, ...palette.warnings],
  };
}
