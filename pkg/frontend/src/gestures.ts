/**
 * Gesture -> service-command translation.
 *
 * Every valid gesture maps to exactly one action; anything malformed or
 * inconsistent with the current view model is ignored with a reason. No
 * analytic state lives here — validation reads only the latest view model.
 */

import type {
  CommandName,
  FilterDto,
  StatKey,
  ViewModel,
} from "./types.js";
import { CURRENT_TIME, STAT_KEYS, findRow } from "./types.js";

export type Pane = "main" | "similar";

export type Gesture =
  | { type: "row_click"; id: string; pane?: Pane }
  | { type: "background_click"; pane?: Pane }
  | { type: "header_click"; target: string; pane?: Pane }
  | { type: "wheel_zoom"; anchorValue: number; factor: number; pane?: Pane }
  | { type: "zoom_reset"; pane?: Pane }
  | { type: "drag_pan"; delta: number; pane?: Pane }
  | { type: "event_toggle"; event: string; visible?: boolean; pane?: Pane }
  | { type: "boxplot_toggle"; visible?: boolean; pane?: Pane }
  | { type: "align_to"; reference: string; pane?: Pane }
  | { type: "anchor_to"; anchor: string; pane?: Pane }
  | { type: "unit_choice"; unitMs: number; pane?: Pane }
  | { type: "overview_toggle"; enabled: boolean; pane?: Pane }
  | { type: "stat_choice"; stat: string; pane?: Pane }
  | { type: "group_choice"; column: string | null; binEdges?: number[]; pane?: Pane }
  | { type: "filter_edit"; filters: FilterDto[]; pane?: Pane }
  | { type: "save_click"; name: string; pane?: Pane }
  | { type: "load_click"; name: string; pane?: Pane };

export type ServiceAction =
  | {
      kind: "command";
      pane: Pane;
      command: CommandName;
      payload: Record<string, unknown>;
    }
  | { kind: "save-state"; pane: Pane; name: string }
  | { kind: "load-state"; pane: Pane; name: string }
  | { kind: "ignore"; reason: string };

const STATE_NAME = /^[A-Za-z0-9][A-Za-z0-9._-]{0,63}$/;

function ignore(reason: string): ServiceAction {
  return { kind: "ignore", reason };
}

function command(
  pane: Pane,
  name: CommandName,
  payload: Record<string, unknown>,
): ServiceAction {
  return { kind: "command", pane, command: name, payload };
}

function sortTargets(vm: ViewModel): Set<string> {
  const targets = new Set<string>(STAT_KEYS);
  for (const col of vm.columns) targets.add(col.name);
  for (const ev of vm.events) targets.add(ev.key);
  return targets;
}

function isEventKey(vm: ViewModel, key: string): boolean {
  return vm.events.some((e) => e.key === key);
}

function columnKind(vm: ViewModel, name: string): string | null {
  const col = vm.columns.find((c) => c.name === name);
  return col ? col.kind : null;
}

function ascendingFinite(edges: number[]): boolean {
  if (edges.length < 2) return false;
  for (let i = 0; i < edges.length; i++) {
    const v = edges[i];
    if (v === undefined || !Number.isFinite(v)) return false;
    if (i > 0 && v <= (edges[i - 1] as number)) return false;
  }
  return true;
}

function validFilter(vm: ViewModel, f: FilterDto): boolean {
  const kind = columnKind(vm, f.column);
  if (kind === null) return false;
  switch (f.type) {
    case "category_in":
      return Array.isArray(f.values) && f.values.every((v) => typeof v === "string");
    case "range": {
      const ok = (v: number | null | undefined): boolean =>
        v === null || v === undefined || Number.isFinite(v);
      return ok(f.lo) && ok(f.hi);
    }
    case "bool_equals":
      return typeof f.value === "boolean";
    case "text_contains":
      return typeof f.text === "string";
    default:
      return false;
  }
}

/**
 * Translates one user gesture into at most one service action, validated
 * against the view model currently on screen.
 */
export function dispatchGesture(gesture: Gesture, vm: ViewModel): ServiceAction {
  const pane: Pane = gesture.pane ?? "main";
  switch (gesture.type) {
    case "row_click": {
      if (!findRow(vm, gesture.id)) return ignore(`unknown row ${gesture.id}`);
      return command(pane, "select_item", { id: gesture.id });
    }
    case "background_click":
      return command(pane, "clear_selection", {});
    case "header_click": {
      if (!sortTargets(vm).has(gesture.target)) {
        return ignore(`unknown sort target ${gesture.target}`);
      }
      const primary = vm.view_state.sort[0];
      const direction =
        primary &&
        primary.target === gesture.target &&
        primary.direction === "ascending"
          ? "descending"
          : "ascending";
      return command(pane, "set_sort", {
        sort: [{ target: gesture.target, direction }],
      });
    }
    case "wheel_zoom": {
      const { anchorValue, factor } = gesture;
      if (!Number.isFinite(anchorValue)) return ignore("non-finite zoom anchor");
      if (!Number.isFinite(factor) || factor <= 0) {
        return ignore("invalid zoom factor");
      }
      const [lo, hi] = vm.axis.domain;
      const newLo = anchorValue + (lo - anchorValue) * factor;
      const newHi = anchorValue + (hi - anchorValue) * factor;
      if (!(newHi > newLo)) return ignore("degenerate zoom domain");
      return command(pane, "set_zoom", { domain: [newLo, newHi] });
    }
    case "zoom_reset":
      return command(pane, "set_zoom", { domain: null });
    case "drag_pan": {
      if (!Number.isFinite(gesture.delta)) return ignore("non-finite pan delta");
      if (gesture.delta === 0) return ignore("zero pan delta");
      return command(pane, "pan", { delta: gesture.delta });
    }
    case "event_toggle": {
      if (!isEventKey(vm, gesture.event)) {
        return ignore(`unknown event ${gesture.event}`);
      }
      const payload: Record<string, unknown> = { event: gesture.event };
      if (gesture.visible !== undefined) payload["visible"] = gesture.visible;
      return command(pane, "toggle_event", payload);
    }
    case "boxplot_toggle": {
      const payload: Record<string, unknown> = {};
      if (gesture.visible !== undefined) payload["visible"] = gesture.visible;
      return command(pane, "toggle_boxplot", payload);
    }
    case "align_to": {
      const ref = gesture.reference;
      if (ref !== CURRENT_TIME && !isEventKey(vm, ref)) {
        return ignore(`unknown reference ${ref}`);
      }
      return command(pane, "set_reference", { reference: ref });
    }
    case "anchor_to": {
      const anchor = gesture.anchor;
      if (anchor !== CURRENT_TIME && !isEventKey(vm, anchor)) {
        return ignore(`unknown anchor ${anchor}`);
      }
      return command(pane, "set_boxplot_anchor", { anchor });
    }
    case "unit_choice": {
      if (!Number.isFinite(gesture.unitMs) || gesture.unitMs <= 0) {
        return ignore("invalid unit");
      }
      return command(pane, "set_unit", { unit_ms: gesture.unitMs });
    }
    case "overview_toggle":
      return command(pane, "set_overview", { enabled: gesture.enabled });
    case "stat_choice": {
      if (!(STAT_KEYS as readonly string[]).includes(gesture.stat)) {
        return ignore(`unknown statistic ${gesture.stat}`);
      }
      return command(pane, "set_overview_stat", { stat: gesture.stat as StatKey });
    }
    case "group_choice": {
      if (gesture.column === null) {
        return command(pane, "set_group", { column: null });
      }
      const kind = columnKind(vm, gesture.column);
      if (kind === null) return ignore(`unknown column ${gesture.column}`);
      const payload: Record<string, unknown> = { column: gesture.column };
      if (kind === "number" || kind === "date") {
        if (!gesture.binEdges || !ascendingFinite(gesture.binEdges)) {
          return ignore(`column ${gesture.column} needs ascending bin edges`);
        }
        payload["bin_edges"] = gesture.binEdges;
      } else if (gesture.binEdges) {
        return ignore(`column ${gesture.column} does not take bin edges`);
      }
      return command(pane, "set_group", payload);
    }
    case "filter_edit": {
      if (!gesture.filters.every((f) => validFilter(vm, f))) {
        return ignore("invalid filter");
      }
      return command(pane, "set_filters", { filters: gesture.filters });
    }
    case "save_click": {
      if (!STATE_NAME.test(gesture.name)) return ignore("invalid state name");
      return { kind: "save-state", pane, name: gesture.name };
    }
    case "load_click": {
      if (!STATE_NAME.test(gesture.name)) return ignore("invalid state name");
      return { kind: "load-state", pane, name: gesture.name };
    }
    default:
      return ignore("unrecognized gesture");
  }
}
