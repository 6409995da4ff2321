/**
 * DOM layer: materializes a RenderPlan as SVG and wires browser events to
 * gestures. Holds no state of its own — every redraw starts from the plan.
 */

import type {
  GroupPlan,
  HeaderPlan,
  RenderPlan,
  RowPlan,
} from "./render.js";
import type { Gesture, Pane } from "./gestures.js";
import type { StatKey, ViewModel } from "./types.js";
import { CURRENT_TIME, STAT_KEYS } from "./types.js";

export type GestureSink = (gesture: Gesture) => void;

const SVG_NS = "http://www.w3.org/2000/svg";
const AXIS_H = 26;
const FULL_ROW_H = 24;
const COMPRESSED_ROW_H = 8;
const STRIP_H = 10;
const HEADER_PAD = 6;

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, String(v));
  return el;
}

function headerHeight(header: HeaderPlan | null): number {
  if (!header) return 18;
  const strips = header.heatStrips.length * STRIP_H;
  const histograms = Object.keys(header.histograms).length * 14;
  const boxes = Object.keys(header.boxplots).length * 12;
  return 18 + strips + histograms + boxes + HEADER_PAD;
}

function rowHeight(row: RowPlan): number {
  return row.mode === "full" ? FULL_ROW_H : COMPRESSED_ROW_H;
}

function planHeight(plan: RenderPlan): number {
  let h = AXIS_H;
  for (const group of plan.groups) {
    if (group.key !== "" || plan.groups.length > 1) h += headerHeight(group.header);
    for (const row of group.rows) h += rowHeight(row);
  }
  return h + 8;
}

function drawAxis(svg: SVGSVGElement, plan: RenderPlan): void {
  const g = svgEl("g", { class: "axis" });
  g.appendChild(
    svgEl("line", { x1: 0, y1: AXIS_H - 6, x2: plan.width, y2: AXIS_H - 6 }),
  );
  for (const tick of plan.axis.ticks) {
    g.appendChild(
      svgEl("line", { x1: tick.x, y1: AXIS_H - 10, x2: tick.x, y2: AXIS_H - 2 }),
    );
    const label = svgEl("text", {
      x: tick.x,
      y: AXIS_H - 13,
      "text-anchor": "middle",
      class: "tick-label",
    });
    label.textContent = tick.label;
    g.appendChild(label);
  }
  const caption = svgEl("text", {
    x: plan.width - 4,
    y: 10,
    "text-anchor": "end",
    class: "axis-caption",
  });
  caption.textContent = plan.axis.unitLabel;
  g.appendChild(caption);
  svg.appendChild(g);
}

function drawHeader(
  svg: SVGSVGElement,
  group: GroupPlan,
  y: number,
  width: number,
): number {
  const g = svgEl("g", { class: "group-header" });
  const title = svgEl("text", { x: 4, y: y + 13, class: "group-title" });
  const count = group.header ? ` (${group.header.rowCount})` : "";
  title.textContent = `${group.key || "all rows"}${count}`;
  g.appendChild(title);
  let cursor = y + 18;
  if (group.header) {
    for (const strip of group.header.heatStrips) {
      for (const cell of strip.cells) {
        if (cell.intensity <= 0) continue;
        g.appendChild(
          svgEl("rect", {
            x: cell.x1,
            y: cursor + 1,
            width: Math.max(0.5, cell.x2 - cell.x1),
            height: STRIP_H - 2,
            fill: strip.color,
            "fill-opacity": 0.15 + 0.85 * cell.intensity,
          }),
        );
      }
      const label = svgEl("text", {
        x: 4,
        y: cursor + STRIP_H - 2,
        class: "strip-label",
      });
      label.textContent = strip.event;
      g.appendChild(label);
      cursor += STRIP_H;
    }
    for (const [column, bars] of Object.entries(group.header.histograms)) {
      let x = 4;
      for (const bar of bars) {
        const w = Math.max(2, 40 * bar.frac);
        g.appendChild(
          svgEl("rect", { x, y: cursor + 3, width: w, height: 8, fill: bar.color }),
        );
        const tl = svgEl("text", { x: x + w + 2, y: cursor + 10, class: "hist-label" });
        tl.textContent = `${bar.token}:${bar.count}`;
        g.appendChild(tl);
        x += w + 10 + 7 * `${bar.token}:${bar.count}`.length;
        if (x > width - 60) break;
      }
      const cl = svgEl("text", {
        x: width - 4,
        y: cursor + 10,
        "text-anchor": "end",
        class: "hist-column",
      });
      cl.textContent = column;
      g.appendChild(cl);
      cursor += 14;
    }
    for (const [column, box] of Object.entries(group.header.boxplots)) {
      const track = 160;
      const x0 = 8;
      const mid = cursor + 6;
      const px = (v: number): number => x0 + v * track;
      g.appendChild(
        svgEl("line", {
          x1: px(box.stats.min),
          y1: mid,
          x2: px(box.stats.max),
          y2: mid,
          class: "mini-whisker",
        }),
      );
      g.appendChild(
        svgEl("rect", {
          x: px(box.stats.q1),
          y: mid - 4,
          width: Math.max(1, px(box.stats.q3) - px(box.stats.q1)),
          height: 8,
          class: "mini-box",
        }),
      );
      g.appendChild(
        svgEl("line", {
          x1: px(box.stats.median),
          y1: mid - 4,
          x2: px(box.stats.median),
          y2: mid + 4,
          class: "mini-median",
        }),
      );
      const cl = svgEl("text", {
        x: x0 + track + 8,
        y: mid + 3,
        class: "hist-column",
      });
      cl.textContent = column;
      g.appendChild(cl);
      cursor += 12;
    }
  }
  svg.appendChild(g);
  return cursor + HEADER_PAD;
}

function drawRow(
  svg: SVGSVGElement,
  row: RowPlan,
  y: number,
  width: number,
  pane: Pane,
  sink: GestureSink,
): number {
  const h = rowHeight(row);
  const mid = y + h / 2;
  const g = svgEl("g", {
    class: `row ${row.mode}${row.selected ? " selected" : ""}`,
  });
  g.dataset["rowId"] = row.id;
  const hit = svgEl("rect", {
    x: 0,
    y,
    width,
    height: h,
    class: "row-hit",
  });
  hit.addEventListener("click", (ev) => {
    ev.stopPropagation();
    sink({ type: "row_click", id: row.id, pane });
  });
  g.appendChild(hit);
  if (row.selected) {
    g.appendChild(
      svgEl("rect", { x: 0, y, width, height: h, class: "row-highlight" }),
    );
  }
  if (row.box) {
    g.appendChild(
      svgEl("line", {
        x1: row.box.xMin,
        y1: mid,
        x2: row.box.xMax,
        y2: mid,
        class: "whisker",
      }),
    );
    g.appendChild(
      svgEl("rect", {
        x: row.box.xQ1,
        y: mid - 6,
        width: Math.max(1, row.box.xQ3 - row.box.xQ1),
        height: 12,
        class: "quartile-box",
      }),
    );
    g.appendChild(
      svgEl("line", {
        x1: row.box.xMedian,
        y1: mid - 6,
        x2: row.box.xMedian,
        y2: mid + 6,
        class: "median-line",
      }),
    );
  }
  for (const mark of row.marks) {
    g.appendChild(
      svgEl("rect", {
        x: mark.x - mark.w / 2,
        y: mid - mark.h / 2,
        width: mark.w,
        height: mark.h,
        fill: mark.color,
        class: "event-mark",
      }),
    );
  }
  if (row.statTick) {
    g.appendChild(
      svgEl("line", {
        x1: row.statTick.x,
        y1: y,
        x2: row.statTick.x,
        y2: y + h,
        class: "stat-tick",
      }),
    );
  }
  for (const circle of row.circles) {
    const c = svgEl("circle", {
      cx: circle.x,
      cy: mid,
      r: circle.r,
      fill: circle.color,
      class: `event-circle${circle.clipped ? " clipped" : ""}`,
    });
    const tip = svgEl("title");
    tip.textContent = `${row.id}: ${circle.event}`;
    c.appendChild(tip);
    g.appendChild(c);
  }
  if (row.flags.length > 0) {
    const flag = svgEl("text", {
      x: width - 4,
      y: mid + 3,
      "text-anchor": "end",
      class: "row-flag",
    });
    flag.textContent = row.flags.join(",");
    g.appendChild(flag);
  }
  svg.appendChild(g);
  return y + h;
}

/** Renders one pane's plan into `container`, replacing previous content. */
export function drawPane(
  container: HTMLElement,
  plan: RenderPlan,
  pane: Pane,
  sink: GestureSink,
): SVGSVGElement {
  const svg = svgEl("svg", {
    width: plan.width,
    height: planHeight(plan),
    class: "pane-svg",
  });
  svg.addEventListener("click", () => sink({ type: "background_click", pane }));
  svg.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const rect = svg.getBoundingClientRect();
    const frac = rect.width > 0 ? (ev.clientX - rect.left) / rect.width : 0.5;
    const [lo, hi] = plan.axis.domain;
    const anchorValue = lo + frac * (hi - lo);
    sink({
      type: "wheel_zoom",
      anchorValue,
      factor: ev.deltaY > 0 ? 1.25 : 0.8,
      pane,
    });
  });
  let dragX: number | null = null;
  svg.addEventListener("pointerdown", (ev) => {
    dragX = ev.clientX;
  });
  svg.addEventListener("pointerup", (ev) => {
    if (dragX === null) return;
    const dx = ev.clientX - dragX;
    dragX = null;
    const [lo, hi] = plan.axis.domain;
    if (Math.abs(dx) > 3 && plan.width > 0) {
      sink({ type: "drag_pan", delta: (-dx / plan.width) * (hi - lo), pane });
    }
  });
  drawAxis(svg, plan);
  let y = AXIS_H;
  for (const group of plan.groups) {
    if (group.key !== "" || plan.groups.length > 1) {
      y = drawHeader(svg, group, y, plan.width);
    }
    for (const row of group.rows) {
      y = drawRow(svg, row, y, plan.width, pane, sink);
    }
  }
  container.replaceChildren(svg);
  return svg;
}

function option(value: string, label: string, selected: boolean): HTMLOptionElement {
  const opt = document.createElement("option");
  opt.value = value;
  opt.textContent = label;
  opt.selected = selected;
  return opt;
}

function labeled(text: string, control: HTMLElement): HTMLLabelElement {
  const label = document.createElement("label");
  label.textContent = text;
  label.appendChild(control);
  return label;
}

/** Rebuilds the toolbar controls for the main pane from the view model. */
export function drawToolbar(
  container: HTMLElement,
  vm: ViewModel,
  sink: GestureSink,
): void {
  const bar = document.createElement("div");
  bar.className = "toolbar";

  const refSelect = document.createElement("select");
  refSelect.appendChild(
    option(CURRENT_TIME, "now", vm.view_state.reference === CURRENT_TIME),
  );
  for (const ev of vm.events) {
    refSelect.appendChild(option(ev.key, ev.key, vm.view_state.reference === ev.key));
  }
  refSelect.addEventListener("change", () =>
    sink({ type: "align_to", reference: refSelect.value }),
  );
  bar.appendChild(labeled("align to ", refSelect));

  const unitSelect = document.createElement("select");
  const units: Array<[number, string]> = [
    [3_600_000, "hours"],
    [86_400_000, "days"],
    [604_800_000, "weeks"],
  ];
  if (!units.some(([ms]) => ms === vm.view_state.time_unit_ms)) {
    units.unshift([vm.view_state.time_unit_ms, `${vm.view_state.time_unit_ms} ms`]);
  }
  for (const [ms, name] of units) {
    unitSelect.appendChild(
      option(String(ms), name, vm.view_state.time_unit_ms === ms),
    );
  }
  unitSelect.addEventListener("change", () =>
    sink({ type: "unit_choice", unitMs: Number(unitSelect.value) }),
  );
  bar.appendChild(labeled("unit ", unitSelect));

  for (const ev of vm.events) {
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = ev.visible;
    box.addEventListener("change", () =>
      sink({ type: "event_toggle", event: ev.key, visible: box.checked }),
    );
    bar.appendChild(labeled(`${ev.key} `, box));
  }

  const boxToggle = document.createElement("input");
  boxToggle.type = "checkbox";
  boxToggle.checked = vm.view_state.show_boxplot;
  boxToggle.addEventListener("change", () =>
    sink({ type: "boxplot_toggle", visible: boxToggle.checked }),
  );
  bar.appendChild(labeled("boxplots ", boxToggle));

  const overviewToggle = document.createElement("input");
  overviewToggle.type = "checkbox";
  overviewToggle.checked = vm.view_state.overview;
  overviewToggle.addEventListener("change", () =>
    sink({ type: "overview_toggle", enabled: overviewToggle.checked }),
  );
  bar.appendChild(labeled("overview ", overviewToggle));

  const statSelect = document.createElement("select");
  for (const stat of STAT_KEYS) {
    statSelect.appendChild(
      option(stat, stat, vm.view_state.overview_stat === stat),
    );
  }
  statSelect.addEventListener("change", () =>
    sink({ type: "stat_choice", stat: statSelect.value as StatKey }),
  );
  bar.appendChild(labeled("overview stat ", statSelect));

  const sortSelect = document.createElement("select");
  const current = vm.view_state.sort[0];
  sortSelect.appendChild(option("", "(sort by)", current === undefined));
  for (const col of vm.columns) {
    sortSelect.appendChild(option(col.name, col.name, current?.target === col.name));
  }
  for (const ev of vm.events) {
    sortSelect.appendChild(option(ev.key, ev.key, current?.target === ev.key));
  }
  for (const stat of STAT_KEYS) {
    sortSelect.appendChild(
      option(stat, `similar ${stat}`, current?.target === stat),
    );
  }
  sortSelect.addEventListener("change", () => {
    if (sortSelect.value !== "") {
      sink({ type: "header_click", target: sortSelect.value });
    }
  });
  bar.appendChild(labeled("sort ", sortSelect));

  const resetZoom = document.createElement("button");
  resetZoom.textContent = "reset zoom";
  resetZoom.addEventListener("click", () => sink({ type: "zoom_reset" }));
  bar.appendChild(resetZoom);

  const stateName = document.createElement("input");
  stateName.type = "text";
  stateName.placeholder = "state name";
  stateName.size = 12;
  const save = document.createElement("button");
  save.textContent = "save";
  save.addEventListener("click", () =>
    sink({ type: "save_click", name: stateName.value }),
  );
  const load = document.createElement("button");
  load.textContent = "load";
  load.addEventListener("click", () =>
    sink({ type: "load_click", name: stateName.value }),
  );
  bar.appendChild(stateName);
  bar.appendChild(save);
  bar.appendChild(load);

  container.replaceChildren(bar);
}

/** Renders warning strings under a pane. */
export function drawWarnings(container: HTMLElement, warnings: string[]): void {
  container.replaceChildren();
  for (const warning of warnings) {
    const div = document.createElement("div");
    div.className = "warning";
    div.textContent = warning;
    container.appendChild(div);
  }
}
