/** Deterministic color assignment for event types and categorical tokens. */

/** Saturated qualitative palette used for event-type marks. */
export const EVENT_PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#17becf",
  "#e377c2",
  "#8c564b",
  "#bcbd22",
  "#393b79",
  "#ad494a",
  "#637939",
] as const;

/** Muted palette used for categorical-token swatches in histograms. */
export const TOKEN_PALETTE = [
  "#aec7e8",
  "#ff9896",
  "#98df8a",
  "#c5b0d5",
  "#ffbb78",
  "#9edae5",
  "#f7b6d2",
  "#c49c94",
  "#dbdb8d",
  "#9c9ede",
  "#e7969c",
  "#b5cf6b",
] as const;

export interface ColorAssignment {
  /** Event type -> saturated color, in declaration order. */
  events: Map<string, string>;
  /** Categorical token -> muted color, in first-seen order. */
  tokens: Map<string, string>;
  /** Non-empty when a palette was exhausted and colors repeat. */
  warnings: string[];
}

function assign(
  keys: readonly string[],
  palette: readonly string[],
  overrides: Readonly<Record<string, string>> | undefined,
  label: string,
  warnings: string[],
): Map<string, string> {
  const out = new Map<string, string>();
  let cycled = false;
  let next = 0;
  for (const key of keys) {
    if (out.has(key)) continue;
    const override = overrides?.[key];
    if (override !== undefined) {
      out.set(key, override);
      continue;
    }
    if (next >= palette.length) cycled = true;
    out.set(key, palette[next % palette.length] ?? "#888888");
    next += 1;
  }
  if (cycled) {
    warnings.push(
      `${label} palette exhausted (${keys.length} keys, ${palette.length} colors); colors repeat`,
    );
  }
  return out;
}

/**
 * Assigns colors deterministically: same inputs always yield the same map.
 * `eventOverrides` lets the user remap individual event types; overrides
 * never trigger the exhaustion warning.
 */
export function assignColors(
  eventTypes: readonly string[],
  categoricalTokens: readonly string[] = [],
  eventOverrides?: Readonly<Record<string, string>>,
): ColorAssignment {
  const warnings: string[] = [];
  const events = assign(eventTypes, EVENT_PALETTE, eventOverrides, "event", warnings);
  const tokens = assign(categoricalTokens, TOKEN_PALETTE, undefined, "token", warnings);
  return { events, tokens, warnings };
}
