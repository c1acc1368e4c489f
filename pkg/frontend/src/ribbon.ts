/** Ribbon geometry: map a /predict response onto screen coordinates.
 *
 * Pure data transformation — each plotted y value is a response field
 * divided by the viewport scale, nothing is recomputed statistically.
 * The y axis is capped at the profile's pre-treatment level S, so the
 * ribbon can never be drawn above it.
 */

import type { PredictResponse } from "./api.js";

export interface Viewport {
  width: number;
  height: number;
  /** Margin in pixels on every side. */
  margin: number;
}

export interface Point {
  x: number;
  y: number;
}

export interface RibbonModel {
  /** Quantile level -> one screen point per timepoint, same order as times. */
  lines: Record<string, Point[]>;
  /** Outer band polygon: upper quantile left-to-right then lower reversed. */
  outerBand: Point[];
  /** Inner band polygon, same construction. */
  innerBand: Point[];
  median: Point[];
  /** Marker for the known pre-treatment level at t=0. */
  sMarker: Point;
  /** Data-space ceiling used for the y axis (the profile's S). */
  yMax: number;
  xTicks: { x: number; label: string }[];
  yTicks: { y: number; label: string }[];
}

export const DEFAULT_VIEWPORT: Viewport = { width: 360, height: 240, margin: 32 };

const OUTER: [string, string] = ["0.1", "0.9"];
const INNER: [string, string] = ["0.25", "0.75"];
const MEDIAN = "0.5";

export function buildRibbon(
  response: PredictResponse,
  viewport: Viewport = DEFAULT_VIEWPORT,
  /** Shared-axis ceiling for compare mode; defaults to the profile's S. */
  yMaxOverride?: number,
): RibbonModel {
  const { times, quantiles, s } = response;
  const tMax = times[times.length - 1] || 1;
  const yMax = yMaxOverride ?? s;
  const { width, height, margin } = viewport;
  const plotW = width - 2 * margin;
  const plotH = height - 2 * margin;

  const toX = (t: number): number => margin + (t / tMax) * plotW;
  const toY = (v: number): number => margin + (1 - v / yMax) * plotH;

  const lines: Record<string, Point[]> = {};
  for (const [level, values] of Object.entries(quantiles)) {
    lines[level] = values.map((v, i) => ({ x: toX(times[i]), y: toY(v) }));
  }

  const band = (lower: string, upper: string): Point[] => {
    const lo = lines[lower];
    const hi = lines[upper];
    if (!lo || !hi) return [];
    return [...hi, ...[...lo].reverse()];
  };

  const median = lines[MEDIAN] ?? [];
  return {
    lines,
    outerBand: band(OUTER[0], OUTER[1]),
    innerBand: band(INNER[0], INNER[1]),
    median,
    sMarker: { x: toX(0), y: toY(s) },
    yMax,
    xTicks: times.map((t) => ({ x: toX(t), label: String(t) })),
    yTicks: [0, 0.25, 0.5, 0.75, 1].map((frac) => ({
      y: toY(frac * yMax),
      label: (frac * yMax).toFixed(2),
    })),
  };
}

/** Raw posterior draw overlay (toggle): one polyline per subsampled draw. */
export function buildDrawOverlay(
  response: PredictResponse,
  viewport: Viewport = DEFAULT_VIEWPORT,
): Point[][] {
  const draws = response.draw_subsample ?? [];
  const { times, s } = response;
  const tMax = times[times.length - 1] || 1;
  const { width, height, margin } = viewport;
  const plotW = width - 2 * margin;
  const plotH = height - 2 * margin;
  return draws.map((row) =>
    row.map((v, i) => ({
      x: margin + (times[i] / tMax) * plotW,
      y: margin + (1 - v / s) * plotH,
    })),
  );
}

/** Every screen y must sit inside the plot area: v∈[0,S] maps into it. */
export function withinEnvelope(model: RibbonModel, viewport: Viewport = DEFAULT_VIEWPORT): boolean {
  const top = viewport.margin;
  const bottom = viewport.height - viewport.margin;
  const all = Object.values(model.lines).flat();
  return all.every((p) => p.y >= top - 1e-9 && p.y <= bottom + 1e-9);
}
