/** Render ribbon/grid models as SVG strings (framework-free). */

import type { Point, RibbonModel, Viewport } from "./ribbon.js";
import { DEFAULT_VIEWPORT } from "./ribbon.js";

function fmt(value: number): string {
  return Number(value.toFixed(2)).toString();
}

function pathOf(points: Point[]): string {
  return points.map((p, i) => `${i === 0 ? "M" : "L"}${fmt(p.x)},${fmt(p.y)}`).join(" ");
}

function polygonOf(points: Point[]): string {
  return points.map((p) => `${fmt(p.x)},${fmt(p.y)}`).join(" ");
}

export interface RibbonStyle {
  outerFill: string;
  innerFill: string;
  medianStroke: string;
  label?: string;
}

export const PRIMARY_STYLE: RibbonStyle = {
  outerFill: "#c6dbef",
  innerFill: "#6baed6",
  medianStroke: "#d62728",
  label: "profile A",
};

export const COMPARE_STYLE: RibbonStyle = {
  outerFill: "#fdd0a2",
  innerFill: "#fd8d3c",
  medianStroke: "#7f2704",
  label: "profile B",
};

export function ribbonSvgBody(model: RibbonModel, style: RibbonStyle = PRIMARY_STYLE): string {
  const parts: string[] = [];
  if (model.outerBand.length) {
    parts.push(
      `<polygon class="band-outer" fill="${style.outerFill}" points="${polygonOf(model.outerBand)}"/>`,
    );
  }
  if (model.innerBand.length) {
    parts.push(
      `<polygon class="band-inner" fill="${style.innerFill}" points="${polygonOf(model.innerBand)}"/>`,
    );
  }
  if (model.median.length) {
    parts.push(
      `<path class="median" stroke="${style.medianStroke}" fill="none" d="${pathOf(model.median)}"/>`,
    );
  }
  parts.push(
    `<circle class="s-marker" cx="${fmt(model.sMarker.x)}" cy="${fmt(model.sMarker.y)}" r="3"/>`,
  );
  return parts.join("\n");
}

export function axesSvg(model: RibbonModel, viewport: Viewport = DEFAULT_VIEWPORT): string {
  const { margin, width, height } = viewport;
  const bottom = height - margin;
  const parts = [
    `<line class="axis" x1="${margin}" y1="${bottom}" x2="${width - margin}" y2="${bottom}"/>`,
    `<line class="axis" x1="${margin}" y1="${margin}" x2="${margin}" y2="${bottom}"/>`,
  ];
  for (const tick of model.xTicks) {
    parts.push(
      `<text class="tick-x" x="${fmt(tick.x)}" y="${bottom + 14}" text-anchor="middle">${tick.label}</text>`,
    );
  }
  for (const tick of model.yTicks) {
    parts.push(
      `<text class="tick-y" x="${margin - 6}" y="${fmt(tick.y)}" text-anchor="end">${tick.label}</text>`,
    );
  }
  return parts.join("\n");
}

export function ribbonSvg(
  model: RibbonModel,
  viewport: Viewport = DEFAULT_VIEWPORT,
  style: RibbonStyle = PRIMARY_STYLE,
): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${viewport.width}" height="${viewport.height}" viewBox="0 0 ${viewport.width} ${viewport.height}">`,
    axesSvg(model, viewport),
    ribbonSvgBody(model, style),
    "</svg>",
  ].join("\n");
}

/** Compare mode: two ribbons over one shared axis, with a legend. */
export function compareSvg(
  a: RibbonModel,
  b: RibbonModel,
  viewport: Viewport = DEFAULT_VIEWPORT,
): string {
  const legend = [
    `<rect x="${viewport.width - 110}" y="8" width="10" height="10" fill="${PRIMARY_STYLE.innerFill}"/>`,
    `<text x="${viewport.width - 96}" y="17">${PRIMARY_STYLE.label}</text>`,
    `<rect x="${viewport.width - 110}" y="24" width="10" height="10" fill="${COMPARE_STYLE.innerFill}"/>`,
    `<text x="${viewport.width - 96}" y="33">${COMPARE_STYLE.label}</text>`,
  ].join("\n");
  // Shared axis: ticks come from whichever profile has the higher ceiling.
  const axisModel = a.yMax >= b.yMax ? a : b;
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${viewport.width}" height="${viewport.height}" viewBox="0 0 ${viewport.width} ${viewport.height}">`,
    axesSvg(axisModel, viewport),
    ribbonSvgBody(a, PRIMARY_STYLE),
    ribbonSvgBody(b, COMPARE_STYLE),
    legend,
    "</svg>",
  ].join("\n");
}
