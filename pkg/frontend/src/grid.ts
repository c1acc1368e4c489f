/** 12-class overview: a small-multiple grid of median recovery shapes
 * stratified by age bin (rows) and initial-level bin (columns). */

import type { ApiClient, PatientClass, PredictResponse } from "./api.js";
import { buildRibbon, type RibbonModel, type Viewport } from "./ribbon.js";
import { DEFAULT_TIMES } from "./validate.js";

export interface GridCell {
  patientClass: PatientClass;
  response: PredictResponse;
  model: RibbonModel;
  /** Hover text showing the class's bin edges. */
  hoverLabel: string;
}

export interface ClassGrid {
  /** Exactly 12 cells: 3 age bins x 4 initial-level bins. */
  cells: GridCell[];
  fitId: string | null;
}

export const CELL_VIEWPORT: Viewport = { width: 140, height: 100, margin: 16 };

/** Representative pre-treatment level inside each initial-level bin:
 * the bin midpoint rounded to one decimal (0.2, 0.5, 0.7, 0.9). */
export function representativeS(patientClass: PatientClass): number {
  const [lo, hi] = patientClass.init_range;
  return Math.round(((lo + hi) / 2) * 10) / 10;
}

export function hoverLabel(patientClass: PatientClass): string {
  const [aLo, aHi] = patientClass.age_range;
  const [iLo, iHi] = patientClass.init_range;
  const age = aHi === null ? `age ≥ ${aLo}` : `age ${aLo}–${aHi}`;
  return `${age}, initial level ${iLo}–${iHi}`;
}

export function buildGridCell(patientClass: PatientClass, response: PredictResponse): GridCell {
  return {
    patientClass,
    response,
    model: buildRibbon(response, CELL_VIEWPORT),
    hoverLabel: hoverLabel(patientClass),
  };
}

export async function loadClassGrid(
  client: ApiClient,
  times: number[] = DEFAULT_TIMES,
  sFor: (c: PatientClass) => number = representativeS,
): Promise<ClassGrid> {
  const catalog = await client.classes();
  const cells = await Promise.all(
    catalog.classes.map(async (patientClass) => {
      const response = await client.predict({
        age_bin: patientClass.age_bin,
        init_bin: patientClass.init_bin,
        s: sFor(patientClass),
        times,
      });
      return buildGridCell(patientClass, response);
    }),
  );
  return { cells, fitId: catalog.fit_id };
}

/** A cell's median must be nondecreasing for t>0 (positions only —
 * screen y decreases as the value rises). */
export function medianNondecreasing(cell: GridCell): boolean {
  const median = cell.response.quantiles["0.5"] ?? [];
  const { times } = cell.response;
  for (let i = 2; i < median.length; i++) {
    if (times[i - 1] > 0 && median[i] < median[i - 1] - 1e-9) return false;
  }
  return true;
}
