/** Client-side mirror of the service's request invariants.
 *
 * Invalid input disables submission with an inline explanation; the
 * server enforces the same rules again (defense in depth).
 */

import type { PredictionRequest } from "./api.js";

export interface ProfileSelection {
  age?: number;
  ageBin?: number;
  s: number;
  /** Optional second profile for compare mode. */
  compare?: { age?: number; ageBin?: number; s: number };
}

export interface ValidationResult {
  ok: boolean;
  /** Field name -> inline message for everything that blocks submission. */
  errors: Record<string, string>;
}

function checkProfile(
  profile: { age?: number; ageBin?: number; s: number },
  prefix: string,
  errors: Record<string, string>,
): void {
  if (profile.age === undefined && profile.ageBin === undefined) {
    errors[`${prefix}age`] = "provide an age or pick an age bin";
  }
  if (profile.age !== undefined && !(profile.age > 0 && Number.isFinite(profile.age))) {
    errors[`${prefix}age`] = "age must be a positive number";
  }
  if (
    profile.ageBin !== undefined &&
    (!Number.isInteger(profile.ageBin) || profile.ageBin < 0 || profile.ageBin > 2)
  ) {
    errors[`${prefix}ageBin`] = "age bin must be 0, 1, or 2";
  }
  if (!(profile.s > 0 && profile.s <= 1)) {
    errors[`${prefix}s`] = "pre-treatment level must be in (0, 1]";
  }
}

export function validateSelection(selection: ProfileSelection): ValidationResult {
  const errors: Record<string, string> = {};
  checkProfile(selection, "", errors);
  if (selection.compare) {
    checkProfile(selection.compare, "compare.", errors);
  }
  return { ok: Object.keys(errors).length === 0, errors };
}

export function validateTimes(times: number[]): ValidationResult {
  const errors: Record<string, string> = {};
  if (times.length === 0) {
    errors.times = "at least one timepoint is required";
  } else if (times.some((t) => t < 0 || !Number.isFinite(t))) {
    errors.times = "timepoints must be nonnegative numbers";
  } else if (times.some((t, i) => i > 0 && t <= times[i - 1])) {
    errors.times = "timepoints must be strictly ascending";
  }
  return { ok: Object.keys(errors).length === 0, errors };
}

export const DEFAULT_TIMES = [0, 1, 2, 4, 8, 12, 18, 24, 30, 36, 42, 48];

export function toRequest(
  profile: { age?: number; ageBin?: number; s: number },
  times: number[] = DEFAULT_TIMES,
  includeDraws?: number,
): PredictionRequest {
  const request: PredictionRequest = { s: profile.s, times };
  if (profile.ageBin !== undefined) {
    request.age_bin = profile.ageBin;
  } else {
    request.age = profile.age;
  }
  if (includeDraws !== undefined) {
    request.include_draws = includeDraws;
  }
  return request;
}
