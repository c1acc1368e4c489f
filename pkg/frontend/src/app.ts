/** DOM bootstrap: wires the form, ribbon chart, class grid, and compare
 * mode together. Kept thin — all logic that matters lives in the pure
 * modules (api, validate, ribbon, svg, grid, sequencer), which is what
 * the test suite covers. */

import { ApiClient, ServiceError, type PredictResponse } from "./api.js";
import { loadClassGrid, CELL_VIEWPORT } from "./grid.js";
import { buildRibbon, buildDrawOverlay, DEFAULT_VIEWPORT } from "./ribbon.js";
import { LatestWins } from "./sequencer.js";
import { compareSvg, ribbonSvg, ribbonSvgBody, PRIMARY_STYLE } from "./svg.js";
import { toRequest, validateSelection, type ProfileSelection } from "./validate.js";

const DRAW_SUBSAMPLE = 20;

export function mountApp(root: HTMLElement, client: ApiClient): void {
  root.innerHTML = `
    <form id="profile-form">
      <label>Age <input id="age" type="number" min="1" step="1"></label>
      <label>Pre-treatment level
        <input id="s" type="range" min="0.01" max="1" step="0.01" value="0.8">
        <output id="s-value">0.80</output>
      </label>
      <label><input id="compare-toggle" type="checkbox"> Compare second profile</label>
      <span id="compare-inputs" hidden>
        <label>Age B <input id="age-b" type="number" min="1" step="1"></label>
        <label>Level B
          <input id="s-b" type="range" min="0.01" max="1" step="0.01" value="0.5">
        </label>
      </span>
      <label><input id="draws-toggle" type="checkbox"> Show raw posterior draws</label>
      <button id="submit" type="submit">Predict</button>
      <div id="errors" role="alert"></div>
    </form>
    <div id="banner" hidden>The loaded fit changed on the server — <a href="">refresh</a>.</div>
    <div id="chart"></div>
    <h2>All 12 patient classes</h2>
    <div id="grid"></div>`;

  const el = <T extends HTMLElement>(id: string): T => root.querySelector(`#${id}`) as T;
  const form = el<HTMLFormElement>("profile-form");
  const sequencer = new LatestWins<PredictResponse[]>();
  let knownFitId: string | null = null;

  const readSelection = (): ProfileSelection => {
    const ageRaw = el<HTMLInputElement>("age").value;
    const selection: ProfileSelection = {
      age: ageRaw === "" ? undefined : Number(ageRaw),
      s: Number(el<HTMLInputElement>("s").value),
    };
    if (el<HTMLInputElement>("compare-toggle").checked) {
      const ageB = el<HTMLInputElement>("age-b").value;
      selection.compare = {
        age: ageB === "" ? undefined : Number(ageB),
        s: Number(el<HTMLInputElement>("s-b").value),
      };
    }
    return selection;
  };

  const refreshValidity = (): void => {
    const { ok, errors } = validateSelection(readSelection());
    el<HTMLButtonElement>("submit").disabled = !ok;
    el("errors").textContent = ok ? "" : Object.values(errors).join("; ");
  };
  form.addEventListener("input", refreshValidity);
  el<HTMLInputElement>("compare-toggle").addEventListener("change", () => {
    el("compare-inputs").hidden = !el<HTMLInputElement>("compare-toggle").checked;
    refreshValidity();
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const selection = readSelection();
    if (!validateSelection(selection).ok) return;
    const withDraws = el<HTMLInputElement>("draws-toggle").checked
      ? DRAW_SUBSAMPLE
      : undefined;
    const requests = [client.predict(toRequest(selection, undefined, withDraws))];
    if (selection.compare) {
      requests.push(client.predict(toRequest(selection.compare)));
    }
    void sequencer
      .run(() => Promise.all(requests))
      .then((responses) => {
        if (!responses) return; // superseded by a newer submission
        const [first, second] = responses;
        if (knownFitId !== null && first.fit_id !== knownFitId) {
          el("banner").hidden = false;
        }
        knownFitId = first.fit_id;
        if (second) {
          const yMax = Math.max(first.s, second.s);
          el("chart").innerHTML = compareSvg(
            buildRibbon(first, DEFAULT_VIEWPORT, yMax),
            buildRibbon(second, DEFAULT_VIEWPORT, yMax),
          );
        } else {
          const model = buildRibbon(first);
          let svg = ribbonSvg(model);
          if (first.draw_subsample) {
            const overlay = buildDrawOverlay(first)
              .map(
                (line) =>
                  `<path class="draw" fill="none" stroke="#999" opacity="0.3" d="${line
                    .map((p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(2)},${p.y.toFixed(2)}`)
                    .join(" ")}"/>`,
              )
              .join("\n");
            svg = svg.replace("</svg>", `${overlay}\n</svg>`);
          }
          el("chart").innerHTML = svg;
        }
      })
      .catch((error: unknown) => {
        // Service errors are surfaced verbatim.
        el("errors").textContent =
          error instanceof ServiceError ? error.message : String(error);
      });
  });

  void loadClassGrid(client).then((grid) => {
    knownFitId = knownFitId ?? grid.fitId;
    el("grid").innerHTML = grid.cells
      .map(
        (cell) => `
        <figure title="${cell.hoverLabel}">
          <svg width="${CELL_VIEWPORT.width}" height="${CELL_VIEWPORT.height}">
            ${ribbonSvgBody(cell.model, PRIMARY_STYLE)}
          </svg>
          <figcaption>${cell.hoverLabel}</figcaption>
        </figure>`,
      )
      .join("\n");
  });

  refreshValidity();
}

export function main(): void {
  const root = document.getElementById("app");
  if (root) {
    mountApp(root, new ApiClient(""));
  }
}
