/** Entry point: wires the loss slider to debounced /grid and /risk
 * fetches and renders the decision boundary on the canvas. */

import { Debouncer, FetchSequencer, sliderToL2 } from "./state.js";
import { drawGrid, GridPayload } from "./render.js";

interface Meta {
  classes: string[];
  counts: number[];
  losses: number[];
  d: number;
  xlim: [number, number] | null;
  ylim: [number, number] | null;
  l2_range: [number, number];
  resolution_range: [number, number];
  has_holdout: boolean;
}

const RES = 128;
const MIN_FETCH_INTERVAL_MS = 200; // at most 5 grid requests per second

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function init(): Promise<void> {
  const canvas = el<HTMLCanvasElement>("plot");
  const ctx = canvas.getContext("2d")!;
  const slider = el<HTMLInputElement>("l2-slider");
  const l2Label = el<HTMLElement>("l2-value");
  const riskLabel = el<HTMLElement>("risk-value");
  const banner = el<HTMLElement>("error-banner");
  const legend = el<HTMLElement>("legend");

  const showError = (msg: string) => {
    banner.textContent = msg;
    banner.hidden = false;
  };
  const clearError = () => {
    banner.hidden = true;
  };

  let meta: Meta;
  try {
    const resp = await fetch("/meta");
    if (!resp.ok) throw new Error(`/meta returned ${resp.status}`);
    meta = await resp.json();
  } catch (err) {
    showError(`could not load model metadata: ${err}`);
    return;
  }
  if (meta.d !== 2) {
    showError(`model has ${meta.d} features; the explorer needs 2`);
    return;
  }
  legend.textContent = meta.classes
    .map((name, i) => `${name} (n=${meta.counts[i]})`)
    .join("  •  ");

  const seq = new FetchSequencer();

  const refresh = async (l2: number) => {
    const ticket = seq.issue();
    try {
      const gridReq = fetch(`/grid?res=${RES}&l2=${l2}`);
      const riskReq = meta.has_holdout ? fetch(`/risk?l2=${l2}`) : null;
      const gridResp = await gridReq;
      if (!gridResp.ok) throw new Error(`/grid returned ${gridResp.status}`);
      const payload: GridPayload = await gridResp.json();
      let riskText = "n/a (no held-out data)";
      if (riskReq) {
        const riskResp = await riskReq;
        if (!riskResp.ok) throw new Error(`/risk returned ${riskResp.status}`);
        const risk = await riskResp.json();
        riskText = `${risk.risk.toFixed(4)} (n=${risk.n_holdout})`;
      }
      if (!seq.accept(ticket)) return; // superseded by a newer response
      clearError();
      drawGrid(ctx, payload, canvas.width, canvas.height);
      riskLabel.textContent = riskText;
    } catch (err) {
      if (seq.accept(ticket)) showError(String(err));
    }
  };

  const debounced = new Debouncer<number>((l2) => {
    void refresh(l2);
  }, MIN_FETCH_INTERVAL_MS);

  const onSlider = () => {
    const l2 = sliderToL2(Number(slider.value));
    l2Label.textContent = l2.toPrecision(3);
    debounced.request(l2);
  };
  slider.addEventListener("input", onSlider);
  onSlider();
}

void init();
