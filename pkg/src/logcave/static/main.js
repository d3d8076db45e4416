/** Entry point: wires the loss slider to debounced /grid and /risk
 * fetches and renders the decision boundary on the canvas. */
import { Debouncer, FetchSequencer, sliderToL2 } from "./state.js";
import { drawGrid } from "./render.js";
const RES = 128;
const MIN_FETCH_INTERVAL_MS = 200; // at most 5 grid requests per second
function el(id) {
    const node = document.getElementById(id);
    if (!node)
        throw new Error(`missing element #${id}`);
    return node;
}
async function init() {
    const canvas = el("plot");
    const ctx = canvas.getContext("2d");
    const slider = el("l2-slider");
    const l2Label = el("l2-value");
    const riskLabel = el("risk-value");
    const banner = el("error-banner");
    const legend = el("legend");
    const showError = (msg) => {
        banner.textContent = msg;
        banner.hidden = false;
    };
    const clearError = () => {
        banner.hidden = true;
    };
    let meta;
    try {
        const resp = await fetch("/meta");
        if (!resp.ok)
            throw new Error(`/meta returned ${resp.status}`);
        meta = await resp.json();
    }
    catch (err) {
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
    const refresh = async (l2) => {
        const ticket = seq.issue();
        try {
            const gridReq = fetch(`/grid?res=${RES}&l2=${l2}`);
            const riskReq = meta.has_holdout ? fetch(`/risk?l2=${l2}`) : null;
            const gridResp = await gridReq;
            if (!gridResp.ok)
                throw new Error(`/grid returned ${gridResp.status}`);
            const payload = await gridResp.json();
            let riskText = "n/a (no held-out data)";
            if (riskReq) {
                const riskResp = await riskReq;
                if (!riskResp.ok)
                    throw new Error(`/risk returned ${riskResp.status}`);
                const risk = await riskResp.json();
                riskText = `${risk.risk.toFixed(4)} (n=${risk.n_holdout})`;
            }
            if (!seq.accept(ticket))
                return; // superseded by a newer response
            clearError();
            drawGrid(ctx, payload, canvas.width, canvas.height);
            riskLabel.textContent = riskText;
        }
        catch (err) {
            if (seq.accept(ticket))
                showError(String(err));
        }
    };
    const debounced = new Debouncer((l2) => {
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
