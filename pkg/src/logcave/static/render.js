/** Canvas rendering of the class-label grid and its boundary. */
import { marchingSquares } from "./march.js";
const REGION_FILLS = ["rgba(64, 122, 214, 0.35)", "rgba(214, 100, 64, 0.35)",
    "rgba(88, 176, 96, 0.35)", "rgba(176, 96, 176, 0.35)"];
const BOUNDARY_STROKE = "#222";
/** Affine map from grid indices (col, row) to canvas pixels.  Row 0 holds
 * the smallest y value, so the vertical axis is flipped for the canvas. */
export function gridToCanvas(col, row, res, width, height) {
    const px = (col / (res - 1)) * width;
    const py = height - (row / (res - 1)) * height;
    return [px, py];
}
export function drawGrid(ctx, payload, width, height) {
    const res = payload.resolution;
    const labels = payload.labels;
    ctx.clearRect(0, 0, width, height);
    // Shade each cell with the color of its lower-left node's class.
    const cw = width / (res - 1);
    const ch = height / (res - 1);
    for (let r = 0; r < res; r++) {
        for (let c = 0; c < res; c++) {
            ctx.fillStyle = REGION_FILLS[labels[r][c] % REGION_FILLS.length];
            const [px, py] = gridToCanvas(c, r, res, width, height);
            ctx.fillRect(px - cw / 2, py - ch / 2, cw, ch);
        }
    }
    // Boundary of class 0 separates every pair in the two-class case; for
    // K classes each class outline is drawn (shared edges coincide).
    ctx.strokeStyle = BOUNDARY_STROKE;
    ctx.lineWidth = 1.5;
    const classes = new Set();
    for (const row of labels)
        for (const v of row)
            classes.add(v);
    for (const k of classes) {
        const segs = marchingSquares(labels, k);
        ctx.beginPath();
        for (const s of segs) {
            const [x1, y1] = gridToCanvas(s.x1, s.y1, res, width, height);
            const [x2, y2] = gridToCanvas(s.x2, s.y2, res, width, height);
            ctx.moveTo(x1, y1);
            ctx.lineTo(x2, y2);
        }
        ctx.stroke();
    }
}
