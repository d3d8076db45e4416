/** Marching squares on a discrete class-label grid.
 *
 * The boundary between class regions is contoured on the binary field
 * "label == classIndex" with crossings placed at cell-edge midpoints
 * (labels are categorical, so there is nothing to interpolate).  The
 * output is deterministic for a given grid.
 */

export interface Segment {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

/** Per-cell segment table indexed by the 4-bit corner case
 * (bit 0 = top-left, 1 = top-right, 2 = bottom-right, 3 = bottom-left).
 * Coordinates are cell-local in [0, 1], origin at the top-left corner;
 * crossings sit at edge midpoints. */
const EDGE = {
  top: [0.5, 0.0],
  right: [1.0, 0.5],
  bottom: [0.5, 1.0],
  left: [0.0, 0.5],
} as const;

type EdgeName = keyof typeof EDGE;

const CASES: ReadonlyArray<ReadonlyArray<[EdgeName, EdgeName]>> = [
  [], // 0000
  [["left", "top"]], // 0001
  [["top", "right"]], // 0010
  [["left", "right"]], // 0011
  [["right", "bottom"]], // 0100
  [
    ["left", "top"],
    ["right", "bottom"],
  ], // 0101 saddle
  [["top", "bottom"]], // 0110
  [["left", "bottom"]], // 0111
  [["bottom", "left"]], // 1000
  [["bottom", "top"]], // 1001
  [
    ["top", "right"],
    ["bottom", "left"],
  ], // 1010 saddle
  [["bottom", "right"]], // 1011
  [["right", "left"]], // 1100
  [["right", "top"]], // 1101
  [["top", "left"]], // 1110
  [], // 1111
];

/** Boundary segments of the region "labels[row][col] == classIndex" in
 * grid index coordinates (x = column, y = row). */
export function marchingSquares(
  labels: number[][],
  classIndex: number,
): Segment[] {
  const rows = labels.length;
  if (rows < 2) return [];
  const cols = labels[0].length;
  const out: Segment[] = [];
  for (let r = 0; r < rows - 1; r++) {
    for (let c = 0; c < cols - 1; c++) {
      const tl = labels[r][c] === classIndex ? 1 : 0;
      const tr = labels[r][c + 1] === classIndex ? 1 : 0;
      const br = labels[r + 1][c + 1] === classIndex ? 1 : 0;
      const bl = labels[r + 1][c] === classIndex ? 1 : 0;
      const code = tl | (tr << 1) | (br << 2) | (bl << 3);
      for (const [a, b] of CASES[code]) {
        out.push({
          x1: c + EDGE[a][0],
          y1: r + EDGE[a][1],
          x2: c + EDGE[b][0],
          y2: r + EDGE[b][1],
        });
      }
    }
  }
  return out;
}

/** Number of grid nodes assigned to the class (region area in cells). */
export function regionSize(labels: number[][], classIndex: number): number {
  let n = 0;
  for (const row of labels) for (const v of row) if (v === classIndex) n++;
  return n;
}
