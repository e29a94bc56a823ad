import type { BeliefExport } from "./types";

// Compact viridis approximation: anchor colors sampled from the reference
// colormap, linearly interpolated.
const VIRIDIS: Array<[number, number, number]> = [
  [68, 1, 84],
  [71, 44, 122],
  [59, 81, 139],
  [44, 113, 142],
  [33, 144, 141],
  [39, 173, 129],
  [92, 200, 99],
  [170, 220, 50],
  [253, 231, 37],
];

export function viridis(t: number): [number, number, number] {
  const x = Math.min(1, Math.max(0, t)) * (VIRIDIS.length - 1);
  const i = Math.min(VIRIDIS.length - 2, Math.floor(x));
  const f = x - i;
  const a = VIRIDIS[i];
  const b = VIRIDIS[i + 1];
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}

/**
 * RGBA pixels for a row-major mass array (index = ix * G + iy, both axes
 * ascending). Screen rows run top-down, so cell (ix, iy) lands at
 * column ix, row G - 1 - iy; intensity is mass relative to the peak cell.
 */
export function massToPixels(mass: number[], resolution: number) {
  const pixels = new Uint8ClampedArray(resolution * resolution * 4);
  let peak = 0;
  for (const v of mass) peak = Math.max(peak, v);
  const scale = peak > 0 ? 1 / peak : 0;
  for (let ix = 0; ix < resolution; ix++) {
    for (let iy = 0; iy < resolution; iy++) {
      const value = mass[ix * resolution + iy] * scale;
      const [r, g, b] = viridis(value);
      const row = resolution - 1 - iy;
      const offset = (row * resolution + ix) * 4;
      pixels[offset] = r;
      pixels[offset + 1] = g;
      pixels[offset + 2] = b;
      pixels[offset + 3] = 255;
    }
  }
  return pixels;
}

/** Canvas x-position of a latent coordinate. */
export function toCanvas(value: number, bound: number, size: number): number {
  return ((value + bound) / (2 * bound)) * size;
}

/** Paint the posterior heatmap plus the unit prior circle and the MAP dot. */
export function drawHeatmap(canvas: HTMLCanvasElement, belief: BeliefExport): void {
  const g = belief.resolution;
  const bound = belief.bounds[1];
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const cells = document.createElement("canvas");
  cells.width = g;
  cells.height = g;
  const cellCtx = cells.getContext("2d");
  if (!cellCtx) return;
  cellCtx.putImageData(new ImageData(massToPixels(belief.mass, g), g, g), 0, 0);
  ctx.imageSmoothingEnabled = true;
  ctx.drawImage(cells, 0, 0, canvas.width, canvas.height);

  // unit circle of the prior, centered on the origin
  ctx.strokeStyle = "rgba(255, 255, 255, 0.8)";
  ctx.setLineDash([6, 4]);
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.arc(canvas.width / 2, canvas.height / 2,
    (canvas.width / (2 * bound)), 0, 2 * Math.PI);
  ctx.stroke();
  ctx.setLineDash([]);

  const [mx, my] = belief.map_estimate;
  const px = toCanvas(mx, bound, canvas.width);
  const py = canvas.height - toCanvas(my, bound, canvas.height);
  ctx.fillStyle = "#ff5252";
  ctx.strokeStyle = "white";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.arc(px, py, 5, 0, 2 * Math.PI);
  ctx.fill();
  ctx.stroke();
}
