import { describe, expect, it } from "vitest";

import { massToPixels, toCanvas, viridis } from "../src/heatmap";

describe("viridis", () => {
  it("hits the reference endpoints", () => {
    expect(viridis(0)).toEqual([68, 1, 84]);
    expect(viridis(1)).toEqual([253, 231, 37]);
  });

  it("clamps out-of-range inputs", () => {
    expect(viridis(-2)).toEqual(viridis(0));
    expect(viridis(5)).toEqual(viridis(1));
  });
});

describe("massToPixels", () => {
  it("puts the peak cell at the colormap top end", () => {
    const g = 3;
    const mass = new Array(g * g).fill(0.05);
    mass[1 * g + 2] = 0.6; // ix=1, iy=2
    const pixels = massToPixels(mass, g);
    // iy=2 -> screen row 0; ix=1 -> column 1
    const offset = (0 * g + 1) * 4;
    expect([pixels[offset], pixels[offset + 1], pixels[offset + 2]])
      .toEqual(viridis(1));
    expect(pixels[offset + 3]).toBe(255);
  });

  it("orients the y axis upward", () => {
    const g = 2;
    const mass = [0, 1, 0, 0]; // peak at ix=0, iy=1 (top-left on screen)
    const pixels = massToPixels(mass, g);
    const topLeft = (0 * g + 0) * 4;
    expect([pixels[topLeft], pixels[topLeft + 1], pixels[topLeft + 2]])
      .toEqual(viridis(1));
  });

  it("fills every pixel opaquely", () => {
    const pixels = massToPixels([0.25, 0.25, 0.25, 0.25], 2);
    for (let i = 3; i < pixels.length; i += 4) {
      expect(pixels[i]).toBe(255);
    }
  });
});

describe("toCanvas", () => {
  it("maps the latent square onto canvas coordinates", () => {
    expect(toCanvas(-3, 3, 300)).toBe(0);
    expect(toCanvas(0, 3, 300)).toBe(150);
    expect(toCanvas(3, 3, 300)).toBe(300);
  });
});
