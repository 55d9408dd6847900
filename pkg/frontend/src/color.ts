/** Color assignments shared by every view.
 *
 * Results get colors from one qualitative palette, identical across the
 * constellation plots, influence markers, spatial overlays, and fiber diff
 * panels. Exactly two grayscale maps exist: one for sensitivity (in-out
 * matrix) and one for dissimilarity (constellation dots). The spatial
 * overview uses a perceptually uniform map with 0 rendered white.
 */

// qualitative palette (colorbrewer Set1 minus the grays)
const QUALITATIVE = [
  "#e41a1c",
  "#377eb8",
  "#4daf4a",
  "#984ea3",
  "#ff7f00",
  "#a65628",
  "#f781bf",
  "#66c2a5",
];

export const REFERENCE_GRAY = "#808080";

export function resultColor(selectionIndex: number): string {
  return QUALITATIVE[selectionIndex % QUALITATIVE.length];
}

function hex2(v: number): string {
  const h = Math.round(v).toString(16);
  return h.length === 1 ? "0" + h : h;
}

function gray(level: number): string {
  const v = Math.max(0, Math.min(1, level));
  return "#" + hex2(v * 255) + hex2(v * 255) + hex2(v * 255);
}

/** Sensitivity grayscale: 0 -> white, 1 -> black. */
export function sensitivityShade(normalized: number): string {
  return gray(1 - normalized);
}

/** Dissimilarity grayscale for constellation dots: 0 -> black, 1 -> light. */
export function dissimilarityShade(value: number): string {
  return gray(0.15 + 0.75 * Math.max(0, Math.min(1, value)));
}

// compact plasma-like ramp, low -> yellow, high -> dark
const SPATIAL_STOPS: [number, [number, number, number]][] = [
  [0.0, [240, 249, 33]],
  [0.25, [248, 149, 64]],
  [0.5, [204, 71, 120]],
  [0.75, [126, 3, 168]],
  [1.0, [13, 8, 135]],
];

/** Occupation-ratio color: exactly 0 stays white (area never covered). */
export function spatialColor(value: number, maxValue: number): string {
  if (value <= 0) return "#ffffff";
  const t = Math.max(0, Math.min(1, value / Math.max(maxValue, 1e-12)));
  for (let i = 1; i < SPATIAL_STOPS.length; i++) {
    const [t1, c1] = SPATIAL_STOPS[i];
    const [t0, c0] = SPATIAL_STOPS[i - 1];
    if (t <= t1) {
      const f = (t - t0) / (t1 - t0);
      return (
        "#" +
        hex2(c0[0] + f * (c1[0] - c0[0])) +
        hex2(c0[1] + f * (c1[1] - c0[1])) +
        hex2(c0[2] + f * (c1[2] - c0[2]))
      );
    }
  }
  return "#0d0887";
}

/** Linear gradient endpoint pair for a constellation line. */
export function lineGradient(colorA: string, colorB: string): { from: string; to: string } {
  return { from: colorA, to: colorB };
}
