/** Spatial view: axis-aligned slices of the occupation-ratio volume.
 *
 * The cumulative slice uses the perceptually uniform map (low coverage
 * yellow, high dark, never-covered voxels white). Selected results draw
 * their voxel masks on top in their qualitative colors.
 */

import { resultColor, spatialColor } from "../color.js";
import type { RectNode, Scene } from "../scene.js";
import type { SelectionStore } from "../state.js";
import type { SlicePayload } from "../types.js";

const PLOT = 384;

export interface ResultOverlay {
  sampleId: number;
  slice: SlicePayload;
}

export function buildSpatialScene(
  slice: SlicePayload,
  overlays: ResultOverlay[],
  store: SelectionStore,
): Scene {
  const values = slice.values;
  const nx = values.length;
  const ny = nx ? values[0].length : 0;
  const cw = PLOT / Math.max(nx, 1);
  const ch = PLOT / Math.max(ny, 1);
  const maxValue = Math.max(1, ...values.map((row) => Math.max(...row)));
  const nodes: Scene["nodes"] = [];

  for (let i = 0; i < nx; i++) {
    for (let j = 0; j < ny; j++) {
      const v = values[i][j];
      nodes.push(<RectNode>{
        kind: "rect",
        x: i * cw,
        y: PLOT - (j + 1) * ch,
        width: cw,
        height: ch,
        fill: spatialColor(v, maxValue),
        role: "voxel",
        title: `occupation ${v.toFixed(3)}`,
        data: { i, j, value: v },
      });
    }
  }

  for (const overlay of overlays) {
    const idx = store.get().selectedResults.indexOf(overlay.sampleId);
    const color = resultColor(idx >= 0 ? idx : 0);
    const mask = overlay.slice.values;
    for (let i = 0; i < mask.length; i++) {
      for (let j = 0; j < mask[i].length; j++) {
        if (mask[i][j] > 0) {
          nodes.push(<RectNode>{
            kind: "rect",
            x: i * cw,
            y: PLOT - (j + 1) * ch,
            width: cw,
            height: ch,
            fill: color,
            role: "spatial-overlay",
            data: { sample_id: overlay.sampleId, i, j },
          });
        }
      }
    }
  }
  return { width: PLOT, height: PLOT, nodes };
}
