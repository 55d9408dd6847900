/** Constellation plots: the parameter-space scatter (left) and the MDS
 * embedding (right), with lines tracing the star branches of any star that
 * has a selected member.
 *
 * Exactly three line thicknesses appear: the branch of the x-axis
 * parameter is thickest, the y-axis branch medium, every other branch
 * thin. Dots are grayscale by dissimilarity (to the star center, or to
 * the result selected last); selected dots use their qualitative color.
 * Lines take a linear gradient between their endpoint dot colors and are
 * drawn thin-to-thick.
 */

import { dissimilarityShade, lineGradient, resultColor } from "../color.js";
import type { CircleNode, LineNode, Scene } from "../scene.js";
import type { SelectionStore } from "../state.js";
import type { MdsPayload, StarsPayload, StudyPayload } from "../types.js";

export const THICKNESS = { x: 4, y: 2, other: 0.75 } as const;

const SIZE = 360;
const PAD = 30;

interface Positioned {
  x: number;
  y: number;
}

function dotColor(
  sampleId: number,
  store: SelectionStore,
  stars: StarsPayload,
): string {
  const idx = store.get().selectedResults.indexOf(sampleId);
  if (idx >= 0) return resultColor(idx);
  const d = stars.dissimilarity[String(sampleId)];
  return d === undefined ? dissimilarityShade(1.0) : dissimilarityShade(d);
}

function buildPlot(
  positions: Map<number, Positioned>,
  study: StudyPayload,
  stars: StarsPayload,
  store: SelectionStore,
  axes: string[],
  role: string,
): Scene {
  const nodes: Scene["nodes"] = [];
  const colors = new Map<number, string>();
  for (const id of positions.keys()) colors.set(id, dotColor(id, store, stars));

  const lines: LineNode[] = [];
  for (const seg of stars.segments) {
    const a = positions.get(seg.a);
    const b = positions.get(seg.b);
    if (!a || !b) continue;
    const thickness =
      seg.branch_param === axes[0]
        ? THICKNESS.x
        : seg.branch_param === axes[1]
          ? THICKNESS.y
          : THICKNESS.other;
    lines.push({
      kind: "line",
      x1: a.x,
      y1: a.y,
      x2: b.x,
      y2: b.y,
      thickness,
      color: colors.get(seg.a) ?? "#999999",
      gradient: lineGradient(colors.get(seg.a) ?? "#999", colors.get(seg.b) ?? "#999"),
      role: `${role}-line`,
      data: { branch_param: seg.branch_param, star_id: seg.star_id },
    });
  }
  lines.sort((p, q) => p.thickness - q.thickness); // thin first, thick on top
  nodes.push(...lines);

  for (const [id, pos] of positions) {
    nodes.push(<CircleNode>{
      kind: "circle",
      x: pos.x,
      y: pos.y,
      r: 4,
      fill: colors.get(id)!,
      stroke: "#555555",
      role: `${role}-dot`,
      title: `result ${id}`,
      data: { sample_id: id },
      onClick: () => store.toggleResult(id),
    });
  }
  return { width: SIZE, height: SIZE, nodes };
}

function scaleInto(values: Map<number, [number, number]>): Map<number, Positioned> {
  let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
  for (const [x, y] of values.values()) {
    xMin = Math.min(xMin, x); xMax = Math.max(xMax, x);
    yMin = Math.min(yMin, y); yMax = Math.max(yMax, y);
  }
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  const out = new Map<number, Positioned>();
  for (const [id, [x, y]] of values) {
    out.set(id, {
      x: PAD + ((x - xMin) / xSpan) * (SIZE - 2 * PAD),
      y: SIZE - PAD - ((y - yMin) / ySpan) * (SIZE - 2 * PAD),
    });
  }
  return out;
}

export interface ConstellationScenes {
  parameterSpace: Scene;
  mdsSpace: Scene;
  axes: string[];
}

/** `axes` defaults to the two highest-global-sensitivity parameters as
 * reported by the matrix payload (its row order). */
export function buildConstellationScenes(
  study: StudyPayload,
  stars: StarsPayload,
  mds: MdsPayload,
  store: SelectionStore,
  axes: string[],
): ConstellationScenes {
  const names = study.parameters.map((p) => p.name);
  const ix = names.indexOf(axes[0]);
  const iy = axes.length > 1 ? names.indexOf(axes[1]) : ix;

  const paramPos = new Map<number, [number, number]>();
  for (const s of study.samples) {
    if (s.status === "ok") paramPos.set(s.sample_id, [s.values[ix], s.values[iy]]);
  }
  const mdsPos = new Map<number, [number, number]>();
  mds.sample_ids.forEach((id, i) => {
    mdsPos.set(id, [mds.coordinates[i][0], mds.coordinates[i][1]]);
  });

  return {
    parameterSpace: buildPlot(scaleInto(paramPos), study, stars, store, axes, "param"),
    mdsSpace: buildPlot(scaleInto(mdsPos), study, stars, store, axes, "mds"),
    axes,
  };
}
