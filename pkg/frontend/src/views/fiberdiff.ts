/** Fiber difference view: small multiples of best-match differences.
 *
 * The leftmost panel shows the reference result's selected fibers. Each
 * further panel compares one selected result against the reference: the
 * reference fiber in gray, regions covered by only one of the two fibers
 * dotted in the owning result's color, and a "no match" label when the
 * best-match dissimilarity is 1.
 */

import { REFERENCE_GRAY, resultColor } from "../color.js";
import type { CircleNode, PathNode, Scene, TextNode } from "../scene.js";
import type { SelectionStore } from "../state.js";
import type { DiffPayload } from "../types.js";

const PANEL = 200;
const PAD = 16;

export interface FiberSketch {
  fiberId: number;
  vertices: number[][];
}

interface Bounds {
  xLo: number;
  xHi: number;
  yLo: number;
  yHi: number;
}

function boundsOf(points: number[][], into?: Bounds): Bounds {
  const b = into ?? { xLo: Infinity, xHi: -Infinity, yLo: Infinity, yHi: -Infinity };
  for (const p of points) {
    b.xLo = Math.min(b.xLo, p[0]);
    b.xHi = Math.max(b.xHi, p[0]);
    b.yLo = Math.min(b.yLo, p[1]);
    b.yHi = Math.max(b.yHi, p[1]);
  }
  return b;
}

function project(b: Bounds) {
  const xSpan = b.xHi - b.xLo || 1;
  const ySpan = b.yHi - b.yLo || 1;
  const scale = (PANEL - 2 * PAD) / Math.max(xSpan, ySpan);
  return (p: number[]): [number, number] => [
    PAD + (p[0] - b.xLo) * scale,
    PANEL - PAD - (p[1] - b.yLo) * scale,
  ];
}

export function buildReferencePanel(fibers: FiberSketch[]): Scene {
  const nodes: Scene["nodes"] = [];
  let b: Bounds | undefined;
  for (const f of fibers) b = boundsOf(f.vertices, b);
  if (b) {
    const proj = project(b);
    for (const f of fibers) {
      nodes.push(<PathNode>{
        kind: "path",
        points: f.vertices.map(proj),
        color: REFERENCE_GRAY,
        thickness: 5,
        role: "reference-fiber",
      });
    }
  }
  nodes.push(<TextNode>{
    kind: "text", x: PAD, y: 12, text: "reference", size: 10, role: "panel-label",
  });
  return { width: PANEL, height: PANEL, nodes };
}

export function buildDiffPanel(
  diff: DiffPayload,
  referenceFibers: FiberSketch[],
  store: SelectionStore,
): Scene {
  const nodes: Scene["nodes"] = [];
  const selection = store.get().selectedResults;
  const refColor = resultColor(Math.max(0, selection.indexOf(diff.ref)));
  const otherColor = resultColor(Math.max(0, selection.indexOf(diff.other)));

  let b: Bounds | undefined;
  for (const f of referenceFibers) b = boundsOf(f.vertices, b);
  for (const panel of diff.panels) {
    b = boundsOf(panel.ref_only, b);
    b = boundsOf(panel.other_only, b);
  }
  const proj = b ? project(b) : (p: number[]): [number, number] => [p[0], p[1]];

  for (const f of referenceFibers) {
    nodes.push(<PathNode>{
      kind: "path",
      points: f.vertices.map(proj),
      color: REFERENCE_GRAY,
      thickness: 5,
      role: "reference-fiber",
    });
  }
  for (const panel of diff.panels) {
    if (panel.match_id === null) {
      nodes.push(<TextNode>{
        kind: "text",
        x: PAD,
        y: PANEL - 6,
        text: `fiber ${panel.fiber_id}: no match`,
        size: 10,
        role: "no-match-label",
      });
      continue;
    }
    for (const p of panel.ref_only) {
      const [x, y] = proj(p);
      nodes.push(<CircleNode>{
        kind: "circle", x, y, r: 1.4, fill: refColor, role: "diff-dot-ref",
        data: { fiber_id: panel.fiber_id },
      });
    }
    for (const p of panel.other_only) {
      const [x, y] = proj(p);
      nodes.push(<CircleNode>{
        kind: "circle", x, y, r: 1.4, fill: otherColor, role: "diff-dot-other",
        data: { fiber_id: panel.fiber_id },
      });
    }
  }
  nodes.push(<TextNode>{
    kind: "text", x: PAD, y: 12, text: `vs result ${diff.other}`, size: 10, role: "panel-label",
  });
  return { width: PANEL, height: PANEL, nodes };
}
