/** Parameter influence view: expandable matrix cells with detail charts.
 *
 * Every cell carries a global-sensitivity bar with the numeric value;
 * expanded cells add the average-distribution histogram with its per-bin
 * variation band and the regional sensitivity curve. Selected results show
 * as colored markers at their parameter values, other results on the same
 * star branch as light-gray markers. Absent regional bins render as gaps.
 */

import { resultColor } from "../color.js";
import type { PathNode, RectNode, Scene, TextNode } from "../scene.js";
import type { SelectionStore } from "../state.js";
import type { InfluencePayload } from "../types.js";

export const SIBLING_GRAY = "#c8c8c8";

const W = 260;
const BAR_H = 26;
const CHART_H = 90;

export function buildInfluenceCellScene(
  payload: InfluencePayload,
  store: SelectionStore,
  expanded: boolean,
): Scene {
  const nodes: Scene["nodes"] = [];
  const globalValue = payload.global ?? 0;
  nodes.push(<TextNode>{
    kind: "text",
    x: 4,
    y: 14,
    text: `${payload.parameter} x ${payload.characteristic}`,
    size: 11,
    role: "cell-caption",
  });
  nodes.push(<RectNode>{
    kind: "rect",
    x: 4,
    y: BAR_H - 6,
    width: Math.max(1, Math.min(1, globalValue) * (W - 70)),
    height: 10,
    fill: "#404040",
    role: "global-bar",
    data: { value: globalValue },
  });
  nodes.push(<TextNode>{
    kind: "text",
    x: W - 60,
    y: BAR_H + 3,
    text: globalValue.toExponential(2),
    size: 10,
    role: "global-value",
  });
  if (!expanded) {
    return { width: W, height: BAR_H + 10, nodes };
  }

  // average-distribution histogram with variation band
  const hist = payload.average_histogram;
  const histMax = Math.max(...hist, 1e-12);
  const binW = (W - 8) / hist.length;
  hist.forEach((f, i) => {
    nodes.push(<RectNode>{
      kind: "rect",
      x: 4 + i * binW,
      y: BAR_H + 10 + (CHART_H - (f / histMax) * CHART_H),
      width: binW - 1,
      height: (f / histMax) * CHART_H,
      fill: "#9ecae1",
      role: "hist-bar",
      data: { bin: i, frequency: f },
    });
    const variation = payload.per_bin_variation[i];
    if (variation !== null && variation > 0) {
      nodes.push(<RectNode>{
        kind: "rect",
        x: 4 + i * binW,
        y: BAR_H + 10 + (CHART_H - (variation / histMax) * CHART_H),
        width: binW - 1,
        height: 2,
        fill: "#08519c",
        role: "variation-band",
        data: { bin: i, variation },
      });
    }
  });

  // regional sensitivity line plot; empty bins break the line into gaps
  const regionalTop = BAR_H + 20 + CHART_H;
  const centers = payload.regional.bin_centers;
  const means = payload.regional.means;
  const defined = means.filter((m): m is number => m !== null);
  const mMax = Math.max(...defined, 1e-12);
  const cLo = Math.min(...centers);
  const cHi = Math.max(...centers);
  const xOf = (c: number) => 4 + ((c - cLo) / (cHi - cLo || 1)) * (W - 8);
  let run: [number, number][] = [];
  const flush = () => {
    if (run.length > 1) {
      nodes.push(<PathNode>{
        kind: "path",
        points: run,
        color: "#d95f02",
        thickness: 1.5,
        role: "regional-line",
      });
    }
    run = [];
  };
  centers.forEach((c, i) => {
    const m = means[i];
    if (m === null) {
      flush(); // absent bin: gap, not zero
    } else {
      run.push([xOf(c), regionalTop + CHART_H - (m / mMax) * CHART_H]);
    }
  });
  flush();

  // markers: selected results colored, same-branch siblings light gray
  const markerY = regionalTop + CHART_H + 8;
  for (const marker of payload.markers) {
    const idx = store.get().selectedResults.indexOf(marker.sample_id);
    for (const sibling of marker.siblings) {
      nodes.push(<RectNode>{
        kind: "rect",
        x: xOf(sibling.value) - 1,
        y: markerY,
        width: 2,
        height: 8,
        fill: SIBLING_GRAY,
        role: "sibling-marker",
        data: { sample_id: sibling.sample_id, value: sibling.value },
      });
    }
    nodes.push(<RectNode>{
      kind: "rect",
      x: xOf(marker.value) - 2,
      y: markerY,
      width: 4,
      height: 12,
      fill: resultColor(idx >= 0 ? idx : 0),
      role: "selection-marker",
      data: { sample_id: marker.sample_id, value: marker.value },
    });
  }

  return { width: W, height: markerY + 20, nodes };
}
