/** Browser entry: wires the selection store, the service client, and the
 * five linked views. Every user interaction mutates the one store; every
 * store change refetches what the views need and re-renders them all.
 */

import { ServiceClient } from "./api.js";
import { SelectionStore } from "./state.js";
import { renderScene } from "./svg.js";
import type { MatrixPayload, SlicePayload, StudyPayload } from "./types.js";
import { buildConstellationScenes } from "./views/constellation.js";
import { buildDiffPanel, buildReferencePanel, FiberSketch } from "./views/fiberdiff.js";
import { buildInfluenceCellScene } from "./views/influence.js";
import { buildMatrixScene } from "./views/matrix.js";
import { buildSpatialScene, ResultOverlay } from "./views/spatial.js";

function host(id: string): Element {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing container #${id}`);
  return el;
}

function banner(message: string | null): void {
  const el = host("error-banner");
  el.textContent = message ?? "";
  (el as HTMLElement).style.display = message ? "block" : "none";
}

export async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("service") ?? "http://127.0.0.1:8765";
  const store = new SelectionStore();
  const client = new ServiceClient(base, () => store.get().version);

  let study: StudyPayload;
  let matrix: MatrixPayload;
  try {
    study = (await client.study())!;
    matrix = (await client.matrix())!;
  } catch (err) {
    banner(`service unavailable at ${base}: ${err}`);
    return;
  }
  banner(null);
  const sliceCount = 32;
  store.setSlice("z", Math.floor(sliceCount / 2));

  const slider = host("slice-slider") as HTMLInputElement;
  slider.addEventListener("input", () => store.setSlice("z", Number(slider.value)));
  host("clear-selection").addEventListener("click", () => store.clear());

  async function render(): Promise<void> {
    const state = store.get();
    const selected = state.selectedResults;

    renderScene(buildMatrixScene(matrix, store), host("matrix"));

    const [stars, mds] = await Promise.all([client.stars(selected), client.mds()]);
    if (stars && mds) {
      const scenes = buildConstellationScenes(study, stars, mds, store, matrix.default_axes);
      renderScene(scenes.parameterSpace, host("constellation-param"));
      renderScene(scenes.mdsSpace, host("constellation-mds"));
    }

    const influenceHost = host("influence");
    influenceHost.replaceChildren();
    for (const cell of state.activeCells) {
      const payload = await client.influence(cell.param, cell.char, selected);
      if (!payload) return; // stale
      const div = document.createElement("div");
      influenceHost.appendChild(div);
      renderScene(buildInfluenceCellScene(payload, store, true), div);
    }

    const slice = await client.spatial(state.slice.axis, state.slice.index);
    if (slice) {
      const overlays: ResultOverlay[] = [];
      for (const id of selected) {
        const mask = await client.spatialResult(id, state.slice.axis, state.slice.index);
        if (mask) overlays.push({ sampleId: id, slice: mask as SlicePayload });
      }
      renderScene(buildSpatialScene(slice, overlays, store), host("spatial"));
    }

    const diffHost = host("fiberdiff");
    diffHost.replaceChildren();
    const ref = store.reference;
    if (ref !== null && state.selectedFibers.length) {
      const fibersPayload = (await fetch(`${base}/fibers/${ref}`).then((r) => r.json())) as {
        fibers: { fiber_id: number; vertices: number[][] }[];
      };
      const sketches: FiberSketch[] = fibersPayload.fibers
        .filter((f) => state.selectedFibers.includes(f.fiber_id))
        .map((f) => ({ fiberId: f.fiber_id, vertices: f.vertices }));
      const refDiv = document.createElement("div");
      diffHost.appendChild(refDiv);
      renderScene(buildReferencePanel(sketches), refDiv);
      for (const other of selected.slice(1)) {
        const diff = await client.diff(ref, other, state.selectedFibers);
        if (!diff) return;
        const div = document.createElement("div");
        diffHost.appendChild(div);
        renderScene(buildDiffPanel(diff, sketches, store), div);
      }
    }
  }

  store.subscribe(() => {
    render().catch((err) => banner(String(err)));
  });
  await render();
}

start();
