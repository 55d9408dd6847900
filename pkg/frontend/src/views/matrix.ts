/** In-out matrix: parameters in rows, output characteristics in columns,
 * cell shade by column-normalized global sensitivity (black = high). */

import { sensitivityShade } from "../color.js";
import type { Scene, RectNode, TextNode } from "../scene.js";
import type { SelectionStore } from "../state.js";
import type { MatrixPayload } from "../types.js";

export const CELL = 64;
export const LABEL = 110;
const HEADER = 48;

export function buildMatrixScene(
  matrix: MatrixPayload,
  store: SelectionStore,
): Scene {
  const nodes: Scene["nodes"] = [];
  matrix.characteristics.forEach((char, j) => {
    nodes.push(<TextNode>{
      kind: "text",
      x: LABEL + j * CELL + CELL / 2,
      y: HEADER - 10,
      text: char,
      size: 9,
      anchor: "middle",
      role: "col-label",
    });
  });
  matrix.parameters.forEach((param, i) => {
    nodes.push(<TextNode>{
      kind: "text",
      x: LABEL - 8,
      y: HEADER + i * CELL + CELL / 2,
      text: param,
      anchor: "end",
      role: "row-label",
    });
    matrix.characteristics.forEach((char, j) => {
      const value = matrix.values[i][j];
      nodes.push(<RectNode>{
        kind: "rect",
        x: LABEL + j * CELL,
        y: HEADER + i * CELL,
        width: CELL - 2,
        height: CELL - 2,
        fill: sensitivityShade(value),
        stroke: "#cccccc",
        role: "matrix-cell",
        title: `${param} x ${char}: ${value.toFixed(3)} (raw ${matrix.raw[i][j].toExponential(3)})`,
        data: { param, char, value },
        onClick: () => store.toggleCell(param, char),
      });
    });
  });
  return {
    width: LABEL + matrix.characteristics.length * CELL,
    height: HEADER + matrix.parameters.length * CELL,
    nodes,
  };
}

/** Row (parameter) of the darkest cell of one characteristic column. */
export function darkestParameter(matrix: MatrixPayload, char: string): string {
  const j = matrix.characteristics.indexOf(char);
  let best = 0;
  matrix.parameters.forEach((_, i) => {
    if (matrix.values[i][j] > matrix.values[best][j]) best = i;
  });
  return matrix.parameters[best];
}
