/** Flat render model produced by the views and drawn by the SVG layer.
 *
 * Keeping views free of DOM access makes every visual rule (shades,
 * thicknesses, marker placement) directly assertable in tests.
 */

export interface RectNode {
  kind: "rect";
  x: number;
  y: number;
  width: number;
  height: number;
  fill: string;
  stroke?: string;
  onClick?: () => void;
  title?: string;
  role?: string;
  data?: Record<string, unknown>;
}

export interface CircleNode {
  kind: "circle";
  x: number;
  y: number;
  r: number;
  fill: string;
  stroke?: string;
  onClick?: () => void;
  title?: string;
  role?: string;
  data?: Record<string, unknown>;
}

export interface LineNode {
  kind: "line";
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  thickness: number;
  color: string;
  gradient?: { from: string; to: string };
  role?: string;
  data?: Record<string, unknown>;
}

export interface TextNode {
  kind: "text";
  x: number;
  y: number;
  text: string;
  size?: number;
  anchor?: "start" | "middle" | "end";
  color?: string;
  role?: string;
}

export interface PathNode {
  kind: "path";
  points: [number, number][];
  color: string;
  thickness: number;
  role?: string;
}

export type SceneNode = RectNode | CircleNode | LineNode | TextNode | PathNode;

export interface Scene {
  width: number;
  height: number;
  nodes: SceneNode[];
}

export function nodesByRole<T extends SceneNode>(scene: Scene, role: string): T[] {
  return scene.nodes.filter((n) => n.role === role) as T[];
}
