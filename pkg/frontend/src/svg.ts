/** Render a scene into an SVG element (browser only). */

import type { Scene } from "./scene.js";

const NS = "http://www.w3.org/2000/svg";

export function renderScene(scene: Scene, host: Element): SVGSVGElement {
  const svg = document.createElementNS(NS, "svg");
  svg.setAttribute("width", String(scene.width));
  svg.setAttribute("height", String(scene.height));
  let gradientCounter = 0;
  const defs = document.createElementNS(NS, "defs");
  svg.appendChild(defs);

  for (const node of scene.nodes) {
    let el: SVGElement;
    switch (node.kind) {
      case "rect": {
        el = document.createElementNS(NS, "rect");
        el.setAttribute("x", String(node.x));
        el.setAttribute("y", String(node.y));
        el.setAttribute("width", String(node.width));
        el.setAttribute("height", String(node.height));
        el.setAttribute("fill", node.fill);
        if (node.stroke) el.setAttribute("stroke", node.stroke);
        break;
      }
      case "circle": {
        el = document.createElementNS(NS, "circle");
        el.setAttribute("cx", String(node.x));
        el.setAttribute("cy", String(node.y));
        el.setAttribute("r", String(node.r));
        el.setAttribute("fill", node.fill);
        if (node.stroke) el.setAttribute("stroke", node.stroke);
        break;
      }
      case "line": {
        el = document.createElementNS(NS, "line");
        el.setAttribute("x1", String(node.x1));
        el.setAttribute("y1", String(node.y1));
        el.setAttribute("x2", String(node.x2));
        el.setAttribute("y2", String(node.y2));
        el.setAttribute("stroke-width", String(node.thickness));
        if (node.gradient && node.gradient.from !== node.gradient.to) {
          const id = `grad${gradientCounter++}`;
          const grad = document.createElementNS(NS, "linearGradient");
          grad.setAttribute("id", id);
          grad.setAttribute("gradientUnits", "userSpaceOnUse");
          grad.setAttribute("x1", String(node.x1));
          grad.setAttribute("y1", String(node.y1));
          grad.setAttribute("x2", String(node.x2));
          grad.setAttribute("y2", String(node.y2));
          for (const [offset, color] of [["0", node.gradient.from], ["1", node.gradient.to]]) {
            const stop = document.createElementNS(NS, "stop");
            stop.setAttribute("offset", offset);
            stop.setAttribute("stop-color", color);
            grad.appendChild(stop);
          }
          defs.appendChild(grad);
          el.setAttribute("stroke", `url(#${id})`);
        } else {
          el.setAttribute("stroke", node.color);
        }
        break;
      }
      case "path": {
        el = document.createElementNS(NS, "polyline");
        el.setAttribute("points", node.points.map(([x, y]) => `${x},${y}`).join(" "));
        el.setAttribute("fill", "none");
        el.setAttribute("stroke", node.color);
        el.setAttribute("stroke-width", String(node.thickness));
        el.setAttribute("stroke-linecap", "round");
        break;
      }
      case "text": {
        el = document.createElementNS(NS, "text");
        el.setAttribute("x", String(node.x));
        el.setAttribute("y", String(node.y));
        el.setAttribute("font-size", String(node.size ?? 12));
        if (node.anchor) el.setAttribute("text-anchor", node.anchor);
        el.setAttribute("fill", node.color ?? "#222222");
        el.textContent = node.text;
        break;
      }
    }
    if ("title" in node && node.title) {
      const title = document.createElementNS(NS, "title");
      title.textContent = node.title;
      el.appendChild(title);
    }
    if ("onClick" in node && node.onClick) {
      el.addEventListener("click", node.onClick);
      el.setAttribute("cursor", "pointer");
    }
    svg.appendChild(el);
  }
  host.replaceChildren(svg);
  return svg;
}
