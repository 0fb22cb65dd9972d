/** Render a view model to an SVG string. Pure, so the figure convention is
 * testable without a browser.
 */

import { EdgeStyle, GraphViewModel } from "./model.js";
import { LayoutBounds, Point } from "./layout.js";

const COLORS = { black: "#1a1a1a", red: "#c62828" } as const;

function escape(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function styleClass(style: EdgeStyle): string {
  const tokens = ["edge", style.color, style.dash ? "dashed" : "solid"];
  if (style.struck) tokens.push("rejected");
  return tokens.join(" ");
}

function edgeStroke(style: EdgeStyle): string {
  const dash = style.struck ? ' stroke-dasharray="2 3" opacity="0.45"'
    : style.dash ? ' stroke-dasharray="7 4"' : "";
  return `stroke="${COLORS[style.color]}" stroke-width="1.6"${dash}`;
}

/** Draw edges under nodes, labels on top, literals as lines below the label. */
export function renderSvg(
  view: GraphViewModel,
  positions: Map<string, Point>,
  bounds: LayoutBounds = { width: 960, height: 600 },
): string {
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${bounds.width} ${bounds.height}" ` +
      `width="${bounds.width}" height="${bounds.height}">`,
  ];
  for (const edge of view.edges) {
    const from = positions.get(edge.from);
    const to = positions.get(edge.to);
    if (!from || !to) continue;
    const mx = (from.x + to.x) / 2;
    const my = (from.y + to.y) / 2;
    parts.push(
      `<g class="${styleClass(edge.style)}" data-triple="${escape(edge.id)}">` +
        `<line x1="${from.x.toFixed(1)}" y1="${from.y.toFixed(1)}" ` +
        `x2="${to.x.toFixed(1)}" y2="${to.y.toFixed(1)}" ${edgeStroke(edge.style)}/>` +
        `<text x="${mx.toFixed(1)}" y="${(my - 4).toFixed(1)}" font-size="10" ` +
        `fill="${COLORS[edge.style.color]}" text-anchor="middle">${escape(edge.label)}</text>` +
        `</g>`,
    );
  }
  const literalsByNode = new Map<string, string[]>();
  for (const badge of view.literals) {
    if (!literalsByNode.has(badge.node)) literalsByNode.set(badge.node, []);
    literalsByNode.get(badge.node)!.push(`${badge.property}: ${badge.value}`);
  }
  for (const node of view.nodes) {
    const p = positions.get(node.id);
    if (!p) continue;
    const title = node.classes.length ? `${node.label} : ${node.classes.join(", ")}` : node.label;
    parts.push(
      `<g class="node" data-node="${escape(node.id)}">` +
        `<circle cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="7" ` +
        `fill="#ffffff" stroke="#1a1a1a" stroke-width="1.4"/>` +
        `<text x="${p.x.toFixed(1)}" y="${(p.y - 11).toFixed(1)}" font-size="11" ` +
        `text-anchor="middle">${escape(title)}</text>` +
        (literalsByNode.get(node.id) ?? [])
          .map(
            (line, i) =>
              `<text x="${p.x.toFixed(1)}" y="${(p.y + 20 + i * 11).toFixed(1)}" ` +
              `font-size="9" fill="#555555" text-anchor="middle">${escape(line)}</text>`,
          )
          .join("") +
        `</g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}
