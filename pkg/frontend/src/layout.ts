/** Deterministic force layout. Existing positions are pinned, so a refresh
 * only places nodes that are new since the last render.
 */

export interface Point {
  x: number;
  y: number;
}

export interface LayoutBounds {
  width: number;
  height: number;
}

const DEFAULT_BOUNDS: LayoutBounds = { width: 960, height: 600 };

function hash(text: string): number {
  let h = 2166136261;
  for (let i = 0; i < text.length; i += 1) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}

function seedPosition(id: string, bounds: LayoutBounds): Point {
  const h = hash(id);
  const angle = ((h % 3600) / 3600) * 2 * Math.PI;
  const radius = 0.15 + ((h >>> 12) % 1000) / 1000 * 0.3;
  return {
    x: bounds.width / 2 + Math.cos(angle) * radius * bounds.width,
    y: bounds.height / 2 + Math.sin(angle) * radius * bounds.height,
  };
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

/** Place every node; ids present in `pinned` keep their exact coordinates. */
export function layoutGraph(
  nodeIds: string[],
  edges: { from: string; to: string }[],
  pinned: Map<string, Point> = new Map(),
  bounds: LayoutBounds = DEFAULT_BOUNDS,
  iterations = 120,
): Map<string, Point> {
  const ids = [...nodeIds].sort();
  const positions = new Map<string, Point>();
  const movable = new Set<string>();
  for (const id of ids) {
    const kept = pinned.get(id);
    if (kept) {
      positions.set(id, { x: kept.x, y: kept.y });
    } else {
      positions.set(id, seedPosition(id, bounds));
      movable.add(id);
    }
  }
  const links = edges.filter((e) => positions.has(e.from) && positions.has(e.to));

  const spring = 0.02;
  const springLength = Math.min(bounds.width, bounds.height) / 5;
  const repulsion = 4000;
  for (let round = 0; round < iterations; round += 1) {
    const force = new Map<string, Point>();
    for (const id of movable) force.set(id, { x: 0, y: 0 });

    for (let i = 0; i < ids.length; i += 1) {
      for (let j = i + 1; j < ids.length; j += 1) {
        const a = ids[i];
        const b = ids[j];
        const pa = positions.get(a)!;
        const pb = positions.get(b)!;
        let dx = pa.x - pb.x;
        let dy = pa.y - pb.y;
        const sq = dx * dx + dy * dy || 1;
        const push = repulsion / sq;
        const len = Math.sqrt(sq);
        dx /= len;
        dy /= len;
        const fa = force.get(a);
        if (fa) {
          fa.x += dx * push;
          fa.y += dy * push;
        }
        const fb = force.get(b);
        if (fb) {
          fb.x -= dx * push;
          fb.y -= dy * push;
        }
      }
    }
    for (const link of links) {
      const pa = positions.get(link.from)!;
      const pb = positions.get(link.to)!;
      const dx = pb.x - pa.x;
      const dy = pb.y - pa.y;
      const len = Math.sqrt(dx * dx + dy * dy) || 1;
      const pull = spring * (len - springLength);
      const fa = force.get(link.from);
      if (fa) {
        fa.x += (dx / len) * pull;
        fa.y += (dy / len) * pull;
      }
      const fb = force.get(link.to);
      if (fb) {
        fb.x -= (dx / len) * pull;
        fb.y -= (dy / len) * pull;
      }
    }
    const cool = 1 - round / iterations;
    for (const id of movable) {
      const p = positions.get(id)!;
      const f = force.get(id)!;
      p.x = clamp(p.x + clamp(f.x, -30, 30) * cool, 20, bounds.width - 20);
      p.y = clamp(p.y + clamp(f.y, -30, 30) * cool, 20, bounds.height - 20);
    }
  }
  return positions;
}
