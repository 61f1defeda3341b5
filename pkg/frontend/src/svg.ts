// Minimal SVG string rendering of sampled marks for the preview and
// animation canvases.

import type { Geom, MarkDoc } from "./types.js";

const fmt = (v: number) => {
  const r = Math.round(v * 1000) / 1000;
  return Object.is(r, -0) ? "0" : String(r);
};

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");

function num(g: Geom, key: string, fallback = 0): number {
  const v = g[key];
  return typeof v === "number" ? v : fallback;
}

function sectorPoint(cx: number, cy: number, r: number, a: number): [number, number] {
  return [cx + r * Math.sin(a), cy - r * Math.cos(a)];
}

export function sectorPath(g: Geom): string {
  const cx = num(g, "cx");
  const cy = num(g, "cy");
  const r0 = num(g, "r0");
  const r1 = num(g, "r1");
  const a0 = num(g, "a0");
  const a1 = num(g, "a1");
  const amid = (a0 + a1) / 2;
  const [x0, y0] = sectorPoint(cx, cy, r1, a0);
  const [xm, ym] = sectorPoint(cx, cy, r1, amid);
  const [x1, y1] = sectorPoint(cx, cy, r1, a1);
  const parts = [
    `M ${fmt(x0)} ${fmt(y0)}`,
    `A ${fmt(r1)} ${fmt(r1)} 0 0 1 ${fmt(xm)} ${fmt(ym)}`,
    `A ${fmt(r1)} ${fmt(r1)} 0 0 1 ${fmt(x1)} ${fmt(y1)}`,
  ];
  if (r0 > 1e-9) {
    const [ix1, iy1] = sectorPoint(cx, cy, r0, a1);
    const [ixm, iym] = sectorPoint(cx, cy, r0, amid);
    const [ix0, iy0] = sectorPoint(cx, cy, r0, a0);
    parts.push(`L ${fmt(ix1)} ${fmt(iy1)}`);
    parts.push(`A ${fmt(r0)} ${fmt(r0)} 0 0 0 ${fmt(ixm)} ${fmt(iym)}`);
    parts.push(`A ${fmt(r0)} ${fmt(r0)} 0 0 0 ${fmt(ix0)} ${fmt(iy0)}`);
  } else {
    parts.push(`L ${fmt(cx)} ${fmt(cy)}`);
  }
  return parts.join(" ") + " Z";
}

export function markElement(mark: MarkDoc): string {
  const g = mark.geom;
  const opacity = mark.opacity < 1 - 1e-9 ? ` opacity="${fmt(mark.opacity)}"` : "";
  switch (mark.shape) {
    case "rect": {
      const rx = num(g, "rx");
      const rxAttr = rx > 1e-9 ? ` rx="${fmt(rx)}"` : "";
      return `<rect x="${fmt(num(g, "x"))}" y="${fmt(num(g, "y"))}" width="${fmt(
        Math.max(num(g, "w"), 0),
      )}" height="${fmt(Math.max(num(g, "h"), 0))}"${rxAttr} fill="${mark.fill}"${opacity}/>`;
    }
    case "sector":
      return `<path d="${sectorPath(g)}" fill="${mark.fill}"${opacity}/>`;
    case "point":
      return `<circle cx="${fmt(num(g, "cx"))}" cy="${fmt(num(g, "cy"))}" r="${fmt(
        Math.max(num(g, "r"), 0),
      )}" fill="${mark.fill}"${opacity}/>`;
    case "polyline": {
      const pts = (g.pts as number[][] | undefined) ?? [];
      const joined = pts.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
      return `<polyline points="${joined}" fill="none" stroke="${mark.fill}" stroke-width="2"${opacity}/>`;
    }
    case "segment":
      return `<line x1="${fmt(num(g, "x1"))}" y1="${fmt(num(g, "y1"))}" x2="${fmt(
        num(g, "x2"),
      )}" y2="${fmt(num(g, "y2"))}" stroke="${mark.fill}" stroke-width="1"${opacity}/>`;
    case "text":
      return `<text x="${fmt(num(g, "x"))}" y="${fmt(num(g, "y"))}" font-family="sans-serif" font-size="${fmt(
        num(g, "size", 11),
      )}" text-anchor="${String(g.anchor ?? "start")}" fill="${mark.fill}"${opacity}>${esc(
        String(g.text ?? ""),
      )}</text>`;
    default:
      return "";
  }
}

export function renderScene(
  marks: MarkDoc[], width: number, height: number,
): string {
  const layers = ["data", "xaxis", "yaxis", "legend", "title"];
  const body = layers
    .map((layer) =>
      marks
        .filter((m) => m.layer === layer)
        .map(markElement)
        .join(""),
    )
    .join("");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${fmt(width)} ${fmt(height)}" ` +
    `width="${fmt(width)}" height="${fmt(height)}">` +
    `<rect x="0" y="0" width="${fmt(width)}" height="${fmt(height)}" fill="#ffffff"/>` +
    body +
    `</svg>`
  );
}
