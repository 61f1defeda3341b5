// Client-side sampling of the keyframe timeline, mirroring the
// service's interpolation semantics: per-segment easing, linear
// geometry interpolation with shape morphing, Lab color blending.

import type { Geom, Keyframe, MarkDoc, TimelineDoc } from "./types.js";

export function ease(fn: string, t: number): number {
  const clamped = Math.min(Math.max(t, 0), 1);
  if (fn === "slowInSlowOut" || fn === "in-out") {
    return clamped < 0.5
      ? 4 * clamped ** 3
      : 1 - 4 * (1 - clamped) ** 3;
  }
  return clamped;
}

const lerp = (a: number, b: number, p: number) => a + (b - a) * p;

// -- color (Lab) -------------------------------------------------------------

function hexToRgb(hex: string): [number, number, number] {
  const h = hex.replace("#", "");
  return [0, 2, 4].map((i) => parseInt(h.slice(i, i + 2), 16) / 255) as [
    number, number, number,
  ];
}

function rgbToHex(rgb: number[]): string {
  return (
    "#" +
    rgb
      .map((c) => {
        const v = Math.max(0, Math.min(255, Math.round(c * 255)));
        return v.toString(16).padStart(2, "0");
      })
      .join("")
  );
}

const WHITE = [0.95047, 1.0, 1.08883];

function srgbToLinear(c: number): number {
  return c <= 0.04045 ? c / 12.92 : ((c + 0.055) / 1.055) ** 2.4;
}

function linearToSrgb(c: number): number {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * c ** (1 / 2.4) - 0.055;
}

function rgbToLab(rgb: [number, number, number]): [number, number, number] {
  const [r, g, b] = rgb.map(srgbToLinear);
  const x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const y = 0.2126729 * r + 0.7151522 * g + 0.072175 * b;
  const z = 0.0193339 * r + 0.119192 * g + 0.9503041 * b;
  const f = (v: number) => (v > 0.008856 ? Math.cbrt(v) : 7.787 * v + 16 / 116);
  const [fx, fy, fz] = [f(x / WHITE[0]), f(y / WHITE[1]), f(z / WHITE[2])];
  return [116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)];
}

function labToRgb(lab: [number, number, number]): number[] {
  const [L, a, b] = lab;
  const fy = (L + 16) / 116;
  const fx = fy + a / 500;
  const fz = fy - b / 200;
  const finv = (v: number) => (v ** 3 > 0.008856 ? v ** 3 : (v - 16 / 116) / 7.787);
  const x = WHITE[0] * finv(fx);
  const y = WHITE[1] * finv(fy);
  const z = WHITE[2] * finv(fz);
  const rgb = [
    3.2404542 * x - 1.5371385 * y - 0.4985314 * z,
    -0.969266 * x + 1.8760108 * y + 0.041556 * z,
    0.0556434 * x - 0.2040259 * y + 1.0572252 * z,
  ];
  return rgb.map((c) => Math.min(Math.max(linearToSrgb(c), 0), 1));
}

export function interpColor(c1: string, c2: string, p: number): string {
  if (c1 === c2 || p <= 0) return c1;
  if (p >= 1) return c2;
  const lab1 = rgbToLab(hexToRgb(c1));
  const lab2 = rgbToLab(hexToRgb(c2));
  const lab = lab1.map((v, i) => v + (lab2[i] - v) * p) as [number, number, number];
  return rgbToHex(labToRgb(lab));
}

// -- geometry ----------------------------------------------------------------

const RECT_LIFT_RADIUS = 1280;

function num(g: Geom, key: string, fallback = 0): number {
  const v = g[key];
  return typeof v === "number" ? v : fallback;
}

function lerpGeom(a: Geom, b: Geom, p: number): Geom {
  const out: Geom = {};
  for (const key of Object.keys(a)) {
    const va = a[key];
    const vb = b[key] ?? va;
    if (typeof va === "number" && typeof vb === "number") {
      out[key] = lerp(va, vb, p);
    } else if (key === "pts" && Array.isArray(va) && Array.isArray(vb)) {
      out[key] = lerpPts(va as number[][], vb as number[][], p);
    } else {
      out[key] = p < 1 ? va : vb;
    }
  }
  return out;
}

function resample(pts: number[][], n: number): number[][] {
  if (pts.length === n) return pts.map((p) => [...p]);
  if (pts.length === 1) return Array.from({ length: n }, () => [...pts[0]]);
  const out: number[][] = [];
  for (let i = 0; i < n; i++) {
    const t = (i * (pts.length - 1)) / (n - 1);
    const j = Math.min(Math.floor(t), pts.length - 2);
    const u = t - j;
    out.push([
      lerp(pts[j][0], pts[j + 1][0], u),
      lerp(pts[j][1], pts[j + 1][1], u),
    ]);
  }
  return out;
}

function lerpPts(a: number[][], b: number[][], p: number): number[][] {
  const n = Math.max(a.length, b.length);
  const ra = resample(a, n);
  const rb = resample(b, n);
  return ra.map((pa, i) => [lerp(pa[0], rb[i][0], p), lerp(pa[1], rb[i][1], p)]);
}

function rectAsSector(rect: Geom, p: number, sector: Geom): Geom {
  const x = num(rect, "x");
  const y = num(rect, "y");
  const w = num(rect, "w");
  const h = num(rect, "h");
  const cx0 = x + w / 2;
  const cy0 = y + h + RECT_LIFT_RADIUS;
  const sweep0 = w / (RECT_LIFT_RADIUS + h / 2);
  const mid1 = (num(sector, "a0") + num(sector, "a1")) / 2;
  const sweep1 = num(sector, "a1") - num(sector, "a0");
  const mid = lerp(0, mid1, p);
  const sweep = lerp(sweep0, sweep1, p);
  return {
    cx: lerp(cx0, num(sector, "cx"), p),
    cy: lerp(cy0, num(sector, "cy"), p),
    r0: lerp(RECT_LIFT_RADIUS, num(sector, "r0"), p),
    r1: lerp(RECT_LIFT_RADIUS + h, num(sector, "r1"), p),
    a0: mid - sweep / 2,
    a1: mid + sweep / 2,
  };
}

export function interpGeometry(
  shapeA: string, geomA: Geom, shapeB: string, geomB: Geom, p: number,
): { shape: string; geom: Geom } {
  if (p <= 0) return { shape: shapeA, geom: { ...geomA } };
  if (p >= 1) return { shape: shapeB, geom: { ...geomB } };
  if (shapeA === shapeB) return { shape: shapeA, geom: lerpGeom(geomA, geomB, p) };
  if (shapeA === "rect" && shapeB === "sector") {
    return { shape: "sector", geom: rectAsSector(geomA, p, geomB) };
  }
  if (shapeA === "sector" && shapeB === "rect") {
    return { shape: "sector", geom: rectAsSector(geomB, 1 - p, geomA) };
  }
  if (shapeA === "rect" && shapeB === "point") {
    const r = num(geomB, "r");
    const target: Geom = {
      x: num(geomB, "cx") - r, y: num(geomB, "cy") - r, w: 2 * r, h: 2 * r, rx: r,
    };
    return { shape: "rect", geom: lerpGeom({ rx: 0, ...geomA }, target, p) };
  }
  if (shapeA === "point" && shapeB === "rect") {
    const r = num(geomA, "r");
    const start: Geom = {
      x: num(geomA, "cx") - r, y: num(geomA, "cy") - r, w: 2 * r, h: 2 * r, rx: r,
    };
    return { shape: "rect", geom: lerpGeom(start, { rx: 0, ...geomB }, p) };
  }
  if (shapeA === "point" && shapeB === "sector") {
    return {
      shape: "sector",
      geom: {
        cx: lerp(num(geomA, "cx"), num(geomB, "cx"), p),
        cy: lerp(num(geomA, "cy"), num(geomB, "cy"), p),
        r0: lerp(0, num(geomB, "r0"), p),
        r1: lerp(num(geomA, "r"), num(geomB, "r1"), p),
        a0: num(geomB, "a0"),
        a1: num(geomB, "a1"),
      },
    };
  }
  if (shapeA === "sector" && shapeB === "point") {
    return {
      shape: "sector",
      geom: {
        cx: lerp(num(geomA, "cx"), num(geomB, "cx"), p),
        cy: lerp(num(geomA, "cy"), num(geomB, "cy"), p),
        r0: lerp(num(geomA, "r0"), 0, p),
        r1: lerp(num(geomA, "r1"), num(geomB, "r"), p),
        a0: num(geomA, "a0"),
        a1: num(geomA, "a1"),
      },
    };
  }
  return p < 0.5
    ? { shape: shapeA, geom: { ...geomA } }
    : { shape: shapeB, geom: { ...geomB } };
}

// -- track sampling ------------------------------------------------------------

export function sampleTrack(
  track: Keyframe[], t: number, easing: string,
): { shape: string; geom: Geom; fill: string; opacity: number } | null {
  if (track.length === 0 || t < track[0].t - 1e-9) return null;
  let i = track.length - 1;
  for (let j = 0; j < track.length; j++) {
    if (track[j].t > t + 1e-9) {
      i = j - 1;
      break;
    }
  }
  if (i < 0) return null;
  const k0 = track[i];
  const k1 = track[i + 1];
  if (!k1 || k1.t - k0.t <= 1e-9) {
    const k = k1 ?? k0;
    return { shape: k.shape, geom: { ...k.geom }, fill: k.fill, opacity: k.opacity };
  }
  const u = (t - k0.t) / (k1.t - k0.t);
  const p = ease(easing, u);
  const { shape, geom } = interpGeometry(k0.shape, k0.geom, k1.shape, k1.geom, p);
  return {
    shape,
    geom,
    fill: interpColor(k0.fill, k1.fill, p),
    opacity: lerp(k0.opacity, k1.opacity, p),
  };
}

export function sampleMarks(timeline: TimelineDoc, t: number): MarkDoc[] {
  const marks: MarkDoc[] = [];
  for (const id of Object.keys(timeline.tracks).sort()) {
    const track = timeline.tracks[id];
    const sampled = sampleTrack(track.keyframes, t, timeline.easing);
    if (!sampled || sampled.opacity <= 1e-9) continue;
    marks.push({
      id,
      shape: sampled.shape,
      geom: sampled.geom,
      fill: sampled.fill,
      opacity: sampled.opacity,
      layer: track.layer,
    });
  }
  return marks;
}
