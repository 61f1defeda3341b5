"""Frame sampling, rasterization and export.

Exports always write the plan document; ``frames`` adds numbered SVG
documents plus a manifest, and ``gif`` additionally rasterizes the
frames and encodes an animated GIF with a global 256-color palette
quantized from the first and last frames. Standing-time frames are
emitted, not skipped.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .render import render_svg, sample_scene

FORMATS = ("frames", "gif", "planOnly")


class UnsupportedFormat(ValueError):
    pass


class IoFailure(OSError):
    pass


def frame_times(total_ms, fps):
    """Frame count is floor(total/1000 * fps) + 1; the first frame sits
    at t=0 and the last exactly at the total duration."""
    count = int(math.floor(total_ms / 1000.0 * fps)) + 1
    times = [i * 1000.0 / fps for i in range(count)]
    times[-1] = float(total_ms)
    return times


def stage_for_time(plan, t):
    for stage in plan.stages:
        if t <= stage.start + stage.duration + 1e-9:
            return stage.id
    if plan.stages:
        return plan.stages[-1].id
    return None


def export(timeline, plan, plan_doc, out_dir, fps=30, fmt="frames"):
    """Write plan, frames, manifest and optional GIF under ``out_dir``."""
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"format must be one of {FORMATS}, got '{fmt}'")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        plan_path = out / "plan.json"
        plan_path.write_text(json.dumps(plan_doc, indent=2) + "\n", encoding="utf-8")
        manifest = {"fps": fps, "total": plan.total, "frames": []}
        if fmt == "planOnly":
            (out / "manifest.json").write_text(
                json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
            )
            return manifest
        frames_dir = out / "frames"
        frames_dir.mkdir(exist_ok=True)
        times = frame_times(plan.total, fps)
        scenes = []
        for index, t in enumerate(times):
            scene = sample_scene(timeline, t)
            scenes.append(scene)
            name = f"f{index:05d}.svg"
            (frames_dir / name).write_text(render_svg(scene), encoding="utf-8")
            manifest["frames"].append({
                "index": index,
                "t": t,
                "stage": stage_for_time(plan, t),
                "file": f"frames/{name}",
            })
        (out / "manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
        if fmt == "gif":
            write_gif(scenes, out / "animation.gif", fps)
        return manifest
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


# --------------------------------------------------------------------------
# Rasterization (Pillow)


def _rgb(color):
    color = color.lstrip("#")
    return tuple(int(color[i:i + 2], 16) for i in (0, 2, 4))


def _sector_polygon(geom, segments=48):
    cx, cy = geom["cx"], geom["cy"]
    r0, r1 = geom.get("r0", 0.0), geom["r1"]
    a0, a1 = geom["a0"], geom["a1"]
    pts = []
    for i in range(segments + 1):
        a = a0 + (a1 - a0) * i / segments
        pts.append((cx + r1 * math.sin(a), cy - r1 * math.cos(a)))
    if r0 > 1e-9:
        for i in range(segments + 1):
            a = a1 + (a0 - a1) * i / segments
            pts.append((cx + r0 * math.sin(a), cy - r0 * math.cos(a)))
    else:
        pts.append((cx, cy))
    return pts


def rasterize_scene(scene):
    """Draw a scene to an RGB image at canvas resolution."""
    from PIL import Image, ImageDraw, ImageFont

    width, height = int(scene.canvas.width), int(scene.canvas.height)
    image = Image.new("RGB", (width, height), _rgb("#ffffff"))
    font = ImageFont.load_default()

    def draw_marks(marks):
        for mark in marks:
            if mark.opacity <= 1e-9:
                continue
            if mark.opacity < 1.0 - 1e-9:
                overlay = Image.new("RGBA", (width, height), (0, 0, 0, 0))
                d = ImageDraw.Draw(overlay)
                alpha = int(round(mark.opacity * 255))
                _draw_mark(d, mark, (*_rgb(mark.fill), alpha), font)
                image.paste(
                    Image.alpha_composite(image.convert("RGBA"), overlay).convert("RGB")
                )
            else:
                d = ImageDraw.Draw(image)
                _draw_mark(d, mark, _rgb(mark.fill), font)

    draw_marks(sorted(scene.marks, key=lambda m: m.id))
    for layer in ("xaxis", "yaxis", "legend", "title"):
        draw_marks(sorted(
            (m for m in scene.chrome if m.layer == layer), key=lambda m: m.id
        ))
    return image


def _draw_mark(draw, mark, color, font):
    g = mark.geom
    if mark.shape == "rect":
        x0, y0 = g["x"], g["y"]
        x1, y1 = x0 + max(g["w"], 0.0), y0 + max(g["h"], 0.0)
        if x1 - x0 < 0.5 or y1 - y0 < 0.5:
            return
        rx = min(g.get("rx", 0.0), (x1 - x0) / 2, (y1 - y0) / 2)
        if rx > 0.5:
            draw.rounded_rectangle([x0, y0, x1, y1], radius=rx, fill=color)
        else:
            draw.rectangle([x0, y0, x1, y1], fill=color)
    elif mark.shape == "sector":
        if abs(g["a1"] - g["a0"]) < 1e-6 or g["r1"] < 0.5:
            return
        draw.polygon(_sector_polygon(g), fill=color)
    elif mark.shape == "point":
        r = max(g["r"], 0.0)
        if r < 0.25:
            return
        draw.ellipse([g["cx"] - r, g["cy"] - r, g["cx"] + r, g["cy"] + r], fill=color)
    elif mark.shape == "polyline":
        pts = [tuple(p) for p in g["pts"]]
        if len(pts) > 1:
            draw.line(pts, fill=color, width=2)
    elif mark.shape == "segment":
        draw.line([(g["x1"], g["y1"]), (g["x2"], g["y2"])], fill=color, width=1)
    elif mark.shape == "text":
        text = str(g.get("text", ""))
        if not text:
            return
        left, top, right, bottom = draw.textbbox((0, 0), text, font=font)
        w, h = right - left, bottom - top
        x, y = g["x"], g["y"] - h
        anchor = g.get("anchor", "start")
        if anchor == "middle":
            x -= w / 2
        elif anchor == "end":
            x -= w
        draw.text((x, y), text, fill=color, font=font)


def write_gif(scenes, path, fps):
    """Encode scenes as an animated GIF with a fixed global palette."""
    from PIL import Image

    frames = [rasterize_scene(scene) for scene in scenes]
    first, last = frames[0], frames[-1]
    combined = Image.new("RGB", (first.width, first.height * 2))
    combined.paste(first, (0, 0))
    combined.paste(last, (0, first.height))
    palette_img = combined.quantize(colors=256)
    quantized = [f.quantize(palette=palette_img, dither=Image.Dither.NONE) for f in frames]
    duration = max(int(round(1000.0 / fps)), 20)
    quantized[0].save(
        path,
        save_all=True,
        append_images=quantized[1:],
        duration=duration,
        loop=0,
    )
    return path
