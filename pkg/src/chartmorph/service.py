"""Stateless HTTP facade over the pipeline.

Every request carries the full chart pair plus configuration, so
requests are independent and the handlers share only immutable default
tables. Responses use the same document schemas as the on-disk formats.
"""

from __future__ import annotations

import io
import json
import zipfile

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse, Response

from .document import DocumentError
from .effects import (
    ALLOWED_EFFECTS, EASINGS, UnsupportedCombination, morph_plan_table,
)
from .export import FORMATS, frame_times, stage_for_time
from .layout import PALETTE
from .pipeline import (
    parse_config, plan_document, plan_transition, scene_document,
    synthesize, timeline_document,
)
from .render import render_svg, sample_scene
from .sequence import DEFAULT_PRIORITY_ROWS, CyclicPriority, NonPositiveTotal

app = FastAPI(title="chartmorph", version="0.1.0")

# Serve the preview client when its directory is present (repo checkout).
_frontend_dir = __import__("pathlib").Path(__file__).resolve().parents[2] / "frontend"
if _frontend_dir.is_dir():
    from fastapi.staticfiles import StaticFiles

    app.mount("/ui", StaticFiles(directory=str(_frontend_dir), html=True), name="ui")

VALIDATION_ERRORS = (
    DocumentError, UnsupportedCombination, NonPositiveTotal, CyclicPriority,
    ValueError,
)


def _error_response(exc):
    if isinstance(exc, DocumentError):
        violations = [
            {"code": v.code, "message": v.message, "path": v.path}
            for v in exc.violations
        ]
    else:
        violations = [{"code": type(exc).__name__, "message": str(exc), "path": ""}]
    return JSONResponse(status_code=400, content={
        "error": "validation failed", "violations": violations,
    })


def _plan_bundle(body):
    source = body.get("source")
    target = body.get("target")
    if source is None or target is None:
        raise ValueError("body must carry 'source' and 'target' chart documents")
    config = parse_config(body.get("config"))
    return plan_transition(
        json.dumps(source).encode(), json.dumps(target).encode(), config
    )


@app.post("/plan")
def post_plan(body: dict = Body(...)):
    try:
        bundle = _plan_bundle(body)
        doc = plan_document(bundle.plan, bundle.transition)
        if body.get("includeTimeline"):
            timeline_bundle = synthesize(bundle)
            doc["timeline"] = timeline_document(timeline_bundle.timeline)
            doc["sourceScene"] = scene_document(timeline_bundle.source_scene)
            doc["targetScene"] = scene_document(timeline_bundle.target_scene)
    except VALIDATION_ERRORS as exc:
        return _error_response(exc)
    return JSONResponse(content=doc)


@app.post("/frames")
def post_frames(body: dict = Body(...)):
    try:
        bundle = _plan_bundle(body)
        timeline_bundle = synthesize(bundle)
        fps = int(body.get("fps", 30))
        if fps <= 0:
            raise ValueError("fps must be positive")
        times = body.get("times")
        if times is None:
            times = frame_times(bundle.plan.total, fps)
            t_range = body.get("range")
            if t_range:
                lo = float(t_range.get("from", 0))
                hi = float(t_range.get("to", bundle.plan.total))
                times = [t for t in times if lo - 1e-9 <= t <= hi + 1e-9]
        frames = []
        for index, t in enumerate(times):
            scene = sample_scene(timeline_bundle.timeline, float(t))
            frames.append({
                "index": index,
                "t": float(t),
                "stage": stage_for_time(bundle.plan, float(t)),
                "svg": render_svg(scene),
                "marks": scene_document(scene)["marks"],
            })
    except VALIDATION_ERRORS as exc:
        return _error_response(exc)
    return JSONResponse(content={"total": bundle.plan.total, "frames": frames})


@app.post("/export")
def post_export(body: dict = Body(...)):
    import tempfile
    from pathlib import Path

    try:
        bundle = _plan_bundle(body)
        fmt = body.get("format", "frames")
        if fmt not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        fps = int(body.get("fps", 30))
        if fps <= 0:
            raise ValueError("fps must be positive")
        timeline_bundle = synthesize(bundle)
        from .export import export as export_fn

        with tempfile.TemporaryDirectory() as tmp:
            export_fn(
                timeline_bundle.timeline, bundle.plan,
                plan_document(bundle.plan, bundle.transition),
                tmp, fps=fps, fmt=fmt,
            )
            buffer = io.BytesIO()
            root = Path(tmp)
            with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as archive:
                for path in sorted(root.rglob("*")):
                    if path.is_file():
                        archive.writestr(
                            str(path.relative_to(root)), path.read_bytes()
                        )
    except VALIDATION_ERRORS as exc:
        return _error_response(exc)
    return Response(
        content=buffer.getvalue(),
        media_type="application/zip",
        headers={"Content-Disposition": "attachment; filename=transition.zip"},
    )


@app.get("/defaults")
def get_defaults():
    return JSONResponse(content={
        "effects": {kind: list(effects) for kind, effects in ALLOWED_EFFECTS.items()},
        "morphPlans": morph_plan_table(),
        "easings": list(EASINGS),
        "palette": list(PALETTE),
        "priorityRows": [
            {"name": row["name"], "frequency": row["frequency"]}
            for row in DEFAULT_PRIORITY_ROWS
        ],
        "config": {
            "timing": "animation | fixed:<ms>",
            "stepMs": 500,
            "easing": ["linear", "in-out"],
            "effects": "{unitKind: effectId}",
            "flipPreferences": [row["name"] for row in DEFAULT_PRIORITY_ROWS],
        },
        "formats": list(FORMATS),
    })
