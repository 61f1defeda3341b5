"""Command-line entry points.

Exit codes: 0 success, 1 validation problem (bad documents, unsupported
configuration), 2 internal error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .document import DocumentError
from .effects import UnsupportedCombination
from .export import FORMATS, export
from .pipeline import parse_config, plan_json, plan_transition, synthesize
from .sequence import CyclicPriority, NonPositiveTotal

VALIDATION_ERRORS = (
    DocumentError, UnsupportedCombination, NonPositiveTotal, CyclicPriority,
    ValueError,
)


def _config_from_flags(timing, step_ms, easing, effect, flip_preference):
    effects = {}
    for item in effect:
        if "=" not in item:
            raise ValueError(f"--effect expects <unitKind>=<effectId>, got '{item}'")
        kind, _, value = item.partition("=")
        effects[kind] = value
    return parse_config({
        "timing": timing,
        "stepMs": step_ms,
        "easing": easing,
        "effects": effects,
        "flipPreferences": list(flip_preference),
    })


def _fail(exc):
    if isinstance(exc, DocumentError):
        for violation in exc.violations:
            click.echo(str(violation), err=True)
    else:
        click.echo(str(exc), err=True)
    sys.exit(1)


_common_options = [
    click.option("--timing", default="animation", show_default=True,
                 help="'animation' or 'fixed:<ms>'"),
    click.option("--step-ms", default=500, show_default=True, type=int,
                 help="duration of one animation step"),
    click.option("--easing", default="linear", show_default=True,
                 type=click.Choice(["linear", "in-out"])),
    click.option("--effect", multiple=True, metavar="KIND=EFFECT",
                 help="override an effect binding (repeatable)"),
    click.option("--flip-preference", multiple=True, metavar="ROW",
                 help="flip one priority-table row (repeatable)"),
]


def _with_options(fn):
    for option in reversed(_common_options):
        fn = option(fn)
    return fn


@click.group()
def main():
    """Generate staged animated transitions between two charts."""


@main.command("plan")
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@click.argument("target", type=click.Path(exists=True, dir_okay=False))
@_with_options
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="write plan.json here instead of stdout")
def cmd_plan(source, target, timing, step_ms, easing, effect, flip_preference, out):
    """Identify, order and time the transition; emit the plan document."""
    try:
        config = _config_from_flags(timing, step_ms, easing, effect, flip_preference)
        bundle = plan_transition(
            Path(source).read_bytes(), Path(target).read_bytes(), config
        )
        text = plan_json(bundle.document())
    except VALIDATION_ERRORS as exc:
        _fail(exc)
        return
    except Exception as exc:  # pragma: no cover - internal failure path
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(2)
    if out:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "plan.json").write_text(text, encoding="utf-8")
        click.echo(str(out_dir / "plan.json"))
    else:
        click.echo(text, nl=False)


@main.command("render")
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@click.argument("target", type=click.Path(exists=True, dir_okay=False))
@_with_options
@click.option("--fps", default=30, show_default=True, type=int)
@click.option("--format", "fmt", default="frames", show_default=True,
              type=click.Choice(list(FORMATS)))
@click.option("--out", type=click.Path(file_okay=False), required=True)
def cmd_render(source, target, timing, step_ms, easing, effect, flip_preference,
               fps, fmt, out):
    """Synthesize the animation and export plan, frames and optional GIF."""
    try:
        config = _config_from_flags(timing, step_ms, easing, effect, flip_preference)
        bundle = plan_transition(
            Path(source).read_bytes(), Path(target).read_bytes(), config
        )
        timeline_bundle = synthesize(bundle)
        manifest = export(
            timeline_bundle.timeline, bundle.plan, bundle.document(),
            out, fps=fps, fmt=fmt,
        )
    except VALIDATION_ERRORS as exc:
        _fail(exc)
        return
    except Exception as exc:  # pragma: no cover - internal failure path
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(2)
    click.echo(json.dumps({
        "out": str(out),
        "frames": len(manifest["frames"]),
        "total": manifest["total"],
    }))


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8008, show_default=True, type=int)
def cmd_serve(host, port):
    """Run the stateless HTTP facade."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
