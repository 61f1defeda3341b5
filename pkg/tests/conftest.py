import json
from pathlib import Path

import pytest

from chartmorph.pipeline import parse_config, plan_transition, synthesize

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fixture_bytes(name, side):
    return (FIXTURES / f"{name}_{side}.json").read_bytes()


def fixture_pair(name):
    return fixture_bytes(name, "source"), fixture_bytes(name, "target")


def fixture_names():
    return sorted({p.name.rsplit("_", 1)[0] for p in FIXTURES.glob("*_source.json")})


def plan_for(name, options=None):
    source, target = fixture_pair(name)
    return plan_transition(source, target, parse_config(options))


def synth_for(name, options=None):
    return synthesize(plan_for(name, options))


@pytest.fixture
def composite_bundle():
    return plan_for("composite")


def load_doc(name, side):
    return json.loads(fixture_bytes(name, side))
