from pathlib import Path

import pytest

from qmdgen.circuit import load_model
from qmdgen.reference import render_reference

FIXTURES = Path(__file__).parent / "fixtures"
MODEL_DIR = FIXTURES / "models"
MODEL_FILES = sorted(MODEL_DIR.glob("*.json"))


@pytest.fixture
def bell():
    return load_model(MODEL_DIR / "bell.json")


@pytest.fixture
def bell_source(bell):
    return render_reference(bell)


@pytest.fixture(params=MODEL_FILES, ids=lambda p: p.stem)
def fixture_model(request):
    return load_model(request.param)


PROGRAM_DIR = FIXTURES / "programs"


def fixture_programs():
    """(name, source) for every reference rendering plus the hand-written programs."""
    out = [(p.stem, render_reference(load_model(p))) for p in MODEL_FILES]
    out += [(p.stem, p.read_text()) for p in sorted(PROGRAM_DIR.glob("*.py"))]
    return out
