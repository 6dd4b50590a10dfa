from __future__ import annotations

from pathlib import Path

import pytest

from termlink.kb import build_from_release, sample_release_dir
from termlink.pipeline import Annotator

FIXTURES = Path(__file__).parent / "fixtures"
MINI_RELEASE = FIXTURES / "mini_release"


@pytest.fixture(scope="session")
def sample_kb():
    return build_from_release(sample_release_dir())


@pytest.fixture(scope="session")
def annotator(sample_kb):
    return Annotator(sample_kb)


@pytest.fixture(scope="session")
def mini_kb():
    return build_from_release(MINI_RELEASE)
