"""Shared fixtures: corpus loading, canned images, acceptance reporting."""

from __future__ import annotations

import pathlib

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from blinqs.pipeline import encode_image
from blinqs.raster import read_image

TESTS_DIR = pathlib.Path(__file__).resolve().parent
CORPUS_DIR = TESTS_DIR / "corpus"
DATA_DIR = TESTS_DIR / "data"

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# One summary line per acceptance criterion, echoed after the test report.
ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert."""

    def record(number: int, ok: bool, detail: str):
        line = f"ACCEPTANCE {number:2d} {'PASS' if ok else 'FAIL'} — {detail}"
        print(line)
        request.config.stash[ACCEPTANCE_KEY].append(line)
        if not ok:
            pytest.fail(line, pytrace=False)

    return record


@pytest.fixture(scope="session")
def corpus_dir() -> pathlib.Path:
    return CORPUS_DIR


@pytest.fixture(scope="session")
def corpus() -> list[tuple[str, np.ndarray]]:
    paths = sorted(CORPUS_DIR.glob("*.pgm"))
    assert paths, f"committed corpus missing under {CORPUS_DIR}"
    return [(p.stem, read_image(str(p))) for p in paths]


def make_test_image(side: int = 64, seed: int = 7) -> np.ndarray:
    """Deterministic smooth-plus-texture grayscale test card."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:side, 0:side].astype(np.float64)
    img = 96.0 + 80.0 * np.sin(x / 9.0) * np.cos(y / 13.0)
    img += 24.0 * np.exp(-((x - side / 3) ** 2 + (y - side / 2) ** 2) / 90.0)
    img += rng.normal(0.0, 3.0, size=(side, side))
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


@pytest.fixture(scope="session")
def small_image() -> np.ndarray:
    return make_test_image(64, seed=7)


@pytest.fixture(scope="session")
def encoded_small(small_image):
    """Full-quality encode of the 64x64 test card (module defaults)."""
    return encode_image(small_image)
