# maw/integration_tests/conftest.py
import json
from pathlib import Path

import pytest

from maw.config import get_settings
from maw.io.ingest import read_stays
from maw.io.synth import generate_synthetic, write_synthetic
from maw.main import main
from maw.schemas import SynthConfig


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    for name in ("MAW_UTC_OFFSET_MIN", "MAW_ACCURACY_SPLIT_M", "MAW_WORKERS", "MAW_DEBUG_CHECKS", "MAW_PROGRESS"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def cli():
    """Run the command line in-process and return its exit code."""

    def run(*argv):
        return main([str(arg) for arg in argv])

    return run


def synthetic_records(root: Path, **overrides) -> Path:
    corpus = generate_synthetic(SynthConfig(**overrides))
    return write_synthetic(corpus, root)["records"]


@pytest.fixture(scope="module")
def mixed_records(tmp_path_factory):
    """Half GPS, half cellular, with ping-pong events."""
    return synthetic_records(tmp_path_factory.mktemp("mixed"), seed=11, n_users=4, days=2, oscillation_rate=0.1)


@pytest.fixture(scope="module")
def gps_records(tmp_path_factory):
    return synthetic_records(tmp_path_factory.mktemp("gps"), seed=5, n_users=4, days=2, gps_fraction=1.0)


@pytest.fixture(scope="module")
def cellular_records(tmp_path_factory):
    return synthetic_records(
        tmp_path_factory.mktemp("cellular"), seed=23, n_users=6, days=2, gps_fraction=0.0, oscillation_rate=0.1
    )


def stays_of(out_dir: Path):
    return read_stays(out_dir / "stays.csv")


def stay_intervals(out_dir: Path):
    return [(device, s.start, s.end) for device, stays in stays_of(out_dir).items() for s in stays]


def comparison_rows(out_dir: Path) -> dict:
    report = json.loads((out_dir / "comparison.json").read_text())
    return {row["name"]: row for row in report["rows"]}
