import json
from pathlib import Path

import pytest

from wca.fixtures import FX_BENCH, FX_CLASSIFY, gen_fixtures

FIXTURE_SEED = 7


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("fixtures")
    gen_fixtures(root, seed=FIXTURE_SEED)
    return root


@pytest.fixture(scope="session")
def classify_fixture(fixture_dir) -> dict:
    base = fixture_dir / FX_CLASSIFY
    return {
        "dir": base,
        "manifest": base / "manifest.jsonl",
        "descriptions": base / "descriptions.json",
        "embeddings": base / "embeddings.wem1",
        "expected": json.loads((base / "expected.json").read_text()),
    }


@pytest.fixture(scope="session")
def bench_fixture(fixture_dir) -> dict:
    base = fixture_dir / FX_BENCH
    return {
        "dir": base,
        "manifest": base / "manifest.jsonl",
        "descriptions": base / "descriptions.json",
        "embeddings": base / "embeddings.wem1",
        "expected": json.loads((base / "expected.json").read_text()),
    }
