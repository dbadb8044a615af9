from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def golden_corpus():
    from maskeval import load_corpus

    return load_corpus(FIXTURES / "golden_corpus.json")
