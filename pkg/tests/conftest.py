from pathlib import Path

import pytest

from ontocrawl.ontology import load_ontology_set

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def sports_ontologies():
    """The checked-in three-domain ontology set used by most fixtures."""
    return load_ontology_set(FIXTURES / "ontologies" / "manifest.json")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES
