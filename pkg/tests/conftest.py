from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from emorette.defaults import (
    packaged_blocklist,
    packaged_entity_index,
    packaged_flow_files,
    packaged_lexicon,
    packaged_ontology,
    standard_pipeline,
)
from emorette.flows import load_flows


@pytest.fixture(scope="session")
def ontology():
    return packaged_ontology()


@pytest.fixture(scope="session")
def lexicon():
    return packaged_lexicon()


@pytest.fixture(scope="session")
def entity_index():
    return packaged_entity_index()


@pytest.fixture(scope="session")
def blocklist():
    return packaged_blocklist()


@pytest.fixture(scope="session")
def demo_graph(ontology):
    return load_flows(packaged_flow_files(), ontology)


@pytest.fixture()
def pipeline():
    return standard_pipeline()


FIXTURES = Path(__file__).parent / "fixtures"


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {status}: {name}", flush=True)
