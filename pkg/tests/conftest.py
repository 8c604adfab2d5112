"""Shared fixtures for the bundled warez case, plus the acceptance summary.

The terminal-summary hook prints one PASS/FAIL line per acceptance criterion
after the run, keyed off the `test_criterion_<n>_<label>` naming convention
in test_acceptance.py.
"""
from __future__ import annotations

import pathlib
import re

import pytest

from retrace import (
    AttributeCondition,
    CrimeSceneConfig,
    DigitalScene,
    IllicitPattern,
    KnowledgeBase,
    SourceDescriptor,
    extract,
    map_footprints,
    run_inference,
)
from retrace.facts import fact_set

ROOT = pathlib.Path(__file__).resolve().parents[1]
DEMO_DIR = ROOT / "cases" / "demo"
DEMO_SOURCE = DEMO_DIR / "footprints.facts"
DEMO_CONFIG = DEMO_DIR / "case.toml"
FIXTURE_DIR = pathlib.Path(__file__).resolve().parent / "fixtures"

WAREZ_PATTERN = IllicitPattern(
    "warez-site-usage",
    (AttributeCondition("object", "hostname", ("www.warez.com",)),),
)


def demo_scene_config() -> CrimeSceneConfig:
    return CrimeSceneConfig(
        physical_scenes=("company open-space office",),
        digital_scenes=(DigitalScene("153.168.1.1", (str(DEMO_SOURCE),)),),
        illicit_catalog=(WAREZ_PATTERN,),
    )


@pytest.fixture()
def demo_scene() -> CrimeSceneConfig:
    return demo_scene_config()


@pytest.fixture()
def demo_footprints():
    footprints, _ = extract(SourceDescriptor(str(DEMO_SOURCE)))
    return footprints


@pytest.fixture()
def mapped_kb(demo_footprints, demo_scene) -> KnowledgeBase:
    return map_footprints(KnowledgeBase(), demo_footprints, scene=demo_scene)


@pytest.fixture()
def inferred_kb(mapped_kb) -> KnowledgeBase:
    kb, _ = run_inference(mapped_kb)
    return kb


@pytest.fixture(scope="session")
def expected_entity_facts() -> frozenset[str]:
    return fact_set([(FIXTURE_DIR / "expected_entities.facts").read_text()])


_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[int, tuple[str, bool]] = {}
    for status, passed in (("passed", True), ("failed", False), ("error", False)):
        for report in terminalreporter.stats.get(status, ()):
            match = _CRITERION.search(getattr(report, "nodeid", ""))
            if not match:
                continue
            number = int(match.group(1))
            label = match.group(2).replace("_", " ")
            seen = outcomes.get(number, (label, True))
            outcomes[number] = (label, seen[1] and passed)
    if not outcomes:
        return
    terminalreporter.write_line("")
    for number in sorted(outcomes):
        label, ok = outcomes[number]
        terminalreporter.write_line(
            f"ACCEPTANCE {number} {label}: {'PASS' if ok else 'FAIL'}"
        )
