"""
Test wild search functionality.

Testsuite för den begränsade sökningen efter vilda konfigurationer.
"""

import json
from pathlib import Path

import pytest

from matrixproblem.modules.analysis import search_configurations
from matrixproblem.modules.core import problem_from_json
from matrixproblem.modules.models import EngineSettings, ProblemJSON, VerdictJSON
from matrixproblem.modules.workflow import algebra_to_problem, wild_search

DATA = Path(__file__).resolve().parent.parent / "data"


def _problem(name):
    with open(DATA / name, 'r', encoding='utf-8') as f:
        return problem_from_json(ProblemJSON(**json.load(f)))


@pytest.fixture
def loop_then_edge():
    """En ögla a på Y följd av en kant b: X -> Y."""
    return problem_from_json(ProblemJSON(
        t=2, classes=[[1], [2]], labels=["X", "Y"],
        M1=[{"name": "a", "entries": {"2,2": 1}}, {"name": "b", "entries": {"1,2": 1}}]))


class TestSearchConfigurations:
    """Tester för search_configurations-funktionen."""

    def test_mutation_reveals_mw1(self, loop_then_edge):
        """Test att mutationen av a ger MW1 vid b."""
        verdict = search_configurations(loop_then_edge, depth=2)
        assert verdict.tag == "MW1"
        assert verdict.arrow == "b"
        assert verdict.path == ["loop_mutation(a)"]

    def test_depth_zero(self, loop_then_edge):
        """Edge case: sökdjup 0 prövar bara startproblemet."""
        assert search_configurations(loop_then_edge, depth=0).tag == "None"

    def test_hit_at_start(self):
        """Test att en träff i startproblemet har en tom stig."""
        verdict = search_configurations(_problem("two_loops.json"))
        assert verdict.tag == "not (i)/(ii)"
        assert verdict.path == []

    def test_single_loop_is_tame(self):
        """Test att en ensam ögla inte ger någon vild konfiguration."""
        assert search_configurations(_problem("one_matrix_similarity.json")).tag == "None"

    def test_node_limit(self, loop_then_edge):
        """Test att nodtaket stoppar sökningen."""
        assert search_configurations(loop_then_edge, depth=2, max_nodes=1).tag == "None"


class TestWildSearch:
    """Tester för wild_search i arbetsflödet."""

    def test_settings_depth(self):
        """Test att inställningarnas djup används."""
        prob = algebra_to_problem(str(DATA / "example_145.json"))
        verdict = wild_search(prob, EngineSettings(wild_depth=0))
        assert verdict.tag == "None"
        VerdictJSON(**verdict.to_json(prob.field))

    def test_default_settings(self, loop_then_edge):
        """Test att standardinställningarna hittar MW1."""
        assert wild_search(loop_then_edge).tag == "MW1"
