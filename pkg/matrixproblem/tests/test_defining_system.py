"""
Test defining system functionality.

Testsuite för de definierande systemen: lösningsrummets dimension,
frontkontrollen δ = 0 och uppdelningen vid en pivot.
"""

import json
from pathlib import Path

import pytest

from matrixproblem.modules.core import assemble, problem_from_json, representation_from_json
from matrixproblem.modules.exactalg import MixedGroup, UnsupportedCoefficient, zeros
from matrixproblem.modules.models import ProblemJSON, RepresentationJSON
from matrixproblem.modules.reduce import (
    build_defining_system,
    delta_is_zero,
    deformed_system,
    lead_blocks,
)

DATA = Path(__file__).resolve().parent.parent / "data"


def _problem(name):
    with open(DATA / name, 'r', encoding='utf-8') as f:
        return problem_from_json(ProblemJSON(**json.load(f)))


@pytest.fixture
def equivalence():
    """Matrisekvivalens med en pil a: X -> Y."""
    return _problem("one_matrix_equivalence.json")


def _hk(prob, sizes, a):
    P = representation_from_json(RepresentationJSON(sizes=sizes, arrows={"a": a}), prob)
    return assemble(P, prob)


class TestLeadBlocks:
    """Tester för lead_blocks-funktionen."""

    def test_blocks(self, equivalence):
        """Test att blocket för a täcker rader i X och kolumner i Y."""
        assert lead_blocks(equivalence, [2, 3]) == [("a", (0, 2), (2, 5))]

    def test_before_frontier(self, equivalence):
        """Test att bara baser strikt före fronten tas med."""
        assert lead_blocks(equivalence, [2, 3], before=(1, 2)) == []


class TestBuildDefiningSystem:
    """Tester för build_defining_system-funktionen."""

    def test_solution_dimension(self, equivalence):
        """Test att stabilisatorn av en rang 1-matris i 2×2 har dimension 5."""
        Hk = _hk(equivalence, [2, 2], [[1, 0], [0, 0]])
        ds = build_defining_system(equivalence, [2, 2], Hk)
        assert len(ds.variables) == 8
        assert ds.frontier is None
        assert ds.dim() == 5
        assert len(ds.solution_basis()) == 5

    def test_parametric_problem(self):
        """Test att systemen kräver ett skalärt problem."""
        prob = _problem("mw1.json")
        with pytest.raises(UnsupportedCoefficient):
            build_defining_system(prob, [1, 1], zeros(prob.field, 2, 2))


class TestDeltaIsZero:
    """Tester för delta_is_zero-funktionen."""

    def test_zero_matrix(self, equivalence):
        """Test att H(k) = 0 ger δ = 0 vid fronten."""
        Hk = zeros(equivalence.field, 4, 4)
        ds = build_defining_system(equivalence, [2, 2], Hk, frontier=(1, 2))
        assert delta_is_zero(ds)

    def test_nonzero_entry(self, equivalence):
        """Test att a = [[1]] ger en oberoende ekvation vid fronten."""
        ds = build_defining_system(equivalence, [1, 1], _hk(equivalence, [1, 1], [[1]]), frontier=(1, 2))
        assert not delta_is_zero(ds)

    def test_mixed_group(self, equivalence):
        """Test att en delvis beroende grupp avvisas."""
        ds = build_defining_system(equivalence, [2, 2],
                                   _hk(equivalence, [2, 2], [[1, 0], [0, 0]]), frontier=(1, 2))
        with pytest.raises(MixedGroup):
            delta_is_zero(ds)

    def test_no_frontier(self, equivalence):
        """Edge case: systemet saknar front."""
        ds = build_defining_system(equivalence, [1, 1], _hk(equivalence, [1, 1], [[1]]))
        with pytest.raises(ValueError):
            delta_is_zero(ds)


class TestDeformedSystem:
    """Tester för deformed_system-funktionen."""

    def test_split_at_zero(self, equivalence):
        """Test att pivot 0 lägger hela H(k) i första delen."""
        Q = equivalence.field
        ds = build_defining_system(equivalence, [1, 1], _hk(equivalence, [1, 1], [[1]]), frontier=(1, 2))
        deformed = deformed_system(ds, 0)
        assert deformed.first.frontier.equations == ds.frontier.equations
        assert all(Q.is_zero(v) for eq in deformed.second.frontier.equations for v in eq)
        assert delta_is_zero(deformed.second)
