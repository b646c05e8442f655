"""
Test ingest functionality.

Testsuite för ingest-modulen som läser algebratabeller och monomiala
koggar och bygger det bipartita problemet.
"""

import json
from pathlib import Path

import pytest

from matrixproblem.modules.core import problem_from_json
from matrixproblem.modules.exactalg import Field, InfiniteDimensional, InvalidTable, NotBipartite
from matrixproblem.modules.ingest import (
    QuiverSpec,
    bipartite_problem,
    load_algebra,
    rdcc_check,
    table_from_json,
    table_from_monomial_quiver,
)
from matrixproblem.modules.models import AlgebraSpec, ProblemJSON

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def Q():
    """De rationella talen."""
    return Field("rational")


@pytest.fixture
def dual_numbers(Q):
    """k[t]/(t²) som tabell."""
    spec = AlgebraSpec(basis=["t", "e"], idempotents=["e"],
                       st={"t": [1, 1], "e": [1, 1]}, mul={})
    return table_from_json(spec, Q)


class TestAlgebraTable:
    """Tester för AlgebraTable och validate_table."""

    def test_idempotent_products(self, dual_numbers, Q):
        """Test att produkter med idempotenter fylls i automatiskt."""
        assert dual_numbers.product("e", "t") == {"t": Q.one}
        assert dual_numbers.product("t", "e") == {"t": Q.one}
        assert dual_numbers.product("e", "e") == {"e": Q.one}
        assert dual_numbers.product("t", "t") == {}

    def test_radical(self, dual_numbers):
        """Test att radikalen är basen utan idempotenter."""
        assert dual_numbers.radical == ["t"]

    def test_not_associative(self, Q):
        """Test att en icke-associativ tabell avvisas."""
        spec = AlgebraSpec(basis=["b", "a", "e"], idempotents=["e"],
                           st={"b": [1, 1], "a": [1, 1], "e": [1, 1]},
                           mul={"a*a": {"b": 1}, "a*b": {"b": 1}})
        with pytest.raises(InvalidTable):
            table_from_json(spec, Q)

    def test_idempotent_st(self, Q):
        """Test att idempotent nummer s måste ha st = [s, s]."""
        spec = AlgebraSpec(basis=["e1", "e2"], idempotents=["e1", "e2"],
                           st={"e1": [1, 1], "e2": [1, 1]})
        with pytest.raises(InvalidTable):
            table_from_json(spec, Q)

    def test_radical_after_idempotent(self, Q):
        """Test att radikalelementen måste komma först i basen."""
        spec = AlgebraSpec(basis=["e", "t"], idempotents=["e"],
                           st={"t": [1, 1], "e": [1, 1]})
        with pytest.raises(InvalidTable):
            table_from_json(spec, Q)


class TestMonomialQuiver:
    """Tester för table_from_monomial_quiver-funktionen."""

    def test_loop_with_relation(self, Q):
        """Test att en loop med t² = 0 ger k[t]/(t²)."""
        tab = load_algebra(str(DATA / "quiver_a2.json"), Q)
        assert tab.basis == ["t", "e1"]
        assert tab.product("t", "t") == {}

    def test_path_algebra(self, Q):
        """Test att vägarna sorteras efter avtagande längd."""
        q = QuiverSpec(vertices=["1", "2", "3"],
                       arrows=[("a", "1", "2"), ("b", "2", "3")], relations=[])
        tab = table_from_monomial_quiver(q, Q)
        assert tab.basis == ["ab", "a", "b", "e1", "e2", "e3"]
        assert tab.product("a", "b") == {"ab": Q.one}
        assert tab.st["ab"] == (1, 3)

    def test_infinite_dimensional(self, Q):
        """Test att en loop utan relationer avvisas."""
        q = QuiverSpec(vertices=["1"], arrows=[("t", "1", "1")], relations=[])
        with pytest.raises(InfiniteDimensional):
            table_from_monomial_quiver(q, Q, max_path_length=3)

    def test_missing_file(self, Q, tmp_path):
        """Edge case: Filen saknas."""
        with pytest.raises(FileNotFoundError):
            load_algebra(str(tmp_path / "saknas.json"), Q)


class TestBipartiteProblem:
    """Tester för bipartite_problem och rdcc_check."""

    def test_dual_numbers(self, Q):
        """Test av det bipartita problemet för k[t]/(t²)."""
        prob = bipartite_problem(load_algebra(str(DATA / "quiver_a2.json"), Q))
        assert prob.t == 4
        assert [c.label for c in prob.classes] == ["e1_L", "e1_R"]
        assert [c.side for c in prob.classes] == ["row", "col"]
        assert {V.name for V in prob.K1} == {"v1", "u1"}
        assert [A.name for A in prob.M1] == ["t"]
        assert prob.H == {}

    def test_rdcc_holds_for_bipartite(self, Q):
        """Test att RDCC gäller för algebran med bas d, c, b, a, e."""
        prob = bipartite_problem(load_algebra(str(DATA / "example_145.json"), Q))
        assert rdcc_check(prob)

    def test_rdcc_needs_sides(self):
        """Test att RDCC kräver en rad/kolumn-indelning."""
        with open(DATA / "one_matrix_similarity.json", 'r', encoding='utf-8') as f:
            prob = problem_from_json(ProblemJSON(**json.load(f)))
        with pytest.raises(NotBipartite):
            rdcc_check(prob)
