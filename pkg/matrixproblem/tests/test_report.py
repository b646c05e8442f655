"""
Test report functionality.

Testsuite för report-modulen som sammanställer reduktionsspår och skriver
deterministisk JSON.
"""

import json
from pathlib import Path

from matrixproblem.modules.core import problem_from_json, representation_from_json
from matrixproblem.modules.models import ProblemJSON, RepresentationJSON
from matrixproblem.modules.reduce import ReductionTrace, canonical_form
from matrixproblem.modules.report import TRACE_COLUMNS, dumps, trace_summary, trace_table, write_json

DATA = Path(__file__).resolve().parent.parent / "data"


def _trace(arrow_matrix, sizes):
    with open(DATA / "one_matrix_similarity.json", 'r', encoding='utf-8') as f:
        prob = problem_from_json(ProblemJSON(**json.load(f)))
    P = representation_from_json(RepresentationJSON(sizes=sizes, arrows={"a": arrow_matrix}), prob)
    _, trace = canonical_form(prob, P)
    return trace


class TestTraceTable:
    """Tester för trace_table och trace_summary."""

    def test_columns(self):
        """Test att tabellen har en rad per steg."""
        df = trace_table(_trace([[2, 0], [0, 3]], [2]))
        assert list(df.columns) == TRACE_COLUMNS
        assert len(df) == 1
        assert df.loc[0, "kind"] == "unraveling_loop"

    def test_summary(self):
        """Test att sammanfattningen räknar steg och länkar."""
        summary = trace_summary(_trace([[1, 1], [0, 1]], [2]))
        assert summary["links"] == 1
        assert summary["steps"] == sum(summary["by_kind"].values())

    def test_empty_trace(self):
        """Edge case: Ett tomt spår."""
        assert trace_summary(ReductionTrace(steps=[])) == {"steps": 0, "by_kind": {}, "links": 0}


class TestJsonOutput:
    """Tester för dumps och write_json."""

    def test_sorted_keys(self):
        """Test att nycklarna sorteras."""
        assert dumps({"b": 1, "a": "å"}) == '{\n  "a": "å",\n  "b": 1\n}'

    def test_write_json(self, tmp_path):
        """Test att filen skrivs och att kataloger skapas."""
        out = write_json({"links": 1}, str(tmp_path / "ut" / "canonical.json"))
        assert out.exists()
        assert json.loads(out.read_text(encoding='utf-8')) == {"links": 1}
