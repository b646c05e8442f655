"""
Test cli functionality.

Testsuite för kommandoradsgränssnittet: underkommandon, utdatafiler och
exit-koder.
"""

import json
from pathlib import Path

import pytest

from matrixproblem.modules.cli import EXIT_INVALID, EXIT_NON_SPLIT, EXIT_OK, run

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def similarity():
    """Sökväg till likformighetsproblemet."""
    return str(DATA / "one_matrix_similarity.json")


def _write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding='utf-8')
    return str(path)


def _stdout(capsys):
    return json.loads(capsys.readouterr().out)


class TestCanon:
    """Tester för underkommandot canon."""

    def test_stdout(self, tmp_path, capsys, similarity):
        """Test att kanonisk form och spår skrivs till stdout."""
        rep = _write(tmp_path, "rep.json", {"sizes": [2], "arrows": {"a": [[1, 1], [0, 1]]}})
        assert run(["canon", "-p", similarity, "-r", rep]) == EXIT_OK
        out = _stdout(capsys)
        assert out["canonical.json"]["links"] == 1
        assert out["canonical.json"]["indecomposable"] is True
        assert out["trace.json"]["steps"][0]["kind"] == "unraveling_loop"

    def test_out_directory(self, tmp_path, similarity):
        """Test att --out skriver canonical.json och trace.json."""
        rep = _write(tmp_path, "rep.json", {"sizes": [2], "arrows": {"a": [[2, 0], [0, 3]]}})
        out_dir = tmp_path / "ut"
        assert run(["canon", "-p", similarity, "-r", rep, "--out", str(out_dir)]) == EXIT_OK
        assert json.loads((out_dir / "canonical.json").read_text(encoding='utf-8'))["links"] == 0
        assert (out_dir / "trace.json").exists()

    def test_non_split_spectrum(self, tmp_path, capsys, similarity):
        """Test att en rotation över Q ger exit-kod 3 och resten av polynomet."""
        rep = _write(tmp_path, "rep.json", {"sizes": [2], "arrows": {"a": [[0, -1], [1, 0]]}})
        assert run(["canon", "-p", similarity, "-r", rep]) == EXIT_NON_SPLIT
        err = _stdout(capsys)
        assert err["error"] == "NonSplitSpectrum"
        assert "residual" in err

    def test_field_flag(self, tmp_path, capsys, similarity):
        """Test att --field gf:5 vinner över filens kropp."""
        rep = _write(tmp_path, "rep.json", {"sizes": [2], "arrows": {"a": [[0, -1], [1, 0]]}})
        assert run(["canon", "-p", similarity, "-r", rep, "--field", "gf:5"]) == EXIT_OK
        assert _stdout(capsys)["canonical.json"]["links"] == 0


class TestErrors:
    """Tester för valideringsfel."""

    def test_missing_file(self, tmp_path, capsys):
        """Test att en saknad fil ger exit-kod 2."""
        assert run(["layer", "-p", str(tmp_path / "saknas.json")]) == EXIT_INVALID
        assert _stdout(capsys)["error"] == "FileNotFoundError"

    def test_broken_json(self, tmp_path, capsys):
        """Test att trasig JSON ger exit-kod 2."""
        path = tmp_path / "problem.json"
        path.write_text("{", encoding='utf-8')
        assert run(["layer", "-p", str(path)]) == EXIT_INVALID
        assert _stdout(capsys)["error"] == "JSONDecodeError"

    def test_invalid_problem(self, tmp_path, capsys):
        """Test att ett problem som inte validerar ger exit-kod 2."""
        prob = _write(tmp_path, "problem.json", {"t": 2, "classes": [[1]]})
        assert run(["layer", "-p", prob]) == EXIT_INVALID

    def test_iso_needs_two(self, tmp_path, capsys, similarity):
        """Edge case: iso med en representation."""
        rep = _write(tmp_path, "rep.json", {"sizes": [1], "arrows": {"a": [[1]]}})
        assert run(["iso", "-p", similarity, "-r", rep]) == EXIT_INVALID
        assert _stdout(capsys)["error"] == "ValueError"

    def test_error_file(self, tmp_path, similarity):
        """Test att felet skrivs till error.json med --out."""
        out_dir = tmp_path / "ut"
        assert run(["indec", "-p", similarity, "-r", str(tmp_path / "saknas.json"),
                    "--out", str(out_dir)]) == EXIT_INVALID
        assert (out_dir / "error.json").exists()


class TestOtherCommands:
    """Tester för övriga underkommandon."""

    def test_iso(self, tmp_path, capsys, similarity):
        """Test att två likformiga matriser är isomorfa."""
        r1 = _write(tmp_path, "r1.json", {"sizes": [2], "arrows": {"a": [[1, 1], [0, 1]]}})
        r2 = _write(tmp_path, "r2.json", {"sizes": [2], "arrows": {"a": [[1, 0], [5, 1]]}})
        assert run(["iso", "-p", similarity, "-r", r1, "-r", r2]) == EXIT_OK
        assert _stdout(capsys) == {"isomorphic": True}

    def test_morphism(self, tmp_path, capsys):
        """Test att morphism ger samma utfall för de täta matriserna och formeln."""
        problem = str(DATA / "one_matrix_equivalence.json")
        r1 = _write(tmp_path, "r1.json", {"sizes": [1, 1], "arrows": {"a": [[1]]}})
        r2 = _write(tmp_path, "r2.json", {"sizes": [1, 1], "arrows": {"a": [[2]]}})
        good = _write(tmp_path, "good.json", {"classes": {"0": [[1]], "1": [[2]]}})
        bad = _write(tmp_path, "bad.json", {"classes": {"0": [[2]], "1": [[1]]}})
        assert run(["morphism", "-p", problem, "-r", r1, "-r", r2, "-f", good]) == EXIT_OK
        assert _stdout(capsys) == {"morphism": {"classes": {"0": [["1"]], "1": [["2"]]}, "dotted": {}},
                                   "is_morphism": True, "formula": True}
        assert run(["morphism", "-p", problem, "-r", r1, "-r", r2, "-f", bad]) == EXIT_OK
        out = _stdout(capsys)
        assert out["is_morphism"] is False
        assert out["formula"] is False

    def test_morphism_missing_class(self, tmp_path, capsys):
        """Edge case: en morfism utan f_Y ger exit-kod 2."""
        problem = str(DATA / "one_matrix_equivalence.json")
        r1 = _write(tmp_path, "r1.json", {"sizes": [1, 1], "arrows": {"a": [[1]]}})
        f = _write(tmp_path, "f.json", {"classes": {"0": [[1]]}})
        assert run(["morphism", "-p", problem, "-r", r1, "-r", r1, "-f", f]) == EXIT_INVALID
        assert _stdout(capsys)["error"] == "ShapeMismatch"

    def test_from_algebra(self, capsys):
        """Test att algebrafilen blir ett bipartit problem."""
        assert run(["from-algebra", str(DATA / "example_145.json")]) == EXIT_OK
        out = _stdout(capsys)
        assert out["t"] == 10
        assert [b["name"] for b in out["M1"]] == ["a", "b", "c", "d"]

    def test_wild(self, capsys):
        """Test att wild hittar MW1 för mw1-problemet."""
        assert run(["wild", "-p", str(DATA / "mw1.json")]) == EXIT_OK
        assert _stdout(capsys)["tag"] == "MW1"

    def test_wild_depth_zero(self, capsys):
        """Test att --depth 0 bara prövar startproblemet."""
        assert run(["wild", "-p", str(DATA / "one_matrix_equivalence.json"), "--depth", "0"]) == EXIT_OK
        assert _stdout(capsys)["tag"] == "None"

    def test_replay(self, tmp_path, capsys):
        """Test att replay ger ett stadium per steg."""
        steps = _write(tmp_path, "steps.json", {"steps": [{"kind": "edge", "G": [[1]]}]})
        assert run(["replay", "-p", str(DATA / "one_matrix_equivalence.json"), "-s", steps]) == EXIT_OK
        stages = _stdout(capsys)["stages"]
        assert [s["step"] for s in stages] == [0, 1]
        assert stages[1]["problem"]["M1"] == []

    def test_replay_wrong_problem(self, capsys):
        """Test att steg som inte passar problemet ger exit-kod 2."""
        assert run(["replay", "-p", str(DATA / "one_matrix_equivalence.json"),
                    "-s", str(DATA / "replay_merged_loop.json")]) == EXIT_INVALID
        assert _stdout(capsys)["error"] == "IllegalStep"

    def test_schema(self, capsys):
        """Test att schema skriver JSON-schemat för en modell."""
        assert run(["schema", "problem"]) == EXIT_OK
        assert "properties" in _stdout(capsys)

    def test_unknown_schema(self, capsys):
        """Edge case: Okänt schemanamn."""
        assert run(["schema", "budget"]) == EXIT_INVALID
        assert _stdout(capsys)["error"] == "KeyError"
