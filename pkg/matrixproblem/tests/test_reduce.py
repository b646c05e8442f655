"""
Test reduce functionality.

Testsuite för reduce-modulen som tillämpar symboliska reduktioner och
räknar ut kanoniska former, isomorfi och odelbarhet.
"""

import json
from pathlib import Path

import pytest

from matrixproblem.modules.core import problem_from_json, representation_from_json
from matrixproblem.modules.exactalg import (
    Field,
    IllegalStep,
    IrregularWeyr,
    NonSplitSpectrum,
    to_matrix,
    uni,
    x,
)
from matrixproblem.modules.models import ProblemJSON, RepresentationJSON, TraceJSON
from matrixproblem.modules.reduce import (
    ReductionStep,
    apply_reduction,
    canonical_form,
    canonical_to_json,
    indecomposable,
    iso,
    reduction_block_diagonal,
    replay_trace,
    trace_to_json,
)

DATA = Path(__file__).resolve().parent.parent / "data"


def _problem(name, **overrides):
    with open(DATA / name, 'r', encoding='utf-8') as f:
        data = json.load(f)
    data.update(overrides)
    return problem_from_json(ProblemJSON(**data))


def _rep(prob, sizes, **arrows):
    return representation_from_json(RepresentationJSON(sizes=sizes, arrows=arrows), prob)


@pytest.fixture
def equivalence():
    """Matrisekvivalens med en pil a: X -> Y."""
    return _problem("one_matrix_equivalence.json")


@pytest.fixture
def similarity():
    """Matrislikformighet med en ögla a på X."""
    return _problem("one_matrix_similarity.json")


@pytest.fixture
def mw1():
    """En parametrisk och en trivial klass."""
    return _problem("mw1.json")


class TestSymbolicEdge:
    """Tester för kantreduktionen."""

    def test_rank_one_block(self, equivalence):
        """Test att G = [[0, 1], [0, 0]] delar X och Y i tre klasser."""
        prob = apply_reduction(equivalence, ReductionStep(kind="edge", G=[[0, 1], [0, 0]]))
        assert prob.t == 4
        assert sorted(c.label for c in prob.classes) == ["X.1", "X|Y", "Y.3"]
        assert set(prob.H) == {(1, 4)}
        assert prob.M1 == []
        assert [(V.name, V.lead) for V in prob.K1] == [("w1", (3, 4)), ("w2", (1, 2))]

    def test_to_identity(self, equivalence):
        """Test att to_identity_227 slår ihop X och Y."""
        prob = apply_reduction(equivalence, ReductionStep(kind="to_identity_227"))
        assert prob.t == 2
        assert [c.label for c in prob.classes] == ["X|Y"]
        assert set(prob.H) == {(1, 2)}
        assert prob.K1 == []

    def test_to_zero(self, equivalence):
        """Test att to_zero_226 bara tar bort pilen."""
        prob = apply_reduction(equivalence, ReductionStep(kind="to_zero_226"))
        assert prob.t == 2
        assert prob.M1 == []
        assert prob.H == {}

    def test_malformed_block(self, equivalence):
        """Test att G måste ha formen [[0, I_r], [0, 0]]."""
        with pytest.raises(IllegalStep):
            apply_reduction(equivalence, ReductionStep(kind="edge", G=[[1, 0], [0, 0]]))

    def test_wrong_arrow(self, equivalence):
        """Test att steget måste gälla den första pilen."""
        with pytest.raises(IllegalStep):
            apply_reduction(equivalence, ReductionStep(kind="edge", arrow="b", G=[[1]]))


class TestOtherReductions:
    """Tester för deletion, regularisering, mutation och lokalisering."""

    def test_deletion(self, equivalence):
        """Test att deletion tar bort klassen och pilen."""
        prob = apply_reduction(equivalence, ReductionStep(kind="deletion", classes=[1]))
        assert prob.t == 1
        assert [c.label for c in prob.classes] == ["X"]
        assert prob.M1 == []

    def test_regularization_needs_dotted_arrow(self, equivalence):
        """Test att regularisering kräver δ(a₁) ≠ 0."""
        with pytest.raises(IllegalStep):
            apply_reduction(equivalence, ReductionStep(kind="regularization"))

    def test_regularization(self):
        """Test att δ(a) = −v tar bort både v och a."""
        prob = _problem("one_matrix_equivalence.json",
                        K1=[{"name": "v", "entries": {"1,2": 1}}], H={"1,1": 1})
        reduced = apply_reduction(prob, ReductionStep(kind="regularization"))
        assert reduced.K1 == []
        assert reduced.M1 == []
        assert set(reduced.H) == {(1, 1)}

    def test_regularization_with_polynomial_coefficient(self):
        """Test att δ(a) = (y − x)·v inte kan regulariseras."""
        with pytest.raises(IllegalStep):
            apply_reduction(_problem("mw2.json"), ReductionStep(kind="regularization"))

    def test_loop_mutation(self, similarity):
        """Test att en ögla blir en parametrisk klass med H = x."""
        prob = apply_reduction(similarity, ReductionStep(kind="loop_mutation"))
        assert prob.classes[0].parametric
        assert prob.M1 == []
        assert prob.H[(1, 1)] == uni(prob.field, {1: 1}, x)

    def test_loop_mutation_needs_loop(self, equivalence):
        """Test att mutation kräver en ögla."""
        with pytest.raises(IllegalStep):
            apply_reduction(equivalence, ReductionStep(kind="loop_mutation"))

    def test_localization(self, mw1):
        """Test att lokalisering lägger till en faktor i phi."""
        prob = apply_reduction(mw1, ReductionStep(kind="localization", cls=0,
                                                  factor={"x": 1, "x^0 y^0": -1}))
        assert len(prob.classes[0].phi) == 1
        assert prob.classes[0].phi[0] == uni(prob.field, {1: 1, 0: -1}, x)

    def test_localization_of_trivial_class(self, mw1):
        """Edge case: lokalisering av en trivial klass."""
        with pytest.raises(IllegalStep):
            apply_reduction(mw1, ReductionStep(kind="localization", cls=1, factor={"x": 1}))

    def test_parametric_unraveling(self, mw1):
        """Test att x ersätts av Weyr-matrisen [[1]]."""
        prob = apply_reduction(mw1, ReductionStep(kind="unraveling_loop", cls=0, G=[[1]]))
        assert all(not c.parametric for c in prob.classes)
        assert prob.H[(1, 1)] == uni(prob.field, {0: 1}, x)

    def test_parametric_unraveling_at_forbidden_root(self):
        """Test att en rot till phi inte får avvecklas."""
        prob = _problem("mw1.json", phi=[[{"x": 1}], []])
        with pytest.raises(IrregularWeyr):
            apply_reduction(prob, ReductionStep(kind="unraveling_loop", cls=0, G=[[0]]))


class TestCanonicalEquivalence:
    """Tester för kanonisk form under matrisekvivalens."""

    def test_rank_one_matrix(self, equivalence):
        """Test att en 2×3-matris av rang 1 ger ett kantsteg."""
        Q = equivalence.field
        P = _rep(equivalence, [2, 3], a=[[1, 2, 3], [2, 4, 6]])
        cf, trace = canonical_form(equivalence, P)

        assert [s.kind for s in trace.steps] == ["edge"]
        assert trace.steps[0].G == to_matrix(Q, [[0, 0, 1], [0, 0, 0]])
        assert cf.links == 1
        assert cf.dim == 5
        assert cf.sizes == [1, 1, 2, 1]
        expected = [[0] * 5 for _ in range(5)]
        expected[0][4] = 1
        assert cf.matrix == to_matrix(Q, expected)

    def test_isomorphism(self, equivalence):
        """Test att matriser av samma rang är isomorfa."""
        P = _rep(equivalence, [2, 3], a=[[1, 2, 3], [2, 4, 6]])
        assert iso(equivalence, P, _rep(equivalence, [2, 3], a=[[1, 0, 0], [0, 0, 0]]))
        assert not iso(equivalence, P, _rep(equivalence, [2, 3], a=[[1, 0, 0], [0, 1, 0]]))

    def test_zero_size_class_is_deleted(self, equivalence):
        """Edge case: X har storlek 0."""
        cf, trace = canonical_form(equivalence, _rep(equivalence, [0, 2], a=[]))
        assert [s.kind for s in trace.steps] == ["deletion"]
        assert cf.deleted == [0]
        assert cf.dim == 2
        assert cf.links == 0

    def test_replay_trace(self, equivalence):
        """Test att spåret kan spelas upp symboliskt."""
        P = _rep(equivalence, [2, 3], a=[[1, 2, 3], [2, 4, 6]])
        _, trace = canonical_form(equivalence, P)
        stages = replay_trace(equivalence, trace)
        assert len(stages) == 2
        assert stages[-1].t == 4
        assert stages[-1].M1 == []

    def test_block_diagonal(self, equivalence):
        """Test att reduktionsblocken sätts ihop diagonalt."""
        Q = equivalence.field
        _, trace = canonical_form(equivalence, _rep(equivalence, [2, 3], a=[[1, 2, 3], [2, 4, 6]]))
        assert reduction_block_diagonal(Q, trace) == to_matrix(Q, [[0, 0, 1], [0, 0, 0]])

    def test_json_output(self, equivalence):
        """Test att spåret följer TraceJSON och saknar fall utanför kantade följder."""
        Q = equivalence.field
        cf, trace = canonical_form(equivalence, _rep(equivalence, [2, 3], a=[[1, 2, 3], [2, 4, 6]]))
        data = trace_to_json(trace, Q)
        TraceJSON(**data)
        assert "case" not in data["steps"][0]
        assert canonical_to_json(cf, Q)["indecomposable"] is False


class TestCanonicalSimilarity:
    """Tester för kanonisk form under matrislikformighet."""

    def test_jordan_block(self, similarity):
        """Test att J2(1) är odelbar."""
        P = _rep(similarity, [2], a=[[1, 1], [0, 1]])
        cf, trace = canonical_form(similarity, P)
        assert cf.links == 1
        assert cf.dim == 2
        assert indecomposable(similarity, P)

    def test_similar_matrices(self, similarity):
        """Test att likformiga matriser är isomorfa."""
        P = _rep(similarity, [2], a=[[1, 1], [0, 1]])
        assert iso(similarity, P, _rep(similarity, [2], a=[[1, 0], [5, 1]]))
        assert not iso(similarity, P, _rep(similarity, [2], a=[[1, 0], [0, 1]]))

    def test_diagonal_matrix(self, similarity):
        """Test att diag(2, 3) inte är odelbar."""
        P = _rep(similarity, [2], a=[[2, 0], [0, 3]])
        cf, trace = canonical_form(similarity, P)
        assert [s.kind for s in trace.steps] == ["unraveling_loop"]
        assert cf.links == 0
        assert not indecomposable(similarity, P)

    def test_nilpotent_jordan_block(self, similarity):
        """Test att J3(0) ger två länkar."""
        with open(DATA / "j3.json", 'r', encoding='utf-8') as f:
            P = representation_from_json(RepresentationJSON(**json.load(f)), similarity)
        cf, _ = canonical_form(similarity, P)
        assert cf.links == 2
        assert cf.dim == 3
        assert indecomposable(similarity, P)

    def test_rotation_over_rationals(self, similarity):
        """Test att en rotation saknar kanonisk form över Q."""
        P = _rep(similarity, [2], a=[[0, -1], [1, 0]])
        with pytest.raises(NonSplitSpectrum):
            canonical_form(similarity, P)

    def test_rotation_over_gf5(self):
        """Test att samma rotation spjälkas över GF(5)."""
        with open(DATA / "one_matrix_similarity.json", 'r', encoding='utf-8') as f:
            prob = problem_from_json(ProblemJSON(**json.load(f)), Field("gf:5"))
        cf, _ = canonical_form(prob, _rep(prob, [2], a=[[0, -1], [1, 0]]))
        assert cf.links == 0

    def test_parametric_problem_rejected(self, mw1):
        """Test att kanonisk form kräver triviala klasser."""
        P = representation_from_json(RepresentationJSON(
            sizes=[1, 1], arrows={"a": [[1]]},
            weyr={"0": {"blocks": [{"eigenvalue": "0", "m": [1]}]}}), mw1)
        with pytest.raises(IllegalStep):
            canonical_form(mw1, P)

    def test_observer(self, similarity):
        """Test att observatören anropas vid varje front."""
        events = []
        canonical_form(similarity, _rep(similarity, [2], a=[[1, 1], [0, 1]]), events.append)
        assert events
        assert events[0]["step"] == 0
        assert events[0]["arrow"][0] == 0
        assert events[0]["sizes"] == [2]
