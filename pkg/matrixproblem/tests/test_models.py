"""
Test models functionality.

Testsuite för models-modulen som validerar JSON-formaten för algebror,
problem, representationer, spår, utslag och motorinställningar.
"""

import pytest
from pydantic import ValidationError

from matrixproblem.modules.models import (
    AlgebraSpec,
    BaseJSON,
    EngineSettings,
    ProblemJSON,
    QuiverJSON,
    ReplayStepJSON,
    RepresentationJSON,
    VerdictJSON,
    parse_position,
    schema_of,
)


class TestParsePosition:
    """Tester för parse_position-funktionen."""

    def test_valid_key(self):
        """Test att läsa en positionsnyckel."""
        assert parse_position("1,2") == (1, 2)
        assert parse_position(" 10 , 3 ") == (10, 3)

    def test_invalid_key(self):
        """Edge case: Felaktig nyckel."""
        with pytest.raises(ValueError):
            parse_position("1;2")


class TestProblemJSON:
    """Tester för ProblemJSON-modellen."""

    def test_minimal_problem(self):
        """Test att ett minimalt problem valideras."""
        data = ProblemJSON(t=2, classes=[[1], [2]], M1=[{"name": "a", "entries": {"1,2": 1}}])
        assert data.K1 == []
        assert data.M1[0].entries == {"1,2": 1}

    def test_classes_must_partition(self):
        """Test att klasserna måste täcka 1..t exakt en gång."""
        with pytest.raises(ValidationError):
            ProblemJSON(t=3, classes=[[1], [2]])
        with pytest.raises(ValidationError):
            ProblemJSON(t=2, classes=[[1, 2], [2]])

    def test_metadata_length(self):
        """Test att kinds måste ha en post per klass."""
        with pytest.raises(ValidationError):
            ProblemJSON(t=2, classes=[[1], [2]], kinds=["trivial"])

    def test_unique_names(self):
        """Test att K₁ och M₁ inte får dela namn."""
        with pytest.raises(ValidationError):
            ProblemJSON(t=2, classes=[[1], [2]],
                        K1=[{"name": "a", "entries": {"1,2": 1}}],
                        M1=[{"name": "a", "entries": {"1,2": 1}}])

    def test_invalid_scalar(self):
        """Edge case: Skalärer måste vara p eller p/q."""
        with pytest.raises(ValidationError):
            BaseJSON(name="a", entries={"1,2": "1.5"})

    def test_empty_base(self):
        """Edge case: En basmatris utan poster."""
        with pytest.raises(ValidationError):
            BaseJSON(name="a", entries={})

    def test_polynomial_entries(self):
        """Test att polynomposter accepteras."""
        base = BaseJSON(name="v", entries={"1,2": {"x": 1, "y^2": "-1/2"}})
        assert base.entries["1,2"]["y^2"] == "-1/2"

    def test_bad_monomial(self):
        """Edge case: Okänd variabel i en monomnyckel."""
        with pytest.raises(ValidationError):
            BaseJSON(name="v", entries={"1,2": {"z": 1}})


class TestRepresentationJSON:
    """Tester för RepresentationJSON-modellen."""

    def test_ragged_matrix(self):
        """Test att alla rader måste ha samma längd."""
        with pytest.raises(ValidationError):
            RepresentationJSON(sizes=[2, 2], arrows={"a": [[1, 0], [1]]})

    def test_negative_sizes(self):
        """Edge case: Negativ storlek."""
        with pytest.raises(ValidationError):
            RepresentationJSON(sizes=[-1])

    def test_weyr_block(self):
        """Test att Weyr-block kräver positiv karakteristik."""
        rep = RepresentationJSON(sizes=[2], weyr={"0": {"blocks": [{"eigenvalue": "1", "m": [1, 1]}]}})
        assert rep.weyr["0"].blocks[0]["m"] == [1, 1]
        with pytest.raises(ValidationError):
            RepresentationJSON(sizes=[2], weyr={"0": {"blocks": [{"eigenvalue": "1", "m": [0]}]}})


class TestAlgebraAndQuiver:
    """Tester för AlgebraSpec och QuiverJSON."""

    def test_algebra_table(self):
        """Test att en tabell med en loop valideras."""
        spec = AlgebraSpec(basis=["t", "e"], idempotents=["e"],
                           st={"t": [1, 1], "e": [1, 1]}, mul={})
        assert spec.idempotents == ["e"]

    def test_unknown_product(self):
        """Test att produkter måste nämna kända basnamn."""
        with pytest.raises(ValidationError):
            AlgebraSpec(basis=["t", "e"], idempotents=["e"],
                        st={"t": [1, 1], "e": [1, 1]}, mul={"t*s": {"t": 1}})

    def test_missing_st(self):
        """Edge case: st saknas för ett basnamn."""
        with pytest.raises(ValidationError):
            AlgebraSpec(basis=["t", "e"], idempotents=["e"], st={"e": [1, 1]})

    def test_relation_must_be_path(self):
        """Test att en relation måste vara en väg i kogern."""
        with pytest.raises(ValidationError):
            QuiverJSON(vertices=["1", "2"],
                       arrows=[{"name": "a", "source": "1", "target": "2"},
                               {"name": "b", "source": "1", "target": "2"}],
                       relations=[["a", "b"]])


class TestReplayStepJSON:
    """Tester för ReplayStepJSON-modellen."""

    def test_edge_needs_block(self):
        """Test att edge kräver ett G-block."""
        with pytest.raises(ValidationError):
            ReplayStepJSON(kind="edge", arrow="a")

    def test_localization_needs_factor(self):
        """Test att localization kräver factor och cls."""
        with pytest.raises(ValidationError):
            ReplayStepJSON(kind="localization", cls=0)
        step = ReplayStepJSON(kind="localization", cls=0, factor={"x": 1, "x^0 y^0": -1})
        assert step.cls == 0

    def test_deletion_needs_classes(self):
        """Edge case: deletion utan klasser."""
        with pytest.raises(ValidationError):
            ReplayStepJSON(kind="deletion")


class TestEngineSettings:
    """Tester för EngineSettings-modellen."""

    def test_defaults(self):
        """Test av standardvärdena."""
        settings = EngineSettings()
        assert settings.field == "rational"
        assert settings.max_path_length == 12
        assert settings.wild_depth == 3
        assert settings.wild_max_nodes == 200
        assert settings.minor_cap == 20000
        assert settings.log_level == "INFO"

    def test_field_normalized(self):
        """Test att kroppsnamnet normaliseras."""
        assert EngineSettings(field=" GF:7 ").field == "gf:7"

    def test_unknown_field(self):
        """Edge case: Okänd kropp."""
        with pytest.raises(ValidationError):
            EngineSettings(field="reals")

    def test_depth_zero_allowed(self):
        """Test att sökdjup 0 är tillåtet men inte negativt."""
        assert EngineSettings(wild_depth=0).wild_depth == 0
        with pytest.raises(ValidationError):
            EngineSettings(wild_depth=-1)


class TestSchemas:
    """Tester för schema_of-funktionen."""

    @pytest.mark.parametrize("name", ["algebra", "quiver", "problem", "rep", "morphism",
                                      "layer", "trace", "canonical", "verdict", "replay", "engine"])
    def test_known_schemas(self, name):
        """Test att varje modell har ett JSON-schema."""
        schema = schema_of(name)
        assert schema["type"] == "object"
        assert "properties" in schema

    def test_unknown_schema(self):
        """Edge case: Okänt schemanamn."""
        with pytest.raises(KeyError):
            schema_of("budget")

    def test_verdict_tags(self):
        """Test att utslaget None är en giltig tagg."""
        assert VerdictJSON(tag="None").path == []
        with pytest.raises(ValidationError):
            VerdictJSON(tag="Tame")
