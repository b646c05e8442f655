"""
Gemensamma datamodeller för matrisproblem-motorns JSON-gränssnitt.

Denna modul innehåller Pydantic-modeller som validerar alla filer som
motorn läser eller skriver innan någon beräkning sker. Modellerna beskriver
bara filformaten; de matematiska objekten (problem, representationer, lager)
byggs av core, bocs och ingest utifrån dem.

Modellerna representerar:
- AlgebraSpec / QuiverJSON: Indata till from-algebra
- ProblemJSON: Ett matrisbimodulproblem
- RepresentationJSON / MorphismJSON: Representationer och morfismer
- LayerJSON / TermJSON: Bocs-lager med differentialer
- TraceJSON / CanonicalJSON: Reduktionsspår och kanonisk form
- VerdictJSON: Resultat från vild-detektorerna
- ReplayStepJSON: Symboliska reduktionssteg för återuppspelning
- EngineSettings: Motorinställningar från engine.yaml
"""

import re
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

Scalar = Union[str, int]
PolyJSON = Union[Scalar, Dict[str, Scalar]]
MatrixJSON = List[List[Scalar]]

_SCALAR_RE = re.compile(r"^\s*-?\d+\s*(/\s*-?\d+\s*)?$")
_MONOMIAL_RE = re.compile(r"^(x(\^\d+)?)?\s*(y(\^\d+)?)?$")
_POS_RE = re.compile(r"^\s*(\d+)\s*,\s*(\d+)\s*$")


def _check_scalar(v: Scalar) -> Scalar:
    if isinstance(v, bool):
        raise ValueError("Booleska värden är inte skalärer")
    if isinstance(v, int):
        return v
    if not _SCALAR_RE.match(v):
        raise ValueError(f"Ogiltig skalär: {v!r} (förväntat 'p' eller 'p/q')")
    return v


def _check_poly(v: PolyJSON) -> PolyJSON:
    if isinstance(v, dict):
        for key, coef in v.items():
            if not _MONOMIAL_RE.match(key.strip()):
                raise ValueError(f"Ogiltig monomnyckel: {key!r}")
            _check_scalar(coef)
        return v
    return _check_scalar(v)


def _check_matrix(rows: MatrixJSON) -> MatrixJSON:
    widths = {len(row) for row in rows}
    if len(widths) > 1:
        raise ValueError("Alla rader i en matris måste ha samma längd")
    for row in rows:
        for v in row:
            _check_scalar(v)
    return rows


def parse_position(key: str) -> tuple:
    """Läser en positionsnyckel "i,j" till (i, j)."""
    match = _POS_RE.match(key)
    if not match:
        raise ValueError(f"Ogiltig position: {key!r} (förväntat 'i,j')")
    return int(match.group(1)), int(match.group(2))


class BaseJSON(BaseModel):
    """
    En glesa basmatris i ett problem.

    Attributes:
        name: Basens namn (samma som den duala pilens namn)
        src: Klassindex för raderna (valfritt, härleds annars)
        tgt: Klassindex för kolumnerna (valfritt, härleds annars)
        entries: Poster {"i,j": polynom}
    """
    name: str
    src: Optional[int] = None
    tgt: Optional[int] = None
    entries: Dict[str, PolyJSON]

    @field_validator('entries')
    @classmethod
    def entries_must_be_valid(cls, v: Dict[str, PolyJSON]) -> Dict[str, PolyJSON]:
        """Kontrollerar positioner och koefficienter."""
        if not v:
            raise ValueError('En basmatris kan inte vara tom')
        for key, poly in v.items():
            i, j = parse_position(key)
            if i < 1 or j < 1:
                raise ValueError(f'Positioner är 1-baserade: {key}')
            _check_poly(poly)
        return v


class ProblemJSON(BaseModel):
    """
    Ett matrisbimodulproblem (problem.json).

    Attributes:
        field: Valfri arbetskropp ("rational" eller "gf:p")
        t: Antal remsor
        classes: Ekvivalensklasser av remsor (1-baserade)
        kinds: "trivial" eller "parametric" per klass
        phi: Förbjudna polynomfaktorer i x per klass
        labels: Visningsnamn per klass
        sides: "row", "col" eller null per klass
        K1: Kvasibas för K₁
        M1: Kvasibas för M₁
        H: Matrisen H som glesa poster a + b·x
    """
    field: Optional[str] = None
    t: int
    classes: List[List[int]]
    kinds: Optional[List[Literal["trivial", "parametric"]]] = None
    phi: Optional[List[List[PolyJSON]]] = None
    labels: Optional[List[Optional[str]]] = None
    sides: Optional[List[Optional[Literal["row", "col"]]]] = None
    K1: List[BaseJSON] = Field(default_factory=list)
    M1: List[BaseJSON] = Field(default_factory=list)
    H: Dict[str, PolyJSON] = Field(default_factory=dict)

    @field_validator('t')
    @classmethod
    def t_must_be_non_negative(cls, v: int) -> int:
        """Antal remsor kan inte vara negativt."""
        if v < 0:
            raise ValueError('t måste vara ≥ 0')
        return v

    @model_validator(mode='after')
    def classes_must_partition(self) -> 'ProblemJSON':
        """Klasserna ska partitionera {1..t} och metadata ha rätt längd."""
        seen = sorted(i for cls_ in self.classes for i in cls_)
        if seen != list(range(1, self.t + 1)):
            raise ValueError(f'Klasserna partitionerar inte {{1..{self.t}}}')
        n = len(self.classes)
        for name in ('kinds', 'phi', 'labels', 'sides'):
            value = getattr(self, name)
            if value is not None and len(value) != n:
                raise ValueError(f'{name} måste ha en post per klass ({n})')
        names = [b.name for b in self.K1] + [b.name for b in self.M1]
        if len(set(names)) != len(names):
            raise ValueError('Basnamn måste vara unika')
        for key, poly in self.H.items():
            parse_position(key)
            _check_poly(poly)
        return self

    class Config:
        """Pydantic configuration."""
        json_schema_extra = {
            "example": {
                "t": 2,
                "classes": [[1], [2]],
                "sides": ["row", "col"],
                "K1": [],
                "M1": [{"name": "a", "entries": {"1,2": "1"}}],
                "H": {}
            }
        }


class WeyrJSON(BaseModel):
    """En Weyr-form: block {eigenvalue, m} i stigande ordning."""
    blocks: List[Dict[str, Any]]

    @field_validator('blocks')
    @classmethod
    def blocks_must_be_valid(cls, v):
        for block in v:
            if 'eigenvalue' not in block or 'm' not in block:
                raise ValueError('Varje block behöver eigenvalue och m')
            _check_scalar(block['eigenvalue'])
            m = block['m']
            if not m or any(not isinstance(k, int) or k < 1 for k in m):
                raise ValueError(f'Ogiltig Weyr-karakteristik: {m}')
        return v


class RepresentationJSON(BaseModel):
    """
    En representation (rep.json).

    Attributes:
        sizes: Storleksvektor, en post per remsa
        arrows: En skalär matris per M₁-bas
        weyr: Weyr-form per parametrisk klass (nyckel = klassindex)
    """
    sizes: List[int]
    arrows: Dict[str, MatrixJSON] = Field(default_factory=dict)
    weyr: Dict[str, WeyrJSON] = Field(default_factory=dict)

    @field_validator('sizes')
    @classmethod
    def sizes_must_be_non_negative(cls, v: List[int]) -> List[int]:
        """Storlekar kan inte vara negativa."""
        if any(s < 0 for s in v):
            raise ValueError('Storlekar måste vara ≥ 0')
        return v

    @field_validator('arrows')
    @classmethod
    def arrows_must_be_matrices(cls, v):
        for rows in v.values():
            _check_matrix(rows)
        return v

    class Config:
        """Pydantic configuration."""
        json_schema_extra = {
            "example": {
                "sizes": [1, 1],
                "arrows": {"a": [["1"]]},
                "weyr": {}
            }
        }


class MorphismJSON(BaseModel):
    """En morfism: en matris per klass och en per K₁-bas."""
    classes: Dict[str, MatrixJSON]
    dotted: Dict[str, MatrixJSON] = Field(default_factory=dict)

    @field_validator('classes', 'dotted')
    @classmethod
    def values_must_be_matrices(cls, v):
        for rows in v.values():
            _check_matrix(rows)
        return v


class AlgebraSpec(BaseModel):
    """
    En ändligdimensionell basisk algebra som tabell (algebra.json).

    Attributes:
        basis: Basnamn; radikalelement i längdordning, sedan idempotenter
        idempotents: Namnen på de primitiva idempotenterna
        st: Per basnamn [s, t] med b = e_s·b·e_t (index i idempotents, 1-baserade)
        mul: Produkter "a*b" -> {basnamn: koefficient}; saknade produkter är noll
    """
    basis: List[str]
    idempotents: List[str]
    st: Dict[str, List[int]]
    mul: Dict[str, Dict[str, Scalar]] = Field(default_factory=dict)

    @model_validator(mode='after')
    def table_must_be_consistent(self) -> 'AlgebraSpec':
        """Kontrollerar namn och indexintervall."""
        if len(set(self.basis)) != len(self.basis):
            raise ValueError('Basnamn måste vara unika')
        missing = [e for e in self.idempotents if e not in self.basis]
        if missing:
            raise ValueError(f'Idempotenter saknas i basen: {missing}')
        h = len(self.idempotents)
        for name in self.basis:
            pair = self.st.get(name)
            if pair is None:
                raise ValueError(f'st saknas för {name}')
            if len(pair) != 2 or not all(1 <= s <= h for s in pair):
                raise ValueError(f'Ogiltigt st för {name}: {pair}')
        for key, combo in self.mul.items():
            left, sep, right = key.partition('*')
            if not sep or left not in self.basis or right not in self.basis:
                raise ValueError(f'Ogiltig produktnyckel: {key!r}')
            for name, coef in combo.items():
                if name not in self.basis:
                    raise ValueError(f'Okänt basnamn i {key}: {name}')
                _check_scalar(coef)
        return self

    class Config:
        """Pydantic configuration."""
        json_schema_extra = {
            "example": {
                "basis": ["t", "e"],
                "idempotents": ["e"],
                "st": {"t": [1, 1], "e": [1, 1]},
                "mul": {}
            }
        }


class QuiverArrowJSON(BaseModel):
    """En pil i en koger."""
    name: str
    source: str
    target: str


class QuiverJSON(BaseModel):
    """
    En koger med monomiala relationer (quiver.json).

    Attributes:
        vertices: Nodnamn
        arrows: Pilar med start- och slutnod
        relations: Förbjudna vägar som listor av pilnamn (längd ≥ 2)
    """
    vertices: List[str]
    arrows: List[QuiverArrowJSON] = Field(default_factory=list)
    relations: List[List[str]] = Field(default_factory=list)

    @model_validator(mode='after')
    def quiver_must_be_consistent(self) -> 'QuiverJSON':
        """Pilarna ska gå mellan kända noder och relationerna vara vägar."""
        names = [a.name for a in self.arrows]
        if len(set(names)) != len(names):
            raise ValueError('Pilnamn måste vara unika')
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError('Nodnamn måste vara unika')
        by_name = {a.name: a for a in self.arrows}
        for a in self.arrows:
            if a.source not in self.vertices or a.target not in self.vertices:
                raise ValueError(f'Pilen {a.name} går mellan okända noder')
        for rel in self.relations:
            if len(rel) < 2:
                raise ValueError(f'Relationer måste ha längd ≥ 2: {rel}')
            for name in rel:
                if name not in by_name:
                    raise ValueError(f'Okänd pil i relation: {name}')
            for first, second in zip(rel, rel[1:]):
                if by_name[first].target != by_name[second].source:
                    raise ValueError(f'Relationen {rel} är ingen väg')
        return self

    class Config:
        """Pydantic configuration."""
        json_schema_extra = {
            "example": {
                "vertices": ["1"],
                "arrows": [{"name": "a", "source": "1", "target": "1"}],
                "relations": [["a", "a"]]
            }
        }


class TermJSON(BaseModel):
    """En term i en differential: V, VA, AV eller VV."""
    kind: Literal["V", "VA", "AV", "VV"]
    coef: Dict[str, Scalar]
    left: str
    right: Optional[str] = None


class ArrowJSON(BaseModel):
    """En pil i ett bocs-lager."""
    name: str
    kind: Literal["solid", "dotted"]
    source: int
    target: int


class LayerJSON(BaseModel):
    """
    Ett bocs-lager (layer.json).

    Attributes:
        vertices: Klasser med typ och förbjudet polynom
        solids: Heldragna pilar i M₁-ordning
        dotteds: Streckade pilar i K₁-ordning
        delta: Differential per pilnamn
    """
    vertices: List[Dict[str, Any]]
    solids: List[ArrowJSON]
    dotteds: List[ArrowJSON]
    delta: Dict[str, List[TermJSON]]


class TraceStepJSON(BaseModel):
    """Ett reduktionssteg i trace.json."""
    kind: Literal["deletion", "regularization", "loop_mutation", "edge",
                  "unraveling_loop", "localization", "to_zero_226", "to_identity_227"]
    arrow: Optional[str] = None
    G: Optional[MatrixJSON] = None
    sizes_before: List[int]
    sizes_after: List[int]
    rows: Optional[List[int]] = None
    cols: Optional[List[int]] = None
    links: int = 0
    case: Optional[str] = None


class TraceJSON(BaseModel):
    """Ett helt reduktionsspår."""
    steps: List[TraceStepJSON]


class CanonicalJSON(BaseModel):
    """Kanonisk form (canonical.json)."""
    matrix: MatrixJSON
    sizes: List[int]
    links: int
    dim: int
    indecomposable: bool
    deleted: List[int] = Field(default_factory=list)


class VerdictJSON(BaseModel):
    """Resultat från vild-detektorerna (verdict.json)."""
    tag: Literal["Case1", "Case2", "MW1", "MW2", "LocalCase(i)", "LocalCase(ii)",
                 "not (i)/(ii)", "OneSided", "None"]
    arrow: Optional[str] = None
    witness: Optional[Dict[str, Scalar]] = None
    phi: Dict[str, Dict[str, Scalar]] = Field(default_factory=dict)
    one_sided: bool = False
    path: List[str] = Field(default_factory=list)


class ReplayStepJSON(BaseModel):
    """
    Ett symboliskt reduktionssteg för återuppspelning.

    Attributes:
        kind: Reduktionstyp
        arrow: Pilen som reduceras (standard: första M₁-basen)
        G: Reduktionsblocket för edge och unraveling_loop
        classes: Klassindex för deletion
        factor: Polynom i x för localization
        cls: Klassindex för localization
    """
    kind: Literal["deletion", "regularization", "loop_mutation", "edge",
                  "unraveling_loop", "localization", "to_zero_226", "to_identity_227"]
    arrow: Optional[str] = None
    G: Optional[MatrixJSON] = None
    classes: List[int] = Field(default_factory=list)
    factor: Optional[PolyJSON] = None
    cls: Optional[int] = None

    @model_validator(mode='after')
    def step_must_be_complete(self) -> 'ReplayStepJSON':
        """Kontrollerar att stegtypen har sina parametrar."""
        if self.kind in ('edge', 'unraveling_loop') and self.G is None:
            raise ValueError(f'{self.kind} kräver ett G-block')
        if self.kind == 'deletion' and not self.classes:
            raise ValueError('deletion kräver minst en klass')
        if self.kind == 'localization' and (self.factor is None or self.cls is None):
            raise ValueError('localization kräver factor och cls')
        if self.G is not None:
            _check_matrix(self.G)
        return self


class ReplayJSON(BaseModel):
    """En lista symboliska steg."""
    steps: List[ReplayStepJSON]


class EngineSettings(BaseModel):
    """
    Motorinställningar (engine.yaml).

    Attributes:
        field: Arbetskropp, "rational" eller "gf:p"
        max_path_length: Tak för väglängd i monomiala koggar
        wild_depth: Sökdjup för vild-sökningen
        wild_max_nodes: Största antal noder i vild-sökningen
        minor_cap: Tak för antal minorer vid determinantdelare
        log_level: Loggnivå
        log_format: Format för logging.basicConfig
    """
    field: str = "rational"
    max_path_length: int = 12
    wild_depth: int = 3
    wild_max_nodes: int = 200
    minor_cap: int = 20000
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    log_format: str = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

    @field_validator('field')
    @classmethod
    def field_must_be_known(cls, v: str) -> str:
        """Accepterar 'rational' eller 'gf:p' med p ett heltal."""
        v = v.strip().lower()
        if v == 'rational' or re.match(r'^gf:\d+$', v):
            return v
        raise ValueError(f"Okänd kropp: {v}")

    @field_validator('max_path_length', 'wild_max_nodes', 'minor_cap')
    @classmethod
    def must_be_positive(cls, v: int) -> int:
        """Taken måste vara positiva."""
        if v < 1:
            raise ValueError('Värdet måste vara positivt')
        return v

    @field_validator('wild_depth')
    @classmethod
    def depth_must_be_non_negative(cls, v: int) -> int:
        """Djup 0 prövar bara startproblemet."""
        if v < 0:
            raise ValueError('Sökdjupet kan inte vara negativt')
        return v

    class Config:
        """Pydantic configuration."""
        json_schema_extra = {
            "example": {
                "field": "rational",
                "max_path_length": 12,
                "wild_depth": 3,
                "wild_max_nodes": 200,
                "minor_cap": 20000,
                "log_level": "INFO"
            }
        }


SCHEMAS = {
    "algebra": AlgebraSpec,
    "quiver": QuiverJSON,
    "problem": ProblemJSON,
    "rep": RepresentationJSON,
    "morphism": MorphismJSON,
    "layer": LayerJSON,
    "trace": TraceJSON,
    "canonical": CanonicalJSON,
    "verdict": VerdictJSON,
    "replay": ReplayJSON,
    "engine": EngineSettings,
}


def schema_of(name: str) -> Dict[str, Any]:
    """
    JSON-schemat för en modell.

    Args:
        name: Modellens kortnamn, t.ex. "problem" eller "rep"

    Raises:
        KeyError: Om namnet är okänt
    """
    if name not in SCHEMAS:
        raise KeyError(f"Okänt schema: {name} (välj bland {sorted(SCHEMAS)})")
    return SCHEMAS[name].model_json_schema()
