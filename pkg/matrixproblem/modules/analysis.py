"""
Kantade matriser och detektorer för vilda konfigurationer.

Kantning sätter in en nollkolumn först i varje block som slutar i en
kolumnklass Z. Den kantade följden körs med samma motor som den kanoniska
formen och jämförs sedan steg för steg med originalspåret; varje steg får
ett fall 1.1–2.3 beroende på om blocket rör den första kolumnen β i Z:s
huvudremsa och om den tillagda kolumnen redan bildar en egen klass.

Detektorerna läser ett lager och ändrar det aldrig. Sökningen över
reduktionsföljder (``search_configurations``) är begränsad i djup och
antal noder.
"""

import logging
from collections import deque
from itertools import combinations
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Set, Tuple

from pydantic import BaseModel
from sympy import Poly

from .bocs import BocsLayer, TermSum, layer_of
from .core import (
    ProblemSpec, Representation, VertexClass, assemble, offsets, validate_representation,
)
from .exactalg import (
    Field, IllegalStep, Matrix, MatrixProblemError, MixedGroup, NotLocal, NotMainColumnClass,
    bi_const, bi_zero, invertible_in_localization, is_scalar, mat_equal, poly_matrix_det,
    poly_to_json, rank, scalar_of, split_xy, substitute_y_by_x, to_bi, zeros,
)
from .ingest import rdcc_check
from .reduce import (
    ReductionStep, ReductionTrace, apply_reduction, build_defining_system, canonical_form,
    delta_is_zero,
)

_logger = logging.getLogger(__name__)

VerdictTag = Literal["Case1", "Case2", "MW1", "MW2", "LocalCase(i)", "LocalCase(ii)",
                     "not (i)/(ii)", "OneSided", "None"]


class BorderedInstance(BaseModel):
    """
    En kantad representation.

    Attributes:
        original: M med storleksvektorn l × n
        cls: Kolumnklassen Z
        bordered: M̃ med ñ_j = n_j + 1 för remsor j i Z
        added_column: Index q̃ för den tillagda kolumnen i Z:s huvudremsa
        added_columns: Tillagda kolumnindex i alla remsor i Z
    """
    original: Representation
    cls: int
    bordered: Representation
    added_column: int
    added_columns: List[int]

    class Config:
        arbitrary_types_allowed = True
        frozen = True


class WildVerdict(BaseModel):
    """
    Utfallet av en vild-detektor.

    Attributes:
        tag: Konfigurationen som hittades, eller "None"
        arrow: Pilen där konfigurationen sitter
        witness: Vittnespolynomet f (tvåvariabel)
        phi: Lokaliseringspolynom per nodnamn
        one_sided: Sant om lagret har ensidig form
        path: Reduktionsstegen fram till noden (vid sökning)
    """
    tag: VerdictTag
    arrow: Optional[str] = None
    witness: Optional[Any] = None
    phi: Dict[str, Any] = {}
    one_sided: bool = False
    path: List[str] = []

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    def to_json(self, F: Field) -> Dict[str, Any]:
        return {
            "tag": self.tag,
            "arrow": self.arrow,
            "witness": poly_to_json(F, self.witness) if self.witness is not None else None,
            "phi": {name: poly_to_json(F, p) for name, p in sorted(self.phi.items())},
            "one_sided": self.one_sided,
            "path": list(self.path),
        }


# ---------------------------------------------------------------------------
# Kantade matriser
# ---------------------------------------------------------------------------

def _column_class(prob: ProblemSpec, Z: int) -> VertexClass:
    if not 0 <= Z < len(prob.classes):
        raise NotMainColumnClass(f"Okänd klass {Z}")
    cls = prob.classes[Z]
    if cls.side != "col" or cls.parametric:
        raise NotMainColumnClass(f"Klass {Z} ({cls.label or Z}) är ingen trivial kolumnklass")
    starts = [A.name for A in prob.M1 if A.src == Z]
    if starts:
        raise NotMainColumnClass(f"Klass {Z} är startklass för {starts}")
    return cls


def bordered(M: Representation, Z: int, prob: ProblemSpec) -> BorderedInstance:
    """
    Kantar M med en nollkolumn först i varje block som slutar i Z.

    Args:
        M: Representationen
        Z: Index för en kolumnklass
        prob: Ett bipartit problem

    Raises:
        NotMainColumnClass: Om Z inte är en trivial kolumnklass
    """
    F = prob.field
    alg = prob.algebra
    cls = _column_class(prob, Z)
    validate_representation(M, prob)
    members = set(cls.indices)
    sizes = [n + 1 if s in members else n for s, n in enumerate(M.sizes, start=1)]
    arrows = {}
    for A in prob.M1:
        C = M.arrows.get(A.name)
        if C is None:
            C = zeros(F, alg.class_size(M.sizes, A.src), alg.class_size(M.sizes, A.tgt))
        if A.tgt == Z:
            arrows[A.name] = [[F.zero] + list(row) for row in C]
        else:
            arrows[A.name] = [list(row) for row in C]
    Mt = Representation(sizes=sizes, arrows=arrows, weyr=dict(M.weyr))
    validate_representation(Mt, prob)
    o = offsets(sizes)
    return BorderedInstance(original=M, cls=Z, bordered=Mt, added_column=o[cls.main - 1],
                            added_columns=[o[s - 1] for s in cls.indices])


def drop_column(Mt: Representation, Z: int, prob: ProblemSpec) -> Representation:
    """Tar bort den första kolumnen i varje block som slutar i Z (inversen till bordered)."""
    cls = _column_class(prob, Z)
    members = set(cls.indices)
    sizes = [n - 1 if s in members else n for s, n in enumerate(Mt.sizes, start=1)]
    if any(n < 0 for n in sizes):
        raise NotMainColumnClass(f"Klass {Z} har ingen kolumn att ta bort")
    arrows = {}
    for A in prob.M1:
        C = Mt.arrows.get(A.name)
        if C is None:
            continue
        arrows[A.name] = [list(row[1:]) for row in C] if A.tgt == Z else [list(row) for row in C]
    M = Representation(sizes=sizes, arrows=arrows, weyr=dict(Mt.weyr))
    validate_representation(M, prob)
    return M


def _variable_blocks(prob: ProblemSpec, sizes: Sequence[int]) -> List[Tuple[int, int, int, int]]:
    """(radklass, kolumnklass, rader, kolumner) per variabelblock i systemets ordning."""
    alg = prob.algebra
    out = []
    for idx in range(len(prob.classes)):
        m = alg.class_size(sizes, idx)
        out.append((idx, idx, m, m))
    for V in prob.K1:
        out.append((V.src, V.tgt, alg.class_size(sizes, V.src), alg.class_size(sizes, V.tgt)))
    return out


def _lift_map(prob: ProblemSpec, sizes: Sequence[int], sizes_t: Sequence[int],
              Z: int) -> List[int]:
    """Variabelindex i det kantade systemet för varje variabel i originalsystemet."""
    lift = []
    base_t = 0
    for (rc, cc, m, n), (_, _, mt, nt) in zip(_variable_blocks(prob, sizes),
                                              _variable_blocks(prob, sizes_t)):
        dr = 1 if rc == Z else 0
        dc = 1 if cc == Z else 0
        for r in range(m):
            for c in range(n):
                lift.append(base_t + (r + dr) * nt + c + dc)
        base_t += mt * nt
    return lift


def _widened_class(prob: ProblemSpec, sizes: Sequence[int], sizes_t: Sequence[int]) -> Optional[int]:
    if len(sizes) != len(sizes_t):
        return None
    grown = {s for s, (a, b) in enumerate(zip(sizes, sizes_t), start=1) if b == a + 1}
    if any(b not in (a, a + 1) for a, b in zip(sizes, sizes_t)):
        return None
    for idx, cls in enumerate(prob.classes):
        if set(cls.indices) == grown:
            return idx
    return None


def systems_agree(M: Representation, Mt: Representation, prob: ProblemSpec,
                  Z: Optional[int] = None) -> bool:
    """
    Jämför de definierande systemen för M och M̃.

    Ekvationerna vid varje M₁-basblock ska vara desamma när den tillagda
    kolumnen tas bort ur M̃:s system (de tillagda variablerna får då bara
    förekomma med koefficient noll), och ekvationerna vid den tillagda
    kolumnen ska ha variabler som inte förekommer någon annanstans.

    Args:
        M: Representationen
        Mt: Den kantade representationen
        prob: Problemet
        Z: Kolumnklassen; härleds ur storleksvektorerna om den saknas
    """
    F = prob.field
    if Z is None:
        Z = _widened_class(prob, M.sizes, Mt.sizes)
        if Z is None:
            return False
    ds = build_defining_system(prob, M.sizes, assemble(M, prob))
    dst = build_defining_system(prob, Mt.sizes, assemble(Mt, prob))
    lift = _lift_map(prob, M.sizes, Mt.sizes, Z)
    nt = len(dst.variables)
    q_vars: Set[int] = set()
    rest_vars: Set[int] = set()
    for A, g, gt in zip(prob.M1, ds.groups, dst.groups):
        width = g.cols[1] - g.cols[0]
        width_t = gt.cols[1] - gt.cols[0]
        shift = 1 if A.tgt == Z else 0
        if width_t != width + shift or g.rows[1] - g.rows[0] != gt.rows[1] - gt.rows[0]:
            return False
        for i in range(g.rows[1] - g.rows[0]):
            for j in range(width_t):
                et = gt.equations[i * width_t + j]
                support = {v for v, a in enumerate(et) if not F.is_zero(a)}
                if shift and j == 0:
                    q_vars |= support
                    continue
                rest_vars |= support
                lifted = [F.zero] * nt
                for v, a in enumerate(g.equations[i * width + j - shift]):
                    if not F.is_zero(a):
                        lifted[lift[v]] = a
                if lifted != list(et):
                    _logger.debug("Systemen skiljer sig vid %s, post (%d, %d)", A.name, i, j)
                    return False
    return not (q_vars & rest_vars)


def _bordered_checks(prob: ProblemSpec, Z: int, sizes: Sequence[int]) -> Callable[[Dict[str, Any]], None]:
    """Observatör: toppradens variabler i Z saknas och frontgruppen är enhetlig."""
    m = prob.algebra.class_size(sizes, Z)

    def check(state: Dict[str, Any]) -> None:
        ds = state["system"]
        F = ds.field
        base = ds.frame.class_base[Z]
        top = [base + c for c in range(1, m)]
        front = ds.frontier.equations if ds.frontier is not None else []
        for eq in ds.prior() + front:
            if any(not F.is_zero(eq[v]) for v in top):
                raise IllegalStep(
                    f"Topprad i klass {Z} förekommer i det definierande systemet vid steg {state['step']}")
        try:
            delta_is_zero(ds)
        except MixedGroup as exc:
            raise IllegalStep(f"Frontgruppen är inte enhetlig vid steg {state['step']}: {exc}") from exc

    return check


def _same_steps(a: ReductionTrace, b: ReductionTrace) -> bool:
    if len(a.steps) != len(b.steps):
        return False
    for s, t in zip(a.steps, b.steps):
        if (s.kind, s.rows, s.cols, s.classes) != (t.kind, t.rows, t.cols, t.classes):
            return False
        if (s.G is None) != (t.G is None) or (s.G is not None and not mat_equal(s.G, t.G)):
            return False
    return True


def _expect(step: ReductionStep, kind: str, G: Optional[Matrix], case: str) -> None:
    if step.kind != kind:
        raise IllegalStep(f"Fall {case}: väntade {kind} men fick {step.kind} för {step.arrow}")
    if G is not None and (step.G is None or not mat_equal(step.G, G)):
        raise IllegalStep(f"Fall {case}: blocket för {step.arrow} har fel form")


def _align(F: Field, trace: ReductionTrace, bordered_trace: ReductionTrace,
           beta: int) -> List[ReductionStep]:
    """Parar ihop stegen och sätter fall 1.1–2.3 på de kantade stegen."""
    deletions = [s for s in bordered_trace.steps if s.kind == "deletion"]
    if [s.classes for s in trace.steps if s.kind == "deletion"] != [s.classes for s in deletions]:
        raise IllegalStep("Borttagna klasser skiljer sig mellan spåren")
    orig = [s for s in trace.steps if s.kind != "deletion"]
    bord = [s for s in bordered_trace.steps if s.kind != "deletion"]
    out = list(deletions)
    pos = 0
    added_class = False

    def take() -> ReductionStep:
        nonlocal pos
        if pos >= len(bord):
            raise IllegalStep("Den kantade följden tog slut före originalet")
        pos += 1
        return bord[pos - 1]

    for s in orig:
        touches = s.cols is not None and s.cols[0] == beta
        if not touches:
            case = "2.1" if added_class else "1.1"
            t = take()
            _expect(t, s.kind, s.G, case)
            out.append(t.model_copy(update={"case": case}))
        elif not added_class:
            t = take()
            if s.kind == "regularization":
                case = "1.2"
                _expect(t, "regularization", None, case)
            elif s.kind == "edge":
                case = "1.3" if s.links < s.cols[1] - s.cols[0] else "1.4"
                _expect(t, "edge", [[F.zero] + list(row) for row in s.G], case)
                added_class = case == "1.4"
            else:
                raise IllegalStep(f"Steget {s.kind} för {s.arrow} kan inte röra kolumnen β")
            out.append(t.model_copy(update={"case": case}))
        else:
            # Den tillagda kolumnen avgör fallet: δ(ã₀) = 0 ger kanten (0),
            # annars regulariseras den. ã₁ reduceras som originalsteget.
            t0, t1 = take(), take()
            if t0.kind == "edge":
                case = "2.2"
                _expect(t0, "edge", zeros(F, s.rows[1] - s.rows[0], 1), case)
            elif t0.kind == "regularization":
                case = "2.3"
                if s.kind != "regularization":
                    raise IllegalStep(f"Fall 2.3: {s.arrow} reducerades med {s.kind} i originalet")
            else:
                raise IllegalStep(f"Fall 2: {t0.arrow} ({t0.kind}) kan inte ta den tillagda kolumnen")
            _expect(t1, s.kind, s.G, case)
            out.extend([t0.model_copy(update={"case": case}), t1.model_copy(update={"case": case})])
        _logger.debug("Steg %s (%s): fall %s", s.arrow, s.kind, out[-1].case)
    if pos != len(bord):
        raise IllegalStep("Den kantade följden har fler steg än originalet")
    return out


def bordered_sequence(prob: ProblemSpec, trace: ReductionTrace, Z: int,
                      M: Representation) -> ReductionTrace:
    """
    Den parallella reduktionsföljden för den kantade matrisen.

    M ska vara i kanonisk form och trace dess spår. Följden för M̃ körs med
    kontroller vid varje front: toppraden i Z:s diagonalblock förekommer
    inte i systemet och frontgruppen är antingen helt beroende eller helt
    oberoende. Efter sista steget ska matrisen vara M̃ själv.

    Args:
        prob: Bipartit problem med RDCC
        trace: Spåret för M
        Z: Kolumnklassen
        M: Representationen i kanonisk form

    Returns:
        Det kantade spåret med fall 1.1–2.3 på varje steg

    Raises:
        NotMainColumnClass: Om Z inte är en kolumnklass
        IllegalStep: Om spåret och problemet inte stämmer överens
    """
    F = prob.field
    cls = _column_class(prob, Z)
    if not rdcc_check(prob):
        raise IllegalStep("Problemet uppfyller inte RDCC")
    if prob.algebra.class_size(M.sizes, Z) == 0:
        raise IllegalStep(f"Klass {Z} har storlek noll")
    cf, own = canonical_form(prob, M)
    if not mat_equal(cf.matrix, assemble(M, prob)):
        raise IllegalStep("Representationen är inte i kanonisk form")
    if not _same_steps(own, trace):
        raise IllegalStep("Spåret hör inte till representationen")
    inst = bordered(M, Z, prob)
    cft, tt = canonical_form(prob, inst.bordered,
                             observer=_bordered_checks(prob, Z, inst.bordered.sizes))
    if not mat_equal(cft.matrix, assemble(inst.bordered, prob)):
        raise IllegalStep("Den kantade följden slutar inte i M̃")
    beta = offsets(M.sizes)[cls.main - 1]
    steps = _align(F, trace, tt, beta)
    _logger.info("Kantad följd: %d steg för %d originalsteg", len(steps), len(trace.steps))
    return ReductionTrace(steps=steps)


# ---------------------------------------------------------------------------
# Lokala lager och diagonalfaktorer
# ---------------------------------------------------------------------------

def _name(v: VertexClass, idx: int) -> str:
    return v.label or f"X{idx}"


def local_layer(layer: BocsLayer, vertex: int) -> BocsLayer:
    """Det lokala lagret vid en nod: öglorna där och termerna mellan dem."""
    solids = [a for a in layer.solids if a.src == a.tgt == vertex]
    dotteds = [v for v in layer.dotteds if v.src == v.tgt == vertex]
    names = {a.name for a in solids} | {v.name for v in dotteds}

    def restrict(ts: TermSum) -> TermSum:
        return TermSum(terms=[t for t in ts.terms
                              if t.left in names and (t.right is None or t.right in names)])

    return BocsLayer(
        field=layer.field,
        vertices=[layer.vertices[vertex]],
        solids=[a.model_copy(update={"index": i, "src": 0, "tgt": 0}) for i, a in enumerate(solids)],
        dotteds=[v.model_copy(update={"index": j, "src": 0, "tgt": 0}) for j, v in enumerate(dotteds)],
        delta_solid={a.name: restrict(layer.delta_solid[a.name]) for a in solids},
        delta_dotted={v.name: restrict(layer.delta_dotted[v.name]) for v in dotteds},
        problem=layer.problem if len(layer.vertices) == 1 else None,
    )


def _delta0_rows(layer: BocsLayer) -> List[List[Poly]]:
    """Koefficienterna för de streckade pilarna i δ⁰(a_i), en rad per heldragen pil."""
    F = layer.field
    rows = []
    for a in layer.solids:
        ts = layer.delta_solid[a.name]
        row = []
        for v in layer.dotteds:
            c = ts.coefficient("V", v.name)
            row.append(to_bi(F, c) if c is not None else bi_zero(F))
        rows.append(row)
    return rows


def diagonal_factors(F: Field, rows: Sequence[Sequence[Poly]], minor_cap: int = 20000) -> List[Poly]:
    """
    Diagonalen f_11, …, f_nn i triangulär form efter basbyte bland de streckade pilarna.

    f_ii = d_i / d_(i−1) där d_i är sgd av i×i-minorerna i de i första
    raderna; f_ii = 0 när rad i beror av de tidigare.

    Raises:
        MatrixProblemError: Om antalet minorer för något i överstiger minor_cap
    """
    m = len(rows[0]) if rows else 0
    out = []
    prev = bi_const(F, 1)
    for i in range(1, len(rows) + 1):
        if prev.is_zero:
            out.append(bi_zero(F))
            continue
        d = bi_zero(F)
        for count, cols in enumerate(combinations(range(m), i), start=1):
            if count > minor_cap:
                raise MatrixProblemError(f"Fler än {minor_cap} minorer av storlek {i}")
            minor = poly_matrix_det(F, [[to_bi(F, rows[r][c]) for c in cols] for r in range(i)])
            if minor.is_zero:
                continue
            d = minor if d.is_zero else d.gcd(minor)
            if d.is_ground:
                break
        out.append(d if d.is_zero else d.exquo(prev))
        prev = d
    return out


def _tame_check(F: Field, vertex: VertexClass, rows: Sequence[Sequence[Poly]],
                minor_cap: int) -> Tuple[Optional[int], Optional[Poly], Poly]:
    """
    Tamhetskontrollen för ett parametriskt lokalt lager.

    Returns:
        (s, f_ss, phi): s är första index där f_ss saknar inverterbar
        h-del eller inte är inverterbart i lokaliseringen, annars None
    """
    diag = diagonal_factors(F, rows, minor_cap)
    phi = vertex.forbidden(F)
    for i, f in enumerate(diag):
        if f.is_zero:
            return i, f, phi
        _, h, _ = split_xy(F, f)
        hxx = substitute_y_by_x(F, h)
        if hxx.is_zero:
            return i, f, phi
        phi = phi * hxx
    for i, f in enumerate(diag):
        if not invertible_in_localization(F, f, phi, phi):
            return i, f, phi
    return None, None, phi


def _first_dependent(F: Field, rows: Sequence[Sequence[Any]], ncols: int) -> Optional[int]:
    prev = 0
    for i in range(len(rows)):
        r = rank(F, [list(row) for row in rows[:i + 1]], ncols)
        if r == prev:
            return i
        prev = r
    return None


def _finite(layer: BocsLayer, vertex: int) -> bool:
    local = local_layer(layer, vertex)
    F = layer.field
    rows = [[scalar_of(F, p) for p in row] for row in _delta0_rows(local)]
    return _first_dependent(F, rows, len(local.dotteds)) is None


def _tame_infinite(layer: BocsLayer, vertex: int, minor_cap: int) -> bool:
    local = local_layer(layer, vertex)
    s, _, _ = _tame_check(layer.field, layer.vertices[vertex], _delta0_rows(local), minor_cap)
    return s is None


def is_one_sided(layer: BocsLayer) -> bool:
    """
    Ensidig form: triviala noder, alla heldragna pilar startar i samma nod och
    differentialerna har bara termer v och a⊗v med skalära koefficienter.
    """
    if any(v.parametric for v in layer.vertices):
        return False
    if len({a.src for a in layer.solids}) > 1:
        return False
    for ts in layer.delta_solid.values():
        for t in ts.terms:
            if t.kind == "VA" or not is_scalar(t.coef):
                return False
    return True


# ---------------------------------------------------------------------------
# Detektorer
# ---------------------------------------------------------------------------

def _content(F: Field, coefs: Sequence[Poly]) -> Poly:
    """sgd av koefficienterna; en ensam koefficient returneras oförändrad."""
    coefs = [to_bi(F, c) for c in coefs if not c.is_zero]
    if not coefs:
        return bi_zero(F)
    if len(coefs) == 1:
        return coefs[0]
    g = coefs[0]
    for c in coefs[1:]:
        g = g.gcd(c)
    return g


def detect_drozd(layer: BocsLayer, minor_cap: int = 20000) -> WildVerdict:
    """
    Drozds konfigurationer vid första pilen a₁: X → Y.

    Case1: precis en av X, Y parametrisk och δ(a₁) = 0; MW1 när lagret har
    två noder, den parametriska är tam oändlig och den triviala ändlig.
    Case2: båda parametriska, δ(a₁) = f·v utan heldragna pilar och f inte
    inverterbart i k[x, y, φ_X(x)⁻¹, φ_Y(y)⁻¹]; MW2 när lagret har två
    noder och båda är tama oändliga. f är sgd av koefficienterna.
    """
    F = layer.field
    a1 = layer.first_solid()
    if a1 is None:
        return WildVerdict(tag="None")
    X, Y = layer.vertices[a1.src], layer.vertices[a1.tgt]
    phi = {_name(X, a1.src): X.forbidden(F), _name(Y, a1.tgt): Y.forbidden(F)}
    delta = layer.delta_solid[a1.name]
    two = len(layer.vertices) == 2 and a1.src != a1.tgt
    if X.parametric != Y.parametric:
        if not delta.is_zero():
            return WildVerdict(tag="None", arrow=a1.name)
        par, triv = (a1.src, a1.tgt) if X.parametric else (a1.tgt, a1.src)
        mw = two and _tame_infinite(layer, par, minor_cap) and _finite(layer, triv)
        verdict = WildVerdict(tag="MW1" if mw else "Case1", arrow=a1.name, phi=phi)
        _logger.info("Vild konfiguration %s vid %s", verdict.tag, a1.name)
        return verdict
    if X.parametric and Y.parametric:
        if delta.of_kind("VA") or delta.of_kind("AV"):
            return WildVerdict(tag="None", arrow=a1.name)
        f = _content(F, [t.coef for t in delta.of_kind("V")])
        if not f.is_zero and invertible_in_localization(F, f, X.forbidden(F), Y.forbidden(F)):
            return WildVerdict(tag="None", arrow=a1.name)
        mw = (two and _tame_infinite(layer, a1.src, minor_cap)
              and _tame_infinite(layer, a1.tgt, minor_cap))
        verdict = WildVerdict(tag="MW2" if mw else "Case2", arrow=a1.name, witness=f, phi=phi)
        _logger.info("Vild konfiguration %s vid %s med f = %s", verdict.tag, a1.name, f.as_expr())
        return verdict
    return WildVerdict(tag="None", arrow=a1.name)


def _parametric_verdict(layer: BocsLayer, one_sided: bool, minor_cap: int) -> WildVerdict:
    F = layer.field
    X = layer.vertices[0]
    s, f, phi = _tame_check(F, X, _delta0_rows(layer), minor_cap)
    phis = {_name(X, 0): phi}
    if s is None:
        return WildVerdict(tag="LocalCase(ii)", phi=phis, one_sided=one_sided)
    _logger.info("Lokalt lager utanför fall (i)/(ii): f = %s vid %s", f.as_expr(), layer.solids[s].name)
    return WildVerdict(tag="not (i)/(ii)", arrow=layer.solids[s].name, witness=f, phi=phis,
                       one_sided=one_sided)


def classify_local(layer: BocsLayer, minor_cap: int = 20000) -> WildVerdict:
    """
    Klassificerar ett lokalt lager.

    För en trivial nod ger linjärt oberoende δ⁰(a_1), …, δ⁰(a_n) fall (i).
    Annars regulariseras pilarna före den första beroende a_n₀, a_n₀
    muteras till x och det parametriska lagret prövas: alla diagonalfaktorer
    f_ii har h_ii(x, x) ≠ 0 och är inverterbara med φ = φ_X·Π h_ii(x, x)
    ger fall (ii). Ett lager som redan är parametriskt prövas direkt. I
    övriga fall returneras "not (i)/(ii)" med första felande f_ss som vittne.

    Raises:
        NotLocal: Om lagret har fler än en nod
        IllegalStep: Om mutationen behövs men lagret saknar problem
    """
    if len(layer.vertices) != 1:
        raise NotLocal(f"Lagret har {len(layer.vertices)} noder")
    F = layer.field
    one_sided = is_one_sided(layer)
    if layer.vertices[0].parametric:
        return _parametric_verdict(layer, one_sided, minor_cap)
    rows = [[scalar_of(F, p) for p in row] for row in _delta0_rows(layer)]
    n0 = _first_dependent(F, rows, len(layer.dotteds))
    if n0 is None:
        return WildVerdict(tag="LocalCase(i)", one_sided=one_sided)
    if layer.problem is None:
        raise IllegalStep("Loopmutationen kräver problemet bakom lagret")
    prob = layer.problem
    for _ in range(n0):
        prob = apply_reduction(prob, ReductionStep(kind="regularization"))
    prob = apply_reduction(prob, ReductionStep(kind="loop_mutation"))
    mutated = layer_of(prob)
    if len(mutated.vertices) != 1:
        raise NotLocal("Mutationen gav ett lager med flera noder")
    _logger.debug("Lokalt lager: %d regulariseringar före mutationen", n0)
    return _parametric_verdict(mutated, one_sided, minor_cap)


def _hit(layer: BocsLayer, minor_cap: int) -> Optional[WildVerdict]:
    verdict = detect_drozd(layer, minor_cap)
    if verdict.tag != "None":
        return verdict
    if len(layer.vertices) == 1:
        try:
            local = classify_local(layer, minor_cap)
        except MatrixProblemError as exc:
            _logger.debug("Lokal klassificering misslyckades: %s", exc)
            return None
        if local.tag == "not (i)/(ii)":
            return local
    return None


def _branches(prob: ProblemSpec, layer: BocsLayer) -> List[Tuple[ReductionStep, str]]:
    if not prob.M1:
        return []
    A1 = prob.M1[0]
    delta = layer.delta_solid[A1.name]
    X, Y = prob.classes[A1.src], prob.classes[A1.tgt]
    if not delta.is_zero():
        solid_terms = delta.of_kind("VA") or delta.of_kind("AV")
        if not solid_terms and any(is_scalar(t.coef) for t in delta.of_kind("V")):
            return [(ReductionStep(kind="regularization", arrow=A1.name), f"regularization({A1.name})")]
        return []
    if A1.src == A1.tgt:
        if X.parametric:
            return []
        return [(ReductionStep(kind="loop_mutation", arrow=A1.name), f"loop_mutation({A1.name})")]
    if X.parametric or Y.parametric:
        return []
    return [(ReductionStep(kind="to_zero_226", arrow=A1.name), f"to_zero_226({A1.name})"),
            (ReductionStep(kind="to_identity_227", arrow=A1.name), f"to_identity_227({A1.name})")]


def search_configurations(prob: ProblemSpec, depth: int = 3, max_nodes: int = 200,
                          minor_cap: int = 20000) -> WildVerdict:
    """
    Bredden-först-sökning efter en vild konfiguration.

    Vid varje nod körs detect_drozd och, för lokala lager, classify_local.
    Grenar: regularisering när δ(a₁) har en skalär pivot, loopmutation för
    triviala öglor med δ(a₁) = 0 och både to_zero_226 och to_identity_227
    för kanter med δ(a₁) = 0.

    Args:
        prob: Startproblemet
        depth: Största antal reduktioner längs en stig
        max_nodes: Största antal besökta noder

    Returns:
        Första träffen med stigen dit, annars tag "None"
    """
    queue = deque([(prob, [])])
    visited = 0
    while queue and visited < max_nodes:
        node, path = queue.popleft()
        visited += 1
        layer = layer_of(node)
        verdict = _hit(layer, minor_cap)
        if verdict is not None:
            _logger.info("Träff %s efter %d noder: %s", verdict.tag, visited, " → ".join(path) or "start")
            return verdict.model_copy(update={"path": list(path)})
        if len(path) >= depth:
            continue
        for step, label in _branches(node, layer):
            try:
                child = apply_reduction(node, step)
            except MatrixProblemError as exc:
                _logger.debug("Grenen %s hoppas över: %s", label, exc)
                continue
            queue.append((child, path + [label]))
    _logger.info("Ingen vild konfiguration inom djup %d (%d noder)", depth, visited)
    return WildVerdict(tag="None")
