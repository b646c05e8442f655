"""
Modul för reduktioner, definierande system och kanonisk form.

Två nivåer finns här:

* Symboliskt: ``apply_reduction`` tar ett problem och ett reduktionssteg
  (deletion, regularization, loop_mutation, edge, unraveling_loop,
  localization, to_zero_226, to_identity_227) och ger det inducerade
  problemet med nya klasser, K₁/M₁-baser och H.
* Numeriskt: ``canonical_form`` kör den unika reduktionsföljden för en
  representation. Den täta matrisen transformeras stegvis medan en förfinad
  indelning av remsorna i bitar hålls uppdaterad; vid varje front avgör
  rangen i det definierande systemet om blocket kan nollställas
  (regularisering) eller ska normaliseras (kant eller ögla).

Bitar har globala id:n och ett inducerat klass-id; bitar i samma inducerade
klass transformeras alltid tillsammans.
"""

import logging
import re
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Set, Tuple

from pydantic import BaseModel
from sympy import Poly

from .bocs import solid_differential
from .core import (
    BaseMatrix, MinimalAlgebraSpec, Position, ProblemSpec, Representation, VertexClass,
    assemble, assemble_h, normalize_basis, offsets, position_key, validate_problem,
)
from .exactalg import (
    Field, IllegalStep, InvalidProblem, IrregularWeyr, Matrix, MixedGroup,
    UnsupportedCoefficient, bi_zero, degrees_xy, identity, is_scalar, mat_equal, mat_inv,
    mat_mul, matrix_to_json, nullspace, poly_from_json, rank, rref, scalar_of, solve,
    to_bi, to_matrix, uni, x, zeros,
)
from .models import ReplayStepJSON
from .weyr import WeyrForm, is_regular, is_weyr, weyr_from_matrix, weyr_of

_logger = logging.getLogger(__name__)

StepKind = Literal["deletion", "regularization", "loop_mutation", "edge",
                   "unraveling_loop", "localization", "to_zero_226", "to_identity_227"]

Block = Tuple[str, Tuple[int, int], Tuple[int, int]]


class ReductionStep(BaseModel):
    """
    Ett reduktionssteg.

    Attributes:
        kind: Reduktionstyp
        arrow: Pilen som reduceras (standard: första M₁-basen)
        G: Reduktionsblocket (edge: [[0, I_r], [0, 0]], ögla: Weyr-matris)
        classes: Klassindex för deletion
        factor: Polynom i x för localization
        cls: Klassindex för localization och parametrisk avveckling
        sizes_before: Förfinad storleksvektor före steget
        sizes_after: Förfinad storleksvektor efter steget
        rows: Radintervall [start, slut) för blocket i den täta matrisen
        cols: Kolumnintervall för blocket
        links: Antal länkar steget lade till
        transforms: Transformationsmatriser som användes
        case: Fall i den kantade följden ("1.1" … "2.3"), annars None
    """
    kind: StepKind
    arrow: Optional[str] = None
    G: Optional[Any] = None
    classes: List[int] = []
    factor: Optional[Any] = None
    cls: Optional[int] = None
    sizes_before: List[int] = []
    sizes_after: List[int] = []
    rows: Optional[Tuple[int, int]] = None
    cols: Optional[Tuple[int, int]] = None
    links: int = 0
    transforms: Dict[str, Any] = {}
    case: Optional[str] = None

    class Config:
        arbitrary_types_allowed = True
        frozen = True


class ReductionTrace(BaseModel):
    """Reduktionsföljden för en körning."""
    steps: List[ReductionStep] = []

    class Config:
        arbitrary_types_allowed = True
        frozen = True


class CanonicalForm(BaseModel):
    """
    Kanonisk form P∞.

    Attributes:
        matrix: Den täta matrisen i den slutliga basen
        sizes: Förfinad storleksvektor (en post per slutlig remsa)
        links: Antal länkar
        dim: Σ m_X över originalklasserna
        deleted: Originalklasser med storlek noll
    """
    matrix: Any
    sizes: List[int]
    links: int
    dim: int
    deleted: List[int] = []

    class Config:
        arbitrary_types_allowed = True
        frozen = True


class EquationGroup(BaseModel):
    """Ekvationerna vid ett block: en rad per post, en kolumn per variabel."""
    label: str
    rows: Tuple[int, int]
    cols: Tuple[int, int]
    equations: List[List[Any]]

    class Config:
        arbitrary_types_allowed = True
        frozen = True


class DefiningSystem(BaseModel):
    """
    Definierande system för K vid en front.

    Attributes:
        field: Arbetskroppen
        variables: (etikett, rad, kolumn) per variabel; ett block Z_X per
            klass och ett block Z_j per K₁-bas i originalproblemet
        groups: Ekvationsgrupper före fronten i ≼-ordning
        frontier: Ekvationsgruppen vid fronten
        h_base: H(k) som delsystemen byggs kring
        h_parts: Tillskott till H(k) per grupp, i gruppordning
    """
    field: Any
    variables: List[Tuple[str, int, int]]
    groups: List[EquationGroup] = []
    frontier: Optional[EquationGroup] = None
    h_base: Any = None
    h_parts: List[Any] = []
    frame: Any = None

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    def prior(self) -> Matrix:
        return [eq for g in self.groups for eq in g.equations]

    def solution_basis(self) -> List[List[Any]]:
        return nullspace(self.field, self.prior(), len(self.variables))

    def dim(self) -> int:
        return len(self.solution_basis())


class DeformedSystem(BaseModel):
    """Systemet uppdelat vid en pivot: H(k) = H₁ + H₂."""
    first: DefiningSystem
    second: DefiningSystem

    class Config:
        arbitrary_types_allowed = True
        frozen = True


# ---------------------------------------------------------------------------
# Symboliska reduktioner
# ---------------------------------------------------------------------------

def _finish(prob: ProblemSpec, algebra: MinimalAlgebraSpec, K1: Sequence[BaseMatrix],
            M1: Sequence[BaseMatrix], H: Dict[Position, Poly]) -> ProblemSpec:
    new = ProblemSpec(
        field=prob.field, algebra=algebra,
        K1=sorted(K1, key=lambda b: position_key(b.lead)),
        M1=sorted(M1, key=lambda b: position_key(b.lead)),
        H={pos: h for pos, h in H.items() if not h.is_zero},
    )
    try:
        validate_problem(new)
    except InvalidProblem as exc:
        raise IllegalStep(f"Det inducerade problemet är ogiltigt: {exc}") from exc
    return new


def _first_arrow(prob: ProblemSpec, step: ReductionStep) -> BaseMatrix:
    if not prob.M1:
        raise IllegalStep("Problemet är minimalt; det finns ingen första pil")
    A1 = prob.M1[0]
    if step.arrow is not None and step.arrow != A1.name:
        raise IllegalStep(f"Steget gäller {step.arrow} men första pilen är {A1.name}")
    return A1


def _require_delta_zero(prob: ProblemSpec, A1: BaseMatrix) -> None:
    delta = solid_differential(prob, 0)
    if not delta.is_zero():
        raise IllegalStep(f"δ({A1.name}) = {delta.render()} ≠ 0")


def _delete(prob: ProblemSpec, removed: Sequence[int]) -> ProblemSpec:
    """Tar bort klasserna, deras remsor och alla baser som rör dem."""
    gone = set(removed)
    for c in gone:
        if not 0 <= c < len(prob.classes):
            raise IllegalStep(f"Okänd klass {c}")
    alg = prob.algebra
    kept = [s for s in range(1, alg.t + 1) if alg.class_of(s) not in gone]
    renum = {s: k + 1 for k, s in enumerate(kept)}
    cls_map: Dict[int, int] = {}
    classes = []
    for idx, c in enumerate(prob.classes):
        if idx in gone:
            continue
        cls_map[idx] = len(classes)
        classes.append(c.model_copy(update={"indices": [renum[s] for s in c.indices]}))

    def move(b: BaseMatrix) -> Optional[BaseMatrix]:
        if b.src in gone or b.tgt in gone:
            return None
        return b.model_copy(update={
            "entries": {(renum[i], renum[j]): v for (i, j), v in b.entries.items()},
            "src": cls_map[b.src], "tgt": cls_map[b.tgt],
            "lead": (renum[b.lead[0]], renum[b.lead[1]]),
        })

    K1 = [m for m in map(move, prob.K1) if m is not None]
    M1 = [m for m in map(move, prob.M1) if m is not None]
    H = {(renum[i], renum[j]): h for (i, j), h in prob.H.items() if i in renum and j in renum}
    return _finish(prob, MinimalAlgebraSpec(t=len(kept), classes=classes), K1, M1, H)


def _localize(prob: ProblemSpec, cls: Optional[int], factor: Any) -> ProblemSpec:
    F = prob.field
    if cls is None or not 0 <= cls < len(prob.classes):
        raise IllegalStep(f"Okänd klass för lokalisering: {cls}")
    c = prob.classes[cls]
    if not c.parametric:
        raise IllegalStep(f"Klass {cls} är inte parametrisk")
    f = factor if isinstance(factor, Poly) else poly_from_json(F, factor, x)
    if f.is_zero:
        raise IllegalStep("Lokalisering med nollpolynomet")
    classes = list(prob.classes)
    classes[cls] = c.model_copy(update={"phi": list(c.phi) + [f]})
    algebra = MinimalAlgebraSpec(t=prob.t, classes=classes)
    return _finish(prob, algebra, prob.K1, prob.M1, prob.H)


def _regularize(prob: ProblemSpec, A1: BaseMatrix) -> ProblemSpec:
    """
    Regularisering: δ(a₁) = Σ ζ_l v_l med ett skalärt ζ_j ≠ 0.

    V_j och A₁ försvinner; övriga baser blir V_l − (ζ_l/ζ_j)·V_j och behåller
    sina ledande positioner.
    """
    F = prob.field
    delta = solid_differential(prob, 0)
    if delta.of_kind("VA") or delta.of_kind("AV"):
        raise IllegalStep(f"δ({A1.name}) innehåller heldragna pilar: {delta.render()}")
    zetas = {t.left: t.coef for t in delta.of_kind("V")}
    pivot = next((V for V in prob.K1 if V.name in zetas and is_scalar(zetas[V.name])), None)
    if pivot is None:
        raise IllegalStep(f"δ({A1.name}) = {delta.render()} saknar en streckad pil med skalär koefficient")
    inv = F.one / scalar_of(F, zetas[pivot.name])
    K1 = []
    for V in prob.K1:
        if V.name == pivot.name:
            continue
        z = zetas.get(V.name)
        if z is None:
            K1.append(V)
            continue
        c = to_bi(F, z).mul_ground(inv)
        entries = dict(V.entries)
        for pos, u in pivot.entries.items():
            entries[pos] = entries.get(pos, bi_zero(F)) - c * to_bi(F, u)
        K1.append(V.model_copy(update={"entries": {p: v for p, v in entries.items() if not v.is_zero}}))
    _logger.debug("Regularisering av %s med pivot %s", A1.name, pivot.name)
    return _finish(prob, prob.algebra, K1, prob.M1[1:], prob.H)


def _loop_mutation(prob: ProblemSpec, A1: BaseMatrix) -> ProblemSpec:
    F = prob.field
    if A1.src != A1.tgt:
        raise IllegalStep(f"{A1.name} är ingen ögla")
    cls = prob.classes[A1.src]
    if cls.parametric:
        raise IllegalStep(f"Klassen för {A1.name} är redan parametrisk")
    H = dict(prob.H)
    for pos, u in A1.scalar_entries(F).items():
        H[pos] = H.get(pos, uni(F, {}, x)) + uni(F, {1: u}, x)
    classes = list(prob.classes)
    classes[A1.src] = cls.model_copy(update={"kind": "parametric", "phi": []})
    return _finish(prob, MinimalAlgebraSpec(t=prob.t, classes=classes), prob.K1, prob.M1[1:], H)


class _PieceSpec(BaseModel):
    """En bit av en klass vid expansion."""
    key: Tuple[Any, ...]
    label: str
    side: Optional[str] = None

    class Config:
        frozen = True


def _label(prob: ProblemSpec, idx: int) -> str:
    return prob.classes[idx].label or f"X{idx}"


def _edge_shape(F: Field, G: Matrix) -> Tuple[int, int, int]:
    """(m, n, r) för ett kantblock; kastar om G inte är [[0, I_r], [0, 0]]."""
    m = len(G)
    n = len(G[0]) if G else 0
    if any(len(row) != n for row in G):
        raise IllegalStep("G är inte rektangulär")
    r = rank(F, G, n) if m and n else 0
    expected = zeros(F, m, n)
    for k in range(r):
        expected[k][n - r + k] = F.one
    if not mat_equal(G, expected):
        raise IllegalStep("G har inte formen [[0, I_r], [0, 0]]")
    return m, n, r


def _edge_pieces(prob: ProblemSpec, X: int, Y: int, m: int, n: int,
                 r: int) -> Tuple[Dict[int, List[_PieceSpec]], Matrix]:
    F = prob.field
    lx, ly = _label(prob, X), _label(prob, Y)
    sx, sy = prob.classes[X].side, prob.classes[Y].side
    merged = sx if sx == sy else None
    z2x = _PieceSpec(key=("Z2",), label=f"{lx}|{ly}", side=merged)
    z2y = _PieceSpec(key=("Z2",), label=f"{lx}|{ly}", side=merged)
    rows = ([z2x] if r else []) + ([_PieceSpec(key=("Z1",), label=f"{lx}.1", side=sx)] if m - r else [])
    cols = ([_PieceSpec(key=("Z3",), label=f"{ly}.3", side=sy)] if n - r else []) + ([z2y] if r else [])
    g = zeros(F, len(rows), len(cols))
    if r:
        g[0][len(cols) - 1] = F.one
    return {X: rows, Y: cols}, g


def _weyr_pieces(prob: ProblemSpec, X: int, W: WeyrForm) -> Tuple[List[_PieceSpec], Matrix]:
    """Bitar (λ, l, j) med e_j > 0 och Weyr-matrisen på bitnivå."""
    F = prob.field
    lx = _label(prob, X)
    side = prob.classes[X].side
    parts = [(lam, l, j) for lam, l, j, e in W.pieces() if e > 0]
    pieces = [_PieceSpec(key=("W", F.key(lam), j), label=f"{lx}[{F.format(lam)},{j}]", side=side)
              for lam, l, j in parts]
    g = zeros(F, len(parts), len(parts))
    where = {(F.key(lam), l, j): a for a, (lam, l, j) in enumerate(parts)}
    for a, (lam, l, j) in enumerate(parts):
        g[a][a] = lam
        b = where.get((F.key(lam), l + 1, j))
        if b is not None:
            g[a][b] = F.one
    return pieces, g


def _next_w(prob: ProblemSpec) -> int:
    used = [int(m.group(1)) for V in prob.K1 for m in [re.match(r"^w(\d+)$", V.name)] if m]
    return max(used, default=0) + 1


def _expand(prob: ProblemSpec, affected: Dict[int, List[_PieceSpec]], g: Matrix,
            A1: Optional[BaseMatrix], unravel: Optional[int] = None) -> ProblemSpec:
    """
    Delar remsorna i de berörda klasserna i bitar och bygger det inducerade problemet.

    Remsan s i en berörd klass ersätts av remsorna (s, 1), ..., (s, k) i
    bitordning. H blåses upp bit för bit och G∗A₁ läggs till på bitnivå;
    vid parametrisk avveckling (``unravel``) ersätts x av g. K₁ får de
    uppdelade baserna plus radikalen i stabilisatorn {Z : Z_X·G = G·Z_Y}.

    Args:
        prob: Problemet
        affected: Bitar per berörd klass
        g: Blocket på bitnivå (rader: A₁:s startklass, kolumner: slutklass)
        A1: Pilen som reduceras, eller None vid parametrisk avveckling
        unravel: Klassen som avvecklas parametriskt

    Raises:
        IllegalStep: Om stabilisatorn inte har en identitet per ny klass
        UnsupportedCoefficient: Om en bas har x eller y över den avvecklade klassen
    """
    F = prob.field
    alg = prob.algebra

    def pieces_of(c: int) -> List[_PieceSpec]:
        if c in affected:
            return affected[c]
        return [_PieceSpec(key=("keep", c), label=_label(prob, c), side=prob.classes[c].side)]

    new_index: Dict[Tuple[int, int], int] = {}
    members: Dict[Tuple[Any, ...], List[int]] = {}
    specs: Dict[Tuple[Any, ...], List[_PieceSpec]] = {}
    for s in range(1, alg.t + 1):
        for k, piece in enumerate(pieces_of(alg.class_of(s))):
            new_index[(s, k)] = len(new_index) + 1
            members.setdefault(piece.key, []).append(new_index[(s, k)])
            specs.setdefault(piece.key, []).append(piece)
    order = sorted(members, key=lambda key: min(members[key]))
    class_index = {key: i for i, key in enumerate(order)}
    classes = []
    for key in order:
        if key[0] == "keep":
            classes.append(prob.classes[key[1]].model_copy(update={"indices": members[key]}))
            continue
        sides = {p.side for p in specs[key]}
        classes.append(VertexClass(indices=members[key], label=specs[key][0].label,
                                   side=sides.pop() if len(sides) == 1 else None))
    algebra = MinimalAlgebraSpec(t=len(new_index), classes=classes)

    def split(b: BaseMatrix) -> List[BaseMatrix]:
        if unravel is not None:
            for coef in b.entries.values():
                dx, dy = degrees_xy(coef)
                if (b.src == unravel and dx) or (b.tgt == unravel and dy):
                    raise UnsupportedCoefficient(
                        f"Basen {b.name} har en icke-skalär post över den avvecklade klassen")
        ps, pt = pieces_of(b.src), pieces_of(b.tgt)
        out = []
        for a, pa in enumerate(ps):
            for c, pc in enumerate(pt):
                name = b.name if len(ps) == len(pt) == 1 else f"{b.name}_{a + 1}{c + 1}"
                out.append(BaseMatrix(
                    name=name,
                    entries={(new_index[(i, a)], new_index[(j, c)]): v for (i, j), v in b.entries.items()},
                    src=class_index[pa.key], tgt=class_index[pc.key],
                    lead=(new_index[(b.lead[0], a)], new_index[(b.lead[1], c)]),
                ))
        return out

    H: Dict[Position, Poly] = {}

    def add(pos: Position, p: Poly) -> None:
        H[pos] = H[pos] + p if pos in H else p

    for (i, j), h in prob.H.items():
        c = alg.class_of(i)
        ps = pieces_of(c)
        if c == unravel:
            coeffs = h.as_dict(native=True)
            h0, h1 = coeffs.get((0,), F.zero), coeffs.get((1,), F.zero)
            for a in range(len(ps)):
                for b in range(len(ps)):
                    v = (h0 if a == b else F.zero) + h1 * g[a][b]
                    if not F.is_zero(v):
                        add((new_index[(i, a)], new_index[(j, b)]), uni(F, {0: v}, x))
        else:
            for k in range(len(ps)):
                add((new_index[(i, k)], new_index[(j, k)]), h)
    if A1 is not None:
        for (i, j), u in A1.scalar_entries(F).items():
            for a in range(len(g)):
                for b in range(len(g[a])):
                    if not F.is_zero(g[a][b]):
                        add((new_index[(i, a)], new_index[(j, b)]), uni(F, {0: u * g[a][b]}, x))

    # stabilisatorn av G på bitnivå
    X = A1.src if A1 is not None else unravel
    Y = A1.tgt if A1 is not None else unravel
    var: Dict[Tuple[int, int, int], int] = {}
    for c in sorted(affected):
        n = len(affected[c])
        for a in range(n):
            for b in range(n):
                var[(c, a, b)] = len(var)
    nx, ny = len(affected[X]), len(affected[Y])
    eqs = []
    for a in range(nx):
        for b in range(ny):
            row = [F.zero] * len(var)
            for c in range(nx):
                if not F.is_zero(g[c][b]):
                    row[var[(X, a, c)]] += g[c][b]
            for c in range(ny):
                if not F.is_zero(g[a][c]):
                    row[var[(Y, c, b)]] -= g[a][c]
            eqs.append(row)
    full = nullspace(F, eqs, len(var))
    selectors = []
    for (c, a, b), idx in var.items():
        if a == b:
            row = [F.zero] * len(var)
            row[idx] = F.one
            selectors.append(row)
    radical = nullspace(F, eqs + selectors, len(var))
    new_classes = len({p.key for ps in affected.values() for p in ps})
    if len(full) - len(radical) != new_classes:
        raise IllegalStep(
            f"Stabilisatorn har {len(full) - len(radical)} halvenkla delar men {new_classes} nya klasser")

    mats = []
    for vec in radical:
        mat: Dict[Position, Any] = {}
        for (c, a, b), idx in var.items():
            if F.is_zero(vec[idx]):
                continue
            for s in alg.classes[c].indices:
                pos = (new_index[(s, a)], new_index[(s, b)])
                mat[pos] = mat.get(pos, F.zero) + vec[idx]
        mats.append(mat)
    w_bases = normalize_basis(F, algebra, mats, prefix="w") if mats else []
    first_w = _next_w(prob)
    w_bases = [b.model_copy(update={"name": f"w{first_w + k}"}) for k, b in enumerate(w_bases)]
    for b in w_bases:
        if any(i >= j for (i, j) in b.entries):
            raise IllegalStep(f"Stabilisatorbasen {b.name} är inte strikt övertriangulär")

    K1 = [part for V in prob.K1 for part in split(V)] + w_bases
    M1 = [part for A in prob.M1 if A1 is None or A.name != A1.name for part in split(A)]
    _logger.debug("Expansion: %d -> %d remsor, %d nya radikalbaser", alg.t, algebra.t, len(w_bases))
    return _finish(prob, algebra, K1, M1, H)


def _edge(prob: ProblemSpec, A1: BaseMatrix, G: Matrix) -> ProblemSpec:
    if A1.src == A1.tgt:
        raise IllegalStep(f"{A1.name} är en ögla, inte en kant")
    for c in (A1.src, A1.tgt):
        if prob.classes[c].parametric:
            raise IllegalStep(f"Kantreduktion kräver triviala klasser, klass {c} är parametrisk")
    m, n, r = _edge_shape(prob.field, G)
    affected, g = _edge_pieces(prob, A1.src, A1.tgt, m, n, r)
    return _expand(prob, affected, g, A1)


def _unravel_loop(prob: ProblemSpec, A1: BaseMatrix, G: Matrix) -> ProblemSpec:
    F = prob.field
    if A1.src != A1.tgt:
        raise IllegalStep(f"{A1.name} är ingen ögla")
    if prob.classes[A1.src].parametric:
        raise IllegalStep("Öglereduktion kräver en trivial klass")
    if not is_weyr(F, G):
        raise IllegalStep("G är inte en Weyr-matris")
    pieces, g = _weyr_pieces(prob, A1.src, weyr_from_matrix(F, G))
    return _expand(prob, {A1.src: pieces}, g, A1)


def _unravel_parametric(prob: ProblemSpec, cls: int, G: Matrix) -> ProblemSpec:
    F = prob.field
    if not 0 <= cls < len(prob.classes) or not prob.classes[cls].parametric:
        raise IllegalStep(f"Klass {cls} är inte parametrisk")
    if not is_weyr(F, G):
        raise IllegalStep("G är inte en Weyr-matris")
    W = weyr_from_matrix(F, G)
    if not is_regular(F, W, prob.classes[cls].forbidden(F)):
        raise IrregularWeyr(f"Weyr-matrisen har ett egenvärde där phi för klass {cls} är noll")
    pieces, g = _weyr_pieces(prob, cls, W)
    return _expand(prob, {cls: pieces}, g, None, unravel=cls)


def apply_reduction(prob: ProblemSpec, step: ReductionStep) -> ProblemSpec:
    """
    Det inducerade problemet efter ett reduktionssteg.

    Args:
        prob: Problemet
        step: Steget; G anges för edge och unraveling_loop. En
            unraveling_loop med cls men utan arrow avvecklar en parametrisk
            klass, annars reduceras första pilen som ögla.

    Returns:
        Det inducerade problemet, validerat

    Raises:
        IllegalStep: Om stegets förutsättning inte håller
        IrregularWeyr: Om en parametrisk avveckling träffar en rot till phi
    """
    F = prob.field
    _logger.debug("Tillämpar %s på %s", step.kind, step.arrow or (prob.M1[0].name if prob.M1 else "-"))
    G = to_matrix(F, step.G) if step.G is not None else None
    if step.kind == "deletion":
        return _delete(prob, step.classes)
    if step.kind == "localization":
        return _localize(prob, step.cls, step.factor)
    if step.kind == "unraveling_loop" and step.arrow is None and step.cls is not None:
        if G is None:
            raise IllegalStep("unraveling_loop kräver G")
        return _unravel_parametric(prob, step.cls, G)

    A1 = _first_arrow(prob, step)
    if step.kind == "regularization":
        return _regularize(prob, A1)
    _require_delta_zero(prob, A1)
    if step.kind == "loop_mutation":
        return _loop_mutation(prob, A1)
    if step.kind == "to_zero_226":
        return _finish(prob, prob.algebra, prob.K1, prob.M1[1:], prob.H)
    if step.kind == "to_identity_227":
        if A1.src == A1.tgt:
            raise IllegalStep("to_identity_227 kräver två olika klasser")
        return _edge(prob, A1, [[F.one]])
    if G is None:
        raise IllegalStep(f"{step.kind} kräver G")
    if step.kind == "edge":
        return _edge(prob, A1, G)
    return _unravel_loop(prob, A1, G)


def step_from_json(data: ReplayStepJSON) -> ReductionStep:
    return ReductionStep(kind=data.kind, arrow=data.arrow, G=data.G, classes=list(data.classes),
                         factor=data.factor, cls=data.cls)


def replay(prob: ProblemSpec, steps: Sequence[ReductionStep]) -> List[ProblemSpec]:
    """Tillämpar stegen i tur och ordning och returnerar alla mellanproblem (start inräknad)."""
    out = [prob]
    for step in steps:
        out.append(apply_reduction(out[-1], step))
    return out


def replay_trace(prob: ProblemSpec, trace: ReductionTrace) -> List[ProblemSpec]:
    """
    Spelar upp ett numeriskt spår symboliskt.

    Regularisering, kant och ögla blir motsvarande symboliska steg med
    spårets G; deletion av originalklasser blir deletion.
    """
    steps = []
    for s in trace.steps:
        if s.kind == "deletion":
            steps.append(ReductionStep(kind="deletion", classes=s.classes))
        elif s.kind == "regularization":
            steps.append(ReductionStep(kind="regularization"))
        else:
            steps.append(ReductionStep(kind=s.kind, G=s.G))
    return replay(prob, steps)


# ---------------------------------------------------------------------------
# Definierande system
# ---------------------------------------------------------------------------

class _Frame:
    """Variabler Z_X och Z_j för originalproblemet vid en storleksvektor."""

    def __init__(self, prob: ProblemSpec, sizes: Sequence[int]):
        if not prob.is_scalar():
            raise UnsupportedCoefficient("Definierande system kräver ett skalärt problem")
        F = prob.field
        self.F = F
        self.sizes = list(sizes)
        self.offs = offsets(sizes)
        self.strip_of: List[int] = []
        self.local: List[int] = []
        for s, m in enumerate(sizes, start=1):
            self.strip_of.extend([s] * m)
            self.local.extend(range(m))
        self.labels: List[Tuple[str, int, int]] = []
        self.class_base: Dict[int, int] = {}
        self.cells: Dict[Position, List[Tuple[int, int, Any]]] = {}
        for idx, cls in enumerate(prob.classes):
            m = sizes[cls.indices[0] - 1]
            self.class_base[idx] = len(self.labels)
            label = cls.label or f"X{idx}"
            self.labels.extend((label, r, c) for r in range(m) for c in range(m))
            for i in cls.indices:
                self.cells.setdefault((i, i), []).append((self.class_base[idx], m, F.one))
        for V in prob.K1:
            m = prob.algebra.class_size(sizes, V.src)
            n = prob.algebra.class_size(sizes, V.tgt)
            base = len(self.labels)
            self.labels.extend((V.name, r, c) for r in range(m) for c in range(n))
            for pos, u in V.scalar_entries(F).items():
                self.cells.setdefault(pos, []).append((base, n, u))

    @property
    def nvars(self) -> int:
        return len(self.labels)

    def phi(self, r: int, c: int) -> List[Tuple[int, Any]]:
        lr, lc = self.local[r], self.local[c]
        return [(base + lr * ncols + lc, coef)
                for base, ncols, coef in self.cells.get((self.strip_of[r], self.strip_of[c]), ())]

    def dense(self, vec: Sequence[Any]) -> Matrix:
        """Φ som tät matris för en variabelvektor."""
        N = self.offs[-1]
        out = zeros(self.F, N, N)
        for (i, j), cells in self.cells.items():
            for lr in range(self.sizes[i - 1]):
                for lc in range(self.sizes[j - 1]):
                    total = self.F.zero
                    for base, ncols, coef in cells:
                        total += coef * vec[base + lr * ncols + lc]
                    out[self.offs[i - 1] + lr][self.offs[j - 1] + lc] += total
        return out

    def equations(self, Hk: Matrix, rows: Tuple[int, int], cols: Tuple[int, int]) -> Matrix:
        """Raderna (Φ·Hk − Hk·Φ)[r, c] som linjära former i variablerna."""
        F = self.F
        out = []
        for r in range(*rows):
            hrow = [(k, v) for k, v in enumerate(Hk[r]) if not F.is_zero(v)]
            for c in range(*cols):
                eq = [F.zero] * self.nvars
                for k in range(len(Hk)):
                    h = Hk[k][c]
                    if F.is_zero(h):
                        continue
                    for v, a in self.phi(r, k):
                        eq[v] += a * h
                for k, h in hrow:
                    for v, a in self.phi(k, c):
                        eq[v] -= h * a
                out.append(eq)
        return out


def _system(frame: _Frame, Hk: Matrix, blocks: Sequence[Block], frontier: Optional[Block],
            h_base: Optional[Matrix] = None, h_parts: Sequence[Matrix] = ()) -> DefiningSystem:
    groups = [EquationGroup(label=lab, rows=rows, cols=cols, equations=frame.equations(Hk, rows, cols))
              for lab, rows, cols in blocks]
    front = None
    if frontier is not None:
        lab, rows, cols = frontier
        front = EquationGroup(label=lab, rows=rows, cols=cols, equations=frame.equations(Hk, rows, cols))
    return DefiningSystem(field=frame.F, variables=list(frame.labels), groups=groups, frontier=front,
                          h_base=h_base if h_base is not None else Hk, h_parts=list(h_parts), frame=frame)


def lead_blocks(prob: ProblemSpec, sizes: Sequence[int],
                before: Optional[Position] = None) -> List[Block]:
    """Blocken vid M₁-basernas ledande positioner, eventuellt bara de ≺ before."""
    o = offsets(sizes)
    out = []
    for A in prob.M1:
        if before is not None and position_key(A.lead) >= position_key(before):
            continue
        p, q = A.lead
        out.append((A.name, (o[p - 1], o[p]), (o[q - 1], o[q])))
    return out


def build_defining_system(prob: ProblemSpec, sizes: Sequence[int], Hk: Matrix,
                          frontier: Optional[Position] = None,
                          blocks: Optional[Sequence[Block]] = None) -> DefiningSystem:
    """
    Definierande system för K vid storleksvektorn sizes.

    Ekvationerna är posterna i Φ·H(k) − H(k)·Φ vid originalbasernas
    ledande positioner ≺ frontier; Φ = Σ Z_X ∗ E_X + Σ Z_j ∗ V_j.

    Args:
        prob: Originalproblemet (skalärt)
        sizes: Storleksvektorn
        Hk: H(k) vid sizes
        frontier: Frontens position i originalremsor, eller None för alla
        blocks: Färdiga block (etikett, radintervall, kolumnintervall) i
            stället för ledande positioner

    Returns:
        Systemet; frontgruppen sätts när frontier anges
    """
    frame = _Frame(prob, sizes)
    if blocks is None:
        blocks = lead_blocks(prob, sizes, frontier)
    front = None
    if frontier is not None:
        o = offsets(sizes)
        p, q = frontier
        front = (f"{p},{q}", (o[p - 1], o[p]), (o[q - 1], o[q]))
    return _system(frame, Hk, blocks, front)


def delta_is_zero(ds: DefiningSystem, pos: Optional[EquationGroup] = None) -> bool:
    """
    Sant om frontgruppens ekvationer ligger i radrummet av de tidigare.

    Raises:
        MixedGroup: Om gruppen är delvis beroende
    """
    F = ds.field
    group = pos if pos is not None else ds.frontier
    if group is None:
        raise ValueError("Systemet saknar front")
    n = len(ds.variables)
    prior = ds.prior()
    base = rank(F, prior, n) if prior else 0
    total = rank(F, prior + group.equations, n) if prior or group.equations else 0
    inc = total - base
    if inc == 0:
        return True
    if inc == len(group.equations):
        return False
    raise MixedGroup(f"Gruppen {group.label}: {inc} av {len(group.equations)} ekvationer är oberoende")


def deformed_system(ds: DefiningSystem, r: int) -> DeformedSystem:
    """
    Delar systemet vid pivoten r: H₁ = H(k) plus de r första tillskotten, H₂ resten.

    Ekvationerna är linjära i H, så first + second ger ds.
    """
    F = ds.field
    frame = ds.frame
    N = len(ds.h_base)
    H1 = [list(row) for row in ds.h_base]
    H2 = zeros(F, N, N)
    for k, part in enumerate(ds.h_parts):
        target = H1 if k < r else H2
        for i in range(N):
            for j in range(N):
                target[i][j] += part[i][j]
    blocks = [(g.label, g.rows, g.cols) for g in ds.groups]
    front = (ds.frontier.label, ds.frontier.rows, ds.frontier.cols) if ds.frontier else None
    return DeformedSystem(first=_system(frame, H1, blocks, front), second=_system(frame, H2, blocks, front))


# ---------------------------------------------------------------------------
# Kanonisk form
# ---------------------------------------------------------------------------

class _Piece(BaseModel):
    id: int
    size: int
    cls: int


class _CanonicalRun:
    """Tillståndet under en körning av den kanoniska reduktionen."""

    def __init__(self, prob: ProblemSpec, P: Representation,
                 observer: Optional[Callable[[Dict[str, Any]], None]] = None):
        if any(c.parametric for c in prob.classes):
            raise IllegalStep("Kanonisk form kräver triviala klasser")
        self.prob = prob
        self.F = prob.field
        self.sizes = list(P.sizes)
        self.observer = observer
        self.P = assemble(P, prob)
        self.H0 = assemble_h(prob, self.sizes)
        self.frame = _Frame(prob, self.sizes)
        self.offs = offsets(self.sizes)
        self.steps: List[ReductionStep] = []
        self.links = 0
        self._ids = 0
        self._cls = 0
        self.processed: Set[Tuple[int, int, int]] = set()
        self.pieces: Dict[int, List[_Piece]] = {}
        self.deleted = []
        for idx in range(len(prob.classes)):
            m = prob.algebra.class_size(self.sizes, idx)
            if m == 0:
                self.deleted.append(idx)
                self.pieces[idx] = []
            else:
                self.pieces[idx] = [self._piece(m, self._new_class())]

    def _piece(self, size: int, cls: int) -> _Piece:
        self._ids += 1
        return _Piece(id=self._ids, size=size, cls=cls)

    def _new_class(self) -> int:
        self._cls += 1
        return self._cls

    # -- layout ------------------------------------------------------------

    def strips(self) -> List[Tuple[int, _Piece, int]]:
        """(originalremsa, bit, startrad) i förfinad ordning."""
        out = []
        for s in range(1, self.prob.t + 1):
            start = self.offs[s - 1]
            for piece in self.pieces[self.prob.algebra.class_of(s)]:
                out.append((s, piece, start))
                start += piece.size
        return out

    def refined_sizes(self) -> List[int]:
        return [piece.size for _, piece, _ in self.strips()]

    def _where(self) -> Dict[Tuple[int, int], Tuple[int, int]]:
        """(remsa, bit-id) -> (förfinat index, startrad)."""
        return {(s, piece.id): (n, start) for n, (s, piece, start) in enumerate(self.strips())}

    def _block(self, where, l: int, a: int, b: int) -> Block:
        A = self.prob.M1[l]
        p, q = A.lead
        pa = next(pc for pc in self.pieces[A.src] if pc.id == a)
        pb = next(pc for pc in self.pieces[A.tgt] if pc.id == b)
        r0, c0 = where[(p, a)][1], where[(q, b)][1]
        return (self._arrow_name(l, a, b), (r0, r0 + pa.size), (c0, c0 + pb.size))

    def _arrow_name(self, l: int, a: int, b: int) -> str:
        A = self.prob.M1[l]
        ps, pt = self.pieces[A.src], self.pieces[A.tgt]
        if len(ps) == len(pt) == 1:
            return A.name
        ia = next(k for k, pc in enumerate(ps) if pc.id == a)
        ib = next(k for k, pc in enumerate(pt) if pc.id == b)
        return f"{A.name}_{ia + 1}{ib + 1}"

    def _key(self, where, l: int, a: int, b: int) -> Tuple[int, int]:
        p, q = self.prob.M1[l].lead
        return (-where[(p, a)][0], where[(q, b)][0])

    def frontier(self, where) -> Optional[Tuple[int, int, int]]:
        best = None
        for l, A in enumerate(self.prob.M1):
            for pa in self.pieces[A.src]:
                for pb in self.pieces[A.tgt]:
                    if (l, pa.id, pb.id) in self.processed:
                        continue
                    key = self._key(where, l, pa.id, pb.id)
                    if best is None or key < best[0]:
                        best = (key, (l, pa.id, pb.id))
        return best[1] if best else None

    # -- matriser ----------------------------------------------------------

    def _sub(self, M: Matrix, block: Block) -> Matrix:
        _, (r0, r1), (c0, c1) = block
        return [row[c0:c1] for row in M[r0:r1]]

    def _contribution(self, where, l: int, a: int, b: int) -> Matrix:
        """(P − H(k)) vid blocket, placerat vid alla poster i A_l."""
        F = self.F
        A = self.prob.M1[l]
        block = self._block(where, l, a, b)
        C = [[pv - hv for pv, hv in zip(pr, hr)]
             for pr, hr in zip(self._sub(self.P, block), self._sub(self.H0, block))]
        N = len(self.P)
        out = zeros(F, N, N)
        for (i, j), u in A.scalar_entries(F).items():
            r0, c0 = where[(i, a)][1], where[(j, b)][1]
            for di, row in enumerate(C):
                for dj, v in enumerate(row):
                    out[r0 + di][c0 + dj] += u * v
        return out

    def hk_parts(self, where) -> Tuple[List[Tuple[int, int, int]], List[Matrix]]:
        order = sorted(self.processed, key=lambda t: self._key(where, *t))
        return order, [self._contribution(where, *t) for t in order]

    def hk(self, parts: Sequence[Matrix]) -> Matrix:
        H = [list(row) for row in self.H0]
        for part in parts:
            for i, row in enumerate(part):
                for j, v in enumerate(row):
                    H[i][j] += v
        return H

    def _class_transform(self, fmaps: Dict[int, Tuple[Matrix, Matrix]]) -> Tuple[Matrix, Matrix]:
        """Blockdiagonala f och f⁻¹ med f_Z på alla bitar i klassen Z."""
        F = self.F
        N = len(self.P)
        f, finv = identity(F, N), identity(F, N)
        for _, piece, start in self.strips():
            if piece.cls not in fmaps:
                continue
            fz, fzinv = fmaps[piece.cls]
            for i in range(piece.size):
                for j in range(piece.size):
                    f[start + i][start + j] = fz[i][j]
                    finv[start + i][start + j] = fzinv[i][j]
        return f, finv

    def _conjugate(self, f: Matrix, finv: Matrix) -> Matrix:
        F = self.F
        return mat_mul(F, mat_mul(F, finv, self.P), f)

    def _split(self, cls: int, parts: Sequence[Tuple[int, int]]) -> Dict[int, List[int]]:
        """Delar alla bitar i klassen cls; parts är (storlek, ny klass). Returnerar gammalt id -> nya id."""
        mapping: Dict[int, List[int]] = {}
        for idx, plist in self.pieces.items():
            out = []
            for piece in plist:
                if piece.cls != cls:
                    out.append(piece)
                    continue
                new = [self._piece(size, c) for size, c in parts if size > 0]
                mapping[piece.id] = [p.id for p in new]
                out.extend(new)
            self.pieces[idx] = out
        processed = set()
        for l, a, b in self.processed:
            for na in mapping.get(a, [a]):
                for nb in mapping.get(b, [b]):
                    processed.add((l, na, nb))
        self.processed = processed
        return mapping

    # -- steg --------------------------------------------------------------

    def run(self) -> Tuple[CanonicalForm, ReductionTrace]:
        F = self.F
        if self.deleted:
            self.steps.append(ReductionStep(kind="deletion", classes=list(self.deleted),
                                            sizes_before=list(self.sizes),
                                            sizes_after=self.refined_sizes()))
        while True:
            where = self._where()
            front = self.frontier(where)
            if front is None:
                break
            order, parts = self.hk_parts(where)
            Hk = self.hk(parts)
            fblock = self._block(where, *front)
            ds = _system(self.frame, Hk, [self._block(where, *t) for t in order], fblock,
                         h_base=self.H0, h_parts=parts)
            if self.observer is not None:
                self.observer({"step": len(self.steps), "frontier": fblock, "arrow": front,
                               "sizes": self.refined_sizes(), "Hk": Hk, "P": self.P, "system": ds})
            before = self.refined_sizes()
            if not delta_is_zero(ds):
                step = self._regularize(ds, Hk, front, fblock, order, where)
            else:
                l, a, b = front
                A = self.prob.M1[l]
                ca = next(p.cls for p in self.pieces[A.src] if p.id == a)
                cb = next(p.cls for p in self.pieces[A.tgt] if p.id == b)
                M = [[pv - hv for pv, hv in zip(pr, hr)]
                     for pr, hr in zip(self._sub(self.P, fblock), self._sub(Hk, fblock))]
                if ca == cb:
                    step = self._loop(M, ca, front, fblock, order, where)
                else:
                    step = self._edge(M, ca, cb, front, fblock, order, where)
            self.steps.append(step.model_copy(update={"sizes_before": before,
                                                      "sizes_after": self.refined_sizes()}))
        if not self._all_processed_match():
            raise IllegalStep("Slutmatrisen skiljer sig från H(k) för det minimala problemet")
        dim = sum(self.prob.algebra.class_size(self.sizes, idx) for idx in range(len(self.prob.classes)))
        cf = CanonicalForm(matrix=self.P, sizes=self.refined_sizes(), links=self.links, dim=dim,
                           deleted=list(self.deleted))
        _logger.info("Kanonisk form: %d steg, dim %d, %d länkar", len(self.steps), dim, self.links)
        return cf, ReductionTrace(steps=list(self.steps))

    def _all_processed_match(self) -> bool:
        _, parts = self.hk_parts(self._where())
        return mat_equal(self.hk(parts), self.P)

    def _check_preserved(self, newP: Matrix, order, where, fblock: Block, target: Matrix) -> None:
        for t in order:
            block = self._block(where, *t)
            if not mat_equal(self._sub(newP, block), self._sub(self.P, block)):
                raise IllegalStep(f"Transformationen ändrade det redan reducerade blocket {block[0]}")
        if not mat_equal(self._sub(newP, fblock), target):
            raise IllegalStep(f"Blocket {fblock[0]} fick inte sin normalform")

    def _regularize(self, ds: DefiningSystem, Hk: Matrix, front, fblock: Block, order, where) -> ReductionStep:
        """Löser L(N) = (P − Hk) vid fronten över radikalen och sätter f = I + N."""
        F = self.F
        frame = self.frame
        n = frame.nvars
        selectors = []
        for idx, plist in self.pieces.items():
            m = self.prob.algebra.class_size(self.sizes, idx)
            base = frame.class_base[idx]
            lo = 0
            for piece in plist:
                for r in range(lo, lo + piece.size):
                    for c in range(lo, lo + piece.size):
                        row = [F.zero] * n
                        row[base + r * m + c] = F.one
                        selectors.append(row)
                lo += piece.size
        radical = nullspace(F, ds.prior() + selectors, n)
        eqs = ds.frontier.equations
        A = [[sum((e[v] * vec[v] for v in range(n)), F.zero) for vec in radical] for e in eqs]
        target = [pv - hv for pr, hr in zip(self._sub(self.P, fblock), self._sub(Hk, fblock))
                  for pv, hv in zip(pr, hr)]
        coeffs = solve(F, A, target, len(radical)) if radical else None
        if coeffs is None:
            raise IllegalStep(f"Blocket {fblock[0]} kan inte nollställas")
        vec = [sum((c * r[v] for c, r in zip(coeffs, radical)), F.zero) for v in range(n)]
        N = frame.dense(vec)
        f = [[(F.one if i == j else F.zero) + N[i][j] for j in range(len(N))] for i in range(len(N))]
        finv = mat_inv(F, f)
        newP = self._conjugate(f, finv)
        self._check_preserved(newP, order, where, fblock, self._sub(Hk, fblock))
        self.P = newP
        self.processed.add(tuple(front))
        return ReductionStep(kind="regularization", arrow=fblock[0], rows=fblock[1], cols=fblock[2],
                             transforms={"N": N})

    def _edge(self, M: Matrix, ca: int, cb: int, front, fblock: Block, order, where) -> ReductionStep:
        F = self.F
        m, n = len(M), len(M[0])
        aug = [list(M[i]) + [F.one if k == i else F.zero for k in range(m)] for i in range(m)]
        R, piv = rref(F, aug, n + m)
        pivots = [c for c in piv if c < n]
        r = len(pivots)
        U = [row[n:] for row in R]
        cols = []
        for j in range(n):
            if j in pivots:
                continue
            v = [F.zero] * n
            v[j] = F.one
            for i, pc in enumerate(pivots):
                v[pc] -= R[i][j]
            cols.append(v)
        for pc in pivots:
            v = [F.zero] * n
            v[pc] = F.one
            cols.append(v)
        fy = [[cols[k][i] for k in range(n)] for i in range(n)]
        fx, fxinv = mat_inv(F, U), U
        fyinv = mat_inv(F, fy)
        G = zeros(F, m, n)
        for k in range(r):
            G[k][n - r + k] = F.one
        f, finv = self._class_transform({ca: (fx, fxinv), cb: (fy, fyinv)})
        newP = self._conjugate(f, finv)
        H_F = self._sub(self.H0, fblock)
        target = [[g + h for g, h in zip(gr, hr)] for gr, hr in zip(G, H_F)]
        self._check_preserved(newP, order, where, fblock, target)
        self.P = newP
        l, a, b = front
        z2, z1, z3 = self._new_class(), self._new_class(), self._new_class()
        rows_map = self._split(ca, [(r, z2), (m - r, z1)])
        cols_map = self._split(cb, [(n - r, z3), (r, z2)])
        for na in rows_map.get(a, [a]):
            for nb in cols_map.get(b, [b]):
                self.processed.add((l, na, nb))
        self.links += r
        _logger.debug("Kant %s: rang %d", fblock[0], r)
        return ReductionStep(kind="edge", arrow=fblock[0], G=G, rows=fblock[1], cols=fblock[2],
                             links=r, transforms={"row": fx, "col": fy})

    def _loop(self, M: Matrix, cls: int, front, fblock: Block, order, where) -> ReductionStep:
        F = self.F
        W, fz = weyr_of(F, M)
        G = W.matrix(F)
        f, finv = self._class_transform({cls: (fz, mat_inv(F, fz))})
        newP = self._conjugate(f, finv)
        H_F = self._sub(self.H0, fblock)
        target = [[g + h for g, h in zip(gr, hr)] for gr, hr in zip(G, H_F)]
        self._check_preserved(newP, order, where, fblock, target)
        self.P = newP
        l, a, b = front
        classes: Dict[Tuple[Any, int], int] = {}
        parts = []
        for lam, lvl, j, e in W.pieces():
            if e == 0:
                continue
            key = (F.key(lam), j)
            if key not in classes:
                classes[key] = self._new_class()
            parts.append((e, classes[key]))
        mapping = self._split(cls, parts)
        for na in mapping.get(a, [a]):
            for nb in mapping.get(b, [b]):
                self.processed.add((l, na, nb))
        links = sum(sum(block.m[1:]) for block in W.blocks)
        self.links += links
        _logger.debug("Ögla %s: Weyr-karakteristik %s", fblock[0], [b.m for b in W.blocks])
        return ReductionStep(kind="unraveling_loop", arrow=fblock[0], G=G, rows=fblock[1],
                             cols=fblock[2], links=links, transforms={"f": fz})


def canonical_form(prob: ProblemSpec, P: Representation,
                   observer: Optional[Callable[[Dict[str, Any]], None]] = None
                   ) -> Tuple[CanonicalForm, ReductionTrace]:
    """
    Kör den unika reduktionsföljden för P.

    Args:
        prob: Ett skalärt problem med triviala klasser
        P: Representationen
        observer: Anropas vid varje front med körningens tillstånd
            (step, frontier, arrow, sizes, Hk, P, system)

    Returns:
        (P∞, spåret)

    Raises:
        NonSplitSpectrum: Om ett öglebloks spektrum inte ligger i kroppen
        IllegalStep: Om en kontroll efter ett steg misslyckas
    """
    return _CanonicalRun(prob, P, observer).run()


def iso(prob: ProblemSpec, P: Representation, Q: Representation) -> bool:
    """Sant omm P och Q har samma kanoniska form."""
    cp, _ = canonical_form(prob, P)
    cq, _ = canonical_form(prob, Q)
    return cp.sizes == cq.sizes and mat_equal(cp.matrix, cq.matrix)


def indecomposable(prob: ProblemSpec, P: Representation) -> bool:
    """Sant omm antalet länkar är dim(P) − 1."""
    cf, _ = canonical_form(prob, P)
    return cf.dim > 0 and cf.links == cf.dim - 1


def reduction_blocks(trace: ReductionTrace) -> List[Tuple[str, Matrix]]:
    """(pil, G) för varje kant- och öglesteg i spåret."""
    return [(s.arrow, s.G) for s in trace.steps if s.G is not None]


def reduction_block_diagonal(F: Field, trace: ReductionTrace) -> Matrix:
    """G¹ ⊕ … ⊕ Gˢ som en blockdiagonal matris."""
    blocks = [G for _, G in reduction_blocks(trace)]
    m = sum(len(G) for G in blocks)
    n = sum(len(G[0]) if G else 0 for G in blocks)
    out = zeros(F, m, n)
    r0 = c0 = 0
    for G in blocks:
        for i, row in enumerate(G):
            for j, v in enumerate(row):
                out[r0 + i][c0 + j] = v
        r0 += len(G)
        c0 += len(G[0]) if G else 0
    return out


def trace_to_json(trace: ReductionTrace, F: Field) -> Dict[str, Any]:
    return {"steps": [{
        "kind": s.kind,
        "arrow": s.arrow,
        "G": matrix_to_json(F, s.G) if s.G is not None else None,
        "sizes_before": list(s.sizes_before),
        "sizes_after": list(s.sizes_after),
        "rows": list(s.rows) if s.rows else None,
        "cols": list(s.cols) if s.cols else None,
        "links": s.links,
        **({"case": s.case} if s.case else {}),
    } for s in trace.steps]}


def canonical_to_json(cf: CanonicalForm, F: Field) -> Dict[str, Any]:
    return {
        "matrix": matrix_to_json(F, cf.matrix),
        "sizes": list(cf.sizes),
        "links": cf.links,
        "dim": cf.dim,
        "indecomposable": cf.dim > 0 and cf.links == cf.dim - 1,
        "deleted": list(cf.deleted),
    }
