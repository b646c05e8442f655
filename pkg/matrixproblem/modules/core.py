"""
Datamodell för matrisbimodulproblem.

Modulen innehåller de matematiska objekten: minimala algebror (klasser av
remsor, triviala eller parametriska), normaliserade basmatriser för K₁ och
M₁, matrisen H, representationer och morfismer. Här finns också
stjärnprodukten, sammansättning av täta blockmatriser, morfismkontrollen och
valideringen av problemets invarianter.

Remsor är 1-baserade och globala. Positionsordningen är
(i, j) ≼ (i', j') omm i > i' eller (i = i' och j ≤ j'); en basmatris ledande
position är dess minsta nollskilda position i denna ordning.

Exempel på problem.json:
    {
      "t": 2,
      "classes": [[1], [2]],
      "M1": [{"name": "a", "entries": {"1,2": "1"}}],
      "K1": [],
      "H": {}
    }
"""

import logging
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, field_validator, model_validator
from sympy import Poly

from .exactalg import (
    Field, Matrix, InvalidProblem, IrregularWeyr, ShapeMismatch, NotOneSidedRow,
    UnsupportedCoefficient, bi, bi_const, degrees_xy, identity, is_scalar,
    mat_add, mat_equal, mat_mul, mat_pow, mat_scale, matrix_to_json, poly_eval,
    poly_from_json, poly_to_json, product, scalar_of, to_bi, to_bi_dict, uni,
    x, zeros,
)
from .models import BaseJSON, MorphismJSON, ProblemJSON, RepresentationJSON, parse_position
from .weyr import WeyrForm, is_regular

_logger = logging.getLogger(__name__)

Position = Tuple[int, int]


def position_key(pos: Position) -> Tuple[int, int]:
    """Sorteringsnyckel för ≼: större rad först, sedan mindre kolumn."""
    return (-pos[0], pos[1])


class VertexClass(BaseModel):
    """
    En ekvivalensklass av remsor.

    Attributes:
        indices: Remsorna i klassen (1-baserade, stigande)
        kind: "trivial" eller "parametric"
        phi: Faktorer i det förbjudna polynomet (polynom i x)
        label: Visningsnamn
        side: "row", "col" eller None (bipartit sidoindelning)
    """
    indices: List[int]
    kind: Literal["trivial", "parametric"] = "trivial"
    phi: List[Any] = []
    label: Optional[str] = None
    side: Optional[Literal["row", "col"]] = None

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator('indices')
    @classmethod
    def indices_must_be_sorted(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError('En klass kan inte vara tom')
        return sorted(v)

    @property
    def parametric(self) -> bool:
        return self.kind == "parametric"

    def forbidden(self, F: Field) -> Poly:
        """Produkten av faktorerna i phi (1 om listan är tom)."""
        return product(F, self.phi, x)

    @property
    def main(self) -> int:
        """Huvudremsan max{j ∈ X}."""
        return self.indices[-1]


class MinimalAlgebraSpec(BaseModel):
    """
    Minimal algebra: t remsor uppdelade i klasser.

    Attributes:
        t: Antal remsor
        classes: Klasserna; de partitionerar {1..t}
    """
    t: int
    classes: List[VertexClass]

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @model_validator(mode='after')
    def classes_must_partition(self) -> 'MinimalAlgebraSpec':
        seen = sorted(i for c in self.classes for i in c.indices)
        if seen != list(range(1, self.t + 1)):
            raise ValueError(f'Klasserna partitionerar inte {{1..{self.t}}}')
        return self

    def class_of(self, strip: int) -> int:
        """Klassindex för en remsa."""
        for idx, c in enumerate(self.classes):
            if strip in c.indices:
                return idx
        raise InvalidProblem(f"Remsan {strip} finns inte (t = {self.t})")

    def class_size(self, sizes: Sequence[int], cls_idx: int) -> int:
        return sizes[self.classes[cls_idx].indices[0] - 1]


class BaseMatrix(BaseModel):
    """
    En basmatris i K₁ eller M₁.

    Attributes:
        name: Namnet (samma som den duala pilen)
        entries: Glesa poster (i, j) -> tvåvariabelpolynom
        src: Klassindex för raderna
        tgt: Klassindex för kolumnerna
        lead: Ledande position (p, q)
    """
    name: str
    entries: Dict[Tuple[int, int], Any]
    src: int
    tgt: int
    lead: Tuple[int, int]

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    def entry(self, F: Field, i: int, j: int) -> Poly:
        p = self.entries.get((i, j))
        return p if p is not None else bi(F, {})

    def is_scalar(self) -> bool:
        return all(is_scalar(p) for p in self.entries.values())

    def scalar_entries(self, F: Field) -> Dict[Position, Any]:
        """Posterna som skalärer; kastar om någon post innehåller x eller y."""
        out = {}
        for pos, p in self.entries.items():
            if not is_scalar(p):
                raise UnsupportedCoefficient(
                    f"Basen {self.name} har en icke-skalär post vid {pos}: {p.as_expr()}")
            out[pos] = scalar_of(F, p)
        return out


class ProblemSpec(BaseModel):
    """
    Ett matrisbimodulproblem (R, K, M, H).

    Attributes:
        field: Arbetskroppen
        algebra: Den minimala algebran R
        K1: Normaliserad kvasibas för K₁ i ≼-ordning
        M1: Normaliserad kvasibas för M₁ i ≼-ordning
        H: Glesa poster (i, j) -> a + b·x inom en klass
    """
    field: Any
    algebra: MinimalAlgebraSpec
    K1: List[BaseMatrix] = []
    M1: List[BaseMatrix] = []
    H: Dict[Tuple[int, int], Any] = {}

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @property
    def t(self) -> int:
        return self.algebra.t

    @property
    def classes(self) -> List[VertexClass]:
        return self.algebra.classes

    def solid(self, name: str) -> BaseMatrix:
        for b in self.M1:
            if b.name == name:
                return b
        raise KeyError(f"Okänd M₁-bas: {name}")

    def dotted(self, name: str) -> BaseMatrix:
        for b in self.K1:
            if b.name == name:
                return b
        raise KeyError(f"Okänd K₁-bas: {name}")

    def solid_index(self, name: str) -> int:
        return [b.name for b in self.M1].index(name)

    def h(self, i: int, j: int) -> Poly:
        p = self.H.get((i, j))
        return p if p is not None else uni(self.field, {}, x)

    def is_scalar(self) -> bool:
        """Sant om alla klasser är triviala och alla poster skalärer."""
        return (all(not c.parametric for c in self.classes)
                and all(b.is_scalar() for b in self.K1 + self.M1)
                and all(p.degree() <= 0 for p in self.H.values()))


class Representation(BaseModel):
    """
    En representation P av ett problem.

    Attributes:
        sizes: Storleksvektor, konstant på klasser
        arrows: En skalär matris M(a_i) per M₁-bas
        weyr: Weyr-form per parametrisk klass (klassindex -> WeyrForm)
    """
    sizes: List[int]
    arrows: Dict[str, Any] = {}
    weyr: Dict[int, WeyrForm] = {}

    class Config:
        arbitrary_types_allowed = True
        frozen = True


class Morphism(BaseModel):
    """
    En morfism f: P -> Q.

    Attributes:
        classes: f_X per klassindex (storlek m_X × n_X)
        dotted: f(v_j) per K₁-bas
    """
    classes: Dict[int, Any]
    dotted: Dict[str, Any] = {}

    class Config:
        arbitrary_types_allowed = True
        frozen = True


# ---------------------------------------------------------------------------
# Basmatriser
# ---------------------------------------------------------------------------

def lead_of(F: Field, entries: Dict[Position, Any]) -> Position:
    """Minsta nollskilda position i ≼-ordningen."""
    nonzero = [pos for pos, v in entries.items()
               if not (v.is_zero if isinstance(v, Poly) else F.is_zero(v))]
    if not nonzero:
        raise InvalidProblem("En basmatris kan inte vara noll")
    return min(nonzero, key=position_key)


def make_base(F: Field, algebra: MinimalAlgebraSpec, name: str,
              entries: Dict[Position, Any]) -> BaseMatrix:
    """
    Bygger en BaseMatrix och härleder klasspar och ledande position.

    Args:
        F: Arbetskroppen
        algebra: Den minimala algebran
        name: Basens namn
        entries: Poster som skalärer eller polynom

    Raises:
        InvalidProblem: Om posterna spänner över flera klasspar
    """
    polys = {}
    for pos, v in entries.items():
        p = to_bi(F, v) if isinstance(v, Poly) else bi_const(F, v)
        if not p.is_zero:
            polys[pos] = p
    lead = lead_of(F, polys)
    src = algebra.class_of(lead[0])
    tgt = algebra.class_of(lead[1])
    for (i, j) in polys:
        if algebra.class_of(i) != src or algebra.class_of(j) != tgt:
            raise InvalidProblem(f"Basen {name} ligger inte i ett enda klasspar")
    return BaseMatrix(name=name, entries=polys, src=src, tgt=tgt, lead=lead)


def _split_by_class_pair(algebra: MinimalAlgebraSpec,
                         mat: Dict[Position, Any]) -> List[Dict[Position, Any]]:
    parts: Dict[Tuple[int, int], Dict[Position, Any]] = {}
    for (i, j), v in mat.items():
        key = (algebra.class_of(i), algebra.class_of(j))
        parts.setdefault(key, {})[(i, j)] = v
    return [parts[k] for k in sorted(parts)]


def normalize_basis(F: Field, algebra: MinimalAlgebraSpec,
                    spanning: Sequence[Dict[Position, Any]],
                    names: Optional[Sequence[str]] = None,
                    prefix: str = "b") -> List[BaseMatrix]:
    """
    Normaliserad bas för spannet av skalära glesa matriser.

    Matriserna delas först per klasspar. Eliminationen sker i indataordning
    så att en bas får namnet från den indatamatris som gav upphov till den.

    Args:
        F: Arbetskroppen
        algebra: Den minimala algebran
        spanning: Glesa matriser {(i, j): skalär}
        names: Namn per indatamatris (standard prefix + löpnummer)
        prefix: Namnprefix när names saknas

    Returns:
        Baser med ledande post 1 och nollor vid övriga basers ledande
        positioner, sorterade efter ledande position
    """
    reduced: List[Tuple[str, Dict[Position, Any]]] = []
    for idx, mat in enumerate(spanning):
        base_name = names[idx] if names is not None else f"{prefix}{idx + 1}"
        parts = _split_by_class_pair(algebra, {p: F(v) for p, v in mat.items() if not F.is_zero(F(v))})
        for k, part in enumerate(parts):
            v = dict(part)
            for _, b in reduced:
                lead = min(b, key=position_key)
                c = v.get(lead)
                if c is not None and not F.is_zero(c):
                    for pos, val in b.items():
                        v[pos] = v.get(pos, F.zero) - c * val
            v = {p: c for p, c in v.items() if not F.is_zero(c)}
            if not v:
                continue
            lead = min(v, key=position_key)
            inv = F.one / v[lead]
            v = {p: c * inv for p, c in v.items()}
            for n, (other_name, b) in enumerate(reduced):
                c = b.get(lead)
                if c is not None and not F.is_zero(c):
                    nb = dict(b)
                    for pos, val in v.items():
                        nb[pos] = nb.get(pos, F.zero) - c * val
                    reduced[n] = (other_name, {p: q for p, q in nb.items() if not F.is_zero(q)})
            name = base_name if len(parts) == 1 else f"{base_name}.{k + 1}"
            reduced.append((name, v))
    bases = [make_base(F, algebra, name, v) for name, v in reduced]
    bases.sort(key=lambda b: position_key(b.lead))
    return bases


# ---------------------------------------------------------------------------
# Stjärnprodukt och sammansättning
# ---------------------------------------------------------------------------

def offsets(sizes: Sequence[int]) -> List[int]:
    out = [0]
    for s in sizes:
        out.append(out[-1] + s)
    return out


def eval_coef(F: Field, coef: Poly, C: Matrix, left: Optional[Matrix],
              right: Optional[Matrix], shape: Tuple[int, int]) -> Matrix:
    """
    Σ c_ab · left^a · C · right^b för en koefficient c(x, y).

    Raises:
        UnsupportedCoefficient: Om x (y) förekommer utan Weyr-matris till vänster (höger)
    """
    m, n = shape
    out = zeros(F, m, n)
    for (a, b), c in to_bi_dict(coef).items():
        term = C
        if a:
            if left is None:
                raise UnsupportedCoefficient(f"x förekommer över en trivial klass: {coef.as_expr()}")
            term = mat_mul(F, mat_pow(F, left, a), term, n_inner=m, n_cols=n)
        if b:
            if right is None:
                raise UnsupportedCoefficient(f"y förekommer över en trivial klass: {coef.as_expr()}")
            term = mat_mul(F, term, mat_pow(F, right, b), n_inner=n, n_cols=n)
        out = mat_add(out, mat_scale(c, term)) if m and n else out
    return out


def _place(dense: Matrix, block: Matrix, r0: int, c0: int) -> None:
    for i, row in enumerate(block):
        for j, v in enumerate(row):
            dense[r0 + i][c0 + j] += v


def star(F: Field, C: Matrix, U: BaseMatrix, row_sizes: Sequence[int],
         col_sizes: Sequence[int], weyr_left: Optional[Matrix] = None,
         weyr_right: Optional[Matrix] = None) -> Matrix:
    """
    Stjärnprodukten C ∗ U som tät blockmatris.

    Block (i, j) blir u_ij · C; för polynomposter u_ij(x, y) verkar x som
    vänsterklassens Weyr-matris och y som högerklassens.

    Args:
        F: Arbetskroppen
        C: Blockmatris av storlek m_X × n_Y
        U: Basmatris med klasspar (X, Y)
        row_sizes: Storleksvektor för raderna
        col_sizes: Storleksvektor för kolumnerna
        weyr_left: Weyr-matris för X (parametriska klasser)
        weyr_right: Weyr-matris för Y

    Raises:
        ShapeMismatch: Om C inte passar storlekarna
    """
    ro, co = offsets(row_sizes), offsets(col_sizes)
    dense = zeros(F, ro[-1], co[-1])
    for (i, j), coef in U.entries.items():
        shape = (row_sizes[i - 1], col_sizes[j - 1])
        if len(C) != shape[0] or (C and len(C[0]) != shape[1]):
            raise ShapeMismatch(
                f"Blocket för {U.name} har fel form: förväntat {shape}, fick {len(C)}x{len(C[0]) if C else 0}")
        _place(dense, eval_coef(F, coef, C, weyr_left, weyr_right, shape), ro[i - 1], co[j - 1])
    return dense


def star_class(F: Field, C: Matrix, cls: VertexClass, row_sizes: Sequence[int],
               col_sizes: Sequence[int]) -> Matrix:
    """C ∗ E_X: C på alla diagonalblock i klassen X."""
    ro, co = offsets(row_sizes), offsets(col_sizes)
    dense = zeros(F, ro[-1], co[-1])
    for i in cls.indices:
        shape = (row_sizes[i - 1], col_sizes[i - 1])
        if len(C) != shape[0] or (C and len(C[0]) != shape[1]):
            raise ShapeMismatch(f"Klassblocket har fel form: förväntat {shape}")
        _place(dense, C, ro[i - 1], co[i - 1])
    return dense


def weyr_matrices(prob: ProblemSpec, P: Representation) -> Dict[int, Matrix]:
    """Täta Weyr-matriser per parametrisk klass."""
    return {c: W.matrix(prob.field) for c, W in P.weyr.items()}


def h_block(F: Field, h: Poly, n: int, W: Optional[Matrix]) -> Matrix:
    """h(W) = a·I + b·W för h = a + b·x."""
    coeffs = h.as_dict(native=True)
    out = mat_scale(coeffs.get((0,), F.zero), identity(F, n))
    for (k,), c in coeffs.items():
        if k == 0:
            continue
        if W is None:
            raise UnsupportedCoefficient(f"H-posten {h.as_expr()} kräver en parametrisk klass")
        out = mat_add(out, mat_scale(c, mat_pow(F, W, k)))
    return out


def assemble_h(prob: ProblemSpec, sizes: Sequence[int],
               weyr: Optional[Dict[int, Matrix]] = None) -> Matrix:
    """H_m(W): matrisen H vid storleksvektorn sizes."""
    F = prob.field
    weyr = weyr or {}
    o = offsets(sizes)
    dense = zeros(F, o[-1], o[-1])
    for (i, j), h in prob.H.items():
        cls_idx = prob.algebra.class_of(i)
        n = sizes[i - 1]
        _place(dense, h_block(F, h, n, weyr.get(cls_idx)), o[i - 1], o[j - 1])
    return dense


def assemble(P: Representation, prob: ProblemSpec) -> Matrix:
    """
    Den täta matrisen Σ_X H_X(W_X) + Σ_i M(a_i) ∗ A_i.

    Raises:
        IrregularWeyr: Om phi_X(λ) = 0 för något egenvärde i en Weyr-del
        ShapeMismatch: Om blockformer inte passar storleksvektorn
    """
    F = prob.field
    validate_representation(P, prob)
    weyr = weyr_matrices(prob, P)
    dense = assemble_h(prob, P.sizes, weyr)
    for A in prob.M1:
        C = P.arrows.get(A.name)
        if C is None:
            C = zeros(F, prob.algebra.class_size(P.sizes, A.src), prob.algebra.class_size(P.sizes, A.tgt))
        dense = mat_add(dense, star(F, C, A, P.sizes, P.sizes, weyr.get(A.src), weyr.get(A.tgt)))
    return dense


def assemble_morphism(f: Morphism, prob: ProblemSpec, P: Representation,
                      Q: Representation) -> Matrix:
    """f̄ = Σ f_X ∗ E_X + Σ f(v_j) ∗ V_j med raderna från P och kolumnerna från Q."""
    F = prob.field
    wp, wq = weyr_matrices(prob, P), weyr_matrices(prob, Q)
    N, M = sum(P.sizes), sum(Q.sizes)
    dense = zeros(F, N, M)
    for idx, cls in enumerate(prob.classes):
        fx = f.classes.get(idx)
        if fx is None:
            raise ShapeMismatch(f"Morfismen saknar f_X för klass {idx}")
        dense = mat_add(dense, star_class(F, fx, cls, P.sizes, Q.sizes))
    for V in prob.K1:
        C = f.dotted.get(V.name)
        if C is None:
            continue
        dense = mat_add(dense, star(F, C, V, P.sizes, Q.sizes, wp.get(V.src), wq.get(V.tgt)))
    return dense


def intertwines_weyr(f: Morphism, prob: ProblemSpec, P: Representation,
                     Q: Representation) -> bool:
    """Sant om W_P·f_X = f_X·W_Q för varje parametrisk klass X."""
    F = prob.field
    wp, wq = weyr_matrices(prob, P), weyr_matrices(prob, Q)
    for idx, cls in enumerate(prob.classes):
        if not cls.parametric or idx not in wp or idx not in wq:
            continue
        fx = f.classes[idx]
        left = mat_mul(F, wp[idx], fx, n_inner=len(fx), n_cols=len(wq[idx]))
        right = mat_mul(F, fx, wq[idx], n_inner=len(wq[idx]), n_cols=len(wq[idx]))
        if not mat_equal(left, right):
            return False
    return True


def is_morphism(P: Representation, Q: Representation, f: Morphism, prob: ProblemSpec) -> bool:
    """
    Sant omm P̄·f̄ = f̄·Q̄ exakt.

    För parametriska klasser krävs dessutom att f_X byter plats med
    Weyr-delarna.
    """
    F = prob.field
    if not intertwines_weyr(f, prob, P, Q):
        return False
    Pd, Qd = assemble(P, prob), assemble(Q, prob)
    fd = assemble_morphism(f, prob, P, Q)
    left = mat_mul(F, Pd, fd, n_inner=len(Pd), n_cols=len(Qd))
    right = mat_mul(F, fd, Qd, n_inner=len(Qd), n_cols=len(Qd))
    return mat_equal(left, right)


def _block(dense: Matrix, o_rows: List[int], o_cols: List[int], i: int, j: int) -> Matrix:
    return [row[o_cols[j - 1]:o_cols[j]] for row in dense[o_rows[i - 1]:o_rows[i]]]


def disassemble_morphism(dense: Matrix, prob: ProblemSpec, row_sizes: Sequence[int],
                         col_sizes: Sequence[int]) -> Morphism:
    """Läser f_X ur diagonalblocken och f(v_j) ur V_j:s ledande block."""
    ro, co = offsets(row_sizes), offsets(col_sizes)
    classes = {idx: _block(dense, ro, co, c.indices[0], c.indices[0])
               for idx, c in enumerate(prob.classes)}
    dotted = {V.name: _block(dense, ro, co, *V.lead) for V in prob.K1}
    return Morphism(classes=classes, dotted=dotted)


def compose_morphisms(f: Morphism, g: Morphism, prob: ProblemSpec, P: Representation,
                      Q: Representation, R: Representation) -> Morphism:
    """
    Sammansättningen f·g: P -> R som blockprodukt.

    Args:
        f: Morfism P -> Q
        g: Morfism Q -> R
    """
    F = prob.field
    fd = assemble_morphism(f, prob, P, Q)
    gd = assemble_morphism(g, prob, Q, R)
    dense = mat_mul(F, fd, gd, n_inner=sum(Q.sizes), n_cols=sum(R.sizes))
    return disassemble_morphism(dense, prob, P.sizes, R.sizes)


def disassemble(dense: Matrix, prob: ProblemSpec, sizes: Sequence[int],
                weyr: Optional[Dict[int, WeyrForm]] = None) -> Representation:
    """
    Läser en representation ur en tät matris.

    M(a_j) är blocket vid A_j:s ledande position minus H:s bidrag där.
    """
    F = prob.field
    weyr = weyr or {}
    wd = {c: W.matrix(F) for c, W in weyr.items()}
    o = offsets(sizes)
    arrows = {}
    for A in prob.M1:
        p, q = A.lead
        block = _block(dense, o, o, p, q)
        h = prob.H.get((p, q))
        if h is not None:
            hb = h_block(F, h, sizes[p - 1], wd.get(prob.algebra.class_of(p)))
            block = [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(block, hb)]
        arrows[A.name] = block
    return Representation(sizes=list(sizes), arrows=arrows, weyr=dict(weyr))


# ---------------------------------------------------------------------------
# Validering
# ---------------------------------------------------------------------------

def _coordinates(F: Field, mat: Dict[Position, Any],
                 bases: Sequence[BaseMatrix]) -> Optional[List[Any]]:
    """Koordinater i en normaliserad skalär bas, eller None om mat ligger utanför spannet."""
    coords = [mat.get(b.lead, F.zero) for b in bases]
    residual = dict(mat)
    for c, b in zip(coords, bases):
        if F.is_zero(c):
            continue
        for pos, v in b.scalar_entries(F).items():
            residual[pos] = residual.get(pos, F.zero) - c * v
    if any(not F.is_zero(v) for v in residual.values()):
        return None
    return coords


def _sparse_mul(F: Field, A: Dict[Position, Any], B: Dict[Position, Any]) -> Dict[Position, Any]:
    by_row: Dict[int, List[Tuple[int, Any]]] = {}
    for (k, j), v in B.items():
        by_row.setdefault(k, []).append((j, v))
    out: Dict[Position, Any] = {}
    for (i, k), a in A.items():
        for j, b in by_row.get(k, []):
            out[(i, j)] = out.get((i, j), F.zero) + a * b
    return {p: v for p, v in out.items() if not F.is_zero(v)}


def _sparse_sub(F: Field, A: Dict[Position, Any], B: Dict[Position, Any]) -> Dict[Position, Any]:
    out = dict(A)
    for p, v in B.items():
        out[p] = out.get(p, F.zero) - v
    return {p: v for p, v in out.items() if not F.is_zero(v)}


def _check_base_shape(F: Field, prob: ProblemSpec, b: BaseMatrix, upper: bool) -> None:
    alg = prob.algebra
    for (i, j) in b.entries:
        if not (1 <= i <= alg.t and 1 <= j <= alg.t):
            raise InvalidProblem(f"Basen {b.name} har en post utanför 1..{alg.t}: {(i, j)}")
        if alg.class_of(i) != b.src or alg.class_of(j) != b.tgt:
            raise InvalidProblem(f"Basen {b.name} lämnar klassparet vid {(i, j)}")
        if upper and i >= j:
            raise InvalidProblem(f"K₁-basen {b.name} är inte strikt övertriangulär vid {(i, j)}")
        for var, deg in zip(("x", "y"), degrees_xy(b.entries[(i, j)])):
            cls = alg.classes[b.src if var == "x" else b.tgt]
            if deg and not cls.parametric:
                raise InvalidProblem(f"Basen {b.name} har {var} över en trivial klass")
    # K₁-baser behåller sin ledande position efter regularisering även om en
    # mindre position blivit nollskild; M₁-baser styr fronten och måste leda där.
    if not upper and lead_of(F, b.entries) != b.lead:
        raise InvalidProblem(f"Basen {b.name} har fel ledande position {b.lead}")
    if b.lead not in b.entries:
        raise InvalidProblem(f"Basen {b.name} saknar post vid sin ledande position")
    lead_value = b.entries[b.lead]
    if not (is_scalar(lead_value) and scalar_of(F, lead_value) == F.one):
        raise InvalidProblem(f"Basen {b.name} har ledande post ≠ 1")


def validate_problem(prob: ProblemSpec) -> None:
    """
    Kontrollerar problemets invarianter.

    Strukturen kontrolleras alltid. För skalära problem kontrolleras också
    att K₁ är sluten under produkt, att d(V) = VH − HV ligger i M₁ och att
    produkterna V_i·A_j och A_i·V_j bara hamnar på senare M₁-baser.

    Raises:
        InvalidProblem: Vid första brutna invariant
    """
    F = prob.field
    alg = prob.algebra
    for b in prob.K1:
        _check_base_shape(F, prob, b, upper=True)
    for b in prob.M1:
        _check_base_shape(F, prob, b, upper=False)
    for group in (prob.K1, prob.M1):
        leads = [b.lead for b in group]
        if len(set(leads)) != len(leads):
            raise InvalidProblem("Två baser har samma ledande position")
        if leads != sorted(leads, key=position_key):
            raise InvalidProblem("Baserna är inte sorterade efter ledande position")
        for b in group:
            for other in group:
                if other is not b and other.lead in b.entries:
                    raise InvalidProblem(
                        f"Basen {b.name} är nollskild vid {other.name}s ledande position")
    for (i, j), h in prob.H.items():
        ci, cj = alg.class_of(i), alg.class_of(j)
        if ci != cj:
            raise InvalidProblem(f"H har en post utanför klasserna vid {(i, j)}")
        if h.degree() > 1:
            raise InvalidProblem(f"H-posten vid {(i, j)} är inte av formen a + b·x")
        if h.degree() == 1 and not alg.classes[ci].parametric:
            raise InvalidProblem(f"H-posten vid {(i, j)} innehåller x över en trivial klass")

    if not prob.is_scalar():
        return

    K = [b.scalar_entries(F) for b in prob.K1]
    M = [b.scalar_entries(F) for b in prob.M1]
    Hs = {pos: scalar_of(F, h) for pos, h in prob.H.items() if not h.is_zero}
    for a, Va in enumerate(K):
        for b, Vb in enumerate(K):
            prod = _sparse_mul(F, Va, Vb)
            if prod and _coordinates(F, prod, prob.K1) is None:
                raise InvalidProblem(
                    f"K₁ är inte sluten: {prob.K1[a].name}·{prob.K1[b].name} ligger utanför spannet")
        dV = _sparse_sub(F, _sparse_mul(F, Va, Hs), _sparse_mul(F, Hs, Va))
        if dV and _coordinates(F, dV, prob.M1) is None:
            raise InvalidProblem(f"d({prob.K1[a].name}) ligger inte i M₁")
        for j, A in enumerate(M):
            for prod, label in ((_sparse_mul(F, Va, A), "V·A"), (_sparse_mul(F, A, Va), "A·V")):
                if not prod:
                    continue
                coords = _coordinates(F, prod, prob.M1)
                if coords is None or any(not F.is_zero(c) for c in coords[:j + 1]):
                    raise InvalidProblem(
                        f"Triangulariteten bryts för {label} med {prob.K1[a].name} och {prob.M1[j].name}")


def validate_representation(P: Representation, prob: ProblemSpec) -> None:
    """
    Kontrollerar att en representation passar problemet.

    Raises:
        ShapeMismatch: Om storlekar eller blockformer inte passar
        IrregularWeyr: Om en Weyr-del inte är reguljär för sin klass
        InvalidProblem: Om okända pilar förekommer
    """
    F = prob.field
    alg = prob.algebra
    if len(P.sizes) != alg.t:
        raise ShapeMismatch(f"Storleksvektorn har {len(P.sizes)} poster, problemet {alg.t} remsor")
    for idx, cls in enumerate(alg.classes):
        values = {P.sizes[i - 1] for i in cls.indices}
        if len(values) != 1:
            raise ShapeMismatch(f"Storleksvektorn är inte konstant på klass {idx}: {cls.indices}")
        W = P.weyr.get(idx)
        if cls.parametric:
            if W is None:
                if values.pop() == 0:
                    continue
                raise ShapeMismatch(f"Den parametriska klassen {idx} saknar Weyr-form")
            if W.size != alg.class_size(P.sizes, idx):
                raise ShapeMismatch(f"Weyr-formen för klass {idx} har fel storlek")
            if not is_regular(F, W, cls.forbidden(F)):
                raise IrregularWeyr(f"Weyr-formen för klass {idx} har ett egenvärde där phi = 0")
        elif W is not None:
            raise ShapeMismatch(f"Den triviala klassen {idx} kan inte ha en Weyr-form")
    names = {A.name for A in prob.M1}
    unknown = set(P.arrows) - names
    if unknown:
        raise InvalidProblem(f"Okända pilar i representationen: {sorted(unknown)}")
    for A in prob.M1:
        C = P.arrows.get(A.name)
        if C is None:
            continue
        shape = (alg.class_size(P.sizes, A.src), alg.class_size(P.sizes, A.tgt))
        if len(C) != shape[0] or any(len(row) != shape[1] for row in C):
            raise ShapeMismatch(f"Matrisen för {A.name} ska ha formen {shape}")


class QuotientSubPair(BaseModel):
    """
    En ensidig vy av problemet: de m första M₁-baserna i en radremsa.

    Attributes:
        row_strips: T̄_R, radremsan som baserna delar
        col_strips: T̄_C, kolumnremsorna som baserna rör i den raden
        solids: Namnen på d_1, ..., d_m
        dotteds: K₁-baser som verkar inom T̄_R eller inom T̄_C
    """
    row_strips: List[int]
    col_strips: List[int]
    solids: List[str]
    dotteds: List[str]


def quotient_sub_pair(prob: ProblemSpec, m: int) -> QuotientSubPair:
    """
    Kvot-delpar för de m första M₁-baserna.

    Raises:
        NotOneSidedRow: Om baserna inte har sin ledande position i samma rad
    """
    if m <= 0:
        return QuotientSubPair(row_strips=[], col_strips=[], solids=[], dotteds=[])
    if m > len(prob.M1):
        raise NotOneSidedRow(f"Problemet har bara {len(prob.M1)} M₁-baser")
    first = prob.M1[:m]
    rows = {A.lead[0] for A in first}
    if len(rows) != 1:
        raise NotOneSidedRow(f"De {m} första baserna leder i olika rader: {sorted(rows)}")
    p = rows.pop()
    cols = sorted({j for A in first for (i, j) in A.entries if i == p})
    inside = set(cols)
    dotteds = [V.name for V in prob.K1
               if all(i == j == p or (i in inside and j in inside) for (i, j) in V.entries)]
    return QuotientSubPair(row_strips=[p], col_strips=cols, solids=[A.name for A in first],
                           dotteds=dotteds)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _base_from_json(F: Field, alg: MinimalAlgebraSpec, data: BaseJSON) -> BaseMatrix:
    entries = {parse_position(k): poly_from_json(F, v) for k, v in data.entries.items()}
    base = make_base(F, alg, data.name, entries)
    if data.src is not None and data.src != base.src:
        raise InvalidProblem(f"Basen {data.name}: angiven src {data.src} stämmer inte")
    if data.tgt is not None and data.tgt != base.tgt:
        raise InvalidProblem(f"Basen {data.name}: angiven tgt {data.tgt} stämmer inte")
    return base


def problem_from_json(data: ProblemJSON, F: Optional[Field] = None) -> ProblemSpec:
    """
    Bygger och validerar ett ProblemSpec från en validerad ProblemJSON.

    Args:
        data: Indata
        F: Arbetskropp; standard är filens "field" eller de rationella talen
    """
    if F is None:
        F = Field(data.field or "rational")
    n = len(data.classes)
    classes = []
    for idx, indices in enumerate(data.classes):
        kind = data.kinds[idx] if data.kinds else "trivial"
        phi = [poly_from_json(F, p, x) for p in data.phi[idx]] if data.phi else []
        classes.append(VertexClass(
            indices=indices, kind=kind, phi=phi,
            label=data.labels[idx] if data.labels else None,
            side=data.sides[idx] if data.sides else None,
        ))
    alg = MinimalAlgebraSpec(t=data.t, classes=classes)
    K1 = sorted((_base_from_json(F, alg, b) for b in data.K1), key=lambda b: position_key(b.lead))
    M1 = sorted((_base_from_json(F, alg, b) for b in data.M1), key=lambda b: position_key(b.lead))
    H = {}
    for key, v in data.H.items():
        h = poly_from_json(F, v, x)
        if not h.is_zero:
            H[parse_position(key)] = h
    prob = ProblemSpec(field=F, algebra=alg, K1=K1, M1=M1, H=H)
    validate_problem(prob)
    _logger.debug("Läste problem med t=%d, %d K₁-baser, %d M₁-baser, %d klasser",
                  alg.t, len(K1), len(M1), n)
    return prob


def _base_to_json(F: Field, b: BaseMatrix) -> Dict[str, Any]:
    return {
        "name": b.name,
        "src": b.src,
        "tgt": b.tgt,
        "entries": {f"{i},{j}": poly_to_json(F, p) for (i, j), p in sorted(b.entries.items())},
    }


def problem_to_json(prob: ProblemSpec) -> Dict[str, Any]:
    F = prob.field
    return {
        "field": F.spec,
        "t": prob.t,
        "classes": [c.indices for c in prob.classes],
        "kinds": [c.kind for c in prob.classes],
        "phi": [[poly_to_json(F, p) for p in c.phi] for c in prob.classes],
        "labels": [c.label for c in prob.classes],
        "sides": [c.side for c in prob.classes],
        "K1": [_base_to_json(F, b) for b in prob.K1],
        "M1": [_base_to_json(F, b) for b in prob.M1],
        "H": {f"{i},{j}": poly_to_json(F, h) for (i, j), h in sorted(prob.H.items())},
    }


def representation_from_json(data: RepresentationJSON, prob: ProblemSpec) -> Representation:
    """Bygger och validerar en representation."""
    F = prob.field
    arrows = {name: [[F(v) for v in row] for row in rows] for name, rows in data.arrows.items()}
    weyr = {int(k): WeyrForm.from_json(F, w.model_dump()) for k, w in data.weyr.items()}
    P = Representation(sizes=list(data.sizes), arrows=arrows, weyr=weyr)
    validate_representation(P, prob)
    return P


def representation_to_json(P: Representation, prob: ProblemSpec) -> Dict[str, Any]:
    F = prob.field
    return {
        "sizes": list(P.sizes),
        "arrows": {name: matrix_to_json(F, C) for name, C in sorted(P.arrows.items())},
        "weyr": {str(k): {"blocks": W.to_json(F)["blocks"]} for k, W in sorted(P.weyr.items())},
    }


def morphism_from_json(data: MorphismJSON, prob: ProblemSpec) -> Morphism:
    F = prob.field
    return Morphism(
        classes={int(k): [[F(v) for v in row] for row in rows] for k, rows in data.classes.items()},
        dotted={k: [[F(v) for v in row] for row in rows] for k, rows in data.dotted.items()},
    )


def morphism_to_json(f: Morphism, prob: ProblemSpec) -> Dict[str, Any]:
    F = prob.field
    return {
        "classes": {str(k): matrix_to_json(F, C) for k, C in sorted(f.classes.items())},
        "dotted": {k: matrix_to_json(F, C) for k, C in sorted(f.dotted.items())},
    }


def identity_morphism(prob: ProblemSpec, P: Representation) -> Morphism:
    F = prob.field
    return Morphism(classes={idx: identity(F, prob.algebra.class_size(P.sizes, idx))
                             for idx in range(len(prob.classes))})
