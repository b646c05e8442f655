"""
Symboliskt bocs-lager för ett matrisbimodulproblem.

Heldragna pilar a_i är duala mot M₁-baserna och streckade pilar v_j mot
K₁-baserna. Differentialen av en heldragen pil läses av den formella
ekvationen (Θ+H)(Υ+Π) = (Υ+Π)(Θ+H) vid pilens ledande position:

    δ(a_l) = (ΠΘ − ΘΠ + ΠH − HΠ)(p_l, q_l)

och består av termer v⊗a (VA), a⊗v (AV) och v (V) med koefficienter i
k[x, y], där x verkar från vänster och y från höger. Differentialen av en
streckad pil läses av ΠΠ vid basens ledande position (termer VV).
"""

import logging
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel
from sympy import Poly

from .core import (
    BaseMatrix, Morphism, ProblemSpec, Representation, VertexClass, eval_coef,
    h_block, intertwines_weyr, weyr_matrices,
)
from .exactalg import (
    Field, Matrix, NotInvertible, ShapeMismatch, UnsupportedCoefficient, as_var,
    bi, bi_const, degrees_xy, mat_add, mat_equal, mat_mul, mat_sub, poly_matrix_det,
    poly_to_json, scalar_of, swap_xy, to_bi, to_bi_dict, x, y, zeros,
)

_logger = logging.getLogger(__name__)

Symbol = Tuple[str, str]
SymEntry = Dict[Tuple[Symbol, ...], Poly]
SymMatrix = Dict[Tuple[int, int], SymEntry]

_KIND_ORDER = {"V": 0, "VA": 1, "AV": 2, "VV": 3}


class ArrowId(BaseModel):
    """
    En pil i lagret.

    Attributes:
        name: Pilens namn (basens namn)
        kind: "solid" eller "dotted"
        index: Position i M₁- respektive K₁-ordningen
        src: Startklass
        tgt: Slutklass
    """
    name: str
    kind: Literal["solid", "dotted"]
    index: int
    src: int
    tgt: int

    class Config:
        frozen = True


class Term(BaseModel):
    """En term coef·left eller coef·(left ⊗ right)."""
    kind: Literal["V", "VA", "AV", "VV"]
    coef: Any
    left: str
    right: Optional[str] = None

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    def key(self) -> Tuple[str, str, str]:
        return (self.kind, self.left, self.right or "")


class TermSum(BaseModel):
    """
    En summa av termer i normalform: lika termer sammanslagna, nolltermer
    borttagna, sorterade efter (typ, vänster, höger).
    """
    terms: List[Term] = []

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @classmethod
    def collect(cls, F: Field, terms: Sequence[Term]) -> "TermSum":
        acc: Dict[Tuple[str, str, str], Poly] = {}
        proto: Dict[Tuple[str, str, str], Term] = {}
        for t in terms:
            k = t.key()
            acc[k] = acc[k] + to_bi(F, t.coef) if k in acc else to_bi(F, t.coef)
            proto.setdefault(k, t)
        out = [Term(kind=proto[k].kind, coef=c, left=proto[k].left, right=proto[k].right)
               for k, c in acc.items() if not c.is_zero]
        out.sort(key=lambda t: (_KIND_ORDER[t.kind], t.left, t.right or ""))
        return cls(terms=out)

    def is_zero(self) -> bool:
        return not self.terms

    def of_kind(self, kind: str) -> List[Term]:
        return [t for t in self.terms if t.kind == kind]

    def coefficient(self, kind: str, left: str, right: Optional[str] = None) -> Optional[Poly]:
        for t in self.terms:
            if t.kind == kind and t.left == left and t.right == right:
                return t.coef
        return None

    def same_as(self, other: "TermSum") -> bool:
        if len(self.terms) != len(other.terms):
            return False
        return all(a.key() == b.key() and (a.coef - b.coef).is_zero
                   for a, b in zip(self.terms, other.terms))

    def to_json(self, F: Field) -> List[Dict[str, Any]]:
        return [{"kind": t.kind, "coef": poly_to_json(F, t.coef), "left": t.left, "right": t.right}
                for t in self.terms]

    def render(self) -> str:
        """Läsbar form, t.ex. "u2*b - b*v2"."""
        if not self.terms:
            return "0"
        parts = []
        for t in self.terms:
            body = t.left if t.right is None else f"{t.left}*{t.right}"
            coef = t.coef.as_expr()
            if coef == 1:
                parts.append(f"+ {body}")
            elif coef == -1:
                parts.append(f"- {body}")
            else:
                parts.append(f"+ ({coef})*{body}")
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]


class BocsLayer(BaseModel):
    """
    Lagret: noder, pilar och differentialer.

    Attributes:
        vertices: Klasserna i den minimala algebran
        solids: Heldragna pilar i M₁-ordning
        dotteds: Streckade pilar i K₁-ordning
        delta_solid: δ(a) per heldragen pil
        delta_dotted: δ(v) per streckad pil
        problem: Problemet lagret härleddes från
    """
    field: Any
    vertices: List[VertexClass]
    solids: List[ArrowId]
    dotteds: List[ArrowId]
    delta_solid: Dict[str, TermSum]
    delta_dotted: Dict[str, TermSum]
    problem: Optional[ProblemSpec] = None

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    def solid(self, name: str) -> ArrowId:
        return next(a for a in self.solids if a.name == name)

    def dotted(self, name: str) -> ArrowId:
        return next(v for v in self.dotteds if v.name == name)

    def first_solid(self) -> Optional[ArrowId]:
        return self.solids[0] if self.solids else None


# ---------------------------------------------------------------------------
# Koefficientprodukter
# ---------------------------------------------------------------------------

def _compose(F: Field, left: Poly, right: Poly, what: str) -> Poly:
    """
    Koefficienten för left ⊗ right: x från vänsterfaktorn, y från högerfaktorn.

    Mellanvariabeln (vänsterfaktorns y, högerfaktorns x) får inte förekomma.
    """
    dl, dr = degrees_xy(left), degrees_xy(right)
    if dl[1] or dr[0]:
        raise UnsupportedCoefficient(
            f"{what}: mellanvariabeln förekommer i {left.as_expr()} ⊗ {right.as_expr()}")
    return to_bi(F, left) * to_bi(F, right)


def _h_left(F: Field, h: Poly) -> Poly:
    return to_bi(F, as_var(F, h, x))


def _h_right(F: Field, h: Poly) -> Poly:
    return to_bi(F, as_var(F, h, y))


# ---------------------------------------------------------------------------
# Formella produkter
# ---------------------------------------------------------------------------

def _class_symbol(prob: ProblemSpec, idx: int) -> Symbol:
    return ("e", prob.classes[idx].label or f"X{idx}")


def formal_products(prob: ProblemSpec) -> Tuple[SymMatrix, SymMatrix, SymMatrix]:
    """
    De formella produkterna Υ = Σ e_X ∗ E_X, Π = Σ v_j ∗ V_j och Θ = Σ a_i ∗ A_i.

    Returns:
        Tre glesa symboliska matriser {(i, j): {(symbol,): koefficient}}
    """
    F = prob.field
    upsilon: SymMatrix = {}
    for idx, cls in enumerate(prob.classes):
        for i in cls.indices:
            upsilon[(i, i)] = {(_class_symbol(prob, idx),): bi_const(F, 1)}

    def build(bases: Sequence[BaseMatrix], kind: str) -> SymMatrix:
        out: SymMatrix = {}
        for b in bases:
            for pos, coef in b.entries.items():
                out.setdefault(pos, {})[((kind, b.name),)] = coef
        return out

    return upsilon, build(prob.K1, "v"), build(prob.M1, "a")


def _h_matrix(prob: ProblemSpec) -> SymMatrix:
    F = prob.field
    return {pos: {(): _h_left(F, h)} for pos, h in prob.H.items()}


def _sym_add(F: Field, A: SymMatrix, B: SymMatrix, sign: int = 1) -> SymMatrix:
    out: SymMatrix = {pos: dict(e) for pos, e in A.items()}
    for pos, entry in B.items():
        target = out.setdefault(pos, {})
        for key, c in entry.items():
            c = c if sign == 1 else -c
            target[key] = target[key] + c if key in target else c
    return out


def _sym_mul(F: Field, A: SymMatrix, B: SymMatrix) -> SymMatrix:
    by_row: Dict[int, List[Tuple[int, SymEntry]]] = {}
    for (k, j), e in B.items():
        by_row.setdefault(k, []).append((j, e))
    out: SymMatrix = {}
    for (i, k), left in A.items():
        for j, right in by_row.get(k, []):
            target = out.setdefault((i, j), {})
            for k1, c1 in left.items():
                for k2, c2 in right.items():
                    if not k1:
                        coef = c1 * c2
                    elif not k2:
                        coef = c1 * swap_xy(F, c2)
                    else:
                        coef = _compose(F, c1, c2, "formell produkt")
                    key = k1 + k2
                    target[key] = target[key] + coef if key in target else coef
    return out


def formal_equation(prob: ProblemSpec) -> SymMatrix:
    """Residualen (Θ+H)(Υ+Π) − (Υ+Π)(Θ+H) som symbolisk matris."""
    F = prob.field
    upsilon, pi, theta = formal_products(prob)
    left = _sym_add(F, theta, _h_matrix(prob))
    right = _sym_add(F, upsilon, pi)
    return _sym_add(F, _sym_mul(F, left, right), _sym_mul(F, right, left), sign=-1)


def delta_from_formal_equation(prob: ProblemSpec, l: int) -> TermSum:
    """
    δ(a_l) läst direkt ur den formella ekvationen vid (p_l, q_l).

    Termer som innehåller en nodsymbol e_X hör till identiteten och tas bort;
    resten byter tecken.
    """
    F = prob.field
    entry = formal_equation(prob).get(prob.M1[l].lead, {})
    terms = []
    for key, coef in entry.items():
        if any(sym[0] == "e" for sym in key) or not key:
            continue
        kinds = "".join(sym[0] for sym in key).upper()
        if kinds not in ("V", "VA", "AV"):
            continue
        terms.append(Term(kind=kinds, coef=-coef, left=key[0][1],
                          right=key[1][1] if len(key) > 1 else None))
    return TermSum.collect(F, terms)


# ---------------------------------------------------------------------------
# Differentialer
# ---------------------------------------------------------------------------

def _row(b: BaseMatrix, p: int) -> List[Tuple[int, Poly]]:
    return [(j, c) for (i, j), c in b.entries.items() if i == p]


def _col(b: BaseMatrix, q: int) -> List[Tuple[int, Poly]]:
    return [(i, c) for (i, j), c in b.entries.items() if j == q]


def zeta(prob: ProblemSpec, V: BaseMatrix, pos: Tuple[int, int]) -> Poly:
    """ζ = Σ_k V[p,k](x,y)·h_kq(y) − Σ_k h_pk(x)·V[k,q](x,y) vid pos."""
    F = prob.field
    p, q = pos
    total = bi(F, {})
    for k, c in _row(V, p):
        h = prob.H.get((k, q))
        if h is not None:
            total = total + to_bi(F, c) * _h_right(F, h)
    for k, c in _col(V, q):
        h = prob.H.get((p, k))
        if h is not None:
            total = total - _h_left(F, h) * to_bi(F, c)
    return total


def solid_differential(prob: ProblemSpec, l: int) -> TermSum:
    """
    δ(a_l) för den l:te M₁-basen (0-baserat index).

    Args:
        prob: Problemet
        l: Index i M₁

    Returns:
        TermSum med VA-termer (positiva), AV-termer (negativa) och V-termer

    Raises:
        UnsupportedCoefficient: Om en mellanvariabel skulle behövas
    """
    F = prob.field
    A_l = prob.M1[l]
    p, q = A_l.lead
    terms: List[Term] = []
    for V in prob.K1:
        for k, cv in _row(V, p):
            for A in prob.M1:
                ca = A.entries.get((k, q))
                if ca is not None:
                    terms.append(Term(kind="VA", coef=_compose(F, cv, ca, "VA"),
                                      left=V.name, right=A.name))
        for k, cv in _col(V, q):
            for A in prob.M1:
                ca = A.entries.get((p, k))
                if ca is not None:
                    terms.append(Term(kind="AV", coef=-_compose(F, ca, cv, "AV"),
                                      left=A.name, right=V.name))
        z = zeta(prob, V, (p, q))
        if not z.is_zero:
            terms.append(Term(kind="V", coef=z, left=V.name))
    return TermSum.collect(F, terms)


def dotted_differential(prob: ProblemSpec, j: int) -> TermSum:
    """
    δ(v_j) = μ₁₁(v_j), läst ur ΠΠ vid V_j:s ledande position.

    Bara par (v_i, v_i') med i, i' < j kan förekomma.
    """
    F = prob.field
    p, q = prob.K1[j].lead
    terms: List[Term] = []
    for Va in prob.K1:
        for k, ca in _row(Va, p):
            for Vb in prob.K1:
                cb = Vb.entries.get((k, q))
                if cb is not None:
                    terms.append(Term(kind="VV", coef=_compose(F, ca, cb, "VV"),
                                      left=Va.name, right=Vb.name))
    return TermSum.collect(F, terms)


def layer_of(prob: ProblemSpec) -> BocsLayer:
    """Hela lagret med alla differentialer."""
    solids = [ArrowId(name=A.name, kind="solid", index=i, src=A.src, tgt=A.tgt)
              for i, A in enumerate(prob.M1)]
    dotteds = [ArrowId(name=V.name, kind="dotted", index=j, src=V.src, tgt=V.tgt)
               for j, V in enumerate(prob.K1)]
    delta_solid = {A.name: solid_differential(prob, i) for i, A in enumerate(prob.M1)}
    delta_dotted = {V.name: dotted_differential(prob, j) for j, V in enumerate(prob.K1)}
    _logger.debug("Lager med %d heldragna och %d streckade pilar", len(solids), len(dotteds))
    return BocsLayer(field=prob.field, vertices=list(prob.classes), solids=solids,
                     dotteds=dotteds, delta_solid=delta_solid, delta_dotted=delta_dotted,
                     problem=prob)


def is_triangular(layer: BocsLayer) -> bool:
    """
    Triangularitet: δ(v_j) nämner bara v_i med i < j och δ(a_l) bara
    heldragna pilar före a_l.
    """
    dorder = {v.name: v.index for v in layer.dotteds}
    sorder = {a.name: a.index for a in layer.solids}
    for v in layer.dotteds:
        for t in layer.delta_dotted[v.name].terms:
            if dorder[t.left] >= v.index or dorder[t.right] >= v.index:
                return False
    for a in layer.solids:
        for t in layer.delta_solid[a.name].terms:
            other = t.right if t.kind == "VA" else t.left if t.kind == "AV" else None
            if other is not None and sorder[other] >= a.index:
                return False
    return True


def degree_bound_holds(layer: BocsLayer) -> bool:
    """Varje koefficient har grad ≤ 1 i x och i y."""
    for ts in list(layer.delta_solid.values()) + list(layer.delta_dotted.values()):
        for t in ts.terms:
            dx, dy = degrees_xy(t.coef)
            if dx > 1 or dy > 1:
                return False
    return True


def check_formal_identity(prob: ProblemSpec) -> bool:
    """Sant om δ(a_l) ur den formella ekvationen stämmer med solid_differential för alla l."""
    return all(delta_from_formal_equation(prob, l).same_as(solid_differential(prob, l))
               for l in range(len(prob.M1)))


# ---------------------------------------------------------------------------
# Basbyte för streckade pilar
# ---------------------------------------------------------------------------

def _adjugate(F: Field, M: List[List[Poly]]) -> List[List[Poly]]:
    n = len(M)
    if n == 1:
        return [[bi_const(F, 1)]]
    adj = [[bi(F, {}) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[M[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
            d = poly_matrix_det(F, minor)
            adj[i][j] = d if (i + j) % 2 == 0 else -d
    return adj


def _x_only(F: Field, p: Poly, what: str) -> Poly:
    if degrees_xy(p)[1]:
        raise UnsupportedCoefficient(f"{what}: {p.as_expr()} innehåller mellanvariabeln")
    return to_bi(F, p)


def _y_only(F: Field, p: Poly, what: str) -> Poly:
    if degrees_xy(p)[0]:
        raise UnsupportedCoefficient(f"{what}: {p.as_expr()} innehåller mellanvariabeln")
    return to_bi(F, p)


def base_change_dotted(layer: BocsLayer, Fmat: Sequence[Sequence[Any]],
                       denominator: Optional[Poly] = None) -> BocsLayer:
    """
    Basbyte (v'_1, ..., v'_m) = (v_1, ..., v_m)·F för de streckade pilarna.

    K₁-baserna transformeras med F⁻ᵀ: V'_j = Σ_i (F⁻¹)_ji·V_i. De nya pilarna
    behåller de gamla namnen positionsvis. Differentialerna skrivs om genom
    substitutionen v_i = Σ_j v'_j·(F⁻¹)_ji och δ(v'_j) = Σ_i F_ij·δ(v_i).

    Args:
        layer: Lagret
        Fmat: Kvadratisk matris av polynom (eller skalärer), en rad per streckad pil
        denominator: Lokaliseringspolynom i x som registreras på berörda
            parametriska klasser

    Returns:
        Nytt lager

    Raises:
        ShapeMismatch: Om F har fel storlek eller blandar klasspar
        NotInvertible: Om det F inte är inverterbart (determinanten måste vara en nollskild skalär)
    """
    F = layer.field
    n = len(layer.dotteds)
    M = [[to_bi(F, v) if isinstance(v, Poly) else bi_const(F, v) for v in row] for row in Fmat]
    if len(M) != n or any(len(row) != n for row in M):
        raise ShapeMismatch(f"Basbytesmatrisen ska vara {n}x{n}")
    pairs = [(v.src, v.tgt) for v in layer.dotteds]
    for i in range(n):
        for j in range(n):
            if not M[i][j].is_zero and pairs[i] != pairs[j]:
                raise ShapeMismatch(
                    f"Basbytet blandar klasspar: {layer.dotteds[i].name} och {layer.dotteds[j].name}")
    det = poly_matrix_det(F, M) if n else bi_const(F, 1)
    if det.is_zero or not det.is_ground:
        raise NotInvertible(f"Basbytesmatrisen har determinanten {det.as_expr()}")
    inv_det = F.one / scalar_of(F, det)
    Finv = [[c.mul_ground(inv_det) for c in row] for row in _adjugate(F, M)] if n else []
    names = [v.name for v in layer.dotteds]
    pos = {name: i for i, name in enumerate(names)}

    def rewrite(ts: TermSum) -> TermSum:
        out: List[Term] = []
        for t in ts.terms:
            if t.kind == "V":
                i = pos[t.left]
                for j in range(n):
                    if not Finv[j][i].is_zero:
                        out.append(Term(kind="V", coef=t.coef * Finv[j][i], left=names[j]))
            elif t.kind == "VA":
                i = pos[t.left]
                for j in range(n):
                    if not Finv[j][i].is_zero:
                        out.append(Term(kind="VA", coef=t.coef * _x_only(F, Finv[j][i], "VA"),
                                        left=names[j], right=t.right))
            elif t.kind == "AV":
                i = pos[t.right]
                for j in range(n):
                    if not Finv[j][i].is_zero:
                        out.append(Term(kind="AV", coef=t.coef * _y_only(F, Finv[j][i], "AV"),
                                        left=t.left, right=names[j]))
            else:
                a, b = pos[t.left], pos[t.right]
                for c in range(n):
                    if Finv[c][a].is_zero:
                        continue
                    for d in range(n):
                        if Finv[d][b].is_zero:
                            continue
                        coef = t.coef * _x_only(F, Finv[c][a], "VV") * _y_only(F, Finv[d][b], "VV")
                        out.append(Term(kind="VV", coef=coef, left=names[c], right=names[d]))
        return TermSum.collect(F, out)

    delta_solid = {name: rewrite(ts) for name, ts in layer.delta_solid.items()}
    delta_dotted = {}
    for j, name in enumerate(names):
        acc: List[Term] = []
        for i in range(n):
            if M[i][j].is_zero:
                continue
            for t in layer.delta_dotted[names[i]].terms:
                acc.append(Term(kind="VV", coef=t.coef * M[i][j], left=t.left, right=t.right))
        delta_dotted[name] = rewrite(TermSum.collect(F, acc))

    touched = set()
    for j in range(n):
        for i in range(n):
            expected = bi_const(F, 1) if i == j else bi(F, {})
            if not (M[i][j] - expected).is_zero:
                touched.update(pairs[j])
    vertices = list(layer.vertices)
    if denominator is not None:
        denominator = as_var(F, denominator, x)
        for idx in sorted(touched):
            cls = vertices[idx]
            if cls.parametric and not any((denominator - f).is_zero for f in cls.phi):
                vertices[idx] = cls.model_copy(update={"phi": list(cls.phi) + [denominator]})
                _logger.info("Lokalisering: klass %d får faktorn %s", idx, denominator.as_expr())

    problem = layer.problem
    if problem is not None:
        new_K1 = []
        for j, V in enumerate(problem.K1):
            entries: Dict[Tuple[int, int], Poly] = {}
            for i, Vi in enumerate(problem.K1):
                if Finv[j][i].is_zero:
                    continue
                for p_, c in Vi.entries.items():
                    val = c * Finv[j][i]
                    entries[p_] = entries[p_] + val if p_ in entries else val
            entries = {p_: c for p_, c in entries.items() if not c.is_zero}
            new_K1.append(V.model_copy(update={"entries": entries}))
        problem = problem.model_copy(update={
            "K1": new_K1,
            "algebra": problem.algebra.model_copy(update={"classes": vertices}),
        })
    return layer.model_copy(update={"delta_solid": delta_solid, "delta_dotted": delta_dotted,
                                    "vertices": vertices, "problem": problem})


# ---------------------------------------------------------------------------
# Morfismformeln
# ---------------------------------------------------------------------------

def check_morphism_formula(P: Representation, Q: Representation, f: Morphism,
                           prob: ProblemSpec) -> bool:
    """
    Kontrollerar P(a_l)·f_Y − f_X·Q(a_l) = δ(a_l) utvärderad för varje heldragen pil.

    Termerna utvärderas med f(v) för v, P(a) för pilar till vänster om en
    streckad pil och Q(a) för pilar till höger; x och y ersätts med
    Weyr-delarna i P respektive Q.

    Raises:
        ShapeMismatch: Om formerna inte passar
    """
    F = prob.field
    if not intertwines_weyr(f, prob, P, Q):
        return False
    alg = prob.algebra
    wp, wq = weyr_matrices(prob, P), weyr_matrices(prob, Q)

    def p_size(c: int) -> int:
        return alg.class_size(P.sizes, c)

    def q_size(c: int) -> int:
        return alg.class_size(Q.sizes, c)

    def arrow(R: Representation, A: BaseMatrix, sizer) -> Matrix:
        C = R.arrows.get(A.name)
        return C if C is not None else zeros(F, sizer(A.src), sizer(A.tgt))

    def fv(V: BaseMatrix) -> Matrix:
        C = f.dotted.get(V.name)
        return C if C is not None else zeros(F, p_size(V.src), q_size(V.tgt))

    for idx, A in enumerate(prob.M1):
        X, Y = A.src, A.tgt
        fx, fy = f.classes[X], f.classes[Y]
        shape = (p_size(X), q_size(Y))
        lhs = mat_sub(mat_mul(F, arrow(P, A, p_size), fy, n_inner=p_size(Y), n_cols=q_size(Y)),
                      mat_mul(F, fx, arrow(Q, A, q_size), n_inner=q_size(X), n_cols=q_size(Y)))
        rhs = zeros(F, *shape)
        for t in solid_differential(prob, idx).terms:
            if t.kind == "V":
                V = prob.dotted(t.left)
                block = fv(V)
            elif t.kind == "VA":
                V, B = prob.dotted(t.left), prob.solid(t.right)
                block = mat_mul(F, fv(V), arrow(Q, B, q_size), n_inner=q_size(V.tgt), n_cols=q_size(B.tgt))
            else:
                B, V = prob.solid(t.left), prob.dotted(t.right)
                block = mat_mul(F, arrow(P, B, p_size), fv(V), n_inner=p_size(B.tgt), n_cols=q_size(V.tgt))
            rhs = mat_add(rhs, eval_coef(F, t.coef, block, wp.get(X), wq.get(Y), shape))
        h = prob.H.get(A.lead)
        if h is not None and h.degree() > 0:
            lhs = mat_add(lhs, mat_sub(
                mat_mul(F, h_block(F, h, p_size(X), wp.get(X)), fx, n_inner=p_size(X), n_cols=q_size(X)),
                mat_mul(F, fx, h_block(F, h, q_size(X), wq.get(X)), n_inner=q_size(X), n_cols=q_size(X))))
        if not mat_equal(lhs, rhs):
            _logger.debug("Morfismformeln bryts vid %s", A.name)
            return False
    return True


def layer_to_json(layer: BocsLayer) -> Dict[str, Any]:
    """layer.json: noder, pilar och differentialer."""
    F = layer.field
    vertices = [{"index": i, "indices": c.indices, "kind": c.kind, "label": c.label,
                 "phi": [poly_to_json(F, p) for p in c.phi]} for i, c in enumerate(layer.vertices)]
    arrows = lambda items: [{"name": a.name, "kind": a.kind, "source": a.src, "target": a.tgt}
                            for a in items]
    delta = {name: ts.to_json(F) for name, ts in layer.delta_solid.items()}
    delta.update({name: ts.to_json(F) for name, ts in layer.delta_dotted.items()})
    return {"vertices": vertices, "solids": arrows(layer.solids), "dotteds": arrows(layer.dotteds),
            "delta": delta}
