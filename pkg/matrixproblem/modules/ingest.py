"""
Modul för import av algebror och konstruktion av bipartita problem.

En ändligdimensionell basisk algebra Λ anges antingen som en tabell
(algebra.json, med bas, idempotenter, st-tilldelning och multiplikations-
tabell) eller som en koger med monomiala relationer (quiver.json), som
först översätts till en tabell. Ur tabellen byggs det bipartita problemet:
två kopior av den reguljära representationen Λ̄ bildar K, radikalen
rad(Λ̄) bildar M₁ och H = 0.

Exempel på algebra.json (k[t]/(t²)):
    {
      "basis": ["t", "e"],
      "idempotents": ["e"],
      "st": {"t": [1, 1], "e": [1, 1]},
      "mul": {}
    }
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel

from .core import MinimalAlgebraSpec, ProblemSpec, VertexClass, normalize_basis, validate_problem
from .exactalg import Field, InfiniteDimensional, InvalidTable, NotBipartite
from .models import AlgebraSpec, QuiverJSON

_logger = logging.getLogger(__name__)

Combination = Dict[str, Any]


class AlgebraTable(BaseModel):
    """
    En basisk algebra som multiplikationstabell.

    Attributes:
        field: Arbetskroppen
        basis: Basnamn; radikalelement i längdordning, sedan idempotenter
        idempotents: Idempotenternas namn
        st: b = e_s·b·e_t som (s, t), 1-baserade index i idempotents
        mul: Radikalprodukter (a, b) -> linjärkombination
    """
    field: Any
    basis: List[str]
    idempotents: List[str]
    st: Dict[str, Tuple[int, int]]
    mul: Dict[Tuple[str, str], Dict[str, Any]] = {}

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @property
    def radical(self) -> List[str]:
        return [b for b in self.basis if b not in self.idempotents]

    def product(self, a: str, b: str) -> Combination:
        """a·b som linjärkombination; idempotentprodukter fylls i automatiskt."""
        F = self.field
        if a in self.idempotents:
            s = self.idempotents.index(a) + 1
            if b in self.idempotents:
                return {a: F.one} if a == b else {}
            return {b: F.one} if self.st[b][0] == s else {}
        if b in self.idempotents:
            t = self.idempotents.index(b) + 1
            return {a: F.one} if self.st[a][1] == t else {}
        return dict(self.mul.get((a, b), {}))

    def multiply(self, left: Combination, right: Combination) -> Combination:
        F = self.field
        out: Combination = {}
        for a, ca in left.items():
            for b, cb in right.items():
                for c, cc in self.product(a, b).items():
                    out[c] = out.get(c, F.zero) + ca * cb * cc
        return {c: v for c, v in out.items() if not F.is_zero(v)}

    def left_matrix(self, lam: str) -> Dict[Tuple[int, int], Any]:
        """L_λ[i][j] = koefficienten för basis_i i λ·basis_j (1-baserat, glest)."""
        out = {}
        for j, b in enumerate(self.basis, start=1):
            for c, coef in self.product(lam, b).items():
                out[(self.basis.index(c) + 1, j)] = coef
        return out


class QuiverSpec(BaseModel):
    """
    En koger med monomiala relationer.

    Attributes:
        vertices: Nodnamn
        arrows: (namn, start, slut)
        relations: Förbjudna vägar som tupler av pilnamn
    """
    vertices: List[str]
    arrows: List[Tuple[str, str, str]]
    relations: List[Tuple[str, ...]]

    class Config:
        frozen = True


def validate_table(tab: AlgebraTable) -> None:
    """
    Kontrollerar en algebratabell.

    Raises:
        InvalidTable: Om idempotenterna, st-tilldelningen, radikalen eller
            associativiteten bryts
    """
    F = tab.field
    for s, e in enumerate(tab.idempotents, start=1):
        if tab.st[e] != (s, s):
            raise InvalidTable(f"Idempotenten {e} måste ha st = [{s}, {s}]")
    positions = {b: i for i, b in enumerate(tab.basis)}
    rad = tab.radical
    first_idem = min(positions[e] for e in tab.idempotents) if tab.idempotents else len(tab.basis)
    if any(positions[r] > first_idem for r in rad):
        raise InvalidTable("Radikalelementen måste komma före idempotenterna i basen")
    for (a, b), combo in tab.mul.items():
        if a in tab.idempotents or b in tab.idempotents:
            raise InvalidTable(f"Produkten {a}*{b} fylls i automatiskt och får inte anges")
        nonzero = {c: v for c, v in combo.items() if not F.is_zero(v)}
        if nonzero and tab.st[a][1] != tab.st[b][0]:
            raise InvalidTable(f"{a}*{b} är nollskild fast {a} slutar där {b} inte börjar")
        for c in nonzero:
            if c in tab.idempotents:
                raise InvalidTable(f"{a}*{b} hamnar utanför radikalen")
            if tab.st[c] != (tab.st[a][0], tab.st[b][1]):
                raise InvalidTable(f"{a}*{b} innehåller {c} med fel st")
    for a in tab.basis:
        for b in tab.basis:
            for c in tab.basis:
                ab_c = tab.multiply(tab.product(a, b), {c: F.one})
                a_bc = tab.multiply({a: F.one}, tab.product(b, c))
                if ab_c != a_bc:
                    raise InvalidTable(f"Tabellen är inte associativ för ({a}, {b}, {c})")
    for lam in rad:
        for (i, j) in tab.left_matrix(lam):
            if i >= j:
                raise InvalidTable(
                    f"L_{lam} är inte strikt övertriangulär; basen är inte i längdordning")


def table_from_json(data: AlgebraSpec, F: Field) -> AlgebraTable:
    """Bygger och validerar en AlgebraTable från algebra.json."""
    mul = {}
    for key, combo in data.mul.items():
        a, _, b = key.partition("*")
        mul[(a, b)] = {c: F(v) for c, v in combo.items()}
    tab = AlgebraTable(field=F, basis=list(data.basis), idempotents=list(data.idempotents),
                       st={k: (v[0], v[1]) for k, v in data.st.items()}, mul=mul)
    validate_table(tab)
    return tab


def quiver_from_json(data: QuiverJSON) -> QuiverSpec:
    return QuiverSpec(vertices=list(data.vertices),
                      arrows=[(a.name, a.source, a.target) for a in data.arrows],
                      relations=[tuple(r) for r in data.relations])


def _contains(path: Tuple[str, ...], rel: Tuple[str, ...]) -> bool:
    n = len(rel)
    return any(path[i:i + n] == rel for i in range(len(path) - n + 1))


def table_from_monomial_quiver(q: QuiverSpec, F: Field, max_path_length: int = 12) -> AlgebraTable:
    """
    Kvoten av vägalgebran med monomiala relationer som tabell.

    Basen består av vägar utan förbjudna delvägar, i avtagande längd och
    sedan lexikografiskt, följt av idempotenterna e{nod}. Produkten är
    konkatenering och blir noll när en förbjuden delväg uppstår.

    Args:
        q: Kogern
        F: Arbetskroppen
        max_path_length: Längsta tillåtna väglängd

    Raises:
        InfiniteDimensional: Om det finns tillåtna vägar längre än taket
    """
    source = {name: s for name, s, _ in q.arrows}
    target = {name: t for name, _, t in q.arrows}
    by_source: Dict[str, List[str]] = {}
    for name, s, _ in q.arrows:
        by_source.setdefault(s, []).append(name)

    paths: List[Tuple[str, ...]] = []
    layer = [(name,) for name, _, _ in q.arrows]
    length = 1
    while layer:
        if length > max_path_length:
            raise InfiniteDimensional(
                f"Det finns tillåtna vägar längre än {max_path_length}, t.ex. {''.join(layer[0])}")
        paths.extend(layer)
        nxt = []
        for p in layer:
            for a in sorted(by_source.get(target[p[-1]], [])):
                cand = p + (a,)
                if not any(cand[-len(r):] == r for r in q.relations if len(r) <= len(cand)):
                    nxt.append(cand)
        layer = nxt
        length += 1

    sep = "" if all(len(name) == 1 for name, _, _ in q.arrows) else "."
    name_of = {p: sep.join(p) for p in paths}
    paths.sort(key=lambda p: (-len(p), p))
    idempotents = [f"e{v}" for v in q.vertices]
    vidx = {v: i + 1 for i, v in enumerate(q.vertices)}
    basis = [name_of[p] for p in paths] + idempotents
    if len(set(basis)) != len(basis):
        raise InvalidTable("Vägnamnen krockar; använd entydiga pilnamn")
    st = {name_of[p]: (vidx[source[p[0]]], vidx[target[p[-1]]]) for p in paths}
    st.update({e: (i + 1, i + 1) for i, e in enumerate(idempotents)})
    known = set(paths)
    mul = {}
    for p in paths:
        for r in paths:
            if target[p[-1]] != source[r[0]]:
                continue
            cat = p + r
            if cat in known and not any(_contains(cat, rel) for rel in q.relations):
                mul[(name_of[p], name_of[r])] = {name_of[cat]: F.one}
    tab = AlgebraTable(field=F, basis=basis, idempotents=idempotents, st=st, mul=mul)
    validate_table(tab)
    _logger.info("Monomial koger gav en algebra av dimension %d", len(basis))
    return tab


def load_algebra(path: str, F: Field, max_path_length: int = 12) -> AlgebraTable:
    """
    Läser algebra.json eller quiver.json.

    Raises:
        FileNotFoundError: Om filen saknas
    """
    file = Path(path)
    if not file.exists():
        raise FileNotFoundError(f"Algebrafil hittades inte: {path}")
    with open(file, "r", encoding="utf-8") as f:
        data = json.load(f)
    if "vertices" in data:
        return table_from_monomial_quiver(quiver_from_json(QuiverJSON(**data)), F, max_path_length)
    return table_from_json(AlgebraSpec(**data), F)


def bipartite_problem(tab: AlgebraTable) -> ProblemSpec:
    """
    Det bipartita problemet för en algebra.

    Remsorna 1..n är vänsterkopian och n+1..2n högerkopian av basen; klasserna
    ges av basens vänsteridempotent. K₁ spänns av L_λ för radikalelement λ i
    båda kopiorna (v_k i högerkopian, u_k i vänsterkopian, med k räknat från
    idempotentänden), M₁ av L_λ placerad i vänsterrader × högerkolumner.

    Raises:
        InvalidTable: Om tabellen är inkonsistent
    """
    F = tab.field
    validate_table(tab)
    n = len(tab.basis)
    classes = []
    for s, e in enumerate(tab.idempotents, start=1):
        rows = [i + 1 for i, b in enumerate(tab.basis) if tab.st[b][0] == s]
        if rows:
            classes.append(VertexClass(indices=rows, label=f"{e}_L", side="row"))
    for s, e in enumerate(tab.idempotents, start=1):
        cols = [n + i + 1 for i, b in enumerate(tab.basis) if tab.st[b][0] == s]
        if cols:
            classes.append(VertexClass(indices=cols, label=f"{e}_R", side="col"))
    alg = MinimalAlgebraSpec(t=2 * n, classes=classes)

    rad = tab.radical
    m = len(rad)
    k1_mats, k1_names = [], []
    for pos, lam in enumerate(rad):
        L = tab.left_matrix(lam)
        k1_mats.append({(n + i, n + j): c for (i, j), c in L.items()})
        k1_names.append(f"v{m - pos}")
    for pos, lam in enumerate(rad):
        L = tab.left_matrix(lam)
        k1_mats.append(dict(L))
        k1_names.append(f"u{m - pos}")
    m1_mats = [{(i, n + j): c for (i, j), c in tab.left_matrix(lam).items()} for lam in rad]

    K1 = normalize_basis(F, alg, k1_mats, k1_names)
    M1 = normalize_basis(F, alg, m1_mats, rad)
    prob = ProblemSpec(field=F, algebra=alg, K1=K1, M1=M1, H={})
    validate_problem(prob)
    _logger.info("Bipartit problem: t=%d, %d K₁-baser, %d M₁-baser", alg.t, len(K1), len(M1))
    return prob


def rdcc_check(prob: ProblemSpec) -> bool:
    """
    RDCC: M₁-basernas ledande rader är parvis olika och varje bas som slutar
    i kolumnklassen Z leder i huvudkolumnen max Z.

    Raises:
        NotBipartite: Om problemet saknar rad- eller kolumnsida
    """
    sides = [c.side for c in prob.classes]
    if any(s is None for s in sides) or "row" not in sides or "col" not in sides:
        raise NotBipartite("Problemet saknar en fullständig rad/kolumn-indelning")
    rows = [A.lead[0] for A in prob.M1]
    if len(set(rows)) != len(rows):
        return False
    for A in prob.M1:
        Z = prob.classes[A.tgt]
        if Z.side != "col":
            raise NotBipartite(f"Basen {A.name} slutar inte i en kolumnklass")
        if A.lead[1] != Z.main:
            return False
    return True
