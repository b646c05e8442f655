"""
Exakt aritmetik för matrisproblem-motorn.

Modulen samlar allt som rör skalärer, polynom och linjär algebra över
arbetskroppen: rationella tal (standard) eller en primkropp GF(p) som väljs
en gång per körning. Polynom representeras som sympy-``Poly`` i variablerna
``x`` (vänstermultiplikation) och ``y`` (högermultiplikation); matriser är
listor av rader med kroppselement och den tunga linjära algebran (rref,
invers, rang, karakteristiskt polynom) görs med sympys ``DomainMatrix``.

Här finns också hela undantagsträdet som övriga moduler använder.

Exempel på polynomserialisering:
    {"x^2 y^1": "3/2", "x^0 y^0": "-1"}
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import GF, QQ, Poly, isprime, symbols
from sympy.polys.matrices import DomainMatrix

_logger = logging.getLogger(__name__)

x, y = symbols("x y")

Matrix = List[List[object]]


# ---------------------------------------------------------------------------
# Undantag
# ---------------------------------------------------------------------------

class MatrixProblemError(Exception):
    """Basklass för alla fel som motorn kastar."""


class ZeroPolynomial(MatrixProblemError):
    """Operationen kräver ett nollskilt polynom."""


class NonSplitSpectrum(MatrixProblemError):
    """Ett karakteristiskt polynom spjälkas inte i linjära faktorer."""

    def __init__(self, residual, message: Optional[str] = None):
        self.residual = residual
        super().__init__(message or f"Spektrum spjälkas inte över arbetskroppen: {residual.as_expr()}")


class ShapeMismatch(MatrixProblemError):
    """Matrisformer passar inte ihop."""


class IrregularWeyr(MatrixProblemError):
    """En Weyr-matris har ett egenvärde som är en rot till det förbjudna polynomet."""


class NotInvertible(MatrixProblemError):
    """En matris är inte inverterbar i den aktuella lokaliseringen."""


class IllegalStep(MatrixProblemError):
    """Ett reduktionssteg bryter mot sina förutsättningar."""


class MixedGroup(MatrixProblemError):
    """Ekvationsgruppen vid fronten är delvis beroende och delvis oberoende."""


class NotOneSidedRow(MatrixProblemError):
    """De första baserna ligger inte i en gemensam radremsa."""


class InvalidTable(MatrixProblemError):
    """En algebratabell är inkonsistent."""


class InfiniteDimensional(MatrixProblemError):
    """Kvoten av vägalgebran är inte ändligdimensionell."""


class NotBipartite(MatrixProblemError):
    """Problemet saknar bipartit sidoindelning."""


class NotMainColumnClass(MatrixProblemError):
    """Klassen är inte en kolumnklass i ett bipartit problem."""


class NotLocal(MatrixProblemError):
    """Lagret har mer än en nod."""


class UnsupportedCoefficient(MatrixProblemError):
    """En koefficient har en form som motorn inte hanterar."""


class InvalidProblem(MatrixProblemError):
    """Ett matrisproblem bryter mot sina invarianter."""


# ---------------------------------------------------------------------------
# Arbetskropp
# ---------------------------------------------------------------------------

class Field:
    """
    Arbetskroppen för en körning.

    Attributes:
        spec: "rational" eller "gf:p"
        domain: sympy-domänen (QQ eller GF(p))
        p: karakteristiken, eller None över de rationella talen
    """

    def __init__(self, spec: str = "rational"):
        spec = spec.strip().lower()
        if spec in ("rational", "qq", "q"):
            self.domain = QQ
            self.p = None
            self.spec = "rational"
        elif spec.startswith("gf:"):
            try:
                p = int(spec[3:])
            except ValueError:
                raise ValueError(f"Ogiltig kroppsflagga: {spec}")
            if not isprime(p):
                raise ValueError(f"gf:p kräver ett primtal, fick {p}")
            self.domain = GF(p)
            self.p = p
            self.spec = f"gf:{p}"
        else:
            raise ValueError(f"Okänd kropp: {spec} (använd 'rational' eller 'gf:p')")

    def __repr__(self) -> str:
        return f"Field({self.spec!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and other.spec == self.spec

    def __hash__(self) -> int:
        return hash(self.spec)

    @property
    def zero(self):
        return self.domain.zero

    @property
    def one(self):
        return self.domain.one

    def __call__(self, value):
        """Konverterar int, Fraction, str eller kroppselement till kroppselement."""
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, Fraction):
            return self.domain.convert(value.numerator) / self.domain.convert(value.denominator)
        if isinstance(value, bool):
            value = int(value)
        return self.domain.convert(value)

    def parse(self, text: str):
        """
        Läser en skalär på formen "p/q" eller "p".

        Raises:
            ValueError: Om texten inte är ett tal eller nämnaren är noll
        """
        text = str(text).strip()
        if "/" in text:
            num, den = text.split("/", 1)
            num_i, den_i = int(num), int(den)
            if den_i == 0 or (self.p is not None and den_i % self.p == 0):
                raise ValueError(f"Division med noll i skalär: {text}")
            return self.domain.convert(num_i) / self.domain.convert(den_i)
        return self.domain.convert(int(text))

    def to_int(self, a) -> int:
        """Representant 0..p-1 i GF(p)."""
        return int(self.domain.to_int(a)) % self.p

    def format(self, a) -> str:
        if self.p is not None:
            return str(self.to_int(a))
        num = int(self.domain.numer(a))
        den = int(self.domain.denom(a))
        return str(num) if den == 1 else f"{num}/{den}"

    def key(self, a):
        """Total ordning på skalärer: naturlig ordning eller representantordning."""
        if self.p is not None:
            return self.to_int(a)
        return Fraction(int(self.domain.numer(a)), int(self.domain.denom(a)))

    def is_zero(self, a) -> bool:
        return a == self.domain.zero

    def elements(self) -> List[object]:
        """Alla element i en primkropp (endast GF(p))."""
        if self.p is None:
            raise ValueError("Elementuppräkning kräver en ändlig kropp")
        return [self.domain.convert(i) for i in range(self.p)]


# ---------------------------------------------------------------------------
# Polynom
# ---------------------------------------------------------------------------

def uni(F: Field, coeffs: Dict[int, object], var=x) -> Poly:
    """Envariabelpolynom {grad: koefficient} i x eller y."""
    data = {(k,): F(c) for k, c in coeffs.items()}
    data = {k: c for k, c in data.items() if not F.is_zero(c)}
    if not data:
        return Poly(0, var, domain=F.domain)
    return Poly.from_dict(data, var, domain=F.domain)


def bi(F: Field, coeffs: Dict[Tuple[int, int], object]) -> Poly:
    """Tvåvariabelpolynom {(x-grad, y-grad): koefficient}."""
    data = {k: F(c) for k, c in coeffs.items()}
    data = {k: c for k, c in data.items() if not F.is_zero(c)}
    if not data:
        return Poly(0, x, y, domain=F.domain)
    return Poly.from_dict(data, x, y, domain=F.domain)


def bi_const(F: Field, c) -> Poly:
    return bi(F, {(0, 0): c})


def bi_zero(F: Field) -> Poly:
    return Poly(0, x, y, domain=F.domain)


def to_bi(F: Field, p: Poly) -> Poly:
    """Lyfter ett envariabelpolynom (eller en skalär) till gens (x, y)."""
    if not isinstance(p, Poly):
        return bi_const(F, p)
    if p.gens == (x, y):
        return p
    if p.gens == (x,):
        return bi(F, {(k[0], 0): c for k, c in p.as_dict(native=True).items()})
    if p.gens == (y,):
        return bi(F, {(0, k[0]): c for k, c in p.as_dict(native=True).items()})
    raise ValueError(f"Okända generatorer: {p.gens}")


def scalar_of(F: Field, p: Poly):
    """Den konstanta termen (hela värdet för ett konstant polynom)."""
    return p.as_dict(native=True).get((0,) * len(p.gens), F.zero)


def is_scalar(p: Poly) -> bool:
    return p.is_zero or p.is_ground


def degrees_xy(p: Poly) -> Tuple[int, int]:
    """Högsta grad i x respektive y (0 för nollpolynomet)."""
    data = to_bi_dict(p)
    if not data:
        return (0, 0)
    return (max(k[0] for k in data), max(k[1] for k in data))


def to_bi_dict(p: Poly) -> Dict[Tuple[int, int], object]:
    if p.gens == (x, y):
        return p.as_dict(native=True)
    if p.gens == (x,):
        return {(k[0], 0): c for k, c in p.as_dict(native=True).items()}
    return {(0, k[0]): c for k, c in p.as_dict(native=True).items()}


def swap_xy(F: Field, p: Poly) -> Poly:
    """Byter plats på x och y."""
    return bi(F, {(b, a): c for (a, b), c in to_bi_dict(p).items()})


def substitute_y_by_x(F: Field, p: Poly) -> Poly:
    """f(x, y) -> f(x, x) som envariabelpolynom i x."""
    out: Dict[int, object] = {}
    for (a, b), c in to_bi_dict(p).items():
        out[a + b] = out.get(a + b, F.zero) + c
    return uni(F, out, x)


def as_var(F: Field, p: Poly, var) -> Poly:
    """Tolkar ett envariabelpolynom i variabeln ``var``."""
    data = p.as_dict(native=True)
    return uni(F, {k[0]: c for k, c in data.items()}, var)


def poly_eval(F: Field, p: Poly, value):
    """Värdet av ett envariabelpolynom i en skalär."""
    total = F.zero
    for (k,), c in p.as_dict(native=True).items():
        total += c * value ** k
    return total


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """
    Normerad största gemensamma delare.

    Args:
        p: Envariabelpolynom
        q: Envariabelpolynom i samma variabel

    Returns:
        Normerad sgd; sgd(0, 0) = 0
    """
    if p.gens != q.gens:
        raise ValueError(f"Olika variabler: {p.gens} och {q.gens}")
    if p.is_zero and q.is_zero:
        return p
    return p.gcd(q).monic()


def split_xy(F: Field, f: Poly) -> Tuple[Poly, Poly, Poly]:
    """
    Delar upp f = alpha(x) * h(x, y) * beta(y).

    alpha är innehållet av f i (k[x])[y], beta innehållet av f/alpha i
    (k[y])[x]; båda normerade, konstanten hamnar i h.

    Args:
        F: Arbetskroppen
        f: Tvåvariabelpolynom

    Returns:
        (alpha, h, beta) med alpha i x och beta i y

    Raises:
        ZeroPolynomial: Om f = 0
    """
    f = to_bi(F, f)
    if f.is_zero:
        raise ZeroPolynomial("split_xy kräver f ≠ 0")
    data = f.as_dict(native=True)

    by_y: Dict[int, Dict[int, object]] = {}
    for (a, b), c in data.items():
        by_y.setdefault(b, {})[a] = c
    alpha = Poly(0, x, domain=F.domain)
    for part in by_y.values():
        alpha = poly_gcd(alpha, uni(F, part, x))
    f1 = f.exquo(to_bi(F, alpha))

    by_x: Dict[int, Dict[int, object]] = {}
    for (a, b), c in f1.as_dict(native=True).items():
        by_x.setdefault(a, {})[b] = c
    beta = Poly(0, y, domain=F.domain)
    for part in by_x.values():
        beta = poly_gcd(beta, uni(F, part, y))
    h = f1.exquo(to_bi(F, beta))
    return alpha, h, beta


def _radical_divides(F: Field, g: Poly, phi: Poly) -> bool:
    """Sant om varje irreducibel faktor i g delar phi (upprepad sgd-extraktion)."""
    while g.degree() > 0:
        d = poly_gcd(g, phi)
        if d.degree() <= 0:
            return False
        g = g.exquo(d)
    return True


def invertible_in_localization(F: Field, f: Poly, phi_x: Poly, phi_y: Poly) -> bool:
    """
    Avgör om f är inverterbart i k[x, y, phi_x(x)^-1, phi_y(y)^-1].

    Args:
        F: Arbetskroppen
        f: Tvåvariabelpolynom
        phi_x: Lokaliseringspolynom i x
        phi_y: Lokaliseringspolynom i y

    Returns:
        True om h är en nollskild konstant och alpha, beta bara har
        faktorer som delar phi_x respektive phi_y

    Raises:
        ZeroPolynomial: Om f = 0
    """
    alpha, h, beta = split_xy(F, f)
    if not h.is_ground:
        return False
    return (_radical_divides(F, alpha, as_var(F, phi_x, x))
            and _radical_divides(F, beta, as_var(F, phi_y, y)))


def rational_linear_roots(F: Field, p: Poly) -> List[Tuple[object, int]]:
    """
    Rötter med multiplicitet för ett polynom som spjälkas i linjära faktorer.

    Args:
        F: Arbetskroppen
        p: Nollskilt envariabelpolynom

    Returns:
        Lista (rot, multiplicitet) sorterad efter kroppens ordning

    Raises:
        ZeroPolynomial: Om p = 0
        NonSplitSpectrum: Om en icke-linjär faktor återstår
    """
    if p.is_zero:
        raise ZeroPolynomial("rational_linear_roots kräver p ≠ 0")
    if p.degree() <= 0:
        return []
    _, factors = p.factor_list()
    roots = []
    residual = None
    for g, mult in factors:
        if g.degree() == 1:
            coeffs = g.monic().as_dict(native=True)
            roots.append((-coeffs.get((0,), F.zero), mult))
        else:
            part = g ** mult
            residual = part if residual is None else residual * part
    if residual is not None:
        raise NonSplitSpectrum(residual)
    roots.sort(key=lambda rm: F.key(rm[0]))
    return roots


def product(F: Field, polys: Sequence[Poly], var=x) -> Poly:
    out = uni(F, {0: 1}, var)
    for p in polys:
        out = out * as_var(F, p, var)
    return out


def poly_to_json(F: Field, p: Poly) -> Dict[str, str]:
    """{"x^a y^b": "c"} för både en- och tvåvariabelpolynom."""
    out = {}
    for (a, b), c in sorted(to_bi_dict(p).items()):
        out[f"x^{a} y^{b}"] = F.format(c)
    return out


def poly_from_json(F: Field, data, var=None) -> Poly:
    """
    Läser ett polynom från JSON.

    Args:
        F: Arbetskroppen
        data: Koefficientavbildning {"x^a y^b": "c"} eller en skalärsträng
        var: None ger ett tvåvariabelpolynom, annars ett envariabelpolynom i var
    """
    if isinstance(data, (str, int)):
        data = {"x^0 y^0": str(data)}
    coeffs: Dict[Tuple[int, int], object] = {}
    for key, value in data.items():
        a = b = 0
        for part in key.split():
            name, _, exp = part.partition("^")
            deg = int(exp) if exp else 1
            if name == "x":
                a = deg
            elif name == "y":
                b = deg
            else:
                raise ValueError(f"Okänd monomnyckel: {key}")
        coeffs[(a, b)] = F(coeffs.get((a, b), F.zero)) + F.parse(str(value))
    if var is None:
        return bi(F, coeffs)
    if var == x:
        if any(b for (_, b) in coeffs):
            raise ValueError("Polynomet får bara innehålla x")
        return uni(F, {a: c for (a, _), c in coeffs.items()}, x)
    if any(a for (a, _) in coeffs):
        raise ValueError("Polynomet får bara innehålla y")
    return uni(F, {b: c for (_, b), c in coeffs.items()}, y)


def poly_str(p: Poly) -> str:
    return str(p.as_expr())


# ---------------------------------------------------------------------------
# Matriser
# ---------------------------------------------------------------------------

def zeros(F: Field, m: int, n: int) -> Matrix:
    return [[F.zero for _ in range(n)] for _ in range(m)]


def identity(F: Field, n: int) -> Matrix:
    out = zeros(F, n, n)
    for i in range(n):
        out[i][i] = F.one
    return out


def shape(A: Matrix, ncols: Optional[int] = None) -> Tuple[int, int]:
    if not A:
        return (0, ncols or 0)
    return (len(A), len(A[0]))


def to_matrix(F: Field, rows) -> Matrix:
    """Konverterar nästlade listor av tal eller strängar till kroppselement."""
    return [[F(v) for v in row] for row in rows]


def matrix_to_json(F: Field, A: Matrix) -> List[List[str]]:
    return [[F.format(v) for v in row] for row in A]


def _dm(F: Field, A: Matrix, m: int, n: int) -> DomainMatrix:
    return DomainMatrix([list(row) for row in A], (m, n), F.domain)


def _rows(F: Field, dm: DomainMatrix) -> Matrix:
    m, n = dm.shape
    if m == 0 or n == 0:
        return zeros(F, m, n)
    M = dm.to_Matrix()
    return [[F.domain.from_sympy(M[i, j]) for j in range(n)] for i in range(m)]


def mat_mul(F: Field, A: Matrix, B: Matrix, n_inner: Optional[int] = None,
            n_cols: Optional[int] = None) -> Matrix:
    """Matrisprodukt; tomma former anges med n_inner/n_cols."""
    m = len(A)
    k = len(A[0]) if A else (n_inner or 0)
    if len(B) != k:
        raise ShapeMismatch(f"Kan inte multiplicera {m}x{k} med {len(B)}x?")
    n = len(B[0]) if B else (n_cols or 0)
    if m == 0 or n == 0:
        return zeros(F, m, n)
    if k == 0:
        return zeros(F, m, n)
    return _rows(F, _dm(F, A, m, k) * _dm(F, B, k, n))


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    if shape(A) != shape(B):
        raise ShapeMismatch(f"Olika former: {shape(A)} och {shape(B)}")
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A: Matrix, B: Matrix) -> Matrix:
    if shape(A) != shape(B):
        raise ShapeMismatch(f"Olika former: {shape(A)} och {shape(B)}")
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(c, A: Matrix) -> Matrix:
    return [[c * a for a in row] for row in A]


def transpose(A: Matrix, ncols: int = 0) -> Matrix:
    if not A:
        return [[] for _ in range(ncols)]
    return [list(col) for col in zip(*A)]


def mat_equal(A: Matrix, B: Matrix) -> bool:
    return shape(A) == shape(B) and all(a == b for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def mat_pow(F: Field, A: Matrix, k: int) -> Matrix:
    out = identity(F, len(A))
    for _ in range(k):
        out = mat_mul(F, out, A)
    return out


def rref(F: Field, A: Matrix, ncols: Optional[int] = None) -> Tuple[Matrix, List[int]]:
    """Reducerad trappstegsform och pivotkolumner."""
    m, n = shape(A, ncols)
    if m == 0 or n == 0:
        return zeros(F, m, n), []
    R, pivots = _dm(F, A, m, n).rref()
    return _rows(F, R), list(pivots)


def rank(F: Field, A: Matrix, ncols: Optional[int] = None) -> int:
    return len(rref(F, A, ncols)[1])


def nullspace(F: Field, A: Matrix, ncols: int) -> List[List[object]]:
    """
    Bas för nollrummet {v : A v = 0}, byggd från pivoterna i rref.

    Args:
        F: Arbetskroppen
        A: Ekvationsmatris (kan vara tom)
        ncols: Antal obekanta

    Returns:
        Lista av basvektorer, en per fri kolumn
    """
    R, pivots = rref(F, A, ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [F.zero] * ncols
        v[free] = F.one
        for i, pc in enumerate(pivots):
            v[pc] = -R[i][free]
        basis.append(v)
    return basis


def solve(F: Field, A: Matrix, b: Sequence[object], ncols: int) -> Optional[List[object]]:
    """En lösning till A v = b (fria variabler noll), eller None."""
    m = len(A)
    if m == 0:
        return [F.zero] * ncols
    aug = [list(A[i]) + [b[i]] for i in range(m)]
    R, pivots = rref(F, aug, ncols + 1)
    if ncols in pivots:
        return None
    v = [F.zero] * ncols
    for i, pc in enumerate(pivots):
        v[pc] = R[i][ncols]
    return v


def mat_inv(F: Field, A: Matrix) -> Matrix:
    """
    Invers av en kvadratisk matris.

    Raises:
        NotInvertible: Om matrisen är singulär
    """
    n = len(A)
    if n == 0:
        return []
    if any(len(row) != n for row in A):
        raise ShapeMismatch("Invers kräver en kvadratisk matris")
    if rank(F, A) < n:
        raise NotInvertible("Matrisen är singulär")
    return _rows(F, _dm(F, A, n, n).inv())


def charpoly(F: Field, A: Matrix) -> Poly:
    n = len(A)
    if n == 0:
        return uni(F, {0: 1}, x)
    coeffs = _dm(F, A, n, n).charpoly()
    return Poly.from_list(list(coeffs), x, domain=F.domain)


def poly_matrix_det(F: Field, P: List[List[Poly]]) -> Poly:
    """Determinanten av en kvadratisk matris med tvåvariabelpolynom som poster."""
    n = len(P)
    if n == 0:
        return bi_const(F, 1)
    ring = F.domain[x, y]
    rows = [[ring.from_sympy(to_bi(F, p).as_expr()) for p in row] for row in P]
    det = DomainMatrix(rows, (n, n), ring).det()
    return Poly(ring.to_sympy(det), x, y, domain=F.domain)
