"""
Modul för Weyr-normalformer.

Beräknar Jordan-data (antal Jordanblock per storlek och egenvärde), den
unika Weyr-matrisen för en kvadratisk matris och en likformighets-
transformation f med f⁻¹·A·f = W. Allt är exakt över arbetskroppen;
egenvärdena måste ligga i kroppen, annars kastas NonSplitSpectrum.

Weyr-matrisen för egenvärdet λ med Weyr-karakteristik m_1 ≥ ... ≥ m_d har
λI på diagonalblocken och (I; 0) på blocken (j, j+1). Egenvärdesblocken
ordnas efter kroppens ordning.
"""

import logging
from typing import Any, Dict, List, Tuple

from pydantic import BaseModel, field_validator
from sympy import Poly

from .exactalg import (
    Field, Matrix, identity, mat_mul, mat_pow, mat_sub, mat_scale, nullspace,
    rank, charpoly, rational_linear_roots, poly_eval, zeros, transpose,
)

_logger = logging.getLogger(__name__)


class JordanBlock(BaseModel):
    """
    Jordan-data för ett egenvärde.

    Attributes:
        eigenvalue: Egenvärdet λ (kroppselement)
        e: Antal Jordanblock per storlek i ordningen e_d, ..., e_1
    """
    eigenvalue: Any
    e: List[int]

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator('e')
    @classmethod
    def validate_e(cls, v):
        if not v or v[0] < 1:
            raise ValueError("Största blockstorleken måste förekomma (e_d ≥ 1)")
        if any(c < 0 for c in v):
            raise ValueError("Blockantal kan inte vara negativa")
        return v

    @property
    def d(self) -> int:
        return len(self.e)

    def count(self, j: int) -> int:
        """Antal Jordanblock av storlek j."""
        if j < 1 or j > self.d:
            return 0
        return self.e[self.d - j]

    def weyr_m(self) -> List[int]:
        """m_j = e_d + ... + e_j för j = 1..d."""
        return [sum(self.count(k) for k in range(j, self.d + 1)) for j in range(1, self.d + 1)]


class JordanData(BaseModel):
    """Jordan-data för alla egenvärden, sorterade efter kroppens ordning."""
    blocks: List[JordanBlock]

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    def size(self) -> int:
        return sum(j * b.count(j) for b in self.blocks for j in range(1, b.d + 1))


class WeyrBlock(BaseModel):
    """
    Ett egenvärdesblock i en Weyr-matris.

    Attributes:
        eigenvalue: Egenvärdet λ
        m: Weyr-karakteristiken m_1 ≥ m_2 ≥ ... ≥ m_d
    """
    eigenvalue: Any
    m: List[int]

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @field_validator('m')
    @classmethod
    def validate_m(cls, v):
        if not v or v[-1] < 1:
            raise ValueError("Weyr-karakteristiken måste vara positiv")
        if any(a < b for a, b in zip(v, v[1:])):
            raise ValueError(f"Weyr-karakteristiken måste vara avtagande: {v}")
        return v

    @property
    def size(self) -> int:
        return sum(self.m)

    def e(self, j: int) -> int:
        """Antal Jordanblock av storlek j: e_j = m_j − m_{j+1}."""
        d = len(self.m)
        if j < 1 or j > d:
            return 0
        nxt = self.m[j] if j < d else 0
        return self.m[j - 1] - nxt


class WeyrForm(BaseModel):
    """
    En Weyr-matris som lista av egenvärdesblock.

    Attributes:
        blocks: Egenvärdesblock i stigande ordning
    """
    blocks: List[WeyrBlock]

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @property
    def size(self) -> int:
        return sum(b.size for b in self.blocks)

    def eigenvalues(self) -> List[Any]:
        return [b.eigenvalue for b in self.blocks]

    def matrix(self, F: Field) -> Matrix:
        """Den sammansatta täta matrisen."""
        n = self.size
        W = zeros(F, n, n)
        base = 0
        for block in self.blocks:
            offsets = []
            pos = base
            for mj in block.m:
                offsets.append(pos)
                pos += mj
            for i in range(base, pos):
                W[i][i] = block.eigenvalue
            for j in range(len(block.m) - 1):
                for k in range(block.m[j + 1]):
                    W[offsets[j] + k][offsets[j + 1] + k] = F.one
            base = pos
        return W

    def pieces(self) -> List[Tuple[Any, int, int, int]]:
        """
        Uppdelning i bitar (λ, l, j, e_j) för avvecklingen.

        Nivå l av egenvärdet λ delas i bitar efter kedjelängd j = d, ..., l;
        biten har storlek e_j. Bitar av storlek noll tas med och får filtreras
        av anroparen.
        """
        out = []
        for block in self.blocks:
            d = len(block.m)
            for l in range(1, d + 1):
                for j in range(d, l - 1, -1):
                    out.append((block.eigenvalue, l, j, block.e(j)))
        return out

    def to_json(self, F: Field) -> Dict[str, Any]:
        return {
            "blocks": [{"eigenvalue": F.format(b.eigenvalue), "m": list(b.m)} for b in self.blocks],
            "matrix": [[F.format(v) for v in row] for row in self.matrix(F)],
        }

    @classmethod
    def from_json(cls, F: Field, data: Dict[str, Any]) -> "WeyrForm":
        blocks = [WeyrBlock(eigenvalue=F.parse(str(b["eigenvalue"])), m=list(b["m"]))
                  for b in data["blocks"]]
        keys = [F.key(b.eigenvalue) for b in blocks]
        if any(a >= b for a, b in zip(keys, keys[1:])):
            raise ValueError("Egenvärdesblocken måste vara strikt ordnade")
        return cls(blocks=blocks)


def _shifted(F: Field, A: Matrix, lam) -> Matrix:
    return mat_sub(A, mat_scale(lam, identity(F, len(A))))


def _kernel_dims(F: Field, N: Matrix, target: int) -> List[int]:
    """dim ker N^k för k = 0, 1, ... tills dimensionen når target."""
    n = len(N)
    dims = [0]
    power = identity(F, n)
    while dims[-1] < target:
        power = mat_mul(F, power, N)
        dims.append(n - rank(F, power))
        if dims[-1] == dims[-2]:
            raise ValueError("Kärnkedjan stannade före den algebraiska multipliciteten")
    return dims


def _spectrum(F: Field, A: Matrix) -> List[Tuple[Any, int]]:
    return rational_linear_roots(F, charpoly(F, A))


def jordan_data(F: Field, A: Matrix) -> JordanData:
    """
    Jordan-data för en kvadratisk matris.

    e_j räknas ut från skillnader mellan dim ker (A − λ)^j.

    Args:
        F: Arbetskroppen
        A: Kvadratisk matris

    Returns:
        JordanData med ett block per egenvärde

    Raises:
        NonSplitSpectrum: Om det karakteristiska polynomet inte spjälkas
    """
    blocks = []
    for lam, mult in _spectrum(F, A):
        dims = _kernel_dims(F, _shifted(F, A, lam), mult)
        m = [dims[k] - dims[k - 1] for k in range(1, len(dims))]
        wb = WeyrBlock(eigenvalue=lam, m=m)
        d = len(m)
        blocks.append(JordanBlock(eigenvalue=lam, e=[wb.e(j) for j in range(d, 0, -1)]))
    return JordanData(blocks=blocks)


def _chains(F: Field, N: Matrix, mult: int) -> List[List[List[Any]]]:
    """
    Jordankedjor för den nilpotenta delen N på det generaliserade egenrummet.

    Returns:
        Nivålistor: levels[j-1] innehåller vektorerna på nivå j, sorterade
        efter kedjelängd (längst först); N avbildar nivå j+1 på nivå j.
    """
    n = len(N)
    dims = _kernel_dims(F, N, mult)
    d = len(dims) - 1
    kernels = [nullspace(F, mat_pow(F, N, k), n) if k else [] for k in range(d + 1)]

    levels: List[List[List[Any]]] = [[] for _ in range(d)]
    carried: List[List[Any]] = []
    for k in range(d, 0, -1):
        span = list(kernels[k - 1]) + list(carried)
        current = list(carried)
        r = rank(F, span, n) if span else 0
        for b in kernels[k]:
            trial = span + [b]
            r2 = rank(F, trial, n)
            if r2 > r:
                span, r = trial, r2
                current.append(b)
        levels[k - 1] = current
        NT = transpose(N)
        carried = [mat_mul(F, [v], NT)[0] for v in current] if k > 1 else []
    return levels


def weyr_of(F: Field, A: Matrix) -> Tuple[WeyrForm, Matrix]:
    """
    Weyr-form och likformighetstransformation.

    Args:
        F: Arbetskroppen
        A: Kvadratisk matris

    Returns:
        (W, f) där f⁻¹·A·f = W.matrix(F)

    Raises:
        NonSplitSpectrum: Om spektrum inte ligger i kroppen
    """
    n = len(A)
    columns: List[List[Any]] = []
    blocks = []
    for lam, mult in _spectrum(F, A):
        levels = _chains(F, _shifted(F, A, lam), mult)
        # nivåerna ska ligga i kedjeordning: nivå j+1:s vektor c avbildas på nivå j:s vektor c
        m = [len(level) for level in levels]
        blocks.append(WeyrBlock(eigenvalue=lam, m=m))
        for level in levels:
            columns.extend(level)
        _logger.debug("Egenvärde %s: m = %s", F.format(lam), m)
    W = WeyrForm(blocks=blocks)
    f = transpose(columns, n) if columns else []
    return W, f


def _diagonal_runs(F: Field, W: Matrix) -> List[Tuple[Any, int, int]]:
    runs = []
    start = 0
    for i in range(1, len(W) + 1):
        if i == len(W) or W[i][i] != W[start][start]:
            runs.append((W[start][start], start, i))
            start = i
    return runs


def is_weyr(F: Field, W: Matrix) -> bool:
    """
    Avgör om W är en Weyr-matris.

    W jämförs med den matris som byggs av dess egna diagonalvärden och
    Weyr-karakteristiker; egenvärdena måste vara strikt stigande.
    """
    n = len(W)
    if any(len(row) != n for row in W):
        return False
    if n == 0:
        return True
    runs = _diagonal_runs(F, W)
    keys = [F.key(lam) for lam, _, _ in runs]
    if any(a >= b for a, b in zip(keys, keys[1:])):
        return False
    blocks = []
    for lam, lo, hi in runs:
        sub = [row[lo:hi] for row in W[lo:hi]]
        try:
            dims = _kernel_dims(F, _shifted(F, sub, lam), hi - lo)
        except ValueError:
            return False
        m = [dims[k] - dims[k - 1] for k in range(1, len(dims))]
        if any(a < b for a, b in zip(m, m[1:])):
            return False
        blocks.append(WeyrBlock(eigenvalue=lam, m=m))
    expected = WeyrForm(blocks=blocks).matrix(F)
    return all(a == b for ra, rb in zip(expected, W) for a, b in zip(ra, rb))


def is_regular(F: Field, W: WeyrForm, forbidden: Poly) -> bool:
    """Sant om forbidden(λ) ≠ 0 för varje egenvärde λ i W."""
    return all(not F.is_zero(poly_eval(F, forbidden, lam)) for lam in W.eigenvalues())


def weyr_from_matrix(F: Field, W: Matrix) -> WeyrForm:
    """WeyrForm för en matris som redan är en Weyr-matris."""
    if not is_weyr(F, W):
        raise ValueError("Matrisen är inte en Weyr-matris")
    form, _ = weyr_of(F, W)
    return form
