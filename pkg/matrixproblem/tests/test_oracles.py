"""
Test oracles functionality.

Testsuite som jämför motorn med uttömmande uppräkning över GF(2) och GF(3):
isomorfi och odelbarhet räknas ut direkt ur de tillåtna transformationerna,
och det definierande systemet jämförs med kommutanten vid varje front.
"""

import itertools
import json
import random
from pathlib import Path

import pytest

from matrixproblem.modules.core import (
    Morphism,
    Representation,
    assemble,
    assemble_morphism,
    disassemble,
    problem_from_json,
    representation_from_json,
)
from matrixproblem.modules.exactalg import (
    Field,
    NonSplitSpectrum,
    mat_mul,
    mat_sub,
    nullspace,
    rank,
    zeros,
)
from matrixproblem.modules.ingest import bipartite_problem, load_algebra
from matrixproblem.modules.models import ProblemJSON, RepresentationJSON
from matrixproblem.modules.reduce import canonical_form, indecomposable, iso

DATA = Path(__file__).resolve().parent.parent / "data"


def _problem(name, F):
    if name == "example_145.json":
        return bipartite_problem(load_algebra(str(DATA / name), F))
    with open(DATA / name, 'r', encoding='utf-8') as f:
        return problem_from_json(ProblemJSON(**json.load(f)), F)


def _elementary(prob, sizes):
    """En morfism per variabel: först Z_X per klass, sedan Z_j per K₁-bas, radvis."""
    F = prob.field
    alg = prob.algebra
    zero_classes = {idx: zeros(F, alg.class_size(sizes, idx), alg.class_size(sizes, idx))
                    for idx in range(len(prob.classes))}
    out = []
    for idx in range(len(prob.classes)):
        m = alg.class_size(sizes, idx)
        for r in range(m):
            for c in range(m):
                E = zeros(F, m, m)
                E[r][c] = F.one
                out.append(Morphism(classes={**zero_classes, idx: E}))
    for V in prob.K1:
        m, n = alg.class_size(sizes, V.src), alg.class_size(sizes, V.tgt)
        for r in range(m):
            for c in range(n):
                E = zeros(F, m, n)
                E[r][c] = F.one
                out.append(Morphism(classes=zero_classes, dotted={V.name: E}))
    return out


def _nullspace_mod(p, rows, n):
    """Nollrummet och rangen modulo p med vanlig gausselimination."""
    rows = [[v % p for v in row] for row in rows]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], p - 2, p)
        rows[r] = [v * inv % p for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                k = rows[i][c]
                rows[i] = [(a - k * b) % p for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    basis = []
    for free in (c for c in range(n) if c not in pivots):
        v = [0] * n
        v[free] = 1
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][free] % p
        basis.append(v)
    return basis, len(pivots)


def _mul_mod(p, A, B):
    cols = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) % p for col in cols] for row in A]


class _Oracle:
    """Räknar upp alla tillåtna f med P̄·f̄ = f̄·Q̄ i heltal modulo p."""

    def __init__(self, prob, sizes):
        F = prob.field
        self.p = F.p
        self.prob = prob
        blank = Representation(sizes=list(sizes))
        self.basis = [[[F.to_int(v) for v in row] for row in assemble_morphism(f, prob, blank, blank)]
                      for f in _elementary(prob, sizes)]
        self.flat = [[v for row in B for v in row] for B in self.basis]
        self.N = sum(sizes)

    def _dense(self, P):
        return [[self.prob.field.to_int(v) for v in row] for row in assemble(P, self.prob)]

    def solutions(self, P, Q):
        p, N = self.p, self.N
        Pd, Qd = self._dense(P), self._dense(Q)
        images = []
        for B in self.basis:
            left, right = _mul_mod(p, Pd, B), _mul_mod(p, B, Qd)
            images.append([(a - b) % p for lr, rr in zip(left, right) for a, b in zip(lr, rr)])
        system = [list(col) for col in zip(*images)]
        kernel, _ = _nullspace_mod(p, system, len(self.basis))
        dense = [[sum(k[v] * self.flat[v][e] for v in range(len(k)) if k[v]) % p for e in range(N * N)]
                 for k in kernel]
        for coefs in itertools.product(range(p), repeat=len(dense)):
            flat = [sum(c * d[e] for c, d in zip(coefs, dense) if c) % p for e in range(N * N)]
            yield [flat[i * N:(i + 1) * N] for i in range(N)]

    def iso(self, P, Q):
        return any(_nullspace_mod(self.p, f, self.N)[1] == self.N for f in self.solutions(P, Q))

    def indecomposable(self, P):
        identity = [[int(i == j) for j in range(self.N)] for i in range(self.N)]
        zero = [[0] * self.N for _ in range(self.N)]
        for e in self.solutions(P, P):
            if e not in (zero, identity) and _mul_mod(self.p, e, e) == e:
                return False
        return self.N > 0


def _all_reps(prob, sizes):
    """Alla representationer med storleksvektorn sizes."""
    F = prob.field
    alg = prob.algebra
    shapes = [(A.name, alg.class_size(sizes, A.src), alg.class_size(sizes, A.tgt)) for A in prob.M1]
    count = sum(m * n for _, m, n in shapes)
    out = []
    for values in itertools.product(F.elements(), repeat=count):
        it = iter(values)
        arrows = {name: [[F.format(next(it)) for _ in range(n)] for _ in range(m)]
                  for name, m, n in shapes}
        out.append(representation_from_json(RepresentationJSON(sizes=list(sizes), arrows=arrows), prob))
    return out


def _split_reps(prob, reps):
    """Representationer vars kanoniska form finns i kroppen."""
    out = []
    for P in reps:
        try:
            canonical_form(prob, P)
        except NonSplitSpectrum:
            continue
        out.append(P)
    return out


FAMILIES = [
    ("one_matrix_equivalence.json", "gf:2", [2, 2]),
    ("one_matrix_equivalence.json", "gf:3", [1, 2]),
    ("one_matrix_similarity.json", "gf:2", [2]),
    ("one_matrix_similarity.json", "gf:3", [2]),
    ("example_145.json", "gf:2", [1] * 10),
]


class TestBruteForce:
    """Tester mot uttömmande uppräkning av de tillåtna transformationerna."""

    @pytest.mark.parametrize("name,field,sizes", FAMILIES)
    def test_iso_agrees(self, name, field, sizes):
        """Test att iso stämmer med uppräkningen för högst 200 par."""
        prob = _problem(name, Field(field))
        oracle = _Oracle(prob, sizes)
        reps = _split_reps(prob, _all_reps(prob, sizes))
        pairs = list(itertools.combinations(range(len(reps)), 2))
        rng = random.Random(len(reps))
        if len(pairs) > 200:
            pairs = rng.sample(pairs, 200)
        for i, j in pairs:
            assert iso(prob, reps[i], reps[j]) == oracle.iso(reps[i], reps[j])

    @pytest.mark.parametrize("name,field,sizes", FAMILIES)
    def test_canonical_form_is_isomorphic(self, name, field, sizes):
        """Test att P och dess kanoniska form ligger i samma bana."""
        prob = _problem(name, Field(field))
        oracle = _Oracle(prob, sizes)
        for P in _split_reps(prob, _all_reps(prob, sizes)):
            cf, _ = canonical_form(prob, P)
            assert oracle.iso(P, disassemble(cf.matrix, prob, sizes))

    @pytest.mark.parametrize("name,field,sizes", FAMILIES)
    def test_indecomposable_agrees(self, name, field, sizes):
        """Test att länkräkningen stämmer med avsaknaden av icke-triviala idempotenter."""
        prob = _problem(name, Field(field))
        oracle = _Oracle(prob, sizes)
        for P in _split_reps(prob, _all_reps(prob, sizes)):
            assert indecomposable(prob, P) == oracle.indecomposable(P)


def _commutant_checks(prob, P):
    """Observatör: systemets lösningsrum är kommutanten vid de behandlade blocken."""
    F = prob.field
    blank = Representation(sizes=list(P.sizes))
    phis = [assemble_morphism(f, prob, blank, blank) for f in _elementary(prob, P.sizes)]
    seen = []

    def check(state):
        ds = state["system"]
        Hk = state["Hk"]
        X = [mat_sub(mat_mul(F, phi, Hk), mat_mul(F, Hk, phi)) for phi in phis]
        rows = [[Xv[r][c] for Xv in X]
                for g in ds.groups for r in range(*g.rows) for c in range(*g.cols)]
        n = len(phis)
        assert len(ds.variables) == n
        commutant = nullspace(F, rows, n)
        solutions = ds.solution_basis()
        assert len(commutant) == len(solutions)
        assert rank(F, commutant + solutions, n) == len(solutions)
        seen.append(state["step"])

    return check, seen


class TestDefiningSystem:
    """Tester av det definierande systemet mot kommutanten."""

    @pytest.mark.parametrize("sizes,arrows", [
        ([1] * 10, {"a": [[1]], "b": [[-1]]}),
        ([1] * 10, {"b": [[1]], "c": [[2]]}),
        ([1] * 10, {"a": [[1]], "b": [[1]], "c": [[1]], "d": [[1]]}),
        ([2] * 5 + [1] * 5, {"a": [[1], [0]], "b": [[0], [1]]}),
    ])
    def test_every_step(self, sizes, arrows):
        """Test att lösningsrummet vid varje front är kommutanten för de behandlade blocken."""
        prob = _problem("example_145.json", Field("rational"))
        P = representation_from_json(RepresentationJSON(sizes=sizes, arrows=arrows), prob)
        check, seen = _commutant_checks(prob, P)
        _, trace = canonical_form(prob, P, observer=check)
        assert len(seen) == len([s for s in trace.steps if s.kind != "deletion"])

    def test_similarity(self):
        """Test att en ensam ögla ger kommutanten till det första blocket."""
        prob = _problem("one_matrix_similarity.json", Field("rational"))
        P = representation_from_json(
            RepresentationJSON(sizes=[3], arrows={"a": [[1, 1, 0], [0, 1, 0], [0, 0, 2]]}), prob)
        check, seen = _commutant_checks(prob, P)
        canonical_form(prob, P, observer=check)
        assert seen
