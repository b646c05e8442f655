#!/usr/bin/env python3
"""
Demo script som visar MatrixProblem-systemets funktionalitet.

Detta script demonstrerar hela arbetsflödet från en algebratabell till
bocs-lagret, kanoniska former, kantade matriser, återuppspelning och
sökningen efter vilda konfigurationer.
"""

import sys
from pathlib import Path

# Lägg till matrixproblem till Python-sökvägen
sys.path.insert(0, str(Path(__file__).parent))

from matrixproblem.modules import workflow
from matrixproblem.modules.analysis import classify_local, detect_drozd
from matrixproblem.modules.bocs import layer_of
from matrixproblem.modules.core import representation_from_json
from matrixproblem.modules.exactalg import NonSplitSpectrum, poly_str
from matrixproblem.modules.models import RepresentationJSON
from matrixproblem.modules.report import trace_table
from matrixproblem.modules.reduce import canonical_form, indecomposable, iso
from matrixproblem.modules.settings import configure_logging, load_settings

DATA = Path(__file__).parent / "matrixproblem" / "data"


def print_section(title):
    """Hjälpfunktion för att skriva ut sektionstitlar."""
    print("\n" + "=" * 70)
    print(f"  {title}")
    print("=" * 70 + "\n")


def _rep(prob, sizes, **arrows):
    return representation_from_json(RepresentationJSON(sizes=sizes, arrows=arrows), prob)


def main():
    settings = load_settings()
    configure_logging(settings)
    print_section("MatrixProblem - Systemdemo")

    # 1. Algebra -> bipartit problem -> lager
    print_section("1. Från algebratabell till bocs-lager")
    prob = workflow.algebra_to_problem(str(DATA / "example_145.json"), settings)
    layer = layer_of(prob)
    print(f"✓ t = {prob.t}, klasser: {[c.label for c in prob.classes]}")
    for name, ts in layer.delta_solid.items():
        print(f"  δ({name}) = {ts.render()}")

    # 2. Kanonisk form under likformighet
    print_section("2. Kanonisk form och isomorfi")
    similarity = workflow.load_problem(str(DATA / "one_matrix_similarity.json"))
    J = _rep(similarity, [2], a=[[1, 1], [0, 1]])
    cf, trace = canonical_form(similarity, J)
    print(f"✓ J2(1): dim {cf.dim}, {cf.links} länkar, odelbar: {indecomposable(similarity, J)}")
    print(trace_table(trace).to_string(index=False))
    other = _rep(similarity, [2], a=[[1, 0], [5, 1]])
    print(f"\n✓ [[1, 0], [5, 1]] isomorf med J2(1): {iso(similarity, J, other)}")

    rotation = _rep(similarity, [2], a=[[0, -1], [1, 0]])
    try:
        canonical_form(similarity, rotation)
    except NonSplitSpectrum as e:
        print(f"  (Rotationen spjälkas inte över Q: rest {poly_str(e.residual)})")

    # 3. Kantade matriser
    print_section("3. Kantad matris och parallell följd")
    equivalence = workflow.load_problem(str(DATA / "one_matrix_equivalence.json"))
    report = workflow.bordered_report(equivalence, _rep(equivalence, [1, 1], a=[[1]]), 1)
    print(f"✓ Tillagd kolumn: {report['added_column']}, systemen stämmer: {report['systems_agree']}")
    for step in report["trace"]["steps"]:
        print(f"  {step['kind']:<16s} fall {step.get('case')}")

    # 4. Återuppspelning
    print_section("4. Symbolisk återuppspelning")
    stages = workflow.replay(prob, workflow.load_steps(str(DATA / "replay_merged_loop.json")))
    for i, (p, _) in enumerate(stages):
        print(f"  Steg {i}: t = {p.t:>3d}, {len(p.M1):>2d} heldragna, {len(p.K1):>2d} streckade")
    final = stages[-1][1]
    verdict = classify_local(final)
    print(f"\n✓ Lokal klassificering: {verdict.tag} vid {verdict.arrow}")

    # 5. Vilda konfigurationer
    print_section("5. Vilda konfigurationer")
    for name in ["mw1.json", "mw2.json"]:
        p = workflow.load_problem(str(DATA / name))
        v = detect_drozd(layer_of(p))
        print(f"  {name:<12s} -> {v.tag}")
    verdict = workflow.wild_search(workflow.load_problem(str(DATA / "two_loops.json")), settings)
    print(f"  two_loops    -> {verdict.tag} (stig: {verdict.path or 'start'})")

    print_section("Demo klar")


if __name__ == "__main__":
    main()
