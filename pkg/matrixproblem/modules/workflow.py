"""
Modul för att koordinera arbetsflödet mellan modulerna i MatrixProblem.

Funktionerna här läser filer, kör motorn och sätter ihop rapporterna som
CLI:t och demonstrationen skriver ut, t.ex:
- Läsa algebra -> Bipartit problem -> Bocs-lager
- Läsa problem och representation -> Kanonisk form -> Spår och sammanfattning
- Läsa problem och stegfil -> Återuppspelning -> Lager efter varje steg

Detta är integrationsskiktet; modulerna under det vet inget om filer.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .analysis import WildVerdict, bordered, bordered_sequence, search_configurations, systems_agree
from .bocs import BocsLayer, check_morphism_formula, layer_of, layer_to_json
from .core import (
    Morphism, ProblemSpec, Representation, disassemble, is_morphism, morphism_from_json,
    morphism_to_json, problem_from_json, problem_to_json, representation_from_json,
    representation_to_json,
)
from .exactalg import Field
from .ingest import bipartite_problem, load_algebra
from .models import EngineSettings, MorphismJSON, ProblemJSON, ReplayJSON, RepresentationJSON
from .reduce import (
    ReductionStep, apply_reduction, canonical_form, canonical_to_json, iso, step_from_json,
    trace_to_json,
)
from .report import trace_summary

_logger = logging.getLogger(__name__)


def _read_json(path: str) -> Any:
    file = Path(path)
    if not file.exists():
        raise FileNotFoundError(f"Fil hittades inte: {path}")
    with open(file, 'r', encoding='utf-8') as f:
        return json.load(f)


def load_problem(path: str, field: Optional[str] = None) -> ProblemSpec:
    """
    Läser problem.json.

    Args:
        path: Sökväg till filen
        field: Kropp från kommandoraden; vinner över filens "field"
    """
    data = ProblemJSON(**_read_json(path))
    return problem_from_json(data, Field(field) if field else None)


def load_representation(path: str, prob: ProblemSpec) -> Representation:
    return representation_from_json(RepresentationJSON(**_read_json(path)), prob)


def load_morphism(path: str, prob: ProblemSpec) -> Morphism:
    return morphism_from_json(MorphismJSON(**_read_json(path)), prob)


def load_steps(path: str) -> List[ReductionStep]:
    return [step_from_json(s) for s in ReplayJSON(**_read_json(path)).steps]


def algebra_to_problem(path: str, settings: Optional[EngineSettings] = None) -> ProblemSpec:
    """algebra.json eller quiver.json -> det bipartita problemet."""
    settings = settings or EngineSettings()
    tab = load_algebra(path, Field(settings.field), settings.max_path_length)
    prob = bipartite_problem(tab)
    _logger.info("Bipartit problem från %s: t = %d, %d klasser, %d heldragna, %d streckade",
                 path, prob.t, len(prob.classes), len(prob.M1), len(prob.K1))
    return prob


def algebra_to_layer(path: str, settings: Optional[EngineSettings] = None) -> BocsLayer:
    """
    Fullständigt arbetsflöde från algebrafil till bocs-lager.

    1. ingest läser tabellen eller kogern
    2. bipartite_problem bygger problemet
    3. layer_of räknar ut alla differentialer
    """
    return layer_of(algebra_to_problem(path, settings))


def canonical_report(prob: ProblemSpec, rep: Representation) -> Dict[str, Any]:
    """
    Kanonisk form, spår och sammanfattning för en representation.

    Returns:
        Dictionary med nycklarna canonical, trace och summary
    """
    F = prob.field
    cf, trace = canonical_form(prob, rep)
    summary = trace_summary(trace)
    _logger.info("Kanonisk form klar: %d steg, %d länkar, dim %d", summary["steps"], cf.links, cf.dim)
    return {
        "canonical": canonical_to_json(cf, F),
        "trace": trace_to_json(trace, F),
        "summary": summary,
    }


def iso_report(prob: ProblemSpec, P: Representation, Q: Representation) -> Dict[str, Any]:
    return {"isomorphic": iso(prob, P, Q)}


def morphism_report(prob: ProblemSpec, P: Representation, Q: Representation,
                    f: Morphism) -> Dict[str, Any]:
    """
    Prövar f: P → Q både med de täta matriserna och med differentialerna.

    Returns:
        Dictionary med morfismen, is_morphism och formula; de två
        utfallen ska alltid vara lika
    """
    dense = is_morphism(P, Q, f, prob)
    formula = check_morphism_formula(P, Q, f, prob)
    if dense != formula:
        _logger.warning("Morfismtesterna skiljer sig: tät %s, formel %s", dense, formula)
    return {"morphism": morphism_to_json(f, prob), "is_morphism": dense, "formula": formula}


def indec_report(prob: ProblemSpec, rep: Representation) -> Dict[str, Any]:
    cf, _ = canonical_form(prob, rep)
    return {"indecomposable": cf.dim > 0 and cf.links == cf.dim - 1, "dim": cf.dim, "links": cf.links}


def replay(prob: ProblemSpec, steps: Sequence[ReductionStep]) -> List[Tuple[ProblemSpec, BocsLayer]]:
    """
    Spelar upp symboliska reduktionssteg.

    Returns:
        (problem, lager) för startproblemet och efter varje steg
    """
    out = [(prob, layer_of(prob))]
    for i, step in enumerate(steps, start=1):
        prob = apply_reduction(prob, step)
        out.append((prob, layer_of(prob)))
        _logger.info("Steg %d (%s): %d klasser, %d heldragna, %d streckade",
                     i, step.kind, len(prob.classes), len(prob.M1), len(prob.K1))
    return out


def replay_report(prob: ProblemSpec, steps: Sequence[ReductionStep]) -> Dict[str, Any]:
    stages = replay(prob, steps)
    return {"stages": [{"step": i, "problem": problem_to_json(p), "layer": layer_to_json(layer)}
                       for i, (p, layer) in enumerate(stages)]}


def bordered_report(prob: ProblemSpec, rep: Representation, Z: int) -> Dict[str, Any]:
    """
    Kantar representationens kanoniska form vid klassen Z.

    Returns:
        Dictionary med den kantade representationen, det parallella spåret
        och utfallet av systemjämförelsen
    """
    F = prob.field
    cf, _ = canonical_form(prob, rep)
    M = disassemble(cf.matrix, prob, rep.sizes, rep.weyr)
    _, trace = canonical_form(prob, M)
    inst = bordered(M, Z, prob)
    parallel = bordered_sequence(prob, trace, Z, M)
    return {
        "bordered": representation_to_json(inst.bordered, prob),
        "added_column": inst.added_column,
        "trace": trace_to_json(parallel, F),
        "systems_agree": systems_agree(M, inst.bordered, prob, Z),
    }


def wild_search(prob: ProblemSpec, settings: Optional[EngineSettings] = None) -> WildVerdict:
    """Begränsad sökning efter en vild konfiguration med inställningarnas tak."""
    settings = settings or EngineSettings()
    _logger.info("Vild sökning: djup %d, högst %d noder", settings.wild_depth, settings.wild_max_nodes)
    return search_configurations(prob, settings.wild_depth, settings.wild_max_nodes, settings.minor_cap)
