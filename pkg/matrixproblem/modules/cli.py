"""
Kommandoradsgränssnitt för MatrixProblem.

Användning:
    python -m matrixproblem.modules.cli canon -p problem.json -r rep.json --out ut/
    python -m matrixproblem.modules.cli wild -p problem.json --depth 4

Varje underkommando läser JSON, validerar det mot modellerna i models och
skriver en deterministisk JSON-rapport till stdout eller till --out.
Exit-koder: 0 vid framgång, 2 vid valideringsfel, 3 när ett spektrum inte
ligger i kroppen.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from . import workflow
from .bocs import layer_of, layer_to_json
from .core import problem_to_json
from .exactalg import MatrixProblemError, NonSplitSpectrum
from .models import schema_of
from .report import dumps, write_json
from .settings import configure_logging, load_settings, merge_cli_overrides

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NON_SPLIT = 3


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", help="Arbetskropp: rational eller gf:p")
    common.add_argument("--depth", type=int, help="Sökdjup för wild")
    common.add_argument("--out", help="Katalog för utdata (annars stdout)")
    common.add_argument("--config", help="Alternativ engine.yaml")
    common.add_argument("-v", "--verbose", action="store_true", help="Loggning på DEBUG-nivå")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="matrixproblem",
                                     description="Exakta reduktioner av matrisproblem")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("from-algebra", parents=[common], help="algebra.json/quiver.json → problem.json")
    p.add_argument("algebra")

    p = sub.add_parser("layer", parents=[common], help="problem.json → layer.json")
    p.add_argument("-p", "--problem", required=True)

    p = sub.add_parser("canon", parents=[common], help="Kanonisk form och spår")
    p.add_argument("-p", "--problem", required=True)
    p.add_argument("-r", "--rep", required=True)

    p = sub.add_parser("iso", parents=[common], help="Isomorfi mellan två representationer")
    p.add_argument("-p", "--problem", required=True)
    p.add_argument("-r", "--rep", action="append", required=True)

    p = sub.add_parser("morphism", parents=[common], help="Prövar om f är en morfism P → Q")
    p.add_argument("-p", "--problem", required=True)
    p.add_argument("-r", "--rep", action="append", required=True)
    p.add_argument("-f", "--morphism", required=True)

    p = sub.add_parser("indec", parents=[common], help="Odelbarhet")
    p.add_argument("-p", "--problem", required=True)
    p.add_argument("-r", "--rep", required=True)

    p = sub.add_parser("bordered", parents=[common], help="Kantad representation och parallellt spår")
    p.add_argument("-p", "--problem", required=True)
    p.add_argument("-r", "--rep", required=True)
    p.add_argument("-c", "--cls", type=int, required=True, help="Index för kolumnklassen Z")

    p = sub.add_parser("wild", parents=[common], help="Begränsad sökning efter vilda konfigurationer")
    p.add_argument("-p", "--problem", required=True)

    p = sub.add_parser("replay", parents=[common], help="Spela upp symboliska steg")
    p.add_argument("-p", "--problem", required=True)
    p.add_argument("-s", "--steps", required=True)

    p = sub.add_parser("schema", parents=[common], help="JSON-schema för en modell")
    p.add_argument("name")
    return parser


def _emit(outputs: Dict[str, Any], out_dir: Optional[str]) -> None:
    if out_dir is None:
        payload = next(iter(outputs.values())) if len(outputs) == 1 else outputs
        sys.stdout.write(dumps(payload) + "\n")
        return
    for name, obj in outputs.items():
        write_json(obj, str(Path(out_dir) / name))


def _dispatch(args: argparse.Namespace, settings) -> Dict[str, Any]:
    cmd = args.command
    if cmd == "schema":
        return {f"{args.name}.schema.json": schema_of(args.name)}
    if cmd == "from-algebra":
        return {"problem.json": problem_to_json(workflow.algebra_to_problem(args.algebra, settings))}
    prob = workflow.load_problem(args.problem, args.field)
    if cmd == "layer":
        return {"layer.json": layer_to_json(layer_of(prob))}
    if cmd == "canon":
        report = workflow.canonical_report(prob, workflow.load_representation(args.rep, prob))
        return {"canonical.json": report["canonical"], "trace.json": report["trace"]}
    if cmd == "iso":
        if len(args.rep) != 2:
            raise ValueError("iso kräver exakt två representationer (-r två gånger)")
        P, Q = (workflow.load_representation(r, prob) for r in args.rep)
        return {"iso.json": workflow.iso_report(prob, P, Q)}
    if cmd == "morphism":
        if len(args.rep) != 2:
            raise ValueError("morphism kräver exakt två representationer (-r två gånger)")
        P, Q = (workflow.load_representation(r, prob) for r in args.rep)
        f = workflow.load_morphism(args.morphism, prob)
        return {"morphism.json": workflow.morphism_report(prob, P, Q, f)}
    if cmd == "indec":
        return {"indec.json": workflow.indec_report(prob, workflow.load_representation(args.rep, prob))}
    if cmd == "bordered":
        rep = workflow.load_representation(args.rep, prob)
        return {"bordered.json": workflow.bordered_report(prob, rep, args.cls)}
    if cmd == "wild":
        verdict = workflow.wild_search(prob, settings)
        return {"verdict.json": verdict.to_json(prob.field)}
    if cmd == "replay":
        return {"replay.json": workflow.replay_report(prob, workflow.load_steps(args.steps))}
    raise ValueError(f"Okänt kommando: {cmd}")


def _error(exc: Exception) -> Dict[str, Any]:
    report = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, NonSplitSpectrum):
        report["residual"] = str(exc.residual.as_expr())
    return report


def run(argv: Optional[List[str]] = None) -> int:
    """
    Kör ett underkommando.

    Returns:
        Exit-koden
    """
    args = build_parser().parse_args(argv)
    try:
        settings = merge_cli_overrides(
            load_settings(args.config),
            field=args.field,
            wild_depth=args.depth,
            log_level="DEBUG" if args.verbose else None,
        )
        configure_logging(settings)
        _logger.info("Kommando %s", args.command)
        _emit(_dispatch(args, settings), args.out)
        return EXIT_OK
    except NonSplitSpectrum as exc:
        _logger.error("%s", exc)
        _emit({"error.json": _error(exc)}, args.out)
        return EXIT_NON_SPLIT
    except (MatrixProblemError, ValueError, KeyError, FileNotFoundError, yaml.YAMLError,
            json.JSONDecodeError) as exc:
        _logger.error("%s: %s", type(exc).__name__, exc)
        _emit({"error.json": _error(exc)}, args.out)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
