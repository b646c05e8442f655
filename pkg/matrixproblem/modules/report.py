"""
Modul för rapporter över reduktionsspår.

Spåren görs om till pandas-tabeller för sammanställning, och alla
JSON-utdata skrivs deterministiskt (sorterade nycklar) så att två körningar
på samma indata ger identiska filer.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict

import pandas as pd

from .reduce import ReductionTrace

_logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["step", "kind", "arrow", "rows", "cols", "sizes_before", "sizes_after", "links"]


def trace_table(trace: ReductionTrace) -> pd.DataFrame:
    """
    En rad per reduktionssteg.

    Args:
        trace: Reduktionsspåret

    Returns:
        DataFrame med kolumnerna step, kind, arrow, rows, cols,
        sizes_before, sizes_after och links
    """
    rows = [{
        "step": i,
        "kind": s.kind,
        "arrow": s.arrow,
        "rows": tuple(s.rows) if s.rows else None,
        "cols": tuple(s.cols) if s.cols else None,
        "sizes_before": tuple(s.sizes_before),
        "sizes_after": tuple(s.sizes_after),
        "links": s.links,
    } for i, s in enumerate(trace.steps)]
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def trace_summary(trace: ReductionTrace) -> Dict[str, Any]:
    """Antal steg per typ och totalt antal länkar."""
    df = trace_table(trace)
    if df.empty:
        return {"steps": 0, "by_kind": {}, "links": 0}
    counts = df.groupby("kind")["step"].count()
    return {
        "steps": int(len(df)),
        "by_kind": {str(k): int(v) for k, v in counts.items()},
        "links": int(df["links"].sum()),
    }


def dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True)


def write_json(obj: Any, path: str) -> Path:
    """
    Skriver obj som JSON med sorterade nycklar.

    Returns:
        Sökvägen som skrevs
    """
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, 'w', encoding='utf-8') as f:
        f.write(dumps(obj))
        f.write("\n")
    _logger.info("Skrev %s", out)
    return out
