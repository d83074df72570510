"""Report emission: ``rows.csv``, ``summary.json`` and the plot-ready ``curve.csv``."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .study import StudyReport, summarize

__all__ = ["emit_report", "read_rows", "to_jsonable", "write_json", "CURVE_COLUMNS"]

CURVE_COLUMNS = ["t", "theta_hat", "lo", "hi", "truth"]


def to_jsonable(obj):
    """Replace numpy scalars and arrays by Python types and non-finite floats by ``None``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _parse(v: str):
    if v in ("true", "false"):
        return v == "true"
    try:
        return int(v)
    except ValueError:
        return float(v)


def emit_report(r: StudyReport, path, timing: bool = True) -> dict:
    """Write ``rows.csv``, ``summary.json`` and, when available, ``curve.csv`` into ``path``.

    With ``timing=False`` the wall-clock entry is dropped so identical configs
    give byte-identical files.  Returns the written summary document.
    """
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "rows.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(r.columns)
        for row in r.rows:
            w.writerow([_cell(v) for v in row])
    meta = dict(r.meta)
    if not timing:
        meta.pop("timing_s", None)
    doc = {"kind": r.kind, "summary": r.summary, "meta": meta}
    write_json(out / "summary.json", doc)
    if r.curve is not None:
        with open(out / "curve.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(CURVE_COLUMNS)
            for row in r.curve:
                w.writerow([_cell(v) for v in row])
    return to_jsonable(doc)


def read_rows(path) -> tuple[list, list]:
    """Parse a ``rows.csv`` back into ``(columns, rows)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.reader(fh)
        cols = next(rd)
        rows = [[_parse(v) for v in row] for row in rd]
    return cols, rows


def resummarize(path, kind: str) -> dict:
    """Summary recomputed from an emitted ``rows.csv``."""
    _, rows = read_rows(Path(path) / "rows.csv")
    return summarize(kind, rows)
