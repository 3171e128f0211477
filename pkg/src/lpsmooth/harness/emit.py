"""Report serialisation: canonical JSON and flat CSV."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from ..errors import LPError


class EmitError(LPError, OSError):
    """A report could not be written."""


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def to_json(report) -> str:
    """Stable key order, non-finite floats as null, trailing newline."""
    return json.dumps(_clean(report.as_dict()), sort_keys=True, indent=2) + "\n"


def to_csv(report) -> str:
    """One row per trial record; columns are the sorted union of record keys."""
    records = [_clean(r) for r in report.records]
    cols = sorted({k for r in records for k in r})
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["experiment", *cols], lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({"experiment": report.experiment,
                    **{k: "" if r.get(k) is None else r[k] for k in cols}})
    return buf.getvalue()


def emit(report, fmt: str = "json", path=None) -> str:
    """Render ``report`` and write it to ``path`` when given; returns the text."""
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown format {fmt!r}")
    text = to_json(report) if fmt == "json" else to_csv(report)
    if path is not None:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as exc:
            raise EmitError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text
