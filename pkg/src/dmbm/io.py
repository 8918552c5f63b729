"""Result tables and their CSV / JSON serialization.

A table is a list of columns plus rows of scalars (int, float, str or
None). Floats are written with ``repr`` so that reading a file back and
writing it again reproduces it byte for byte. CSV output carries its run
metadata in a ``<name>.meta.json`` sidecar; JSON output embeds it.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__

FORMATS = ("csv", "json")


@dataclass
class ResultTable:
    kind: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]


def run_metadata(spec: dict, seed: int) -> dict:
    """Seed, version, timestamp and the fully resolved spec.

    The timestamp honours ``SOURCE_DATE_EPOCH`` so that repeated runs can
    be made byte-identical.
    """
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch is not None else int(time.time())
    stamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))
    return {"version": f"v{__version__}", "seed": seed, "timestamp": stamp, "spec": spec}


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _json_value(v):
    # JSON has no NaN/inf literals; store them as strings
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def to_json(table: ResultTable) -> str:
    doc = {
        "kind": table.kind,
        "metadata": table.metadata,
        "columns": table.columns,
        "rows": [{c: _json_value(v) for c, v in zip(table.columns, r)} for r in table.rows],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def write_results(table: ResultTable, path, fmt: str = "csv") -> Path:
    """Write ``table``; raises OSError if the destination is unwritable."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path.write_text(to_json(table), encoding="utf-8")
    else:
        path.write_text(to_csv(table), encoding="utf-8")
        meta = {"kind": table.kind, "columns": table.columns, "metadata": table.metadata}
        sidecar_path(path).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return path


def read_results(path) -> tuple[ResultTable, str]:
    """Load a results file; returns the table and its format."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        cols = doc["columns"]
        rows = []
        for rec in doc["rows"]:
            row = []
            for c in cols:
                v = rec[c]
                if isinstance(v, str) and v in ("nan", "inf", "-inf"):
                    v = float(v)
                row.append(v)
            rows.append(row)
        return ResultTable(doc["kind"], cols, rows, doc["metadata"]), "json"
    reader = csv.reader(io.StringIO(text))
    cols = next(reader)
    rows = [[_parse(x) for x in r] for r in reader]
    kind, meta = "", {}
    side = sidecar_path(path)
    if side.exists():
        doc = json.loads(side.read_text(encoding="utf-8"))
        kind, meta = doc.get("kind", ""), doc.get("metadata", {})
    return ResultTable(kind, cols, rows, meta), "csv"
