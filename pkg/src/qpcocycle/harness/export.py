"""Stable JSON/CSV writers and the ``export`` step for completed runs."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import jsonschema

from .config import load_schema

CSV_VERSION = 1


class ExportError(RuntimeError):
    pass


def fmt_float(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _plain(obj):
    """Reduce numpy scalars and tuples to JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "item"):
        obj = obj.item()
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else fmt_float(obj)
    return str(obj)


def _emit(obj, indent: int, level: int, out: list):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + json.dumps(k) + ": ")
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    elif isinstance(obj, float):
        out.append(fmt_float(obj))
    else:
        out.append(json.dumps(obj))


def dumps(obj, indent: int = 2) -> str:
    """Sorted-key JSON with every float written to 17 significant digits."""
    out: list[str] = []
    _emit(_plain(obj), indent, 0, out)
    return "".join(out) + "\n"


def csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt_float(float(r[c])) if isinstance(r[c], float) else r[c] for c in columns])
    return buf.getvalue()


def csv_columns(name: str) -> list[str]:
    spec = load_schema("csv_columns.json")
    if spec["version"] != CSV_VERSION:
        raise ExportError("csv column schema version mismatch")
    return spec["files"][name]


def write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


REQUIRED = ("ledger.json", "verification.json", "le_gap.csv", "manifest.json")


def export(run_dir, fmt: str) -> list[Path]:
    """Write ``export/run.json`` or ``export/steps.csv`` + ``export/le_gap.csv``.

    Output depends only on the run files, so re-export is byte-identical.
    """
    run = Path(run_dir)
    missing = [f for f in REQUIRED if not (run / f).exists()]
    if missing:
        raise ExportError(f"missing run artifacts: {', '.join(missing)}")
    ver = json.loads((run / "verification.json").read_text())
    ledger = json.loads((run / "ledger.json").read_text())
    with open(run / "le_gap.csv", newline="") as fh:
        gap_rows = list(csv.DictReader(fh))
    out_dir = run / "export"
    out_dir.mkdir(exist_ok=True)
    steps = []
    for lam_key, led in sorted(ledger["ledgers"].items(), key=lambda kv: float(kv[0])):
        for r in led["reports"]:
            steps.append({"lambda": float(lam_key), "level": r["level"], "kind": r["kind"],
                          "accepted": r["accepted"], "mu_log": r["mu_log"],
                          "angle_residual": r["angle_residual"],
                          "hyper_worst_ratio": r["hyper_worst_ratio"],
                          "support_ok": r["support_ok"], "correction_sup": r["correction_sup"]})
    if fmt == "json":
        doc = {"csv_version": CSV_VERSION, "config_digest": ver["config_digest"],
               "passed": ver["passed"], "steps": steps,
               "le_gap": [{k: _num(v) for k, v in row.items()} for row in gap_rows]}
        doc = _plain(doc)
        jsonschema.validate(json.loads(dumps(doc)), load_schema("export.schema.json"))
        path = out_dir / "run.json"
        write_text(path, dumps(doc))
        return [path]
    if fmt == "csv":
        p1 = out_dir / "steps.csv"
        write_text(p1, csv_text(steps, csv_columns("steps.csv")))
        cols = csv_columns("le_gap.csv")
        p2 = out_dir / "le_gap.csv"
        write_text(p2, csv_text([{k: _num(v) for k, v in r.items()} for r in gap_rows], cols))
        return [p1, p2]
    raise ValueError(f"unknown format {fmt!r}")


def _num(v: str):
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v
