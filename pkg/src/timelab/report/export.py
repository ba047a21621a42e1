"""Deterministic CSV and JSON export.

Floats are written with 17 significant digits (``%.17g``), enough to
round-trip any double exactly; non-finite values become the strings
``"NaN"``, ``"Infinity"`` and ``"-Infinity"``.  No timestamps or host
details are written, so identical runs give identical bytes.
"""
import csv
import io
import math
import os

import numpy as np

from ..errors import ConfigurationError
from .runner import RunResult, SweepResult

FORMATS = ("csv", "json")


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def _scalar(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = format_float(v)
        return x if x[0].isdigit() or x[0] == "-" and x[1:2].isdigit() else f'"{x}"'
    if v is None:
        return "null"
    s = str(v).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{s}"'


def dumps(obj, indent=0):
    """JSON text with fixed float formatting."""
    pad = " " * (indent + 2)
    end = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_scalar(str(k))}: {dumps(v, indent + 2)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_scalar(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 2) for v in seq) + "\n" + end + "]"
    return _scalar(obj)


def result_dict(result):
    return {
        "scenario_id": result.scenario_id,
        "kind": result.kind,
        "summary": dict(result.summary),
        "arrays": {name: {"columns": list(a.columns), "units": list(a.units),
                          "data": a.data.tolist()}
                   for name, a in result.arrays.items()},
        "events": {name: [[k, p] for k, p in ev] for name, ev in result.events.items()},
        "provenance": dict(result.provenance),
    }


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def _array_csv(arr):
    return _csv_text(arr.columns, ([format_float(v) for v in row] for row in arr.data))


def _export_one(result, out_dir, fmt):
    sid = result.scenario_id
    paths = []
    if fmt == "json":
        path = os.path.join(out_dir, f"{sid}.json")
        _write(path, dumps(result_dict(result)) + "\n")
        return [path]
    summary_rows = [[k, _scalar(v).strip('"')] for k, v in result.summary.items()]
    path = os.path.join(out_dir, f"{sid}_summary.csv")
    _write(path, _csv_text(["name", "value"], summary_rows))
    paths.append(path)
    for name, arr in result.arrays.items():
        path = os.path.join(out_dir, f"{sid}_{name}.csv")
        _write(path, _array_csv(arr))
        paths.append(path)
        if name in result.events:
            path = os.path.join(out_dir, f"{sid}_{name}_events.csv")
            _write(path, _csv_text(["event", "param"],
                                   ([k, format_float(p)] for k, p in result.events[name])))
            paths.append(path)
    manifest = {"scenario_id": sid, "kind": result.kind,
                "files": [os.path.basename(p) for p in paths],
                "units": {name: dict(zip(a.columns, a.units)) for name, a in result.arrays.items()},
                "provenance": dict(result.provenance)}
    path = os.path.join(out_dir, f"{sid}_manifest.json")
    _write(path, dumps(manifest) + "\n")
    paths.append(path)
    return paths


def export_results(results, out_dir, fmt="json"):
    """Write one result, a list of results or a sweep to ``out_dir``.

    Returns the written paths.  Raises ``OSError`` if the directory cannot
    be created or written.
    """
    if fmt not in FORMATS:
        raise ConfigurationError(f"unknown format {fmt!r}", field="format")
    os.makedirs(out_dir, exist_ok=True)
    if isinstance(results, RunResult):
        return _export_one(results, out_dir, fmt)
    if isinstance(results, SweepResult):
        paths = []
        for r in results.results:
            paths += _export_one(r, out_dir, fmt)
        table = os.path.join(out_dir, f"{results.scenario_id}_table.csv")
        _write(table, _array_csv(results.table))
        meta = {"scenario_id": results.scenario_id, "axes": list(results.axes),
                "rows": results.rows,
                "members": [r.scenario_id for r in results.results],
                "table_columns": list(results.table.columns),
                "provenance": results.provenance}
        meta_path = os.path.join(out_dir, f"{results.scenario_id}_sweep.json")
        _write(meta_path, dumps(meta) + "\n")
        return paths + [table, meta_path]
    paths = []
    for r in results:
        paths += _export_one(r, out_dir, fmt)
    return paths
