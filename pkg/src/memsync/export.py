"""CSV / JSON serialization of traces, sweeps, events and run summaries.

CSV files are comma separated, UTF-8, LF line endings, one header line.
Floats are written with ``repr`` so that re-import is exact.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .circuit import CIRCUIT_COLUMNS, CircuitEvent, CircuitTrace
from .dynamics import TRACE_COLUMNS, Trace
from .sweep import SWEEP_COLUMNS, SweepRow


class ExportError(OSError):
    pass


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path):
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = list(reader)
    except OSError as exc:
        raise ExportError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if header is None:
        raise ValueError(f"{path}: empty file, expected a header line")
    return header, rows


def export_trace(trace, path, format: str = "csv"):
    """Write a model ``Trace`` or a ``CircuitTrace``."""
    if format == "csv":
        return write_csv(path, trace.columns, trace.data.tolist())
    if format == "json":
        doc = {"columns": list(trace.columns), "dt_record": trace.dt_record,
               "data": trace.data.tolist()}
        return write_json(path, doc)
    raise ValueError(f"unknown trace format {format!r}")


def import_trace(path):
    """Read a trace written by ``export_trace``; the header decides the type."""
    path = Path(path)
    if path.suffix == ".json":
        doc = read_json(path)
        columns = tuple(doc["columns"])
        data = np.array(doc["data"], dtype=float).reshape(-1, len(columns))
        dt = float(doc["dt_record"])
    else:
        header, rows = read_csv(path)
        columns = tuple(header)
        data = np.array([[float(v) for v in r] for r in rows], dtype=float).reshape(-1, len(columns))
        dt = float((data[-1, 0] - data[0, 0]) / (data.shape[0] - 1)) if data.shape[0] > 1 else math.nan
    if columns == TRACE_COLUMNS:
        return Trace(dt, data)
    if columns == CIRCUIT_COLUMNS:
        return CircuitTrace(dt, data, [])
    raise ValueError(f"{path}: unrecognised trace columns {columns}")


SWEEP_FILE_COLUMNS = ("coupling",) + SWEEP_COLUMNS + ("error",)


def export_sweep(result, path):
    rows = []
    for r in result.rows:
        rows.append((r.coupling, *r.as_tuple(), r.error or ""))
    return write_csv(path, SWEEP_FILE_COLUMNS, rows)


def import_sweep(path) -> list:
    header, rows = read_csv(path)
    if tuple(header) != SWEEP_FILE_COLUMNS:
        raise ValueError(f"{path}: not a sweep table")
    out = []
    for r in rows:
        vals = [float(v) for v in r[:8]]
        out.append(SweepRow(*vals, locked=r[8] == "1", error=r[9] or None))
    return out


def export_events(events, path):
    return write_csv(path, ("t", "kind", "osc"), [(e.t, e.kind, e.osc) for e in events])


def import_events(path) -> list:
    _, rows = read_csv(path)
    return [CircuitEvent(float(t), kind, int(osc)) for t, kind, osc in rows]


def export_spikes(trains, path):
    rows = [(train.source, t) for train in trains for t in train.times]
    return write_csv(path, ("source", "t"), rows)


def export_cycles(trace, cycles: dict, channels, path):
    """Samples of selected cycles, labelled by name, for phase-plot drawing."""
    rows = []
    for label, (a, b) in cycles.items():
        for k in range(a, b):
            rows.append((label, trace.t[k], *(trace[c][k] for c in channels)))
    return write_csv(path, ("cycle", "t", *channels), rows)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        # JSON has no inf/nan
        return f if math.isfinite(f) else str(f)
    if hasattr(obj, "as_dict"):
        return _clean(obj.as_dict())
    return obj


def write_json(path, doc):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            json.dump(_clean(doc), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ExportError(f"cannot read {path}: {exc.strerror or exc}") from exc


def export_summary(reports: dict, path, config: dict | None = None, outputs=()):
    """JSON summary: lock reports and metrics, the resolved config, output files."""
    doc = {"results": reports, "config": config or {}, "outputs": [Path(p).name for p in outputs]}
    return write_json(path, doc)
