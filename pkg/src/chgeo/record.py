"""RunRecord: the serialized time series of one simulation.

NDJSON layout, one JSON object per line, in this order:

    {"type": "header", ...}                  config echo, version, grid
    {"type": "frame", "t": ..., "h0": ...}   one per recorded step
    {"type": "snapshot", "t": ..., "u": [...]}
    {"type": <scenario-specific>, ...}       e.g. "gap", "peak", "report"
    {"type": "status", "status": ..., "message": ...}

Non-finite floats are written as ``null``. Keys are sorted, so identical
records serialize to identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DiagnosticsFrame

STATUSES = ("completed", "breaking", "flattening", "error")
FRAME_COLUMNS = ("t", "h0", "h1", "h2", "min_slope", "max_amp")

PLOT_SERIES = {
    "energies": ("frame", ("h0", "h1", "h2")),
    "breaking": ("frame", ("min_slope", "max_amp")),
    "gap": ("gap", ("gap",)),
    "peaks": ("peak", ("position", "height")),
    "phi": ("frame", ("phi_min_slope",)),
}


@dataclass
class RunRecord:
    header: dict = field(default_factory=dict)
    frames: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)  # (t, ndarray)
    extras: list = field(default_factory=list)  # dicts with a "type" key
    status: str = "completed"
    message: str = ""

    def add_frame(self, fr: DiagnosticsFrame):
        self.frames.append(fr)

    def add_snapshot(self, t, values):
        self.snapshots.append((float(t), np.array(values, dtype=float)))

    @property
    def times(self):
        return np.array([fr.t for fr in self.frames])


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, allow_nan=False, separators=(",", ":"))


def to_ndjson(record: RunRecord) -> str:
    lines = [_dumps({"type": "header", **record.header})]
    lines += [_dumps({"type": "frame", **fr.as_dict()}) for fr in record.frames]
    lines += [_dumps({"type": "snapshot", "t": t, "u": u}) for t, u in record.snapshots]
    lines += [_dumps(extra) for extra in record.extras]
    lines.append(_dumps({"type": "status", "status": record.status, "message": record.message}))
    return "\n".join(lines) + "\n"


def _nan(x):
    return math.nan if x is None else x


def from_ndjson(text: str) -> RunRecord:
    record = RunRecord()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        obj = json.loads(line)
        kind = obj.pop("type", None)
        if kind == "header":
            record.header = obj
        elif kind == "frame":
            record.frames.append(
                DiagnosticsFrame(
                    t=obj["t"],
                    h0=_nan(obj["h0"]),
                    h1=_nan(obj["h1"]),
                    h2=_nan(obj["h2"]),
                    min_slope=_nan(obj["min_slope"]),
                    max_amp=_nan(obj["max_amp"]),
                    breaking_flag=obj["breaking_flag"],
                    phi_min_slope=obj.get("phi_min_slope"),
                )
            )
        elif kind == "snapshot":
            record.snapshots.append((obj["t"], np.array([_nan(v) for v in obj["u"]], dtype=float)))
        elif kind == "status":
            record.status = obj["status"]
            record.message = obj.get("message", "")
        elif kind is None:
            raise ValueError(f"line {lineno}: record line without a type")
        else:
            record.extras.append({"type": kind, **obj})
    return record


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return format(float(x), ".17g")


def frames_csv(record: RunRecord) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FRAME_COLUMNS)
    for fr in record.frames:
        writer.writerow([_fmt(getattr(fr, c)) for c in FRAME_COLUMNS])
    return buf.getvalue()


def emit_plot_data(record: RunRecord, which: str) -> str:
    """Long-format CSV ``time,series,value`` for the selected series group."""
    if which not in PLOT_SERIES:
        raise KeyError(f"unknown series selector {which!r}; choose from {sorted(PLOT_SERIES)}")
    source, names = PLOT_SERIES[which]
    if source == "frame":
        rows = [fr.as_dict() for fr in record.frames]
    else:
        rows = [e for e in record.extras if e.get("type") == source]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("time", "series", "value"))
    for row in rows:
        for name in names:
            if name in row and row[name] is not None:
                writer.writerow((_fmt(row["t"]), name, _fmt(row[name])))
    return buf.getvalue()
