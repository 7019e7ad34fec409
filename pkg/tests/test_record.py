import csv
import io
import json
import math

import numpy as np
import pytest

from chgeo.config import config_from_dict, parse_config
from chgeo.diagnostics import DiagnosticsFrame
from chgeo.record import FRAME_COLUMNS, RunRecord, emit_plot_data, frames_csv, from_ndjson, to_ndjson
from chgeo.scenarios import run_scenario


@pytest.fixture(scope="module")
def record():
    cfg = parse_config("scenario: invariants\ninitial_data: sine 0.1 1 + constant 0.05\nn: 64\nT: 0.1\ndt: 0.01\nrecord_every: 2\n")
    return run_scenario(cfg)


def test_ndjson_line_order(record):
    kinds = [json.loads(line)["type"] for line in to_ndjson(record).splitlines()]
    assert kinds[0] == "header" and kinds[-1] == "status"
    assert kinds[1 : 1 + len(record.frames)] == ["frame"] * len(record.frames)


def test_ndjson_round_trip(record):
    text = to_ndjson(record)
    again = from_ndjson(text)
    assert to_ndjson(again) == text
    assert again.frames == record.frames


def test_header_config_round_trips(record):
    cfg = config_from_dict(record.header["config"])
    assert cfg == parse_config(
        "scenario: invariants\ninitial_data: sine 0.1 1 + constant 0.05\nn: 64\nT: 0.1\ndt: 0.01\nrecord_every: 2\n"
    )
    assert record.header["grid"] == {"n": 64, "circumference": 1.0}
    assert "version" in record.header


def test_frames_time_ordered(record):
    assert np.all(np.diff(record.times) > 0)


def test_csv_matches_frames_row_for_row(record):
    rows = list(csv.DictReader(io.StringIO(frames_csv(record))))
    assert tuple(rows[0].keys()) == FRAME_COLUMNS
    assert len(rows) == len(record.frames)
    for row, fr in zip(rows, record.frames):
        for col in FRAME_COLUMNS:
            assert float(row[col]) == getattr(fr, col)


def test_non_finite_serialized_as_null():
    rec = RunRecord(frames=[DiagnosticsFrame(0.5, math.nan, math.inf, 0.0, 0.0, 0.0, True)], status="error")
    lines = to_ndjson(rec).splitlines()
    frame = json.loads(lines[1])
    assert frame["h0"] is None and frame["h1"] is None
    again = from_ndjson(to_ndjson(rec))
    assert math.isnan(again.frames[0].h0)


def test_snapshots_round_trip():
    rec = RunRecord(snapshots=[(0.0, np.array([1.0, 2.0])), (0.5, np.array([0.1, 1 / 3]))])
    again = from_ndjson(to_ndjson(rec))
    assert [t for t, _ in again.snapshots] == [0.0, 0.5]
    np.testing.assert_array_equal(again.snapshots[1][1], [0.1, 1 / 3])


def test_extras_round_trip():
    rec = RunRecord(extras=[{"type": "gap", "t": 0.1, "gap": 1e-9}])
    assert from_ndjson(to_ndjson(rec)).extras == rec.extras


def test_line_without_type_rejected():
    with pytest.raises(ValueError):
        from_ndjson('{"t": 1}\n')


class TestPlotData:
    def test_energies(self, record):
        rows = list(csv.reader(io.StringIO(emit_plot_data(record, "energies"))))
        assert rows[0] == ["time", "series", "value"]
        assert [r[1] for r in rows[1:4]] == ["h0", "h1", "h2"]
        assert len(rows) == 1 + 3 * len(record.frames)

    def test_breaking(self, record):
        rows = list(csv.reader(io.StringIO(emit_plot_data(record, "breaking"))))
        assert {r[1] for r in rows[1:]} == {"min_slope", "max_amp"}

    def test_seventeen_significant_digits(self, record):
        rows = list(csv.reader(io.StringIO(emit_plot_data(record, "energies"))))
        h1 = record.frames[0].h1
        assert float(rows[2][2]) == h1
        assert rows[2][2] == format(h1, ".17g")

    def test_empty_record_is_header_only(self):
        assert emit_plot_data(RunRecord(), "energies") == "time,series,value\n"

    def test_unknown_selector(self, record):
        with pytest.raises(KeyError):
            emit_plot_data(record, "nope")

    def test_gap_and_peak_series(self):
        rec = RunRecord(
            extras=[
                {"type": "gap", "t": 0.0, "gap": 0.0},
                {"type": "peak", "t": 0.0, "position": 0.25, "height": 0.5},
            ]
        )
        assert emit_plot_data(rec, "gap").splitlines()[1] == "0,gap,0"
        assert emit_plot_data(rec, "peaks").splitlines()[1:] == ["0,position,0.25", "0,height,0.5"]
