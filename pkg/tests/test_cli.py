import json
import shutil
import subprocess

import pytest

from chgeo.cli import main
from chgeo.record import from_ndjson


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    out = tmp_path / "out"
    monkeypatch.setenv("CHGEO_OUT", str(out))
    return out


def write(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def records(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_invariants_zero_field(tmp_path, out_dir):
    cfg = write(tmp_path, "scenario: invariants\ninitial_data: zero\nT: 0.1\n")
    assert main(["run", cfg]) == 0
    lines = records(out_dir / "invariants.ndjson")
    frames = [r for r in lines if r["type"] == "frame"]
    assert frames and all(fr[k] == 0 for fr in frames for k in ("h0", "h1", "h2", "min_slope", "max_amp"))
    assert lines[-1]["status"] == "completed"
    assert (out_dir / "invariants.csv").read_text().startswith("t,h0,h1,h2,min_slope,max_amp\n")


def test_output_path_without_override(tmp_path, monkeypatch):
    monkeypatch.delenv("CHGEO_OUT", raising=False)
    target = tmp_path / "sub" / "run.ndjson"
    cfg = write(tmp_path, f"scenario: eulerian-run\ninitial_data: zero\nT: 0.1\noutput_path: {target}\n")
    assert main(["run", cfg]) == 0
    assert target.exists() and (tmp_path / "sub" / "run.csv").exists()


def test_chgeo_out_overrides_directory(tmp_path, out_dir):
    cfg = write(tmp_path, "scenario: eulerian-run\ninitial_data: zero\nT: 0.1\noutput_path: /nonexistent/x.ndjson\n")
    assert main(["run", cfg]) == 0
    assert (out_dir / "x.ndjson").exists()


@pytest.mark.parametrize(
    "text", ["scenario: eulerian-run\ninitial_data: zero\ndealias_plz: 1\n", "scenario: [\n", "initial_data: zero\n"]
)
def test_config_errors_exit_2(tmp_path, out_dir, capsys, text):
    assert main(["run", write(tmp_path, text)]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path):
    assert main(["run", str(tmp_path / "missing.yaml")]) == 2


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_scenario_failure_exits_1(tmp_path, out_dir):
    # gentle data never reaches the slope threshold, so the breaking scenario fails
    cfg = write(tmp_path, "scenario: breaking\ninitial_data: sine 0.1 1\nn: 64\nT: 0.05\n")
    assert main(["run", cfg]) == 1
    summary = [r for r in records(out_dir / "breaking.ndjson") if r["type"] == "summary"][0]
    assert summary["passed"] is False


def test_integrator_error_exits_1(tmp_path, out_dir):
    cfg = write(tmp_path, "scenario: eulerian-run\ninitial_data: sine 5 1\nn: 128\nT: 1\ndt: 0.2\nslope_threshold: 1e300\n")
    assert main(["run", cfg]) == 1
    assert records(out_dir / "eulerian-run.ndjson")[-1]["status"] == "error"


def test_equivalence_scenario(tmp_path, out_dir):
    cfg = write(tmp_path, "scenario: equivalence\ninitial_data: sine 0.1 1\nn: 64\nT: 0.1\ndt: 1.0e-3\nrecord_every: 20\n")
    assert main(["run", cfg]) == 0
    rec = from_ndjson((out_dir / "equivalence.ndjson").read_text())
    gaps = [e for e in rec.extras if e["type"] == "gap"]
    assert [g["t"] for g in gaps] == pytest.approx([0.0, 0.02, 0.04, 0.06, 0.08, 0.1])
    assert gaps[-1]["gap"] < 1e-5
    assert rec.snapshots == []


def test_least_action_scenario(tmp_path, out_dir):
    cfg = write(tmp_path, "scenario: least-action\ninitial_data: sine 0.1 1\nn: 64\nT: 0.1\nensemble_size: 6\n")
    assert main(["run", cfg]) == 0
    report = [r for r in records(out_dir / "least-action.ndjson") if r["type"] == "report"][0]
    assert len(report["margins"]) == 6 and min(report["margins"]) >= 0
    assert report["passed"]


def test_peakon_scenario(tmp_path, out_dir):
    cfg = write(tmp_path, "scenario: peakon\ninitial_data: peakon 0.5 0.25\nn: 128\nT: 0.2\nrecord_every: 20\n")
    assert main(["run", cfg]) == 0
    lines = records(out_dir / "peakon.ndjson")
    summary = [r for r in lines if r["type"] == "summary"][0]
    assert summary["fitted_speed"] == pytest.approx(0.5, rel=0.05)
    assert summary["shape_residual"] < 1e-2
    assert any(r["type"] == "peak" for r in lines)


def test_geodesic_scenario_reports_phi_slope(tmp_path, out_dir):
    cfg = write(tmp_path, "scenario: geodesic-run\ninitial_data: sine 0.1 1\nn: 64\nT: 0.05\n")
    assert main(["run", cfg]) == 0
    frames = [r for r in records(out_dir / "geodesic-run.ndjson") if r["type"] == "frame"]
    assert all(0 < fr["phi_min_slope"] <= 1.0 + 1e-12 for fr in frames)


def test_repeated_runs_are_byte_identical(tmp_path, monkeypatch):
    cfg = write(tmp_path, "scenario: least-action\ninitial_data: sine 0.1 1\nn: 32\nT: 0.05\nensemble_size: 4\nseed: 9\n")
    blobs = []
    for i in range(2):
        monkeypatch.setenv("CHGEO_OUT", str(tmp_path / f"run{i}"))
        assert main(["run", cfg]) == 0
        blobs.append((tmp_path / f"run{i}" / "least-action.ndjson").read_bytes())
    assert blobs[0] == blobs[1]


class TestPlot:
    @pytest.fixture
    def ndjson(self, tmp_path, out_dir):
        main(["run", write(tmp_path, "scenario: invariants\ninitial_data: sine 0.1 1\nn: 32\nT: 0.05\n")])
        return str(out_dir / "invariants.ndjson")

    def test_energies_to_stdout(self, ndjson, capsys):
        assert main(["plot", ndjson, "--series", "energies"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "time,series,value"
        assert {line.split(",")[1] for line in out[1:]} == {"h0", "h1", "h2"}

    def test_to_file(self, ndjson, tmp_path):
        target = tmp_path / "plot.csv"
        assert main(["plot", ndjson, "--series", "breaking", "-o", str(target)]) == 0
        assert target.read_text().startswith("time,series,value\n")

    def test_unknown_series_exits_2(self, ndjson):
        assert main(["plot", ndjson, "--series", "nope"]) == 2

    def test_missing_record_exits_2(self, tmp_path):
        assert main(["plot", str(tmp_path / "nothing.ndjson"), "--series", "energies"]) == 2

    def test_empty_record(self, tmp_path, capsys):
        empty = tmp_path / "empty.ndjson"
        empty.write_text("")
        assert main(["plot", str(empty), "--series", "energies"]) == 0
        assert capsys.readouterr().out == "time,series,value\n"


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out and all(line.startswith("PASS") for line in out)


@pytest.mark.skipif(shutil.which("chgeo") is None, reason="console script not installed")
def test_console_script(tmp_path):
    result = subprocess.run(["chgeo", "--version"], capture_output=True, text=True)
    assert result.returncode == 0 and "chgeo" in result.stdout
