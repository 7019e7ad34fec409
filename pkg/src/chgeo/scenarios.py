"""Scenario runner: config in, RunRecord (and NDJSON + CSV files) out."""

from __future__ import annotations

import os
from pathlib import Path as FsPath

import numpy as np

from . import __version__
from .action import PerturbationSpec, least_action_report
from .config import ScenarioConfig, config_to_dict
from .diagnostics import functional_scales, relative_drifts
from .errors import ChgeoError
from .eulerian import evolve
from .lagrangian import geodesic_evolve
from .peakon import fitted_speed, peak_tracker, shape_residual, translated
from .record import RunRecord, frames_csv, to_ndjson

# final sup-norm gap allowed between the two integrators in the equivalence scenario
EQUIVALENCE_GAP_BOUND = 1e-5


def _eulerian(cfg, u0, snapshot_every=None):
    return evolve(
        u0,
        cfg.T,
        cfg.dt,
        record_every=cfg.record_every,
        rhs=cfg.rhs,
        slope_threshold=cfg.slope_threshold,
        dealiased=cfg.dealias,
        snapshot_every=snapshot_every if snapshot_every is not None else (cfg.snapshot_every or None),
    )


def _geodesic(cfg, u0, snapshot_every=None):
    return geodesic_evolve(
        u0,
        cfg.T,
        cfg.dt,
        record_every=cfg.record_every,
        slope_threshold=cfg.slope_threshold,
        flatten_threshold=cfg.flatten_threshold,
        snapshot_every=snapshot_every if snapshot_every is not None else (cfg.snapshot_every or None),
    )


def _run_eulerian(cfg, u0):
    record, _ = _eulerian(cfg, u0)
    return record


def _run_geodesic(cfg, u0):
    _, record = _geodesic(cfg, u0)
    return record


def _run_invariants(cfg, u0):
    record, _ = _eulerian(cfg, u0)
    drifts = relative_drifts(record.frames, functional_scales(u0.values))
    record.extras.append(
        {
            "type": "summary",
            "drift_h0": drifts[0],
            "drift_h1": drifts[1],
            "drift_h2": drifts[2],
            "passed": record.status == "completed",
        }
    )
    return record


def _run_equivalence(cfg, u0):
    record, _ = _eulerian(cfg, u0, snapshot_every=cfg.record_every)
    _, geo = _geodesic(cfg, u0, snapshot_every=cfg.record_every)
    lag = {t: u for t, u in geo.snapshots}
    gaps = []
    for t, u in record.snapshots:
        if t in lag:
            gap = float(np.max(np.abs(u - lag[t])))
            gaps.append(gap)
            record.extras.append({"type": "gap", "t": t, "gap": gap})
    if not cfg.snapshot_every:
        record.snapshots = []
    final_gap = gaps[-1] if gaps else float("nan")
    complete = record.status == "completed" and geo.status == "completed"
    record.extras.append(
        {
            "type": "summary",
            "final_gap": final_gap,
            "bound": EQUIVALENCE_GAP_BOUND,
            "geodesic_status": geo.status,
            "passed": complete and final_gap <= EQUIVALENCE_GAP_BOUND,
        }
    )
    if geo.status != "completed":
        record.message = f"geodesic: {geo.message}"
    return record


def _run_least_action(cfg, u0):
    spec = PerturbationSpec(cfg.amplitude, cfg.mode_count, cfg.seed, cfg.envelope)
    report = least_action_report(u0, cfg.T, cfg.ensemble_size, spec, dt=cfg.dt)
    record = report.record
    # the report samples every step; thin the frames to the requested cadence
    last = len(record.frames) - 1
    record.frames = [fr for i, fr in enumerate(record.frames) if i % cfg.record_every == 0 or i == last]
    margins = report.margins
    record.extras.append({"type": "report", **report.as_dict(), "median_positive": bool(report.median_margin > 0)})
    record.extras.append({"type": "summary", "passed": report.passed and bool(np.median(margins) > 0)})
    return record


def _single_peakon(terms):
    peakons = [p for kind, p in terms if kind == "peakon"]
    return peakons[0] if len(terms) == 1 and peakons else None


def _run_peakon(cfg, u0):
    record, _ = _eulerian(cfg, u0, snapshot_every=cfg.record_every)
    track = peak_tracker(record.snapshots)
    for t, position, height in track:
        record.extras.append({"type": "peak", "t": t, "position": position, "height": height})
    summary = {"type": "summary", "fitted_speed": fitted_speed(track) if len(track) > 1 else None}
    single = _single_peakon(cfg.initial_data)
    if single is not None and record.status == "completed":
        c = single[0]
        t_end, u_end = record.snapshots[-1]
        exact = translated(u0, c * t_end)
        summary["reference_speed"] = c
        summary["shape_residual"] = shape_residual(u_end, exact)
    summary["passed"] = record.status == "completed"
    record.extras.append(summary)
    if not cfg.snapshot_every:
        record.snapshots = []
    return record


def _run_breaking(cfg, u0):
    record, _ = _eulerian(cfg, u0)
    broke = record.status == "breaking"
    last = record.frames[-1]
    amp0 = record.frames[0].max_amp
    summary = {
        "type": "summary",
        "t_star": last.t if broke else None,
        "max_amp_ratio": last.max_amp / amp0 if amp0 > 0 else None,
        "passed": broke and last.max_amp <= 2.0 * amp0,
    }
    record.extras.append(summary)
    return record


RUNNERS = {
    "eulerian-run": _run_eulerian,
    "geodesic-run": _run_geodesic,
    "invariants": _run_invariants,
    "equivalence": _run_equivalence,
    "least-action": _run_least_action,
    "peakon": _run_peakon,
    "breaking": _run_breaking,
}


def header(cfg: ScenarioConfig) -> dict:
    return {
        "config": config_to_dict(cfg),
        "version": __version__,
        "grid": {"n": cfg.n, "circumference": 1.0},
    }


def run_scenario(cfg: ScenarioConfig) -> RunRecord:
    """Run one scenario. Numerical failures end up in the record status, not as exceptions."""
    u0 = cfg.initial_field()
    try:
        record = RUNNERS[cfg.scenario](cfg, u0)
    except (ChgeoError, ValueError, FloatingPointError) as exc:
        record = RunRecord(status="error", message=f"{type(exc).__name__}: {exc}")
    record.header = header(cfg)
    return record


def scenario_failed(record: RunRecord) -> bool:
    if record.status == "error":
        return True
    return any(e.get("type") == "summary" and e.get("passed") is False for e in record.extras)


def output_paths(cfg: ScenarioConfig) -> tuple[FsPath, FsPath]:
    target = FsPath(cfg.output)
    out_dir = os.environ.get("CHGEO_OUT")
    if out_dir:
        target = FsPath(out_dir) / target.name
    csv_path = target.with_suffix(".csv")
    if csv_path == target:
        csv_path = target.with_name(target.stem + ".frames.csv")
    return target, csv_path


def write_outputs(record: RunRecord, cfg: ScenarioConfig) -> tuple[FsPath, FsPath]:
    ndjson_path, csv_path = output_paths(cfg)
    ndjson_path.parent.mkdir(parents=True, exist_ok=True)
    ndjson_path.write_text(to_ndjson(record), encoding="utf-8")
    csv_path.write_text(frames_csv(record), encoding="utf-8")
    return ndjson_path, csv_path
