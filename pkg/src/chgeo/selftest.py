"""Fast invariant checks behind ``chgeo selftest``; a few seconds at coarse resolution."""

from __future__ import annotations

import numpy as np

from .action import kinetic_energy
from .config import parse_config
from .diagnostics import functional_scales, relative_drifts
from .eulerian import evolve, local_rhs, nonlocal_rhs
from .grid import Field, PeriodicGrid, helmholtz_solve, spectral_deriv
from .lagrangian import ConfigState, eulerian_velocity, geodesic_evolve, invert_diffeo, rotate
from .peakon import G0, green, mollified_delta
from .record import to_ndjson
from .scenarios import run_scenario


def _derivative():
    g = PeriodicGrid(64)
    x = g.nodes
    err = np.max(np.abs(spectral_deriv(np.sin(2 * np.pi * 3 * x)) - 6 * np.pi * np.cos(2 * np.pi * 3 * x)))
    return err < 1e-11, f"max error {err:.2e}"


def _rhs_forms():
    rng = np.random.default_rng(1)
    n, worst = 128, 0.0
    x = np.arange(n) / n
    for _ in range(5):
        k = np.arange(1, 17)[:, None]
        a, b = rng.standard_normal((2, 16, 1)) / (1.0 + k) ** 2
        u = (a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)).sum(axis=0)
        bound = 1e-9 * (1 + np.max(np.abs(u)) ** 3)
        worst = max(worst, np.max(np.abs(local_rhs(u) - nonlocal_rhs(u))) / bound)
    return worst <= 1.0, f"worst gap / bound {worst:.2e}"


def _conservation():
    g = PeriodicGrid(64)
    u0 = Field(g, 0.1 * np.sin(2 * np.pi * g.nodes) + 0.05 * np.cos(4 * np.pi * g.nodes))
    record, _ = evolve(u0, 0.2, 2e-3, record_every=10)
    drifts = relative_drifts(record.frames, functional_scales(u0.values))
    return max(drifts) < 1e-8, "drifts " + ", ".join(f"{d:.1e}" for d in drifts)


def _inverse():
    n = 64
    x = np.arange(n) / n
    phi = x + 0.1 * np.sin(2 * np.pi * x)
    y = invert_diffeo(phi)
    err = np.max(np.abs(y + 0.1 * np.sin(2 * np.pi * y) - x))
    return err < 1e-12, f"residual {err:.2e}"


def _right_invariance():
    g = PeriodicGrid(64)
    x = g.nodes
    st = ConfigState(g, 0.05 * np.sin(2 * np.pi * x), 0.1 * np.cos(2 * np.pi * x))
    K = kinetic_energy(st)
    err = max(abs(kinetic_energy(rotate(st, s)) - K) / K for s in (1, 7, 33))
    return err < 1e-13, f"relative change {err:.1e}"


def _green():
    g = PeriodicGrid(256)
    G = helmholtz_solve(mollified_delta(g, 0.0, 0.0).values)
    far = np.abs(((g.nodes + 0.5) % 1.0) - 0.5) >= 0.05
    err = np.max(np.abs(G[far] - green(g.nodes[far])) / green(g.nodes[far]))
    return err < 1e-3 and abs(green(0.0) - G0) < 1e-15, f"max relative error {err:.1e}"


def _equivalence():
    g = PeriodicGrid(64)
    u0 = Field(g, 0.1 * np.sin(2 * np.pi * g.nodes))
    _, final = evolve(u0, 0.1, 1e-3)
    path, _ = geodesic_evolve(u0, 0.1, 1e-3, record_every=100)
    gap = np.max(np.abs(final.u.values - eulerian_velocity(path.end).values))
    return gap < 1e-8, f"gap {gap:.1e}"


def _determinism():
    cfg = parse_config("scenario: invariants\ninitial_data: sine 0.1 1\nn: 32\nT: 0.05\n")
    a, b = to_ndjson(run_scenario(cfg)), to_ndjson(run_scenario(cfg))
    return a == b, f"{len(a)} bytes"


CHECKS = {
    "spectral-derivative": _derivative,
    "rhs-forms-agree": _rhs_forms,
    "conservation": _conservation,
    "diffeo-inverse": _inverse,
    "right-invariance": _right_invariance,
    "green-function": _green,
    "eulerian-lagrangian": _equivalence,
    "determinism": _determinism,
}


def run_selftest():
    """Yield ``(name, passed, detail)`` per check; exceptions count as failures."""
    for name, check in CHECKS.items():
        try:
            ok, detail = check()
        except Exception as exc:  # a crash is a failed check, not a crashed selftest
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        yield name, bool(ok), detail
