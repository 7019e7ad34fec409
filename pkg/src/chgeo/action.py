"""Kinetic energy metric, the action of a path, and the least-action check.

The metric is right-invariant: the kinetic energy of (phi, v) only depends on
the spatial velocity ``u = v o phi^{-1}``,

    K(phi, v) = 1/2 int (u^2 + u_x^2) dx,

and the action of a path is ``int_0^T K dt``. Comparison paths are built by
adding ``amplitude * envelope(t) * g(x)`` to the displacement of phi, with an
envelope vanishing at both ends, so they join the same two configurations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import simpson, trapezoid

from .diagnostics import h1
from .errors import DiffeoError, PathError, PerturbationError
from .grid import Field
from .eulerian import default_dt, step_count
from .lagrangian import ConfigState, Path, eulerian_velocity, geodesic_evolve

log = logging.getLogger(__name__)

ENVELOPES = ("sine", "quadratic")
DEFAULT_CONSISTENCY_RTOL = 0.05
MAX_HALVINGS = 10
MIN_PATH_STEPS = 32

__all__ = [
    "Path",
    "PerturbationSpec",
    "LeastActionReport",
    "kinetic_energy",
    "action",
    "check_consistency",
    "perturb_path",
    "least_action_report",
]


@dataclass(frozen=True)
class PerturbationSpec:
    amplitude: float = 1e-2
    mode_count: int = 4
    seed: int = 0
    envelope: str = "sine"

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise ValueError("amplitude must be >= 0")
        if self.mode_count < 1:
            raise ValueError("mode_count must be >= 1")
        if self.envelope not in ENVELOPES:
            raise ValueError(f"envelope must be one of {ENVELOPES}")


def kinetic_energy(state: ConfigState) -> float:
    return h1(eulerian_velocity(state))


def check_consistency(path: Path, rtol: float = DEFAULT_CONSISTENCY_RTOL) -> float:
    """Compare each ``v`` with the time derivative of phi estimated by finite differences.

    Second-order differences (one-sided at the ends). Returns the worst
    mismatch; raises :class:`PathError` when it exceeds
    ``rtol * (max|v| + max|dphi/dt|) + 1e-12``.
    """
    t = path.times
    disp = np.array([s.disp for s in path.states])
    v = np.array([s.v for s in path.states])
    if len(t) < 3:
        fd = np.repeat((disp[1:] - disp[:1]) / (t[1] - t[0]), 2, axis=0)
    else:
        fd = np.gradient(disp, t, axis=0, edge_order=2)
    mismatch = float(np.max(np.abs(fd - v)))
    scale = float(np.max(np.abs(v)) + np.max(np.abs(fd)))
    if mismatch > rtol * scale + 1e-12:
        raise PathError(
            f"material velocity disagrees with d(phi)/dt: max mismatch {mismatch:.3g} "
            f"exceeds tolerance {rtol * scale + 1e-12:.3g}"
        )
    return mismatch


def energies(path: Path) -> np.ndarray:
    return np.array([kinetic_energy(s) for s in path.states])


def action(path: Path, check: bool = True, rtol: float = DEFAULT_CONSISTENCY_RTOL) -> float:
    """Time integral of the kinetic energy: composite Simpson for an even number
    of intervals, trapezoid otherwise."""
    if check:
        check_consistency(path, rtol)
    K = energies(path)
    intervals = len(path.times) - 1
    if intervals % 2 == 0:
        return float(simpson(K, x=path.times))
    return float(trapezoid(K, x=path.times))


def _envelope(kind, t, T):
    s = t / T
    if kind == "sine":
        return np.sin(np.pi * s), np.pi / T * np.cos(np.pi * s)
    return 4.0 * s * (1.0 - s), 4.0 / T * (1.0 - 2.0 * s)


def perturbation_profile(n: int, spec: PerturbationSpec) -> np.ndarray:
    """Random combination of the modes 1..mode_count, scaled to unit sup norm.

    Coefficients are standard normals from ``numpy.random.default_rng(seed)``
    (PCG64), drawn in the order a_1, b_1, a_2, b_2, ...
    """
    rng = np.random.default_rng(spec.seed)
    coeffs = rng.standard_normal((spec.mode_count, 2))
    x = np.arange(n) / n
    k = np.arange(1, spec.mode_count + 1)[:, None]
    g = coeffs[:, :1] * np.cos(2 * np.pi * k * x) + coeffs[:, 1:] * np.sin(2 * np.pi * k * x)
    g = g.sum(axis=0)
    return g / np.max(np.abs(g))


def perturb_path(path: Path, spec: PerturbationSpec) -> Path:
    """Same-endpoint comparison path; halves the amplitude (up to 10 times) if
    phi would stop being monotone."""
    if spec.amplitude == 0:
        return path
    g = perturbation_profile(path.grid.n, spec)
    s, ds = _envelope(spec.envelope, path.times, path.T)
    amplitude = spec.amplitude
    for _ in range(MAX_HALVINGS + 1):
        try:
            states = []
            last = len(path) - 1
            for i, st in enumerate(path.states):
                disp = st.disp if i in (0, last) else st.disp + amplitude * s[i] * g
                states.append(ConfigState(st.grid, disp, st.v + amplitude * ds[i] * g, st.t))
            return Path(path.times, tuple(states))
        except DiffeoError:
            log.info("perturbation broke monotonicity at amplitude %g; halving", amplitude)
            amplitude /= 2
    raise PerturbationError(f"no monotone perturbation after {MAX_HALVINGS} halvings")


@dataclass
class LeastActionReport:
    geodesic_action: float
    perturbed_actions: list
    tolerance: float
    failures: list = field(default_factory=list)  # (member index, message)
    seeds: list = field(default_factory=list)
    record: object = field(default=None, repr=False)  # RunRecord of the geodesic

    @property
    def margins(self) -> np.ndarray:
        return np.array(self.perturbed_actions) - self.geodesic_action

    @property
    def min_perturbed(self) -> float:
        return float(np.min(self.perturbed_actions)) if self.perturbed_actions else float("nan")

    @property
    def min_margin(self) -> float:
        return float(np.min(self.margins)) if self.perturbed_actions else float("nan")

    @property
    def median_margin(self) -> float:
        return float(np.median(self.margins)) if self.perturbed_actions else float("nan")

    @property
    def passed(self) -> bool:
        return bool(self.perturbed_actions) and bool(np.all(self.margins >= -self.tolerance))

    def as_dict(self):
        return {
            "geodesic_action": self.geodesic_action,
            "min_perturbed_action": self.min_perturbed,
            "min_margin": self.min_margin,
            "median_margin": self.median_margin,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "ensemble_size": len(self.perturbed_actions) + len(self.failures),
            "margins": self.margins.tolist(),
            "failures": [list(f) for f in self.failures],
        }


def member_seeds(seed: int, count: int) -> list:
    """Seeds of the ensemble members: the first ``count`` draws of
    ``default_rng(seed).integers(0, 2**63)``."""
    return np.random.default_rng(seed).integers(0, 2**63, size=count).tolist()


def least_action_report(
    u0: Field,
    T: float,
    ensemble_size: int,
    spec: PerturbationSpec,
    dt: float | None = None,
    rel_tolerance: float = 1e-9,
    min_steps: int = MIN_PATH_STEPS,
) -> LeastActionReport:
    """Compare the geodesic from ``u0`` with ``ensemble_size`` perturbed paths sharing its endpoints.

    The geodesic is sampled at every step, with at least ``min_steps`` (even)
    steps so the perturbed paths are resolved in time. Passes iff every
    perturbed action is at least ``A* - rel_tolerance * (1 + A*)``.
    """
    if dt is None:
        dt = min(default_dt(u0.grid.n, float(np.max(np.abs(u0.values)))), T)
    # even step count so the action uses Simpson
    steps = max(step_count(T, min(dt, T)), min_steps)
    steps += steps % 2
    path, record = geodesic_evolve(u0, T, T / steps, record_every=1)
    if record.status != "completed":
        raise DiffeoError(f"geodesic does not exist on [0, {T}]: {record.message}")
    A_star = action(path)
    report = LeastActionReport(A_star, [], rel_tolerance * (1.0 + abs(A_star)), record=record)
    for i, seed in enumerate(member_seeds(spec.seed, ensemble_size)):
        report.seeds.append(seed)
        try:
            report.perturbed_actions.append(action(perturb_path(path, replace(spec, seed=seed))))
        except (PerturbationError, PathError, DiffeoError) as exc:
            report.failures.append((i, str(exc)))
    return report
