"""Pseudospectral RK4 integration of the periodic Camassa-Holm equation

    u_t - u_txx + 3 u u_x = 2 u_x u_xx + u u_xxx

in two algebraically equivalent forms:

* nonlocal (production): ``u_t = -u u_x - d/dx (1 - d^2/dx^2)^{-1} (u^2 + u_x^2/2)``
* local (oracle):        ``u_t = (1 - d^2/dx^2)^{-1} (-3 u u_x + 2 u_x u_xx + u u_xxx)``
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import DEFAULT_SLOPE_THRESHOLD, frame_from_values
from .errors import BlowUpError
from .grid import Field, dealias, dx_helmholtz_solve, helmholtz_solve, spectral_deriv
from .record import RunRecord


@dataclass(frozen=True)
class EulerianState:
    t: float
    u: Field

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError(f"time must be nonnegative, got {self.t}")


def _maybe(values, on):
    return dealias(values) if on else values


def nonlocal_rhs(u: np.ndarray, dealiased: bool = False) -> np.ndarray:
    ux = spectral_deriv(u)
    return -_maybe(u * ux, dealiased) - dx_helmholtz_solve(_maybe(u * u + 0.5 * ux * ux, dealiased))


def local_rhs(u: np.ndarray, dealiased: bool = False) -> np.ndarray:
    uhat = np.fft.rfft(u)
    n = u.shape[-1]
    ik = 1j * 2.0 * np.pi * np.arange(n // 2 + 1)
    ik[-1] = 0.0  # odd derivatives drop Nyquist
    ux = np.fft.irfft(uhat * ik, n=n)
    uxx = np.fft.irfft(uhat * (2.0j * np.pi * np.arange(n // 2 + 1)) ** 2, n=n)
    uxxx = np.fft.irfft(uhat * ik**3, n=n)
    return helmholtz_solve(_maybe(-3.0 * u * ux + 2.0 * ux * uxx + u * uxxx, dealiased))


RHS = {"nonlocal": nonlocal_rhs, "local": local_rhs}


def rhs_nonlocal(u: Field) -> Field:
    return Field(u.grid, nonlocal_rhs(u.values))


def rhs_local(u: Field) -> Field:
    return Field(u.grid, local_rhs(u.values))


def _resolve(rhs):
    if callable(rhs):
        return rhs
    try:
        return RHS[rhs]
    except KeyError:
        raise ValueError(f"unknown rhs formulation {rhs!r}") from None


def rk4(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _advance(u, dt, rhs, dealiased):
    # overflow is detected by the caller's finiteness check
    with np.errstate(over="ignore", invalid="ignore"):
        return rk4(lambda w: rhs(w, dealiased), u, dt)


def step_rk4(state: EulerianState, dt: float, rhs="nonlocal", dealiased: bool = False) -> EulerianState:
    if not dt > 0:
        raise ValueError("dt must be positive")
    new = _advance(state.u.values, dt, _resolve(rhs), dealiased)
    t = state.t + dt
    if not np.all(np.isfinite(new)):
        raise BlowUpError(f"non-finite velocity at t={t:.6g}", t=t)
    return EulerianState(t, Field(state.u.grid, new))


def default_dt(n: int, max_amp: float) -> float:
    """Advective CFL heuristic ``0.25 / (n max|u0| + 1)``."""
    return 0.25 / (n * max_amp + 1.0)


def step_count(T: float, dt: float) -> int:
    """Smallest number of uniform steps of size <= dt that lands exactly on T."""
    return max(1, math.ceil(T / dt - 1e-9))


def evolve(
    u0: Field,
    T: float,
    dt: float | None = None,
    record_every: int = 1,
    rhs="nonlocal",
    slope_threshold: float = DEFAULT_SLOPE_THRESHOLD,
    dealiased: bool = False,
    snapshot_every: int | None = None,
):
    """Integrate from ``u0`` to time ``T`` with uniform steps ``T/ceil(T/dt)``.

    Returns ``(record, final_state)``. The record holds a frame at t=0, every
    ``record_every`` steps and at the last step; it stops early with status
    ``"breaking"`` once min u_x < -slope_threshold, or ``"error"`` when the
    velocity stops being finite (the final state is then the last finite one).
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if dt is None:
        dt = min(default_dt(u0.grid.n, float(np.max(np.abs(u0.values)))), T)
    if not 0 < dt <= T:
        raise ValueError(f"need 0 < dt <= T, got dt={dt}, T={T}")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    f = _resolve(rhs)
    nsteps = step_count(T, dt)
    h = T / nsteps

    record = RunRecord()
    u = np.array(u0.values)
    record.add_frame(frame_from_values(0.0, u, slope_threshold))
    if snapshot_every:
        record.add_snapshot(0.0, u)
    final = EulerianState(0.0, u0)

    for i in range(1, nsteps + 1):
        t = i * h
        new = _advance(u, h, f, dealiased)
        fr = frame_from_values(t, new, slope_threshold)
        if not np.all(np.isfinite(new)):
            record.add_frame(fr)
            record.status = "error"
            record.message = f"non-finite velocity at t={t:.6g}"
            return record, final
        u = new
        final = EulerianState(t, Field(u0.grid, u))
        if fr.breaking_flag:
            record.add_frame(fr)
            if snapshot_every:
                record.add_snapshot(t, u)
            record.status = "breaking"
            record.message = f"min u_x = {fr.min_slope:.6g} < -{slope_threshold:g} at t={t:.6g}"
            return record, final
        if i % record_every == 0 or i == nsteps:
            record.add_frame(fr)
        if snapshot_every and (i % snapshot_every == 0 or i == nsteps):
            record.add_snapshot(t, u)
    return record, final
