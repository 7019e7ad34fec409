"""Peaked travelling waves on the unit circle.

The periodic Green's function of ``1 - d^2/dx^2`` on the unit circle is

    G(x) = cosh(x - 1/2) / (2 sinh(1/2)),   x in [0, 1),

and the periodic peakon with speed c is ``u(t, x) = c G(x - x0 - ct) / G(0)``,
whose crest height equals c. For time stepping the corner is smoothed by a
periodic Gaussian of width eps (Fourier multiplier ``exp(-eps^2 xi^2 / 2)``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, PeriodicGrid, trig_interp

G0 = np.cosh(0.5) / (2.0 * np.sinh(0.5))


@dataclass(frozen=True)
class PeakonSpec:
    c: float
    x0: float = 0.0
    mollify_width: float = 0.0

    def __post_init__(self):
        if self.c == 0:
            raise ValueError("peakon speed c must be nonzero")
        if not 0.0 <= self.x0 < 1.0:
            raise ValueError("x0 must lie in [0, 1)")
        if not self.mollify_width >= 0:
            raise ValueError("mollify_width must be >= 0")


def green(x) -> np.ndarray:
    """Closed-form periodic Green's function evaluated at arbitrary points."""
    s = np.mod(np.asarray(x, dtype=float), 1.0)
    return np.cosh(s - 0.5) / (2.0 * np.sinh(0.5))


def green_function(grid: PeriodicGrid) -> Field:
    return Field(grid, green(grid.nodes))


def _series(grid, x0, eps, weights):
    """Real trig series sum_k w_k exp(-eps^2 xi^2/2) exp(i xi (x - x0)), |k| <= n/2."""
    n = grid.n
    xi = grid.wavenumbers
    coeffs = weights(xi) * np.exp(-0.5 * (eps * xi) ** 2) * np.exp(-1j * xi * x0)
    # irfft(n * c) sums c_k over |k| < n/2 and counts Nyquist once; the pair
    # k = +-n/2 contributes 2 Re(c) (-1)^j on the nodes
    coeffs[-1] = 2.0 * coeffs[-1].real
    return np.fft.irfft(n * coeffs, n=n)


def peakon_field(spec: PeakonSpec, grid: PeriodicGrid) -> Field:
    """Peakon profile with crest value ``c`` at ``x0``; mollified when ``mollify_width > 0``.

    The mollified profile is synthesized from the exact Fourier coefficients
    ``1/(1 + xi^2)`` of G, damped by the Gaussian multiplier, rather than by
    filtering the sampled corner (which would alias).
    """
    if spec.mollify_width == 0:
        return Field(grid, spec.c * green(grid.nodes - spec.x0) / G0)
    values = _series(grid, spec.x0, spec.mollify_width, lambda xi: 1.0 / (1.0 + xi**2))
    return Field(grid, spec.c / G0 * values)


def mollified_delta(grid: PeriodicGrid, x0: float, eps: float) -> Field:
    return Field(grid, _series(grid, x0, eps, np.ones_like))


def peakon_train(specs, grid: PeriodicGrid) -> Field:
    return Field(grid, sum(peakon_field(s, grid).values for s in specs))


def _refine(values, j):
    """3-point quadratic fit around node j: (offset in cells, height)."""
    n = values.shape[0]
    fm, f0, fp = values[(j - 1) % n], values[j], values[(j + 1) % n]
    curv = fm - 2.0 * f0 + fp
    if curv >= 0:
        return 0.0, float(f0)
    delta = 0.5 * (fm - fp) / curv
    return delta, float(f0 - 0.25 * (fm - fp) * delta)


def peak_tracker(snapshots):
    """Track the global maximum through ``(t, field)`` snapshots.

    Returns a list of ``(t, position, height)``; positions are unwrapped so the
    trajectory is continuous on the real line.
    """
    if not snapshots:
        raise ValueError("need at least one snapshot")
    times, pos, height = [], [], []
    for t, f in snapshots:
        values = f.values if isinstance(f, Field) else np.asarray(f, dtype=float)
        j = int(np.argmax(values))
        delta, h = _refine(values, j)
        times.append(float(t))
        pos.append(((j + delta) / values.shape[0]) % 1.0)
        height.append(h)
    unwrapped = np.unwrap(np.array(pos), period=1.0)
    return [(t, float(p), h) for t, p, h in zip(times, unwrapped, height)]


def local_peaks(values: np.ndarray, count: int):
    """The ``count`` highest strict local maxima as ``(position, height)``, by position."""
    n = values.shape[0]
    left, right = np.roll(values, 1), np.roll(values, -1)
    idx = np.flatnonzero((values > left) & (values >= right))
    idx = idx[np.argsort(values[idx])[::-1][:count]]
    peaks = []
    for j in idx:
        delta, h = _refine(values, j)
        peaks.append((((j + delta) / n) % 1.0, h))
    return sorted(peaks)


def fitted_speed(track) -> float:
    """Least-squares slope of tracked position against time."""
    t = np.array([p[0] for p in track])
    x = np.array([p[1] for p in track])
    return float(np.polyfit(t, x, 1)[0])


def translated(u: Field, shift: float) -> np.ndarray:
    """Samples of ``u(x - shift)`` by trigonometric interpolation."""
    return trig_interp(u.values, u.grid.nodes - shift)


def shape_residual(u: np.ndarray, reference: np.ndarray) -> float:
    """Relative discrete L2 distance ``|u - reference| / |reference|``."""
    return float(np.linalg.norm(u - reference) / np.linalg.norm(reference))
