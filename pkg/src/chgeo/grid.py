"""Uniform periodic grid on the unit circle with Fourier-spectral operators.

Every operator comes in two flavours: an array kernel (``spectral_deriv``,
``helmholtz_solve`` ...) used inside the time steppers, and a thin
:class:`Field`-level wrapper (``deriv``, ``helmholtz_inverse`` ...) for callers
that want validated, immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numba
import numpy as np

from .errors import GridError

CIRCUMFERENCE = 1.0


@dataclass(frozen=True)
class PeriodicGrid:
    """``n`` equispaced nodes ``x_j = j/n`` on the circle of circumference 1."""

    n: int

    def __post_init__(self):
        n = self.n
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise GridError(f"grid size must be an integer, got {n!r}")
        if n < 8 or n & (n - 1):
            raise GridError(f"grid size must be a power of two >= 8, got {n}")
        object.__setattr__(self, "n", int(n))

    @property
    def circumference(self) -> float:
        return CIRCUMFERENCE

    @property
    def spacing(self) -> float:
        return CIRCUMFERENCE / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.arange(self.n) / self.n
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers ``2*pi*k`` for the rfft half-spectrum."""
        xi = 2.0 * np.pi * np.arange(self.n // 2 + 1)
        xi.flags.writeable = False
        return xi


def make_grid(n: int) -> PeriodicGrid:
    return PeriodicGrid(n)


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a periodic function on ``grid``. Values are read-only."""

    grid: PeriodicGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise GridError(f"expected {self.grid.n} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise GridError("field values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: PeriodicGrid, func) -> "Field":
        return cls(grid, func(grid.nodes))

    def __len__(self):
        return self.grid.n

    def __eq__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)


# ---------------------------------------------------------------------------
# array kernels


def _xi(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n // 2 + 1)


def spectral_deriv(values: np.ndarray, order: int = 1) -> np.ndarray:
    """``order``-th x-derivative of periodic samples; Nyquist mode zeroed for odd orders."""
    n = values.shape[-1]
    mult = (1j * _xi(n)) ** order
    if order % 2:
        mult[-1] = 0.0
    return np.fft.irfft(np.fft.rfft(values) * mult, n=n)


def helmholtz_solve(values: np.ndarray) -> np.ndarray:
    """Apply ``(1 - d^2/dx^2)^{-1}`` as the Fourier multiplier ``1/(1 + xi^2)``."""
    n = values.shape[-1]
    return np.fft.irfft(np.fft.rfft(values) / (1.0 + _xi(n) ** 2), n=n)


def helmholtz_apply(values: np.ndarray) -> np.ndarray:
    """Forward operator ``1 - d^2/dx^2`` as a multiplier (no Nyquist special case)."""
    n = values.shape[-1]
    return np.fft.irfft(np.fft.rfft(values) * (1.0 + _xi(n) ** 2), n=n)


def dx_helmholtz_solve(values: np.ndarray) -> np.ndarray:
    """``d/dx (1 - d^2/dx^2)^{-1}`` in a single transform pair."""
    n = values.shape[-1]
    xi = _xi(n)
    mult = 1j * xi / (1.0 + xi**2)
    mult[-1] = 0.0
    return np.fft.irfft(np.fft.rfft(values) * mult, n=n)


def dealias(values: np.ndarray) -> np.ndarray:
    """2/3-rule truncation: zero every mode with ``|k| > n/3``."""
    n = values.shape[-1]
    coeffs = np.fft.rfft(values)
    coeffs[np.arange(coeffs.size) > n // 3] = 0.0
    return np.fft.irfft(coeffs, n=n)


def quadrature(values: np.ndarray) -> float:
    return float(np.mean(values, axis=-1) * CIRCUMFERENCE)


@numba.njit(cache=True)
def _barycentric_weights(query, n):
    out = np.empty((query.shape[0], n))
    sign = np.ones(n)
    sign[1::2] = -1.0
    cj = sign * np.cos(np.pi * np.arange(n) / n)
    sj = sign * np.sin(np.pi * np.arange(n) / n)
    cot_c = np.cos(np.pi * np.arange(n) / n)
    cot_s = np.sin(np.pi * np.arange(n) / n)
    for i in range(query.shape[0]):
        row = out[i]
        hit = query[i] * n
        r = np.floor(hit + 0.5)
        if hit == r:
            row[:] = 0.0
            row[int(r) % n] = 1.0
            continue
        cx = np.cos(np.pi * query[i])
        sx = np.sin(np.pi * query[i])
        for j in range(n):
            den = sx * cot_c[j] - cx * cot_s[j]
            # cancellation can zero den within an ulp of a node
            den = den + 1e-300 * (den == 0.0)
            row[j] = (cx * cj[j] + sx * sj[j]) / den
        row /= np.sum(row)
    return out


def interp_weights(n: int, query) -> np.ndarray:
    """Matrix ``W`` such that ``W @ f`` is the trigonometric interpolant of ``f`` at ``query``."""
    query = np.mod(np.asarray(query, dtype=float), CIRCUMFERENCE)
    # mod can round 1 - tiny up to exactly 1.0
    query[query >= CIRCUMFERENCE] = 0.0
    return _barycentric_weights(np.ascontiguousarray(query), n)


def trig_interp(values: np.ndarray, query) -> np.ndarray:
    """Evaluate the trigonometric interpolant of periodic samples at arbitrary points.

    Barycentric formula for an even number of equispaced nodes,
    ``p(x) = sum_j (-1)^j f_j cot(pi(x - x_j)) / sum_j (-1)^j cot(pi(x - x_j))``,
    exact for trigonometric polynomials of degree < n/2. ``values`` may be
    ``(n,)`` or ``(n, k)`` to interpolate k columns at once. Queries are reduced
    mod 1; a query on a node returns that sample exactly.
    """
    values = np.asarray(values, dtype=float)
    return interp_weights(values.shape[0], query) @ values


# ---------------------------------------------------------------------------
# Field-level operations


def deriv(f: Field) -> Field:
    return Field(f.grid, spectral_deriv(f.values))


def helmholtz_inverse(f: Field) -> Field:
    return Field(f.grid, helmholtz_solve(f.values))


def integrate(f: Field) -> float:
    """Integral over the circle (trapezoid rule, spectrally accurate for periodic data)."""
    return quadrature(f.values)


def interp_periodic(f: Field, query_points) -> np.ndarray:
    q = np.atleast_1d(np.asarray(query_points, dtype=float))
    if not np.all(np.isfinite(q)):
        raise GridError("query points must be finite")
    return trig_interp(f.values, q)
