"""Shared numeric substrate: grids, complex fields, counter-based random
streams, finite differences and a classical RK4 stepper.

All physical constants elsewhere in the package default to natural units
(hbar = m = c = 1) and are passed explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionError, DomainError, NumericError

MASK64 = (1 << 64) - 1

# Particles are grouped in fixed blocks; each block owns a disjoint slice of
# the Philox counter space, so results do not depend on how blocks are
# scheduled.
RNG_BLOCK_SIZE = 1 << 14


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1D grid with points ``x_min + i*dx`` for ``i < n_points``.

    ``periodic`` selects wrap-around stencils; otherwise boundaries are
    "clamped" and use one-sided stencils.
    """

    x_min: float
    x_max: float
    n_points: int
    periodic: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise DomainError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise DomainError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if int(self.n_points) != self.n_points or self.n_points < 8:
            raise DomainError(f"n_points must be an integer >= 8, got {self.n_points}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in numpy FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    @property
    def is_power_of_two(self) -> bool:
        n = self.n_points
        return n & (n - 1) == 0

    @classmethod
    def centered(cls, half_width: float, n_points: int, periodic: bool = False) -> "Grid1D":
        return cls(-half_width, half_width, n_points, periodic)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples of a function on a :class:`Grid1D`."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.n_points,):
            raise DimensionError(
                f"field has shape {vals.shape}, grid expects ({self.grid.n_points},)"
            )
        object.__setattr__(self, "values", vals)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm2(self) -> float:
        return integrate_density(self)

    def normalized(self) -> "ComplexField":
        n2 = self.norm2()
        if n2 == 0.0:
            raise DomainError("cannot normalize the zero field")
        return ComplexField(self.grid, self.values / np.sqrt(n2))

    def with_values(self, values) -> "ComplexField":
        return ComplexField(self.grid, values)


def integrate_density(field: ComplexField) -> float:
    """Return sum(|psi_i|^2) * dx."""
    vals = field.values
    if not np.all(np.isfinite(vals)):
        raise NumericError("field contains non-finite values")
    return float(np.sum(vals.real**2 + vals.imag**2) * field.grid.dx)


def central_gradient(values, dx: float, periodic: bool = False) -> np.ndarray:
    """Second-order first derivative.

    Central differences in the interior; second-order one-sided stencils at
    the ends unless ``periodic``.
    """
    f = np.asarray(values)
    if f.ndim != 1 or f.shape[0] < 3:
        raise DimensionError("central_gradient needs a 1D sequence of length >= 3")
    if periodic:
        return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * dx)
    g = np.empty_like(f, dtype=np.result_type(f, float))
    g[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
    g[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx)
    g[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dx)
    return g


def second_derivative(values, dx: float, periodic: bool = False) -> np.ndarray:
    """Second-order three-point second derivative (four-point one-sided ends)."""
    f = np.asarray(values)
    if f.ndim != 1 or f.shape[0] < 4:
        raise DimensionError("second_derivative needs a 1D sequence of length >= 4")
    inv = 1.0 / (dx * dx)
    if periodic:
        return (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) * inv
    d2 = np.empty_like(f, dtype=np.result_type(f, float))
    d2[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) * inv
    d2[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv
    d2[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) * inv
    return d2


def rk4_step(state, rhs: Callable, dt: float, t: float = 0.0) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of ``dy/dt = rhs(t, y)``."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    y = np.asarray(state)

    def f(tt, yy):
        out = np.asarray(rhs(tt, yy))
        if not np.all(np.isfinite(out)):
            raise NumericError("rhs returned non-finite values")
        return out

    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def interp_uniform(grid: Grid1D, table: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation of grid values at arbitrary points.

    Periodic grids wrap; clamped grids hold the boundary value beyond the
    last node.
    """
    s = (np.asarray(x, dtype=float) - grid.x_min) / grid.dx
    n = grid.n_points
    if grid.periodic:
        s = np.mod(s, n)
        i = np.floor(s).astype(np.intp)
        frac = s - i
        i %= n
        j = (i + 1) % n
        return table[i] * (1.0 - frac) + table[j] * frac
    s = np.clip(s, 0.0, n - 1.0)
    i = np.minimum(s.astype(np.intp), n - 2)
    frac = s - i
    return table[i] * (1.0 - frac) + table[i + 1] * frac


def fit_order(steps, errors) -> float:
    """Least-squares slope of log(error) against log(step)."""
    steps = np.asarray(steps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if steps.shape != errors.shape or steps.size < 2:
        raise DimensionError("need matching step/error sequences of length >= 2")
    if np.any(errors <= 0) or np.any(steps <= 0):
        raise DomainError("orders can only be fitted to positive values")
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope)


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by ``(seed, stream_id)``.

    Draws come from Philox with the 128-bit key ``(seed, stream_id)``. The
    256-bit counter is partitioned as ``(draw, lane, block, step)`` so that
    every (lane, step, particle-block) triple addresses its own disjoint
    sub-sequence; nothing depends on call order or thread count.
    """

    seed: int
    stream_id: int = 0
    block_size: int = field(default=RNG_BLOCK_SIZE, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & MASK64)
        object.__setattr__(self, "stream_id", int(self.stream_id) & MASK64)

    def generator(self, step: int = 0, lane: int = 0, block: int = 0) -> np.random.Generator:
        bitgen = np.random.Philox(
            key=np.array([self.seed, self.stream_id], dtype=np.uint64),
            counter=np.array([0, lane, block, step], dtype=np.uint64),
        )
        return np.random.Generator(bitgen)

    def substream(self, k: int) -> "RngStream":
        """Independent stream derived from this one (distinct Philox key)."""
        mixed = np.random.SeedSequence([self.stream_id, int(k)]).generate_state(1, np.uint64)
        return RngStream(self.seed, int(mixed[0]), self.block_size)

    def _blocked(self, n: int, step: int, lane: int, draw) -> np.ndarray:
        out = np.empty(n)
        for b, start in enumerate(range(0, n, self.block_size)):
            stop = min(start + self.block_size, n)
            out[start:stop] = draw(self.generator(step, lane, b), stop - start)
        return out

    def normal(self, n: int, step: int = 0, lane: int = 0) -> np.ndarray:
        """``n`` standard normals; element ``i`` depends only on (step, lane, i)."""
        return self._blocked(n, step, lane, lambda g, k: g.standard_normal(k))

    def uniform(self, n: int, step: int = 0, lane: int = 0) -> np.ndarray:
        return self._blocked(n, step, lane, lambda g, k: g.random(k))

    def exponential(self, n: int, step: int = 0, lane: int = 0) -> np.ndarray:
        """Unit-rate exponential variates."""
        return self._blocked(n, step, lane, lambda g, k: g.standard_exponential(k))
