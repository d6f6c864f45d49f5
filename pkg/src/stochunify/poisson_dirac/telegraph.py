"""Persistent random walk (telegraph process) and its master equation.

Right movers ``P+`` and left movers ``P-`` obey

    dP+/dt = -a (P+ - P-) - v dP+/dx
    dP-/dt = -a (P- - P+) + v dP-/dx
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import DimensionError, DomainError, StabilityError
from ..numerics import Grid1D, RngStream

WALKER_LANE = 2


@dataclass(frozen=True, eq=False)
class TelegraphState:
    p_plus: np.ndarray
    p_minus: np.ndarray
    grid: Grid1D
    speed: float
    rate: float
    time: float = 0.0

    def __post_init__(self):
        n = self.grid.n_points
        for name in ("p_plus", "p_minus"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise DimensionError(f"{name} must have one value per grid point")
            object.__setattr__(self, name, arr)
        if self.speed < 0 or self.rate < 0:
            raise DomainError("speed and rate must be non-negative")

    def total_probability(self) -> float:
        return float((self.p_plus.sum() + self.p_minus.sum()) * self.grid.dx)

    @classmethod
    def point_source(cls, grid: Grid1D, speed: float, rate: float, x0: float = 0.0,
                     right_fraction: float = 0.5) -> "TelegraphState":
        """Unit mass in the cell nearest ``x0``, split between directions."""
        i = int(np.argmin(np.abs(grid.x - x0)))
        pp = np.zeros(grid.n_points)
        pm = np.zeros(grid.n_points)
        pp[i] = right_fraction / grid.dx
        pm[i] = (1.0 - right_fraction) / grid.dx
        return cls(pp, pm, grid, speed, rate)


def flip_relaxation(p_plus, p_minus, rate: float, t: float):
    """Exact solution of the flip terms alone over time ``t``."""
    mean = 0.5 * (np.asarray(p_plus) + np.asarray(p_minus))
    diff = 0.5 * (np.asarray(p_plus) - np.asarray(p_minus)) * np.exp(-2.0 * rate * t)
    return mean + diff, mean - diff


def _upwind(p: np.ndarray, nu: float, direction: int, periodic: bool) -> np.ndarray:
    if periodic:
        upstream = np.roll(p, direction)
    else:
        upstream = np.zeros_like(p)
        if direction > 0:
            upstream[1:] = p[:-1]
        else:
            upstream[:-1] = p[1:]
    return p - nu * (p - upstream)


def telegraph_pde_step(state: TelegraphState, dt: float) -> TelegraphState:
    """Upwind advection followed by the exact flip sub-step.

    At Courant number 1 the advection is an exact one-cell shift.
    """
    if not dt > 0:
        raise DomainError("dt must be positive")
    dx = state.grid.dx
    nu = state.speed * dt / dx
    if nu > 1.0 + 1e-12:
        raise StabilityError(
            f"CFL violated: v*dt/dx = {nu:.6g} > 1; use dt <= {dx / state.speed:.6g}"
        )
    nu = min(nu, 1.0)
    periodic = state.grid.periodic
    pp = _upwind(state.p_plus, nu, +1, periodic)
    pm = _upwind(state.p_minus, nu, -1, periodic)
    pp, pm = flip_relaxation(pp, pm, state.rate, dt)
    return replace(state, p_plus=pp, p_minus=pm, time=state.time + dt)


def telegraph_evolve(state: TelegraphState, dt: float, n_steps: int) -> TelegraphState:
    for _ in range(int(n_steps)):
        state = telegraph_pde_step(state, dt)
    return state


@dataclass(frozen=True, eq=False)
class WalkerSample:
    positions: np.ndarray
    directions: np.ndarray
    flip_counts: np.ndarray
    t_final: float

    def histogram(self, grid: Grid1D, speed: float, rate: float) -> TelegraphState:
        """Densities of right/left movers, one bin per grid cell.

        Cell ``i`` covers ``[x_i - dx/2, x_i + dx/2)``.
        """
        n, dx = grid.n_points, grid.dx
        idx = np.floor((self.positions - grid.x_min) / dx + 0.5).astype(np.intp)
        if grid.periodic:
            idx %= n
            inside = np.ones(idx.shape, dtype=bool)
        else:
            inside = (idx >= 0) & (idx < n)
        total = self.positions.shape[0]
        right = inside & (self.directions > 0)
        left = inside & (self.directions < 0)
        pp = np.bincount(idx[right], minlength=n) / (total * dx)
        pm = np.bincount(idx[left], minlength=n) / (total * dx)
        return TelegraphState(pp, pm, grid, speed, rate, self.t_final)


def telegraph_monte_carlo(n_walkers: int, a: float, v: float, t_final: float, rng: RngStream,
                          x0: float = 0.0, right_fraction: float = 0.5,
                          grid: Grid1D | None = None):
    """Simulate walkers that reverse direction at the events of a rate-``a``
    Poisson process.

    The first ``round(right_fraction * n)`` walkers start moving right.
    Waiting times are drawn for every walker in every round (whether or not
    it is still active) so each walker's randomness depends only on its
    index. Returns a :class:`WalkerSample`, or its histogram when ``grid``
    is given.
    """
    if not t_final > 0:
        raise DomainError("t_final must be positive")
    n = int(n_walkers)
    n_right = int(round(right_fraction * n))
    direction = np.where(np.arange(n) < n_right, 1, -1).astype(np.int8)
    position = np.full(n, float(x0))
    remaining = np.full(n, float(t_final))
    flips = np.zeros(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    rnd = 0
    while active.any():
        if a > 0:
            wait = rng.exponential(n, step=rnd, lane=WALKER_LANE) / a
        else:
            wait = np.full(n, np.inf)
        rnd += 1
        move = np.where(active, np.minimum(wait, remaining), 0.0)
        position += v * direction * move
        flip = active & (wait < remaining)
        remaining = np.where(active, remaining - move, 0.0)
        direction = np.where(flip, -direction, direction).astype(np.int8)
        flips += flip
        active = flip
    sample = WalkerSample(position, direction, flips, float(t_final))
    if grid is not None:
        return sample.histogram(grid, v, a)
    return sample


def coarse_l1(first: TelegraphState, second: TelegraphState, coarsen: int = 1) -> float:
    """L1 distance between two states after merging ``coarsen`` cells per bin.

    Summed over both directions; bins are disjoint unions of grid cells.
    """
    if first.grid != second.grid:
        raise DimensionError("states live on different grids")
    dx = first.grid.dx
    total = 0.0
    for a, b in ((first.p_plus, second.p_plus), (first.p_minus, second.p_minus)):
        diff = (a - b) * dx
        pad = (-diff.size) % coarsen
        diff = np.concatenate([diff, np.zeros(pad)]).reshape(-1, coarsen).sum(axis=1)
        total += np.abs(diff).sum()
    return float(total)
