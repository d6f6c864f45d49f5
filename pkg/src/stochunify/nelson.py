"""Particle ensembles driven by the forward/backward diffusion drifts.

Forward process:  dX = (v + u) dt + sigma dW      (Euler-Maruyama)
Backward process: dX = (v - u) dt + sigma dW_b, integrated towards the past,
i.e. ``X(t - dt) = X(t) - (v - u) dt + sigma sqrt(dt) N``.

The diffusion coefficient is ``sigma**2 = hbar / m`` so that the associated
Fokker-Planck equations carry ``hbar / 2m`` in front of the second
derivative.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError, DomainError
from .io import write_csv
from .numerics import ComplexField, Grid1D, RngStream, central_gradient, interp_uniform, second_derivative
from .schrodinger import CrankNicolson, NelsonFields, Potential, nelson_map

FORWARD_LANE = 0
BACKWARD_LANE = 1
INIT_LANE = 7


@dataclass(frozen=True, eq=False)
class Ensemble:
    positions: np.ndarray
    rng: RngStream
    time: float = 0.0
    step: int = 0
    boundary_events: int = 0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 1:
            raise DimensionError("positions must be one-dimensional")
        if not np.all(np.isfinite(pos)):
            raise DomainError("ensemble positions must be finite")
        object.__setattr__(self, "positions", pos)

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def at_point(cls, x0: float, n: int, rng: RngStream) -> "Ensemble":
        return cls(np.full(int(n), float(x0)), rng)

    @classmethod
    def from_density(cls, grid: Grid1D, rho, n: int, rng: RngStream) -> "Ensemble":
        """Sample ``n`` positions from a tabulated density.

        Each grid value is treated as constant over its cell of width dx.
        """
        rho = np.asarray(rho, dtype=float)
        if rho.shape != (grid.n_points,) or np.any(rho < 0) or rho.sum() <= 0:
            raise DomainError("need a non-negative density table matching the grid")
        cdf = np.cumsum(rho)
        cdf /= cdf[-1]
        u = rng.uniform(2 * int(n), step=0, lane=INIT_LANE)
        cell = np.searchsorted(cdf, u[: int(n)], side="right")
        cell = np.minimum(cell, grid.n_points - 1)
        pos = grid.x[cell] + (u[int(n):] - 0.5) * grid.dx
        return cls(pos, rng)


@dataclass(frozen=True, eq=False)
class DriftSpec:
    """Current and osmotic velocity tables on a grid plus the noise amplitude."""

    v_field: np.ndarray
    u_field: np.ndarray
    grid: Grid1D
    sigma: float
    rho: np.ndarray | None = None

    def __post_init__(self):
        n = self.grid.n_points
        for name in ("v_field", "u_field"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise DimensionError(f"{name} must have one value per grid point")
            object.__setattr__(self, name, arr)
        if self.sigma < 0:
            raise DomainError("sigma must be non-negative")

    @property
    def forward_drift(self) -> np.ndarray:
        return self.v_field + self.u_field

    @property
    def backward_drift(self) -> np.ndarray:
        return self.v_field - self.u_field

    @property
    def diffusion(self) -> float:
        """Coefficient in front of d^2/dx^2 in the Fokker-Planck equations."""
        return 0.5 * self.sigma**2

    @classmethod
    def from_fields(cls, fields: NelsonFields) -> "DriftSpec":
        sigma = np.sqrt(fields.hbar / fields.mass)
        return cls(_fill_masked(fields.v), _fill_masked(fields.u), fields.grid, sigma, fields.rho)

    @classmethod
    def from_wavefunction(cls, psi: ComplexField, hbar: float = 1.0, mass: float = 1.0) -> "DriftSpec":
        return cls.from_fields(nelson_map(psi, hbar, mass))


def _fill_masked(values: np.ndarray) -> np.ndarray:
    """Replace NaNs (sub-floor density) by interpolating from valid points.

    Beyond the outermost valid points the boundary value is held.
    """
    vals = np.array(values, dtype=float)
    ok = np.isfinite(vals)
    if ok.all():
        return vals
    if not ok.any():
        return np.zeros_like(vals)
    idx = np.arange(vals.size)
    return np.interp(idx, idx[ok], vals[ok])


def _confine(x: np.ndarray, grid: Grid1D) -> tuple[np.ndarray, int]:
    lo, hi = grid.x_min, grid.x_max
    out = (x < lo) | (x > hi)
    n_out = int(np.count_nonzero(out))
    if n_out == 0:
        return x, 0
    if grid.periodic:
        return lo + np.mod(x - lo, grid.length), n_out
    x = x.copy()
    # reflect once, then clip anything that overshot by more than a domain
    x = np.where(x < lo, 2 * lo - x, x)
    x = np.where(x > hi, 2 * hi - x, x)
    return np.clip(x, lo, hi), n_out


def _advance(ens: Ensemble, drift_table: np.ndarray, grid: Grid1D, sigma: float,
             dt: float, lane: int, sign: float) -> Ensemble:
    if not dt > 0:
        raise DomainError("dt must be positive")
    x = ens.positions
    b = interp_uniform(grid, drift_table, x)
    step = sign * b * dt
    if sigma > 0:
        step = step + sigma * np.sqrt(dt) * ens.rng.normal(x.shape[0], step=ens.step, lane=lane)
    new, n_out = _confine(x + step, grid)
    return replace(ens, positions=new, time=ens.time + sign * dt, step=ens.step + 1,
                   boundary_events=ens.boundary_events + n_out)


def forward_step(ens: Ensemble, drift: DriftSpec, dt: float) -> Ensemble:
    """Euler-Maruyama step with drift ``v + u``; time advances by ``dt``."""
    return _advance(ens, drift.forward_drift, drift.grid, drift.sigma, dt, FORWARD_LANE, +1.0)


def backward_step(ens: Ensemble, drift: DriftSpec, dt: float) -> Ensemble:
    """Step of the backward process; the returned ensemble is at ``t - dt``.

    The forward-time increment ``X(t) - X(t - dt)`` equals ``(v - u) dt``
    plus noise drawn on a separate lane.
    """
    return _advance(ens, drift.backward_drift, drift.grid, drift.sigma, dt, BACKWARD_LANE, -1.0)


def empirical_density(ens, grid: Grid1D, bandwidth: float) -> np.ndarray:
    """Gaussian kernel density estimate on the grid, normalized to 1.

    Positions are linearly binned onto the grid and the bins are convolved
    with the sampled kernel (circularly on periodic grids). Binning uses
    ``np.bincount`` so the result is independent of particle scheduling.
    """
    pos = ens.positions if isinstance(ens, Ensemble) else np.asarray(ens, dtype=float)
    if pos.size == 0:
        raise DomainError("cannot estimate a density from an empty ensemble")
    if not bandwidth > 0:
        raise DomainError("bandwidth must be positive")
    n, dx = grid.n_points, grid.dx
    s = (pos - grid.x_min) / dx
    if grid.periodic:
        s = np.mod(s, n)
        i = np.floor(s).astype(np.intp)
        frac = s - i
        counts = np.bincount(i % n, weights=1.0 - frac, minlength=n)
        counts += np.bincount((i + 1) % n, weights=frac, minlength=n)
    else:
        keep = (s >= 0) & (s <= n - 1)
        s = s[keep]
        i = np.minimum(s.astype(np.intp), n - 2)
        frac = s - i
        counts = np.bincount(i, weights=1.0 - frac, minlength=n)
        counts += np.bincount(i + 1, weights=frac, minlength=n)
    half = int(np.ceil(8.0 * bandwidth / dx))
    if grid.periodic:
        lag = dx * np.minimum(np.arange(n), n - np.arange(n))
        kernel = np.exp(-0.5 * (lag / bandwidth) ** 2)
        dens = np.real(np.fft.ifft(np.fft.fft(counts) * np.fft.fft(kernel)))
    else:
        kernel = np.exp(-0.5 * (np.arange(-half, half + 1) * dx / bandwidth) ** 2)
        dens = np.convolve(counts, kernel, mode="full")[half:half + n]
    dens = np.clip(dens, 0.0, None)
    total = dens.sum() * dx
    if total <= 0:
        raise DomainError("no particles inside the grid")
    return dens / total


def l1_distance(p, q, dx: float) -> float:
    return float(np.sum(np.abs(np.asarray(p) - np.asarray(q))) * dx)


def fokker_planck_residual(rho_before, rho_after, drift: DriftSpec, dt: float, dx: float | None = None,
                           direction: str = "forward") -> float:
    """Max-norm residual of the forward or backward Fokker-Planck equation.

    forward:  rho_t + (b_f rho)_x - D rho_xx
    backward: rho_t + (b_b rho)_x + D rho_xx
    with ``D = sigma^2 / 2`` and the spatial terms evaluated on the average
    of the two snapshots.
    """
    rho0 = np.asarray(rho_before, dtype=float)
    rho1 = np.asarray(rho_after, dtype=float)
    grid = drift.grid
    if dx is None:
        dx = grid.dx
    if rho0.shape != (grid.n_points,) or rho1.shape != rho0.shape:
        raise DimensionError("density snapshots must match the drift grid")
    if not np.isclose(dx, grid.dx):
        raise DimensionError("dx does not match the drift grid")
    if direction == "forward":
        b, sign = drift.forward_drift, -1.0
    elif direction == "backward":
        b, sign = drift.backward_drift, +1.0
    else:
        raise DomainError(f"direction must be 'forward' or 'backward', not {direction!r}")
    rho = 0.5 * (rho0 + rho1)
    res = ((rho1 - rho0) / dt
           + central_gradient(b * rho, dx, grid.periodic)
           + sign * drift.diffusion * second_derivative(rho, dx, grid.periodic))
    return float(np.max(np.abs(res)))


def quantum_classical_transition(drift: DriftSpec, rho=None) -> float:
    """Probability-weighted osmotic speed ``int |u| rho dx`` (rho normalized).

    Zero means the forward and backward drifts balance.
    """
    rho = drift.rho if rho is None else rho
    if rho is None:
        raise DomainError("a density is required (construct the drift from a wavefunction)")
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (drift.grid.n_points,):
        raise DimensionError("density does not match the drift grid")
    dx = drift.grid.dx
    norm = rho.sum() * dx
    if norm <= 0:
        raise DomainError("density integrates to zero")
    return float(np.sum(np.abs(drift.u_field) * rho) * dx / norm)


# ------------------------------------------------------------- co-evolution


def coevolve(psi: ComplexField, potential: Potential, ens: Ensemble, dt: float, n_steps: int,
             hbar: float = 1.0, mass: float = 1.0, refresh_every: int = 1,
             oracle_substeps: int = 1, direction: str = "forward"):
    """Advance the oracle wavefunction and the ensemble together.

    The oracle takes ``oracle_substeps`` Crank-Nicolson steps per ensemble
    step; drifts are re-derived from the current wavefunction every
    ``refresh_every`` ensemble steps. Returns ``(psi, ensemble)``.
    """
    if refresh_every < 1 or oracle_substeps < 1:
        raise DomainError("refresh_every and oracle_substeps must be >= 1")
    stepper = forward_step if direction == "forward" else backward_step
    cn = CrankNicolson(psi.grid, potential, dt / oracle_substeps, hbar, mass)
    vals = psi.values
    drift = DriftSpec.from_wavefunction(psi, hbar, mass)
    for k in range(int(n_steps)):
        if k and k % refresh_every == 0:
            drift = DriftSpec.from_wavefunction(psi.with_values(vals), hbar, mass)
        ens = stepper(ens, drift, dt)
        for _ in range(oracle_substeps):
            vals = cn.step_values(vals)
    return psi.with_values(vals), ens


def run_stationary(ens: Ensemble, drift: DriftSpec, dt: float, n_steps: int,
                   direction: str = "forward") -> Ensemble:
    stepper = forward_step if direction == "forward" else backward_step
    for _ in range(int(n_steps)):
        ens = stepper(ens, drift, dt)
    return ens


def write_trajectories(path, times, positions, thin: int = 1):
    """CSV (particle_id, t, x); ``positions`` has shape (n_times, n_particles).

    ``thin`` keeps every thin-th particle.
    """
    positions = np.asarray(positions, dtype=float)
    ids = np.arange(positions.shape[1])[:: max(int(thin), 1)]
    rows = ((int(i), t, positions[k, i]) for k, t in enumerate(times) for i in ids)
    return write_csv(path, ["particle_id", "t", "x"], rows)
