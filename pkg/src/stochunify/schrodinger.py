"""Reference Schrodinger solver and the wavefunction -> diffusion map.

The Crank-Nicolson propagator here is the ground truth that the particle
ensembles in :mod:`stochunify.nelson` are compared against. ``nelson_map``
turns a wavefunction into the density, osmotic velocity ``u``, current
velocity ``v`` and the log-amplitude/phase pair ``R``, ``S``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import solve_banded
from scipy.sparse.linalg import splu

from .errors import DegenerateStateError, DimensionError, DomainError, NumericError
from .io import write_csv
from .numerics import ComplexField, Grid1D, central_gradient, second_derivative

RHO_FLOOR_REL = 1e-12


@dataclass(frozen=True, eq=False)
class Potential:
    kind: str = "free"
    omega: float | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("free", "harmonic", "custom"):
            raise DomainError(f"unknown potential kind {self.kind!r}")
        if self.kind == "harmonic" and not (self.omega is not None and self.omega > 0):
            raise DomainError("harmonic potential requires omega > 0")
        if self.kind == "custom":
            if self.values is None:
                raise DomainError("custom potential requires tabulated values")
            object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @classmethod
    def free(cls):
        return cls("free")

    @classmethod
    def harmonic(cls, omega: float):
        return cls("harmonic", omega=omega)

    @classmethod
    def custom(cls, values):
        return cls("custom", values=values)

    def on_grid(self, grid: Grid1D, mass: float = 1.0) -> np.ndarray:
        if self.kind == "free":
            return np.zeros(grid.n_points)
        if self.kind == "harmonic":
            return 0.5 * mass * self.omega**2 * grid.x**2
        if self.values.shape != (grid.n_points,):
            raise DimensionError("custom potential table does not match the grid")
        return self.values


@dataclass(frozen=True, eq=False)
class NelsonFields:
    """Density and velocity fields of the diffusion associated with psi.

    ``u``, ``v``, ``R`` and ``S`` are NaN where ``rho`` is below
    ``RHO_FLOOR_REL * max(rho)``; ``mask`` marks the valid points.
    """

    grid: Grid1D
    rho: np.ndarray
    u: np.ndarray
    v: np.ndarray
    R: np.ndarray
    S: np.ndarray
    mask: np.ndarray
    hbar: float = 1.0
    mass: float = 1.0

    @property
    def forward_drift(self) -> np.ndarray:
        return self.v + self.u

    @property
    def backward_drift(self) -> np.ndarray:
        return self.v - self.u


# ---------------------------------------------------------------- references


def harmonic_ground_state(grid: Grid1D, omega: float = 1.0, hbar: float = 1.0, mass: float = 1.0,
                          x0: float = 0.0) -> ComplexField:
    a = mass * omega / hbar
    psi = (a / np.pi) ** 0.25 * np.exp(-0.5 * a * (grid.x - x0) ** 2)
    return ComplexField(grid, psi.astype(complex))


def gaussian_packet(grid: Grid1D, sigma: float, x0: float = 0.0, k0: float = 0.0) -> ComplexField:
    """Normalized packet whose density has standard deviation ``sigma``."""
    x = grid.x - x0
    psi = (2.0 * np.pi * sigma**2) ** -0.25 * np.exp(-(x**2) / (4.0 * sigma**2) + 1j * k0 * grid.x)
    return ComplexField(grid, psi)


def free_packet_variance(t, sigma0: float, hbar: float = 1.0, mass: float = 1.0):
    """Position variance of a free minimum-uncertainty packet at time ``t``."""
    t = np.asarray(t, dtype=float)
    return sigma0**2 * (1.0 + (hbar * t / (2.0 * mass * sigma0**2)) ** 2)


def position_moments(psi: ComplexField) -> tuple[float, float]:
    """Mean and variance of ``|psi|^2`` (normalized internally)."""
    rho = psi.density
    w = rho / rho.sum()
    x = psi.grid.x
    mean = float(np.sum(w * x))
    return mean, float(np.sum(w * (x - mean) ** 2))


# ------------------------------------------------------------ Crank-Nicolson


class CrankNicolson:
    """Cached Crank-Nicolson propagator for ``i hbar psi_t = H psi``.

    Clamped grids use homogeneous Dirichlet walls just outside the domain;
    periodic grids use the cyclic three-point Laplacian.
    """

    def __init__(self, grid: Grid1D, potential: Potential, dt: float,
                 hbar: float = 1.0, mass: float = 1.0):
        if not dt > 0:
            raise DomainError("dt must be positive")
        self.grid, self.dt, self.hbar, self.mass = grid, dt, hbar, mass
        n, dx = grid.n_points, grid.dx
        V = potential.on_grid(grid, mass)
        kin = hbar**2 / (2.0 * mass * dx * dx)
        diag = 2.0 * kin + V
        off = -kin * np.ones(n - 1)
        alpha = 0.5j * dt / hbar
        self._diag_b = 1.0 - alpha * diag
        self._off_b = -alpha * off
        if grid.periodic:
            H = sparse.diags([off, diag, off], [-1, 0, 1], shape=(n, n), format="lil")
            H[0, n - 1] = H[n - 1, 0] = -kin
            H = H.tocsc()
            eye = sparse.identity(n, dtype=complex, format="csc")
            self._lu = splu((eye + alpha * H).tocsc())
            self._B = (eye - alpha * H).tocsr()
        else:
            ab = np.zeros((3, n), dtype=complex)
            ab[0, 1:] = alpha * off
            ab[1, :] = 1.0 + alpha * diag
            ab[2, :-1] = alpha * off
            self._ab = ab

    def step_values(self, psi: np.ndarray) -> np.ndarray:
        if self.grid.periodic:
            out = self._lu.solve(self._B @ psi)
        else:
            rhs = self._diag_b * psi
            rhs[:-1] += self._off_b * psi[1:]
            rhs[1:] += self._off_b * psi[:-1]
            try:
                out = solve_banded((1, 1), self._ab, rhs, check_finite=False)
            except np.linalg.LinAlgError as exc:
                raise NumericError(f"singular Crank-Nicolson system: {exc}") from exc
        if not np.all(np.isfinite(out)):
            raise NumericError("Crank-Nicolson step produced non-finite values")
        return out

    def step(self, psi: ComplexField) -> ComplexField:
        return psi.with_values(self.step_values(psi.values))

    def evolve(self, psi: ComplexField, n_steps: int) -> ComplexField:
        vals = psi.values
        for _ in range(int(n_steps)):
            vals = self.step_values(vals)
        return psi.with_values(vals)


def default_dt(grid: Grid1D, hbar: float = 1.0, mass: float = 1.0) -> float:
    return 0.1 * mass * grid.dx**2 / hbar


def crank_nicolson_step(psi: ComplexField, V: Potential, dt: float,
                        hbar: float = 1.0, mass: float = 1.0) -> ComplexField:
    """Advance ``psi`` by one unitary Crank-Nicolson step."""
    return CrankNicolson(psi.grid, V, dt, hbar, mass).step(psi)


# ---------------------------------------------------------------- Nelson map


def density_floor(rho: np.ndarray) -> float:
    return RHO_FLOOR_REL * float(np.max(rho))


def osmotic_velocity(rho, hbar: float = 1.0, mass: float = 1.0, dx: float = 1.0,
                     periodic: bool = False) -> np.ndarray:
    """``(hbar/2m) d/dx ln rho``; NaN below the density floor."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("density has negative entries")
    with np.errstate(divide="ignore", invalid="ignore"):
        log_rho = np.where(rho > 0, np.log(np.where(rho > 0, rho, 1.0)), np.nan)
        u = (hbar / (2.0 * mass)) * central_gradient(log_rho, dx, periodic)
    u[rho < density_floor(rho)] = np.nan
    return u


def _sublattice_offset(S: np.ndarray, weights: np.ndarray) -> float:
    """Shift that aligns the odd sub-lattice of ``S`` with the even one.

    Every odd point is compared with the quintic interpolant of its six
    even neighbours (error O(dx^6)); the mismatches are averaged with
    weights ``weights**2`` so high-density, smooth-phase regions dominate.
    """
    k = np.arange(5, S.size - 5, 2)
    interp = (3.0 * (S[k - 5] + S[k + 5]) - 25.0 * (S[k - 3] + S[k + 3])
              + 150.0 * (S[k - 1] + S[k + 1])) / 256.0
    w = weights[k] ** 2
    return float(np.dot(w, interp - S[k]) / w.sum())


def action_from_velocity(v, mass: float, dx: float, mask=None, weights=None) -> np.ndarray:
    """Integrate ``v = (1/m) dS/dx`` back to ``S`` on each valid segment.

    The integration is the exact inverse of :func:`central_gradient` (the
    even and odd sub-lattices are advanced with ``S[i+1] = S[i-1] +
    2 dx m v[i]``), so a central-difference velocity field reproduces the
    sampled phase up to rounding. Each contiguous valid segment starts at
    ``S = 0``. ``weights`` (e.g. the density) steer the fit that aligns
    the two sub-lattices when a segment starts inside the grid.
    """
    p = mass * np.asarray(v, dtype=float)
    n = p.shape[0]
    if mask is None:
        mask = np.isfinite(p)
    S = np.full(n, np.nan)
    i = 0
    while i < n:
        if not mask[i]:
            i += 1
            continue
        j = i
        while j < n and mask[j]:
            j += 1
        seg = p[i:j]
        S_seg = np.zeros(j - i)
        if j - i > 1:
            # S[1] - S[0] fixes the offset between the two sub-lattices.
            # At the grid edge the one-sided stencil makes the trapezoid exact;
            # inside the grid the offset is refined by a smoothness fit.
            S_seg[1] = 0.5 * dx * (seg[0] + seg[1])
            if i > 0 and j - i > 2:
                S_seg[1] -= 0.25 * dx * (seg[0] - 2.0 * seg[1] + seg[2])
            S_seg[2::2] = S_seg[0] + 2.0 * dx * np.cumsum(seg[1:-1:2])
            S_seg[3::2] = S_seg[1] + 2.0 * dx * np.cumsum(seg[2:-1:2])
            if i > 0 and j - i >= 12:
                w = np.ones(j - i) if weights is None else np.asarray(weights, dtype=float)[i:j]
                S_seg[1::2] += _sublattice_offset(S_seg, w)
        S[i:j] = S_seg
        i = j
    return S


def nelson_map(psi: ComplexField, hbar: float = 1.0, mass: float = 1.0) -> NelsonFields:
    """Density, osmotic/current velocities and (R, S) of a wavefunction."""
    grid = psi.grid
    rho = psi.density
    floor = density_floor(rho)
    mask = rho >= floor
    if floor == 0.0 or not np.any(rho > 0):
        raise DegenerateStateError("wavefunction vanishes on the whole grid")
    dx = grid.dx
    u = osmotic_velocity(rho, hbar, mass, dx, grid.periodic)
    if grid.periodic:
        # wrapped phase differences; an unwrapped phase jumps at the seam
        vals = psi.values
        dphase = np.angle(np.roll(vals, -1) * np.conj(np.roll(vals, 1)))
        v = (hbar / mass) * dphase / (2.0 * dx)
    else:
        phase = np.unwrap(np.angle(psi.values))
        v = (hbar / mass) * central_gradient(phase, dx)
    v[~mask] = np.nan
    with np.errstate(divide="ignore"):
        R = 0.5 * np.log(rho)
    R[~mask] = np.nan
    S = action_from_velocity(v, mass, dx, mask, weights=rho)
    return NelsonFields(grid, rho, u, v, R, S, mask, hbar, mass)


def reconstruct_wavefunction(fields: NelsonFields) -> ComplexField:
    """``sqrt(rho) exp(i S / hbar)``; zero where the fields are masked."""
    vals = np.where(fields.mask, np.sqrt(fields.rho) * np.exp(1j * np.nan_to_num(fields.S) / fields.hbar), 0.0)
    return ComplexField(fields.grid, vals)


def roundtrip_error(psi: ComplexField, hbar: float = 1.0, mass: float = 1.0) -> float:
    """Max pointwise ``|psi - sqrt(rho) exp(iS/hbar)|`` over the unmasked
    points, after removing the best global phase."""
    fields = nelson_map(psi, hbar, mass)
    rec = reconstruct_wavefunction(fields).values
    m = fields.mask
    overlap = np.vdot(rec[m], psi.values[m])
    phase = overlap / abs(overlap) if overlap != 0 else 1.0
    return float(np.max(np.abs(psi.values[m] - phase * rec[m])))


def random_smooth_state(grid: Grid1D, rng: np.random.Generator, n_bumps: int = 3) -> ComplexField:
    """Normalized superposition of Gaussian packets with random centres,
    widths, momenta and phases, kept well inside the grid."""
    x = grid.x
    half = 0.5 * grid.length
    vals = np.zeros(grid.n_points, dtype=complex)
    for _ in range(int(n_bumps)):
        x0 = rng.uniform(-0.3, 0.3) * half + grid.x_min + half
        width = rng.uniform(0.6, 1.5)
        k0 = rng.uniform(-2.0, 2.0)
        amp = rng.uniform(0.5, 1.0) * np.exp(2j * np.pi * rng.uniform())
        vals += amp * np.exp(-0.5 * ((x - x0) / width) ** 2 + 1j * k0 * x)
    return ComplexField(grid, vals).normalized()


def quantum_potential(R, hbar: float = 1.0, mass: float = 1.0, dx: float = 1.0,
                      periodic: bool = False) -> np.ndarray:
    """``-(hbar^2/2m) [(R')^2 + R'']``."""
    R = np.asarray(R, dtype=float)
    if not np.all(np.isfinite(R)):
        raise NumericError("R contains non-finite values")
    dR = central_gradient(R, dx, periodic)
    d2R = second_derivative(R, dx, periodic)
    return -(hbar**2 / (2.0 * mass)) * (dR**2 + d2R)


def quantum_potential_from_density(rho, hbar: float = 1.0, mass: float = 1.0, dx: float = 1.0,
                                   periodic: bool = False) -> np.ndarray:
    """Density form ``-(hbar^2/4m) [rho''/rho - (rho')^2 / (2 rho^2)]``."""
    rho = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(rho)):
        raise NumericError("rho contains non-finite values")
    if np.any(rho <= 0):
        raise DomainError("density form of the quantum potential needs rho > 0")
    d1 = central_gradient(rho, dx, periodic)
    d2 = second_derivative(rho, dx, periodic)
    return -(hbar**2 / (4.0 * mass)) * (d2 / rho - d1**2 / (2.0 * rho**2))


def continuity_residual(before: NelsonFields, after: NelsonFields, dt: float) -> float:
    """Max-norm of ``d_t rho + d_x (v rho)`` between two snapshots.

    Time-centred: the flux is averaged over both snapshots, so the residual
    of a smooth exact solution is O(dx^2 + dt^2).
    """
    if before.grid != after.grid:
        raise DimensionError("snapshots live on different grids")
    grid = before.grid
    flux = 0.5 * (np.where(before.mask, before.rho * before.v, 0.0)
                  + np.where(after.mask, after.rho * after.v, 0.0))
    res = (after.rho - before.rho) / dt + central_gradient(flux, grid.dx, grid.periodic)
    return float(np.max(np.abs(res)))


@dataclass(frozen=True, eq=False)
class CollapseReport:
    mask: np.ndarray
    regions: list = field(default_factory=list)
    mass_fraction: float = 0.0
    threshold: float = 0.0

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "mass_fraction": self.mass_fraction,
            "regions": [list(r) for r in self.regions],
        }


def collapse_detector(fields: NelsonFields, threshold: float) -> CollapseReport:
    """Regions where the osmotic velocity is below ``threshold`` in magnitude.

    Masked points (density under the floor) are never flagged.
    """
    flagged = np.zeros(fields.rho.shape, dtype=bool)
    ok = np.isfinite(fields.u)
    flagged[ok] = np.abs(fields.u[ok]) < threshold
    x = fields.grid.x
    regions = []
    edges = np.diff(np.concatenate(([0], flagged.astype(np.int8), [0])))
    for start, stop in zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)):
        regions.append((float(x[start]), float(x[stop - 1])))
    total = fields.rho.sum()
    frac = float(fields.rho[flagged].sum() / total) if total > 0 else 0.0
    return CollapseReport(flagged, regions, frac, threshold)


def export_snapshot(path, psi: ComplexField, hbar: float = 1.0, mass: float = 1.0):
    """CSV with columns x, re_psi, im_psi, rho, u, v (NaN where masked)."""
    f = nelson_map(psi, hbar, mass)
    rows = zip(psi.grid.x, psi.values.real, psi.values.imag, f.rho, f.u, f.v)
    return write_csv(path, ["x", "re_psi", "im_psi", "rho", "u", "v"], rows)
