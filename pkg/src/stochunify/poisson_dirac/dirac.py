"""1D Weyl-Dirac equation ``i hbar psi_t = m c^2 sigma_x psi + i c hbar sigma_z psi_x``.

Sign convention (used everywhere in this package): with the equation as
written, ``psi_plus`` travels towards -x at speed c and ``psi_minus``
towards +x when m = 0. The continued telegraph lattice maps onto it via

    psi_plus = exp(i m c^2 t / hbar) * left
    psi_minus = -exp(i m c^2 t / hbar) * right

(see :func:`weyl_from_lattice`), where ``right``/``left`` are the
checkerboard right- and left-mover amplitudes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from ..errors import DimensionError, DomainError
from ..numerics import Grid1D, fit_order
from .checkerboard import CheckerboardLattice, checkerboard_propagate

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WeylSpinor:
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    grid: Grid1D
    mass: float = 1.0
    c: float = 1.0
    hbar: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        n = self.grid.n_points
        for name in ("psi_plus", "psi_minus"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != (n,):
                raise DimensionError(f"{name} must have one value per grid point")
            object.__setattr__(self, name, arr)
        if self.mass < 0:
            raise DomainError("mass must be non-negative")

    def norm2(self) -> float:
        return float((np.sum(np.abs(self.psi_plus) ** 2) + np.sum(np.abs(self.psi_minus) ** 2)) * self.grid.dx)

    def normalized(self) -> "WeylSpinor":
        s = 1.0 / np.sqrt(self.norm2())
        return replace(self, psi_plus=self.psi_plus * s, psi_minus=self.psi_minus * s)


def weyl_hamiltonian(k, mass, c=1.0, hbar=1.0) -> np.ndarray:
    """Mode matrices ``H(k) = m c^2 sigma_x - c hbar k sigma_z``, shape (..., 2, 2)."""
    k = np.asarray(k, dtype=float)
    H = np.zeros(k.shape + (2, 2), dtype=complex)
    H[..., 0, 0] = -c * hbar * k
    H[..., 1, 1] = c * hbar * k
    H[..., 0, 1] = H[..., 1, 0] = mass * c**2
    return H


def dirac_frequency(k, mass, c=1.0, hbar=1.0):
    """Positive-energy angular frequency ``sqrt((m c^2)^2 + (c hbar k)^2) / hbar``."""
    return np.sqrt((mass * c**2) ** 2 + (c * hbar * np.asarray(k)) ** 2) / hbar


def weyl_propagator(k, mass, dt, c=1.0, hbar=1.0) -> np.ndarray:
    """Closed-form ``exp(-i H(k) dt / hbar)`` for every mode."""
    E = hbar * dirac_frequency(k, mass, c, hbar)
    theta = E * dt / hbar
    cos = np.cos(theta)
    # sin(theta)/E -> dt/hbar as E -> 0
    sinc = np.where(E > 0, np.sin(theta) / np.where(E > 0, E, 1.0), dt / hbar)
    H = weyl_hamiltonian(k, mass, c, hbar)
    U = -1j * sinc[..., None, None] * H
    U[..., 0, 0] += cos
    U[..., 1, 1] += cos
    return U


class DiracSpectral:
    """Exact-in-time Fourier propagator on a periodic grid (cached per dt)."""

    def __init__(self, grid: Grid1D, mass: float, dt: float, c: float = 1.0, hbar: float = 1.0):
        if not grid.periodic:
            raise DomainError("the spectral Dirac solver needs a periodic grid")
        if not grid.is_power_of_two:
            log.warning("grid size %d is not a power of two; FFTs take the slow path", grid.n_points)
        self.grid, self.mass, self.dt, self.c, self.hbar = grid, mass, dt, c, hbar
        self.U = weyl_propagator(grid.wavenumbers(), mass, dt, c, hbar)

    def step_arrays(self, plus, minus):
        fp, fm = np.fft.fft(plus), np.fft.fft(minus)
        U = self.U
        gp = U[:, 0, 0] * fp + U[:, 0, 1] * fm
        gm = U[:, 1, 0] * fp + U[:, 1, 1] * fm
        return np.fft.ifft(gp), np.fft.ifft(gm)

    def step(self, spinor: WeylSpinor, n_steps: int = 1) -> WeylSpinor:
        p, m = spinor.psi_plus, spinor.psi_minus
        for _ in range(int(n_steps)):
            p, m = self.step_arrays(p, m)
        return replace(spinor, psi_plus=p, psi_minus=m, time=spinor.time + n_steps * self.dt)


def dirac_spectral_step(spinor: WeylSpinor, dt: float) -> WeylSpinor:
    if not dt > 0:
        raise DomainError("dt must be positive")
    return DiracSpectral(spinor.grid, spinor.mass, dt, spinor.c, spinor.hbar).step(spinor)


def dirac_evolve(spinor: WeylSpinor, t_final: float, n_steps: int = 1) -> WeylSpinor:
    return DiracSpectral(spinor.grid, spinor.mass, t_final / n_steps, spinor.c, spinor.hbar).step(spinor, n_steps)


# ------------------------------------------------------ lattice <-> spinor


def lattice_from_weyl(spinor: WeylSpinor):
    """Checkerboard (right, left) amplitudes for a spinor at its own time."""
    phase = np.exp(-1j * spinor.mass * spinor.c**2 * spinor.time / spinor.hbar)
    return -phase * spinor.psi_minus, phase * spinor.psi_plus


def weyl_from_lattice(right, left, grid: Grid1D, mass, t, c=1.0, hbar=1.0) -> WeylSpinor:
    phase = np.exp(1j * mass * c**2 * t / hbar)
    return WeylSpinor(phase * np.asarray(left), -phase * np.asarray(right), grid, mass, c, hbar, t)


def weyl_l2(a: WeylSpinor, b: WeylSpinor) -> float:
    return float(np.sqrt((np.sum(np.abs(a.psi_plus - b.psi_plus) ** 2)
                          + np.sum(np.abs(a.psi_minus - b.psi_minus) ** 2)) * a.grid.dx))


def default_packet(grid: Grid1D, mass=1.0, c=1.0, hbar=1.0, width=1.0, k0=1.0) -> WeylSpinor:
    """Smooth two-component packet used by the refinement studies."""
    x = grid.x
    env = np.exp(-0.5 * (x / width) ** 2)
    plus = env * np.exp(1j * k0 * x)
    minus = 0.5j * env * np.exp(-1j * 0.5 * k0 * x)
    return WeylSpinor(plus, minus, grid, mass, c, hbar).normalized()


def checkerboard_vs_dirac(mass: float = 1.0, t_final: float = 1.0, length: float = 32.0,
                          n_sites0: int = 256, n_rungs: int = 4, mixing: str = "first_order",
                          c: float = 1.0, hbar: float = 1.0, width: float = 1.0, k0: float = 1.0) -> dict:
    """Refinement study of the continued lattice against the spectral solver.

    Rung ``r`` uses ``n_sites0 * 2**r`` sites on a periodic domain of the
    given length, so ``dt = length / (c * n_sites)``. Returns a report with
    the dt ladder, L2 errors and the fitted order.
    """
    dts, errors = [], []
    for r in range(int(n_rungs)):
        n_sites = int(n_sites0) * 2**r
        grid = Grid1D(-0.5 * length, 0.5 * length, n_sites, periodic=True)
        dt = grid.dx / c
        n_steps = int(round(t_final / dt))
        if not np.isclose(n_steps * dt, t_final, rtol=1e-12, atol=0):
            raise DomainError("t_final must be a whole number of lattice steps on every rung")
        init = default_packet(grid, mass, c, hbar, width, k0)
        lattice = CheckerboardLattice.dirac(n_sites, n_steps, dt, mass, c, hbar, mixing=mixing)
        right, left = checkerboard_propagate(lattice, *lattice_from_weyl(init))
        lat = weyl_from_lattice(right, left, grid, mass, n_steps * dt, c, hbar)
        ref = dirac_evolve(init, n_steps * dt, 1)
        dts.append(dt)
        errors.append(weyl_l2(lat, ref))
    positive = all(e > 0 for e in errors)
    order = fit_order(dts, errors) if positive and len(dts) > 1 else float("nan")
    return {"mixing": mixing, "mass": mass, "t_final": t_final,
            "dt_ladder": dts, "l2_errors": errors, "fitted_order": order}
