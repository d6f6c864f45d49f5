"""Six-component Riemann-Silberstein wave equation

    i hbar Psi_t = -i c hbar Sigma . grad Psi + m c^2 beta Psi,   Psi = (F+, F-)

with ``Sigma_i = diag(S_i, -S_i)`` built from the Cartesian spin-1 matrices
``(S_i)_jk = -i eps_ijk`` and ``beta`` swapping the two helicity blocks.
Fields vary along one coordinate x; ``direction`` chooses which spin
matrix multiplies the derivative (z by default).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigError, DimensionError, DomainError
from ..numerics import Grid1D, fit_order


def spin1_matrices() -> np.ndarray:
    """Array of shape (3, 3, 3) holding S_x, S_y, S_z."""
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    return -1j * eps


def helicity_sigma() -> np.ndarray:
    """Sigma_i = diag(S_i, -S_i), shape (3, 6, 6)."""
    S = spin1_matrices()
    out = np.zeros((3, 6, 6), dtype=complex)
    out[:, :3, :3] = S
    out[:, 3:, 3:] = -S
    return out


def beta_matrix() -> np.ndarray:
    b = np.zeros((6, 6))
    b[:3, 3:] = np.eye(3)
    b[3:, :3] = np.eye(3)
    return b


def _direction_vector(direction) -> np.ndarray:
    if isinstance(direction, str):
        axes = {"x": 0, "y": 1, "z": 2}
        if direction not in axes:
            raise DomainError(f"direction must be x, y, z or a 3-vector, not {direction!r}")
        n = np.zeros(3)
        n[axes[direction]] = 1.0
        return n
    n = np.asarray(direction, dtype=float)
    if n.shape != (3,) or not np.isclose(np.linalg.norm(n), 1.0):
        raise DomainError("direction vector must be a unit 3-vector")
    return n


def rs_hamiltonian(k, mass, c=1.0, hbar=1.0, direction="z") -> np.ndarray:
    """``H(k) = c hbar k (n . Sigma) + m c^2 beta`` for each k, shape (..., 6, 6)."""
    n = _direction_vector(direction)
    sig_n = np.einsum("i,ijk->jk", n, helicity_sigma())
    k = np.asarray(k, dtype=float)
    return c * hbar * k[..., None, None] * sig_n + mass * c**2 * beta_matrix()


@dataclass(frozen=True, eq=False)
class RSDiracState:
    """``components`` has shape (6, n_points): F+ (x, y, z) then F- (x, y, z)."""

    components: np.ndarray
    grid: Grid1D
    mass: float = 0.0
    c: float = 1.0
    hbar: float = 1.0
    direction: str = "z"
    time: float = 0.0

    def __post_init__(self):
        comp = np.asarray(self.components, dtype=complex)
        if comp.ndim != 2 or comp.shape[0] != 6:
            raise DimensionError("an RS state needs exactly 6 components per grid point")
        if comp.shape[1] != self.grid.n_points:
            raise DimensionError("components do not match the grid")
        object.__setattr__(self, "components", comp)

    @property
    def f_plus(self) -> np.ndarray:
        return self.components[:3]

    @property
    def f_minus(self) -> np.ndarray:
        return self.components[3:]

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.components) ** 2) * self.grid.dx)

    @classmethod
    def from_helicity(cls, grid, f_plus, f_minus, **kw) -> "RSDiracState":
        return cls(np.vstack([np.asarray(f_plus), np.asarray(f_minus)]), grid, **kw)


class RSPropagator:
    """Mode-wise ``exp(-i H(k) dt / hbar)`` from a batched eigendecomposition."""

    def __init__(self, grid: Grid1D, mass: float, dt: float, c: float = 1.0, hbar: float = 1.0,
                 direction="z"):
        if not grid.periodic:
            raise DomainError("the RS solver needs a periodic grid")
        H = rs_hamiltonian(grid.wavenumbers(), mass, c, hbar, direction)
        w, V = np.linalg.eigh(H)
        phase = np.exp(-1j * w * dt / hbar)
        self.U = np.einsum("kij,kj,klj->kil", V, phase, V.conj())
        self.dt = dt

    def step_array(self, comp: np.ndarray) -> np.ndarray:
        f = np.fft.fft(comp, axis=1)
        g = np.einsum("kij,jk->ik", self.U, f)
        return np.fft.ifft(g, axis=1)


def rs_dirac_step(state: RSDiracState, dt: float, n_steps: int = 1) -> RSDiracState:
    if not dt > 0:
        raise DomainError("dt must be positive")
    prop = RSPropagator(state.grid, state.mass, dt, state.c, state.hbar, state.direction)
    comp = state.components
    for _ in range(int(n_steps)):
        comp = prop.step_array(comp)
    return replace(state, components=comp, time=state.time + n_steps * dt)


def rs_l2(a: np.ndarray, b: np.ndarray, dx: float) -> float:
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2) * dx))


def default_rs_packet(grid: Grid1D, width: float = 1.0, k0: float = 1.0, **kw) -> RSDiracState:
    """Positive-helicity packet with a small opposite-helicity admixture."""
    x = grid.x
    env = np.exp(-0.5 * (x / width) ** 2) * np.exp(1j * k0 * x)
    circ = np.array([1.0, 1j, 0.0]) / np.sqrt(2.0)
    f_plus = np.outer(circ, env) + np.outer([0.0, 0.0, 0.3], env)
    f_minus = np.outer(circ.conj(), 0.5 * env)
    state = RSDiracState.from_helicity(grid, f_plus, f_minus, **kw)
    return replace(state, components=state.components / np.sqrt(state.norm2()))


def massless_limit_study(template: RSDiracState, masses, t_final: float, n_steps: int = 1,
                         bound_margin: float = 0.05) -> dict:
    """Evolve identical data for a decreasing mass ladder and for m = 0.

    The m = 0 run is separate; it is the limit the ladder approaches, not a
    member of it. Reports successive differences, their ratios, a fitted
    first-order constant ``C`` (difference to m = 0 ~ C m) and whether the
    smallest-mass run sits within ``(1 + bound_margin) * C * m_min`` of the
    massless one; the margin absorbs O(m^2) corrections to the linear fit.
    """
    masses = [float(m) for m in masses]
    problems = {}
    if len(masses) < 3:
        problems["masses"] = "need at least three masses"
    elif any(m <= 0 for m in masses):
        problems["masses"] = "all masses must be > 0 (the limit point m = 0 is run separately)"
    else:
        ratios = np.array(masses[:-1]) / np.array(masses[1:])
        if np.any(ratios <= 1.0):
            problems["masses"] = "masses must be strictly decreasing"
        elif not np.allclose(ratios, ratios[0], rtol=1e-9):
            problems["masses"] = "masses must form a geometric sequence"
    if problems:
        raise ConfigError(problems)
    dt = t_final / n_steps
    finals = [rs_dirac_step(replace(template, mass=m), dt, n_steps).components for m in masses]
    massless = rs_dirac_step(replace(template, mass=0.0), dt, n_steps).components
    dx = template.grid.dx
    succ = [rs_l2(finals[i], finals[i + 1], dx) for i in range(len(masses) - 1)]
    to_zero = [rs_l2(f, massless, dx) for f in finals]
    succ_ratios = [succ[i] / succ[i + 1] for i in range(len(succ) - 1)]
    # d(m_i, m_{i+1}) ~ C (m_i - m_{i+1})
    C = max(s / (masses[i] - masses[i + 1]) for i, s in enumerate(succ))
    order = fit_order(masses, to_zero) if all(d > 0 for d in to_zero) else float("nan")
    return {
        "masses": masses,
        "t_final": t_final,
        "successive_differences": succ,
        "successive_ratios": succ_ratios,
        "difference_to_massless": to_zero,
        "fitted_constant": C,
        "fitted_order_in_mass": order,
        "bound_margin": bound_margin,
        "smallest_mass_bound_holds": bool(to_zero[-1] <= (1.0 + bound_margin) * C * masses[-1]),
        "monotone": bool(all(np.diff(to_zero) < 0)),
    }
