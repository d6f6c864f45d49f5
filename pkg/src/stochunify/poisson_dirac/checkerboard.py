"""Light-cone lattice (checkerboard) transfer matrix and its path sum.

Each step shifts right movers one site right and left movers one site
left, then mixes the two components with

    M = [[1 - w, w], [w, 1 - w]]

``w = a*dt`` reproduces the telegraph process; ``w = i*m*c**2*dt/hbar``
gives the lattice Dirac propagator. Every history therefore carries a
factor ``w`` per reversal and ``1 - w`` per step without one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError

MIXING_MODES = ("first_order", "exact")


@dataclass(frozen=True)
class CheckerboardLattice:
    """``dx`` is derived as ``c * dt`` so the lattice is null-aligned."""

    n_sites: int
    n_steps: int
    dt: float
    c: float = 1.0
    flip_weight: complex = 0.0
    mixing: str = "first_order"
    periodic: bool = True

    def __post_init__(self):
        if self.n_steps < 1:
            raise DomainError("n_steps must be >= 1")
        if self.n_sites < 2:
            raise DomainError("n_sites must be >= 2")
        if self.mixing not in MIXING_MODES:
            raise DomainError(f"mixing must be one of {MIXING_MODES}")
        if not self.dt > 0 or not self.c > 0:
            raise DomainError("dt and c must be positive")

    @property
    def dx(self) -> float:
        return self.c * self.dt

    @classmethod
    def stochastic(cls, n_sites, n_steps, dt, rate, c=1.0, **kw):
        return cls(n_sites, n_steps, dt, c, rate * dt, **kw)

    @classmethod
    def dirac(cls, n_sites, n_steps, dt, mass, c=1.0, hbar=1.0, **kw):
        return cls(n_sites, n_steps, dt, c, 1j * mass * c**2 * dt / hbar, **kw)


def mixing_matrix(w, exact: bool = False):
    """2x2 mixing matrix; ``exact`` gives ``expm(w (sigma_x - I))``."""
    if exact:
        e = np.exp(-w)
        return np.array([[e * np.cosh(w), e * np.sinh(w)], [e * np.sinh(w), e * np.cosh(w)]])
    return np.array([[1 - w, w], [w, 1 - w]])


def _shift(arr, offset: int, periodic: bool):
    if periodic:
        return np.roll(arr, offset)
    out = np.zeros_like(arr)
    if offset > 0:
        out[offset:] = arr[:-offset]
    else:
        out[:offset] = arr[-offset:]
    return out


def _mix(right, left, m):
    return m[0][0] * right + m[0][1] * left, m[1][0] * right + m[1][1] * left


def checkerboard_propagate(lattice: CheckerboardLattice, right, left):
    """Apply ``n_steps`` transfer-matrix steps to (right movers, left movers).

    First-order mixing runs shift-then-mix, which is literally the path sum.
    Exact mixing uses the symmetric arrangement half-mix / shift / half-mix
    so the splitting error is second order. Object arrays (e.g. of
    ``fractions.Fraction``) are supported for exact arithmetic.
    """
    r = np.array(right, copy=True)
    lft = np.array(left, copy=True)
    if r.shape != (lattice.n_sites,) or lft.shape != r.shape:
        raise DomainError("initial data must have one value per lattice site")
    w = lattice.flip_weight
    if r.dtype != object and np.iscomplexobj(w):
        r, lft = r.astype(complex), lft.astype(complex)
    if lattice.mixing == "exact":
        half = mixing_matrix(0.5 * w, exact=True)
        for _ in range(lattice.n_steps):
            r, lft = _mix(r, lft, half)
            r, lft = _shift(r, 1, lattice.periodic), _shift(lft, -1, lattice.periodic)
            r, lft = _mix(r, lft, half)
        return r, lft
    m = ((1 - w, w), (w, 1 - w))
    for _ in range(lattice.n_steps):
        r, lft = _shift(r, 1, lattice.periodic), _shift(lft, -1, lattice.periodic)
        r, lft = _mix(r, lft, m)
    return r, lft


def path_sum(n_sites: int, n_steps: int, w, start_site: int, start_component: int,
             periodic: bool = True):
    """Brute-force sum over all ``2**n_steps`` direction histories.

    ``start_component`` is 0 for a right mover and 1 for a left mover. A
    history is the sequence of components chosen after each step; the
    particle moves according to its current component, then either keeps it
    (weight ``1 - w``) or reverses (weight ``w``). Returns the amplitude
    arrays (right, left) over sites.
    """
    zero = w * 0
    right = [zero] * n_sites
    left = [zero] * n_sites
    for history in itertools.product((0, 1), repeat=n_steps):
        site, comp, weight = start_site, start_component, 1 + zero
        for nxt in history:
            site += 1 if comp == 0 else -1
            if not periodic and not 0 <= site < n_sites:
                weight = zero
                break
            weight = weight * (w if nxt != comp else 1 - w)
            comp = nxt
        if weight == zero:
            continue
        site %= n_sites
        if comp == 0:
            right[site] = right[site] + weight
        else:
            left[site] = left[site] + weight
    return np.array(right, dtype=object), np.array(left, dtype=object)
