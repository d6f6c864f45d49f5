"""su(N) structure constants and non-Abelian Riemann-Silberstein fields.

Generators are the generalized Gell-Mann matrices divided by two, so
``Tr(T^a T^b) = delta^ab / 2`` and ``[T^a, T^b] = i f^abc T^c``. Colour
indices run over the adjoint range ``0 .. N**2 - 2`` (0-based).

For a field record with real electric/magnetic vectors ``E^a``, ``B^a``:

    F(+/-)^a = E^a +/- i B^a + g f^abc (E^b x B^c)
    L        = 1/2 Re[ F^a* . F^a ]
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import DimensionError, DomainError
from .io import to_json_text
from .numerics import fit_order
from .poisson_dirac.rs_photon import RSDiracState, rs_dirac_step

log = logging.getLogger(__name__)

BRANCHES = (+1, -1)


def gellmann_matrices(N: int) -> np.ndarray:
    """Generalized Gell-Mann matrices, shape (N**2 - 1, N, N).

    Ordering reproduces the Pauli matrices for N = 2 and lambda_1..lambda_8
    for N = 3: for each k = 2..N the symmetric and antisymmetric
    off-diagonal pairs (j, k), j < k, followed by the k-th diagonal matrix.
    """
    if int(N) != N or N < 2:
        raise DomainError(f"N must be an integer >= 2, got {N}")
    N = int(N)
    mats = []
    for k in range(1, N):
        for j in range(k):
            sym = np.zeros((N, N), dtype=complex)
            sym[j, k] = sym[k, j] = 1.0
            anti = np.zeros((N, N), dtype=complex)
            anti[j, k] = -1j
            anti[k, j] = 1j
            mats += [sym, anti]
        diag = np.zeros(N)
        diag[:k] = 1.0
        diag[k] = -k
        mats.append(np.diag(diag * np.sqrt(2.0 / (k * (k + 1)))).astype(complex))
    return np.array(mats)


@dataclass(frozen=True, eq=False)
class SuNAlgebra:
    N: int
    generators: np.ndarray
    f: np.ndarray

    @property
    def dim(self) -> int:
        return self.N**2 - 1

    def antisymmetry_residual(self) -> float:
        f = self.f
        return float(max(np.abs(f + f.transpose(1, 0, 2)).max(),
                         np.abs(f + f.transpose(0, 2, 1)).max()))

    def jacobi_residual(self) -> float:
        f = self.f
        # f^{ade} f^{bcd} + f^{bde} f^{cad} + f^{cde} f^{abd}
        t1 = np.einsum("ade,bcd->abce", f, f)
        t2 = np.einsum("bde,cad->abce", f, f)
        t3 = np.einsum("cde,abd->abce", f, f)
        return float(np.abs(t1 + t2 + t3).max())

    def commutator_residual(self) -> float:
        T = self.generators
        comm = np.einsum("aij,bjk->abik", T, T) - np.einsum("bij,ajk->abik", T, T)
        rhs = 1j * np.einsum("abc,cij->abij", self.f, T)
        return float(np.abs(comm - rhs).max())


@lru_cache(maxsize=None)
def _structure_constants(N: int) -> SuNAlgebra:
    T = 0.5 * gellmann_matrices(N)
    # f^abc = -2 i Tr([T^a, T^b] T^c)
    comm = np.einsum("aij,bjk->abik", T, T) - np.einsum("bij,ajk->abik", T, T)
    f = np.real(-2j * np.einsum("abij,cji->abc", comm, T))
    f[np.abs(f) < 1e-15] = 0.0
    T.setflags(write=False)
    f.setflags(write=False)
    return SuNAlgebra(N, T, f)


def structure_constants(N: int) -> SuNAlgebra:
    if int(N) != N or N < 2:
        raise DomainError(f"N must be an integer >= 2, got {N}")
    return _structure_constants(int(N))


@dataclass(frozen=True, eq=False)
class LieField:
    algebra: SuNAlgebra
    E: np.ndarray
    B: np.ndarray
    g: float = 0.0

    def __post_init__(self):
        shape = (self.algebra.dim, 3)
        for name in ("E", "B"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise DimensionError(f"{name} must have shape {shape}, got {arr.shape}")
            object.__setattr__(self, name, arr)

    @classmethod
    def zeros(cls, N: int, g: float = 0.0) -> "LieField":
        alg = structure_constants(N)
        return cls(alg, np.zeros((alg.dim, 3)), np.zeros((alg.dim, 3)), g)

    def to_dict(self) -> dict:
        return {"N": self.algebra.N, "g": self.g, "E": self.E.tolist(), "B": self.B.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "LieField":
        alg = structure_constants(int(data["N"]))
        return cls(alg, np.array(data["E"], dtype=float), np.array(data["B"], dtype=float),
                   float(data.get("g", 0.0)))


def save_field(path, field: LieField):
    Path(path).write_text(to_json_text(field.to_dict()))


def load_field(path) -> LieField:
    return LieField.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True, eq=False)
class RSVector:
    F_plus: np.ndarray
    F_minus: np.ndarray

    def branch(self, sign: int) -> np.ndarray:
        if sign not in BRANCHES:
            raise DomainError("branch must be +1 or -1")
        return self.F_plus if sign > 0 else self.F_minus


def color_cross(f: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """``f^abc (X^b x Y^c)`` for per-index 3-vectors X, Y (real or complex)."""
    cross = np.cross(X[:, None, :], Y[None, :, :])
    return np.einsum("abc,bck->ak", f, cross)


def rs_vector(field: LieField, unit_audit: bool = False) -> RSVector:
    """``F(+/-)^a`` including the bilinear colour term.

    With ``unit_audit`` a warning is logged whenever the bilinear term is
    switched on: ``E`` and ``g E x B`` share units only if ``g`` carries
    inverse field units, which natural units hide.
    """
    if unit_audit and field.g != 0:
        log.warning("g f^abc (E^b x B^c) is added to E^a assuming natural units (g = %g)", field.g)
    bilinear = field.g * color_cross(field.algebra.f, field.E, field.B)
    return RSVector(field.E + 1j * field.B + bilinear, field.E - 1j * field.B + bilinear)


def lagrangian_density(rs: RSVector, branch: int = +1) -> float:
    """Index form ``1/2 sum_a Re(F^a* . F^a)``."""
    F = rs.branch(branch)
    return float(0.5 * np.real(np.sum(np.conj(F) * F)))


def lie_valued(F: np.ndarray, algebra: SuNAlgebra) -> np.ndarray:
    """``F = F^a T^a`` as three N x N matrices, shape (3, N, N)."""
    return np.einsum("ak,aij->kij", F, algebra.generators)


def lagrangian_trace_form(rs: RSVector, algebra: SuNAlgebra, branch: int = +1) -> float:
    """``1/2 Re Tr(F^dagger . F)`` with the Lie-algebra valued field.

    Equals one half of :func:`lagrangian_density` because
    ``Tr(T^a T^b) = delta^ab / 2``.
    """
    M = lie_valued(rs.branch(branch), algebra)
    Mdag = np.conj(np.swapaxes(M, -1, -2))
    return float(0.5 * np.real(np.einsum("kij,kji->", Mdag, M)))


def field_equation_residuals(field: LieField) -> dict:
    """Evaluate the two variational expressions exactly as written:

        dL/dE^a = Re[F^a*] + g f^abc Re[F^b* x B^c]
        dL/dB^a = +/- Im[F^a*] + g f^abc Re[F^b* x E^c]

    for both branches. Returns ``{+1: {...}, -1: {...}}`` with the residual
    arrays and their per-index max norms.
    """
    rs = rs_vector(field)
    f, g = field.algebra.f, field.g
    out = {}
    for sign in BRANCHES:
        Fc = np.conj(rs.branch(sign))
        res_E = np.real(Fc) + g * np.real(color_cross(f, Fc, field.B.astype(complex)))
        res_B = sign * np.imag(Fc) + g * np.real(color_cross(f, Fc, field.E.astype(complex)))
        out[sign] = {
            "dE": res_E,
            "dB": res_B,
            "per_index_dE": np.abs(res_E).max(axis=1),
            "per_index_dB": np.abs(res_B).max(axis=1),
            "max": float(max(np.abs(res_E).max(), np.abs(res_B).max())),
        }
    return out


def residual_report(field: LieField) -> list[dict]:
    """JSON-ready records ``{branch, per_index_residuals, max}``."""
    res = field_equation_residuals(field)
    return [
        {
            "branch": "+" if sign > 0 else "-",
            "per_index_residuals": {
                "dE": res[sign]["per_index_dE"].tolist(),
                "dB": res[sign]["per_index_dB"].tolist(),
            },
            "max": res[sign]["max"],
        }
        for sign in BRANCHES
    ]


def weak_field(algebra: SuNAlgebra, E, g: float) -> LieField:
    """Field with ``B^a = g f^abc (E^b x E^c)`` for the given E."""
    E = np.asarray(E, dtype=float)
    return LieField(algebra, E, g * color_cross(algebra.f, E, E), g)


def weak_coupling_scaling(algebra: SuNAlgebra, E, couplings, branch: int = +1) -> dict:
    """Max-norm of the dL/dB expression on weak fields for each coupling.

    Returns the couplings, residuals and the fitted log-log slope.
    """
    couplings = [float(g) for g in couplings]
    residuals = []
    for g in couplings:
        res = field_equation_residuals(weak_field(algebra, E, g))
        residuals.append(float(np.abs(res[branch]["dB"]).max()))
    return {"couplings": couplings, "residuals": residuals, "slope": fit_order(couplings, residuals)}


def lie_valued_wave_equation(initial, dt: float, n_steps: int):
    """Evolve one 6-component state per colour index with the free equation.

    Free propagation carries no colour mixing, so each index is stepped
    independently with the Abelian solver.
    """
    states = list(initial)
    if not states:
        raise DimensionError("need at least one colour component")
    for s in states:
        if not isinstance(s, RSDiracState):
            raise DomainError("initial states must be RSDiracState records")
    return [rs_dirac_step(s, dt, n_steps) for s in states]


def total_norm2(states) -> float:
    return float(sum(s.norm2() for s in states))


def scaled_field(field: LieField, lam: float) -> LieField:
    return replace(field, E=lam * field.E, B=lam * field.B)
