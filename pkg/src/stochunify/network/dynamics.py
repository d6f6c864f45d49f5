"""Helicity master equation on a spin network.

Per edge ``e`` with amplitudes ``Psi(+/-)``:

    dPsi+/dt = -lam (Psi+ - Psi-) + T+(e)
    dPsi-/dt = -lam (Psi- - Psi+) + T-(e)

and the continued system ``dPsi/dt = -i lam (I - sigma_1) Psi + T``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ..errors import DimensionError, DomainError, NumericError
from ..io import fmt, to_json_text
from ..numerics import Grid1D, fit_order, rk4_step
from ..poisson_dirac.checkerboard import CheckerboardLattice, checkerboard_propagate
from .graph import SpinNetwork, chain_network
from .matter import MatterLayer, matter_source

TRANSPORT_SCHEMES = ("helicity", "downstream")


@dataclass(frozen=True, eq=False)
class EdgeAmplitudes:
    """Amplitudes ordered like ``net.edges``; ``lam`` is the flip rate."""

    psi_plus: np.ndarray
    psi_minus: np.ndarray
    lam: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        pp = np.asarray(self.psi_plus, dtype=complex)
        pm = np.asarray(self.psi_minus, dtype=complex)
        if pp.ndim != 1 or pp.shape != pm.shape:
            raise DimensionError("psi_plus and psi_minus must be 1D arrays of equal length")
        if not (np.all(np.isfinite(pp)) and np.all(np.isfinite(pm))):
            raise NumericError("edge amplitudes must be finite")
        if self.lam < 0:
            raise DomainError("flip rate must be non-negative")
        object.__setattr__(self, "psi_plus", pp)
        object.__setattr__(self, "psi_minus", pm)

    @property
    def n_edges(self) -> int:
        return self.psi_plus.shape[0]

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.psi_plus, self.psi_minus])

    def with_stacked(self, y: np.ndarray, time: float) -> "EdgeAmplitudes":
        n = self.n_edges
        return replace(self, psi_plus=y[:n], psi_minus=y[n:], time=time)


@dataclass(frozen=True)
class TransportResult:
    plus: np.ndarray
    minus: np.ndarray
    isolated: tuple = ()


def _directed_gradient(net: SpinNetwork, values: np.ndarray, kind: str, hop_rate: float) -> np.ndarray:
    lists = net.downstream if kind == "downstream" else net.upstream
    has_nbrs = np.array([bool(nb) for nb in lists])
    return hop_rate * (net.averaging_matrix(kind) @ values - has_nbrs * values)


def transport_term(net: SpinNetwork, amps: EdgeAmplitudes, hop_rate: float,
                   scheme: str = "helicity") -> TransportResult:
    """Directed-gradient transport ``hop * mean_{e'}(Psi(e') - Psi(e))``.

    ``scheme="helicity"`` takes the neighbours of ``Psi+`` downstream and of
    ``Psi-`` upstream, so the two helicities propagate in opposite
    directions (on a chain, ``Psi+`` towards lower and ``Psi-`` towards
    higher edge index). ``scheme="downstream"`` uses downstream neighbours
    for both. Edges without neighbours get zero transport and are listed
    in ``isolated``.
    """
    if scheme not in TRANSPORT_SCHEMES:
        raise DomainError(f"transport scheme must be one of {TRANSPORT_SCHEMES}")
    if amps.n_edges != net.n_edges:
        raise DimensionError("amplitudes do not match the network")
    minus_kind = "upstream" if scheme == "helicity" else "downstream"
    minus_nbrs = net.upstream if scheme == "helicity" else net.downstream
    tp = _directed_gradient(net, amps.psi_plus, "downstream", hop_rate)
    tm = _directed_gradient(net, amps.psi_minus, minus_kind, hop_rate)
    isolated = tuple(
        e.id for k, e in enumerate(net.edges) if not net.downstream[k] or not minus_nbrs[k]
    )
    return TransportResult(tp, tm, isolated)


def _rhs_factory(net, amps, hop_rate, scheme, matter, transport, flip):
    n = amps.n_edges

    def rhs(t, y):
        state = EdgeAmplitudes(y[:n], y[n:], amps.lam, t)
        if transport is not None:
            tp, tm = transport(net, state)
            tp = np.broadcast_to(np.asarray(tp, dtype=complex), (n,))
            tm = np.broadcast_to(np.asarray(tm, dtype=complex), (n,))
        elif hop_rate:
            tr = transport_term(net, state, hop_rate, scheme)
            tp, tm = tr.plus, tr.minus
        else:
            tp = tm = np.zeros(n, dtype=complex)
        if matter is not None:
            sp, sm = matter_source(net, matter, y[:n], y[n:])
            tp, tm = tp + sp, tm + sm
        if not (np.all(np.isfinite(tp)) and np.all(np.isfinite(tm))):
            raise NumericError("transport produced non-finite values")
        diff = y[:n] - y[n:]
        return np.concatenate([flip * diff + tp, -flip * diff + tm])

    return rhs


def master_step(net: SpinNetwork, amps: EdgeAmplitudes, dt: float, hop_rate: float = 0.0,
                scheme: str = "helicity", matter: MatterLayer | None = None,
                transport=None) -> EdgeAmplitudes:
    """One RK4 step of the real-time master equation.

    ``transport`` is an optional callable ``(net, amps) -> (T+, T-)`` that
    replaces the built-in directed gradient.
    """
    rhs = _rhs_factory(net, amps, hop_rate, scheme, matter, transport, -amps.lam)
    y = rk4_step(amps.stacked(), rhs, dt, amps.time)
    return amps.with_stacked(y, amps.time + dt)


def continued_step(net: SpinNetwork, amps: EdgeAmplitudes, dt: float, hop_rate: float = 0.0,
                   scheme: str = "helicity", matter: MatterLayer | None = None,
                   transport=None) -> EdgeAmplitudes:
    """One RK4 step of ``dPsi/dt = -i lam (I - sigma_1) Psi + T``."""
    rhs = _rhs_factory(net, amps, hop_rate, scheme, matter, transport, -1j * amps.lam)
    y = rk4_step(amps.stacked(), rhs, dt, amps.time)
    return amps.with_stacked(y, amps.time + dt)


def evolve(net, amps, dt, n_steps, continued=False, record_every=0, **kw):
    """Repeated steps; returns ``(final, history)`` with ``history`` a list of
    snapshots every ``record_every`` steps (including the initial state)."""
    step = continued_step if continued else master_step
    history = [amps] if record_every else []
    for i in range(int(n_steps)):
        amps = step(net, amps, dt, **kw)
        if record_every and (i + 1) % record_every == 0:
            history.append(amps)
    return amps, history


def flip_closed_form(psi_plus0, psi_minus0, lam: float, t: float, continued: bool = False):
    """Exact ``exp(-k lam (I - sigma_1) t)`` applied per edge (k = 1 or i)."""
    k = 1j if continued else 1.0
    mean = 0.5 * (np.asarray(psi_plus0) + np.asarray(psi_minus0))
    half = 0.5 * (np.asarray(psi_plus0) - np.asarray(psi_minus0)) * np.exp(-2.0 * k * lam * t)
    return mean + half, mean - half


# --------------------------------------------------------------- constraints


@dataclass(frozen=True)
class ConstraintReport:
    per_edge: np.ndarray
    global_vector: np.ndarray
    global_norm: float

    def to_dict(self, net: SpinNetwork | None = None) -> dict:
        ids = [e.id for e in net.edges] if net is not None else list(range(len(self.per_edge)))
        return {
            "per_edge_residual": dict(zip(map(str, ids), self.per_edge.tolist())),
            "max_edge_residual": float(self.per_edge.max()) if self.per_edge.size else 0.0,
            "global_residual_vector": [[z.real, z.imag] for z in self.global_vector],
            "global_residual": self.global_norm,
        }


def equilibrium_residual(amps: EdgeAmplitudes) -> ConstraintReport:
    """Per-edge ``|Psi+ - Psi-|`` and the summed vector ``sum_e (I - sigma_1) Psi_e``."""
    d = amps.psi_plus - amps.psi_minus
    total = d.sum()
    vec = np.array([total, -total])
    return ConstraintReport(np.abs(d), vec, float(np.linalg.norm(vec)))


def exact_equilibrium_residual(psi_plus, psi_minus):
    """Exact-arithmetic version for Fraction/int inputs.

    Returns ``(per_edge, (H+, H-))`` where ``per_edge`` lists ``|Psi+ - Psi-|``.
    """
    diffs = [p - m for p, m in zip(psi_plus, psi_minus)]
    total = sum(diffs, 0 * diffs[0] if diffs else 0)
    return [abs(d) for d in diffs], (total, -total)


def fit_relaxation_rate(times, residuals) -> float:
    """Decay rate from a log-linear fit of residual against time."""
    times = np.asarray(times, dtype=float)
    res = np.asarray(residuals, dtype=float)
    if np.any(res <= 0):
        raise DomainError("relaxation residuals must be positive to fit a rate")
    slope = np.polyfit(times, np.log(res), 1)[0]
    return float(-slope)


# --------------------------------------------------- chain vs checkerboard


def chain_vs_checkerboard(lam: float = 1.0, t_final: float = 1.0, length: float = 16.0,
                          n_edges0: int = 128, n_rungs: int = 4, substeps: int = 2,
                          width: float = 1.0, k0: float = 1.0) -> dict:
    """Refinement study of the continued chain against the checkerboard.

    Dictionary: ``lam <-> m c^2 / hbar``, ``hop * spacing <-> c`` with c = 1.
    ``Psi+`` maps to the lattice left movers and ``Psi-`` to the right
    movers. The chain is a ring of ``n_edges0 * 2**r`` edges; each lattice
    step ``dt = spacing`` is covered by ``substeps`` RK4 steps.
    """
    dts, errors = [], []
    for r in range(int(n_rungs)):
        n = int(n_edges0) * 2**r
        grid = Grid1D(-0.5 * length, 0.5 * length, n, periodic=True)
        dt = grid.dx
        n_steps = int(round(t_final / dt))
        if not np.isclose(n_steps * dt, t_final, rtol=1e-12, atol=0):
            raise DomainError("t_final must be a whole number of lattice steps on every rung")
        x = grid.x
        env = np.exp(-0.5 * (x / width) ** 2)
        left0 = env * np.exp(1j * k0 * x)
        right0 = 0.5j * env * np.exp(-0.5j * k0 * x)
        lattice = CheckerboardLattice.dirac(n, n_steps, dt, lam, mixing="exact")
        right, left = checkerboard_propagate(lattice, right0, left0)
        net = chain_network(n, periodic=True)
        amps = EdgeAmplitudes(left0, right0, lam)
        amps, _ = evolve(net, amps, dt / substeps, n_steps * substeps, continued=True,
                         hop_rate=1.0 / grid.dx)
        err = np.sqrt((np.sum(np.abs(amps.psi_plus - left) ** 2)
                       + np.sum(np.abs(amps.psi_minus - right) ** 2)) * grid.dx)
        dts.append(dt)
        errors.append(float(err))
    order = fit_order(dts, errors) if len(dts) > 1 else float("nan")
    return {"lam": lam, "t_final": t_final, "dt_ladder": dts, "l2_differences": errors,
            "fitted_order": order}


# ------------------------------------------------------------------- output


def write_time_series(path, net: SpinNetwork, history):
    """CSV rows ``t, edge_id, re/im Psi+, re/im Psi-`` for each snapshot."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "edge_id", "re_psi_plus", "im_psi_plus", "re_psi_minus", "im_psi_minus"])
        for amps in history:
            for e, p, m in zip(net.edges, amps.psi_plus, amps.psi_minus):
                w.writerow([fmt(amps.time), e.id, fmt(p.real), fmt(p.imag), fmt(m.real), fmt(m.imag)])


def write_constraint_report(path, net: SpinNetwork, amps: EdgeAmplitudes):
    Path(path).write_text(to_json_text(equilibrium_residual(amps).to_dict(net)))
