"""Vertex matter fields coupled into edge transport."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, DomainError
from .graph import SpinNetwork


@dataclass(frozen=True, eq=False)
class MatterLayer:
    """``phi``: real scalar per vertex; ``psi``: complex 2-spinor per vertex.

    Both are dicts keyed by vertex id; missing vertices count as zero.
    ``g_y`` is the Yukawa coupling and ``g_s`` scales the spinor source.
    """

    phi: dict = field(default_factory=dict)
    psi: dict = field(default_factory=dict)
    g_y: float = 0.0
    g_s: float = 0.0

    def check(self, net: SpinNetwork):
        known = set(net.vertices)
        for name in ("phi", "psi"):
            extra = set(getattr(self, name)) - known
            if extra:
                raise DomainError(f"matter field {name} defined on unknown vertices {sorted(extra)}")
        for v, spinor in self.psi.items():
            if np.shape(spinor) != (2,):
                raise DimensionError(f"spinor at vertex {v!r} must have two components")


def _vertex_sums(net: SpinNetwork, values: dict) -> np.ndarray:
    """Per edge, the sum of a vertex quantity over the edge's endpoints."""
    return np.array([sum(values.get(v, 0.0) for v in e.endpoints) for e in net.edges])


def matter_source(net: SpinNetwork, matter: MatterLayer, psi_plus, psi_minus):
    """Transport contribution ``(S+, S-)`` from the matter layer.

    Yukawa part: ``g_y * sum_{v in e} phi(v) * Psi(+/-)(e)``.
    Spinor part: a static source ``g_s * sum_{v in e} psi(v)^dagger psi(v)``
    added to both helicities.
    """
    matter.check(net)
    phi_sum = _vertex_sums(net, {v: float(p) for v, p in matter.phi.items()})
    dens = {v: float(np.vdot(s, s).real) for v, s in matter.psi.items()}
    static = matter.g_s * _vertex_sums(net, dens)
    pp = np.asarray(psi_plus)
    pm = np.asarray(psi_minus)
    return matter.g_y * phi_sum * pp + static, matter.g_y * phi_sum * pm + static
