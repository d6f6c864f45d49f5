"""Directed spin networks: vertices, labelled edges and transport adjacency."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from scipy import sparse

from ..errors import DomainError
from ..io import to_json_text


def parse_spin(j) -> Fraction:
    """Spin label as an exact Fraction; ``2j`` must be a non-negative integer."""
    try:
        val = Fraction(str(j)) if isinstance(j, str) else Fraction(j)
    except (ValueError, TypeError, ZeroDivisionError):
        raise DomainError(f"cannot read spin label {j!r}") from None
    if val < 0 or (2 * val).denominator != 1:
        raise DomainError(f"spin label must be a non-negative half-integer, got {j!r}")
    return val


def format_spin(j: Fraction) -> str:
    return str(j.numerator) if j.denominator == 1 else f"{j.numerator}/{j.denominator}"


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str
    j: Fraction = Fraction(1, 2)
    gauge: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "j", parse_spin(self.j))

    @property
    def endpoints(self) -> tuple:
        return (self.source,) if self.source == self.target else (self.source, self.target)

    def to_dict(self) -> dict:
        out = {"id": self.id, "from": self.source, "to": self.target, "j": format_spin(self.j)}
        if self.gauge is not None:
            out["gauge"] = self.gauge
        return out


@dataclass(frozen=True, eq=False)
class SpinNetwork:
    """Finite directed graph.

    ``downstream[e]`` lists edges leaving the head of ``e`` and
    ``upstream[e]`` edges entering its tail, both as edge indices. Either
    can be supplied explicitly; otherwise they are derived from incidence.
    """

    vertices: tuple
    edges: tuple
    downstream: tuple = field(default=None)
    upstream: tuple = field(default=None)

    def __post_init__(self):
        verts = tuple(str(v) for v in self.vertices)
        if len(set(verts)) != len(verts):
            raise DomainError("duplicate vertex identifiers")
        edges = tuple(self.edges)
        ids = [e.id for e in edges]
        if len(set(ids)) != len(ids):
            raise DomainError("duplicate edge identifiers")
        known = set(verts)
        for e in edges:
            if e.source not in known or e.target not in known:
                raise DomainError(f"edge {e.id!r} references an unknown vertex")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", edges)
        if self.downstream is None or self.upstream is None:
            outgoing = {v: [] for v in verts}
            incoming = {v: [] for v in verts}
            for k, e in enumerate(edges):
                outgoing[e.source].append(k)
                incoming[e.target].append(k)
            if self.downstream is None:
                down = tuple(tuple(i for i in outgoing[e.target] if i != k) for k, e in enumerate(edges))
                object.__setattr__(self, "downstream", down)
            if self.upstream is None:
                up = tuple(tuple(i for i in incoming[e.source] if i != k) for k, e in enumerate(edges))
                object.__setattr__(self, "upstream", up)
        for name in ("downstream", "upstream"):
            lists = getattr(self, name)
            if len(lists) != len(edges):
                raise DomainError(f"{name} adjacency must have one list per edge")
            object.__setattr__(self, name, tuple(tuple(int(i) for i in lst) for lst in lists))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def averaging_matrix(self, kind: str = "downstream"):
        """Sparse ``A`` with ``(A psi)[e] = mean of psi over the neighbours of e``.

        Rows of isolated edges are zero. Cached per network and ``kind``.
        """
        cache = self.__dict__.setdefault("_avg_cache", {})
        if kind not in cache:
            lists = self.downstream if kind == "downstream" else self.upstream
            rows, cols, vals = [], [], []
            for k, nbrs in enumerate(lists):
                for i in nbrs:
                    rows.append(k)
                    cols.append(i)
                    vals.append(1.0 / len(nbrs))
            n = self.n_edges
            cache[kind] = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
        return cache[kind]

    def edge_index(self) -> dict:
        return {e.id: k for k, e in enumerate(self.edges)}

    def incident_edges(self) -> dict:
        """Vertex id -> indices of edges touching it."""
        out = {v: [] for v in self.vertices}
        for k, e in enumerate(self.edges):
            for v in e.endpoints:
                out[v].append(k)
        return out

    def to_dict(self) -> dict:
        ids = [e.id for e in self.edges]
        return {
            "vertices": list(self.vertices),
            "edges": [e.to_dict() for e in self.edges],
            "adjacency": {
                ids[k]: {"downstream": [ids[i] for i in self.downstream[k]],
                         "upstream": [ids[i] for i in self.upstream[k]]}
                for k in range(len(ids))
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpinNetwork":
        edges = tuple(
            Edge(str(e["id"]), str(e["from"]), str(e["to"]), e.get("j", "1/2"), e.get("gauge"))
            for e in data["edges"]
        )
        down = up = None
        adj = data.get("adjacency")
        if adj:
            index = {e.id: k for k, e in enumerate(edges)}
            try:
                down = tuple(tuple(index[i] for i in adj[e.id].get("downstream", [])) for e in edges)
                up = tuple(tuple(index[i] for i in adj[e.id].get("upstream", [])) for e in edges)
            except KeyError as exc:
                raise DomainError(f"adjacency references unknown edge {exc}") from None
        return cls(tuple(data["vertices"]), edges, down, up)


def load_network(path) -> SpinNetwork:
    return SpinNetwork.from_dict(json.loads(Path(path).read_text()))


def save_network(path, net: SpinNetwork):
    Path(path).write_text(to_json_text(net.to_dict()))


def chain_network(n_edges: int, periodic: bool = True, j="1/2") -> SpinNetwork:
    """Edges ``e0 -> e1 -> ...`` along a path (or ring) of vertices."""
    if n_edges < 1:
        raise DomainError("a chain needs at least one edge")
    n_vert = n_edges if periodic else n_edges + 1
    verts = tuple(f"v{i}" for i in range(n_vert))
    edges = tuple(
        Edge(f"e{k}", verts[k], verts[(k + 1) % n_vert], j) for k in range(n_edges)
    )
    return SpinNetwork(verts, edges)
