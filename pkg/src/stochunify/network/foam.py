"""Helicity-labelled foam amplitudes

    A = sum_{h_f = +/-1} prod_f w_f(h_f) prod_v A_v(h_f incident to v)

evaluated either by exhaustive enumeration or cluster by cluster, where a
cluster is a connected component of the face/vertex incidence graph.
Tables may hold ints, Fractions, floats or complex numbers; exact inputs
give exact results.
"""

from __future__ import annotations

import itertools
import json
import numbers
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from ..errors import CapacityError, DomainError

MAX_BRUTE_FORCE_FACES = 24
_CHUNK = 1 << 16


def helicity_key(assignment) -> str:
    return "".join("+" if h > 0 else "-" for h in assignment)


def parse_helicity_key(key: str) -> tuple:
    if any(ch not in "+-" for ch in key):
        raise DomainError(f"helicity key {key!r} may only contain '+' and '-'")
    return tuple(1 if ch == "+" else -1 for ch in key)


def _parse_value(v):
    """JSON value -> number. Strings are exact fractions; pairs are complex."""
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise DomainError("complex values are written as [re, im]")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool) or not isinstance(v, numbers.Number):
        raise DomainError(f"not a number: {v!r}")
    return v


def _dump_value(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


@dataclass(frozen=True)
class Face:
    id: str
    w_plus: object
    w_minus: object

    def weight(self, h: int):
        return self.w_plus if h > 0 else self.w_minus


@dataclass(frozen=True)
class FoamVertex:
    """``table`` maps helicity tuples (ordered like ``faces``) to amplitudes."""

    id: str
    faces: tuple
    table: dict

    def __post_init__(self):
        faces = tuple(str(f) for f in self.faces)
        if len(set(faces)) != len(faces):
            raise DomainError(f"vertex {self.id!r} lists a face twice")
        table = {}
        for key, val in self.table.items():
            hs = parse_helicity_key(key) if isinstance(key, str) else tuple(int(h) for h in key)
            if len(hs) != len(faces) or any(h not in (1, -1) for h in hs):
                raise DomainError(f"vertex {self.id!r}: bad helicity assignment {key!r}")
            table[hs] = val
        missing = [a for a in itertools.product((1, -1), repeat=len(faces)) if a not in table]
        if missing:
            raise DomainError(
                f"vertex {self.id!r} table misses {len(missing)} assignments, e.g. {helicity_key(missing[0])!r}"
            )
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "table", table)


@dataclass(frozen=True)
class FoamSpec:
    faces: tuple
    vertices: tuple

    def __post_init__(self):
        faces = tuple(self.faces)
        ids = [f.id for f in faces]
        if len(set(ids)) != len(ids):
            raise DomainError("duplicate face identifiers")
        known = set(ids)
        for v in self.vertices:
            unknown = set(v.faces) - known
            if unknown:
                raise DomainError(f"vertex {v.id!r} references unknown faces {sorted(unknown)}")
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "vertices", tuple(self.vertices))

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def clusters(self) -> list:
        """Connected components as lists of face ids (in face order)."""
        parent = {f.id: f.id for f in self.faces}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for v in self.vertices:
            for a, b in zip(v.faces, v.faces[1:]):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[rb] = ra
        groups = {}
        for f in self.faces:
            groups.setdefault(find(f.id), []).append(f.id)
        return list(groups.values())

    def to_dict(self) -> dict:
        return {
            "faces": [{"id": f.id, "w_plus": _dump_value(f.w_plus), "w_minus": _dump_value(f.w_minus)}
                      for f in self.faces],
            "vertices": [
                {"id": v.id, "faces": list(v.faces),
                 "table": {helicity_key(k): _dump_value(val) for k, val in sorted(v.table.items(), reverse=True)}}
                for v in self.vertices
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FoamSpec":
        faces = tuple(Face(str(f["id"]), _parse_value(f["w_plus"]), _parse_value(f["w_minus"]))
                      for f in data.get("faces", []))
        verts = tuple(
            FoamVertex(str(v["id"]), tuple(v.get("faces", [])),
                       {k: _parse_value(val) for k, val in v["table"].items()})
            for v in data.get("vertices", [])
        )
        return cls(faces, verts)


def load_foam(path) -> FoamSpec:
    return FoamSpec.from_dict(json.loads(Path(path).read_text()))


def _is_exact(foam: FoamSpec) -> bool:
    vals = [f.w_plus for f in foam.faces] + [f.w_minus for f in foam.faces]
    vals += [x for v in foam.vertices for x in v.table.values()]
    return all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in vals)


def _sum_exact(faces, vertices):
    """Plain Python enumeration; keeps Fractions exact."""
    pos = {f.id: i for i, f in enumerate(faces)}
    total = 0
    for assignment in itertools.product((1, -1), repeat=len(faces)):
        term = 1
        for f, h in zip(faces, assignment):
            term = term * f.weight(h)
        for v in vertices:
            term = term * v.table[tuple(assignment[pos[fid]] for fid in v.faces)]
        total = total + term
    return total


def _sum_numpy(faces, vertices):
    """Vectorised enumeration in chunks for float/complex tables.

    Assignment index bit ``n-1-i`` set means face ``i`` takes ``-1``, which
    matches the order of ``itertools.product((1, -1), ...)``.
    """
    n = len(faces)
    pos = {f.id: i for i, f in enumerate(faces)}
    wp = np.array([f.w_plus for f in faces], dtype=complex)
    wm = np.array([f.w_minus for f in faces], dtype=complex)
    vtabs = []
    for v in vertices:
        k = len(v.faces)
        arr = np.empty(1 << k, dtype=complex)
        for hs, val in v.table.items():
            idx = sum(1 << (k - 1 - j) for j, h in enumerate(hs) if h < 0)
            arr[idx] = val
        vtabs.append((np.array([pos[f] for f in v.faces], dtype=np.int64), arr))
    total = 0j
    n_assign = 1 << n
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, n_assign, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, n_assign), dtype=np.int64)
        bits = (idx[:, None] >> shifts[None, :]) & 1
        term = np.prod(np.where(bits == 1, wm[None, :], wp[None, :]), axis=1)
        for fpos, arr in vtabs:
            k = fpos.size
            local = (bits[:, fpos] << np.arange(k - 1, -1, -1, dtype=np.int64)).sum(axis=1) if k else 0
            term = term * arr[local]
        total += term.sum()
    if all(not isinstance(x, complex) for f in faces for x in (f.w_plus, f.w_minus)) and all(
        not isinstance(x, complex) for v in vertices for x in v.table.values()
    ):
        return float(total.real)
    return complex(total)


def _sum(faces, vertices, exact: bool):
    return _sum_exact(faces, vertices) if exact else _sum_numpy(faces, vertices)


def foam_amplitude(foam: FoamSpec, brute_force: bool = False):
    """Transition amplitude of the foam.

    ``brute_force`` enumerates all ``2**n_faces`` assignments at once;
    otherwise the sum factorizes over clusters. Either way no single
    enumeration may exceed ``2**24`` assignments.
    """
    exact = _is_exact(foam)
    if brute_force:
        if foam.n_faces > MAX_BRUTE_FORCE_FACES:
            raise CapacityError(
                f"{foam.n_faces} faces exceed the brute-force limit of {MAX_BRUTE_FORCE_FACES}; "
                "use the clustered evaluation"
            )
        return _sum(foam.faces, foam.vertices, exact)
    by_id = {f.id: f for f in foam.faces}
    owner = {}
    clusters = foam.clusters()
    for c, ids in enumerate(clusters):
        for fid in ids:
            owner[fid] = c
    result = 1
    # vertices with no faces are constant factors
    for v in foam.vertices:
        if not v.faces:
            result = result * v.table[()]
    for c, ids in enumerate(clusters):
        if len(ids) > MAX_BRUTE_FORCE_FACES:
            raise CapacityError(
                f"a cluster of {len(ids)} faces exceeds the enumeration limit of {MAX_BRUTE_FORCE_FACES}"
            )
        verts = [v for v in foam.vertices if v.faces and owner[v.faces[0]] == c]
        result = result * _sum([by_id[i] for i in ids], verts, exact)
    return result


def random_foam(rng: np.random.Generator, n_faces: int, n_vertices: int, max_degree: int = 3,
                denominator: int = 7) -> FoamSpec:
    """Random foam with exact rational tables (numerators in [-denominator, denominator])."""

    def q():
        return Fraction(int(rng.integers(-denominator, denominator + 1)), denominator)

    faces = tuple(Face(f"f{i}", q(), q()) for i in range(n_faces))
    verts = []
    for j in range(n_vertices):
        k = int(rng.integers(0, min(max_degree, n_faces) + 1))
        chosen = sorted(rng.choice(n_faces, size=k, replace=False).tolist()) if k else []
        table = {a: q() for a in itertools.product((1, -1), repeat=k)}
        verts.append(FoamVertex(f"v{j}", tuple(f"f{i}" for i in chosen), table))
    return FoamSpec(faces, tuple(verts))
