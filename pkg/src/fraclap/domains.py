"""Finite vertex sets in Z^d: generators, file format, connectivity.

A ``Domain`` is an immutable, lexicographically sorted list of distinct
lattice points.  The canonical ordering makes every downstream result (matrix,
spectrum, reports) deterministic for a given vertex set regardless of input
order.
"""

from __future__ import annotations

import json
from collections import deque

import numpy as np

from .exceptions import DomainFormatError

__all__ = [
    "Domain",
    "make_box",
    "make_l_shape",
    "make_random_connected",
    "read_domain",
    "write_domain",
]


class Domain:
    """Finite set of distinct vertices of Z^d in canonical order.

    ``index`` maps each vertex tuple to its position in ``vertices`` and is
    the exact inverse of the list.  Instances are immutable and freely
    shareable.
    """

    __slots__ = ("dim", "vertices", "index", "_array")

    def __init__(self, dim: int, vertices):
        dim = int(dim)
        if dim < 1:
            raise DomainFormatError(f"dimension must be a positive integer, got {dim!r}")
        cleaned = []
        for position, vertex in enumerate(vertices):
            try:
                vt = tuple(int(c) for c in vertex)
            except (TypeError, ValueError):
                raise DomainFormatError(
                    f"vertex #{position} is not an integer vector: {vertex!r}"
                ) from None
            if len(vt) != dim:
                raise DomainFormatError(
                    f"vertex #{position} has dimension {len(vt)}, expected {dim}: {vertex!r}"
                )
            cleaned.append(vt)
        if not cleaned:
            raise DomainFormatError("domain must contain at least one vertex")
        seen = set()
        for position, vt in enumerate(cleaned):
            if vt in seen:
                raise DomainFormatError(f"duplicate vertex #{position}: {list(vt)!r}")
            seen.add(vt)
        ordered = tuple(sorted(cleaned))
        self.dim = dim
        self.vertices = ordered
        self.index = {v: i for i, v in enumerate(ordered)}
        arr = np.asarray(ordered, dtype=np.int64).reshape(len(ordered), dim)
        arr.flags.writeable = False
        self._array = arr

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __contains__(self, vertex) -> bool:
        return tuple(int(c) for c in vertex) in self.index

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Domain)
            and self.dim == other.dim
            and self.vertices == other.vertices
        )

    def __hash__(self):
        return hash((self.dim, self.vertices))

    def __repr__(self) -> str:
        return f"Domain(dim={self.dim}, size={len(self)})"

    def as_array(self) -> np.ndarray:
        """Vertices as a read-only (n, dim) int64 array in canonical order."""
        return self._array

    def coordinate_extents(self) -> tuple[int, ...]:
        """Per-dimension extent max_i - min_i of the vertex coordinates."""
        arr = self._array
        return tuple(int(arr[:, k].max() - arr[:, k].min()) for k in range(self.dim))

    def max_offset_coordinate(self) -> int:
        """Largest absolute coordinate of any pairwise difference."""
        return max(self.coordinate_extents())

    def neighbors(self, vertex):
        """Lattice neighbors of a vertex (|x - y|_1 = 1), inside or outside."""
        vt = tuple(int(c) for c in vertex)
        out = []
        for axis in range(self.dim):
            for step in (-1, 1):
                w = list(vt)
                w[axis] += step
                out.append(tuple(w))
        return out

    def is_connected(self) -> bool:
        """Breadth-first search under nearest-neighbor adjacency."""
        start = self.vertices[0]
        seen = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in self.neighbors(v):
                if w in self.index and w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self)


def make_box(dim: int, side_lengths) -> Domain:
    """Axis-aligned box {0..n_1-1} x ... x {0..n_d-1}."""
    sides = [int(s) for s in side_lengths]
    if len(sides) != dim:
        raise ValueError(f"expected {dim} side lengths, got {len(sides)}")
    if any(s < 1 for s in sides):
        raise ValueError(f"side lengths must be positive, got {side_lengths!r}")
    grids = np.meshgrid(*[np.arange(s) for s in sides], indexing="ij")
    vertices = np.stack([g.ravel() for g in grids], axis=1)
    return Domain(dim, vertices.tolist())


def make_l_shape(arm: int) -> Domain:
    """2d L: a (2*arm) x (2*arm) box minus its upper-right arm x arm quadrant."""
    arm = int(arm)
    if arm < 2:
        raise ValueError(f"arm must be >= 2, got {arm!r}")
    vertices = [
        (x, y)
        for x in range(2 * arm)
        for y in range(2 * arm)
        if not (x >= arm and y >= arm)
    ]
    return Domain(2, vertices)


def make_random_connected(dim: int, size: int, seed: int) -> Domain:
    """Connected set grown from the origin by uniform boundary accretion.

    Randomness comes from the Philox 4x64 counter-based generator
    (`numpy.random.Philox`) keyed with ``seed``; at each step the candidate
    boundary vertices are sorted lexicographically and one index is drawn, so
    identical (dim, size, seed) always reproduces the identical vertex set.
    """
    dim = int(dim)
    size = int(size)
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim!r}")
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size!r}")
    rng = np.random.Generator(np.random.Philox(int(seed)))
    origin = tuple([0] * dim)
    chosen = {origin}
    boundary = set()

    def grow_boundary(vertex):
        for axis in range(dim):
            for step in (-1, 1):
                w = list(vertex)
                w[axis] += step
                wt = tuple(w)
                if wt not in chosen:
                    boundary.add(wt)

    grow_boundary(origin)
    while len(chosen) < size:
        candidates = sorted(boundary)
        pick = candidates[int(rng.integers(len(candidates)))]
        boundary.discard(pick)
        chosen.add(pick)
        grow_boundary(pick)
    return Domain(dim, sorted(chosen))


def read_domain(path) -> Domain:
    """Load a domain from its JSON file format.

    The file is an object with integer field "dim" and field "vertices", an
    array of integer arrays of length dim.  Vertex order in the file is
    arbitrary; the constructor canonicalizes it.
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except json.JSONDecodeError as exc:
        raise DomainFormatError(f"not valid JSON: {path} ({exc})") from exc
    if not isinstance(payload, dict):
        raise DomainFormatError(f"expected a JSON object at top level in {path}")
    if "dim" not in payload or "vertices" not in payload:
        raise DomainFormatError(f'missing "dim" or "vertices" field in {path}')
    dim = payload["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise DomainFormatError(f'"dim" must be an integer, got {dim!r}')
    vertices = payload["vertices"]
    if not isinstance(vertices, list):
        raise DomainFormatError(f'"vertices" must be an array, got {type(vertices).__name__}')
    for position, vertex in enumerate(vertices):
        if not isinstance(vertex, list) or not all(
            isinstance(c, int) and not isinstance(c, bool) for c in vertex
        ):
            raise DomainFormatError(
                f"vertex #{position} must be an array of integers: {vertex!r}"
            )
    return Domain(dim, vertices)


def write_domain(domain: Domain, path) -> None:
    """Write the JSON file format; read_domain(write_domain(D)) == D."""
    payload = {"dim": domain.dim, "vertices": [list(v) for v in domain.vertices]}
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, separators=(",", ":"))
        handle.write("\n")
