"""Finite truncations of the Z^3 lattice graph.

Vertices are integer triples, edges join points at l1 distance 1 (so every
vertex of the infinite lattice has degree 6).  A graph stores an *interior*
region plus the one-step halo ring around it; fields used in whole-lattice
computations are constrained to vanish on the halo, which makes every
difference operator on the truncation agree exactly with its infinite-lattice
value for interior-supported fields.

Vertex ordering is lexicographic by (x1, x2, x3) and is part of the on-disk
format contract: all reductions iterate in this order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDomainError

Vertex = tuple[int, int, int]

#: Neighbor offsets in the fixed order used for adjacency slots.
OFFSETS = np.array(
    [(-1, 0, 0), (1, 0, 0), (0, -1, 0), (0, 1, 0), (0, 0, -1), (0, 0, 1)],
    dtype=np.int64,
)


def graph_distance(x: Vertex, y: Vertex) -> int:
    """Graph distance on Z^3 = l1 distance (minimum edge count)."""
    return abs(x[0] - y[0]) + abs(x[1] - y[1]) + abs(x[2] - y[2])


def closed_ball_count(radius: int) -> int:
    """Number of lattice points with l1 norm <= radius (exact)."""
    r = int(radius)
    return (2 * r + 1) * (2 * r * r + 2 * r + 3) // 3


class LatticeGraph:
    """Immutable truncation of Z^3: interior region plus one halo ring.

    Attributes
    ----------
    coords : (N, 3) int64 array, lexicographically sorted vertex coordinates.
    interior : (N,) bool mask of interior vertices.
    nbr : (N, 6) int64 array of neighbor indices.  Missing neighbors (only
        possible on the halo) point back at the vertex itself, so that every
        difference u(nbr) - u(x) they produce is exactly zero.
    degree : (N,) number of stored true neighbors.
    """

    def __init__(self, coords: np.ndarray, interior: np.ndarray, radius: int | None = None):
        coords = np.asarray(coords, dtype=np.int64)
        order = np.lexsort((coords[:, 2], coords[:, 1], coords[:, 0]))
        self.coords = coords[order]
        self.interior = np.asarray(interior, dtype=bool)[order]
        self.radius = radius
        self.n = len(self.coords)
        self._keys, self._span = self._encode(self.coords)
        self.nbr, self.degree = self._build_adjacency()
        self._index: dict[Vertex, int] = {
            (int(c[0]), int(c[1]), int(c[2])): i for i, c in enumerate(self.coords)
        }
        if not np.all(self.degree[self.interior] == 6):
            raise AssertionError("interior vertex with incomplete neighborhood")
        self.interior_indices = np.flatnonzero(self.interior)
        self.halo_indices = np.flatnonzero(~self.interior)

    def _encode(self, coords: np.ndarray):
        # Injective monotone key; lexicographic coord order == ascending keys.
        lo = coords.min() - 2
        span = int(coords.max() - lo + 3)
        shifted = coords - lo
        keys = (shifted[:, 0] * span + shifted[:, 1]) * span + shifted[:, 2]
        return keys, (lo, span)

    def _key_of(self, coords: np.ndarray) -> np.ndarray:
        lo, span = self._span
        shifted = coords - lo
        return (shifted[:, 0] * span + shifted[:, 1]) * span + shifted[:, 2]

    def _build_adjacency(self):
        n = self.n
        nbr = np.empty((n, 6), dtype=np.int64)
        degree = np.zeros(n, dtype=np.int64)
        self_idx = np.arange(n, dtype=np.int64)
        for k, off in enumerate(OFFSETS):
            cand = self.coords + off
            keys = self._key_of(cand)
            pos = np.searchsorted(self._keys, keys)
            pos_clipped = np.minimum(pos, n - 1)
            present = self._keys[pos_clipped] == keys
            present &= pos < n
            nbr[:, k] = np.where(present, pos_clipped, self_idx)
            degree += present
        return nbr, degree

    # -- lookups ---------------------------------------------------------

    def index_of(self, vertex: Vertex) -> int:
        try:
            return self._index[tuple(int(v) for v in vertex)]
        except KeyError:
            raise InvalidDomainError(f"vertex {tuple(vertex)} is not stored in the graph") from None

    def indices_of(self, vertices) -> np.ndarray:
        return np.array([self.index_of(v) for v in vertices], dtype=np.int64)

    def vertex(self, i: int) -> Vertex:
        c = self.coords[i]
        return (int(c[0]), int(c[1]), int(c[2]))

    def contains(self, vertex: Vertex) -> bool:
        return tuple(int(v) for v in vertex) in self._index

    def edges(self) -> np.ndarray:
        """All stored undirected edges as an (E, 2) index array, i < j."""
        src = np.repeat(np.arange(self.n), 6)
        dst = self.nbr.ravel()
        real = dst != src
        i, j = src[real], dst[real]
        keep = i < j
        return np.stack([i[keep], j[keep]], axis=1)


def build_box(radius: int) -> LatticeGraph:
    """Closed l1 ball of the given radius as interior, plus its halo ring."""
    r = int(radius)
    if r < 0:
        raise InvalidDomainError("radius must be nonnegative")
    g = np.arange(-(r + 1), r + 2, dtype=np.int64)
    x1, x2, x3 = np.meshgrid(g, g, g, indexing="ij")
    coords = np.stack([x1.ravel(), x2.ravel(), x3.ravel()], axis=1)
    norm = np.abs(coords).sum(axis=1)
    keep = norm <= r + 1
    coords = coords[keep]
    interior = norm[keep] <= r
    return LatticeGraph(coords, interior, radius=r)


def build_rect_box(bounds) -> LatticeGraph:
    """Rectangular interior given by inclusive per-axis (lo, hi) bounds.

    Convenience alternative to the default l1 ball truncation; the halo ring
    is added exactly as for :func:`build_box`.
    """
    bounds = [(int(lo), int(hi)) for lo, hi in bounds]
    if len(bounds) != 3 or any(hi < lo for lo, hi in bounds):
        raise InvalidDomainError(f"invalid rectangular bounds {bounds}")
    axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in bounds]
    x1, x2, x3 = np.meshgrid(*axes, indexing="ij")
    inside = np.stack([x1.ravel(), x2.ravel(), x3.ravel()], axis=1)
    shifted = (inside[None, :, :] + OFFSETS[:, None, :]).reshape(-1, 3)
    allc = np.unique(np.concatenate([inside, shifted], axis=0), axis=0)
    is_int = np.ones(len(allc), dtype=bool)
    for ax, (lo, hi) in enumerate(bounds):
        is_int &= (allc[:, ax] >= lo) & (allc[:, ax] <= hi)
    return LatticeGraph(allc, is_int)


def vertex_boundary(graph: LatticeGraph, omega: np.ndarray) -> np.ndarray:
    """Vertices outside omega adjacent to some vertex of omega (indices).

    ``omega`` is an index array into ``graph``; the result is sorted and
    disjoint from omega by construction.
    """
    omega = np.asarray(omega, dtype=np.int64)
    if omega.size and (omega.min() < 0 or omega.max() >= graph.n):
        raise InvalidDomainError("omega contains indices outside the graph")
    mask = np.zeros(graph.n, dtype=bool)
    mask[omega] = True
    touched = np.zeros(graph.n, dtype=bool)
    touched[graph.nbr[omega].ravel()] = True
    return np.flatnonzero(touched & ~mask)


def is_connected(graph: LatticeGraph, omega: np.ndarray) -> bool:
    """Whether omega induces a connected subgraph (breadth-first search)."""
    omega = np.asarray(omega, dtype=np.int64)
    if omega.size == 0:
        raise InvalidDomainError("omega is empty")
    inside = np.zeros(graph.n, dtype=bool)
    inside[omega] = True
    seen = np.zeros(graph.n, dtype=bool)
    frontier = omega[:1]
    seen[frontier] = True
    while frontier.size:
        nxt = graph.nbr[frontier].ravel()
        nxt = nxt[inside[nxt] & ~seen[nxt]]
        nxt = np.unique(nxt)
        seen[nxt] = True
        frontier = nxt
    return bool(np.all(seen[omega]))


@dataclass(frozen=True)
class DomainSpec:
    """A bounded domain: vertex set omega with its vertex boundary.

    The boundary is ``{y not in omega : y ~ x for some x in omega}``, always
    disjoint from omega.  Connectivity of omega is required at construction
    unless explicitly waived (the validation layer reports the violation).
    """

    graph: LatticeGraph = field(repr=False)
    omega: np.ndarray
    boundary: np.ndarray

    @classmethod
    def from_indices(cls, graph: LatticeGraph, omega, require_connected: bool = True) -> "DomainSpec":
        omega = np.unique(np.asarray(omega, dtype=np.int64))
        if omega.size == 0:
            raise InvalidDomainError("omega is empty")
        if not np.all(graph.interior[omega]):
            raise InvalidDomainError("omega must lie inside the interior region")
        if require_connected and not is_connected(graph, omega):
            raise InvalidDomainError("omega is not connected")
        return cls(graph, omega, vertex_boundary(graph, omega))

    @classmethod
    def from_vertices(cls, graph: LatticeGraph, vertices, require_connected: bool = True) -> "DomainSpec":
        return cls.from_indices(graph, graph.indices_of(vertices), require_connected)

    @classmethod
    def ball(cls, graph: LatticeGraph, radius: int, center: Vertex = (0, 0, 0)) -> "DomainSpec":
        dist = np.abs(graph.coords - np.asarray(center, dtype=np.int64)).sum(axis=1)
        return cls.from_indices(graph, np.flatnonzero(dist <= radius))

    @property
    def closure(self) -> np.ndarray:
        return np.union1d(self.omega, self.boundary)

    def omega_mask(self) -> np.ndarray:
        m = np.zeros(self.graph.n, dtype=bool)
        m[self.omega] = True
        return m
