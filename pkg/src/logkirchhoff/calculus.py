"""Discrete calculus on lattice truncations.

The operators follow the graph conventions: Laplacian
``(Lu)(x) = sum_{y~x} (u(y) - u(x))``, gradient form
``G(u,v)(x) = 1/2 sum_{y~x} (u(y)-u(x)) (v(y)-v(x))``, and counting-measure
integrals (plain sums in the fixed lexicographic vertex order).

Reductions run in plain 64-bit arithmetic by default, which is deterministic
for a fixed vertex count.  An optional compensated mode (exact rounding via
math.fsum) is available for conditioning studies; it is order-insensitive.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidParameterError, ShapeError
from .lattice import LatticeGraph

_SUM_MODE = "fast"


def set_summation_mode(mode: str) -> None:
    """Select 'fast' (plain 64-bit, default) or 'compensated' reductions."""
    global _SUM_MODE
    if mode not in ("fast", "compensated"):
        raise InvalidParameterError(f"unknown summation mode {mode!r}")
    _SUM_MODE = mode


def summation_mode() -> str:
    return _SUM_MODE


def vsum(values: np.ndarray) -> float:
    """Reduce an array under the active summation mode."""
    if _SUM_MODE == "fast":
        return float(np.sum(values))
    return math.fsum(np.asarray(values, dtype=float).ravel())


class Field:
    """Real-valued function on the vertices of a graph.

    Values are 64-bit floats aligned with the graph's lexicographic vertex
    ordering and must be finite.
    """

    __slots__ = ("graph", "values")

    def __init__(self, graph: LatticeGraph, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (graph.n,):
            raise ShapeError(f"expected {graph.n} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ShapeError("field values must be finite")
        self.graph = graph
        self.values = values

    @classmethod
    def _wrap(cls, graph: LatticeGraph, values: np.ndarray) -> "Field":
        # Internal constructor for values already known finite and shaped.
        obj = object.__new__(cls)
        obj.graph = graph
        obj.values = values
        return obj

    @classmethod
    def zeros(cls, graph: LatticeGraph) -> "Field":
        return cls._wrap(graph, np.zeros(graph.n))

    @classmethod
    def delta(cls, graph: LatticeGraph, vertex, amplitude: float = 1.0) -> "Field":
        v = np.zeros(graph.n)
        v[graph.index_of(vertex)] = amplitude
        return cls._wrap(graph, v)

    def copy(self) -> "Field":
        return Field._wrap(self.graph, self.values.copy())

    def __add__(self, other: "Field") -> "Field":
        _same_graph(self, other)
        return Field._wrap(self.graph, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _same_graph(self, other)
        return Field._wrap(self.graph, self.values - other.values)

    def __mul__(self, scalar: float) -> "Field":
        return Field._wrap(self.graph, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field._wrap(self.graph, -self.values)


def _same_graph(u: Field, v: Field) -> None:
    if u.graph is not v.graph:
        raise ShapeError("fields live on different graphs")


def _neighbor_diffs(u: Field) -> np.ndarray:
    # (n, 6) array of u(y) - u(x); missing halo neighbors contribute 0
    # because their adjacency slot points back at x.
    vals = u.values
    return vals[u.graph.nbr] - vals[:, None]


def laplacian(u: Field) -> Field:
    """Graph Laplacian, evaluated at interior vertices and zero on the halo.

    On the halo the stored neighborhood is incomplete, so the operator is
    zero-filled there by convention.
    """
    out = _neighbor_diffs(u).sum(axis=1)
    out[~u.graph.interior] = 0.0
    return Field._wrap(u.graph, out)


def gradient_form(u: Field, v: Field) -> Field:
    """Pointwise gradient form G(u,v)(x) = 1/2 sum_{y~x}(u(y)-u(x))(v(y)-v(x))."""
    _same_graph(u, v)
    prod = _neighbor_diffs(u) * _neighbor_diffs(v)
    return Field._wrap(u.graph, 0.5 * prod.sum(axis=1))


def dirichlet_energy(u: Field, region: np.ndarray | None = None) -> float:
    """sum_{x in region} |grad u|^2(x); region=None means all stored vertices."""
    g = gradient_form(u, u).values
    return vsum(g if region is None else g[region])


def split_signs(u: Field) -> tuple[Field, Field]:
    """Positive and negative parts: u+ = max(u,0), u- = min(u,0).

    The reconstruction u+ + u- == u is exact in floating point and the
    supports are disjoint.
    """
    pos = np.maximum(u.values, 0.0)
    neg = np.minimum(u.values, 0.0)
    return Field._wrap(u.graph, pos), Field._wrap(u.graph, neg)


def cross_term(u: Field, region: np.ndarray | None = None) -> float:
    """Sign-coupling sum K(u) = sum_x sum_{y~x} [u+(x)u-(y) + u-(x)u+(y)].

    Nonpositive for every field: each product pairs values of opposite sign.
    This term is the discrete correction that makes energies of u differ from
    the sum of the energies of its sign parts.
    """
    pos = np.maximum(u.values, 0.0)
    neg = np.minimum(u.values, 0.0)
    # Self-slots of absent neighbors are harmless: u+(x) u-(x) = 0.
    s_pos = pos[u.graph.nbr].sum(axis=1)
    s_neg = neg[u.graph.nbr].sum(axis=1)
    per_vertex = pos * s_neg + neg * s_pos
    return vsum(per_vertex if region is None else per_vertex[region])


def lp_norm(u: Field, p: float, region: np.ndarray | None = None) -> float:
    """Counting-measure l^p norm over a region (p >= 1 or inf)."""
    vals = u.values if region is None else u.values[region]
    if p == np.inf or p == math.inf:
        return float(np.max(np.abs(vals))) if vals.size else 0.0
    p = float(p)
    if p < 1:
        raise InvalidParameterError(f"l^p norm needs p >= 1, got {p}")
    return float(vsum(np.abs(vals) ** p) ** (1.0 / p))


def h_lambda_norm_sq(u: Field, a: float, h_lambda: np.ndarray, region: np.ndarray | None = None) -> float:
    """Squared weighted norm a * dirichlet_energy(u) + sum h_lambda(x) u(x)^2.

    ``h_lambda`` is the per-vertex mass coefficient (lam*h(x)+1 for the
    whole-lattice problem, 1 for the well problem).  The gradient part sums
    over all stored vertices, the mass part over ``region`` (default all).
    """
    mass = h_lambda * u.values**2
    return a * dirichlet_energy(u) + vsum(mass if region is None else mass[region])
