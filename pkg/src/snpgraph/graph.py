"""Core oriented-graph representation and neighborhood operations.

Vertices are dense integers 0..n-1 and adjacency is kept as per-vertex bitmask
rows, so first and second out-neighborhoods are a handful of integer ops.
Graphs are immutable; every "mutation" returns a new graph.

An oriented graph here is loopless and digon-free: between any two vertices
there is at most one arc.  A vertex pair with no arc in either direction is a
*missing edge*; a vertex incident to no missing edge is *whole*.  A vertex v
has the second neighborhood property (SNP) when |N+(v)| <= |N++(v)|.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    BadWeightError,
    CertificateFailedError,
    DigonArcError,
    LoopArcError,
    OutOfRangeError,
)

Arc = tuple[int, int]
Edge = tuple[int, int]  # canonical: smaller endpoint first


def canon_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def bits(mask: int) -> Iterator[int]:
    """Yield set bit indices of ``mask`` in increasing order."""
    while mask:
        b = mask & -mask
        yield b.bit_length() - 1
        mask ^= b


def bit_set(mask: int) -> frozenset[int]:
    return frozenset(bits(mask))


@dataclass(frozen=True)
class OrientedGraph:
    """Immutable loopless digon-free digraph with positive vertex weights."""

    n: int
    arcs: frozenset[Arc]
    weights: tuple[float, ...]

    # -- adjacency rows --------------------------------------------------

    @cached_property
    def out_rows(self) -> tuple[int, ...]:
        rows = [0] * self.n
        for u, v in self.arcs:
            rows[u] |= 1 << v
        return tuple(rows)

    @cached_property
    def in_rows(self) -> tuple[int, ...]:
        rows = [0] * self.n
        for u, v in self.arcs:
            rows[v] |= 1 << u
        return tuple(rows)

    @cached_property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @cached_property
    def _second_out_rows(self) -> tuple[int, ...]:
        return tuple(self.second_out_bits(v) for v in range(self.n))

    @cached_property
    def _reach2_rows(self) -> tuple[int, ...]:
        """Per-vertex mask of N+(v) | N++(v); the losing relation lives on this."""
        out = self.out_rows
        return tuple(out[v] | self._second_out_rows[v] for v in range(self.n))

    # -- neighborhood queries ---------------------------------------------

    def check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise OutOfRangeError(f"vertex {v} not in 0..{self.n - 1}")

    def out_bits(self, v: int, within: int | None = None) -> int:
        row = self.out_rows[v]
        return row if within is None else row & within

    def in_bits(self, v: int, within: int | None = None) -> int:
        row = self.in_rows[v]
        return row if within is None else row & within

    def second_out_bits(self, v: int, within: int | None = None) -> int:
        if within is None and "_second_out_rows" in self.__dict__:
            return self._second_out_rows[v]
        scope = self.full_mask if within is None else within
        first = self.out_rows[v] & scope
        acc = 0
        rows = self.out_rows
        for u in bits(first):
            acc |= rows[u]
        return acc & scope & ~first & ~(1 << v)

    def second_in_bits(self, v: int, within: int | None = None) -> int:
        scope = self.full_mask if within is None else within
        first = self.in_rows[v] & scope
        acc = 0
        rows = self.in_rows
        for u in bits(first):
            acc |= rows[u]
        return acc & scope & ~first & ~(1 << v)

    def has_arc(self, u: int, v: int) -> bool:
        return bool(self.out_rows[u] >> v & 1)

    def is_adjacent(self, u: int, v: int) -> bool:
        return bool((self.out_rows[u] | self.in_rows[u]) >> v & 1)

    # -- global structure ---------------------------------------------------

    @cached_property
    def missing_edge_set(self) -> frozenset[Edge]:
        out = self.out_rows
        found = []
        for u in range(self.n):
            adj = out[u] | self.in_rows[u]
            for v in range(u + 1, self.n):
                if not adj >> v & 1:
                    found.append((u, v))
        return frozenset(found)

    @property
    def is_tournament(self) -> bool:
        return not self.missing_edge_set

    def sinks(self) -> list[int]:
        return [v for v in range(self.n) if not self.out_rows[v]]

    def weight_of(self, vertices: Iterable[int]) -> float:
        w = self.weights
        return sum(w[v] for v in vertices)

    def weight_of_mask(self, mask: int) -> float:
        w = self.weights
        return sum(w[v] for v in bits(mask))

    # -- derived graphs -------------------------------------------------------

    def with_arcs(self, extra: Iterable[Arc]) -> OrientedGraph:
        """Return the graph with ``extra`` arcs added; pairs must be missing."""
        extra = list(extra)
        for u, v in extra:
            self.check_vertex(u)
            self.check_vertex(v)
            if u == v:
                raise LoopArcError(f"loop arc ({u},{u})")
            if self.is_adjacent(u, v):
                raise DigonArcError(f"pair ({u},{v}) is already adjacent")
        return OrientedGraph(self.n, self.arcs | set(extra), self.weights)

    def with_arc_flipped(self, u: int, v: int) -> OrientedGraph:
        """Return the graph with arc (u, v) replaced by (v, u)."""
        if (u, v) not in self.arcs:
            raise OutOfRangeError(f"arc ({u},{v}) not present")
        return OrientedGraph(self.n, (self.arcs - {(u, v)}) | {(v, u)}, self.weights)

    def induced(self, vertices: Sequence[int]) -> tuple[OrientedGraph, tuple[int, ...]]:
        """Induced subgraph on ``vertices`` (sorted); returns (graph, new->old map)."""
        order = tuple(sorted(vertices))
        pos = {v: i for i, v in enumerate(order)}
        arcs = frozenset(
            (pos[u], pos[v]) for u, v in self.arcs if u in pos and v in pos
        )
        weights = tuple(self.weights[v] for v in order)
        return OrientedGraph(len(order), arcs, weights), order


@dataclass(frozen=True)
class MissingGraph:
    """The (undirected) graph of missing edges, plus the whole vertices."""

    n: int
    edges: frozenset[Edge]
    whole_vertices: frozenset[int]

    @cached_property
    def neighbors(self) -> Mapping[int, frozenset[int]]:
        nbr: dict[int, set[int]] = {}
        for u, v in self.edges:
            nbr.setdefault(u, set()).add(v)
            nbr.setdefault(v, set()).add(u)
        return {v: frozenset(s) for v, s in nbr.items()}

    def degree(self, v: int) -> int:
        return len(self.neighbors.get(v, ()))

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.neighbors)

    @property
    def is_matching(self) -> bool:
        return all(self.degree(v) == 1 for v in self.support)

    def components(self) -> list[frozenset[Edge]]:
        """Connected components of the missing graph, as edge sets."""
        edges = sorted(self.edges)
        parent = {v: v for v in self.support}

        def find(v: int) -> int:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for u, v in edges:
            parent[find(u)] = find(v)
        comps: dict[int, list[Edge]] = {}
        for e in edges:
            comps.setdefault(find(e[0]), []).append(e)
        return [frozenset(es) for _, es in sorted(comps.items())]

    def path_components(self) -> list[tuple[int, ...]] | None:
        """Vertex sequences of the components if all are simple paths, else None."""
        paths = []
        for comp in self.components():
            verts = {v for e in comp for v in e}
            deg = {v: sum(v in e for e in comp) for v in verts}
            ends = sorted(v for v in verts if deg[v] == 1)
            if len(ends) != 2 or any(d > 2 for d in deg.values()):
                return None
            seq = [ends[0]]
            seen = {ends[0]}
            while len(seq) < len(verts):
                nxt = [w for w in self.neighbors[seq[-1]] if w in verts and w not in seen]
                if not nxt:
                    return None
                seq.append(nxt[0])
                seen.add(nxt[0])
            if len(comp) != len(verts) - 1:
                return None
            paths.append(tuple(seq))
        return paths


def build_graph(
    n: int,
    arcs: Iterable[Arc],
    weights: Mapping[int, float] | Sequence[float] | None = None,
) -> OrientedGraph:
    """Validate and build an OrientedGraph.

    Rejects loops, digons, duplicate arcs with conflicting direction, vertex
    indices outside 0..n-1 and non-positive weights.
    """
    if n < 0:
        raise OutOfRangeError("vertex count must be non-negative")
    seen: set[Arc] = set()
    for u, v in arcs:
        if not (0 <= u < n and 0 <= v < n):
            raise OutOfRangeError(f"arc ({u},{v}) out of range for n={n}")
        if u == v:
            raise LoopArcError(f"loop arc ({u},{u})")
        if (v, u) in seen:
            raise DigonArcError(f"digon between {u} and {v}")
        seen.add((u, v))

    w = [1.0] * n
    if weights is not None:
        items = weights.items() if isinstance(weights, Mapping) else enumerate(weights)
        for v, x in items:
            if not (0 <= v < n):
                raise OutOfRangeError(f"weight for vertex {v} out of range")
            if not x > 0:
                raise BadWeightError(f"weight of vertex {v} must be positive, got {x}")
            w[v] = float(x)
    return OrientedGraph(n, frozenset(seen), tuple(w))


def neighborhoods(
    g: OrientedGraph, v: int
) -> tuple[frozenset[int], frozenset[int], frozenset[int], frozenset[int]]:
    """Return (N+, N-, N++, N--) of v as vertex sets."""
    g.check_vertex(v)
    return (
        bit_set(g.out_bits(v)),
        bit_set(g.in_bits(v)),
        bit_set(g.second_out_bits(v)),
        bit_set(g.second_in_bits(v)),
    )


def has_snp(g: OrientedGraph, v: int, within: int | None = None) -> bool:
    """|N+(v)| <= |N++(v)|, optionally inside the induced subgraph on ``within``."""
    g.check_vertex(v)
    first = g.out_bits(v, within)
    return first.bit_count() <= g.second_out_bits(v, within).bit_count()


def has_weighted_snp(g: OrientedGraph, v: int, within: int | None = None) -> bool:
    """w(N+(v)) <= w(N++(v)), optionally within an induced subgraph."""
    g.check_vertex(v)
    first = g.out_bits(v, within)
    second = g.second_out_bits(v, within)
    return g.weight_of_mask(first) <= g.weight_of_mask(second)


def snp_vertices(g: OrientedGraph, within: int | None = None) -> list[int]:
    """All vertices with the SNP (restricted to ``within`` if given)."""
    scope = range(g.n) if within is None else bits(within)
    return [v for v in scope if has_snp(g, v, within)]


def missing_graph(g: OrientedGraph) -> MissingGraph:
    """Missing edges of g together with the set of whole vertices."""
    edges = g.missing_edge_set
    non_whole = {v for e in edges for v in e}
    whole = frozenset(range(g.n)) - non_whole
    return MissingGraph(g.n, edges, whole)


@dataclass(frozen=True)
class SNPCertificate:
    """A vertex certified (by direct recomputation) to satisfy the SNP."""

    vertex: int
    out_size: int
    second_size: int
    method: str
    companion: int | None = None

    def __str__(self) -> str:
        return (
            f"vertex {self.vertex}: |N+|={self.out_size} <= |N++|={self.second_size}"
            f" (via {self.method})"
        )


def certify_snp(
    g: OrientedGraph, v: int, method: str, companion: int | None = None
) -> SNPCertificate:
    """Build an SNPCertificate, recomputing both neighborhood sizes from g.

    Raises CertificateFailedError when v does not in fact have the SNP; callers
    constructing vertices from structure theorems rely on this hard check.
    """
    g.check_vertex(v)
    out_size = g.out_bits(v).bit_count()
    second_size = g.second_out_bits(v).bit_count()
    if out_size > second_size:
        raise CertificateFailedError(
            f"vertex {v} claimed via {method} fails SNP: "
            f"|N+|={out_size} > |N++|={second_size}"
        )
    return SNPCertificate(v, out_size, second_size, method, companion)
