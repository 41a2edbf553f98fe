"""The losing relation, the dependency digraph and its block structure.

For missing edges xy and ab of an oriented graph D, xy *loses to* ab when,
for some ordered labeling, x->a with b outside N+(x) u N++(x) and y->b with a
outside N+(y) u N++(y).  The dependency digraph Delta has the missing edges
as nodes and the losing relations as arcs.  A missing edge is *good* exactly
when its in-degree in Delta is zero, and a good edge admits a *convenient
orientation*: adding that arc changes no other vertex's first or second
out-neighborhood.

Connected components C of Delta have vertex support K(C).  Components sharing
a graph vertex are merged into xi-blocks K(xi); J(v) is {v} for a whole vertex
and otherwise the unique K(xi) containing v.  D is a *good digraph* when every
K(xi) is an interval of D (all members see the same outside neighborhoods).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import NotGoodEdgeError, NotMissingError
from .graph import Edge, OrientedGraph, bit_set, bits, canon_edge, mask_of

Labeling = tuple[tuple[int, int], tuple[int, int]]

# Delta-component shape tags.
SHAPE_PATH = "path"
SHAPE_CYCLE = "cycle"
SHAPE_DOUBLE_CYCLE = "double-cycle"
SHAPE_OTHER = "other"


def loses_to(g: OrientedGraph, e1: tuple[int, int], e2: tuple[int, int]) -> bool:
    """Losing relation for the ordered labelings e1=(x,y), e2=(a,b).

    True iff x->a, b not in N+(x) u N++(x), y->b, a not in N+(y) u N++(y).
    Both pairs must be missing edges of g.
    """
    x, y = e1
    a, b = e2
    for u, v in (e1, e2):
        if canon_edge(u, v) not in g.missing_edge_set:
            raise NotMissingError(f"pair ({u},{v}) is not a missing edge")
    if canon_edge(x, y) == canon_edge(a, b):
        raise NotMissingError("losing relation needs two distinct missing edges")
    reach = g._reach2_rows
    return (
        bool(g.out_rows[x] >> a & 1)
        and not reach[x] >> b & 1
        and bool(g.out_rows[y] >> b & 1)
        and not reach[y] >> a & 1
    )


def losing_labelings(g: OrientedGraph, p: Edge, q: Edge) -> list[Labeling]:
    """All ordered labelings witnessing the node-level relation p -> q.

    Labelings are reported with p in canonical-or-swapped order against q in
    canonical order; ((x,y),(a,b)) and ((y,x),(b,a)) are the same witness and
    only the former is listed.
    """
    u, v = canon_edge(*p)
    a, b = canon_edge(*q)
    out = []
    for src in ((u, v), (v, u)):
        if loses_to(g, src, (a, b)):
            out.append((src, (a, b)))
    return out


@dataclass(frozen=True, eq=False)
class DependencyDigraph:
    """Delta(D): missing edges as nodes, losing relations as arcs."""

    graph: OrientedGraph
    nodes: tuple[Edge, ...]
    arcs: frozenset[tuple[Edge, Edge]]
    labelings: Mapping[tuple[Edge, Edge], tuple[Labeling, ...]]

    @cached_property
    def in_degrees(self) -> Mapping[Edge, int]:
        deg = {e: 0 for e in self.nodes}
        for _, e2 in self.arcs:
            deg[e2] += 1
        return deg

    @cached_property
    def out_degrees(self) -> Mapping[Edge, int]:
        deg = {e: 0 for e in self.nodes}
        for e1, _ in self.arcs:
            deg[e1] += 1
        return deg

    def out_neighbors(self, e: Edge) -> list[Edge]:
        return sorted(e2 for e1, e2 in self.arcs if e1 == e)

    def in_neighbors(self, e: Edge) -> list[Edge]:
        return sorted(e1 for e1, e2 in self.arcs if e2 == e)

    def is_good(self, e: Edge) -> bool:
        return self.in_degrees[e] == 0

    @cached_property
    def good_edges(self) -> frozenset[Edge]:
        return frozenset(e for e in self.nodes if self.is_good(e))


def dependency_digraph(g: OrientedGraph) -> DependencyDigraph:
    """Build Delta(g) with every witnessing labeling recorded."""
    nodes = tuple(sorted(g.missing_edge_set))
    arcs = set()
    labelings: dict[tuple[Edge, Edge], tuple[Labeling, ...]] = {}
    for p in nodes:
        for q in nodes:
            if p == q:
                continue
            wits = losing_labelings(g, p, q)
            if wits:
                arcs.add((p, q))
                labelings[(p, q)] = tuple(wits)
    return DependencyDigraph(g, nodes, frozenset(arcs), labelings)


def is_good_edge(g: OrientedGraph, e: Edge) -> bool:
    """Direct evaluation of the good-edge conditions (i)/(ii)."""
    return _condition_i(g, e[0], e[1]) or _condition_i(g, e[1], e[0])


def _condition_i(g: OrientedGraph, a: int, b: int) -> bool:
    # every in-neighbor of a (other than b) already reaches b in two steps
    reach = g._reach2_rows
    pred = g.in_bits(a) & ~(1 << b)
    return all(reach[v] >> b & 1 for v in bits(pred))


def is_convenient(g: OrientedGraph, arc: tuple[int, int]) -> bool:
    """True iff orienting the missing pair as ``arc`` preserves every other
    vertex's first and second out-neighborhoods."""
    s, t = arc
    if canon_edge(s, t) not in g.missing_edge_set:
        raise NotMissingError(f"pair ({s},{t}) is not a missing edge")
    return _condition_i(g, s, t)


def convenient_orientation(g: OrientedGraph, e: tuple[int, int]) -> tuple[int, int]:
    """Orientation of the good missing edge e preserving everyone else's N+/N++.

    Checks the defining conditions directly, not via Delta in-degrees.  When
    both orientations qualify, the one with the smaller source index wins.
    Raises NotGoodEdgeError when neither condition holds.
    """
    a, b = canon_edge(*e)
    if (a, b) not in g.missing_edge_set:
        raise NotMissingError(f"pair ({a},{b}) is not a missing edge")
    if _condition_i(g, a, b):
        return (a, b)
    if _condition_i(g, b, a):
        return (b, a)
    raise NotGoodEdgeError(f"missing edge ({a},{b}) is not good")


@dataclass(frozen=True, eq=False)
class DeltaComponent:
    """One connected component of Delta with its support and shape."""

    index: int
    edges: tuple[Edge, ...]
    support: frozenset[int]  # K(C)
    shape: str
    # Chain of nodes for SHAPE_PATH, cyclic node order for SHAPE_CYCLE.
    node_order: tuple[Edge, ...] | None = None
    # Cyclic (a_i, b_i, c_i) triples for SHAPE_DOUBLE_CYCLE.
    triples: tuple[tuple[int, int, int], ...] | None = None


@dataclass(frozen=True, eq=False)
class DependencyAnalysis:
    """Delta components, xi-blocks, the J map and the interval verdicts."""

    graph: OrientedGraph
    delta: DependencyDigraph
    components: tuple[DeltaComponent, ...]
    interval_graph_edges: frozenset[tuple[int, int]]  # component index pairs
    xi_members: tuple[tuple[int, ...], ...]  # component indices per xi
    xi_blocks: tuple[frozenset[int], ...]  # K(xi) per xi
    interval_flags: tuple[bool, ...]

    @cached_property
    def block_of_vertex(self) -> Mapping[int, int]:
        out: dict[int, int] = {}
        for i, block in enumerate(self.xi_blocks):
            for v in block:
                out[v] = i
        return out

    def j_set(self, v: int) -> frozenset[int]:
        i = self.block_of_vertex.get(v)
        return frozenset((v,)) if i is None else self.xi_blocks[i]

    @cached_property
    def j_map(self) -> Mapping[int, frozenset[int]]:
        return {v: self.j_set(v) for v in range(self.graph.n)}

    @property
    def is_good(self) -> bool:
        return all(self.interval_flags)

    def component_of_edge(self, e: Edge) -> DeltaComponent:
        for comp in self.components:
            if e in comp.edges:
                return comp
        raise NotMissingError(f"{e} is not a missing edge")


def is_interval(g: OrientedGraph, vertices: Iterable[int]) -> bool:
    """True iff all members of the set agree on N+ and N- outside the set."""
    vs = sorted(set(vertices))
    if len(vs) <= 1:
        return True
    outside = ~mask_of(vs)
    v0 = vs[0]
    out0 = g.out_bits(v0) & outside
    in0 = g.in_bits(v0) & outside
    return all(
        g.out_bits(v) & outside == out0 and g.in_bits(v) & outside == in0
        for v in vs[1:]
    )


def is_good_digraph(g: OrientedGraph, analysis: DependencyAnalysis | None = None) -> bool:
    """True iff every K(xi) is an interval of g."""
    if analysis is None:
        analysis = analyze(g)
    return analysis.is_good


def analyze(g: OrientedGraph) -> DependencyAnalysis:
    """Full dependency analysis: components, shapes, xi-blocks, J, intervals."""
    delta = dependency_digraph(g)
    comp_sets = _weak_components(delta)
    components = tuple(
        _shape_component(g, delta, i, edges) for i, edges in enumerate(comp_sets)
    )

    # interval graph: components sharing a graph vertex
    ig_edges = set()
    for i in range(len(components)):
        for j in range(i + 1, len(components)):
            if components[i].support & components[j].support:
                ig_edges.add((i, j))

    # xi = connected components of the interval graph, by union-find
    parent = list(range(len(components)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in ig_edges:
        parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(components)):
        groups.setdefault(find(i), []).append(i)
    xi_members = tuple(tuple(sorted(v)) for _, v in sorted(groups.items()))
    xi_blocks = tuple(
        frozenset().union(*(components[i].support for i in member))
        for member in xi_members
    )
    flags = tuple(is_interval(g, block) for block in xi_blocks)
    return DependencyAnalysis(
        g, delta, components, frozenset(ig_edges), xi_members, xi_blocks, flags
    )


def _weak_components(delta: DependencyDigraph) -> list[list[Edge]]:
    nodes = delta.nodes
    index = {e: i for i, e in enumerate(nodes)}
    parent = list(range(len(nodes)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for e1, e2 in delta.arcs:
        parent[find(index[e1])] = find(index[e2])
    groups: dict[int, list[Edge]] = {}
    for e in nodes:
        groups.setdefault(find(index[e]), []).append(e)
    return [sorted(v) for _, v in sorted(groups.items())]


def _shape_component(
    g: OrientedGraph, delta: DependencyDigraph, index: int, edges: list[Edge]
) -> DeltaComponent:
    support = frozenset(v for e in edges for v in e)
    edge_set = set(edges)
    outs = {e: [t for t in delta.out_neighbors(e) if t in edge_set] for e in edges}
    ins = {e: [t for t in delta.in_neighbors(e) if t in edge_set] for e in edges}

    shape = SHAPE_OTHER
    node_order: tuple[Edge, ...] | None = None
    triples = None

    if all(len(outs[e]) <= 1 and len(ins[e]) <= 1 for e in edges):
        starts = [e for e in edges if not ins[e]]
        if len(starts) == 1:
            chain = [starts[0]]
            while outs[chain[-1]]:
                chain.append(outs[chain[-1]][0])
            if len(chain) == len(edges):
                shape, node_order = SHAPE_PATH, tuple(chain)
        elif not starts and all(len(outs[e]) == 1 for e in edges):
            cyc = [edges[0]]
            while True:
                nxt = outs[cyc[-1]][0]
                if nxt == cyc[0]:
                    break
                cyc.append(nxt)
            if len(cyc) == len(edges):
                shape, node_order = SHAPE_CYCLE, tuple(cyc)
    elif all(len(outs[e]) == 2 and len(ins[e]) == 2 for e in edges):
        triples = _double_cycle_triples(g, delta, edges)
        if triples is not None:
            shape = SHAPE_DOUBLE_CYCLE

    return DeltaComponent(index, tuple(edges), support, shape, node_order, triples)


def _double_cycle_triples(
    g: OrientedGraph, delta: DependencyDigraph, edges: list[Edge]
) -> tuple[tuple[int, int, int], ...] | None:
    """Recover the cyclic (a_i, b_i, c_i) triples of a double-cycle component.

    Nodes must pair into disjoint missing 2-paths (one shared center per pair)
    and the triples must chain in one directed cycle where every one of the
    four edge-level relations between consecutive triples holds.  Within a
    triple the outer vertices are interchangeable; the smaller index is a_i.
    """
    if len(edges) % 2 or len(edges) < 4:
        return None
    by_vertex: dict[int, list[Edge]] = {}
    for e in edges:
        for v in e:
            by_vertex.setdefault(v, []).append(e)
    centers = [v for v, es in by_vertex.items() if len(es) == 2]
    if any(len(es) > 2 for es in by_vertex.values()):
        return None
    if len(centers) != len(edges) // 2:
        return None
    raw = []
    for b in sorted(centers):
        e1, e2 = by_vertex[b]
        outer = sorted(set(e1 + e2) - {b})
        if len(outer) != 2 or b in outer:
            return None
        raw.append((outer[0], b, outer[1]))
    supports = [set(t) for t in raw]
    if len(set().union(*supports)) != 3 * len(raw):
        return None  # triples must be vertex-disjoint

    edge_pair = {i: {canon_edge(t[0], t[1]), canon_edge(t[1], t[2])} for i, t in enumerate(raw)}
    succ: dict[int, int] = {}
    arc_set = delta.arcs
    for i in range(len(raw)):
        targets = set()
        for e in edge_pair[i]:
            targets.update(e2 for e1, e2 in arc_set if e1 == e)
        nxt = [j for j in range(len(raw)) if j != i and targets == edge_pair[j]]
        if len(nxt) != 1:
            return None
        # all four edge-level relations between consecutive triples
        if not all(
            (e, f) in arc_set for e in edge_pair[i] for f in edge_pair[nxt[0]]
        ):
            return None
        succ[i] = nxt[0]

    order = [0]
    while True:
        nxt = succ[order[-1]]
        if nxt == 0:
            break
        if nxt in order:
            return None
        order.append(nxt)
    if len(order) != len(raw):
        return None
    return tuple(raw[i] for i in order)


# --- reports and exports -------------------------------------------------------


def component_report(analysis: DependencyAnalysis) -> str:
    """One line per Delta component: id, shape tag, K(C) members."""
    lines = []
    for comp in analysis.components:
        members = ",".join(str(v) for v in sorted(comp.support))
        lines.append(f"component {comp.index}: shape={comp.shape} K={{{members}}}")
    for i, (block, flag) in enumerate(zip(analysis.xi_blocks, analysis.interval_flags)):
        members = ",".join(str(v) for v in sorted(block))
        lines.append(f"xi {i}: K={{{members}}} interval={'yes' if flag else 'no'}")
    lines.append(f"good digraph: {'yes' if analysis.is_good else 'no'}")
    return "\n".join(lines)


def delta_to_dot(delta: DependencyDigraph) -> str:
    """DOT rendering of Delta; good nodes are drawn doubled."""
    def name(e: Edge) -> str:
        return f'"{e[0]}-{e[1]}"'

    lines = ["digraph delta {"]
    for e in delta.nodes:
        style = ' [peripheries=2, style=filled, fillcolor="palegreen"]' if delta.is_good(e) else ""
        lines.append(f"  {name(e)}{style};")
    for e1, e2 in sorted(delta.arcs):
        lines.append(f"  {name(e1)} -> {name(e2)};")
    lines.append("}")
    return "\n".join(lines)
