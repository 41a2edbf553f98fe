"""Good completions and SNP extraction from their feed vertices.

The completion hypothesis asks that every block J(x) either (i) is the support
K(P) of a directed-path component P of the dependency digraph, or (ii) is an
interval of D containing a vertex with the SNP inside D[J(x)].  When it holds,
orienting each clause-(i) path along its labeled tracks (the first edge by its
convenient orientation, the rest following the losing-relation witnesses)
yields a good digraph D' on the same vertices.  The feed vertex of a good
median order of D' then produces a vertex with the SNP in the original D, by
a case split on where the feed sits relative to the new arcs.  Every returned
vertex is re-validated by direct neighborhood recomputation in D.

The source construction is ambiguous about whether the last path edge a_k b_k
is oriented.  Orienting it (the default here) makes D' good in all cases;
``orient_full_path=False`` keeps the literal "first k-1 edges" reading, which
leaves D' non-good whenever {a_k, b_k} is not an interval.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .dependency import (
    SHAPE_PATH,
    DependencyAnalysis,
    DeltaComponent,
    analyze,
    convenient_orientation,
    is_good_digraph,
    loses_to,
)
from .errors import (
    CertificateFailedError,
    HypothesisFailedError,
    NotGoodAfterCompletionError,
)
from .graph import (
    Arc,
    Edge,
    OrientedGraph,
    SNPCertificate,
    bit_set,
    certify_snp,
    mask_of,
    snp_vertices,
)
from .order import EXACT_CAP_DEFAULT, good_median_order, median_order_exact, order_weight

SnpOracle = Callable[[OrientedGraph, frozenset[int]], "int | None"]

ARC_PATH = "path-orientation"
ARC_OUTSIDE = "outside-orientation"
ARC_REORIENT = "reorientation"


def brute_snp_witness(g: OrientedGraph, block: frozenset[int]) -> int | None:
    """Smallest vertex with the SNP in the induced subgraph on ``block``."""
    found = snp_vertices(g, within=mask_of(block))
    return found[0] if found else None


@dataclass(frozen=True)
class PathBlock:
    """A directed-path component of Delta with its two labeled vertex tracks.

    The tracks satisfy a_i -> a_{i+1} and b_i -> b_{i+1}, and (a_1, b_1) is
    the convenient orientation of the first (good) edge.
    """

    nodes: tuple[Edge, ...]
    a_track: tuple[int, ...]
    b_track: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.nodes)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.a_track) | frozenset(self.b_track)


@dataclass(frozen=True)
class BlockEvidence:
    """Which completion clause a block J(x) satisfies, with the witnesses."""

    block: frozenset[int]
    clause: str | None  # "path", "interval", or None when neither holds
    path: PathBlock | None
    interval: bool
    witness: int | None  # SNP vertex inside D[J(x)] when one exists


@dataclass(frozen=True)
class HypothesisReport:
    holds: bool
    evidence: tuple[BlockEvidence, ...]
    failing: frozenset[int] | None = None

    def for_block(self, block: frozenset[int]) -> BlockEvidence:
        for ev in self.evidence:
            if ev.block == block:
                return ev
        raise KeyError(f"no evidence recorded for block {sorted(block)}")


def label_path_tracks(g: OrientedGraph, comp: DeltaComponent) -> PathBlock | None:
    """Label the two vertex tracks of a directed-path component.

    Returns None when the component's edges are not pairwise disjoint (the
    track form then does not exist).  The first edge must be good; its
    convenient orientation starts the a-track and the witness labelings of
    each losing relation extend both tracks.
    """
    if comp.shape != SHAPE_PATH or comp.node_order is None:
        return None
    chain = comp.node_order
    if len({v for e in chain for v in e}) != 2 * len(chain):
        return None
    a1, b1 = convenient_orientation(g, chain[0])
    a_track, b_track = [a1], [b1]
    for nxt in chain[1:]:
        p, q = nxt
        if loses_to(g, (a_track[-1], b_track[-1]), (p, q)):
            a_track.append(p)
            b_track.append(q)
        elif loses_to(g, (a_track[-1], b_track[-1]), (q, p)):
            a_track.append(q)
            b_track.append(p)
        else:  # the component's own arc must witness from this source order
            raise NotGoodAfterCompletionError(
                f"no witness labeling chains {a_track[-1], b_track[-1]} -> {nxt}"
            )
    return PathBlock(chain, tuple(a_track), tuple(b_track))


def check_hypothesis(
    g: OrientedGraph,
    analysis: DependencyAnalysis | None = None,
    snp_oracle: SnpOracle | None = None,
) -> HypothesisReport:
    """Evaluate the completion hypothesis block by block."""
    if analysis is None:
        analysis = analyze(g)
    oracle = snp_oracle or brute_snp_witness

    evidence = []
    failing = None
    for i, block in enumerate(analysis.xi_blocks):
        members = analysis.xi_members[i]
        path = None
        if len(members) == 1:
            comp = analysis.components[members[0]]
            path = label_path_tracks(g, comp)
        interval = analysis.interval_flags[i]
        witness = oracle(g, block) if interval else None
        if path is not None:
            clause = "path"
        elif interval and witness is not None:
            clause = "interval"
        else:
            clause = None
            if failing is None:
                failing = block
        evidence.append(BlockEvidence(block, clause, path, interval, witness))
    return HypothesisReport(failing is None, tuple(evidence), failing)


@dataclass(frozen=True)
class AddedArc:
    arc: Arc
    provenance: str
    block: frozenset[int]


@dataclass(frozen=True, eq=False)
class Completion:
    """A good completion D' = D + F with the labeled path blocks it oriented."""

    base: OrientedGraph
    completed: OrientedGraph
    added: tuple[AddedArc, ...]
    oriented_paths: tuple[PathBlock, ...]
    report: HypothesisReport
    orient_full_path: bool

    @property
    def added_arcs(self) -> tuple[Arc, ...]:
        return tuple(a.arc for a in self.added)


def good_completion(
    g: OrientedGraph,
    analysis: DependencyAnalysis | None = None,
    *,
    orient_full_path: bool = True,
    snp_oracle: SnpOracle | None = None,
) -> Completion:
    """Orient the clause-(i) path blocks of g into a good digraph.

    Blocks already satisfying clause (ii) (interval with an internal SNP
    vertex) are left untouched.  A path block of k edges contributes its first
    k arcs, or k-1 when ``orient_full_path`` is False.  The result is asserted
    to be a good digraph.
    """
    if analysis is None:
        analysis = analyze(g)
    report = check_hypothesis(g, analysis, snp_oracle)
    if not report.holds:
        raise HypothesisFailedError(
            f"block {sorted(report.failing or ())} satisfies neither completion clause"
        )

    added: list[AddedArc] = []
    oriented: list[PathBlock] = []
    for ev in report.evidence:
        keep = ev.interval and ev.witness is not None
        if keep or ev.path is None:
            continue
        oriented.append(ev.path)
        last = ev.path.k if orient_full_path else ev.path.k - 1
        for i in range(last):
            arc = (ev.path.a_track[i], ev.path.b_track[i])
            added.append(AddedArc(arc, ARC_PATH, ev.block))

    completed = g.with_arcs([a.arc for a in added])
    if not is_good_digraph(completed):
        raise NotGoodAfterCompletionError(
            "completed digraph is not good; with orient_full_path=False this "
            "occurs whenever a leftover last path edge is not an interval"
        )
    return Completion(g, completed, tuple(added), tuple(oriented), report,
                      orient_full_path)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise CertificateFailedError(message)


def snp_from_completion(
    g: OrientedGraph,
    completion: Completion,
    cap: int = EXACT_CAP_DEFAULT,
) -> SNPCertificate:
    """Extract an SNP vertex of g from a good median order of the completion.

    The feed vertex f of a good median order of D' is examined: if it is not
    on any oriented path the certificate comes from inside J(f); otherwise the
    position of f on its path's tracks selects one of three arguments, each of
    whose set inclusions is re-verified numerically before the final
    brute-force validation in g.
    """
    d2 = completion.completed
    analysis2 = analyze(d2)
    order = good_median_order(d2, analysis2, cap=cap)
    f = order.feed

    path = next(
        (p for p in completion.oriented_paths if f in p.support), None
    )
    if path is None:
        return _case_not_incident(g, d2, analysis2, completion, f)

    a_track, b_track = path.a_track, path.b_track
    k = path.k
    if f in b_track:
        return _case_feed_on_b(g, d2, f, method="completion/case-2.3")
    t = a_track.index(f)  # 0-based; the source text counts from 1
    if t < k - 1:
        return _case_feed_on_a_inner(g, d2, f, b_here=b_track[t], b_next=b_track[t + 1])
    return _case_feed_on_a_last(
        g, d2, order, f, last_edge=(a_track[-1], b_track[-1]),
        oriented=completion.orient_full_path, cap=cap,
    )


def _case_not_incident(
    g: OrientedGraph,
    d2: OrientedGraph,
    analysis2: DependencyAnalysis,
    completion: Completion,
    f: int,
) -> SNPCertificate:
    block2 = analysis2.j_set(f)
    if block2 == frozenset((f,)):
        _require(
            g.out_bits(f) == d2.out_bits(f),
            "feed outside F must keep its out-neighborhood",
        )
        return certify_snp(g, f, "completion/case-1-whole")
    ev = completion.report.for_block(block2)
    _require(
        ev.witness is not None,
        f"unoriented block {sorted(block2)} lacks an interval SNP witness",
    )
    return certify_snp(g, ev.witness, "completion/case-1-interval")


def _case_feed_on_b(g: OrientedGraph, d2: OrientedGraph, f: int, method: str) -> SNPCertificate:
    _require(
        g.out_bits(f) == d2.out_bits(f),
        "a b-track feed only gains in-arcs, so N+ must be unchanged",
    )
    first = d2.out_bits(f)
    second = d2.second_out_bits(f)
    _require(first.bit_count() <= second.bit_count(),
             "feed of a good median order must have the SNP in D'")
    _require(second & ~g.second_out_bits(f) == 0,
             "N++ in D' must be contained in N++ in D for a b-track feed")
    return certify_snp(g, f, method)


def _case_feed_on_a_inner(
    g: OrientedGraph, d2: OrientedGraph, f: int, b_here: int, b_next: int
) -> SNPCertificate:
    # N+ gains exactly the new arc (a_t, b_t) and nothing else
    gained = d2.out_bits(f) & ~g.out_bits(f)
    _require(gained == 1 << b_here,
             "an inner a-track feed gains exactly the arc to its own b_t")
    first2 = d2.out_bits(f).bit_count()
    second2_bits = d2.second_out_bits(f)
    _require(first2 <= second2_bits.bit_count(),
             "feed of a good median order must have the SNP in D'")
    _require(bool(second2_bits >> b_next & 1),
             "b_{t+1} must lie in the second out-neighborhood in D'")
    _require(second2_bits & ~(1 << b_next) & ~g.second_out_bits(f) == 0,
             "N++(f) in D' minus b_{t+1} must be contained in N++(f) in D")
    return certify_snp(g, f, "completion/case-2.1")


def _case_feed_on_a_last(
    g: OrientedGraph,
    d2: OrientedGraph,
    order,
    f: int,
    last_edge: tuple[int, int],
    oriented: bool,
    cap: int,
) -> SNPCertificate:
    a_k, b_k = last_edge
    if oriented:
        d3 = d2.with_arc_flipped(a_k, b_k)
    else:
        d3 = d2.with_arcs([(b_k, a_k)])
    _require(
        order_weight(d3, order.order)
        == median_order_exact(d3, cap=cap).forward_weight,
        "the order must remain a median order after reorienting a_k b_k",
    )
    if not is_good_digraph(d3):
        raise NotGoodAfterCompletionError("reoriented digraph is not good")
    _require(g.out_bits(f) == d3.out_bits(f),
             "reorientation restores the original out-neighborhood of a_k")
    second3 = d3.second_out_bits(f)
    _require(d3.out_bits(f).bit_count() <= second3.bit_count(),
             "a_k must have the SNP in the reoriented digraph")
    _require(second3 & ~g.second_out_bits(f) == 0,
             "N++ in D'' must be contained in N++ in D")
    return certify_snp(g, f, "completion/case-2.2")
