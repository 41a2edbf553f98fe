"""Weighted median orders, good/bad vertex classification and sedimentation.

A (weighted) median order maximizes the total weight of forward arcs, where an
arc (u, v) weighs w(u) * w(v).  The exact solver is a subset DP over prefixes:
value(S) is the best weight of an order of S, obtained by choosing the vertex
placed last.  An optional secondary objective maximizes the index of one
designated vertex among all optimal orders, carried lexicographically through
the same recursion.

For a good digraph, a *good* median order keeps every K(xi) block contiguous;
it is built by contracting blocks, solving the quotient (always a tournament),
and solving each block internally.  The block-contiguous optimum must equal
the unconstrained optimum, and this is asserted rather than assumed.

Sedimentation rearranges a good median order L with feed f when the weight of
N+(f) \\ J(f) equals the weight of G_L \\ J(f): bad vertices outside J(f) move
to the front, J(f) keeps its internal order, everything else follows.  The
rearranged order must again be a good median order of the same weight.
Iterating classifies L as stable (a strict inequality is reached) or periodic
(the orders repeat).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from math import factorial
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dependency import DependencyAnalysis, analyze
from .errors import (
    IntervalOptimalityMismatchError,
    IterBudgetExceededError,
    NotGoodDigraphError,
    NotPermutationError,
    TooLargeError,
    WeightDroppedError,
)
from .graph import OrientedGraph, bit_set, bits, mask_of

EXACT_CAP_DEFAULT = 20


@dataclass(frozen=True)
class LinearOrder:
    """A permutation of the vertices with its forward weight."""

    order: tuple[int, ...]
    forward_weight: float
    certified: bool = False  # True when the weight is a solver-certified optimum

    @property
    def feed(self) -> int:
        return self.order[-1]

    @cached_property
    def position(self) -> Mapping[int, int]:
        return {v: i for i, v in enumerate(self.order)}

    def index_of(self, v: int) -> int:
        return self.position[v]


@dataclass(frozen=True)
class OrderAnalysis:
    """Feed vertex, good and bad vertices of an order, with witnesses.

    Vertices other than the feed and its out-neighbors are classified: v_j is
    good when some earlier v_i has feed -> v_i -> v_j, otherwise bad.  The
    witness map sends each good vertex to the smallest such index i.
    """

    feed: int
    good: frozenset[int]
    bad: frozenset[int]
    witnesses: Mapping[int, int]


def _check_permutation(g: OrientedGraph, seq: Sequence[int]) -> None:
    if len(seq) != g.n or set(seq) != set(range(g.n)):
        raise NotPermutationError(f"sequence {tuple(seq)} does not permute 0..{g.n - 1}")


def order_weight(g: OrientedGraph, seq: Sequence[int]) -> float:
    """Total weight of arcs directed from left to right in ``seq``."""
    _check_permutation(g, seq)
    pos = [0] * g.n
    for i, v in enumerate(seq):
        pos[v] = i
    w = g.weights
    return sum(w[u] * w[v] for u, v in g.arcs if pos[u] < pos[v])


def _dp_solve(
    g: OrientedGraph, secondary: int | None
) -> tuple[float, np.ndarray]:
    """Subset DP; returns the optimal weight and the per-subset choice table."""
    n = g.n
    size = 1 << n
    in_rows = g.in_rows
    unweighted = all(w == 1.0 for w in g.weights)

    subsets = np.arange(size, dtype=np.int64)
    pc = np.zeros(size, dtype=np.int32)
    for v in range(n):
        pc[(subsets >> v) & 1 == 1] += 1

    if unweighted:
        value = np.zeros(size, dtype=np.int64)
        gain_table = pc
    else:
        value = np.zeros(size, dtype=np.float64)
        gain_table = np.zeros(size, dtype=np.float64)
        for v in range(n):
            gain_table[(subsets >> v) & 1 == 1] += g.weights[v]

    sec = np.full(size, -1, dtype=np.int32)
    choice = np.zeros(size, dtype=np.int8)

    level_order = np.argsort(pc, kind="stable")
    starts = np.searchsorted(pc[level_order], np.arange(n + 2))
    for level in range(1, n + 1):
        idx = level_order[starts[level] : starts[level + 1]]
        best_w = np.full(len(idx), -1, dtype=value.dtype)
        best_s = np.full(len(idx), -2, dtype=np.int32)
        best_v = np.zeros(len(idx), dtype=np.int8)
        for v in range(n):
            pos = np.nonzero((idx >> v) & 1 == 1)[0]
            if not len(pos):
                continue
            prev = idx[pos] ^ (1 << v)
            gain = gain_table[prev & in_rows[v]]
            if not unweighted:
                gain = g.weights[v] * gain
            cand_w = value[prev] + gain
            if v == secondary:
                cand_s = np.full(len(pos), level - 1, dtype=np.int32)
            else:
                cand_s = sec[prev]
            cur_w = best_w[pos]
            upd = (cand_w > cur_w) | ((cand_w == cur_w) & (cand_s > best_s[pos]))
            hit = pos[upd]
            best_w[hit] = cand_w[upd]
            best_s[hit] = cand_s[upd]
            best_v[hit] = v
        value[idx] = best_w
        sec[idx] = best_s
        choice[idx] = best_v
    return float(value[size - 1]), choice


def median_order_exact(
    g: OrientedGraph,
    secondary: int | None = None,
    cap: int = EXACT_CAP_DEFAULT,
) -> LinearOrder:
    """Certified optimum order; with ``secondary`` set, additionally maximizes
    that vertex's index among all optimal orders."""
    if g.n > cap:
        raise TooLargeError(f"exact solver capped at n={cap}, got n={g.n}")
    if secondary is not None:
        g.check_vertex(secondary)
    if g.n == 0:
        return LinearOrder((), 0.0, certified=True)
    weight, choice = _dp_solve(g, secondary)
    seq = []
    s = (1 << g.n) - 1
    while s:
        v = int(choice[s])
        seq.append(v)
        s ^= 1 << v
    seq.reverse()
    return LinearOrder(tuple(seq), weight, certified=True)


def median_order_heuristic(g: OrientedGraph, seed: int = 0) -> LinearOrder:
    """Local optimum under single-vertex reinsertion; never certified."""
    n = g.n
    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    w = g.weights
    out = g.out_rows

    improved = True
    while improved:
        improved = False
        for v in range(n):
            i = order.index(v)
            rest = order[:i] + order[i + 1 :]
            # forward weight contributed by v per insertion slot, swept left to right
            gain = sum(w[v] * w[u] for u in rest if out[v] >> u & 1)
            gains = [gain]
            for u in rest:
                if out[u] >> v & 1:
                    gain += w[u] * w[v]
                elif out[v] >> u & 1:
                    gain -= w[v] * w[u]
                gains.append(gain)
            best_p = max(range(len(gains)), key=gains.__getitem__)
            if gains[best_p] > gains[i]:
                rest.insert(best_p, v)
                order = rest
                improved = True
    return LinearOrder(tuple(order), order_weight(g, order), certified=False)


def good_median_order(
    g: OrientedGraph,
    analysis: DependencyAnalysis | None = None,
    cap: int = EXACT_CAP_DEFAULT,
) -> LinearOrder:
    """Median order with every K(xi) contiguous, certified against the
    unconstrained optimum (the two must agree for a good digraph)."""
    if analysis is None:
        analysis = analyze(g)
    if not analysis.is_good:
        raise NotGoodDigraphError("good median order requires a good digraph")

    blocked = sorted(analysis.xi_blocks, key=min)
    in_block = {v for b in blocked for v in b}
    blocks: list[tuple[int, ...]] = sorted(
        [tuple(sorted(b)) for b in blocked]
        + [(v,) for v in range(g.n) if v not in in_block]
    )
    if all(len(b) == 1 for b in blocks):
        return median_order_exact(g, cap=cap)

    # quotient on the blocks: distinct blocks are fully adjacent, one direction
    q_arcs = []
    for i, bi in enumerate(blocks):
        for j in range(i + 1, len(blocks)):
            u, v = bi[0], blocks[j][0]
            if g.has_arc(u, v):
                q_arcs.append((i, j))
            elif g.has_arc(v, u):
                q_arcs.append((j, i))
            else:
                raise NotGoodDigraphError(
                    f"blocks {bi} and {blocks[j]} are not adjacent"
                )
    quotient = OrientedGraph(
        len(blocks),
        frozenset(q_arcs),
        tuple(g.weight_of(b) for b in blocks),
    )
    q_order = median_order_exact(quotient, cap=cap)

    seq: list[int] = []
    for bi in q_order.order:
        block = blocks[bi]
        if len(block) == 1:
            seq.append(block[0])
        else:
            sub, back = g.induced(block)
            inner = median_order_exact(sub, cap=cap)
            seq.extend(back[v] for v in inner.order)

    weight = order_weight(g, seq)
    unconstrained = median_order_exact(g, cap=cap).forward_weight
    if weight != unconstrained:
        raise IntervalOptimalityMismatchError(
            f"block-contiguous optimum {weight} != unconstrained optimum "
            f"{unconstrained}; the interval hypothesis is violated"
        )
    return LinearOrder(tuple(seq), weight, certified=True)


def classify_vertices(g: OrientedGraph, order: LinearOrder | Sequence[int]) -> OrderAnalysis:
    seq = order.order if isinstance(order, LinearOrder) else tuple(order)
    _check_permutation(g, seq)
    feed = seq[-1]
    feed_out = g.out_bits(feed)
    good: set[int] = set()
    bad: set[int] = set()
    witnesses: dict[int, int] = {}
    seen_out = 0  # out-neighbors of the feed at positions < current
    for j, v in enumerate(seq):
        if v != feed and not feed_out >> v & 1:
            hits = g.in_bits(v) & seen_out
            if hits:
                good.add(v)
                witnesses[v] = next(i for i in range(j) if hits >> seq[i] & 1)
            else:
                bad.add(v)
        if feed_out >> v & 1:
            seen_out |= 1 << v
    return OrderAnalysis(feed, frozenset(good), frozenset(bad), witnesses)


def _blocks_contiguous(order: Sequence[int], blocks: Iterable[frozenset[int]]) -> bool:
    pos = {v: i for i, v in enumerate(order)}
    for block in blocks:
        idx = sorted(pos[v] for v in block)
        if idx and idx[-1] - idx[0] != len(idx) - 1:
            return False
    return True


def sedimentation(
    g: OrientedGraph,
    order: LinearOrder,
    analysis: DependencyAnalysis | None = None,
) -> LinearOrder:
    """One sedimentation step of a good median order.

    Returns ``order`` unchanged in the strict-inequality case.  In the
    equality case, rearranges to: bad vertices outside J(feed), then J(feed)
    in its current relative order, then the rest in increasing index.  The
    result is checked to have the same forward weight and contiguous blocks.
    """
    if analysis is None:
        analysis = analyze(g)
    if not analysis.is_good:
        raise NotGoodDigraphError("sedimentation requires a good digraph")
    seq = order.order
    _check_permutation(g, seq)
    if not _blocks_contiguous(seq, analysis.xi_blocks):
        raise NotGoodDigraphError("order does not keep the K(xi) blocks contiguous")

    feed = seq[-1]
    block = analysis.j_set(feed)
    cls = classify_vertices(g, order)
    w_out = g.weight_of(v for v in bit_set(g.out_bits(feed)) if v not in block)
    w_good = g.weight_of(v for v in cls.good if v not in block)
    if w_out < w_good:
        return order
    if w_out > w_good:
        raise NotGoodDigraphError(
            "weight of N+(feed) beyond its block exceeds the good-vertex weight; "
            "the order cannot be a good median order of a good digraph"
        )

    front = [v for v in seq if v in cls.bad and v not in block]
    middle = [v for v in seq if v in block]
    rest = [v for v in seq if v not in block and v not in cls.bad]
    new_seq = tuple(front + middle + rest)
    new_weight = order_weight(g, new_seq)
    if new_weight != order.forward_weight:
        raise WeightDroppedError(
            f"sedimentation changed the forward weight: {order.forward_weight} "
            f"-> {new_weight}"
        )
    if not _blocks_contiguous(new_seq, analysis.xi_blocks):
        raise NotGoodDigraphError("sedimentation broke block contiguity")
    return LinearOrder(new_seq, new_weight, certified=order.certified)


@dataclass(frozen=True)
class SedimentationResult:
    """Outcome of iterated sedimentation.

    ``kind`` is "stable" when some rank reaches the strict inequality (then
    ``rank`` and ``order`` identify it) and "periodic" when an order repeats
    first (then ``cycle`` holds one full period).  ``visited`` lists the
    iterates from rank 0 up to and including the stable order or the end of
    the first period.
    """

    kind: str
    visited: tuple[LinearOrder, ...]
    rank: int | None = None
    order: LinearOrder | None = None
    cycle: tuple[LinearOrder, ...] | None = None


def sedimentation_class(
    g: OrientedGraph,
    order: LinearOrder,
    max_iter: int | None = None,
    analysis: DependencyAnalysis | None = None,
) -> SedimentationResult:
    """Iterate sedimentation until a strict-inequality rank or a repeat."""
    if analysis is None:
        analysis = analyze(g)
    if max_iter is None:
        max_iter = min(10**6, factorial(max(g.n, 1)))

    seen: dict[tuple[int, ...], int] = {}
    visited: list[LinearOrder] = []
    current = order
    for rank in range(max_iter + 1):
        if current.order in seen:
            start = seen[current.order]
            return SedimentationResult(
                "periodic",
                tuple(visited),
                cycle=tuple(visited[start:]),
            )
        seen[current.order] = rank
        visited.append(current)

        feed = current.feed
        block = analysis.j_set(feed)
        cls = classify_vertices(g, current)
        w_out = g.weight_of(v for v in bit_set(g.out_bits(feed)) if v not in block)
        w_good = g.weight_of(v for v in cls.good if v not in block)
        if w_out < w_good:
            return SedimentationResult(
                "stable", tuple(visited), rank=rank, order=current
            )
        current = sedimentation(g, current, analysis)
    raise IterBudgetExceededError(
        f"no stable rank or repeat within {max_iter} sedimentation steps"
    )
