"""d-separation, conditional independence statements and trek separation."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional

from .algebra import exact_rank
from .flow import INF, FlowNetwork
from .graph import MixedGraph, Node
from .parametrization import list_treks, phi_exact, sample_exact


@dataclass(frozen=True)
class CiStatement:
    """``i`` and ``j`` are d-separated given ``cond``."""

    i: int
    j: int
    cond: tuple[int, ...]

    def to_str(self, G: MixedGraph) -> str:
        given = ",".join(G.labels[k] for k in self.cond)
        return f"{G.labels[self.i]} _||_ {G.labels[self.j]} | {{{given}}}"

    def rows(self) -> list[int]:
        return [self.i, *self.cond]

    def cols(self) -> list[int]:
        return [self.j, *self.cond]


def _incident(G: MixedGraph, u: int):
    """Edges at ``u`` as (neighbor, head_at_u, head_at_neighbor)."""
    for w in G.parents(u):
        yield w, True, False
    for w in G.children(u):
        yield w, False, True
    for w in G.siblings(u):
        yield w, True, True


def d_separated(G: MixedGraph, i: Node, j: Node, S: Iterable[Node] = ()) -> bool:
    """True iff no semi-walk from ``i`` to ``j`` has every collider in ``S``
    and every non-collider outside ``S``.

    Reachability over states (node, arrived with an arrowhead); a node is a
    collider on the walk when both the arriving and the leaving edge have a
    head at it.
    """
    i, j = G.node(i), G.node(j)
    S = G.node_set(S)
    if i == j:
        raise ValueError("d-separation needs two distinct nodes")
    if i in S or j in S:
        raise ValueError("conditioning set must not contain the endpoints")
    seen: set[tuple[int, bool]] = set()
    q: deque[tuple[int, bool]] = deque()
    for w, _, head_w in _incident(G, i):
        st = (w, head_w)
        if st not in seen:
            seen.add(st)
            q.append(st)
    while q:
        u, arrived_head = q.popleft()
        if u == j:
            return False
        for w, head_u, head_w in _incident(G, u):
            collider = arrived_head and head_u
            if collider != (u in S):
                continue
            st = (w, head_w)
            if st not in seen:
                seen.add(st)
                q.append(st)
    return True


def ci_statements(G: MixedGraph, max_cond: Optional[int] = None) -> list[CiStatement]:
    """All d-separations with conditioning sets of size at most ``max_cond``,
    ordered by (i, j, |S|, S)."""
    n = G.n
    if max_cond is None:
        max_cond = max(n - 2, 0)
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            rest = [k for k in range(n) if k not in (i, j)]
            for size in range(min(max_cond, len(rest)) + 1):
                for S in combinations(rest, size):
                    if d_separated(G, i, j, S):
                        out.append(CiStatement(i, j, S))
    return out


# -- trek separation ----------------------------------------------------------


@dataclass(frozen=True)
class TrekSepCertificate:
    """Minimum trek separator: ``rank = |S_A| + |S_C|``."""

    A: tuple[int, ...]
    C: tuple[int, ...]
    rank: int
    S_A: tuple[int, ...]
    S_C: tuple[int, ...]

    def to_json(self, G: MixedGraph) -> dict:
        return {
            "rows": G.label_list(self.A), "cols": G.label_list(self.C), "rank": self.rank,
            "S_A": G.label_list(self.S_A), "S_C": G.label_list(self.S_C),
        }


def trek_separation_rank(G: MixedGraph, A: Iterable[Node], C: Iterable[Node]) -> TrekSepCertificate:
    """Smallest (S_A, S_C) trek-separating A and C, by a minimum vertex cut.

    Each bidirected edge i <-> j becomes a new node with edges to i and j.
    A left copy of this digraph has its edges reversed, a right copy keeps
    them, and L(v) -> R(v) joins the copies at every node, so every trek
    A -> C is a path source -> L(a) ... L(top) -> R(top) ... R(c) -> sink.
    Original nodes get unit capacity (split in/out); subdivision nodes and
    all arcs are uncapacitated, so the cut lies on original nodes.  The
    cut closest to the source is returned.
    """
    A = sorted(G.node_set(A))
    C = sorted(G.node_set(C))
    if not A or not C:
        raise ValueError("trek separation needs nonempty row and column sets")
    n = G.n
    bid = G.sorted_bidirected()
    N = n + len(bid)
    # node ids: copy c in {0 (left), 1 (right)}, vertex v: in = 2*(c*N + v), out = in + 1
    net = FlowNetwork(4 * N + 2)
    src, snk = 4 * N, 4 * N + 1

    def vin(c, v):
        return 2 * (c * N + v)

    def vout(c, v):
        return 2 * (c * N + v) + 1

    for c in (0, 1):
        for v in range(N):
            net.add_edge(vin(c, v), vout(c, v), 1 if v < n else INF)
    arcs = list(G.sorted_directed())
    for k, (a, b) in enumerate(bid):
        arcs.append((n + k, a))
        arcs.append((n + k, b))
    for u, v in arcs:
        net.add_edge(vout(0, v), vin(0, u), INF)  # left copy walks up
        net.add_edge(vout(1, u), vin(1, v), INF)  # right copy walks down
    for v in range(N):
        net.add_edge(vout(0, v), vin(1, v), INF)
    for a in A:
        net.add_edge(src, vin(0, a), INF)
    for c in C:
        net.add_edge(vout(1, c), snk, INF)
    rank = net.max_flow(src, snk)
    side = net.source_side(src)
    S_A = tuple(v for v in range(n) if vin(0, v) in side and vout(0, v) not in side)
    S_C = tuple(v for v in range(n) if vin(1, v) in side and vout(1, v) not in side)
    assert len(S_A) + len(S_C) == rank
    return TrekSepCertificate(tuple(A), tuple(C), rank, S_A, S_C)


def verify_trek_separation(G: MixedGraph, A: Iterable[Node], C: Iterable[Node],
                           S_A: Iterable[Node], S_C: Iterable[Node],
                           max_edges: Optional[int] = None) -> bool:
    """Check sided interception on every trek A -> C with at most
    ``max_edges`` edges (default 2|V|).  Sound but partial on cyclic graphs."""
    A, C = G.node_set(A), G.node_set(C)
    S_A, S_C = G.node_set(S_A), G.node_set(S_C)
    bound = 2 * G.n if max_edges is None else max_edges
    for a in A:
        for c in C:
            for t in list_treks(G, a, c, bound):
                if not (t.lhs & S_A or t.rhs & S_C):
                    return False
    return True


class GenericRankOracle:
    """Generic rank of covariance submatrices by exact evaluation.

    Draws ``draws`` random rational parameter points once, computes the
    exact covariance at each, and reports the maximal exact rank of the
    requested submatrix over the draws.
    """

    def __init__(self, G: MixedGraph, draws: int = 3, seed: int = 0):
        rng = random.Random(seed)
        self.G = G
        self.sigmas: list[list[list[Fraction]]] = [phi_exact(G, sample_exact(G, rng)) for _ in range(draws)]

    def rank(self, A: Iterable[Node], C: Iterable[Node]) -> int:
        A = sorted(self.G.node_set(A))
        C = sorted(self.G.node_set(C))
        return max(exact_rank([[S[a][c] for c in C] for a in A]) for S in self.sigmas)


def generic_rank_numeric(G: MixedGraph, A: Iterable[Node], C: Iterable[Node],
                         draws: int = 3, seed: int = 0) -> int:
    """Generic rank of Sigma[A, C] from exact rational evaluations."""
    return GenericRankOracle(G, draws, seed).rank(A, C)
