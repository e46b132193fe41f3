"""Mixed components, parameter projections and the tau map that carries a
covariance matrix of G to covariance matrices of its mixed components."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .algebra import DEFAULT_SIZE_GUARD, RationalFunction, SizeGuardError, det, symbolic_sigma
from .graph import (
    MixedGraph,
    bidirected_components,
    serialize,
    strongly_connected_components,
)
from .numerics import BlockLdl, ParamPoint, block_ldl


@dataclass(frozen=True)
class MixedComponent:
    """Block C with vertex set V[C] = C plus parents of C, and the graph G[C]
    holding the directed edges with head in C and bidirected edges inside C.

    ``vertices`` lists V[C] in the node order of the parent graph; node
    ``k`` of ``graph`` is parent node ``vertices[k]``.
    """

    block: frozenset[int]
    vertices: tuple[int, ...]
    graph: MixedGraph

    @property
    def sources(self) -> tuple[int, ...]:
        return tuple(v for v in self.vertices if v not in self.block)

    def local(self, v: int) -> int:
        return self.vertices.index(v)

    def block_local(self) -> list[int]:
        return [k for k, v in enumerate(self.vertices) if v in self.block]


@dataclass
class Decomposition:
    """Partition of V into mixed-component blocks, sorted by least member."""

    blocks: list[frozenset[int]]
    components: list[MixedComponent] = field(default_factory=list)

    def edge_accounting(self, G: MixedGraph) -> dict:
        return {
            "directed_total": len(G.directed),
            "directed_in_components": sum(len(c.graph.directed) for c in self.components),
            "bidirected_total": len(G.bidirected),
            "bidirected_in_components": sum(len(c.graph.bidirected) for c in self.components),
        }

    def to_json(self, G: MixedGraph) -> dict:
        return {
            "blocks": [G.label_list(b) for b in self.blocks],
            "components": [
                {"block": G.label_list(c.block), "vertices": [G.labels[v] for v in c.vertices],
                 "graph": serialize(c.graph)}
                for c in self.components
            ],
            "edges": self.edge_accounting(G),
        }


def _union_find_blocks(n: int, groups: Sequence[frozenset[int]]) -> list[frozenset[int]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in groups:
        g = sorted(g)
        for v in g[1:]:
            ra, rb = find(g[0]), find(v)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    out: dict[int, set[int]] = {}
    for v in range(n):
        out.setdefault(find(v), set()).add(v)
    return sorted((frozenset(s) for s in out.values()), key=min)


def component_graph(G: MixedGraph, block: frozenset[int]) -> MixedComponent:
    verts = set(block)
    for v in block:
        verts |= G.parents(v)
    order = tuple(sorted(verts))
    pos = {v: k for k, v in enumerate(order)}
    graph = MixedGraph(
        tuple(G.labels[v] for v in order),
        frozenset((pos[t], pos[h]) for t, h in G.directed if h in block),
        frozenset((pos[a], pos[b]) for a, b in G.bidirected if a in block and b in block),
    )
    return MixedComponent(frozenset(block), order, graph)


def mixed_components(G: MixedGraph) -> Decomposition:
    """Finest common coarsening of the strong components and the bidirected
    components, with the component graph of each block."""
    blocks = _union_find_blocks(G.n, strongly_connected_components(G) + bidirected_components(G))
    return Decomposition(blocks, [component_graph(G, b) for b in blocks])


def scc_topological_blocks(G: MixedGraph) -> list[list[int]]:
    """Strong components in topological order, least member first among the
    available choices."""
    comps = strongly_connected_components(G)
    where = {v: k for k, c in enumerate(comps) for v in c}
    succ: list[set[int]] = [set() for _ in comps]
    indeg = [0] * len(comps)
    for t, h in G.directed:
        a, b = where[t], where[h]
        if a != b and b not in succ[a]:
            succ[a].add(b)
            indeg[b] += 1
    heap = [(min(comps[k]), k) for k in range(len(comps)) if indeg[k] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, k = heapq.heappop(heap)
        order.append(sorted(comps[k]))
        for b in succ[k]:
            indeg[b] -= 1
            if indeg[b] == 0:
                heapq.heappush(heap, (min(comps[b]), b))
    return order


def project_component(p: ParamPoint, comp: MixedComponent) -> ParamPoint:
    """Lambda keeps the columns in C; Omega keeps the C x C block and gets a
    unit diagonal on V[C] minus C.  Indexed by V[C]."""
    vs = list(comp.vertices)
    k = len(vs)
    lam = np.zeros((k, k))
    om = np.zeros((k, k))
    for a, u in enumerate(vs):
        for b, v in enumerate(vs):
            if v in comp.block:
                lam[a, b] = p.lam[u, v]
            if u in comp.block and v in comp.block:
                om[a, b] = p.omega[u, v]
        if u not in comp.block:
            om[a, a] = 1.0
    return ParamPoint(lam, om)


def tian_ldl(G: MixedGraph, Sigma: NDArray) -> BlockLdl:
    """Block-LDL of Sigma over the strong components in topological order."""
    return block_ldl(Sigma, scc_topological_blocks(G))


def tian_tau(G: MixedGraph, Sigma: NDArray, comp: MixedComponent, ldl: Optional[BlockLdl] = None) -> NDArray:
    """Covariance of the mixed component ``comp`` computed from Sigma.

    With Sigma = (I - A)^{-T} Delta (I - A)^{-1} over the strong components,
    tau = (I - Ahat)^{-T} Dhat (I - Ahat)^{-1} where Ahat keeps the columns
    C of A restricted to V[C] and Dhat is Delta on C x C and the identity on
    the remaining sources.
    """
    if ldl is None:
        ldl = tian_ldl(G, Sigma)
    vs = list(comp.vertices)
    k = len(vs)
    cols = [a for a, v in enumerate(vs) if v in comp.block]
    Ahat = np.zeros((k, k))
    Ahat[:, cols] = ldl.A[np.ix_(vs, [vs[c] for c in cols])]
    Dhat = np.eye(k)
    Dhat[np.ix_(cols, cols)] = ldl.Delta[np.ix_([vs[c] for c in cols], [vs[c] for c in cols])]
    Inv = np.linalg.inv(np.eye(k) - Ahat)
    T = Inv.T @ Dhat @ Inv
    return (T + T.T) / 2


def tian_tau_all(G: MixedGraph, Sigma: NDArray, dec: Optional[Decomposition] = None) -> list[NDArray]:
    dec = dec or mixed_components(G)
    ldl = tian_ldl(G, Sigma)
    return [tian_tau(G, Sigma, c, ldl) for c in dec.components]


def tian_tau_inverse(G: MixedGraph, taus: Sequence[NDArray], dec: Optional[Decomposition] = None) -> NDArray:
    """Rebuild Sigma from the component covariances.

    Each tau_C is factored again by block-LDL with the sources of G[C] as the
    first block followed by the strong components inside C; the recovered
    columns of A and blocks of Delta are assembled over all components.
    """
    dec = dec or mixed_components(G)
    n = G.n
    A = np.zeros((n, n))
    Delta = np.zeros((n, n))
    scc_order = scc_topological_blocks(G)
    for comp, T in zip(dec.components, taus):
        vs = list(comp.vertices)
        pos = {v: a for a, v in enumerate(vs)}
        src = [pos[v] for v in comp.sources]
        inner = [[pos[v] for v in b] for b in scc_order if b[0] in comp.block]
        f = block_ldl(T, ([src] if src else []) + inner)
        cols = [pos[v] for v in sorted(comp.block)]
        A[np.ix_(vs, sorted(comp.block))] = f.A[:, cols]
        Delta[np.ix_(sorted(comp.block), sorted(comp.block))] = f.Delta[np.ix_(cols, cols)]
    Inv = np.linalg.inv(np.eye(n) - A)
    S = Inv.T @ Delta @ Inv
    return (S + S.T) / 2


# -- symbolic tau -------------------------------------------------------------


def _as_rf(x) -> RationalFunction:
    return x if isinstance(x, RationalFunction) else RationalFunction(x)


def tau_symbolic(G: MixedGraph, comp: MixedComponent, S: Optional[Sequence[Sequence]] = None,
                 size_guard: Optional[int] = DEFAULT_SIZE_GUARD) -> list[list[RationalFunction]]:
    """Symbolic tau_C over the fraction field of the sigma variables.

    Uses the singleton block order given by the topological order of G.
    For node j with predecessors P, A[k, j] comes from Cramer's rule on
    Sigma[P, P] A[P, j] = Sigma[P, j] and Delta[j, j] = det Sigma[P+j] /
    det Sigma[P], so denominators are leading principal minors.  ``S`` may
    be any symmetric matrix of polynomials or rational functions (default:
    the generic sigma matrix), which allows nesting.
    """
    if not G.is_acyclic:
        raise NotImplementedError("symbolic tau is implemented for acyclic graphs only")
    n = G.n
    if size_guard is not None and n > size_guard:
        raise SizeGuardError(f"symbolic tau on {n} nodes exceeds guard {size_guard}")
    if S is None:
        S = symbolic_sigma(n)
    S = [[_as_rf(x) for x in row] for row in S]
    order = list(G.topological_order)
    rank = {v: k for k, v in enumerate(order)}
    vs = list(comp.vertices)
    k = len(vs)
    minors: dict[tuple[int, ...], RationalFunction] = {}

    def pminor(nodes: tuple[int, ...]) -> RationalFunction:
        if nodes not in minors:
            minors[nodes] = _as_rf(det([[S[a][b] for b in nodes] for a in nodes], size_guard=None)) \
                if nodes else RationalFunction(1)
        return minors[nodes]

    Ahat = [[RationalFunction(0) for _ in range(k)] for _ in range(k)]
    Dhat = [RationalFunction(1) for _ in range(k)]
    for b, j in enumerate(vs):
        if j not in comp.block:
            continue
        P = tuple(order[: rank[j]])
        dP = pminor(P)
        for a, u in enumerate(vs):
            if u == j or rank[u] > rank[j]:
                continue
            col = P.index(u)
            M = [[S[r][j] if c == col else S[r][P[c]] for c in range(len(P))] for r in P]
            Ahat[a][b] = _as_rf(det(M, size_guard=None)) / dP
        Dhat[b] = pminor(tuple(sorted(P + (j,), key=rank.get))) / dP
    # Q = (I - Ahat)^{-1}, unit upper triangular in topological order
    loc_order = sorted(range(k), key=lambda a: rank[vs[a]])
    Q = [[RationalFunction(int(a == b)) for b in range(k)] for a in range(k)]
    for b in loc_order:
        for a in range(k):
            acc = Q[a][b]
            for c in range(k):
                if c != b and not Ahat[c][b].is_zero() and not Q[a][c].is_zero():
                    acc = acc + Q[a][c] * Ahat[c][b]
            Q[a][b] = acc
    T = [[None] * k for _ in range(k)]
    for a in range(k):
        for b in range(a, k):
            acc = RationalFunction(0)
            for c in range(k):
                if Q[c][a].is_zero() or Q[c][b].is_zero():
                    continue
                acc = acc + Q[c][a] * Dhat[c] * Q[c][b]
            T[a][b] = T[b][a] = acc
    return T


__all__ = [
    "MixedComponent", "Decomposition", "mixed_components", "component_graph",
    "scc_topological_blocks", "project_component", "tian_ldl", "tian_tau", "tian_tau_all",
    "tian_tau_inverse", "tau_symbolic",
]
