"""Mixed graphs G = (V, D, B): data model, file format and structural primitives."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Union

Node = Union[int, str]


class GraphError(ValueError):
    """Invalid graph structure or graph file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class MixedGraph:
    """Mixed graph with directed edges ``D`` and bidirected edges ``B``.

    Nodes are dense integer indices ``0..n-1``; ``labels[i]`` is the text
    label of node ``i``.  Directed edges are ``(tail, head)`` pairs and
    bidirected edges are stored as sorted pairs ``(i, j)`` with ``i < j``.

    Every function taking a node accepts either an ``int`` index or a
    ``str`` label.
    """

    labels: tuple[str, ...]
    directed: frozenset = field(default_factory=frozenset)
    bidirected: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(set(labels)) != len(labels):
            raise GraphError("duplicate node labels")
        n = len(labels)
        directed = set()
        for t, h in self.directed:
            _check_pair(t, h, n, "->")
            directed.add((int(t), int(h)))
        bidirected = set()
        for i, j in self.bidirected:
            _check_pair(i, j, n, "<->")
            bidirected.add((min(i, j), max(i, j)))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "directed", frozenset(directed))
        object.__setattr__(self, "bidirected", frozenset(bidirected))

    @classmethod
    def from_edges(cls, labels: Iterable, directed: Iterable = (), bidirected: Iterable = ()) -> "MixedGraph":
        """Build a graph from edges given in terms of node labels."""
        labels = tuple(str(x) for x in labels)
        pos = {lab: k for k, lab in enumerate(labels)}

        def idx(x):
            try:
                return pos[str(x)]
            except KeyError:
                raise GraphError(f"unknown node {x!r}") from None

        return cls(
            labels,
            frozenset((idx(a), idx(b)) for a, b in directed),
            frozenset((idx(a), idx(b)) for a, b in bidirected),
        )

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def nodes(self) -> range:
        return range(self.n)

    @cached_property
    def _label_index(self) -> dict[str, int]:
        return {lab: k for k, lab in enumerate(self.labels)}

    def node(self, x: Node) -> int:
        """Resolve an index or label to a node index."""
        if isinstance(x, str):
            try:
                return self._label_index[x]
            except KeyError:
                raise GraphError(f"unknown node {x!r}") from None
        x = int(x)
        if not 0 <= x < self.n:
            raise GraphError(f"node index {x} out of range")
        return x

    def node_set(self, xs: Iterable[Node]) -> frozenset[int]:
        return frozenset(self.node(x) for x in xs)

    def label_list(self, nodes: Iterable[int]) -> list[str]:
        return [self.labels[i] for i in sorted(nodes)]

    @cached_property
    def _pa(self) -> tuple[frozenset, ...]:
        pa = [set() for _ in self.nodes]
        for t, h in self.directed:
            pa[h].add(t)
        return tuple(frozenset(s) for s in pa)

    @cached_property
    def _ch(self) -> tuple[frozenset, ...]:
        ch = [set() for _ in self.nodes]
        for t, h in self.directed:
            ch[t].add(h)
        return tuple(frozenset(s) for s in ch)

    @cached_property
    def _sib(self) -> tuple[frozenset, ...]:
        sib = [set() for _ in self.nodes]
        for i, j in self.bidirected:
            sib[i].add(j)
            sib[j].add(i)
        return tuple(frozenset(s) for s in sib)

    def parents(self, i: Node) -> frozenset[int]:
        return self._pa[self.node(i)]

    def children(self, i: Node) -> frozenset[int]:
        return self._ch[self.node(i)]

    def siblings(self, i: Node) -> frozenset[int]:
        """Nodes joined to ``i`` by a bidirected edge."""
        return self._sib[self.node(i)]

    def has_directed(self, a: Node, b: Node) -> bool:
        return (self.node(a), self.node(b)) in self.directed

    def has_bidirected(self, a: Node, b: Node) -> bool:
        a, b = self.node(a), self.node(b)
        return (min(a, b), max(a, b)) in self.bidirected

    def sorted_directed(self) -> list[tuple[int, int]]:
        return sorted(self.directed)

    def sorted_bidirected(self) -> list[tuple[int, int]]:
        return sorted(self.bidirected)

    @cached_property
    def topological_order(self) -> tuple[int, ...] | None:
        """Least-index-first topological order of (V, D), or None if cyclic."""
        import heapq

        indeg = [len(p) for p in self._pa]
        heap = [i for i in self.nodes if indeg[i] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            u = heapq.heappop(heap)
            order.append(u)
            for w in self._ch[u]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(heap, w)
        return tuple(order) if len(order) == self.n else None

    @property
    def is_acyclic(self) -> bool:
        return self.topological_order is not None

    @cached_property
    def is_simple(self) -> bool:
        for t, h in self.directed:
            if (h, t) in self.directed or (min(t, h), max(t, h)) in self.bidirected:
                return False
        return True

    def __repr__(self) -> str:
        return f"MixedGraph({serialize(self)!r})"


def _check_pair(a, b, n: int, kind: str) -> None:
    if not (0 <= a < n and 0 <= b < n):
        raise GraphError(f"edge {a} {kind} {b} references a missing node")
    if a == b:
        raise GraphError(f"self-loop {a} {kind} {b}")


@dataclass(frozen=True)
class GraphProperties:
    acyclic: bool
    simple: bool
    sinks: frozenset[int]
    sources: frozenset[int]


def properties(G: MixedGraph) -> GraphProperties:
    """Acyclicity, simplicity, sinks and sources of ``G``.

    A sink has no outgoing directed edge.  A source is a tail on every
    incident edge; both endpoints of a bidirected edge count as heads.
    """
    sinks = frozenset(i for i in G.nodes if not G.children(i))
    sources = frozenset(i for i in G.nodes if not G.parents(i) and not G.siblings(i))
    return GraphProperties(G.is_acyclic, G.is_simple, sinks, sources)


def sinks(G: MixedGraph) -> frozenset[int]:
    return frozenset(i for i in G.nodes if not G.children(i))


def strongly_connected_components(G: MixedGraph) -> list[frozenset[int]]:
    """Strong components of the directed part, sorted by least member."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comps: list[frozenset[int]] = []
    counter = 0
    for root in G.nodes:
        if root in index:
            continue
        # iterative Tarjan
        work = [(root, iter(sorted(G.children(root))))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(G.children(w)))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                comps.append(frozenset(comp))
    return sorted(comps, key=min)


def bidirected_components(G: MixedGraph) -> list[frozenset[int]]:
    """Connected components of the bidirected part, sorted by least member."""
    seen: set[int] = set()
    comps = []
    for s in G.nodes:
        if s in seen:
            continue
        comp = {s}
        todo = [s]
        while todo:
            u = todo.pop()
            for w in G.siblings(u):
                if w not in comp:
                    comp.add(w)
                    todo.append(w)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def ancestral_closure(G: MixedGraph, A: Iterable[Node]) -> frozenset[int]:
    """Smallest ancestral set containing ``A``."""
    closure = set(G.node_set(A))
    todo = list(closure)
    while todo:
        u = todo.pop()
        for p in G.parents(u):
            if p not in closure:
                closure.add(p)
                todo.append(p)
    return frozenset(closure)


def is_ancestral(G: MixedGraph, A: Iterable[Node]) -> bool:
    A = G.node_set(A)
    return all(G.parents(i) <= A for i in A)


def induced_subgraph(G: MixedGraph, A: Iterable[Node]) -> MixedGraph:
    """Subgraph on ``A`` keeping every edge with both endpoints in ``A``.

    Nodes keep their relative order; indices are renumbered densely.
    """
    keep = sorted(G.node_set(A))
    new = {old: k for k, old in enumerate(keep)}
    return MixedGraph(
        tuple(G.labels[i] for i in keep),
        frozenset((new[t], new[h]) for t, h in G.directed if t in new and h in new),
        frozenset((new[i], new[j]) for i, j in G.bidirected if i in new and j in new),
    )


def remove_sinks(G: MixedGraph) -> MixedGraph:
    """Induced subgraph on the non-sink nodes."""
    return induced_subgraph(G, set(G.nodes) - sinks(G))


def relabel_map(sub: MixedGraph, G: MixedGraph) -> list[int]:
    """Index in ``G`` of every node of ``sub`` (matched by label)."""
    return [G.node(lab) for lab in sub.labels]


def random_mixed_graph(rng, n: int, p_directed: float = 0.35, p_bidirected: float = 0.25,
                       acyclic: bool = True, simple: bool = False) -> MixedGraph:
    """Random graph on labels ``1..n`` drawn with ``rng`` (a ``random.Random``).

    With ``acyclic`` every directed edge points from a lower to a higher
    label.  Otherwise each ordered pair is drawn independently, so cycles
    and two-cycles may appear.  With ``simple`` no pair carries both kinds
    of edge.
    """
    directed, bidirected = set(), set()
    for i in range(n):
        for j in range(n):
            if i == j or (acyclic and j < i):
                continue
            if rng.random() < p_directed:
                directed.add((i, j))
    for i in range(n):
        for j in range(i + 1, n):
            if simple and ((i, j) in directed or (j, i) in directed):
                continue
            if rng.random() < p_bidirected:
                bidirected.add((i, j))
    return MixedGraph(tuple(str(k + 1) for k in range(n)), frozenset(directed), frozenset(bidirected))


# -- text format -------------------------------------------------------------


def parse_graph(text: str) -> MixedGraph:
    """Parse the ``nodes:`` / ``a -> b`` / ``a <-> b`` text format."""
    labels: list[str] | None = None
    pos: dict[str, int] = {}
    directed: set = set()
    bidirected: set = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("nodes:"):
            if labels is not None:
                raise GraphError("second 'nodes:' line", lineno)
            labels = line[len("nodes:"):].split()
            if len(set(labels)) != len(labels):
                raise GraphError("duplicate node label", lineno)
            pos = {lab: k for k, lab in enumerate(labels)}
            continue
        if labels is None:
            raise GraphError("edge before 'nodes:' line", lineno)
        parts = line.split()
        if len(parts) != 3 or parts[1] not in ("->", "<->"):
            raise GraphError(f"malformed line {raw!r}", lineno)
        a, op, b = parts
        for x in (a, b):
            if x not in pos:
                raise GraphError(f"unknown node {x!r}", lineno)
        if a == b:
            raise GraphError(f"self-loop on {a!r}", lineno)
        i, j = pos[a], pos[b]
        if op == "->":
            edge, target = (i, j), directed
        else:
            edge, target = (min(i, j), max(i, j)), bidirected
        if edge in target:
            raise GraphError(f"duplicate edge {a} {op} {b}", lineno)
        target.add(edge)
    if labels is None:
        raise GraphError("missing 'nodes:' line")
    return MixedGraph(tuple(labels), frozenset(directed), frozenset(bidirected))


def read_graph(path) -> MixedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def serialize(G: MixedGraph) -> str:
    lines = ["nodes: " + " ".join(G.labels)]
    lines += [f"{G.labels[t]} -> {G.labels[h]}" for t, h in G.sorted_directed()]
    lines += [f"{G.labels[i]} <-> {G.labels[j]}" for i, j in G.sorted_bidirected()]
    return "\n".join(lines) + "\n"


def to_dot(G: MixedGraph, name: str = "G") -> str:
    """Graphviz rendering: directed edges blue, bidirected edges red."""
    out = [f"digraph {name} {{"]
    for lab in G.labels:
        out.append(f'  "{lab}";')
    for t, h in G.sorted_directed():
        out.append(f'  "{G.labels[t]}" -> "{G.labels[h]}" [color=blue];')
    for i, j in G.sorted_bidirected():
        out.append(f'  "{G.labels[i]}" -> "{G.labels[j]}" [color=red, dir=both];')
    out.append("}")
    return "\n".join(out) + "\n"
