"""Global identifiability, the half-trek criterion, rational recovery of
Lambda, node-wise combination over ancestral sets and mixed components, and
numerical fiber-size estimates."""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional

import numpy as np
from numpy.typing import NDArray

from .decomposition import mixed_components, tian_tau
from .flow import FlowNetwork
from .graph import MixedGraph, Node, induced_subgraph, sinks, strongly_connected_components
from .numerics import DEFAULT_TOL, Tolerances, fiber_points, phi_numeric, sample_params
from .parametrization import recover_omega

STATUS_GLOBAL = "globally-identifiable"
STATUS_GENERIC = "generically-identifiable"
STATUS_INFINITE = "generically-infinite-to-one"
STATUS_UNDECIDED = "undecided"
STATUS_BUDGET = "undecided-by-budget"

NECESSARY_BUDGET = 8
ANCESTRAL_CAP = 64


class IdentificationError(ValueError):
    """A certified system is singular at the given (non-generic) input."""


# -- global identifiability ---------------------------------------------------


@dataclass
class GlobalIdVerdict:
    """``injective`` with an optional witness node set and its kind."""

    injective: bool
    witness: Optional[frozenset[int]] = None
    reason: str = ""

    def to_json(self, G: MixedGraph) -> dict:
        return {
            "injective": self.injective,
            "witness": G.label_list(self.witness) if self.witness is not None else None,
            "reason": self.reason,
        }


def _bidirected_component_of(G: MixedGraph, s: int, within: set[int]) -> set[int]:
    comp = {s}
    q = deque([s])
    while q:
        u = q.popleft()
        for w in G.siblings(u):
            if w in within and w not in comp:
                comp.add(w)
                q.append(w)
    return comp


def is_unique_sink_witness(G: MixedGraph, S: Iterable[int]) -> bool:
    """|S| >= 2, S connected by bidirected edges inside S, and exactly one
    node of S without a directed child in S."""
    S = set(S)
    if len(S) < 2:
        return False
    first = min(S)
    if _bidirected_component_of(G, first, S) != S:
        return False
    return sum(1 for v in S if not (G.children(v) & S)) == 1


def _sink_fixpoint(G: MixedGraph, s: int) -> set[int]:
    # Every witness with sink s survives each step, so the fixpoint is the
    # largest one.  Only induced directed edges matter: dropping directed
    # edges can only add sinks.
    T = _bidirected_component_of(G, s, set(G.nodes))
    while True:
        keep = {v for v in T if v == s or G.children(v) & T}
        keep = _bidirected_component_of(G, s, keep)
        if keep == T:
            return T
        T = keep


def _find_cycle(G: MixedGraph) -> frozenset[int]:
    for comp in strongly_connected_components(G):
        if len(comp) > 1:
            return comp
    raise AssertionError("no directed cycle in a cyclic graph")


def global_id(G: MixedGraph) -> GlobalIdVerdict:
    """Decide injectivity of the parametrization.

    Graphs that are not simple or not acyclic are never injective; the
    witness is a pair carrying both edge types or the nodes of a strong
    component.  For acyclic simple graphs, the map fails to be injective
    exactly when some node set of size at least two is connected by
    bidirected edges and has a unique sink in its induced directed part.
    """
    for i, j in G.sorted_bidirected():
        if G.has_directed(i, j) or G.has_directed(j, i):
            return GlobalIdVerdict(False, frozenset((i, j)), "not simple")
    if not G.is_acyclic:
        return GlobalIdVerdict(False, _find_cycle(G), "directed cycle")
    for s in G.nodes:
        T = _sink_fixpoint(G, s)
        if len(T) >= 2:
            return GlobalIdVerdict(False, frozenset(T), "unique-sink set")
    return GlobalIdVerdict(True)


def brute_force_witness(G: MixedGraph) -> Optional[frozenset[int]]:
    """Smallest-first search over all subsets for a unique-sink witness."""
    for size in range(2, G.n + 1):
        for S in combinations(range(G.n), size):
            if is_unique_sink_witness(G, S):
                return frozenset(S)
    return None


# -- half-trek criterion -------------------------------------------------------


def half_trek_reachable(G: MixedGraph, i: Node) -> frozenset[int]:
    """All j reachable by a half-trek from i: i -> ... -> j or i <-> ... -> j."""
    i = G.node(i)
    seen: set[int] = set()
    q = deque()
    for w in G.children(i) | G.siblings(i):
        if w not in seen:
            seen.add(w)
            q.append(w)
    while q:
        u = q.popleft()
        for w in G.children(u):
            if w not in seen:
                seen.add(w)
                q.append(w)
    return frozenset(seen)


def htc_flow_check(G: MixedGraph, i: Node, allowed: Iterable[Node]) -> Optional[frozenset[int]]:
    """A subset Y of ``allowed`` with |Y| = |pa(i)| and a half-trek system
    Y -> pa(i) with pairwise disjoint right sides, or None.

    Each candidate y has a chooser node feeding in(y) (directed start, y on
    its own right side) and in(w) for every sibling w of y (bidirected
    start).  Nodes carry unit capacity, so right sides are disjoint.
    """
    i = G.node(i)
    allowed = G.node_set(allowed)
    if i in allowed or allowed & G.siblings(i):
        raise ValueError("allowed nodes must exclude i and its siblings")
    pa = sorted(G.parents(i))
    if not pa:
        return frozenset()
    if set(pa) <= allowed:
        return frozenset(pa)
    if len(allowed) < len(pa):
        return None
    n = G.n
    # in(v) = 2v, out(v) = 2v + 1, chooser(y) = 2n + y, source 3n, sink 3n + 1
    net = FlowNetwork(3 * n + 2)
    src, snk = 3 * n, 3 * n + 1
    for v in range(n):
        net.add_edge(2 * v, 2 * v + 1, 1)
    for u, v in G.sorted_directed():
        net.add_edge(2 * u + 1, 2 * v, 1)
    for y in sorted(allowed):
        net.add_edge(src, 2 * n + y, 1)
        net.add_edge(2 * n + y, 2 * y, 1)
        for w in sorted(G.siblings(y)):
            net.add_edge(2 * n + y, 2 * w, 1)
    for p in pa:
        net.add_edge(2 * p + 1, snk, 1)
    if net.max_flow(src, snk) < len(pa):
        return None
    return frozenset(y for y in allowed if net.flow_on(src, 2 * n + y) == 1)


def _half_treks(G: MixedGraph, y: int, p: int) -> list[frozenset[int]]:
    """Right sides of all half-treks from y to p whose directed part is a path."""
    out = []

    def extend(path: list[int]):
        u = path[-1]
        if u == p:
            out.append(frozenset(path))
        for w in sorted(G.children(u)):
            if w not in path:
                extend(path + [w])

    extend([y])
    for w in sorted(G.siblings(y)):
        extend([w])
    return out


def has_half_trek_system(G: MixedGraph, Y: Iterable[int], targets: Iterable[int]) -> bool:
    """Exhaustive search for a half-trek system Y -> targets without sided
    intersection.  Independent of the flow construction."""
    Y = sorted(Y)
    targets = sorted(targets)
    if len(Y) != len(targets):
        return False
    options = {(y, p): _half_treks(G, y, p) for y in Y for p in targets}

    def search(k: int, free: list[int], used: frozenset[int]) -> bool:
        if k == len(Y):
            return True
        y = Y[k]
        for p in free:
            for right in options[(y, p)]:
                if not (right & used):
                    if search(k + 1, [q for q in free if q != p], used | right):
                        return True
        return False

    return search(0, targets, frozenset())


def satisfies_htc(G: MixedGraph, i: int, Y: Iterable[int], oracle: bool = False) -> bool:
    """Whether Y satisfies the half-trek criterion with respect to i."""
    Y = frozenset(Y)
    pa = G.parents(i)
    if len(Y) != len(pa) or i in Y or Y & G.siblings(i):
        return False
    if oracle:
        return has_half_trek_system(G, Y, pa)
    return htc_flow_check(G, i, Y) is not None


@dataclass
class HtcCertificate:
    """Y-sets for the solved nodes and the order in which they were solved."""

    y_sets: dict[int, frozenset[int]]
    ordering: list[int]

    def to_json(self, G: MixedGraph) -> dict:
        return {
            "Y": {G.labels[i]: G.label_list(self.y_sets[i]) for i in self.ordering},
            "ordering": [G.labels[i] for i in self.ordering],
        }


def verify_htc_certificate(G: MixedGraph, y_sets: dict, ordering: Iterable[Node],
                           oracle: bool = True) -> bool:
    """Check the criterion for every Y_i and that j precedes i whenever
    j is in Y_i and reachable from i by a half-trek."""
    order = [G.node(v) for v in ordering]
    if sorted(order) != list(G.nodes):
        return False
    pos = {v: k for k, v in enumerate(order)}
    ys = {G.node(i): G.node_set(Y) for i, Y in y_sets.items()}
    for i in G.nodes:
        Y = ys.get(i, frozenset())
        if not satisfies_htc(G, i, Y, oracle=oracle):
            return False
        reach = half_trek_reachable(G, i)
        if any(j in reach and pos[j] >= pos[i] for j in Y):
            return False
    return True


@dataclass
class HtcResult:
    """Outcome of both sides of the half-trek criterion."""

    sufficient: bool
    certificate: HtcCertificate
    necessary: Optional[bool]
    family: Optional[dict[int, frozenset[int]]] = None

    def to_json(self, G: MixedGraph) -> dict:
        return {
            "sufficient": self.sufficient,
            "certificate": self.certificate.to_json(G),
            "unsolved": G.label_list(set(G.nodes) - set(self.certificate.ordering)),
            "necessary": self.necessary,
            "family": ({G.labels[i]: G.label_list(Y) for i, Y in sorted(self.family.items())}
                       if self.family is not None else None),
        }


def htc_sufficient(G: MixedGraph) -> HtcCertificate:
    """Ascending fixpoint: a node is solved once some Y inside
    (solved nodes) plus (nodes not half-trek reachable from it) passes."""
    solved: list[int] = []
    ys: dict[int, frozenset[int]] = {}
    reach = {i: half_trek_reachable(G, i) for i in G.nodes}
    progress = True
    while progress:
        progress = False
        for i in G.nodes:
            if i in ys:
                continue
            done = set(solved)
            allowed = {j for j in G.nodes
                       if j != i and j not in G.siblings(i) and (j in done or j not in reach[i])}
            Y = htc_flow_check(G, i, allowed)
            if Y is not None:
                ys[i] = Y
                solved.append(i)
                progress = True
    return HtcCertificate(ys, solved)


def htc_necessary(G: MixedGraph, budget: int = NECESSARY_BUDGET) -> tuple[Optional[bool], Optional[dict]]:
    """Backtracking search for a family {Y_i} satisfying the criterion with
    j in Y_i implying i not in Y_j.  Returns (None, None) beyond the budget."""
    if G.n > budget:
        return None, None
    options: dict[int, list[frozenset[int]]] = {}
    for i in G.nodes:
        k = len(G.parents(i))
        pool = [j for j in G.nodes if j != i and j not in G.siblings(i)]
        options[i] = [frozenset(Y) for Y in combinations(pool, k) if htc_flow_check(G, i, Y) is not None]
        if not options[i]:
            return False, None
    order = sorted(G.nodes, key=lambda v: (len(options[v]), v))
    chosen: dict[int, frozenset[int]] = {}

    def search(k: int) -> bool:
        if k == len(order):
            return True
        i = order[k]
        for Y in options[i]:
            if any(i in chosen.get(j, ()) for j in Y):
                continue
            if any(j in Y for j, Yj in chosen.items() if i in Yj):
                continue
            chosen[i] = Y
            if search(k + 1):
                return True
            del chosen[i]
        return False

    if search(0):
        return True, dict(chosen)
    return False, None


def htc_identifiable(G: MixedGraph, budget: int = NECESSARY_BUDGET) -> HtcResult:
    cert = htc_sufficient(G)
    sufficient = len(cert.ordering) == G.n
    if sufficient:
        necessary, family = True, dict(cert.y_sets)
    else:
        necessary, family = htc_necessary(G, budget)
    return HtcResult(sufficient, cert, necessary, family)


# -- recovery -----------------------------------------------------------------


def recover_lambda(G: MixedGraph, Sigma: NDArray, cert: HtcCertificate,
                   cond_limit: float = 1e12) -> NDArray:
    """Solve [(I - Lambda)^T Sigma]_{Y_i, pa(i)} Lambda_{pa(i), i} =
    Sigma_{Y_i, i} - ... node by node in certificate order.

    Rows of unsolved nodes use Sigma directly; the certificate guarantees
    those nodes are not half-trek reachable from i, where the Lambda terms
    cancel on the fiber.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    n = G.n
    lam = np.zeros((n, n))
    done: set[int] = set()
    for i in cert.ordering:
        pa = sorted(G.parents(i))
        if pa:
            Y = sorted(cert.y_sets[i])
            rows = np.array([Sigma[j] - (lam[:, j] @ Sigma if j in done else 0.0) for j in Y])
            A = rows[:, pa]
            b = rows[:, i]
            if np.linalg.cond(A) > cond_limit:
                raise IdentificationError(f"system for node {G.labels[i]} is singular at this covariance")
            lam[pa, i] = np.linalg.solve(A, b)
        done.add(i)
    return lam


@dataclass
class Recovery:
    lam: NDArray
    omega: NDArray
    residual: float


def recover_parameters(G: MixedGraph, Sigma: NDArray, cert: Optional[HtcCertificate] = None) -> Recovery:
    """Lambda from the HTC certificate (computed when absent), then Omega, and
    the largest deviation of phi(Lambda, Omega) from Sigma."""
    if cert is None:
        cert = htc_sufficient(G)
    if len(cert.ordering) != G.n:
        cert = None
    if cert is not None:
        lam = recover_lambda(G, Sigma, cert)
    else:
        lam = recover_lambda_nodewise(G, Sigma)
    om, _ = recover_omega(G, lam, Sigma)
    for a in range(G.n):
        for b in range(G.n):
            if a != b and not G.has_bidirected(a, b):
                om[a, b] = 0.0
    resid = float(np.abs(phi_numeric(lam, om) - Sigma).max())
    return Recovery(lam, om, resid)


# -- node-wise combination ------------------------------------------------------


def ancestral_sets(G: MixedGraph, cap: int = ANCESTRAL_CAP) -> list[frozenset[int]]:
    """Ancestral sets reached from V by repeatedly removing one sink of the
    current induced subgraph, largest first, at most ``cap`` sets."""
    start = frozenset(G.nodes)
    seen = {start}
    frontier = [start]
    out = [start]
    while frontier and len(out) < cap:
        nxt = []
        for A in frontier:
            sub = induced_subgraph(G, A)
            keep = sorted(A)
            for s in sorted(sinks(sub)):
                B = A - {keep[s]}
                if B and B not in seen:
                    seen.add(B)
                    nxt.append(B)
        nxt.sort(key=lambda s: sorted(s))
        for B in nxt:
            if len(out) >= cap:
                break
            out.append(B)
        frontier = nxt
    return out


@dataclass
class NodeSolution:
    """Column of Lambda at ``node`` identified inside component ``block`` of
    the subgraph induced by ``ancestral``."""

    node: int
    ancestral: frozenset[int]
    block: frozenset[int]
    y_set: frozenset[int]


def nodewise_htc(G: MixedGraph, cap: int = ANCESTRAL_CAP) -> dict[int, NodeSolution]:
    """Run the sufficient fixpoint on every mixed component of every
    ancestral subgraph and collect the first solution found for each node."""
    found: dict[int, NodeSolution] = {}
    for A in ancestral_sets(G, cap):
        if len(found) == G.n:
            break
        keep = sorted(A)
        sub = induced_subgraph(G, A)
        for comp in mixed_components(sub).components:
            todo = [v for v in comp.block if keep[v] not in found]
            if not todo:
                continue
            cert = htc_sufficient(comp.graph)
            for loc, Y in cert.y_sets.items():
                v = comp.vertices[loc]
                if v in comp.block and keep[v] not in found:
                    found[keep[v]] = NodeSolution(
                        keep[v], A, frozenset(keep[u] for u in comp.block),
                        frozenset(keep[comp.vertices[y]] for y in Y))
    return found


def recover_lambda_nodewise(G: MixedGraph, Sigma: NDArray, cap: int = ANCESTRAL_CAP) -> NDArray:
    """Recover every column of Lambda through its ancestral subgraph and
    mixed component.  Raises when some node is not identified this way."""
    sols = nodewise_htc(G, cap)
    missing = set(G.nodes) - set(sols)
    if missing:
        raise IdentificationError(f"nodes {G.label_list(missing)} are not certified")
    lam = np.zeros((G.n, G.n))
    cache: dict = {}
    for i, sol in sorted(sols.items()):
        keep = sorted(sol.ancestral)
        key = (sol.ancestral, sol.block)
        if key not in cache:
            sub = induced_subgraph(G, sol.ancestral)
            local_block = frozenset(keep.index(v) for v in sol.block)
            comp = next(c for c in mixed_components(sub).components if c.block == local_block)
            T = tian_tau(sub, Sigma[np.ix_(keep, keep)], comp)
            cert = htc_sufficient(comp.graph)
            # a partial certificate still fixes the columns it solved
            cache[key] = (comp, recover_lambda(comp.graph, T, cert))
        comp, L = cache[key]
        loc = comp.vertices.index(keep.index(i))
        for p_loc in comp.graph.parents(loc):
            lam[keep[comp.vertices[p_loc]], i] = L[p_loc, loc]
    return lam


# -- report ---------------------------------------------------------------------


@dataclass
class ComponentReport:
    block: frozenset[int]
    global_id: GlobalIdVerdict
    htc: HtcResult


@dataclass
class IdentifiabilityReport:
    status: str
    global_id: GlobalIdVerdict
    htc: HtcResult
    nodewise: dict[int, NodeSolution]
    components: list[ComponentReport] = field(default_factory=list)
    degree: Optional[dict] = None

    def to_json(self, G: MixedGraph) -> dict:
        comps = []
        dec = mixed_components(G)
        for rep, comp in zip(self.components, dec.components):
            comps.append({
                "block": G.label_list(rep.block),
                "global_id": rep.global_id.to_json(comp.graph),
                "htc": rep.htc.to_json(comp.graph),
            })
        edges = []
        for t, h in G.sorted_directed():
            sol = self.nodewise.get(h)
            edges.append({
                "edge": f"{G.labels[t]} -> {G.labels[h]}",
                "identified": self.status in (STATUS_GLOBAL, STATUS_GENERIC) or sol is not None,
                "via": (None if sol is None else {
                    "ancestral": G.label_list(sol.ancestral), "block": G.label_list(sol.block),
                    "Y": G.label_list(sol.y_set)}),
            })
        return {
            "status": self.status,
            "global_id": self.global_id.to_json(G),
            "htc": self.htc.to_json(G),
            "edges": edges,
            "components": comps,
            "degree": self.degree,
        }


def identify(G: MixedGraph, budget: int = NECESSARY_BUDGET, cap: int = ANCESTRAL_CAP) -> IdentifiabilityReport:
    """Combine global injectivity, the half-trek criterion on G and on its
    mixed components, and node-wise solutions over ancestral subgraphs."""
    gid = global_id(G)
    htc = htc_identifiable(G, budget)
    comps = []
    for comp in mixed_components(G).components:
        comps.append(ComponentReport(comp.block, global_id(comp.graph), htc_identifiable(comp.graph, budget)))
    nodewise = nodewise_htc(G, cap)
    if gid.injective:
        status = STATUS_GLOBAL
    elif htc.sufficient or len(nodewise) == G.n:
        status = STATUS_GENERIC
    elif htc.necessary is False or any(c.htc.necessary is False for c in comps):
        status = STATUS_INFINITE
    elif htc.necessary is None:
        status = STATUS_BUDGET
    else:
        status = STATUS_UNDECIDED
    return IdentifiabilityReport(status, gid, htc, nodewise, comps)


# -- fiber size estimates ----------------------------------------------------------


@dataclass
class DegreeEstimate:
    """Modal number of real fiber points over trials; a lower bound on the
    algebraic degree since complex solutions are not counted."""

    estimate: int
    counts: list[int]
    trials: int
    starts: int

    @property
    def distribution(self) -> dict[int, int]:
        return dict(sorted(Counter(self.counts).items()))

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "distribution": {str(k): v for k, v in self.distribution.items()},
            "trials": self.trials,
            "starts": self.starts,
            "note": "modal count of distinct real fiber points; lower bound on the algebraic degree",
        }


def fiber_count_trial(G: MixedGraph, seed: int, starts: int, tol: Tolerances = DEFAULT_TOL) -> int:
    """Real fiber points at one random model covariance (deterministic in seed)."""
    rng = np.random.default_rng(seed)
    p = sample_params(G, rng, tol=tol)
    Sigma = phi_numeric(p.lam, p.omega)
    return fiber_points(G, Sigma, starts, rng, tol=tol).count


def fiber_degree_estimate(G: MixedGraph, trials: int = 20, starts: int = 200, seed: int = 0,
                          tol: Tolerances = DEFAULT_TOL, threads: int = 1) -> DegreeEstimate:
    """Modal real fiber size over ``trials`` random model points.  Trial k
    uses seed ``seed + k`` so results do not depend on ``threads``."""
    seeds = [seed + k for k in range(trials)]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as ex:
            counts = list(ex.map(lambda s: fiber_count_trial(G, s, starts, tol), seeds))
    else:
        counts = [fiber_count_trial(G, s, starts, tol) for s in seeds]
    c = Counter(counts)
    mode = max(sorted(c), key=lambda k: c[k])
    return DegreeEstimate(mode, counts, trials, starts)


__all__ = [
    "GlobalIdVerdict", "global_id", "brute_force_witness", "is_unique_sink_witness",
    "half_trek_reachable", "htc_flow_check", "has_half_trek_system", "satisfies_htc",
    "HtcCertificate", "verify_htc_certificate", "HtcResult", "htc_sufficient", "htc_necessary",
    "htc_identifiable", "recover_lambda", "recover_parameters", "Recovery", "ancestral_sets",
    "NodeSolution", "nodewise_htc", "recover_lambda_nodewise", "IdentifiabilityReport", "identify",
    "DegreeEstimate", "fiber_degree_estimate", "fiber_count_trial", "IdentificationError",
    "STATUS_GLOBAL", "STATUS_GENERIC", "STATUS_INFINITE", "STATUS_UNDECIDED", "STATUS_BUDGET",
]
