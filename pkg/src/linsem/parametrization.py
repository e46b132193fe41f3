"""Covariance parametrization in numeric, polynomial and rational form,
trek enumeration, the trek rule, and recovery of Omega from (Lambda, Sigma)."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .algebra import (
    DEFAULT_SIZE_GUARD,
    Polynomial,
    RationalFunction,
    SizeGuardError,
    adjugate,
    det,
    fraction_inverse,
    lam,
    omega,
    random_fraction,
)
from .graph import MixedGraph, Node
from .numerics import ParamPoint, phi_numeric

__all__ = [
    "ParamPoint", "phi_numeric", "phi_param", "lambda_matrix", "omega_matrix",
    "SymbolicCovariance", "phi_symbolic", "Trek", "list_treks", "trek_monomial",
    "trek_rule_entry", "recover_omega", "ExactPoint", "sample_exact", "phi_exact",
]


def phi_param(p: ParamPoint) -> NDArray:
    return phi_numeric(p.lam, p.omega)


def lambda_matrix(G: MixedGraph) -> list[list[Polynomial]]:
    """Symbolic Lambda with ``l<ij>`` on the directed support."""
    n = G.n
    return [[Polynomial.var(lam(i, j)) if (i, j) in G.directed else Polynomial() for j in range(n)]
            for i in range(n)]


def omega_matrix(G: MixedGraph) -> list[list[Polynomial]]:
    """Symbolic Omega with ``w<ii>`` on the diagonal and ``w<ij>`` on B."""
    n = G.n
    return [[Polynomial.var(omega(i, j)) if i == j or G.has_bidirected(i, j) else Polynomial()
             for j in range(n)] for i in range(n)]


@dataclass
class SymbolicCovariance:
    """Symbolic covariance matrix.  Entries are Polynomials for acyclic
    graphs and RationalFunctions for cyclic graphs."""

    entries: list[list]
    rational: bool
    n: int

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def entry_str(self, i: int, j: int) -> str:
        return self.entries[i][j].to_str(self.n)


def _path_matrix_acyclic(G: MixedGraph) -> list[list[Polynomial]]:
    """(I - Lambda)^{-1} for an acyclic graph: P_ij sums directed paths i -> j."""
    n = G.n
    P = [[Polynomial() for _ in range(n)] for _ in range(n)]
    for j in G.topological_order:
        for i in range(n):
            acc = Polynomial.const(1) if i == j else Polynomial()
            for k in sorted(G.parents(j)):
                if not P[i][k].is_zero():
                    acc = acc + P[i][k] * Polynomial.var(lam(k, j))
            P[i][j] = acc
    return P


def phi_symbolic(G: MixedGraph, size_guard: Optional[int] = DEFAULT_SIZE_GUARD) -> SymbolicCovariance:
    """Symbolic parametrization.

    Acyclic graphs use the finite series (I - Lambda)^{-1} = sum_k Lambda^k
    and give polynomial entries.  Cyclic graphs use
    adj(I - Lambda)^T Omega adj(I - Lambda) / det(I - Lambda)^2.
    """
    n = G.n
    if size_guard is not None and n > size_guard:
        raise SizeGuardError(f"symbolic parametrization of {n} nodes exceeds guard {size_guard}")
    Om = omega_matrix(G)
    if G.is_acyclic:
        P = _path_matrix_acyclic(G)
        rational = False
    else:
        L = lambda_matrix(G)
        IL = [[(Polynomial.const(1) if i == j else Polynomial()) - L[i][j] for j in range(n)] for i in range(n)]
        P = adjugate(IL, size_guard=None)
        d = det(IL, size_guard=None)
        rational = True
    # Sigma_ij = sum_{a,b} P_ai Omega_ab P_bj
    support = [(a, b) for a in range(n) for b in range(n) if not Om[a][b].is_zero()]
    S = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            acc = Polynomial()
            for a, b in support:
                if P[a][i].is_zero() or P[b][j].is_zero():
                    continue
                acc = acc + P[a][i] * Om[a][b] * P[b][j]
            if rational:
                acc = RationalFunction(acc, {d: 2}).reduced()
            S[i][j] = S[j][i] = acc
    return SymbolicCovariance(S, rational, n)


# -- treks --------------------------------------------------------------------


@dataclass(frozen=True)
class Trek:
    """A trek with explicit top.

    ``left`` is the directed walk from the top down to the source and
    ``right`` the directed walk from the top down to the target.  With a
    node top, ``left[0] == right[0]`` is the top node.  With a bidirected
    top, ``left[0] <-> right[0]`` is the top edge.
    """

    left: tuple[int, ...]
    right: tuple[int, ...]
    bidirected_top: bool = False

    @property
    def source(self) -> int:
        return self.left[-1]

    @property
    def target(self) -> int:
        return self.right[-1]

    @property
    def top(self) -> tuple[int, ...]:
        return (self.left[0], self.right[0]) if self.bidirected_top else (self.left[0],)

    @property
    def lhs(self) -> frozenset[int]:
        return frozenset(self.left)

    @property
    def rhs(self) -> frozenset[int]:
        return frozenset(self.right)

    @property
    def n_edges(self) -> int:
        return len(self.left) + len(self.right) - 2 + int(self.bidirected_top)

    def directed_edges(self) -> list[tuple[int, int]]:
        return list(zip(self.left, self.left[1:])) + list(zip(self.right, self.right[1:]))

    def is_trivial(self) -> bool:
        return self.n_edges == 0

    def sort_key(self):
        return (self.n_edges, self.left[::-1], int(self.bidirected_top), self.right)

    def to_str(self, G: MixedGraph) -> str:
        lab = G.labels
        s = lab[self.left[-1]]
        for k in range(len(self.left) - 2, -1, -1):
            s += f" <- {lab[self.left[k]]}"
        if self.bidirected_top:
            s += f" <-> {lab[self.right[0]]}"
        for v in self.right[1:]:
            s += f" -> {lab[v]}"
        return s


def _walks_into(G: MixedGraph, target: int, max_edges: int) -> list[tuple[int, ...]]:
    """All directed walks ending at ``target`` with at most ``max_edges`` edges,
    written from their first node down to ``target``."""
    out = []
    frontier = [(target,)]
    for _ in range(max_edges + 1):
        nxt = []
        for w in frontier:
            out.append(w)
            for p in sorted(G.parents(w[0])):
                nxt.append((p,) + w)
        frontier = nxt
    return out


def list_treks(G: MixedGraph, i: Node, j: Node, max_edges: Optional[int] = None) -> list[Trek]:
    """All treks from ``i`` to ``j`` with at most ``max_edges`` edges.

    Acyclic graphs need no bound (every trek has fewer than 2|V| edges).
    Cyclic graphs have infinitely many treks and require a bound.
    """
    i, j = G.node(i), G.node(j)
    if max_edges is None:
        if not G.is_acyclic:
            raise ValueError("cyclic graphs require max_edges for trek enumeration")
        max_edges = 2 * G.n
    left = _walks_into(G, i, max_edges)
    right = _walks_into(G, j, max_edges)
    by_top: dict[int, list[tuple[int, ...]]] = {}
    for w in right:
        by_top.setdefault(w[0], []).append(w)
    treks = []
    for lw in left:
        le = len(lw) - 1
        for rw in by_top.get(lw[0], ()):
            if le + len(rw) - 1 <= max_edges:
                treks.append(Trek(lw, rw, False))
        if le + 1 <= max_edges:
            for b in sorted(G.siblings(lw[0])):
                for rw in by_top.get(b, ()):
                    if le + len(rw) <= max_edges:
                        treks.append(Trek(lw, rw, True))
    treks.sort(key=Trek.sort_key)
    return treks


def trek_monomial(t: Trek) -> Polynomial:
    """Product of edge coefficients times the top's omega variable."""
    m = Polynomial.var(omega(t.left[0], t.right[0]))
    for a, b in t.directed_edges():
        m = m * Polynomial.var(lam(a, b))
    return m


def trek_rule_entry(G: MixedGraph, i: Node, j: Node) -> Polynomial:
    """Covariance entry as the sum of trek monomials (acyclic graphs only)."""
    if not G.is_acyclic:
        raise ValueError("the finite trek sum needs an acyclic graph; use phi_symbolic")
    acc = Polynomial()
    for t in list_treks(G, i, j):
        acc = acc + trek_monomial(t)
    return acc


def recover_omega(G: MixedGraph, lam_m: NDArray, Sigma: NDArray) -> tuple[NDArray, float]:
    """Omega = (I - Lambda)^T Sigma (I - Lambda) and the largest absolute
    entry over non-adjacent pairs (zero on the fiber)."""
    n = G.n
    IL = np.eye(n) - lam_m
    Om = IL.T @ Sigma @ IL
    Om = (Om + Om.T) / 2
    resid = 0.0
    for a in range(n):
        for b in range(a + 1, n):
            if not G.has_bidirected(a, b):
                resid = max(resid, abs(Om[a, b]))
    return Om, resid


# -- exact rational points ----------------------------------------------------


@dataclass
class ExactPoint:
    """Rational parameter point and its exact covariance."""

    lam: list[list[Fraction]]
    omega: list[list[Fraction]]

    def assignment(self) -> dict:
        n = len(self.lam)
        a = {}
        for i in range(n):
            for j in range(n):
                a[lam(i, j)] = self.lam[i][j]
                if i <= j:
                    a[omega(i, j)] = self.omega[i][j]
        return a

    def float_point(self) -> ParamPoint:
        return ParamPoint(np.array(self.lam, dtype=float), np.array(self.omega, dtype=float))


def sample_exact(G: MixedGraph, rng: random.Random) -> ExactPoint:
    """Random rational parameters: nonzero edge coefficients and a diagonally
    dominant Omega with exactly the bidirected support."""
    n = G.n
    while True:
        L = [[Fraction(0)] * n for _ in range(n)]
        for t, h in G.sorted_directed():
            L[t][h] = random_fraction(rng, -3, 3, 5)
        O = [[Fraction(0)] * n for _ in range(n)]
        for a, b in G.sorted_bidirected():
            O[a][b] = O[b][a] = random_fraction(rng, -2, 2, 5)
        for a in range(n):
            O[a][a] = sum(abs(x) for x in O[a]) + Fraction(rng.randint(1, 9), rng.randint(1, 5))
        try:
            phi_exact(G, ExactPoint(L, O))
        except ValueError:
            continue  # I - Lambda singular; redraw
        return ExactPoint(L, O)


def phi_exact(G: MixedGraph, p: ExactPoint) -> list[list[Fraction]]:
    """Exact covariance at a rational parameter point."""
    n = G.n
    IL = [[Fraction(int(i == j)) - p.lam[i][j] for j in range(n)] for i in range(n)]
    P = fraction_inverse(IL)
    # Sigma = P^T Omega P
    OP = [[sum((p.omega[a][b] * P[b][j] for b in range(n) if p.omega[a][b]), Fraction(0))
           for j in range(n)] for a in range(n)]
    return [[sum((P[a][i] * OP[a][j] for a in range(n) if P[a][i]), Fraction(0)) for j in range(n)]
            for i in range(n)]
