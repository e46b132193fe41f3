"""Polynomial constraints on the covariance model: almost-principal minors
from d-separation, minors from trek separation, and non-determinantal
constraints found by alternating ancestral restriction and decomposition.
Each constraint can be certified numerically."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .algebra import (
    DEFAULT_SIZE_GUARD,
    Polynomial,
    RationalFunction,
    det,
    proportional,
    random_fraction,
    sigma,
    sigma_assignment,
    symbolic_sigma,
)
from .decomposition import mixed_components, tau_symbolic
from .graph import MixedGraph, Node, induced_subgraph
from .identifiability import ANCESTRAL_CAP, ancestral_sets
from .numerics import phi_numeric, sample_params
from .parametrization import list_treks
from .separation import ci_statements, trek_separation_rank

KIND_CI = "almost-principal-minor"
KIND_MINOR = "minor"
KIND_VERMA = "verma"


@dataclass
class Certification:
    """Evidence that a constraint vanishes on the model and not off it."""

    on_model_trials: int
    on_model_max_relative: float
    off_model_trials: int
    off_model_nonzero: int
    certified: bool

    def to_json(self) -> dict:
        return {
            "on_model_trials": self.on_model_trials,
            "on_model_max_relative": self.on_model_max_relative,
            "off_model_trials": self.off_model_trials,
            "off_model_nonzero": self.off_model_nonzero,
            "certified": self.certified,
        }


@dataclass
class Constraint:
    """A polynomial in the sigma variables vanishing on the model.

    Minor constraints carry their row and column sets; every constraint
    carries its expanded polynomial and a provenance trace.
    """

    kind: str
    poly: Polynomial
    rows: Optional[tuple[int, ...]] = None
    cols: Optional[tuple[int, ...]] = None
    provenance: list[str] = field(default_factory=list)
    certification: Optional[Certification] = None

    def to_json(self, G: MixedGraph) -> dict:
        return {
            "kind": self.kind,
            "rows": G.label_list(self.rows) if self.rows is not None else None,
            "cols": G.label_list(self.cols) if self.cols is not None else None,
            "polynomial": self.poly.to_str(G.n),
            "provenance": self.provenance,
            "certification": self.certification.to_json() if self.certification else None,
        }


def minor_polynomial(rows: Sequence[int], cols: Sequence[int]) -> Polynomial:
    """det Sigma[rows, cols] expanded in the sigma variables."""
    return det([[Polynomial.var(sigma(a, c)) for c in cols] for a in rows], size_guard=None)


def ci_constraints(G: MixedGraph, max_cond: Optional[int] = None) -> list[Constraint]:
    """One almost-principal minor det Sigma[iS, jS] per d-separation."""
    out = []
    for st in ci_statements(G, max_cond):
        rows, cols = tuple(st.rows()), tuple(st.cols())
        out.append(Constraint(KIND_CI, minor_polynomial(rows, cols), rows, cols, [st.to_str(G)]))
    return out


def minor_constraints(G: MixedGraph, max_minor_size: int = 2, rows: Optional[Iterable[Node]] = None,
                      cols: Optional[Iterable[Node]] = None) -> list[Constraint]:
    """k x k minors det Sigma[A, C] whose trek-separation rank is below k.

    A minor is skipped when it is implied by smaller vanishing minors:
    if rank Sigma[A - a, C] < k - 1 for some a in A (or the same for some
    column), Laplace expansion along a writes det Sigma[A, C] as a
    combination of those smaller minors.  A minor and its transpose are
    reported once.
    """
    row_pool = sorted(G.node_set(rows)) if rows is not None else list(G.nodes)
    col_pool = sorted(G.node_set(cols)) if cols is not None else list(G.nodes)
    ranks: dict[tuple[tuple[int, ...], tuple[int, ...]], int] = {}

    def rank(A: tuple[int, ...], C: tuple[int, ...]) -> int:
        if not A or not C:
            return 0
        key = (A, C)
        if key not in ranks:
            ranks[key] = trek_separation_rank(G, A, C).rank
        return ranks[key]

    out = []
    seen: set[tuple[tuple[int, ...], tuple[int, ...]]] = set()
    for k in range(1, max_minor_size + 1):
        for A in combinations(row_pool, k):
            for C in combinations(col_pool, k):
                key = (min(A, C), max(A, C))
                if key in seen:
                    continue
                seen.add(key)
                cert = trek_separation_rank(G, A, C)
                ranks[(A, C)] = cert.rank
                if cert.rank >= k:
                    continue
                implied = any(rank(tuple(x for x in A if x != a), C) < k - 1 for a in A) or \
                    any(rank(A, tuple(x for x in C if x != c)) < k - 1 for c in C)
                if implied:
                    continue
                trace = [f"trek separation rank {cert.rank} < {k} by "
                         f"({{{','.join(G.label_list(cert.S_A))}}}, {{{','.join(G.label_list(cert.S_C))}}})"]
                out.append(Constraint(KIND_MINOR, minor_polynomial(A, C), A, C, trace))
    return out


def _has_trek(G: MixedGraph, i: int, j: int) -> bool:
    return bool(list_treks(G, i, j))


def _sigma_points(n: int, count: int, seed: int) -> list[dict]:
    rng = random.Random(seed)
    pts = []
    for _ in range(count):
        pts.append({sigma(a, b): random_fraction(rng, -9, 9, 7) for a in range(n) for b in range(a, n)})
    return pts


def verma_constraints(G: MixedGraph, max_depth: int = 2, cap: int = ANCESTRAL_CAP,
                      size_guard: Optional[int] = DEFAULT_SIZE_GUARD, seed: int = 0) -> list[Constraint]:
    """Numerators of tau entries that vanish because the pair has no trek in
    its mixed component, collected over ancestral subgraphs and, up to
    ``max_depth`` levels, inside the components themselves.

    Constraints equal up to a scalar are reported once.
    """
    if not G.is_acyclic:
        raise NotImplementedError("constraint recursion needs an acyclic graph")
    points = _sigma_points(G.n, 10, seed)
    found: list[Constraint] = []

    def add(poly: Polynomial, trace: list[str]) -> None:
        for c in found:
            if c.poly.degree() == poly.degree() and proportional(c.poly, poly, points):
                return
        found.append(Constraint(KIND_VERMA, poly, None, None, trace))

    def explore(H: MixedGraph, S: list[list], depth: int, trace: list[str]) -> None:
        for A in ancestral_sets(H, cap):
            keep = sorted(A)
            sub = induced_subgraph(H, A) if len(keep) < H.n else H
            S_A = [[S[a][b] for b in keep] for a in keep]
            step = trace + [f"ancestral {{{','.join(sub.labels)}}}"]
            dec = mixed_components(sub)
            whole = len(dec.components) == 1
            for comp in dec.components:
                # a single component has tau equal to the identity
                T = S_A if whole else tau_symbolic(sub, comp, S_A, size_guard)
                cg = comp.graph
                ctrace = step + [f"component {{{','.join(sub.label_list(comp.block))}}}"]
                for a in range(cg.n):
                    for b in range(a + 1, cg.n):
                        if _has_trek(cg, a, b):
                            continue
                        num = T[a][b].reduced().numerator()
                        if num.is_zero():
                            continue
                        _, prim = num.normalized()
                        add(prim, ctrace + [f"entry ({cg.labels[a]},{cg.labels[b]})"])
                if depth > 1 and cg.n < sub.n:
                    explore(cg, T, depth - 1, ctrace)

    explore(G, [[RationalFunction(x) for x in row] for row in symbolic_sigma(G.n)], max_depth, [])
    return found


def dedupe(constraints: Iterable[Constraint], n: int, seed: int = 0) -> list[Constraint]:
    """Drop constraints proportional to an earlier one."""
    points = _sigma_points(n, 10, seed)
    out: list[Constraint] = []
    for c in constraints:
        if any(d.poly.degree() == c.poly.degree() and proportional(d.poly, c.poly, points) for d in out):
            continue
        out.append(c)
    return out


def all_constraints(G: MixedGraph, max_cond: Optional[int] = None, max_minor_size: int = 2,
                    max_depth: int = 2, seed: int = 0) -> list[Constraint]:
    """CI minors, trek-separation minors and (acyclic graphs) the recursion,
    deduplicated in that order."""
    cs = ci_constraints(G, max_cond) + minor_constraints(G, max_minor_size)
    if G.is_acyclic:
        cs += verma_constraints(G, max_depth, seed=seed)
    return dedupe(cs, G.n, seed)


def off_model_matrix(n: int, rng: random.Random) -> list[list[Fraction]]:
    """Exact rational A A^T + I, positive definite and generically off any
    proper model."""
    A = [[random_fraction(rng, -3, 3, 4, nonzero=False) for _ in range(n)] for _ in range(n)]
    return [[sum((A[i][k] * A[j][k] for k in range(n)), Fraction(0)) + int(i == j) for j in range(n)]
            for i in range(n)]


def certify_constraint(G: MixedGraph, c: Constraint, trials: int = 20, off_trials: int = 5,
                       seed: int = 0, rtol: float = 1e-8) -> Certification:
    """Vanishing at ``trials`` float model points relative to the sum of
    absolute term values, and exact non-vanishing at ``off_trials``
    rational positive definite matrices."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        p = sample_params(G, rng)
        S = phi_numeric(p.lam, p.omega)
        a = sigma_assignment(S.tolist())
        scale = c.poly.abs_term_sum(a)
        rel = abs(c.poly.eval_float(a)) / scale if scale > 0 else 0.0
        worst = max(worst, rel)
    xrng = random.Random(seed)
    nonzero = 0
    for _ in range(off_trials):
        M = off_model_matrix(G.n, xrng)
        if c.poly.eval(sigma_assignment(M)) != 0:
            nonzero += 1
    ok = worst <= rtol and nonzero == off_trials
    cert = Certification(trials, worst, off_trials, nonzero, ok)
    c.certification = cert
    return cert


def certify_all(G: MixedGraph, constraints: Iterable[Constraint], trials: int = 20, seed: int = 0,
                threads: int = 1) -> list[Certification]:
    cs = list(constraints)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(lambda c: certify_constraint(G, c, trials, seed=seed), cs))
    return [certify_constraint(G, c, trials, seed=seed) for c in cs]


__all__ = [
    "Constraint", "Certification", "ci_constraints", "minor_constraints", "verma_constraints",
    "all_constraints", "dedupe", "certify_constraint", "certify_all", "minor_polynomial",
    "off_model_matrix", "KIND_CI", "KIND_MINOR", "KIND_VERMA",
]
