"""Acceptance criteria 1-11 at their stated tolerances.

Each test records one PASS/FAIL line; the lines are printed together in
the terminal summary (see ``conftest.pytest_terminal_summary``).
"""

from __future__ import annotations

import random
import time
from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest

from conftest import DATA, GOLDEN, load
from linsem.algebra import (
    RationalFunction,
    parse_polynomial,
    proportional,
    sigma,
    sigma_assignment,
)
from linsem.cas import emit_cas_script
from linsem.cli import main as cli_main
from linsem.constraints import all_constraints, certify_constraint, minor_polynomial
from linsem.decomposition import mixed_components, project_component, tian_tau_all
from linsem.graph import MixedGraph, parse_graph, random_mixed_graph, remove_sinks
from linsem.identifiability import (
    brute_force_witness,
    fiber_degree_estimate,
    global_id,
    htc_identifiable,
    identify,
    is_unique_sink_witness,
    recover_lambda,
    verify_htc_certificate,
)
from linsem.numerics import phi_numeric, sample_params
from linsem.parametrization import phi_exact, phi_symbolic, sample_exact
from linsem.separation import GenericRankOracle, d_separated, trek_separation_rank

RESULTS: dict[int, tuple[bool, str]] = {}


def record(number: int, ok: bool, detail: str) -> None:
    RESULTS[number] = (ok, detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _sigma_points(n: int, count: int, seed: int) -> list[dict]:
    rng = random.Random(seed)
    return [{sigma(a, b): Fraction(rng.randint(-20, 20), rng.randint(1, 7)) for a in range(n) for b in range(a, n)}
            for _ in range(count)]


# 1 -----------------------------------------------------------------------------


def test_criterion_01_trek_rule(capsys):
    cli_main(["parametrize", str(DATA / "verma.graph"), "--entry", "2,4"])
    line = capsys.readouterr().out.strip()
    lhs, _, rhs = line.partition(" = ")
    expected = parse_polynomial("l12*l13*l34*w11 + l12^2*l23*l34*w11 + l23*l34*w22 + w24")
    ok = lhs == "Sigma[2,4]" and parse_polynomial(rhs) == expected
    record(1, ok, f"parametrize verma --entry 2,4 -> {rhs}")


# 2 -----------------------------------------------------------------------------


def test_criterion_02_cyclic_rational():
    G = load("cyclic")
    num = parse_polynomial(
        "l12^2*l23*l34*w11 + l12*l13*l34*w11*(l23*l34*l42 + 1) + l13^2*l34^2*l42*w11"
        " + l23*l34*w22 + l34^2*l42*w33 + 2*l34*l42*w34 + l42*w44")
    den = parse_polynomial("1 - l23*l34*l42")
    expected = RationalFunction(num, {den: 2})
    ours = phi_symbolic(G)[1, 3]
    d_ours = ours.reduced().denominator()
    ok = ours.equals(expected) and d_ours in (den ** 2, -(den ** 2))
    record(2, ok, f"phi_24 = ({ours.to_str(4)})")


# 3 -----------------------------------------------------------------------------


def test_criterion_03_iv_identification():
    G = load("iv")
    worst = 0.0
    for seed in range(20):
        p = sample_params(G, seed)
        S = phi_numeric(p.lam, p.omega)
        L = recover_lambda(G, S, htc_identifiable(G).certificate)
        worst = max(worst, abs(L[1, 2] - S[0, 2] / S[0, 1]))
    record(3, worst < 1e-10, f"max |lambda23_hat - s13/s12| over 20 draws = {worst:.2e}")


# 4 -----------------------------------------------------------------------------


def _all_graphs(n: int):
    labels = tuple(str(k + 1) for k in range(n))
    pairs = list(combinations(range(n), 2))
    for choice in product(range(8), repeat=len(pairs)):
        d, b = set(), set()
        for (i, j), c in zip(pairs, choice):
            if c & 1:
                d.add((i, j))
            if c & 2:
                d.add((j, i))
            if c & 4:
                b.add((i, j))
        yield MixedGraph(labels, frozenset(d), frozenset(b))


def _brute_verdict(G: MixedGraph) -> bool:
    """Injective iff acyclic, simple and no induced subgraph is a
    unique-sink witness (exhaustive search)."""
    return G.is_acyclic and G.is_simple and brute_force_witness(G) is None


def test_criterion_04_global_identifiability():
    start = time.perf_counter()
    a = global_id(load("noninj_a"))
    Gb = load("noninj_b")
    b = global_id(Gb)
    golden_ok = a.injective and not b.injective and is_unique_sink_witness(Gb, b.witness)
    mismatches = checked = substantive = 0
    for n in range(1, 5):
        for G in _all_graphs(n):
            v = global_id(G)
            checked += 1
            substantive += G.is_acyclic and G.is_simple
            if v.injective != _brute_verdict(G) or (v.witness is not None and G.is_acyclic and G.is_simple
                                                    and not is_unique_sink_witness(G, v.witness)):
                mismatches += 1
    rng = random.Random(2024)
    for _ in range(1000):
        G = random_mixed_graph(rng, rng.randint(5, 6), rng.choice([0.2, 0.35, 0.5]), rng.choice([0.15, 0.3, 0.45]),
                               acyclic=rng.random() < 0.85, simple=rng.random() < 0.85)
        checked += 1
        substantive += G.is_acyclic and G.is_simple
        if global_id(G).injective != _brute_verdict(G):
            mismatches += 1
    elapsed = time.perf_counter() - start
    ok = golden_ok and mismatches == 0 and elapsed <= 300
    record(4, ok, f"example (a) injective={a.injective}, (b) witness {Gb.label_list(b.witness)}; "
                  f"{checked} graphs ({substantive} acyclic simple), {mismatches} mismatches, {elapsed:.0f}s")


# 5 -----------------------------------------------------------------------------


def test_criterion_05_htc_goldens():
    G = load("htc_id")
    res = htc_identifiable(G)
    reference_y = {"1": ["2", "5"], "2": ["5"], "3": [], "4": [], "5": ["3"]}
    reference_order = ["3", "4", "5", "1", "2"]
    example_ok = res.sufficient and verify_htc_certificate(G, reference_y, reference_order) and \
        verify_htc_certificate(G, res.certificate.y_sets, reference_order)
    a = htc_identifiable(load("htc_gap_a"))
    gap_a_ok = a.necessary is True and not a.sufficient
    B = load("htc_gap_b")
    rep = identify(B)
    comps_fail = all(not c.htc.sufficient for c in rep.components)
    trimmed_fail = not htc_identifiable(remove_sinks(B)).sufficient
    gap_b_ok = not rep.htc.sufficient and comps_fail and trimmed_fail and len(rep.nodewise) < B.n
    note = (f"gap (b): sufficient fails on G, on all {len(rep.components)} components, after sink removal "
            f"and on the ancestral subgraphs (nodes solved: {B.label_list(sorted(rep.nodewise))}); status {rep.status}")
    record(5, example_ok and gap_a_ok and gap_b_ok,
           f"illustration certified, reference Y-sets verified under 3<4<5<1<2; gap (a) necessary={a.necessary}, "
           f"sufficient={a.sufficient}; {note}")


# 6 -----------------------------------------------------------------------------


def test_criterion_06_degree_estimates():
    start = time.perf_counter()
    cyc = fiber_degree_estimate(load("cycle3"), trials=20, starts=200, seed=0)
    share2 = cyc.counts.count(2) / cyc.trials
    rng = random.Random(6)
    simple_ok = True
    for _ in range(5):
        G = random_mixed_graph(rng, rng.randint(3, 5), 0.4, 0.2, acyclic=True, simple=True)
        simple_ok &= fiber_degree_estimate(G, trials=5, starts=200, seed=rng.randint(0, 10**6)).estimate == 1
    gap = fiber_degree_estimate(load("htc_gap_a"), trials=200, starts=200, seed=0)
    share3 = gap.counts.count(3) / gap.trials
    elapsed = time.perf_counter() - start
    ok = share2 >= 0.95 and simple_ok and gap.estimate in (1, 3) and share3 >= 0.30 and elapsed <= 120
    record(6, ok, f"3-cycle count 2 in {share2:.0%} of 20 trials; random simple acyclic estimate 1: {simple_ok}; "
                  f"htc-gap (a) mode {gap.estimate}, counts {gap.distribution}, 3 in {share3:.1%}; {elapsed:.0f}s")


# 7 -----------------------------------------------------------------------------


def test_criterion_07_decomposition_diagram():
    rng = random.Random(7)
    worst = 0.0
    cyclic = 0
    for _ in range(20):
        G = random_mixed_graph(rng, rng.randint(3, 8), 0.3, 0.25, acyclic=rng.random() < 0.5)
        cyclic += not G.is_acyclic
        dec = mixed_components(G)
        for k in range(100):
            p = sample_params(G, rng.randint(0, 2**31))
            S = phi_numeric(p.lam, p.omega)
            for comp, T in zip(dec.components, tian_tau_all(G, S, dec)):
                q = project_component(p, comp)
                worst = max(worst, float(np.abs(T - phi_numeric(q.lam, q.omega)).max()))
    G = load("decomp")
    dec = mixed_components(G)
    example_ok = [G.label_list(b) for b in dec.blocks] == [["1", "4"], ["2", "3", "5"]] and \
        dec.components[0].graph == parse_graph("nodes: 1 2 3 4\n2 -> 4\n3 -> 4\n1 <-> 4\n") and \
        dec.components[1].graph == parse_graph(
            "nodes: 1 2 3 4 5\n1 -> 2\n1 -> 3\n2 -> 3\n3 -> 2\n2 -> 5\n4 -> 5\n2 <-> 5\n")
    record(7, worst < 1e-8 and example_ok and 0 < cyclic < 20,
           f"max deviation {worst:.2e} over 20 graphs ({cyclic} cyclic) x 100 points; example components exact")


# 8 -----------------------------------------------------------------------------


def _subsets(nodes):
    return [c for k in range(1, len(nodes) + 1) for c in combinations(nodes, k)]


def _rank_mismatches(G, nodes) -> tuple[int, int]:
    oracle = GenericRankOracle(G)
    subs = _subsets(nodes)
    bad = 0
    for A in subs:
        for C in subs:
            if trek_separation_rank(G, A, C).rank != oracle.rank(A, C):
                bad += 1
    return bad, len(subs) ** 2


def test_criterion_08_trek_separation():
    start = time.perf_counter()
    bad = pairs = 0
    for name in ("twoivs", "verma"):
        G = load(name)
        b, p = _rank_mismatches(G, list(G.nodes))
        bad, pairs = bad + b, pairs + p
    spider = load("spider")
    b, p = _rank_mismatches(spider, [spider.node(str(k)) for k in range(1, 8)])
    bad, pairs = bad + b, pairs + p
    rng = random.Random(8)
    for _ in range(200):
        G = random_mixed_graph(rng, rng.randint(2, 6), 0.35, 0.25, acyclic=rng.random() < 0.6)
        b, p = _rank_mismatches(G, list(G.nodes))
        bad, pairs = bad + b, pairs + p
    spider_rank = trek_separation_rank(spider, ["1", "2", "3", "4"], ["5", "6", "7"]).rank
    twoivs_rank = trek_separation_rank(load("twoivs"), ["1", "2"], ["3", "4"]).rank
    record(8, bad == 0 and spider_rank == 2 and twoivs_rank == 1,
           f"{pairs} (A,C) pairs, {bad} mismatches; spider rank {spider_rank}, two-instruments rank {twoivs_rank}; "
           f"{time.perf_counter() - start:.0f}s")


# 9 -----------------------------------------------------------------------------


def test_criterion_09_constraints():
    f1 = parse_polynomial("s12*s13 - s11*s23")
    f2 = parse_polynomial("s14*s23^2 - s13*s23*s24 - s14*s22*s33 + s12*s24*s33 + s13*s22*s34 - s12*s23*s34")
    fv = parse_polynomial("s11*s13*s22*s34 - s11*s13*s23*s24 - s11*s14*s22*s33 + s11*s14*s23^2"
                          " - s12^2*s13*s34 + s12^2*s14*s33 + s12*s13^2*s24 - s12*s13*s14*s23")
    sink_ci = parse_polynomial("s12*s15 - s11*s25")
    pts4, pts5 = _sigma_points(4, 10, 1), _sigma_points(5, 10, 2)

    def has(cs, f, exact, pts):
        for c in cs:
            if (exact and (c.poly == f or c.poly == -f)) or (not exact and proportional(c.poly, f, pts)):
                return c
        return None

    dag, verma, sink = load("dag"), load("verma"), load("sink5")
    c_dag, c_verma, c_sink = all_constraints(dag), all_constraints(verma), all_constraints(sink)
    hits = [(dag, has(c_dag, f1, True, pts4)), (dag, has(c_dag, f2, True, pts4)),
            (verma, has(c_verma, fv, False, pts4)),
            (sink, has(c_sink, sink_ci, True, pts5)), (sink, has(c_sink, fv, False, pts5))]
    found = all(c is not None for _, c in hits)
    certified = found and all(certify_constraint(G, c).certified for G, c in hits)
    record(9, found and certified, f"f1, f2, f_Verma and the sink-graph pair found: {found}; all certified: {certified}")


# 10 ----------------------------------------------------------------------------


def test_criterion_10_dsep_determinants():
    rng = random.Random(10)
    sep = conn = fail = 0
    worst = 0.0
    for _ in range(10):
        G = random_mixed_graph(rng, rng.randint(3, 6), 0.35, 0.25, acyclic=True)
        pts = []
        for _ in range(50):
            p = sample_params(G, rng.randint(0, 2**31))
            pts.append(sigma_assignment(phi_numeric(p.lam, p.omega).tolist()))
        exact = sigma_assignment(phi_exact(G, sample_exact(G, rng)))
        for i, j in combinations(G.nodes, 2):
            rest = [v for v in G.nodes if v not in (i, j)]
            for S in _subsets(rest) + [()]:
                f = minor_polynomial((i, *S), (j, *S))
                if d_separated(G, i, j, S):
                    sep += 1
                    for a in pts:
                        rel = abs(f.eval_float(a)) / max(f.abs_term_sum(a), 1e-300)
                        worst = max(worst, rel)
                        fail += rel >= 1e-9
                else:
                    conn += 1
                    fail += f.eval(exact) == 0
    record(10, fail == 0, f"{sep} separation statements (max relative minor {worst:.1e}), "
                          f"{conn} connection statements nonzero at exact points; {fail} failures")


# 11 ----------------------------------------------------------------------------


def test_criterion_11_cas_goldens():
    a = emit_cas_script(load("cycle3"), "identifiability", "singular").text.encode()
    b = emit_cas_script(load("dag"), "vanishing-ideal", "m2").text.encode()
    ok = a == (GOLDEN / "cycle3_identifiability.sing").read_bytes() and \
        b == (GOLDEN / "dag_vanishing_ideal.m2").read_bytes()
    record(11, ok, "3-cycle Singular identifiability and acyclic digraph Macaulay2 vanishing ideal match goldens")
