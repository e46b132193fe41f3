import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load, mixed_graphs
from linsem.algebra import lam, omega, parse_polynomial
from linsem.numerics import phi_numeric, sample_params
from linsem.parametrization import (
    list_treks,
    phi_exact,
    phi_symbolic,
    recover_omega,
    sample_exact,
    trek_monomial,
    trek_rule_entry,
)


def _sympy_phi(G):
    """Independent oracle: symbolic inverse of I - Lambda in sympy."""
    n = G.n
    L = sympy.zeros(n, n)
    for t, h in G.directed:
        L[t, h] = sympy.Symbol(lam(t, h).name(n))
    O = sympy.zeros(n, n)
    for i in range(n):
        O[i, i] = sympy.Symbol(omega(i, i).name(n))
    for i, j in G.bidirected:
        O[i, j] = O[j, i] = sympy.Symbol(omega(i, j).name(n))
    P = (sympy.eye(n) - L).inv()
    return P.T * O * P


def _assignment(p, n):
    a = {}
    for i in range(n):
        for j in range(n):
            a[lam(i, j)] = p.lam[i, j]
            if i <= j:
                a[omega(i, j)] = p.omega[i, j]
    return a


def test_verma_entry_24_has_four_treks():
    G = load("verma")
    ts = list_treks(G, "2", "4")
    assert len(ts) == 4
    total = sum((trek_monomial(t) for t in ts), parse_polynomial("0"))
    assert total == parse_polynomial("l12*l13*l34*w11 + l12^2*l23*l34*w11 + l23*l34*w22 + w24")
    assert trek_rule_entry(G, "2", "4") == total


def test_trek_strings():
    G = load("iv")
    shown = [t.to_str(G) for t in list_treks(G, "2", "3")]
    assert len(shown) == 3
    assert all(s.startswith("2") and s.endswith("3") for s in shown)


@settings(max_examples=25, deadline=None)
@given(mixed_graphs(max_nodes=4, acyclic=True))
def test_trek_rule_matches_sympy_inverse(G):
    S = phi_symbolic(G)
    ref = _sympy_phi(G)
    for i in range(G.n):
        for j in range(i, G.n):
            assert trek_rule_entry(G, i, j) == S[i, j]
            assert sympy.expand(sympy.sympify(S.entry_str(i, j)) - ref[i, j]) == 0


@settings(max_examples=30, deadline=None)
@given(mixed_graphs(max_nodes=5), st.integers(0, 500))
def test_symbolic_evaluates_to_numeric(G, seed):
    p = sample_params(G, seed)
    S = phi_numeric(p.lam, p.omega)
    sym = phi_symbolic(G)
    a = _assignment(p, G.n)
    for i in range(G.n):
        for j in range(i, G.n):
            e = sym[i, j]
            val = e.num.eval_float(a) / e.denominator().eval_float(a) if sym.rational else e.eval_float(a)
            assert val == pytest.approx(S[i, j], rel=1e-9, abs=1e-9)


def test_cyclic_entry_is_rational_with_squared_cycle_denominator():
    G = load("cyclic")
    sym = phi_symbolic(G)
    assert sym.rational
    e = sym[1, 3]
    assert e.denominator() == parse_polynomial("1 - l23*l34*l42") ** 2 or \
        e.denominator() == parse_polynomial("l23*l34*l42 - 1") ** 2


def test_cyclic_trek_series_converges_to_phi():
    G = load("cyclic")
    p = sample_params(G, 2, scale=0.4)
    S = phi_numeric(p.lam, p.omega)
    a = _assignment(p, G.n)
    approx = sum(trek_monomial(t).eval_float(a) for t in list_treks(G, "2", "4", max_edges=40))
    assert approx == pytest.approx(S[1, 3], rel=1e-6)


def test_cyclic_trek_listing_requires_bound():
    with pytest.raises(ValueError):
        list_treks(load("cycle3"), "1", "2")
    with pytest.raises(ValueError):
        trek_rule_entry(load("cycle3"), "1", "2")


@settings(max_examples=30, deadline=None)
@given(mixed_graphs(max_nodes=5), st.integers(0, 10_000))
def test_exact_and_float_parametrizations_agree(G, seed):
    p = sample_exact(G, random.Random(seed))
    exact = phi_exact(G, p)
    fp = p.float_point()
    np.testing.assert_allclose(np.array(exact, dtype=float), phi_numeric(fp.lam, fp.omega), rtol=1e-9, atol=1e-12)
    assert all(isinstance(x, Fraction) for row in exact for x in row)


@settings(max_examples=30, deadline=None)
@given(mixed_graphs(max_nodes=6), st.integers(0, 500))
def test_recover_omega_inverts_phi(G, seed):
    p = sample_params(G, seed)
    S = phi_numeric(p.lam, p.omega)
    Om, resid = recover_omega(G, p.lam, S)
    np.testing.assert_allclose(Om, p.omega, atol=1e-9)
    assert resid < 1e-9
