import pytest

from conftest import GOLDEN, load
from linsem.cas import DIALECTS, TASKS, emit_cas_script
from linsem.graph import parse_graph


def test_three_cycle_singular_golden():
    text = emit_cas_script(load("cycle3"), "identifiability", "singular").text
    assert text == (GOLDEN / "cycle3_identifiability.sing").read_text()


def test_acyclic_digraph_m2_golden():
    text = emit_cas_script(load("dag"), "vanishing-ideal", "m2").text
    assert text == (GOLDEN / "dag_vanishing_ideal.m2").read_text()


def test_leading_terms_singular_three_cycle():
    text = emit_cas_script(load("cycle3"), "leading-terms", "singular").text
    assert "ring R = 0,(l12,l23,l31,s11,s12,s13,s22,s23,s33),(dp(3),dp(6));" in text
    assert text.rstrip().endswith("ideal GB = sat(ideal(W[1,2],W[1,3],W[2,3]), det(L))[1]; GB;")


@pytest.mark.parametrize("task", TASKS)
@pytest.mark.parametrize("dialect", DIALECTS)
def test_every_task_and_dialect_is_stable(task, dialect):
    G = load("cyclic")
    a = emit_cas_script(G, task, dialect)
    assert a.text == emit_cas_script(G, task, dialect).text
    assert a.text.endswith("\n")
    if task != "identifiability":
        assert ("saturate" in a.text) or ("sat(" in a.text)


def test_bidirected_pairs_are_not_equations():
    text = emit_cas_script(load("iv"), "identifiability", "singular").text
    assert "W[2,3]" not in text
    assert "ideal(W[1,2],W[1,3])" in text


def test_edgeless_graph():
    G = parse_graph("nodes: 1 2\n1 <-> 2\n")
    assert emit_cas_script(G, "identifiability", "m2").text.startswith("--")
    assert "I = ideal(0_R);" in emit_cas_script(G, "vanishing-ideal", "m2").text


def test_unknown_task():
    with pytest.raises(ValueError):
        emit_cas_script(load("iv"), "groebner", "singular")
    with pytest.raises(ValueError):
        emit_cas_script(load("iv"), "identifiability", "maple")
