from fractions import Fraction

import pytest

from qarray.errors import QArrayError, WidthMismatchError
from qarray.gadgets import QuantumInt
from qarray.poly import Polynomial, Role, VariableRegistry
from qarray.program import ArraySpec, index_width
from qarray.search import (
    Predicate,
    build_array_assign,
    build_index_matchers,
    build_predicate_matchers,
    build_search,
    build_value_matchers,
    h_count_matches,
    h_search_basic,
    h_search_or_variant,
    h_search_with_failure,
)
from qarray.solver import enumerate_ground_states, eliminate_ground_states

from conftest import brute_force


def flags(n):
    reg = VariableRegistry()
    I = [reg.fresh_var(f"I{i}", Role.DERIVED) for i in range(n)]
    V = [reg.fresh_var(f"V{i}", Role.DERIVED) for i in range(n)]
    return reg, I, V


def solve(program):
    r = eliminate_ground_states(program.qubo, program.clamp, cap=4096,
                                variables=range(len(program.registry)))
    return r, [program.decode(a) for a in r.ground_states]


def gadget_grounds(gadgets, clamp):
    h = sum((g.hamiltonian for g in gadgets), Polynomial.zero())
    return brute_force(h, None, clamp)


@pytest.mark.parametrize("n, expected", [(1, 1), (2, 1), (3, 2), (4, 2), (5, 3), (100, 7)])
def test_index_width(n, expected):
    assert index_width(n) == expected


def test_index_matchers_one_hot():
    reg = VariableRegistry()
    idx = QuantumInt.allocate(reg, "n", 2)
    g = build_index_matchers(idx, 4, reg)
    e, states = gadget_grounds(g, idx.clamp(2))
    assert e == 0
    assert {tuple(a[m.output] for m in g) for a in states} == {(0, 0, 1, 0)}


def test_index_matchers_out_of_range():
    reg = VariableRegistry()
    idx = QuantumInt.allocate(reg, "n", 2)
    g = build_index_matchers(idx, 3, reg)
    _, states = gadget_grounds(g, idx.clamp(3))
    assert {tuple(a[m.output] for m in g) for a in states} == {(0, 0, 0)}


def test_index_matchers_too_narrow():
    reg = VariableRegistry()
    idx = QuantumInt.allocate(reg, "n", 1)
    with pytest.raises(QArrayError):
        build_index_matchers(idx, 3, reg)


@pytest.mark.parametrize("values, x, want", [([5, 2, 7], 2, (0, 1, 0)), ([5, 2, 5], 5, (1, 0, 1))])
def test_value_matchers(values, x, want):
    reg = VariableRegistry()
    A = ArraySpec.allocate(reg, 3, 3, values=values)
    xq = QuantumInt.allocate(reg, "x", 3)
    g = build_value_matchers(A, xq, reg)
    clamp = {**A.clamp(), **xq.clamp(x)}
    r = enumerate_ground_states(sum((m.hamiltonian for m in g), Polynomial.zero()), clamp)
    assert r.ground_energy == 0
    assert {tuple(a[m.output] for m in g) for a in r.ground_states} == {want}


def test_value_matchers_width_mismatch():
    reg = VariableRegistry()
    A = ArraySpec.allocate(reg, 2, 3)
    with pytest.raises(WidthMismatchError):
        build_value_matchers(A, QuantumInt.allocate(reg, "x", 2), reg)


@pytest.mark.parametrize("products, energy", [(0, 1), (1, 0), (2, 1), (3, 4)])
def test_basic_term(products, energy):
    reg, I, V = flags(3)
    h = h_search_basic(I, V)
    a = {v: 1 for v in V}
    a.update({v: int(k < products) for k, v in enumerate(I)})
    assert h.evaluate(a) == energy


@pytest.mark.parametrize("product, nf, energy", [(1, 0, 0), (0, 1, Fraction(1, 2)),
                                                 (1, 1, Fraction(3, 2)), (0, 0, 1)])
def test_failure_term(product, nf, energy):
    reg, I, V = flags(2)
    h, nfv = h_search_with_failure(I, V, reg)
    a = {I[0]: product, V[0]: 1, I[1]: 0, V[1]: 1, nfv: nf}
    assert h.evaluate(a) == energy


def test_length_mismatch():
    reg, I, V = flags(2)
    with pytest.raises(QArrayError):
        h_search_basic(I, V[:1])


@pytest.mark.parametrize("z_on, found, nf, energy", [(True, 1, 0, 0), (False, 0, 1, Fraction(1, 2))])
def test_or_variant_term(z_on, found, nf, energy):
    reg, I, V = flags(3)
    res = h_search_or_variant(I, V, reg)
    clamp = {v: 0 for v in I + V}
    if z_on:
        clamp[I[1]] = clamp[V[1]] = 1
    h = res.hamiltonian + sum((g.hamiltonian.scale(2) for g in res.gadgets), Polynomial.zero())
    e, states = brute_force(h, None, clamp)
    assert e == energy
    assert {(a[res.found], a[res.not_found]) for a in states} == {(found, nf)}


def test_search_program_decodes_match():
    p = build_search(2, 1, "summation", values=[0, 1], target=1)
    r, dec = solve(p)
    assert r.ground_energy == 0
    assert {(d["n"], d["not_found"], d["match_index"]) for d in dec} == {(1, 0, 1)}


def test_search_program_absent_target():
    p = build_search(3, 2, "logical_or", values=[0, 1, 2], target=3)
    r, dec = solve(p)
    assert r.ground_energy == Fraction(1, 2)
    assert all(d["not_found"] == 1 and d["match_index"] is None for d in dec)
    # the index register is unconstrained when nothing matches
    assert {d["n"] for d in dec} == {0, 1, 2, 3}


def test_count_variant():
    p = build_search(3, 3, "count", values=[5, 2, 5], target=5)
    r, dec = solve(p)
    assert r.ground_energy == 0 and {d["count"] for d in dec} == {2}
    p = build_search(3, 3, "count", values=[5, 2, 5], target=1)
    assert {d["count"] for d in solve(p)[1]} == {0}
    p = build_search(1, 2, "count", values=[3], target=3)
    assert {d["count"] for d in solve(p)[1]} == {1}


def test_count_too_narrow():
    reg, _, V = flags(4)
    with pytest.raises(QArrayError):
        h_count_matches(V, QuantumInt.allocate(reg, "c", 2))


def test_predicate_parse_and_holds():
    p = Predicate.parse("0:2>1 & 2:2==0")
    assert len(p.tests) == 2
    assert p.holds(0b0010) and not p.holds(0b0001) and not p.holds(0b0110)
    with pytest.raises(QArrayError):
        Predicate.parse("0:2 ~ 1")


@pytest.mark.parametrize("element, want", [(0b0010, 1), (0b0001, 0), (0b0110, 0), (0b0011, 1)])
def test_predicate_matchers(element, want):
    reg = VariableRegistry()
    A = ArraySpec.allocate(reg, 1, 4, values=[element])
    g = build_predicate_matchers(A, Predicate.parse("0:2>1 & 2:2==0"), reg)
    r = enumerate_ground_states(g[0].hamiltonian, A.clamp())
    assert r.ground_energy == 0
    assert {a[g[0].output] for a in r.ground_states} == {want}


def test_predicate_out_of_element():
    reg = VariableRegistry()
    A = ArraySpec.allocate(reg, 1, 4)
    with pytest.raises(QArrayError):
        build_predicate_matchers(A, Predicate.parse("3:2==0"), reg)


def test_predicate_search_program():
    p = build_search(3, 4, "summation", values=[1, 2, 7], predicate="0:2>1 & 2:2==0")
    r, dec = solve(p)
    assert r.ground_energy == 0 and {d["match_index"] for d in dec} == {1}


def test_assign_store_direction():
    p = build_array_assign(2, 1, target=1, index=1)
    free = [v for v in range(len(p.registry)) if v not in p.clamp]
    r = enumerate_ground_states(p.qubo, p.clamp, variables=free)
    dec = [p.decode(a) for a in r.ground_states]
    assert r.ground_energy == 0 and r.ground_count == 2
    assert {d["A"][1] for d in dec} == {1} and {d["A"][0] for d in dec} == {0, 1}


def test_assign_lookup_direction():
    p = build_array_assign(2, 1, values=[0, 1], target=1)
    r = enumerate_ground_states(p.qubo, p.clamp, variables=range(len(p.registry)))
    assert {p.decode(a)["n"] for a in r.ground_states} == {1}
