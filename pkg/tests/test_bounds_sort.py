import itertools

import pytest

from qarray.bounds import (
    BoundsResult,
    build_bounds,
    build_compare_flags,
    build_span_flags,
    classical_bounds,
    decode_bounds,
)
from qarray.errors import InconsistentStateError, QArrayError
from qarray.gadgets import QuantumInt
from qarray.poly import Polynomial, Role, VariableRegistry
from qarray.program import ArraySpec
from qarray.solver import eliminate_ground_states, enumerate_ground_states
from qarray.sort import (
    build_sort,
    decode_permutation,
    h_assign,
    h_assign_cubic,
    h_mapping,
    h_ordering,
)

from conftest import brute_force, multiplicity_factorial_product


def all_vars(p):
    return range(len(p.registry))


# -- bounds --------------------------------------------------------------------


@pytest.mark.parametrize("x, want", [(5, (0, 0, 1)), (0, (1, 1, 1)), (12, (0, 0, 0))])
def test_compare_flags(x, want):
    reg = VariableRegistry()
    A = ArraySpec.allocate(reg, 3, 4, values=[1, 4, 9])
    xq = QuantumInt.allocate(reg, "x", 4)
    g = build_compare_flags(A, xq, reg)
    h = sum((f.hamiltonian for f in g), Polynomial.zero())
    r = eliminate_ground_states(h, {**A.clamp(), **xq.clamp(x)})
    assert r.ground_energy == 0
    assert {tuple(a[f.output] for f in g) for a in r.ground_states} == {want}


@pytest.mark.parametrize("C, spans", [((0, 0, 1), (0, 1)), ((1, 1, 1), (0, 0)), ((0, 0, 0), (0, 0))])
def test_span_flags(C, spans):
    reg = VariableRegistry()
    cv = [reg.fresh_var(f"C{i}", Role.DERIVED) for i in range(3)]
    g = build_span_flags(cv, reg)
    h = sum((s.hamiltonian for s in g), Polynomial.zero())
    e, states = brute_force(h, None, dict(zip(cv, C)))
    assert e == 0 and {tuple(a[s.output] for s in g) for a in states} == {spans}


def test_span_flags_need_two():
    reg = VariableRegistry()
    with pytest.raises(QArrayError):
        build_span_flags([reg.fresh_var("C0", Role.DERIVED)], reg)


def test_decode_bounds_cases():
    table = {"C": [0, 1, 2], "span": [3, 4]}
    assert decode_bounds({0: 0, 1: 0, 2: 1, 3: 0, 4: 1}, table) == BoundsResult("in_span", 1)
    assert decode_bounds({0: 1, 1: 1, 2: 1, 3: 0, 4: 0}, table) == BoundsResult("below_range")
    assert decode_bounds({0: 0, 1: 0, 2: 0, 3: 0, 4: 0}, table) == BoundsResult("above_range")
    with pytest.raises(InconsistentStateError):
        decode_bounds({0: 0, 1: 1, 2: 1, 3: 1, 4: 1}, table)
    with pytest.raises(InconsistentStateError):
        decode_bounds({0: 0, 1: 1, 2: 1, 3: 0, 4: 0}, table)


@pytest.mark.parametrize("values", [[2], [1, 4, 9], [0, 3, 5, 6]])
def test_bounds_program_matches_scan(values):
    for x in range(10 if max(values) > 7 else 8):
        width = 4 if max(values) > 7 else 3
        p = build_bounds(len(values), width, values, x)
        r = eliminate_ground_states(p.qubo, p.clamp, variables=all_vars(p))
        assert r.ground_energy == 0
        assert {decode_bounds(a, p) for a in r.ground_states} == {classical_bounds(values, x)}


def test_eliminator_agrees_with_enumeration_on_bounds():
    p = build_bounds(2, 2, [1, 2], 2)
    free = [v for v in all_vars(p) if v not in p.clamp]
    a = enumerate_ground_states(p.qubo, p.clamp, variables=free)
    b = eliminate_ground_states(p.qubo, p.clamp, variables=free)
    assert (a.ground_energy, a.ground_count) == (b.ground_energy, b.ground_count)
    assert a.ground_states == b.ground_states


# -- sort ----------------------------------------------------------------------


def mapping(n):
    reg = VariableRegistry()
    return reg, [[reg.fresh_var(f"M{i}{j}", Role.INPUT) for j in range(n)] for i in range(n)]


@pytest.mark.parametrize("cells, energy", [({(0, 0), (1, 1)}, 0), (set(), 4), ({(0, 0), (0, 1)}, 2)])
def test_h_mapping(cells, energy):
    _, M = mapping(2)
    a = {M[i][j]: int((i, j) in cells) for i in range(2) for j in range(2)}
    assert h_mapping(M).evaluate(a) == energy


def test_h_mapping_non_square():
    with pytest.raises(QArrayError):
        h_mapping([[0, 1], [2]])


def test_h_assign_matches_cubic_after_minimising_ancillas():
    reg, M = mapping(2)
    A = ArraySpec.allocate(reg, 2, 1, "A")
    B = ArraySpec.allocate(reg, 2, 1, "B")
    h, grid, ledger = h_assign(M, A, B, reg)
    assert len(ledger) == 4 and h.degree == 2
    cubic = h_assign_cubic(M, A, B)
    anc = [e.ancilla for e in ledger]
    base = [v for v in range(len(reg)) if v not in anc]
    for bits in itertools.product((0, 1), repeat=len(base)):
        clamp = dict(zip(base, bits))
        e, _ = brute_force(h, anc, clamp)
        assert e == cubic.evaluate(clamp)


def test_h_assign_bit_mismatch_costs_one():
    reg, M = mapping(1)
    A = ArraySpec.allocate(reg, 1, 1, "A")
    B = ArraySpec.allocate(reg, 1, 1, "B")
    cubic = h_assign_cubic(M, A, B)
    assert cubic.evaluate({M[0][0]: 1, A[0].bits[0]: 1, B[0].bits[0]: 0}) == 1
    assert cubic.evaluate({M[0][0]: 0, A[0].bits[0]: 1, B[0].bits[0]: 0}) == 0


@pytest.mark.parametrize("values, zero", [([1, 2, 3], True), ([2, 1], False), ([2, 2], True)])
def test_h_ordering(values, zero):
    reg = VariableRegistry()
    B = ArraySpec.allocate(reg, len(values), 2, "B", values)
    h, _ = h_ordering(B, reg)
    r = enumerate_ground_states(h, B.clamp())
    assert (r.ground_energy == 0) == zero
    if not zero:
        assert r.ground_energy >= 1


def test_h_ordering_needs_two():
    reg = VariableRegistry()
    with pytest.raises(QArrayError):
        h_ordering(ArraySpec.allocate(reg, 1, 2, "B"), reg)


@pytest.mark.parametrize("values, perms", [([1, 0], [[1, 0]]), ([0, 0], [[0, 1], [1, 0]]),
                                           ([0, 1], [[0, 1]])])
def test_sort_small(values, perms):
    p = build_sort(2, 1, values)
    r = enumerate_ground_states(p.qubo, p.clamp, variables=all_vars(p))
    dec = [decode_permutation(a, p) for a in r.ground_states]
    assert r.ground_energy == 0
    assert sorted(d.perm for d in dec) == perms
    assert all(d.dest == sorted(values) for d in dec)
    assert r.ground_count == multiplicity_factorial_product(values)


def test_sort_weights_and_copy_count():
    p = build_sort(2, 1)
    assert p.weights == {"mapping": 570, "copy": 10, "ordering": 1}
    assert sum(len(cell) for row in p.copy_ancillas for cell in row) == 4


def test_decode_permutation_rejects_empty_column():
    table = {"M": [[0, 1], [2, 3]], "A": [[4], [5]], "B": [[6], [7]]}
    a = {0: 1, 1: 0, 2: 0, 3: 0, 4: 0, 5: 0, 6: 0, 7: 0}
    with pytest.raises(InconsistentStateError):
        decode_permutation(a, table)
    a.update({0: 0, 1: 1, 2: 1})
    assert decode_permutation(a, table).perm == [1, 0]
