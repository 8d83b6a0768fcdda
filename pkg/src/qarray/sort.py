"""Sorting as a constrained mapping from an input array A to an output array B.

``M[i][j] = 1`` means ``B[j] := A[i]``.  Three blocks are combined:

* mapping:  every row and every column of ``M`` holds exactly one 1;
* copy:     ``sum M_ij * Hamming(A[i], B[j])`` with each cubic ``M*A*B``
            made quadratic through ``z = A[i]_l * B[j]_l``;
* ordering: ``B[j] <= B[j+1]`` for consecutive outputs.

The mapping and copy blocks are weighted so that breaking them always costs
more than anything the blocks below them could save.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InconsistentStateError, QArrayError
from .gadgets import GadgetResult, int_leq_gadget
from .poly import (
    Assignment,
    LedgerEntry,
    Polynomial,
    Role,
    VariableRegistry,
    linear,
    polysum,
    rosenberg_penalty,
)
from .program import PENALTY_FLOOR, ArraySpec, Program, compile_program, register_decoder


def h_mapping(M: Sequence[Sequence[int]]) -> Polynomial:
    n = len(M)
    if any(len(row) != n for row in M):
        raise QArrayError("mapping matrix must be square")
    cols = [(1 - linear({M[i][j]: 1 for i in range(n)})).square() for j in range(n)]
    rows = [(1 - linear({M[i][j]: 1 for j in range(n)})).square() for i in range(n)]
    return polysum(cols + rows)


def h_assign(M: Sequence[Sequence[int]], A: ArraySpec, B: ArraySpec,
             registry: VariableRegistry) -> tuple[Polynomial, list, list[LedgerEntry]]:
    """Conditional bitwise copy, already quadratic.

    Returns the polynomial, the ``[i][j][l]`` grid of copy ancillas and the
    substitution ledger.
    """
    n = len(M)
    if len(A) != n or len(B) != n or A.element_width != B.element_width:
        raise QArrayError("mapping, source and destination shapes disagree")
    kv = A.element_width
    parts = []
    grid = []
    ledger = []
    for i in range(n):
        row = []
        for j in range(n):
            m = M[i][j]
            cell = []
            for l in range(kv):
                a, b = A[i].bits[l], B[j].bits[l]
                z = registry.fresh_var(f"copy[{i}][{j}][{l}]", Role.ANCILLA, "copy")
                # the only term holding the pair (a, b) is -2*m*a*b
                w = 3
                parts.append(Polynomial({(m, a): 1, (m, b): 1, (m, z): -2}))
                parts.append(rosenberg_penalty(a, b, z).scale(w))
                ledger.append(LedgerEntry(z, (min(a, b), max(a, b)), Fraction(w)))
                cell.append(z)
            row.append(cell)
        grid.append(row)
    return polysum(parts), grid, ledger


def h_assign_cubic(M: Sequence[Sequence[int]], A: ArraySpec, B: ArraySpec) -> Polynomial:
    """The copy block before order reduction (3-local)."""
    n = len(M)
    return polysum(
        Polynomial.var(M[i][j]) * (Polynomial.var(a) + Polynomial.var(b)
                                   - 2 * Polynomial.var(a) * Polynomial.var(b))
        for i in range(n) for j in range(n)
        for a, b in zip(A[i].bits, B[j].bits)
    )


def h_ordering(B: ArraySpec, registry: VariableRegistry,
               gadget_weight: int = PENALTY_FLOOR) -> tuple[Polynomial, list[GadgetResult]]:
    if len(B) < 2:
        raise QArrayError("ordering needs at least two elements")
    gadgets = [int_leq_gadget(B[j], B[j + 1], registry, name=f"order[{j}]")
               for j in range(len(B) - 1)]
    h = polysum(g.hamiltonian.scale(gadget_weight) + Polynomial.var(g.output) for g in gadgets)
    return h, gadgets


@dataclass(frozen=True)
class PermutationDecode:
    perm: list[int]
    source: list[int]
    dest: list[int]


@dataclass(eq=False)
class SortProgram(Program):
    mapping: list = None
    source: ArraySpec = None
    dest: ArraySpec = None
    copy_ancillas: list = None
    weights: dict = None


def build_sort(n: int, width: int, values: Sequence[int] | None = None,
               gadget_weight: int = PENALTY_FLOOR) -> SortProgram:
    if n < 2:
        raise QArrayError("sorting needs at least two elements")
    reg = VariableRegistry()
    A = ArraySpec.allocate(reg, n, width, "A", values)
    B = ArraySpec.allocate(reg, n, width, "B")
    M = [[reg.fresh_var(f"M[{i}][{j}]", Role.INPUT, "M") for j in range(n)] for i in range(n)]
    h_map = h_mapping(M)
    h_copy, grid, ledger = h_assign(M, A, B, reg)
    h_ord, comparators = h_ordering(B, reg, gadget_weight)

    w_copy = 1 + h_ord.upper_bound()
    w_map = 1 + (h_copy.scale(w_copy) + h_ord).upper_bound()
    flags = polysum(Polynomial.var(g.output) for g in comparators)
    objective = h_map.scale(w_map) + h_copy.scale(w_copy) + flags

    table = {"A": A.bit_table(), "B": B.bit_table(), "M": M}
    params = {"n": n, "kv": width, "values": list(values) if values else None}
    kw = compile_program("sort", reg, objective, comparators, table, A.clamp(), params,
                         gadget_weight, extra_ledger=ledger)
    return SortProgram(**kw, mapping=M, source=A, dest=B, copy_ancillas=grid,
                       weights={"mapping": w_map, "copy": w_copy, "ordering": 1})


def decode_permutation(a: Assignment, program: SortProgram | dict) -> PermutationDecode:
    table = program.table if isinstance(program, Program) else program
    M = table["M"]
    n = len(M)
    perm = []
    for j in range(n):
        rows = [i for i in range(n) if a[M[i][j]]]
        if len(rows) != 1:
            raise InconsistentStateError(f"column {j} of the mapping selects rows {rows}")
        perm.append(rows[0])
    if sorted(perm) != list(range(n)):
        raise InconsistentStateError(f"mapping is not a permutation: {perm}")
    val = lambda bits: sum(a[b] << l for l, b in enumerate(bits))  # noqa: E731
    return PermutationDecode(perm, [val(b) for b in table["A"]], [val(b) for b in table["B"]])


@register_decoder("sort")
def _decode(table, a: Assignment) -> dict:
    d = decode_permutation(a, table)
    return {"perm": d.perm, "A": d.source, "sorted": d.dest}
