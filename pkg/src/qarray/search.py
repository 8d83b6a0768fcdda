"""Search Hamiltonians for unordered arrays.

Indices are 0-based throughout.  For every element the builder derives an
index-match flag ``I[i]`` (``i == n``) and a value-match flag ``V[i]``
(``A[i] == x`` or a user predicate), then couples them with one of:

* ``basic``      ``(1 - sum I_i V_i)^2``
* ``summation``  ``(1 - nf - sum I_i V_i)^2 + nf/2``
* ``logical_or`` ``(1 - nf - found)^2 + nf/2`` with ``found = OR_i (I_i AND V_i)``
* ``count``      ``(count - sum V_i)^2`` (no index at all)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence, Union

from .errors import QArrayError, WidthMismatchError
from .gadgets import Circuit, GadgetResult, Literal, QuantumInt, int_equality, int_equality_const
from .poly import Assignment, Polynomial, Role, VariableRegistry, linear, polysum
from .program import (
    PENALTY_FLOOR,
    ArraySpec,
    Program,
    compile_program,
    index_width,
    register_decoder,
)

VARIANTS = ("basic", "summation", "logical_or", "count")
HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# Predicates


@dataclass(frozen=True)
class FieldTest:
    """Compare the bit field ``[offset, offset + width)`` against a constant."""

    offset: int
    width: int
    op: str  # eq_const | gt_const | lt_const
    constant: int

    def holds(self, value: int) -> bool:
        f = (value >> self.offset) & ((1 << self.width) - 1)
        if self.op == "eq_const":
            return f == self.constant
        if self.op == "gt_const":
            return f > self.constant
        return f < self.constant


@dataclass(frozen=True)
class Predicate:
    """Conjunction of field tests."""

    tests: tuple[FieldTest, ...]

    def __post_init__(self) -> None:
        if not self.tests:
            raise QArrayError("predicate needs at least one test")
        for t in self.tests:
            if t.op not in ("eq_const", "gt_const", "lt_const"):
                raise QArrayError(f"unknown predicate op {t.op!r}")
            if t.width < 1 or t.offset < 0 or t.constant < 0:
                raise QArrayError(f"malformed field test {t}")

    def holds(self, value: int) -> bool:
        return all(t.holds(value) for t in self.tests)

    def check_width(self, element_width: int) -> None:
        for t in self.tests:
            if t.offset + t.width > element_width:
                raise QArrayError(
                    f"field [{t.offset}, {t.offset + t.width}) exceeds element width {element_width}"
                )

    def to_json(self) -> list[dict]:
        return [t.__dict__.copy() for t in self.tests]

    @classmethod
    def parse(cls, text: str) -> "Predicate":
        """Parse ``"0:2>1 & 2:2==0"`` (offset:width OP constant, joined by ``&``)."""
        ops = {"==": "eq_const", ">": "gt_const", "<": "lt_const"}
        tests = []
        for part in text.split("&"):
            m = re.fullmatch(r"\s*(\d+):(\d+)\s*(==|>|<)\s*(\d+)\s*", part)
            if not m:
                raise QArrayError(f"cannot parse predicate clause {part!r}")
            tests.append(FieldTest(int(m[1]), int(m[2]), ops[m[3]], int(m[4])))
        return cls(tuple(tests))


# ---------------------------------------------------------------------------
# Matchers


def build_index_matchers(index: QuantumInt, n: int, registry: VariableRegistry) -> list[GadgetResult]:
    if (1 << index.width) < n:
        raise QArrayError(f"{index.width}-bit index cannot address {n} elements")
    return [int_equality_const(index, i, registry, name=f"I[{i}]") for i in range(n)]


def build_value_matchers(array: ArraySpec, x: QuantumInt, registry: VariableRegistry) -> list[GadgetResult]:
    if x.width != array.element_width:
        raise WidthMismatchError(
            f"target width {x.width} != element width {array.element_width}"
        )
    return [int_equality(array[i], x, registry, name=f"V[{i}]") for i in range(len(array))]


def build_predicate_matchers(array: ArraySpec, p: Predicate, registry: VariableRegistry) -> list[GadgetResult]:
    p.check_width(array.element_width)
    out = []
    for i, elem in enumerate(array.elements):
        name = f"V[{i}]"
        c = Circuit(registry, name)
        leaves = []
        for t in p.tests:
            bits = [Literal(b) for b in elem.bits[t.offset:t.offset + t.width]]
            if t.op == "eq_const":
                if t.constant >= (1 << t.width):
                    leaves.append(False)
                    continue
                leaves.append(c.and_([
                    lit if (t.constant >> j) & 1 else ~lit for j, lit in enumerate(bits)
                ]))
                continue
            w = max(t.width, t.constant.bit_length())
            xs = bits + [False] * (w - t.width)
            ks = [bool((t.constant >> j) & 1) for j in range(w)]
            leaves.append(c.greater_than(xs, ks) if t.op == "gt_const" else c.greater_than(ks, xs))
        flag = c.materialize(c.and_(leaves, name, Role.DERIVED), name, Role.DERIVED)
        out.append(c.result(flag))
    return out


# ---------------------------------------------------------------------------
# Search terms


def _products(I: Sequence[int], V: Sequence[int]) -> Polynomial:
    if len(I) != len(V):
        raise QArrayError(f"flag lengths differ: {len(I)} vs {len(V)}")
    return Polynomial({(i, v): 1 for i, v in zip(I, V)})


def h_search_basic(I: Sequence[int], V: Sequence[int], registry: VariableRegistry | None = None) -> Polynomial:
    return (1 - _products(I, V)).square()


def h_search_with_failure(I: Sequence[int], V: Sequence[int],
                          registry: VariableRegistry) -> tuple[Polynomial, int]:
    s = _products(I, V)
    nf = registry.fresh_var("not_found", Role.INPUT, "not_found")
    nfp = Polynomial.var(nf)
    return (1 - nfp - s).square() + nfp.scale(HALF), nf


class OrSearch(NamedTuple):
    hamiltonian: Polynomial
    not_found: int
    found: int
    gadgets: list[GadgetResult]


def h_search_or_variant(I: Sequence[int], V: Sequence[int], registry: VariableRegistry) -> OrSearch:
    """Search term over ``found = OR_i z_i`` with ``z_i = I_i AND V_i``.

    The returned Hamiltonian holds only the coupling term; the AND and OR
    gadgets come back separately so callers can weight them.
    """
    if len(I) != len(V):
        raise QArrayError(f"flag lengths differ: {len(I)} vs {len(V)}")
    gadgets = []
    zs = []
    for i, (a, b) in enumerate(zip(I, V)):
        c = Circuit(registry, f"z[{i}]")
        z = c.and2(Literal(a), Literal(b), f"z[{i}]", Role.DERIVED)
        gadgets.append(c.result(z))
        zs.append(z)
    if len(zs) == 1:
        found_var = zs[0]
    else:
        c = Circuit(registry, "found")
        found_var = c._tree([Literal(z) for z in zs], c.or2, "found", Role.DERIVED).var
        gadgets.append(c.result(found_var))
    nf = registry.fresh_var("not_found", Role.INPUT, "not_found")
    nfp, fp = Polynomial.var(nf), Polynomial.var(found_var)
    return OrSearch((1 - nfp - fp).square() + nfp.scale(HALF), nf, found_var, gadgets)


def h_count_matches(V: Sequence[int], count: QuantumInt) -> Polynomial:
    n = len(V)
    if (1 << count.width) <= n:
        raise QArrayError(f"{count.width}-bit count cannot hold {n}")
    return (count.as_poly() - linear({v: 1 for v in V})).square()


def h_array_assign(array: ArraySpec, index: QuantumInt, x: QuantumInt,
                   registry: VariableRegistry) -> tuple[Polynomial, list[GadgetResult]]:
    """``sum_i I_i * Hamming(A[i], x) + (1 - sum_i I_i)^2``; gadgets returned apart."""
    if x.width != array.element_width:
        raise WidthMismatchError(
            f"value width {x.width} != element width {array.element_width}"
        )
    matchers = build_index_matchers(index, len(array), registry)
    I = [g.output for g in matchers]
    copy = polysum(
        Polynomial.var(I[i]) * polysum((Polynomial.var(a) - Polynomial.var(b)).square()
                                       for a, b in zip(array[i].bits, x.bits))
        for i in range(len(array))
    )
    one_hot = (1 - linear({v: 1 for v in I})).square()
    return copy + one_hot, matchers


# ---------------------------------------------------------------------------
# Programs


@dataclass(eq=False)
class SearchProgram(Program):
    array: ArraySpec = None
    index_var: QuantumInt | None = None
    target: QuantumInt | None = None
    match_flags: list[int] = field(default_factory=list)
    value_flags: list[int] = field(default_factory=list)
    not_found: int | None = None
    found: int | None = None
    variant: str = "summation"
    count_var: QuantumInt | None = None
    predicate: Predicate | None = None


def build_search(
    n: int,
    width: int,
    variant: str = "summation",
    values: Sequence[int] | None = None,
    target: int | None = None,
    index: int | None = None,
    predicate: Predicate | str | None = None,
    weight: int = PENALTY_FLOOR,
) -> SearchProgram:
    """Compile a complete search (or count) program over a fresh registry."""
    if variant == "or":
        variant = "logical_or"
    if variant not in VARIANTS:
        raise QArrayError(f"unknown search variant {variant!r}")
    if isinstance(predicate, str):
        predicate = Predicate.parse(predicate)
    reg = VariableRegistry()
    A = ArraySpec.allocate(reg, n, width, "A", values)
    clamp = A.clamp()
    x = None
    if predicate is None:
        x = QuantumInt.allocate(reg, "x", width)
        if target is not None:
            clamp.update(x.clamp(target))
    elif target is not None:
        raise QArrayError("a predicate search has no target value")

    idx = None
    I: list[int] = []
    gadgets: list[GadgetResult] = []
    if variant != "count":
        idx = QuantumInt.allocate(reg, "n", index_width(n))
        if index is not None:
            clamp.update(idx.clamp(index))
        im = build_index_matchers(idx, n, reg)
        gadgets += im
        I = [g.output for g in im]
    elif index is not None:
        raise QArrayError("the count variant has no index")

    vm = build_value_matchers(A, x, reg) if predicate is None else build_predicate_matchers(A, predicate, reg)
    gadgets += vm
    V = [g.output for g in vm]

    nf = found = None
    count = None
    if variant == "basic":
        objective = h_search_basic(I, V)
    elif variant == "summation":
        objective, nf = h_search_with_failure(I, V, reg)
    elif variant == "logical_or":
        objective, nf, found, og = h_search_or_variant(I, V, reg)
        gadgets += og
    else:
        count = QuantumInt.allocate(reg, "count", n.bit_length())
        objective = h_count_matches(V, count)

    table = {
        "variant": variant,
        "A": A.bit_table(),
        "x": list(x.bits) if x else None,
        "n": list(idx.bits) if idx else None,
        "I": I,
        "V": V,
        "not_found": nf,
        "found": found,
        "count": list(count.bits) if count else None,
    }
    params = {"n": n, "kv": width, "variant": variant, "values": list(values) if values else None,
              "target": target, "index": index,
              "predicate": predicate.to_json() if predicate else None}
    kw = compile_program("search", reg, objective, gadgets, table, clamp, params, weight)
    return SearchProgram(
        **kw, array=A, index_var=idx, target=x, match_flags=I, value_flags=V,
        not_found=nf, found=found, variant=variant, count_var=count, predicate=predicate,
    )


def build_array_assign(
    n: int,
    width: int,
    values: Sequence[int] | None = None,
    target: int | None = None,
    index: int | None = None,
    weight: int = PENALTY_FLOOR,
) -> Program:
    """Compile ``A[n] := x`` (equivalently the lookup ``x := A[n]``)."""
    reg = VariableRegistry()
    A = ArraySpec.allocate(reg, n, width, "A", values)
    x = QuantumInt.allocate(reg, "x", width)
    idx = QuantumInt.allocate(reg, "n", index_width(n))
    clamp = A.clamp()
    if target is not None:
        clamp.update(x.clamp(target))
    if index is not None:
        clamp.update(idx.clamp(index))
    objective, matchers = h_array_assign(A, idx, x, reg)
    table = {"A": A.bit_table(), "x": list(x.bits), "n": list(idx.bits),
             "I": [g.output for g in matchers]}
    params = {"n": n, "kv": width, "values": list(values) if values else None,
              "target": target, "index": index}
    kw = compile_program("assign", reg, objective, matchers, table, clamp, params, weight)
    return Program(**kw)


def _val(bits, a: Assignment) -> int:
    return sum(a[b] << j for j, b in enumerate(bits))


@register_decoder("search")
def decode_search(table, a: Assignment) -> dict:
    out: dict = {"A": [_val(bits, a) for bits in table["A"]]}
    if table.get("x") is not None:
        out["x"] = _val(table["x"], a)
    out["V"] = [a[v] for v in table["V"]]
    if table["variant"] == "count":
        out["count"] = _val(table["count"], a)
        return out
    n = _val(table["n"], a)
    out["n"] = n
    out["I"] = [a[v] for v in table["I"]]
    if table.get("not_found") is not None:
        out["not_found"] = a[table["not_found"]]
    if table.get("found") is not None:
        out["found"] = a[table["found"]]
    selected = out.get("not_found", 0) == 0 and n < len(table["A"])
    out["match_index"] = n if selected else None
    return out


@register_decoder("assign")
def decode_assign(table, a: Assignment) -> dict:
    return {
        "A": [_val(bits, a) for bits in table["A"]],
        "x": _val(table["x"], a),
        "n": _val(table["n"], a),
    }
