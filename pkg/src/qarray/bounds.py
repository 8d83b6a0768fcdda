"""Bounding-index search over an ascending array.

``C[i] = A[i] > x`` for every element, and ``span[i] = (not C[i]) and C[i+1]``
marks the unique ``i`` with ``A[i] <= x < A[i+1]``.  When no span is set the
limit flags tell which side ``x`` fell off: ``C[0] = 1`` means below the
first element, ``C[N-1] = 0`` means at or above the last one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InconsistentStateError, QArrayError, WidthMismatchError
from .gadgets import Circuit, GadgetResult, Literal, QuantumInt, int_greater_than
from .poly import Assignment, Polynomial, Role, VariableRegistry
from .program import PENALTY_FLOOR, ArraySpec, Program, compile_program, register_decoder


@dataclass(frozen=True)
class BoundsResult:
    kind: str  # in_span | below_range | above_range
    index: int | None = None

    def to_json(self) -> dict:
        return {"kind": self.kind, "index": self.index}


def build_compare_flags(array: ArraySpec, x: QuantumInt, registry: VariableRegistry) -> list[GadgetResult]:
    if x.width != array.element_width:
        raise WidthMismatchError(f"target width {x.width} != element width {array.element_width}")
    return [int_greater_than(array[i], x, registry, name=f"C[{i}]") for i in range(len(array))]


def build_span_flags(C: Sequence[int], registry: VariableRegistry) -> list[GadgetResult]:
    if len(C) < 2:
        raise QArrayError("span flags need at least two comparison flags")
    out = []
    for i in range(len(C) - 1):
        name = f"span[{i}]"
        c = Circuit(registry, name)
        s = c.and2(~Literal(C[i]), Literal(C[i + 1]), name, Role.DERIVED)
        out.append(c.result(s))
    return out


@dataclass(eq=False)
class BoundsProgram(Program):
    array: ArraySpec = None
    target: QuantumInt = None
    compare_flags: list[int] = None
    span_flags: list[int] = None


def build_bounds(
    n: int,
    width: int,
    values: Sequence[int] | None = None,
    target: int | None = None,
    weight: int = PENALTY_FLOOR,
) -> BoundsProgram:
    reg = VariableRegistry()
    A = ArraySpec.allocate(reg, n, width, "A", values)
    x = QuantumInt.allocate(reg, "x", width)
    clamp = A.clamp()
    if target is not None:
        clamp.update(x.clamp(target))
    cg = build_compare_flags(A, x, reg)
    C = [g.output for g in cg]
    # a single element has no spans: only the below/above cases exist
    sg = build_span_flags(C, reg) if n > 1 else []
    spans = [g.output for g in sg]
    table = {"A": A.bit_table(), "x": list(x.bits), "C": C, "span": spans}
    params = {"n": n, "kv": width, "values": list(values) if values else None, "target": target}
    kw = compile_program("bounds", reg, Polynomial.zero(), cg + sg, table, clamp, params, weight)
    return BoundsProgram(**kw, array=A, target=x, compare_flags=C, span_flags=spans)


def decode_bounds(a: Assignment, program: BoundsProgram | dict) -> BoundsResult:
    table = program.table if isinstance(program, Program) else program
    C = [a[v] for v in table["C"]]
    spans = [i for i, v in enumerate(table["span"]) if a[v]]
    if len(spans) > 1:
        raise InconsistentStateError(f"several spans set: {spans}")
    if spans:
        return BoundsResult("in_span", spans[0])
    if C[0] == 1:
        return BoundsResult("below_range")
    if C[-1] == 0:
        return BoundsResult("above_range")
    raise InconsistentStateError(f"no span set but comparison flags are {C}")


def classical_bounds(values: Sequence[int], x: int) -> BoundsResult:
    """Reference scan for ``A[i] <= x < A[i+1]`` on an ascending array."""
    if x < values[0]:
        return BoundsResult("below_range")
    for i in range(len(values) - 1):
        if values[i] <= x < values[i + 1]:
            return BoundsResult("in_span", i)
    return BoundsResult("above_range")


@register_decoder("bounds")
def _decode(table, a: Assignment) -> dict:
    r = decode_bounds(a, table)
    return {
        "A": [sum(a[b] << j for j, b in enumerate(bits)) for bits in table["A"]],
        "x": sum(a[b] << j for j, b in enumerate(table["x"])),
        "C": [a[v] for v in table["C"]],
        "span": [a[v] for v in table["span"]],
        "result": r.to_json(),
    }
