"""Compiled programs: a Hamiltonian, its QUBO form and the decode metadata."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .errors import QArrayError
from .gadgets import GadgetResult, QuantumInt
from .poly import (
    Assignment,
    LedgerEntry,
    Polynomial,
    Qubo,
    Role,
    VariableRegistry,
    reduce_to_quadratic,
)

# Weight applied to every logic gadget before it meets the half-unit
# not-found penalty, so that broken logic always costs at least 1.
PENALTY_FLOOR = 2

Decoder = Callable[[Mapping, Assignment], dict]
DECODERS: dict[str, Decoder] = {}


def register_decoder(kind: str):
    def deco(fn: Decoder) -> Decoder:
        DECODERS[kind] = fn
        return fn
    return deco


def decode(kind: str, table: Mapping, a: Assignment) -> dict:
    try:
        fn = DECODERS[kind]
    except KeyError:
        raise QArrayError(f"no decoder for program kind {kind!r}") from None
    return fn(table, a)


def index_width(n: int) -> int:
    """Bits needed to address ``n`` elements (at least one)."""
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


@dataclass(frozen=True)
class ArraySpec:
    """Fixed-size array of ``n_elements`` unsigned integers of equal width."""

    n_elements: int
    element_width: int
    elements: tuple[QuantumInt, ...]
    known_values: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n_elements < 1:
            raise QArrayError("arrays need at least one element")
        if len(self.elements) != self.n_elements:
            raise QArrayError("element count does not match n_elements")
        if any(e.width != self.element_width for e in self.elements):
            raise QArrayError("all elements must share the element width")
        for i, v in self.known_values.items():
            if not 0 <= i < self.n_elements:
                raise QArrayError(f"known value index {i} out of range")
            if not 0 <= v < (1 << self.element_width):
                raise QArrayError(f"value {v} does not fit in {self.element_width} bits")

    @classmethod
    def allocate(cls, registry: VariableRegistry, n: int, width: int, name: str = "A",
                 values: Sequence[int] | None = None) -> "ArraySpec":
        if n < 1 or width < 1:
            raise QArrayError("array size and element width must be >= 1")
        elems = tuple(
            QuantumInt.allocate(registry, f"{name}[{i}]", width, Role.INPUT, group=name)
            for i in range(n)
        )
        known = {}
        if values is not None:
            if len(values) != n:
                raise QArrayError(f"expected {n} values, got {len(values)}")
            known = dict(enumerate(values))
        return cls(n, width, elems, known)

    def __getitem__(self, i: int) -> QuantumInt:
        return self.elements[i]

    def __len__(self) -> int:
        return self.n_elements

    def clamp(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for i, v in self.known_values.items():
            out.update(self.elements[i].clamp(v))
        return out

    def values(self, a: Assignment) -> list[int]:
        return [e.value(a) for e in self.elements]

    def bit_table(self) -> list[list[int]]:
        return [list(e.bits) for e in self.elements]


@dataclass(eq=False)
class Program:
    """A compiled Hamiltonian with everything needed to solve and decode it."""

    kind: str
    registry: VariableRegistry
    hamiltonian: Polynomial
    qubo: Qubo
    logic: list[Polynomial]
    table: dict
    clamp: dict[int, int]
    params: dict

    def decode(self, a: Assignment) -> dict:
        return decode(self.kind, self.table, a)

    def logic_valid(self, a: Assignment) -> bool:
        """All gadget blocks at zero and every substitution consistent."""
        return all(p.evaluate(a) == 0 for p in self.logic) and self.qubo.ledger_consistent(a)

    def varmap(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params,
            "variables": self.registry.to_json(),
            "decode": self.table,
            "clamp": {str(k): v for k, v in sorted(self.clamp.items())},
            "ledger": [e.to_json() for e in self.qubo.ledger],
        }


def compile_program(
    kind: str,
    registry: VariableRegistry,
    objective: Polynomial,
    gadgets: Sequence[GadgetResult],
    table: dict,
    clamp: Mapping[int, int],
    params: dict,
    weight: int = PENALTY_FLOOR,
    extra_logic: Sequence[Polynomial] = (),
    extra_ledger: Sequence[LedgerEntry] = (),
) -> dict:
    """Sum the objective with weighted gadget blocks and reduce to a QUBO.

    Returns the keyword arguments shared by every :class:`Program` subclass.
    """
    from .poly import polysum

    logic = [g.hamiltonian for g in gadgets if not g.hamiltonian.is_zero()]
    logic.extend(extra_logic)
    h = objective + polysum(logic).scale(weight)
    q = reduce_to_quadratic(h, registry)
    ledger = [e for g in gadgets for e in g.ledger] + list(extra_ledger) + list(q.ledger)
    return dict(
        kind=kind,
        registry=registry,
        hamiltonian=h,
        qubo=Qubo(q.base, tuple(ledger)),
        logic=logic,
        table=table,
        clamp=dict(clamp),
        params=params,
    )
