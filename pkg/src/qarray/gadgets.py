"""Penalty gadgets for Boolean logic and unsigned quantum-integer comparisons.

Each gadget returns a non-negative Hamiltonian that is exactly zero when its
output (and any internal ancillas) hold the intended values and at least one
otherwise.  Negation never costs a variable: a literal ``~x`` is the
polynomial ``1 - x``.  Comparisons against compile-time constants are folded
down to literals before any variable is allocated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .errors import QArrayError, WidthMismatchError
from .poly import (
    Assignment,
    LedgerEntry,
    Polynomial,
    Role,
    VariableRegistry,
    polysum,
    reduce_to_quadratic,
)


@dataclass(frozen=True)
class QuantumInt:
    """Unsigned integer stored LSB-first over registry variables."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.bits:
            raise QArrayError("QuantumInt needs at least one bit")
        if len(set(self.bits)) != len(self.bits):
            raise QArrayError("QuantumInt bits must be distinct")

    @classmethod
    def allocate(
        cls,
        registry: VariableRegistry,
        name: str,
        width: int,
        role: Role | str = Role.INPUT,
        group: str | None = None,
    ) -> "QuantumInt":
        if width < 1:
            raise QArrayError(f"width must be >= 1, got {width}")
        g = name if group is None else group
        return cls(tuple(registry.fresh_var(f"{name}.bit{j}", role, g) for j in range(width)))

    @property
    def width(self) -> int:
        return len(self.bits)

    def value(self, a: Assignment) -> int:
        return sum(a[b] << j for j, b in enumerate(self.bits))

    def clamp(self, value: int) -> dict[int, int]:
        if not 0 <= value < (1 << self.width):
            raise QArrayError(f"{value} does not fit in {self.width} bits")
        return {b: (value >> j) & 1 for j, b in enumerate(self.bits)}

    def as_poly(self) -> Polynomial:
        return Polynomial({(b,): 1 << j for j, b in enumerate(self.bits)})


@dataclass(frozen=True)
class Literal:
    var: int
    negated: bool = False

    def __invert__(self) -> "Literal":
        return Literal(self.var, not self.negated)

    def poly(self) -> Polynomial:
        if self.negated:
            return Polynomial({(self.var,): -1}, 1)
        return Polynomial.var(self.var)

    def value(self, a: Assignment) -> int:
        return a[self.var] ^ int(self.negated)


# A signal is a literal or a compile-time constant.
Signal = Union[Literal, bool]


def _poly(s: Signal) -> Polynomial:
    if isinstance(s, Literal):
        return s.poly()
    return Polynomial.constant(int(s))


@dataclass
class GadgetResult:
    output: int | None
    hamiltonian: Polynomial
    ancillas: list[int] = field(default_factory=list)
    ledger: list[LedgerEntry] = field(default_factory=list)


def and_penalty(x: Polynomial, y: Polynomial, z: int) -> Polynomial:
    """Zero iff ``z == x AND y`` for 0/1-valued ``x`` and ``y``."""
    zp = Polynomial.var(z)
    return x * y - 2 * x * zp - 2 * y * zp + 3 * zp


def or_penalty(x: Polynomial, y: Polynomial, z: int) -> Polynomial:
    """Zero iff ``z == x OR y``."""
    zp = Polynomial.var(z)
    return x + y + zp + x * y - 2 * x * zp - 2 * y * zp


def equality_cubic(x: int, y: int, c: int) -> Polynomial:
    """The raw bit-equality term; equals -1 on the rows with ``c == [x == y]``
    and 0 on the others."""
    X, Y, C = Polynomial.var(x), Polynomial.var(y), Polynomial.var(c)
    return 2 * X * Y - X - Y - C + 2 * X * C + 2 * Y * C - 4 * X * Y * C


class Circuit:
    """Accumulates gadget Hamiltonians while building a Boolean circuit."""

    def __init__(self, registry: VariableRegistry, name: str):
        self.registry = registry
        self.name = name
        self.parts: list[Polynomial] = []
        self.created: list[int] = []
        self.ledger: list[LedgerEntry] = []

    def new_var(self, label: str | None, role: Role) -> int:
        if label is None:
            v = self.registry.fresh_anon(f"{self.name}~", role, self.name)
        else:
            v = self.registry.fresh_var(label, role, self.name)
        self.created.append(v)
        return v

    # -- primitive gates ---------------------------------------------------

    def and2(self, x: Signal, y: Signal, label: str | None = None,
             role: Role = Role.ANCILLA) -> int:
        z = self.new_var(label, role)
        self.parts.append(and_penalty(_poly(x), _poly(y), z))
        return z

    def or2(self, x: Signal, y: Signal, label: str | None = None,
            role: Role = Role.ANCILLA) -> int:
        z = self.new_var(label, role)
        self.parts.append(or_penalty(_poly(x), _poly(y), z))
        return z

    def xnor2(self, x: int, y: int, label: str | None = None,
              role: Role = Role.ANCILLA) -> int:
        c = self.new_var(label, role)
        cubic = equality_cubic(x, y, c) + 1
        q = reduce_to_quadratic(cubic, self.registry, prefix=f"{self.registry.label(c)}~r",
                                group=self.name)
        self.created.extend(e.ancilla for e in q.ledger)
        self.ledger.extend(q.ledger)
        self.parts.append(q.base)
        return c

    def materialize(self, s: Signal, label: str | None = None,
                    role: Role = Role.DERIVED) -> int:
        """Return a variable equal to ``s``; positive literals are reused."""
        if isinstance(s, Literal) and not s.negated:
            return s.var
        z = self.new_var(label, role)
        zp = Polynomial.var(z)
        if isinstance(s, Literal):
            x = Polynomial.var(s.var)
            self.parts.append((x + zp - 1).square())
        elif s:
            self.parts.append(1 - zp)
        else:
            self.parts.append(zp)
        return z

    # -- folded n-ary gates ------------------------------------------------

    @staticmethod
    def _fold(signals: Iterable[Signal], absorbing: bool) -> list[Literal] | bool:
        lits: list[Literal] = []
        seen: set[Literal] = set()
        for s in signals:
            if isinstance(s, bool):
                if s == absorbing:
                    return absorbing
                continue
            if ~s in seen:
                return absorbing
            if s not in seen:
                seen.add(s)
                lits.append(s)
        return lits if lits else (not absorbing)

    def _tree(self, lits: list[Signal], gate, label: str | None, role: Role) -> Signal:
        level = list(lits)
        while len(level) > 1:
            nxt: list[Signal] = []
            final = len(level) == 2
            for k in range(0, len(level) - 1, 2):
                v = gate(level[k], level[k + 1], label if final else None,
                         role if final else Role.ANCILLA)
                nxt.append(Literal(v))
            if len(level) % 2:
                nxt.append(level[-1])
            level = nxt
        return level[0]

    def and_(self, signals: Iterable[Signal], label: str | None = None,
             role: Role = Role.ANCILLA) -> Signal:
        lits = self._fold(signals, absorbing=False)
        if isinstance(lits, bool):
            return lits
        return self._tree(lits, self.and2, label, role)

    def or_(self, signals: Iterable[Signal], label: str | None = None,
            role: Role = Role.ANCILLA) -> Signal:
        lits = self._fold(signals, absorbing=True)
        if isinstance(lits, bool):
            return lits
        return self._tree(lits, self.or2, label, role)

    def xnor(self, x: Signal, y: Signal, label: str | None = None,
             role: Role = Role.ANCILLA) -> Signal:
        if isinstance(x, bool) and isinstance(y, bool):
            return x == y
        if isinstance(x, bool):
            x, y = y, x
        if isinstance(y, bool):
            return x if y else ~x
        if x.var == y.var:
            return x.negated == y.negated
        # the equality gadget works on plain variables; fold negations outside
        c = self.xnor2(x.var, y.var, label, role)
        return Literal(c, x.negated != y.negated)

    def greater_than(self, xs: Sequence[Signal], ys: Sequence[Signal],
                     label: str | None = None, role: Role = Role.ANCILLA) -> Signal:
        """Unsigned ``X > Y`` over LSB-first bit signals, scanned MSB first."""
        gt: Signal = False
        eq: Signal = True
        k = len(xs)
        for j in range(k - 1, -1, -1):
            last = j == 0
            if j == k - 1:
                gt = self.and_([eq, xs[j], _not(ys[j])], label if last else None,
                               role if last else Role.ANCILLA)
            else:
                step = self.and_([eq, xs[j], _not(ys[j])])
                gt = self.or_([gt, step], label if last else None,
                              role if last else Role.ANCILLA)
            if j > 0:
                e = self.xnor(xs[j], ys[j])
                eq = self.and_([eq, e])
        return gt

    def result(self, output: int | None) -> GadgetResult:
        ancillas = [v for v in self.created if v != output]
        return GadgetResult(output, polysum(self.parts), ancillas, list(self.ledger))


def _not(s: Signal) -> Signal:
    return (not s) if isinstance(s, bool) else ~s


def _const_bits(c: int, width: int) -> list[bool]:
    return [bool((c >> j) & 1) for j in range(width)]


def _lits(q: QuantumInt) -> list[Signal]:
    return [Literal(b) for b in q.bits]


def _check_widths(x: QuantumInt, y: QuantumInt) -> None:
    if x.width != y.width:
        raise WidthMismatchError(f"width mismatch: {x.width} vs {y.width}")


def _name(registry: VariableRegistry, name: str | None, stem: str) -> str:
    if name is not None:
        return name
    k = 0
    while f"{stem}#{k}" in registry:
        k += 1
    return f"{stem}#{k}"


# ---------------------------------------------------------------------------
# Public gadget API


def bit_equality(x: int, y: int, registry: VariableRegistry, name: str | None = None,
                 role: Role = Role.DERIVED) -> GadgetResult:
    """Flag ``C = 1 - (x - y)^2`` from the offset cubic, reduced with one ancilla."""
    if x == y:
        raise QArrayError("bit_equality of a variable with itself is the constant 1")
    name = _name(registry, name, "eq")
    c = Circuit(registry, name)
    out = c.xnor2(x, y, name, role)
    return c.result(out)


def and_tree(inputs: Sequence[int], registry: VariableRegistry, name: str | None = None,
             role: Role = Role.DERIVED) -> GadgetResult:
    if not inputs:
        raise QArrayError("and_tree needs at least one input")
    if len(inputs) == 1:
        return GadgetResult(inputs[0], Polynomial.zero())
    name = _name(registry, name, "and")
    c = Circuit(registry, name)
    out = c._tree([Literal(v) for v in inputs], c.and2, name, role)
    return c.result(out.var)


def or_tree(inputs: Sequence[int], registry: VariableRegistry, name: str | None = None,
            role: Role = Role.DERIVED) -> GadgetResult:
    if not inputs:
        raise QArrayError("or_tree needs at least one input")
    if len(inputs) == 1:
        return GadgetResult(inputs[0], Polynomial.zero())
    name = _name(registry, name, "or")
    c = Circuit(registry, name)
    out = c._tree([Literal(v) for v in inputs], c.or2, name, role)
    return c.result(out.var)


def int_equality(x: QuantumInt, y: QuantumInt, registry: VariableRegistry,
                 name: str | None = None, role: Role = Role.DERIVED) -> GadgetResult:
    _check_widths(x, y)
    name = _name(registry, name, "inteq")
    c = Circuit(registry, name)
    if x.width == 1:
        return c.result(c.xnor2(x.bits[0], y.bits[0], name, role))
    flags = [Literal(c.xnor2(xb, yb)) for xb, yb in zip(x.bits, y.bits)]
    out = c._tree(flags, c.and2, name, role)
    return c.result(out.var)


def int_equality_const(x: QuantumInt, value: int, registry: VariableRegistry,
                       name: str | None = None, role: Role = Role.DERIVED) -> GadgetResult:
    if not 0 <= value < (1 << x.width):
        raise QArrayError(f"constant {value} does not fit in {x.width} bits")
    name = _name(registry, name, "eqc")
    c = Circuit(registry, name)
    lits = [Literal(b, negated=not bit) for b, bit in zip(x.bits, _const_bits(value, x.width))]
    out = c.materialize(c.and_(lits, name, role), name, role)
    return c.result(out)


def int_greater_than(x: QuantumInt, y: QuantumInt, registry: VariableRegistry,
                     name: str | None = None, role: Role = Role.DERIVED) -> GadgetResult:
    _check_widths(x, y)
    name = _name(registry, name, "gt")
    c = Circuit(registry, name)
    out = c.materialize(c.greater_than(_lits(x), _lits(y), name, role), name, role)
    return c.result(out)


def int_compare_const(x: QuantumInt, op: str, value: int, registry: VariableRegistry,
                      name: str | None = None, role: Role = Role.DERIVED) -> GadgetResult:
    """``x == value``, ``x > value`` or ``x < value`` with the constant folded in."""
    if value < 0:
        raise QArrayError("constants must be non-negative")
    if op == "eq_const" and value >= (1 << x.width):
        # cannot match; still hand back a flag pinned to zero
        name = _name(registry, name, op)
        c = Circuit(registry, name)
        return c.result(c.materialize(False, name, role))
    if op == "eq_const":
        return int_equality_const(x, value, registry, name, role)
    name = _name(registry, name, op)
    c = Circuit(registry, name)
    width = max(x.width, value.bit_length())
    xs: list[Signal] = _lits(x) + [False] * (width - x.width)
    ks: list[Signal] = list(_const_bits(value, width))
    if op == "gt_const":
        s = c.greater_than(xs, ks, name, role)
    elif op == "lt_const":
        s = c.greater_than(ks, xs, name, role)
    else:
        raise QArrayError(f"unknown comparison {op!r}")
    return c.result(c.materialize(s, name, role))


def int_leq_constraint(x: QuantumInt, y: QuantumInt, registry: VariableRegistry,
                       name: str | None = None, gadget_weight: int = 2) -> Polynomial:
    """Energy 0 iff ``x <= y`` with the comparator ancillas consistent."""
    g = int_greater_than(x, y, registry, name, role=Role.ANCILLA)
    return g.hamiltonian.scale(gadget_weight) + Polynomial.var(g.output)


def int_leq_gadget(x: QuantumInt, y: QuantumInt, registry: VariableRegistry,
                   name: str | None = None) -> GadgetResult:
    """Like :func:`int_leq_constraint` but keeps the comparator bookkeeping."""
    return int_greater_than(x, y, registry, name, role=Role.ANCILLA)


def bit_assign_equal(x: QuantumInt, y: QuantumInt) -> Polynomial:
    """Sum of ``(x_j - y_j)^2``: the Hamming distance, no ancillas."""
    _check_widths(x, y)
    return polysum((Polynomial.var(a) - Polynomial.var(b)).square()
                   for a, b in zip(x.bits, y.bits))


def gadget_truth(result: GadgetResult, assignment: Mapping[int, int]) -> bool:
    """True when ``assignment`` zeroes the gadget Hamiltonian."""
    return result.hamiltonian.evaluate(assignment) == 0
