"""Exact multilinear pseudo-boolean polynomials, variable registry and
order reduction to quadratic form.

Every Hamiltonian in the package is a :class:`Polynomial` over binary
variables identified by dense integer ids handed out by a
:class:`VariableRegistry`.  Coefficients are exact rationals; ``x*x == x`` is
applied on every product so the representation is canonical.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

from .errors import DuplicateLabelError, QArrayError

Number = Union[int, Fraction]
Term = tuple[int, ...]
Assignment = Mapping[int, int]


class Role(str, Enum):
    INPUT = "input"
    DERIVED = "derived"
    ANCILLA = "ancilla"


@dataclass(frozen=True)
class VarInfo:
    id: int
    label: str
    role: Role
    group: str


class VariableRegistry:
    """Dense, append-only table of binary variables."""

    def __init__(self) -> None:
        self._entries: list[VarInfo] = []
        self._by_label: dict[str, int] = {}
        self._anon: dict[str, int] = defaultdict(int)

    def fresh_var(self, label: str, role: Role | str, group: str = "") -> int:
        if label in self._by_label:
            raise DuplicateLabelError(
                f"label {label!r} already names variable {self._by_label[label]}"
            )
        vid = len(self._entries)
        self._entries.append(VarInfo(vid, label, Role(role), group))
        self._by_label[label] = vid
        return vid

    def fresh_anon(self, prefix: str, role: Role | str, group: str = "") -> int:
        """Allocate a variable labelled ``prefix#k`` with the first free k."""
        k = self._anon[prefix]
        while f"{prefix}#{k}" in self._by_label:
            k += 1
        self._anon[prefix] = k + 1
        return self.fresh_var(f"{prefix}#{k}", role, group)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[VarInfo]:
        return iter(self._entries)

    def __getitem__(self, vid: int) -> VarInfo:
        return self._entries[vid]

    def lookup(self, label: str) -> int:
        return self._by_label[label]

    def __contains__(self, label: object) -> bool:
        return label in self._by_label

    def label(self, vid: int) -> str:
        return self._entries[vid].label

    def role(self, vid: int) -> Role:
        return self._entries[vid].role

    def ids_with_role(self, role: Role | str) -> list[int]:
        role = Role(role)
        return [e.id for e in self._entries if e.role is role]

    def to_json(self) -> list[dict]:
        return [
            {"id": e.id, "label": e.label, "role": e.role.value, "group": e.group}
            for e in self._entries
        ]

    @classmethod
    def from_json(cls, rows: Iterable[Mapping]) -> "VariableRegistry":
        reg = cls()
        for expected, row in enumerate(sorted(rows, key=lambda r: r["id"])):
            if row["id"] != expected:
                raise QArrayError(f"variable ids are not dense at {row['id']}")
            reg.fresh_var(row["label"], row["role"], row.get("group", ""))
        return reg


def _norm(c: Number) -> Number:
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def _merge(a: Term, b: Term) -> Term:
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(set(a).union(b)))


class Polynomial:
    """Multilinear polynomial ``sum c_T prod_{v in T} v`` with exact coefficients.

    The constant lives under the empty term internally; :attr:`offset`
    exposes it and :attr:`terms` excludes it.  Instances are treated as
    immutable.
    """

    __slots__ = ("_t",)

    def __init__(self, terms: Mapping[Term, Number] | None = None, offset: Number = 0):
        t: dict[Term, Number] = {}
        if terms:
            for key, c in terms.items():
                key = tuple(sorted(set(key)))
                t[key] = t.get(key, 0) + c
        if offset:
            t[()] = t.get((), 0) + offset
        self._t = {k: _norm(c) for k, c in t.items() if c != 0}

    @classmethod
    def _raw(cls, t: dict[Term, Number]) -> "Polynomial":
        p = cls.__new__(cls)
        p._t = {k: _norm(c) for k, c in t.items() if c != 0}
        return p

    @classmethod
    def var(cls, v: int, coeff: Number = 1) -> "Polynomial":
        return cls._raw({(v,): coeff})

    @classmethod
    def constant(cls, c: Number) -> "Polynomial":
        return cls._raw({(): c})

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls._raw({})

    # -- accessors -------------------------------------------------------

    @property
    def offset(self) -> Number:
        return self._t.get((), 0)

    @property
    def terms(self) -> dict[Term, Number]:
        return {k: c for k, c in self._t.items() if k}

    def items(self) -> Iterator[tuple[Term, Number]]:
        """All (term, coefficient) pairs including the constant under ``()``."""
        return iter(self._t.items())

    def coefficient(self, *vars_: int) -> Number:
        return self._t.get(tuple(sorted(set(vars_))), 0)

    @property
    def degree(self) -> int:
        return max((len(k) for k in self._t), default=0)

    def support(self) -> list[int]:
        s: set[int] = set()
        for k in self._t:
            s.update(k)
        return sorted(s)

    def term_count(self) -> int:
        """Number of non-constant monomials."""
        return sum(1 for k in self._t if k)

    def is_zero(self) -> bool:
        return not self._t

    # -- arithmetic ------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(other)
        return NotImplemented

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = dict(self._t)
        for k, c in other._t.items():
            t[k] = t.get(k, 0) + c
        return Polynomial._raw(t)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw({k: -c for k, c in self._t.items()})

    def __sub__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        t: dict[Term, Number] = {}
        for k1, c1 in self._t.items():
            for k2, c2 in other._t.items():
                k = _merge(k1, k2)
                t[k] = t.get(k, 0) + c1 * c2
        return Polynomial._raw(t)

    def __rmul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def scale(self, s: Number) -> "Polynomial":
        if s == 0:
            return Polynomial.zero()
        return Polynomial._raw({k: c * s for k, c in self._t.items()})

    def square(self) -> "Polynomial":
        return self * self

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._t == other._t

    def __hash__(self) -> int:
        return hash(frozenset(self._t.items()))

    def __repr__(self) -> str:
        if not self._t:
            return "Polynomial(0)"
        parts = []
        for k in sorted(self._t, key=lambda k: (len(k), k)):
            mono = "*".join(f"v{v}" for v in k) or "1"
            parts.append(f"{self._t[k]}*{mono}" if k else f"{self._t[k]}")
        return "Polynomial(" + " + ".join(parts) + ")"

    # -- evaluation ------------------------------------------------------

    def evaluate(self, a: Assignment) -> Fraction:
        total: Number = 0
        for k, c in self._t.items():
            prod = 1
            for v in k:
                try:
                    bit = a[v]
                except KeyError:
                    raise QArrayError(f"assignment is missing variable {v}") from None
                if not bit:
                    prod = 0
                    break
            if prod:
                total += c
        return Fraction(total)

    def clamp(self, partial: Assignment) -> "Polynomial":
        """Substitute constants for the variables named in ``partial``."""
        t: dict[Term, Number] = {}
        for k, c in self._t.items():
            keep = []
            dead = False
            for v in k:
                if v in partial:
                    if not partial[v]:
                        dead = True
                        break
                else:
                    keep.append(v)
            if dead:
                continue
            key = tuple(keep)
            t[key] = t.get(key, 0) + c
        return Polynomial._raw(t)

    def upper_bound(self) -> Number:
        """Offset plus positive coefficient mass; bounds the maximum over {0,1}^n."""
        return self.offset + sum(c for k, c in self._t.items() if k and c > 0)

    def lower_bound(self) -> Number:
        return self.offset + sum(c for k, c in self._t.items() if k and c < 0)


def polysum(polys: Iterable[Polynomial]) -> Polynomial:
    """Sum many polynomials with a single accumulator."""
    t: dict[Term, Number] = {}
    for p in polys:
        for k, c in p._t.items():
            t[k] = t.get(k, 0) + c
    return Polynomial._raw(t)


def linear(coeffs: Mapping[int, Number], offset: Number = 0) -> Polynomial:
    t: dict[Term, Number] = {(v,): c for v, c in coeffs.items()}
    if offset:
        t[()] = offset
    return Polynomial._raw(t)


def poly_arith(op: str, lhs: Polynomial, rhs: Polynomial | Number | None = None) -> Polynomial:
    """Dispatch form of the arithmetic operators (``add``, ``sub``, ``mul``,
    ``scale``, ``square``)."""
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    if op == "scale":
        return lhs.scale(rhs)
    if op == "square":
        return lhs.square()
    raise QArrayError(f"unknown polynomial operation {op!r}")


def evaluate(poly: Polynomial, a: Assignment) -> Fraction:
    return poly.evaluate(a)


def clamp(poly: Polynomial, partial: Assignment) -> Polynomial:
    return poly.clamp(partial)


# ---------------------------------------------------------------------------
# Order reduction


@dataclass(frozen=True)
class LedgerEntry:
    """Record of one substitution ``ancilla = replaces[0] * replaces[1]``."""

    ancilla: int
    replaces: tuple[int, int]
    penalty_weight: Fraction

    def consistent(self, a: Assignment) -> bool:
        x, y = self.replaces
        return a[self.ancilla] == (a[x] & a[y])

    def to_json(self) -> dict:
        return {
            "ancilla": self.ancilla,
            "replaces": list(self.replaces),
            "penalty_weight": str(self.penalty_weight),
        }

    @classmethod
    def from_json(cls, row: Mapping) -> "LedgerEntry":
        x, y = row["replaces"]
        return cls(int(row["ancilla"]), (int(x), int(y)), Fraction(row["penalty_weight"]))


@dataclass(frozen=True)
class Qubo:
    """A degree-2 polynomial plus the substitutions that produced it."""

    base: Polynomial
    ledger: tuple[LedgerEntry, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.base.degree > 2:
            raise QArrayError(f"QUBO base has degree {self.base.degree}")

    def evaluate(self, a: Assignment) -> Fraction:
        return self.base.evaluate(a)

    def ledger_consistent(self, a: Assignment) -> bool:
        return all(e.consistent(a) for e in self.ledger)


def rosenberg_penalty(x: int, y: int, z: int) -> Polynomial:
    """``xy - 2xz - 2yz + 3z``: zero iff ``z == x*y``, at least 1 otherwise."""
    return Polynomial._raw({(min(x, y), max(x, y)): 1, _merge((x,), (z,)): -2,
                            _merge((y,), (z,)): -2, (z,): 3})


class _Reducer:
    """Greedy pair substitution over the terms of degree three or more."""

    def __init__(self, poly: Polynomial):
        self.t: dict[Term, Number] = dict(poly._t)
        self.pair_terms: dict[tuple[int, int], set[Term]] = defaultdict(set)
        self.heap: list[tuple[int, int, int]] = []
        for k in self.t:
            if len(k) >= 3:
                self._index(k)
        for pair, ts in self.pair_terms.items():
            heapq.heappush(self.heap, (-len(ts), pair[0], pair[1]))

    def _pairs(self, k: Term):
        for i in range(len(k)):
            for j in range(i + 1, len(k)):
                yield (k[i], k[j])

    def _index(self, k: Term) -> None:
        for p in self._pairs(k):
            self.pair_terms[p].add(k)

    def _unindex(self, k: Term) -> set[tuple[int, int]]:
        touched = set()
        for p in self._pairs(k):
            s = self.pair_terms[p]
            s.discard(k)
            touched.add(p)
        return touched

    def next_pair(self) -> tuple[int, int] | None:
        while self.heap:
            negc, a, b = heapq.heappop(self.heap)
            cur = len(self.pair_terms.get((a, b), ()))
            if cur and cur == -negc:
                return (a, b)
        return None

    def substitute(self, a: int, b: int, z: int) -> Fraction:
        victims = list(self.pair_terms[(a, b)])
        mass = sum(abs(self.t[k]) for k in victims) + abs(self.t.get((a, b), 0))
        weight = Fraction(1 + mass)
        touched: set[tuple[int, int]] = set()
        for k in victims:
            c = self.t.pop(k)
            touched |= self._unindex(k)
            nk = tuple(sorted((set(k) - {a, b}) | {z}))
            had = nk in self.t
            if had and len(nk) >= 3:
                touched |= self._unindex(nk)
            nc = self.t.get(nk, 0) + c
            if nc == 0:
                self.t.pop(nk, None)
            else:
                self.t[nk] = nc
                if len(nk) >= 3:
                    self._index(nk)
                    touched |= set(self._pairs(nk))
        for k, c in rosenberg_penalty(a, b, z)._t.items():
            nc = self.t.get(k, 0) + c * weight
            if nc == 0:
                self.t.pop(k, None)
            else:
                self.t[k] = nc
        for p in touched:
            n = len(self.pair_terms.get(p, ()))
            if n:
                heapq.heappush(self.heap, (-n, p[0], p[1]))
        return weight


def reduce_to_quadratic(
    poly: Polynomial,
    registry: VariableRegistry,
    prefix: str = "red",
    group: str = "reduction",
) -> Qubo:
    """Rewrite ``poly`` to degree two with Rosenberg substitutions.

    The pair occurring in the most higher-order terms is replaced first
    (ties go to the lexicographically smallest pair).  Each substitution
    ``z = xy`` adds ``P * (xy - 2xz - 2yz + 3z)`` with ``P`` one more than the
    absolute coefficient mass of the terms containing the pair, which
    preserves the minimum and, after dropping ancillas, the set of minimizers.
    """
    if poly.degree <= 2:
        return Qubo(poly, ())
    red = _Reducer(poly)
    ledger: list[LedgerEntry] = []
    while True:
        pair = red.next_pair()
        if pair is None:
            break
        z = registry.fresh_anon(prefix, Role.ANCILLA, group)
        w = red.substitute(pair[0], pair[1], z)
        ledger.append(LedgerEntry(z, pair, w))
    return Qubo(Polynomial._raw(red.t), tuple(ledger))
