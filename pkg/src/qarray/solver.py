"""Desk-scale solvers used to verify ground states.

* :func:`enumerate_ground_states` scans every assignment of the free
  variables in Gray-code order with single-flip energy deltas.
* :func:`eliminate_ground_states` is an exact min-sum variable elimination
  for instances with too many variables to scan but low treewidth.
* :func:`simulated_anneal` runs seeded Metropolis chains.

All three work on integer-scaled coefficients, so energies are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import CapacityError, QArrayError
from .poly import Assignment, Polynomial, Qubo

DEFAULT_LIMIT = 24


@dataclass
class Sample:
    assignment: dict[int, int]
    energy: Fraction
    multiplicity: int


@dataclass
class SolveResult:
    ground_energy: Fraction
    ground_states: list[dict[int, int]]
    ground_count: int
    method: str  # exhaustive | eliminated | annealed
    exhausted: bool
    variables: list[int] = field(default_factory=list)
    samples: list[Sample] | None = None


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric inverse-temperature schedule.

    Unset betas are derived from the problem: hot enough that the largest
    single flip is accepted half the time, cold enough that the smallest
    non-zero coefficient is accepted once in a hundred.
    """

    sweeps: int = 1000
    reads: int = 100
    beta_start: float | None = None
    beta_end: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.reads < 1 or self.sweeps < 1:
            raise QArrayError("reads and sweeps must be >= 1")
        for b in (self.beta_start, self.beta_end):
            if b is not None and b <= 0:
                raise QArrayError("betas must be positive")
        if self.beta_start is not None and self.beta_end is not None \
                and not self.beta_start < self.beta_end:
            raise QArrayError("beta_start must be below beta_end")


# ---------------------------------------------------------------------------
# Integer scaling


def _as_poly(h: Polynomial | Qubo) -> Polynomial:
    return h.base if isinstance(h, Qubo) else h


def _scale_factor(poly: Polynomial) -> int:
    return reduce(math.lcm, (Fraction(c).denominator for _, c in poly.items()), 1)


class _Scaled:
    """Integer coefficients of a polynomial over a fixed variable order."""

    def __init__(self, poly: Polynomial, variables: Sequence[int]):
        self.variables = list(variables)
        pos = {v: k for k, v in enumerate(self.variables)}
        self.scale = _scale_factor(poly)
        self.offset = 0
        self.terms: list[tuple[tuple[int, ...], int]] = []
        mass = 0
        for k, c in poly.items():
            ic = int(Fraction(c) * self.scale)
            mass += abs(ic)
            if not k:
                self.offset = ic
            else:
                self.terms.append((tuple(pos[v] for v in k), ic))
        if mass >= 2 ** 62:
            raise CapacityError("coefficients too large for exact 64-bit enumeration")
        self.degree = max((len(t) for t, _ in self.terms), default=0)

    def csr(self):
        if self.degree > 2:
            raise QArrayError("CSR form needs a quadratic polynomial")
        n = len(self.variables)
        lin = np.zeros(n, np.int64)
        nbrs: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for t, c in self.terms:
            if len(t) == 1:
                lin[t[0]] += c
            else:
                i, j = t
                nbrs[i].append((j, c))
                nbrs[j].append((i, c))
        ptr = np.zeros(n + 1, np.int64)
        for i in range(n):
            ptr[i + 1] = ptr[i] + len(nbrs[i])
        idx = np.array([j for row in nbrs for j, _ in row], np.int64)
        w = np.array([c for row in nbrs for _, c in row], np.int64)
        return lin, ptr, idx, w

    def energy(self, scaled: int) -> Fraction:
        return Fraction(scaled, self.scale)

    def evaluate_block(self, X: np.ndarray) -> np.ndarray:
        """Scaled energies (without offset) of the 0/1 rows of ``X``."""
        e = np.zeros(X.shape[0], np.int64)
        for t, c in self.terms:
            col = X[:, t[0]].astype(np.int64)
            for p in t[1:]:
                col = col * X[:, p]
            e += c * col
        return e


def _free_variables(poly: Polynomial, clamp: Mapping[int, int],
                    variables: Iterable[int] | None) -> list[int]:
    base = set(poly.support()) if variables is None else set(variables)
    return sorted(base - set(clamp))


def _mask_to_assignment(mask: int, free: Sequence[int], clamp: Mapping[int, int]) -> dict[int, int]:
    a = dict(clamp)
    for k, v in enumerate(free):
        a[v] = (mask >> k) & 1
    return a


def _lex_key(a: Mapping[int, int], free: Sequence[int]):
    return tuple(a[v] for v in free)


def state_block(start: int, size: int, n: int) -> np.ndarray:
    """Rows ``start .. start+size-1`` of the binary counting table (LSB = column 0)."""
    k = np.arange(start, start + size, dtype=np.int64)
    return ((k[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int8)


# ---------------------------------------------------------------------------
# Exhaustive enumeration


def enumerate_ground_states(
    h: Polynomial | Qubo,
    clamp: Mapping[int, int] | None = None,
    cap: int = 1024,
    limit: int = DEFAULT_LIMIT,
    variables: Iterable[int] | None = None,
) -> SolveResult:
    """Exact minimum and minimizers over every assignment of the free variables.

    ``variables`` defaults to the polynomial's support; clamped variables are
    fixed and reported in every ground state.  At most ``cap`` minimizers are
    returned (sorted lexicographically by variable id), while
    ``ground_count`` is always the exact number of minimizers.
    """
    clamp = dict(clamp or {})
    poly = _as_poly(h)
    free = _free_variables(poly, clamp, variables)
    if len(free) > limit:
        raise CapacityError(
            f"{len(free)} free variables exceed the exhaustive limit of {limit}; "
            "clamp more variables, use elimination, or anneal"
        )
    reduced = poly.clamp(clamp)
    sc = _Scaled(reduced, free)
    if sc.degree <= 2:
        lin, ptr, idx, w = sc.csr()
        best, count, masks = _kernels.gray_scan(lin, ptr, idx, w, np.int64(sc.offset), cap)
        masks = [int(m) for m in masks]
        best, count = int(best), int(count)
    else:
        best, count, masks = _scan_general(sc, len(free), cap)
    states = sorted((_mask_to_assignment(m, free, clamp) for m in masks),
                    key=lambda a: _lex_key(a, free))
    return SolveResult(sc.energy(best), states[:cap], count, "exhaustive", True, free)


def _scan_general(sc: _Scaled, n: int, cap: int, block: int = 1 << 16):
    best = None
    count = 0
    masks: list[int] = []
    total = 1 << n
    for start in range(0, total, block):
        size = min(block, total - start)
        e = sc.evaluate_block(state_block(start, size, n)) + sc.offset
        m = int(e.min())
        hits = np.flatnonzero(e == m)
        if best is None or m < best:
            best, count, masks = m, 0, []
        if m == best:
            count += len(hits)
            room = cap - len(masks)
            masks.extend(int(start + k) for k in hits[:max(room, 0)])
    return best, count, masks


def ground_set(h: Polynomial | Qubo, clamp: Mapping[int, int] | None = None,
               variables: Iterable[int] | None = None, limit: int = DEFAULT_LIMIT):
    """(energy, set of ground-state tuples over ``variables``) without a cap."""
    clamp = dict(clamp or {})
    poly = _as_poly(h)
    free = _free_variables(poly, clamp, variables)
    r = enumerate_ground_states(poly, clamp, cap=1 << len(free), limit=limit, variables=free)
    return r


# ---------------------------------------------------------------------------
# Variable elimination


class _Factor:
    __slots__ = ("scope", "val", "cnt")

    def __init__(self, scope: tuple[int, ...], val: np.ndarray, cnt: np.ndarray | None):
        self.scope = scope
        self.val = val
        self.cnt = cnt


def _expand(f: _Factor, union: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray | None]:
    shape = [2 if v in f.scope else 1 for v in union]
    val = f.val.reshape(shape)
    cnt = None if f.cnt is None else f.cnt.reshape(shape)
    return val, cnt


def _elimination_order(scopes: list[set[int]], free: Sequence[int]) -> list[int]:
    adj: dict[int, set[int]] = {v: set() for v in free}
    for s in scopes:
        for v in s:
            adj[v] |= s - {v}
    order = []
    remaining = set(free)
    while remaining:
        v = min(remaining, key=lambda u: (len(adj[u]), u))
        nb = adj[v]
        for a in nb:
            adj[a] |= nb - {a}
            adj[a].discard(v)
        order.append(v)
        remaining.discard(v)
        del adj[v]
    return order


def eliminate_ground_states(
    h: Polynomial | Qubo,
    clamp: Mapping[int, int] | None = None,
    cap: int = 1024,
    max_width: int = 20,
    variables: Iterable[int] | None = None,
) -> SolveResult:
    """Exact ground energy, exact degeneracy and up to ``cap`` minimizers.

    Buckets are eliminated in greedy min-degree order; every bucket keeps its
    combined table so minimizers can be recovered by back-substitution.  The
    reported energy and count are exact for any instance whose induced width
    stays within ``max_width``.
    """
    clamp = dict(clamp or {})
    poly = _as_poly(h)
    free = _free_variables(poly, clamp, variables)
    reduced = poly.clamp(clamp)
    sc = _Scaled(reduced, free)

    factors: list[_Factor] = []
    by_scope: dict[tuple[int, ...], list[tuple[tuple[int, ...], int]]] = {}
    for t, c in sc.terms:
        scope = tuple(sorted(free[p] for p in t))
        by_scope.setdefault(scope, []).append((scope, c))
    for scope, items in by_scope.items():
        val = np.zeros((2,) * len(scope), np.int64)
        for _, c in items:
            idx = (1,) * len(scope)
            val[idx] += c
        # a monomial only contributes when all its variables are 1
        factors.append(_Factor(scope, val, None))
    order = _elimination_order([set(f.scope) for f in factors], free)

    buckets = []
    active = factors
    for v in order:
        mine = [f for f in active if v in f.scope]
        active = [f for f in active if v not in f.scope]
        union = tuple(sorted(set().union(*(f.scope for f in mine)) | {v}))
        if len(union) > max_width:
            raise CapacityError(f"elimination width {len(union)} exceeds {max_width}")
        val = np.zeros((2,) * len(union), np.int64)
        cnt = np.ones((2,) * len(union), dtype=object)
        for f in mine:
            fv, fc = _expand(f, union)
            val = val + fv
            if fc is not None:
                cnt = cnt * fc
        ax = union.index(v)
        m = val.min(axis=ax, keepdims=True)
        hit = val == m
        msg_cnt = np.where(hit, cnt, 0).sum(axis=ax)
        rest = tuple(u for u in union if u != v)
        buckets.append((v, union, val, m))
        active.append(_Factor(rest, m.reshape((2,) * len(rest)), np.asarray(msg_cnt, dtype=object).reshape((2,) * len(rest))))

    best = sc.offset
    count = 1
    for f in active:
        best += int(f.val.reshape(-1)[0])
        if f.cnt is not None:
            count *= int(f.cnt.reshape(-1)[0])

    states: list[dict[int, int]] = []

    def backtrack(k: int, a: dict[int, int]) -> None:
        if len(states) >= cap:
            return
        if k < 0:
            full = dict(clamp)
            full.update(a)
            states.append(full)
            return
        v, union, val, m = buckets[k]
        index = [a[u] if u != v else slice(None) for u in union]
        ax = union.index(v)
        mi = [a[u] if u != v else 0 for u in union]
        target = m[tuple(mi)]
        column = val[tuple(index)]
        for bit in (0, 1):
            if column[bit] == target:
                a[v] = bit
                backtrack(k - 1, a)
                del a[v]

    backtrack(len(buckets) - 1, {})
    states.sort(key=lambda a: _lex_key(a, free))
    return SolveResult(sc.energy(best), states, count, "eliminated", True, free)


# ---------------------------------------------------------------------------
# Simulated annealing


def simulated_anneal(
    q: Qubo | Polynomial,
    schedule: AnnealSchedule = AnnealSchedule(),
    clamp: Mapping[int, int] | None = None,
    variables: Iterable[int] | None = None,
) -> SolveResult:
    clamp = dict(clamp or {})
    poly = _as_poly(q)
    free = _free_variables(poly, clamp, variables)
    sc = _Scaled(poly.clamp(clamp), free)
    lin, ptr, idx, w = sc.csr()
    n = len(free)

    if n == 0:
        e = sc.energy(sc.offset)
        a = dict(clamp)
        return SolveResult(e, [a], 1, "annealed", False, free,
                           [Sample(a, e, schedule.reads)])

    coeffs = np.abs(np.concatenate([lin, w])).astype(float) / sc.scale
    nz = coeffs[coeffs > 0]
    max_delta = max((abs(lin[i]) + np.abs(w[ptr[i]:ptr[i + 1]]).sum()) / sc.scale for i in range(n))
    b0 = schedule.beta_start or (math.log(2) / max_delta if max_delta > 0 else 1.0)
    b1 = schedule.beta_end or (math.log(100) / nz.min() if nz.size else 1.0)
    if b1 <= b0:
        b1 = b0 * 10
    betas = np.geomspace(b0, b1, schedule.sweeps) / sc.scale
    seeds = np.random.SeedSequence(schedule.seed).generate_state(schedule.reads).astype(np.int64)
    xs, es = _kernels.anneal(lin, ptr, idx, w, np.int64(sc.offset), betas, seeds)

    hist: dict[tuple[int, ...], int] = {}
    for row in xs:
        key = tuple(int(b) for b in row)
        hist[key] = hist.get(key, 0) + 1
    samples = []
    for key, mult in hist.items():
        a = dict(clamp)
        a.update(zip(free, key))
        # re-score exactly at the decision boundary
        samples.append(Sample(a, poly.evaluate(a), mult))
    samples.sort(key=lambda s: (s.energy, _lex_key(s.assignment, free)))
    best = samples[0].energy
    ground = [s.assignment for s in samples if s.energy == best]
    return SolveResult(best, ground, len(ground), "annealed", False, free, samples)


def incremental_energies(poly: Polynomial, start: Mapping[int, int], flips: Sequence[int]) -> list[Fraction]:
    """Energies along a flip sequence computed by the delta kernel."""
    free = poly.support()
    sc = _Scaled(poly, free)
    lin, ptr, idx, w = sc.csr()
    pos = {v: k for k, v in enumerate(free)}
    x0 = np.array([start[v] for v in free], np.int8)
    fl = np.array([pos[v] for v in flips], np.int64)
    out = _kernels.flip_trajectory(x0, fl, lin, ptr, idx, w, np.int64(sc.offset))
    return [sc.energy(int(e)) for e in out]


# ---------------------------------------------------------------------------
# State classification


CLASSES = ("valid_found", "valid_not_found", "invalid")


def classify_states(program, clamp: Mapping[int, int] | None = None,
                    limit: int = 22) -> dict:
    """Minimum energy of each class of assignments of a search program.

    ``valid_found``: logic consistent, ``not_found = 0`` and exactly one
    ``I_i * V_i`` active.  ``valid_not_found``: logic consistent,
    ``not_found = 1`` and no product active.  Everything else is
    ``invalid``.  Empty classes map to ``None``.
    """
    if getattr(program, "not_found", None) is None:
        raise QArrayError("classification needs a search program with a not_found flag")
    clamp = dict(program.clamp if clamp is None else clamp)
    qubo = program.qubo
    free = sorted(set(range(len(program.registry))) - set(clamp))
    if len(free) > limit:
        raise CapacityError(f"{len(free)} free variables exceed the classification limit {limit}")
    pos = {v: k for k, v in enumerate(free)}

    energy = _Scaled(qubo.base.clamp(clamp), free)
    logic = [_Scaled(p.clamp(clamp), free) for p in program.logic]

    def column(X, v):
        if v in clamp:
            return np.full(X.shape[0], clamp[v], np.int64)
        return X[:, pos[v]].astype(np.int64)

    mins: dict[str, int | None] = {c: None for c in CLASSES}
    counts = {c: 0 for c in CLASSES}
    total = 1 << len(free)
    block = 1 << 16
    for start in range(0, total, block):
        size = min(block, total - start)
        X = state_block(start, size, len(free))
        e = energy.evaluate_block(X) + energy.offset
        valid = np.ones(size, bool)
        for lg in logic:
            valid &= (lg.evaluate_block(X) + lg.offset) == 0
        for entry in qubo.ledger:
            x, y = entry.replaces
            valid &= column(X, entry.ancilla) == (column(X, x) & column(X, y))
        prods = np.zeros(size, np.int64)
        for i, v in zip(program.match_flags, program.value_flags):
            prods += column(X, i) & column(X, v)
        nf = column(X, program.not_found)
        cls = {
            "valid_found": valid & (nf == 0) & (prods == 1),
            "valid_not_found": valid & (nf == 1) & (prods == 0),
        }
        cls["invalid"] = ~(cls["valid_found"] | cls["valid_not_found"])
        for name, mask in cls.items():
            if mask.any():
                m = int(e[mask].min())
                counts[name] += int(mask.sum())
                if mins[name] is None or m < mins[name]:
                    mins[name] = m
    return {
        "minima": {c: (None if m is None else energy.energy(m)) for c, m in mins.items()},
        "counts": counts,
    }
