"""Resource accounting and scaling sweeps.

"Connectivity" is the number of distinct variables a variable shares a
quadratic QUBO term with.  Array storage bits (group ``A``) are counted
separately so that search machinery can be reported without them.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import QArrayError
from .poly import Polynomial, Role, VariableRegistry
from .program import ArraySpec, Program

BUILDERS = ("search_basic", "search_sum", "search_or", "count", "bounds", "sort")


@dataclass
class ResourceReport:
    total_vars: int = 0
    input_vars: int = 0
    derived_vars: int = 0
    ancilla_vars: int = 0
    array_vars: int = 0
    machinery_vars: int = 0
    term_count: int = 0
    max_degree: int = 0
    degree_histogram: dict[int, int] = field(default_factory=dict)
    degrees: dict[int, int] = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("degrees")
        d["degree_histogram"] = {str(k): v for k, v in sorted(self.degree_histogram.items())}
        return d


def adjacency(poly: Polynomial) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {}
    for k, _ in poly.items():
        for v in k:
            adj.setdefault(v, set())
        if len(k) == 2:
            a, b = k
            adj[a].add(b)
            adj[b].add(a)
        elif len(k) > 2:
            raise QArrayError("adjacency is defined for quadratic polynomials only")
    return adj


def resource_report(program: Program | None) -> ResourceReport:
    if program is None:
        return ResourceReport()
    reg = program.registry
    adj = adjacency(program.qubo.base)
    degrees = {e.id: len(adj.get(e.id, ())) for e in reg}
    roles = Counter(e.role for e in reg)
    array = sum(1 for e in reg if e.group == "A")
    return ResourceReport(
        total_vars=len(reg),
        input_vars=roles[Role.INPUT],
        derived_vars=roles[Role.DERIVED],
        ancilla_vars=roles[Role.ANCILLA],
        array_vars=array,
        machinery_vars=len(reg) - array,
        term_count=program.qubo.base.term_count(),
        max_degree=max(degrees.values(), default=0),
        degree_histogram=dict(sorted(Counter(degrees.values()).items())),
        degrees=degrees,
    )


def degree_histogram_compare(a: ResourceReport, b: ResourceReport, threshold: int = 8) -> dict:
    buckets = sorted(set(a.degree_histogram) | set(b.degree_histogram))
    return {
        "buckets": {
            str(d): {"a": a.degree_histogram.get(d, 0), "b": b.degree_histogram.get(d, 0),
                     "diff": b.degree_histogram.get(d, 0) - a.degree_histogram.get(d, 0)}
            for d in buckets
        },
        "threshold": threshold,
        "above_threshold": {
            "a": sum(c for d, c in a.degree_histogram.items() if d > threshold),
            "b": sum(c for d, c in b.degree_histogram.items() if d > threshold),
        },
        "max_degree": {"a": a.max_degree, "b": b.max_degree},
    }


def build(builder: str, n: int, kv: int, **kw) -> Program:
    from .bounds import build_bounds
    from .search import build_search
    from .sort import build_sort

    if builder == "search_basic":
        return build_search(n, kv, "basic", **kw)
    if builder == "search_sum":
        return build_search(n, kv, "summation", **kw)
    if builder == "search_or":
        return build_search(n, kv, "logical_or", **kw)
    if builder == "count":
        return build_search(n, kv, "count", **kw)
    if builder == "bounds":
        return build_bounds(n, kv, **kw)
    if builder == "sort":
        return build_sort(n, kv, **kw)
    raise QArrayError(f"unknown builder {builder!r}")


@dataclass
class SweepRow:
    builder: str
    variant: str
    n: int
    kv: int
    total_vars: int | None = None
    ancilla_vars: int | None = None
    max_degree: int | None = None
    term_count: int | None = None
    build_millis: float | None = None
    machinery_vars: int | None = None
    error: str = ""


SWEEP_COLUMNS = ["builder", "variant", "n", "kv", "total_vars", "ancilla_vars", "max_degree",
                 "term_count", "build_millis", "machinery_vars", "error"]


def sweep(builder: str, ns: Sequence[int], kv: int) -> list[SweepRow]:
    """Build one program per ``n`` (no solving); failures are kept in-row."""
    if not ns:
        raise QArrayError("sweep needs at least one array size")
    if builder not in BUILDERS:
        raise QArrayError(f"unknown builder {builder!r}")
    variant = {"search_basic": "basic", "search_sum": "summation",
               "search_or": "logical_or"}.get(builder, "")
    rows = []
    for n in ns:
        row = SweepRow(builder, variant, n, kv)
        t0 = time.perf_counter()
        try:
            rep = resource_report(build(builder, n, kv))
        except Exception as exc:  # recorded per point, the sweep carries on
            row.error = f"{type(exc).__name__}: {exc}"
        else:
            row.build_millis = round((time.perf_counter() - t0) * 1000, 3)
            row.total_vars = rep.total_vars
            row.ancilla_vars = rep.ancilla_vars
            row.max_degree = rep.max_degree
            row.term_count = rep.term_count
            row.machinery_vars = rep.machinery_vars
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Least squares


@dataclass
class Fit:
    model: str
    coefficients: list[Fraction]  # highest power first
    r_squared: Fraction

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "coefficients": [float(c) for c in self.coefficients],
            "r_squared": float(self.r_squared),
        }


def _solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise QArrayError("degenerate least-squares system")
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][n] / M[i][i] for i in range(n)]


def fit(model: str, points: Iterable[tuple[float, float]]) -> Fit:
    """Ordinary least squares solved exactly on rationalised data."""
    pts = [(Fraction(x), Fraction(y)) for x, y in points]
    deg = {"linear": 1, "quadratic": 2}.get(model)
    if deg is None:
        raise QArrayError(f"unknown model {model!r}")
    need = deg + 2
    if len(pts) < need or len({x for x, _ in pts}) < deg + 1:
        raise QArrayError(f"{model} fit needs at least {need} points with distinct abscissae")
    powers = list(range(deg, -1, -1))
    rows = [[x ** p for p in powers] for x, _ in pts]
    ys = [y for _, y in pts]
    k = len(powers)
    ata = [[sum(r[i] * r[j] for r in rows) for j in range(k)] for i in range(k)]
    aty = [sum(r[i] * y for r, y in zip(rows, ys)) for i in range(k)]
    beta = _solve_exact(ata, aty)
    mean = sum(ys) / len(ys)
    ss_tot = sum((y - mean) ** 2 for y in ys)
    ss_res = sum((y - sum(c * v for c, v in zip(beta, r))) ** 2 for r, y in zip(rows, ys))
    r2 = Fraction(1) if ss_tot == 0 else 1 - ss_res / ss_tot
    return Fit(model, beta, r2)


# ---------------------------------------------------------------------------
# Term counts of individual blocks


def block_term_counts(n: int, kv: int) -> dict[str, int]:
    """Non-constant terms in the basic search block, the mapping block and the
    (reduced) copy block for arrays of ``n`` elements of ``kv`` bits."""
    from .search import h_search_basic
    from .sort import h_assign, h_mapping

    reg = VariableRegistry()
    I = [reg.fresh_var(f"I[{i}]", Role.DERIVED) for i in range(n)]
    V = [reg.fresh_var(f"V[{i}]", Role.DERIVED) for i in range(n)]
    search = h_search_basic(I, V)
    A = ArraySpec.allocate(reg, n, kv, "A")
    B = ArraySpec.allocate(reg, n, kv, "B")
    M = [[reg.fresh_var(f"M[{i}][{j}]", Role.INPUT) for j in range(n)] for i in range(n)]
    copy, _, _ = h_assign(M, A, B, reg)
    return {
        "search": search.term_count(),
        "mapping": h_mapping(M).term_count(),
        "assign": copy.term_count(),
    }


def doubling_ratios(counter: Callable[[int], int], ns: Sequence[int]) -> list[float]:
    vals = [counter(n) for n in ns]
    return [vals[i + 1] / vals[i] for i in range(len(vals) - 1)]
