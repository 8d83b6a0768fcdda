"""qbsolv-style ``.qubo`` text files and the ``.varmap.json`` sidecar.

File layout::

    c <free-form comment>
    c offset <constant>
    p qubo 0 <n_vars> <n_diagonal> <n_offdiagonal>
    i i <linear coefficient>
    i j <quadratic coefficient>     (i < j)

Coefficients are written as exact decimals, so only rationals whose
denominator divides a power of ten can be emitted.
"""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .errors import QArrayError
from .poly import LedgerEntry, Polynomial, Qubo


def exact_decimal(c) -> str:
    c = Fraction(c)
    d = c.denominator
    k2 = k5 = 0
    while d % 2 == 0:
        d //= 2
        k2 += 1
    while d % 5 == 0:
        d //= 5
        k5 += 1
    if d != 1:
        raise QArrayError(f"{c} has no finite decimal expansion")
    k = max(k2, k5)
    scaled = c.numerator * (10 ** k // c.denominator)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(k + 1, "0")
    if k == 0:
        return sign + digits
    whole, frac = digits[:-k], digits[-k:].rstrip("0")
    return sign + whole + ("." + frac if frac else "")


def emit_qubo(q: Qubo | Polynomial, n_vars: int | None = None,
              comments: Iterable[str] = ()) -> str:
    base = q.base if isinstance(q, Qubo) else q
    if base.degree > 2:
        raise QArrayError("only quadratic polynomials can be written as QUBO files")
    terms = base.terms
    diag = sorted((k[0], c) for k, c in terms.items() if len(k) == 1)
    off = sorted((k, c) for k, c in terms.items() if len(k) == 2)
    if n_vars is None:
        n_vars = max(base.support(), default=-1) + 1
    lines = [f"c {line}" for line in comments]
    lines.append(f"c offset {exact_decimal(base.offset)}")
    lines.append(f"p qubo 0 {n_vars} {len(diag)} {len(off)}")
    lines += [f"{i} {i} {exact_decimal(c)}" for i, c in diag]
    lines += [f"{i} {j} {exact_decimal(c)}" for (i, j), c in off]
    return "\n".join(lines) + "\n"


def parse_qubo(text: str) -> tuple[Polynomial, int]:
    """Return the polynomial and the declared variable count."""
    terms: dict[tuple[int, ...], Fraction] = {}
    offset = Fraction(0)
    header = None
    n_lines = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) >= 3 and parts[1] == "offset":
                offset = Fraction(parts[2])
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 6 or parts[1] != "qubo":
                raise QArrayError(f"line {lineno}: malformed header {line!r}")
            header = tuple(int(p) for p in parts[2:])
            continue
        if header is None:
            raise QArrayError(f"line {lineno}: term before the 'p qubo' header")
        try:
            i, j, c = line.split()
            i, j, c = int(i), int(j), Fraction(c)
        except ValueError:
            raise QArrayError(f"line {lineno}: malformed term {line!r}") from None
        if i > j:
            i, j = j, i
        key = (i,) if i == j else (i, j)
        terms[key] = terms.get(key, 0) + c
        n_lines += 1
    if header is None:
        raise QArrayError("missing 'p qubo' header")
    _, n_vars, n_diag, n_off = header
    if n_lines != n_diag + n_off:
        raise QArrayError(f"header promises {n_diag + n_off} terms, found {n_lines}")
    return Polynomial(terms, offset), n_vars


def atomic_write(path: str | os.PathLike, data: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_program(program, prefix: str | os.PathLike, fold: bool = False) -> tuple[Path, Path]:
    """Write ``<prefix>.qubo`` and ``<prefix>.varmap.json``.

    With ``fold`` the known values are substituted into the QUBO before
    writing; the varmap always records them so the solver can decode.
    """
    prefix = Path(prefix)
    qpath = prefix.with_name(prefix.name + ".qubo")
    vpath = prefix.with_name(prefix.name + ".varmap.json")
    base = program.qubo.base.clamp(program.clamp) if fold else program.qubo.base
    text = emit_qubo(base, len(program.registry),
                     comments=[f"qarray {program.kind} program", "bits are LSB-first; indices 0-based"])
    vm = program.varmap()
    vm["folded"] = fold
    atomic_write(qpath, text)
    atomic_write(vpath, dump_json(vm))
    return qpath, vpath


def read_program_files(qubo_path: str | os.PathLike, varmap_path: str | os.PathLike | None = None):
    """Load a QUBO file and its sidecar: (Qubo with ledger, varmap dict)."""
    qubo_path = Path(qubo_path)
    if varmap_path is None:
        stem = qubo_path.name[:-5] if qubo_path.name.endswith(".qubo") else qubo_path.name
        varmap_path = qubo_path.with_name(stem + ".varmap.json")
    poly, _ = parse_qubo(qubo_path.read_text())
    vm = json.loads(Path(varmap_path).read_text())
    ledger = tuple(LedgerEntry.from_json(r) for r in vm.get("ledger", []))
    return Qubo(poly, ledger), vm
