import random
from fractions import Fraction

import pytest

from qarray.errors import QArrayError
from qarray.poly import Polynomial
from qarray.qubofile import (
    emit_qubo,
    exact_decimal,
    parse_qubo,
    read_program_files,
    write_program,
)
from qarray.sort import build_sort


@pytest.mark.parametrize("c, text", [(0, "0"), (5, "5"), (-3, "-3"), (Fraction(1, 2), "0.5"),
                                     (Fraction(-3, 8), "-0.375"), (Fraction(41, 20), "2.05")])
def test_exact_decimal(c, text):
    assert exact_decimal(c) == text
    assert Fraction(text) == c


def test_exact_decimal_rejects_thirds():
    with pytest.raises(QArrayError):
        exact_decimal(Fraction(1, 3))


def random_qubo(rng, n):
    t = {}
    for _ in range(rng.randint(0, 3 * n)):
        i, j = rng.randrange(n), rng.randrange(n)
        k = (i,) if i == j else (min(i, j), max(i, j))
        t[k] = Fraction(rng.randint(-40, 40), rng.choice([1, 2, 4, 5, 8]))
    return Polynomial(t, Fraction(rng.randint(-9, 9), 2))


@pytest.mark.parametrize("seed", range(100))
def test_roundtrip(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 12)
    q = random_qubo(rng, n)
    back, nv = parse_qubo(emit_qubo(q, n))
    assert back == q and nv == n


def test_header_and_layout():
    x, y = Polynomial.var(0), Polynomial.var(1)
    text = emit_qubo(2 * x - y + 3 * x * y + Fraction(1, 2), 3, comments=["demo"])
    assert text.splitlines() == [
        "c demo",
        "c offset 0.5",
        "p qubo 0 3 2 1",
        "0 0 2",
        "1 1 -1",
        "0 1 3",
    ]


@pytest.mark.parametrize("text", [
    "0 0 1\n",
    "p qubo 0 2 1 0\n0 0 1\n1 1 1\n",
    "p qubo 0 2\n",
    "p qubo 0 2 1 0\n0 x 1\n",
])
def test_parse_errors(text):
    with pytest.raises(QArrayError):
        parse_qubo(text)


def test_emit_rejects_cubic():
    x, y, z = (Polynomial.var(i) for i in range(3))
    with pytest.raises(QArrayError):
        emit_qubo(x * y * z)


@pytest.mark.parametrize("fold", [False, True])
def test_program_files(tmp_path, fold):
    p = build_sort(2, 1, [1, 0])
    qpath, vpath = write_program(p, tmp_path / "s", fold=fold)
    q, vm = read_program_files(qpath)
    expect = p.qubo.base.clamp(p.clamp) if fold else p.qubo.base
    assert q.base == expect
    assert q.ledger == p.qubo.ledger
    assert vm["folded"] is fold and vm["kind"] == "sort"
    assert len(vm["variables"]) == len(p.registry)
    assert not list(tmp_path.glob(".*"))  # no temp files left behind
