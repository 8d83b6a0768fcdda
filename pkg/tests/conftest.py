"""Shared oracles.

Everything here is deliberately naive: plain ``itertools.product`` over
assignments and direct term-by-term evaluation, so it shares no code path
with the numba kernels or the elimination solver it is used to check.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest


def term_value(terms, a):
    total = Fraction(0)
    for k, c in terms.items():
        if all(a[v] for v in k):
            total += c
    return total


def brute_force(poly, variables=None, clamp=None):
    """(min energy, list of minimizing assignments) by plain enumeration."""
    clamp = dict(clamp or {})
    terms = dict(poly.items())
    if variables is None:
        variables = sorted({v for k in terms for v in k} - set(clamp))
    variables = [v for v in variables if v not in clamp]
    best, states = None, []
    for bits in itertools.product((0, 1), repeat=len(variables)):
        a = dict(clamp)
        a.update(zip(variables, bits))
        e = term_value(terms, a)
        if best is None or e < best:
            best, states = e, [a]
        elif e == best:
            states.append(a)
    return best, states


def project(states, keep):
    return {tuple(a[v] for v in keep) for a in states}


def multiplicity_factorial_product(values):
    from collections import Counter
    from math import factorial, prod

    return prod(factorial(c) for c in Counter(values).values())


@pytest.fixture
def oracle():
    return brute_force


@pytest.fixture(autouse=True)
def _isolated_output(tmp_path, monkeypatch):
    monkeypatch.setenv("QARRAY_OUTPUT_DIR", str(tmp_path))


# -- acceptance summary ---------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
