"""Compile array search, bounds and sort problems into QUBOs and verify them."""

from .errors import (
    CapacityError,
    DuplicateLabelError,
    InconsistentStateError,
    QArrayError,
    WidthMismatchError,
)
from .poly import (
    LedgerEntry,
    Polynomial,
    Qubo,
    Role,
    VariableRegistry,
    clamp,
    evaluate,
    reduce_to_quadratic,
)
from .program import ArraySpec, Program, decode
from .search import build_array_assign, build_search
from .bounds import build_bounds, classical_bounds, decode_bounds
from .sort import build_sort, decode_permutation
from .solver import (
    AnnealSchedule,
    SolveResult,
    classify_states,
    eliminate_ground_states,
    enumerate_ground_states,
    simulated_anneal,
)

__version__ = "0.1.0"
