"""Breakpoint selection and run-time memory collection for failed tests.

Breakpoints are the Top-x% statements of a suspiciousness ranking, with
q = floor(l * x / 100).  Collection runs the failed test and records, per
executed breakpoint, one snapshot of every live variable (name, value
string, stack depth), ordered by the breakpoint's first execution and
holding post-final-execution values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyBreakpointError, MisclassifiedTestError
from .workbench.interp import DEFAULT_STEP_BUDGET, TestCase, run_test
from .workbench.lang import Program


@dataclass
class BreakpointSet:
    statements: list[int]  # descending suspiciousness

    @property
    def q(self) -> int:
        return len(self.statements)


@dataclass
class MemorySnapshot:
    breakpoint: int  # statement ID
    seq: int  # 1-based execution-order index
    entries: list[tuple[str, str, int]]  # (name, value, depth)


@dataclass
class MemoryTrace:
    test_id: str
    snapshots: list[MemorySnapshot]

    @property
    def m(self) -> int:
        return sum(len(s.entries) for s in self.snapshots)


def select_breakpoints(scores: list[float], x: float) -> BreakpointSet:
    """Top-x% statements by score, descending; ties broken by statement ID.

    ``scores[i]`` belongs to statement ``i + 1``.  Raises
    :class:`~pmsindex.errors.EmptyBreakpointError` when floor(l * x / 100)
    is zero.
    """
    if not 0 < x <= 100:
        raise EmptyBreakpointError(f"breakpoint percentage must be in (0, 100], got {x}")
    l = len(scores)
    q = math.floor(l * x / 100)
    if q < 1:
        raise EmptyBreakpointError(f"floor({l} * {x}%) = 0 breakpoints; raise x")
    order = sorted(range(l), key=lambda i: (-scores[i], i))
    return BreakpointSet(statements=[i + 1 for i in order[:q]])


def collect_memory(
    program: Program,
    test: TestCase,
    breakpoints: BreakpointSet,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> MemoryTrace:
    """Collect ordered memory snapshots while executing a failing test."""
    trace, raw = run_test(program, test, breakpoints=set(breakpoints.statements), step_budget=step_budget)
    if not trace.failed:
        raise MisclassifiedTestError(f"test {test.id!r} passed; memory is collected for failures")
    snapshots = [
        MemorySnapshot(breakpoint=sid, seq=j, entries=list(entries))
        for j, (sid, entries) in enumerate(raw, start=1)
    ]
    return MemoryTrace(test_id=test.id, snapshots=snapshots)
