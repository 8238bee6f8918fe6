"""Tree-walking interpreter with coverage counting and breakpoint capture.

Execution semantics relevant to downstream consumers:

* every executed statement bumps its hit count (``if``/``while`` headers on
  every condition evaluation);
* a configurable step budget guards against nonterminating mutants;
* when a statement in the breakpoint set finishes executing, the full
  variable state of every live stack frame is captured (outermost frame
  first, declaration order within a frame, each entry tagged with its
  frame depth, entry frame = depth 1).  A breakpoint executed several
  times keeps one capture: positioned at its first execution, holding the
  values observed after its last execution.  Statements containing calls
  capture after the whole statement completes; execution never descends
  into callees to collect.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import DataError, NonterminatingRunError, ToyRuntimeError
from .lang import (
    Assign,
    Binary,
    BoolLit,
    BUILTINS,
    Call,
    Expr,
    ExprStmt,
    If,
    IntLit,
    Print,
    Program,
    Return,
    Stmt,
    StrLit,
    Ternary,
    Unary,
    Var,
    While,
)

Value = int | str | bool
RawSnapshot = tuple[int, list[tuple[str, str, int]]]  # (statement ID, entries)

DEFAULT_STEP_BUDGET = 1_000_000


def render_value(v: Value) -> str:
    """Canonical string form: ints base-10, booleans true/false, strings verbatim."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return v


@dataclass
class TestCase:
    __test__ = False  # domain type, not a pytest class

    id: str
    inputs: dict[str, Value]
    expected_output: str


@dataclass
class TestTrace:
    """Per-test execution record."""

    __test__ = False  # domain type, not a pytest class

    test_id: str
    outcome: str  # "failed" | "passed"
    hit_counts: dict[int, int]
    output: str

    @property
    def failed(self) -> bool:
        return self.outcome == "failed"


@dataclass
class RunResult:
    output: str
    hit_counts: dict[int, int]
    snapshots: list[RawSnapshot]
    fault: str | None = None  # diagnostic when a runtime fault occurred


class _ReturnSignal(Exception):
    def __init__(self, value: Value):
        self.value = value


@dataclass
class _Frame:
    function: str
    vars: dict[str, Value] = field(default_factory=dict)


class Interpreter:
    """Single-threaded interpreter for one program; instances are independent."""

    def __init__(
        self,
        program: Program,
        step_budget: int = DEFAULT_STEP_BUDGET,
        breakpoints: frozenset[int] | set[int] | None = None,
    ):
        self.program = program
        self.step_budget = step_budget
        self.breakpoints = frozenset(breakpoints or ())
        self.steps = 0
        self.hit_counts: dict[int, int] = {}
        self.frames: list[_Frame] = []
        self.out_lines: list[str] = []
        self._bp_order: list[int] = []
        self._bp_capture: dict[int, list[tuple[str, str, int]]] = {}

    # -- program execution ------------------------------------------------

    def run(self, inputs: dict[str, Value]) -> RunResult:
        entry = self.program.functions.get(self.program.entry)
        if entry is None:
            raise DataError(f"missing entry function {self.program.entry!r}")
        missing = [p for p in entry.params if p not in inputs]
        if missing:
            raise DataError(f"missing input(s) {missing} for entry {entry.name!r}")
        args = [inputs[p] for p in entry.params]
        fault = None
        try:
            self._call(entry.name, args)
        except ToyRuntimeError as exc:
            fault = str(exc)
        snapshots = [(sid, self._bp_capture[sid]) for sid in self._bp_order]
        return RunResult(
            output="\n".join(self.out_lines),
            hit_counts=dict(self.hit_counts),
            snapshots=snapshots,
            fault=fault,
        )

    def _call(self, name: str, args: list[Value]) -> Value:
        fn = self.program.functions.get(name)
        if fn is None:
            raise ToyRuntimeError(f"undefined function {name!r}")
        if len(args) != len(fn.params):
            raise ToyRuntimeError(f"{name!r} expects {len(fn.params)} argument(s), got {len(args)}")
        frame = _Frame(function=name, vars=dict(zip(fn.params, args)))
        self.frames.append(frame)
        try:
            self._exec_block(fn.body)
        except _ReturnSignal as sig:
            return sig.value
        finally:
            self.frames.pop()
        return 0  # fall-through without return

    def _exec_block(self, stmts: list[Stmt]) -> None:
        for stmt in stmts:
            self._exec_stmt(stmt)

    def _tick(self, stmt: Stmt) -> None:
        self.steps += 1
        if self.steps > self.step_budget:
            raise NonterminatingRunError(f"step budget of {self.step_budget} exceeded")
        self.hit_counts[stmt.sid] = self.hit_counts.get(stmt.sid, 0) + 1

    def _capture(self, sid: int) -> None:
        entries: list[tuple[str, str, int]] = []
        for depth, frame in enumerate(self.frames, start=1):
            for name, value in frame.vars.items():
                entries.append((name, render_value(value), depth))
        if sid not in self._bp_capture:
            self._bp_order.append(sid)
        self._bp_capture[sid] = entries

    def _exec_stmt(self, stmt: Stmt) -> None:
        self._tick(stmt)
        if isinstance(stmt, Assign):
            self.frames[-1].vars[stmt.name] = self._eval(stmt.value)
            self._after(stmt)
        elif isinstance(stmt, Print):
            self.out_lines.append(render_value(self._eval(stmt.value)))
            self._after(stmt)
        elif isinstance(stmt, ExprStmt):
            self._eval(stmt.call)
            self._after(stmt)
        elif isinstance(stmt, Return):
            value: Value = 0 if stmt.value is None else self._eval(stmt.value)
            self._after(stmt)  # capture before the frame pops
            raise _ReturnSignal(value)
        elif isinstance(stmt, If):
            cond = self._require_bool(self._eval(stmt.cond), "if condition")
            self._after(stmt)  # header done: condition evaluated
            if cond:
                self._exec_block(stmt.then)
            elif stmt.other is not None:
                self._exec_block(stmt.other)
        elif isinstance(stmt, While):
            while True:
                cond = self._require_bool(self._eval(stmt.cond), "while condition")
                self._after(stmt)
                if not cond:
                    break
                self._exec_block(stmt.body)
                self._tick(stmt)  # each re-evaluation of the header is a step/hit
        else:
            raise ToyRuntimeError(f"unknown statement {stmt!r}")

    def _after(self, stmt: Stmt) -> None:
        if stmt.sid in self.breakpoints:
            self._capture(stmt.sid)

    # -- expression evaluation --------------------------------------------

    def _require_bool(self, v: Value, where: str) -> bool:
        if not isinstance(v, bool):
            raise ToyRuntimeError(f"{where} is not a boolean: {render_value(v)!r}")
        return v

    def _require_int(self, v: Value, where: str) -> int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ToyRuntimeError(f"{where} is not an integer: {render_value(v)!r}")
        return v

    def _require_str(self, v: Value, where: str) -> str:
        if not isinstance(v, str):
            raise ToyRuntimeError(f"{where} is not a string: {render_value(v)!r}")
        return v

    def _eval(self, e: Expr) -> Value:
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, StrLit):
            return e.value
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, Var):
            frame_vars = self.frames[-1].vars  # function-scoped: only the current frame
            if e.name in frame_vars:
                return frame_vars[e.name]
            raise ToyRuntimeError(f"undefined variable {e.name!r}")
        if isinstance(e, Unary):
            if e.op == "!":
                return not self._require_bool(self._eval(e.operand), "operand of '!'")
            return -self._require_int(self._eval(e.operand), "operand of unary '-'")
        if isinstance(e, Ternary):
            if self._require_bool(self._eval(e.cond), "ternary condition"):
                return self._eval(e.then)
            return self._eval(e.other)
        if isinstance(e, Binary):
            return self._eval_binary(e)
        if isinstance(e, Call):
            return self._eval_call(e)
        raise ToyRuntimeError(f"unknown expression {e!r}")

    def _eval_binary(self, e: Binary) -> Value:
        op = e.op
        if op == "&&":
            return self._require_bool(self._eval(e.left), "'&&' operand") and self._require_bool(
                self._eval(e.right), "'&&' operand"
            )
        if op == "||":
            return self._require_bool(self._eval(e.left), "'||' operand") or self._require_bool(
                self._eval(e.right), "'||' operand"
            )
        left = self._eval(e.left)
        right = self._eval(e.right)
        if op == "+":
            if isinstance(left, str) and isinstance(right, str):
                return left + right
            return self._require_int(left, "'+' operand") + self._require_int(right, "'+' operand")
        if op in ("-", "*", "/"):
            a = self._require_int(left, f"{op!r} operand")
            b = self._require_int(right, f"{op!r} operand")
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if b == 0:
                raise ToyRuntimeError("division by zero")
            return int(a / b)  # truncate toward zero
        if op in ("==", "!="):
            same = type(left) is type(right) and left == right
            return same if op == "==" else not same
        if op in ("<", "<=", ">", ">="):
            a = self._require_int(left, f"{op!r} operand")
            b = self._require_int(right, f"{op!r} operand")
            return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
        raise ToyRuntimeError(f"unknown operator {op!r}")

    def _eval_call(self, e: Call) -> Value:
        if e.name in BUILTINS:
            if len(e.args) != BUILTINS[e.name]:
                raise ToyRuntimeError(f"builtin {e.name!r} expects {BUILTINS[e.name]} argument(s)")
            args = [self._eval(a) for a in e.args]
            if e.name == "contains":
                return self._require_str(args[1], "contains() pattern") in self._require_str(
                    args[0], "contains() subject"
                )
            subject = self._require_str(args[0], "replace() subject")
            old = self._require_str(args[1], "replace() pattern")
            new = self._require_str(args[2], "replace() replacement")
            if old == "":
                raise ToyRuntimeError("replace() with empty pattern")
            return subject.replace(old, new)
        return self._call(e.name, [self._eval(a) for a in e.args])


def run_test(
    program: Program,
    test: TestCase,
    breakpoints: frozenset[int] | set[int] | None = None,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> tuple[TestTrace, list[RawSnapshot]]:
    """Run one test; return its trace and any breakpoint captures.

    The outcome is ``failed`` iff the actual output differs from the
    expected output; a runtime fault is recorded as failed with a
    diagnostic output.  A run exceeding the step budget raises
    :class:`~pmsindex.errors.NonterminatingRunError`.
    """
    interp = Interpreter(program, step_budget=step_budget, breakpoints=breakpoints)
    result = interp.run(test.inputs)
    if result.fault is not None:
        output = f"<runtime-error: {result.fault}>"
        outcome = "failed"
    else:
        output = result.output
        outcome = "failed" if output != test.expected_output else "passed"
    trace = TestTrace(
        test_id=test.id,
        outcome=outcome,
        hit_counts=result.hit_counts,
        output=output,
    )
    return trace, result.snapshots
