"""Mutation-based fault injection and oracle construction.

Two operator classes are supported:

* assignment faults: editing an integer or string constant, or swapping an
  arithmetic operator (``+ - * /``);
* predicate faults: negating an ``if``/``while`` condition, deleting an
  ``else`` branch, or swapping a relational operator.

An r-bug faulty version composes the edits of r single-fault versions that
target pairwise distinct statements.  The oracle maps each failure of the
composed program to the unique single-fault version failing it; versions
where a failure maps to zero or several faults are rejected.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field

from ..errors import CompositionError, OracleAmbiguityError
from .interp import DEFAULT_STEP_BUDGET, TestCase, TestTrace, run_test
from .lang import (
    ARITH_OPS,
    Assign,
    Binary,
    Call,
    Expr,
    ExprStmt,
    If,
    IntLit,
    Print,
    Program,
    REL_OPS,
    Return,
    Stmt,
    StrLit,
    Ternary,
    Unary,
    While,
    parse_program,
    render_program,
)

ASSIGNMENT_FAULT = "assignment_fault"
PREDICATE_FAULT = "predicate_fault"

# Edit forms: (edit name, *args), applied to the target statement's own
# expressions (body statements of if/while have their own IDs and edits).
#   ("int_const", occurrence, new_value)
#   ("str_const", occurrence, new_value)
#   ("arith_op", occurrence, new_op)
#   ("rel_op", occurrence, new_op)
#   ("negate_cond",)
#   ("drop_else",)

_PREDICATE_EDITS = {"rel_op", "negate_cond", "drop_else"}


@dataclass(frozen=True)
class Mutant:
    kind: str  # assignment_fault | predicate_fault
    target_statement: int
    edit: tuple

    def describe(self) -> str:
        return f"{self.kind}@s{self.target_statement}:{'/'.join(map(str, self.edit))}"


@dataclass
class FaultyVersion:
    """A composed faulty program plus its failure-to-fault oracle."""

    version_id: str
    base: Program
    faults: list[Mutant]
    program: Program
    oracle: dict[str, int]  # failing test id -> index into faults
    suite: list[TestCase] = field(default_factory=list)

    @property
    def r(self) -> int:
        return len(self.faults)


def _own_exprs(stmt: Stmt) -> list[Expr]:
    """Expressions belonging to the statement itself (headers only)."""
    if isinstance(stmt, Assign):
        return [stmt.value]
    if isinstance(stmt, Print):
        return [stmt.value]
    if isinstance(stmt, Return):
        return [] if stmt.value is None else [stmt.value]
    if isinstance(stmt, ExprStmt):
        return [stmt.call]
    if isinstance(stmt, (If, While)):
        return [stmt.cond]
    return []


def _walk(e: Expr):
    yield e
    if isinstance(e, Unary):
        yield from _walk(e.operand)
    elif isinstance(e, Binary):
        yield from _walk(e.left)
        yield from _walk(e.right)
    elif isinstance(e, Ternary):
        yield from _walk(e.cond)
        yield from _walk(e.then)
        yield from _walk(e.other)
    elif isinstance(e, Call):
        for a in e.args:
            yield from _walk(a)


def _nodes_of(stmt: Stmt, pick) -> list[Expr]:
    found: list[Expr] = []
    for root in _own_exprs(stmt):
        for node in _walk(root):
            if pick(node):
                found.append(node)
    return found


def _apply_edit(stmt: Stmt, edit: tuple) -> None:
    name = edit[0]
    if name == "int_const":
        _, occ, new_value = edit
        nodes = _nodes_of(stmt, lambda n: isinstance(n, IntLit))
        if occ >= len(nodes):
            raise CompositionError(f"no integer constant #{occ} in statement {stmt.sid}")
        nodes[occ].value = int(new_value)
    elif name == "str_const":
        _, occ, new_value = edit
        nodes = _nodes_of(stmt, lambda n: isinstance(n, StrLit))
        if occ >= len(nodes):
            raise CompositionError(f"no string constant #{occ} in statement {stmt.sid}")
        nodes[occ].value = str(new_value)
    elif name == "arith_op":
        _, occ, new_op = edit
        if new_op not in ARITH_OPS:
            raise CompositionError(f"not an arithmetic operator: {new_op!r}")
        nodes = _nodes_of(stmt, lambda n: isinstance(n, Binary) and n.op in ARITH_OPS)
        if occ >= len(nodes):
            raise CompositionError(f"no arithmetic operator #{occ} in statement {stmt.sid}")
        nodes[occ].op = new_op
    elif name == "rel_op":
        _, occ, new_op = edit
        if new_op not in REL_OPS:
            raise CompositionError(f"not a relational operator: {new_op!r}")
        nodes = _nodes_of(stmt, lambda n: isinstance(n, Binary) and n.op in REL_OPS)
        if occ >= len(nodes):
            raise CompositionError(f"no relational operator #{occ} in statement {stmt.sid}")
        nodes[occ].op = new_op
    elif name == "negate_cond":
        if not isinstance(stmt, (If, While)):
            raise CompositionError(f"statement {stmt.sid} has no condition to negate")
        stmt.cond = Unary(op="!", operand=stmt.cond)
    elif name == "drop_else":
        if not isinstance(stmt, If) or stmt.other is None:
            raise CompositionError(f"statement {stmt.sid} has no else branch to delete")
        stmt.other = None
    else:
        raise CompositionError(f"unknown edit {name!r}")


def classify_edit(edit: tuple) -> str:
    return PREDICATE_FAULT if edit[0] in _PREDICATE_EDITS else ASSIGNMENT_FAULT


def apply_mutants(program: Program, mutants: list[Mutant]) -> Program:
    """Apply mutant edits to pairwise distinct statements of ``program``.

    All targets are resolved against the base numbering before any edit,
    so composition order is immaterial.  The result is re-rendered and
    re-parsed, which renumbers statements only when an else branch was
    deleted.
    """
    targets = [m.target_statement for m in mutants]
    if len(set(targets)) != len(targets):
        raise CompositionError(f"mutants target overlapping statements: {sorted(targets)}")
    mutated = copy.deepcopy(program)
    for mutant in mutants:
        stmt = mutated.statements.get(mutant.target_statement)
        if stmt is None:
            raise CompositionError(f"no statement with ID {mutant.target_statement}")
        _apply_edit(stmt, mutant.edit)
    return parse_program(render_program(mutated))


def run_suite(
    program: Program,
    suite: list[TestCase],
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> list[TestTrace]:
    return [run_test(program, t, step_budget=step_budget)[0] for t in suite]


def failing_ids(traces: list[TestTrace]) -> set[str]:
    return {t.test_id for t in traces if t.failed}


def build_oracle(
    base: Program,
    faults: list[Mutant],
    suite: list[TestCase],
    version_id: str = "version",
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> FaultyVersion:
    """Compose ``faults`` into ``base`` and derive the failure oracle.

    Each single-fault version is run separately; a failure of the composed
    version must fail under exactly one of them, otherwise the version is
    rejected with :class:`~pmsindex.errors.OracleAmbiguityError`.
    """
    single_failures: list[set[str]] = []
    for i, mutant in enumerate(faults):
        single = apply_mutants(base, [mutant])
        fails = failing_ids(run_suite(single, suite, step_budget))
        if not fails:
            raise OracleAmbiguityError(f"fault {i} ({mutant.describe()}) produces no failure")
        single_failures.append(fails)

    composed = apply_mutants(base, faults)
    composed_failures = failing_ids(run_suite(composed, suite, step_budget))
    if not composed_failures:
        raise OracleAmbiguityError("composed version produces no failure")

    oracle: dict[str, int] = {}
    for test_id in sorted(composed_failures):
        culprits = [i for i, fails in enumerate(single_failures) if test_id in fails]
        if len(culprits) != 1:
            raise OracleAmbiguityError(
                f"failure {test_id!r} maps to {len(culprits)} single-fault versions"
            )
        oracle[test_id] = culprits[0]
    return FaultyVersion(
        version_id=version_id,
        base=base,
        faults=list(faults),
        program=composed,
        oracle=oracle,
        suite=list(suite),
    )


# ---------------------------------------------------------------------------
# Mutable-point enumeration (used by the benchmark generator)


def _string_variants(s: str) -> list[str]:
    if s == "":
        return ["?"]
    variants = ["?" + s[1:], s + "?", s[:-1]]
    return [v for v in dict.fromkeys(variants) if v != s]


def _int_variants(c: int) -> list[int]:
    return [v for v in dict.fromkeys([c + 1, c - 1, 1 if c == 0 else 0]) if v != c]


def enumerate_edits(program: Program) -> list[Mutant]:
    """All concrete single edits available on a program, in statement order."""
    mutants: list[Mutant] = []
    for sid in sorted(program.statements):
        stmt = program.statements[sid]
        ints = _nodes_of(stmt, lambda n: isinstance(n, IntLit))
        for occ, node in enumerate(ints):
            for value in _int_variants(node.value):
                mutants.append(Mutant(ASSIGNMENT_FAULT, sid, ("int_const", occ, value)))
        strs = _nodes_of(stmt, lambda n: isinstance(n, StrLit))
        for occ, node in enumerate(strs):
            for value in _string_variants(node.value):
                mutants.append(Mutant(ASSIGNMENT_FAULT, sid, ("str_const", occ, value)))
        ariths = _nodes_of(stmt, lambda n: isinstance(n, Binary) and n.op in ARITH_OPS)
        for occ, node in enumerate(ariths):
            for op in ARITH_OPS:
                if op != node.op:
                    mutants.append(Mutant(ASSIGNMENT_FAULT, sid, ("arith_op", occ, op)))
        rels = _nodes_of(stmt, lambda n: isinstance(n, Binary) and n.op in REL_OPS)
        for occ, node in enumerate(rels):
            for op in REL_OPS:
                if op != node.op:
                    mutants.append(Mutant(PREDICATE_FAULT, sid, ("rel_op", occ, op)))
        if isinstance(stmt, (If, While)):
            mutants.append(Mutant(PREDICATE_FAULT, sid, ("negate_cond",)))
        if isinstance(stmt, If) and stmt.other is not None:
            mutants.append(Mutant(PREDICATE_FAULT, sid, ("drop_else",)))
    return mutants
