"""Toy language: parsing, interpretation, coverage, mutation, oracles."""
import pytest

from pmsindex.errors import (
    CompositionError,
    NonterminatingRunError,
    OracleAmbiguityError,
    ParseError,
)
from pmsindex.workbench.fixtures import WORD_FILTER_FAULTS
from pmsindex.workbench.interp import Interpreter, TestCase, run_test
from pmsindex.workbench.lang import If, parse_program, render_program
from pmsindex.workbench.mutate import (
    Mutant,
    apply_mutants,
    build_oracle,
    enumerate_edits,
    failing_ids,
    run_suite,
)


class TestParser:
    def test_word_filter_program_has_17_statements(self, word_filter):
        program, _ = word_filter
        assert program.l == 17
        assert sorted(program.statements) == list(range(1, 18))

    def test_empty_function_body_gets_an_implicit_return(self):
        program = parse_program("func main() {}")
        assert program.l == 1

    def test_unbalanced_braces_raise_with_position(self):
        with pytest.raises(ParseError) as err:
            parse_program("func main() { print 1; ")
        assert "{" in str(err.value) or "}" in str(err.value)

    def test_garbage_token_rejected(self):
        with pytest.raises(ParseError):
            parse_program("func main() { print 1 $ 2; }")

    def test_render_parse_round_trip_preserves_statement_ids(self, word_filter):
        program, _ = word_filter
        again = parse_program(render_program(program))
        assert again.l == program.l
        assert render_program(again) == render_program(program)


class TestRunTest:
    def test_t1_fails_and_covers_all_but_s3_s14(self, two_bug_version):
        t1 = next(t for t in two_bug_version.suite if t.id == "t1")
        trace, _ = run_test(two_bug_version.program, t1)
        assert trace.outcome == "failed"
        covered = set(trace.hit_counts)
        assert covered == set(range(1, 18)) - {3, 14}

    def test_t7_passes(self, two_bug_version):
        t7 = next(t for t in two_bug_version.suite if t.id == "t7")
        trace, _ = run_test(two_bug_version.program, t7)
        assert trace.outcome == "passed"

    def test_matching_output_is_a_pass(self):
        program = parse_program('func main() { print "ok"; }')
        trace, _ = run_test(program, TestCase("t", {}, "ok"))
        assert trace.outcome == "passed"

    def test_runtime_fault_recorded_as_failed_with_diagnostic(self):
        program = parse_program("func main() { print missing; }")
        trace, _ = run_test(program, TestCase("t", {}, "whatever"))
        assert trace.outcome == "failed"
        assert "runtime-error" in trace.output

    def test_division_by_zero_is_a_runtime_fault(self):
        program = parse_program("func main(n) { print 4 / n; }")
        trace, _ = run_test(program, TestCase("t", {"n": 0}, "?"))
        assert trace.outcome == "failed"
        assert "division" in trace.output

    def test_step_budget_guards_nontermination(self):
        program = parse_program("func main() { while (true) { x = 1; } }")
        with pytest.raises(NonterminatingRunError):
            run_test(program, TestCase("t", {}, ""), step_budget=1000)

    def test_identical_runs_produce_identical_traces(self, two_bug_version):
        t1 = next(t for t in two_bug_version.suite if t.id == "t1")
        a, _ = run_test(two_bug_version.program, t1)
        b, _ = run_test(two_bug_version.program, t1)
        assert a == b

    def test_coverage_matches_instrumented_replay(self, two_bug_version):
        # replay with breakpoints on every statement: the set of statements
        # that captured a snapshot must equal the set of hit statements
        for t in two_bug_version.suite[:4]:
            trace, snapshots = run_test(
                two_bug_version.program, t, breakpoints=set(range(1, 18))
            )
            assert {sid for sid, _ in snapshots} == set(trace.hit_counts)

    def test_while_header_hit_count_is_evaluations(self):
        program = parse_program(
            "func main(n) { i = 0; while (i < n) { i = i + 1; } print i; }"
        )
        trace, _ = run_test(program, TestCase("t", {"n": 3}, "3"))
        # header is statement 2: evaluated n + 1 times
        assert trace.hit_counts[2] == 4
        assert trace.outcome == "passed"


class TestMutation:
    def test_single_predicate_fault_changes_only_its_statement(self, word_filter):
        program, _ = word_filter
        mutant = Mutant("predicate_fault", 13, ("rel_op", 0, "!="))
        mutated = apply_mutants(program, [mutant])
        before = render_program(program).splitlines()
        after = render_program(mutated).splitlines()
        changed = [i for i, (a, b) in enumerate(zip(before, after)) if a != b]
        assert len(changed) == 1
        assert "!=" in after[changed[0]]

    def test_composed_failing_set_is_the_union(self, word_filter):
        program, suite = word_filter
        f1, f2 = WORD_FILTER_FAULTS
        fails_1 = failing_ids(run_suite(apply_mutants(program, [f1]), suite))
        fails_2 = failing_ids(run_suite(apply_mutants(program, [f2]), suite))
        fails_both = failing_ids(run_suite(apply_mutants(program, [f1, f2]), suite))
        assert fails_both == fails_1 | fails_2
        assert fails_1 == {"t1", "t2", "t3", "t4"}
        assert fails_2 == {"t5", "t6"}

    def test_overlapping_targets_rejected(self, word_filter):
        program, _ = word_filter
        mutant = Mutant("assignment_fault", 8, ("str_const", 1, "?1?"))
        with pytest.raises(CompositionError):
            apply_mutants(program, [mutant, mutant])

    def test_locality_for_every_intra_statement_edit(self, word_filter):
        program, _ = word_filter
        base_lines = render_program(program).splitlines()
        for mutant in enumerate_edits(program):
            if mutant.edit[0] == "drop_else":
                continue  # removes lines; covered separately
            mutated_lines = render_program(apply_mutants(program, [mutant])).splitlines()
            assert len(mutated_lines) == len(base_lines)
            assert sum(a != b for a, b in zip(base_lines, mutated_lines)) <= 1

    def test_drop_else_removes_only_the_else_block(self):
        program = parse_program(
            "func main(n) { if (n > 0) { print 1; } else { print 2; } print 3; }"
        )
        sid = next(sid for sid, s in program.statements.items() if isinstance(s, If))
        mutated = apply_mutants(program, [Mutant("predicate_fault", sid, ("drop_else",))])
        assert mutated.l == program.l - 1
        trace, _ = run_test(mutated, TestCase("t", {"n": -1}, "3"))
        assert trace.outcome == "passed"


class TestOracle:
    def test_two_disjoint_faults(self, two_bug_version):
        assert two_bug_version.oracle == {
            "t1": 0, "t2": 0, "t3": 0, "t4": 0, "t5": 1, "t6": 1,
        }

    def test_single_fault_maps_everything_to_zero(self, word_filter):
        program, suite = word_filter
        version = build_oracle(program, [WORD_FILTER_FAULTS[0]], suite)
        assert set(version.oracle.values()) == {0}

    def test_interfering_mutants_rejected(self, word_filter):
        # both faults disturb the wordNone path, so they share failures
        program, suite = word_filter
        clashing = [
            Mutant("assignment_fault", 8, ("str_const", 1, "?1?")),
            Mutant("assignment_fault", 6, ("int_const", 0, 2)),
        ]
        with pytest.raises(OracleAmbiguityError):
            build_oracle(program, clashing, suite)

    def test_oracle_covers_exactly_the_failing_tests(self, two_bug_version, two_bug_traces):
        assert set(two_bug_version.oracle) == failing_ids(two_bug_traces)


class TestInterpreterDetails:
    def test_string_ops(self):
        program = parse_program(
            'func main(s) { a = contains(s, "b") ? "y" : "n"; '
            'print replace(s, "b", "B") + "/" + a; }'
        )
        trace, _ = run_test(program, TestCase("t", {"s": "abc"}, "aBc/y"))
        assert trace.outcome == "passed"

    def test_truncating_division(self):
        program = parse_program("func main() { print 0 - 7 / 2; }")
        trace, _ = run_test(program, TestCase("t", {}, ""))
        # 7 / 2 truncates to 3 before negation
        assert trace.output == "-3"

    def test_call_stack_and_recursionless_calls(self):
        program = parse_program(
            "func main(n) { print twice(n) + twice(1); }\n"
            "func twice(k) { return k * 2; }"
        )
        trace, _ = run_test(program, TestCase("t", {"n": 4}, "10"))
        assert trace.outcome == "passed"

    def test_interpreter_instances_are_independent(self, word_filter):
        program, suite = word_filter
        first = Interpreter(program)
        second = Interpreter(program)
        out1 = first.run(suite[0].inputs)
        out2 = second.run(suite[0].inputs)
        assert out1.output == out2.output
        assert first.hit_counts == second.hit_counts
