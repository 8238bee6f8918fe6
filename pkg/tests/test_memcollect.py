"""Breakpoint selection and memory collection semantics."""
import pytest

from pmsindex.errors import EmptyBreakpointError, MisclassifiedTestError
from pmsindex.memcollect import BreakpointSet, collect_memory, select_breakpoints
from pmsindex.workbench.interp import TestCase
from pmsindex.workbench.lang import parse_program

LOOP_SOURCE = """\
func main(n) {
  x = 0;
  i = 0;
  while (i < n) {
    x = x + 1;
    i = i + 1;
  }
  print x;
}
"""
# statement IDs: 1 x=0, 2 i=0, 3 while header, 4 x=x+1, 5 i=i+1, 6 print

CALL_SOURCE = """\
func main(a) {
  total = bump(a);
  print total;
}

func bump(v) {
  w = v + 1;
  u = w * 2;
  return u;
}
"""
# statement IDs: 1 total=, 2 print, 3 w=, 4 u=, 5 return


def _failing_case(inputs, wrong_expected="<never>"):
    return TestCase(id="f", inputs=inputs, expected_output=wrong_expected)


class TestSelectBreakpoints:
    def test_top_10_of_17_is_one_breakpoint(self):
        scores = [float(i) for i in range(17, 0, -1)]
        bps = select_breakpoints(scores, 10)
        assert bps.q == 1
        assert bps.statements == [1]

    def test_x_100_selects_everything(self):
        scores = [1.0] * 17
        bps = select_breakpoints(scores, 100)
        assert bps.q == 17
        assert bps.statements == list(range(1, 18))  # ties keep statement order

    def test_floor_zero_is_an_error(self):
        with pytest.raises(EmptyBreakpointError):
            select_breakpoints([1.0] * 17, 1)

    def test_x_out_of_range_is_an_error(self):
        with pytest.raises(EmptyBreakpointError):
            select_breakpoints([1.0] * 5, 0)
        with pytest.raises(EmptyBreakpointError):
            select_breakpoints([1.0] * 5, 101)

    def test_members_are_the_top_scored_statements(self):
        scores = [0.1, 9.0, 3.0, 7.0]
        bps = select_breakpoints(scores, 50)
        assert bps.statements == [2, 4]


class TestCollectMemory:
    def test_loop_breakpoint_keeps_last_value_in_one_snapshot(self):
        program = parse_program(LOOP_SOURCE)
        trace = collect_memory(program, _failing_case({"n": 3}), BreakpointSet([4]))
        assert len(trace.snapshots) == 1
        snapshot = trace.snapshots[0]
        assert snapshot.breakpoint == 4 and snapshot.seq == 1
        values = {name: value for name, value, _ in snapshot.entries}
        assert values["x"] == "3"  # value after the final execution
        assert values["i"] == "2"  # i increments after the capture point

    def test_unexecuted_breakpoint_yields_no_snapshot(self):
        program = parse_program(LOOP_SOURCE)
        trace = collect_memory(program, _failing_case({"n": 0}), BreakpointSet([4, 1]))
        assert [s.breakpoint for s in trace.snapshots] == [1]
        assert trace.m == len(trace.snapshots[0].entries)

    def test_callee_breakpoint_entries_carry_depth_2(self):
        program = parse_program(CALL_SOURCE)
        trace = collect_memory(program, _failing_case({"a": 5}), BreakpointSet([4]))
        (snapshot,) = trace.snapshots
        depths = {name: depth for name, _, depth in snapshot.entries}
        assert depths["v"] == 2 and depths["w"] == 2 and depths["u"] == 2
        assert depths["a"] == 1  # caller frame comes first, depth 1

    def test_entries_are_outermost_first_in_declaration_order(self):
        program = parse_program(CALL_SOURCE)
        trace = collect_memory(program, _failing_case({"a": 5}), BreakpointSet([4]))
        names = [name for name, _, _ in trace.snapshots[0].entries]
        assert names == ["a", "v", "w", "u"]

    def test_seq_follows_first_execution_order(self):
        program = parse_program(LOOP_SOURCE)
        trace = collect_memory(program, _failing_case({"n": 2}), BreakpointSet([5, 1]))
        assert [s.breakpoint for s in trace.snapshots] == [1, 5]
        assert [s.seq for s in trace.snapshots] == [1, 2]

    def test_m_is_the_entry_count_sum(self):
        program = parse_program(CALL_SOURCE)
        trace = collect_memory(program, _failing_case({"a": 2}), BreakpointSet([1, 3, 5]))
        assert trace.m == sum(len(s.entries) for s in trace.snapshots)
        assert trace.m > 0

    def test_collection_is_deterministic(self):
        program = parse_program(LOOP_SOURCE)
        a = collect_memory(program, _failing_case({"n": 3}), BreakpointSet([3, 4, 5]))
        b = collect_memory(program, _failing_case({"n": 3}), BreakpointSet([3, 4, 5]))
        assert a == b

    def test_values_are_canonical_strings(self):
        program = parse_program(
            'func main() { n = 12; flag = n > 3; s = "ab"; print 0; }'
        )
        trace = collect_memory(program, _failing_case({}), BreakpointSet([4]))
        values = {name: value for name, value, _ in trace.snapshots[0].entries}
        assert values == {"n": "12", "flag": "true", "s": "ab"}

    def test_passing_test_is_rejected(self):
        program = parse_program(LOOP_SOURCE)
        passing = TestCase(id="p", inputs={"n": 2}, expected_output="2")
        with pytest.raises(MisclassifiedTestError):
            collect_memory(program, passing, BreakpointSet([4]))

    def test_statement_with_call_captures_after_return(self):
        # breakpoint on the caller statement: collection happens after the
        # call completes, never inside the callee
        program = parse_program(CALL_SOURCE)
        trace = collect_memory(program, _failing_case({"a": 5}), BreakpointSet([1]))
        (snapshot,) = trace.snapshots
        names = [name for name, _, _ in snapshot.entries]
        assert names == ["a", "total"]
        values = {name: value for name, value, _ in snapshot.entries}
        assert values["total"] == "12"
