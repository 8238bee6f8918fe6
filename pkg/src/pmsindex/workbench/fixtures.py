"""Built-in fixture programs and their test suites.

Each fixture ships a clean program and a suite of named inputs; expected
outputs are computed by running the clean program, so the clean version
passes its whole suite by construction and faulty versions are judged
against the clean behavior.

``word_filter`` is a 17-statement string rewriter whose two canonical
faults produce six failures with pairwise identical statement coverage,
the scenario where coverage-based fingerprints collapse.
"""
from __future__ import annotations

from ..errors import DataError
from .interp import TestCase, Value, run_test
from .lang import Program, parse_program
from .mutate import ASSIGNMENT_FAULT, PREDICATE_FAULT, FaultyVersion, Mutant, build_oracle

WORD_FILTER_SOURCE = """\
func main(s) {
  print process(s);
}

func process(s) {
  if (contains(s, "*1*") || contains(s, "*2*")) {
    return "";
  }
  sign = 0;
  sum_1 = 0;
  sum_1 = contains(s, "wordNone") ? 1 : 0;
  sign = sign + sum_1;
  s = replace(s, "wordNone", "*1*");
  sum_2 = 0;
  sum_2 = contains(s, "wordNtwo") ? 2 : 0;
  sign = sign + sum_2;
  s = replace(s, "wordNtwo", "*2*");
  if (sign == 3) {
    return "both pattern recognized";
  }
  msg = sign == 1 ? "wordNone recognized" : "pass";
  msg = sign == 2 ? "wordNtwo recognized" : msg;
  return s + "//" + msg;
}
"""

WORD_FILTER_INPUTS: list[tuple[str, str]] = [
    ("t1", "speak wordNone"),
    ("t2", "wordNone"),
    ("t3", "wordNonecontained"),
    ("t4", "wwwwordNoneeee"),
    ("t5", "has wordNtwo"),
    ("t6", "wordNtwo"),
    ("t7", ""),
    ("t8", "midd*1*le"),
    ("t9", "*1*2*"),
    ("t10", "a normal sentence"),
    ("t11", "wordnonewordNtw"),
    ("t12", "wordNone and wordNtwo"),
]

# Fault 1 rewrites the replacement text "*1*" (s8); fault 2 breaks the
# second message condition (s16).  Composed they fail t1..t6: t1..t4 by
# fault 1 and t5, t6 by fault 2.
WORD_FILTER_FAULTS = [
    Mutant(ASSIGNMENT_FAULT, 8, ("str_const", 1, "?1?")),
    Mutant(PREDICATE_FAULT, 16, ("rel_op", 0, ">")),
]

# The two benchmark fixtures below dispatch on an op-code input, so faults
# inside different features fail disjoint test subsets (non-interfering),
# while tests of the same feature often share identical coverage.

CALC_SUITE_SOURCE = """\
func main(op, a, b) {
  if (op == "scale") {
    print scale_score(a, b);
  } else {
    if (op == "span") {
      print span_gap(a, b);
    } else {
      if (op == "power") {
        print power_sum(a, b);
      } else {
        print "unknown op";
      }
    }
  }
}

func scale_score(a, b) {
  s = a * 3;
  t = b * 2;
  u = s + t;
  if (u < 0) {
    u = 0 - u;
  }
  bonus = 0;
  if (u > 25) {
    bonus = 7;
  }
  return u + bonus;
}

func span_gap(a, b) {
  lo = a;
  hi = b;
  if (hi < lo) {
    lo = b;
    hi = a;
  }
  gap = hi - lo;
  mid = (lo + hi) / 2;
  return gap * 10 + mid;
}

func power_sum(a, b) {
  total = 0;
  i = 0;
  while (i < b) {
    total = total + pow_step(a, i);
    i = i + 1;
  }
  return total;
}

func pow_step(a, i) {
  p = 1;
  j = 0;
  while (j < i) {
    p = p * a;
    j = j + 1;
  }
  return p;
}
"""

CALC_SUITE_INPUTS: list[tuple[str, dict[str, Value]]] = [
    ("t1", {"op": "scale", "a": 2, "b": 3}),
    ("t2", {"op": "scale", "a": 5, "b": 6}),
    ("t3", {"op": "scale", "a": -4, "b": 1}),
    ("t4", {"op": "scale", "a": 0, "b": 0}),
    ("t5", {"op": "scale", "a": 7, "b": -2}),
    ("t6", {"op": "span", "a": 3, "b": 9}),
    ("t7", {"op": "span", "a": 10, "b": 4}),
    ("t8", {"op": "span", "a": -5, "b": 5}),
    ("t9", {"op": "span", "a": 6, "b": 6}),
    ("t10", {"op": "span", "a": 0, "b": 13}),
    ("t11", {"op": "power", "a": 2, "b": 4}),
    ("t12", {"op": "power", "a": 3, "b": 3}),
    ("t13", {"op": "power", "a": 5, "b": 2}),
    ("t14", {"op": "power", "a": 1, "b": 6}),
    ("t15", {"op": "power", "a": 4, "b": 0}),
    ("t16", {"op": "list", "a": 1, "b": 1}),
]

TEXT_KIT_SOURCE = """\
func main(mode, text) {
  if (mode == "mask") {
    print mask_ids(text);
  } else {
    if (mode == "shout") {
      print shout(text);
    } else {
      if (mode == "score") {
        print score(text);
      } else {
        print "unsupported";
      }
    }
  }
}

func mask_ids(text) {
  out = replace(text, "id:", "#");
  if (contains(out, "##")) {
    out = replace(out, "##", "#");
  }
  out = out + "|masked";
  return out;
}

func shout(text) {
  out = replace(text, ".", "!");
  n = 0;
  if (contains(out, "!")) {
    n = n + 1;
  }
  if (contains(out, "!!")) {
    n = n + 2;
  }
  print n;
  return out + "|";
}

func score(text) {
  w = 0;
  if (contains(text, "alpha")) {
    w = w + 4;
  }
  if (contains(text, "beta")) {
    w = w + 9;
  }
  if (contains(text, "gamma")) {
    w = w * 2;
  }
  return w;
}
"""

TEXT_KIT_INPUTS: list[tuple[str, dict[str, Value]]] = [
    ("t1", {"mode": "mask", "text": "id:17 ok"}),
    ("t2", {"mode": "mask", "text": "id:id:9"}),
    ("t3", {"mode": "mask", "text": "plain"}),
    ("t4", {"mode": "mask", "text": "id:a id:b"}),
    ("t5", {"mode": "mask", "text": ""}),
    ("t6", {"mode": "shout", "text": "stop."}),
    ("t7", {"mode": "shout", "text": "go.. now"}),
    ("t8", {"mode": "shout", "text": "quiet"}),
    ("t9", {"mode": "shout", "text": "a.b.c"}),
    ("t10", {"mode": "shout", "text": "!"}),
    ("t11", {"mode": "score", "text": "alpha"}),
    ("t12", {"mode": "score", "text": "alpha beta"}),
    ("t13", {"mode": "score", "text": "beta gamma"}),
    ("t14", {"mode": "score", "text": "nothing"}),
    ("t15", {"mode": "grade", "text": "alpha"}),
]

# Straight-line fixture: every statement executes on every test (ternary
# routing, no branches), so all coverage fingerprints coincide and only
# run-time values distinguish fault families.

PRICING_SOURCE = """\
func main(kind, qty) {
  weight_fee = qty * 3 + 5;
  volume_fee = qty * 7 + 2;
  rush_fee = qty * 11 - 4;
  batch_fee = qty * 2 + 19;
  fee = pick(kind, weight_fee, volume_fee, rush_fee, batch_fee);
  rebate = loyalty(qty);
  total = fee - rebate;
  print total;
}

func pick(kind, w, v, r, b) {
  chosen = 0;
  chosen = kind == "weight" ? w : chosen;
  chosen = kind == "volume" ? v : chosen;
  chosen = kind == "rush" ? r : chosen;
  chosen = kind == "batch" ? b : chosen;
  return chosen;
}

func loyalty(qty) {
  points = qty * qty;
  cut = points / 9;
  return cut;
}
"""

PRICING_INPUTS: list[tuple[str, dict[str, Value]]] = [
    ("t1", {"kind": "weight", "qty": 2}),
    ("t2", {"kind": "weight", "qty": 5}),
    ("t3", {"kind": "weight", "qty": 9}),
    ("t4", {"kind": "weight", "qty": 13}),
    ("t5", {"kind": "volume", "qty": 1}),
    ("t6", {"kind": "volume", "qty": 4}),
    ("t7", {"kind": "volume", "qty": 8}),
    ("t8", {"kind": "volume", "qty": 12}),
    ("t9", {"kind": "rush", "qty": 3}),
    ("t10", {"kind": "rush", "qty": 6}),
    ("t11", {"kind": "rush", "qty": 10}),
    ("t12", {"kind": "rush", "qty": 14}),
    ("t13", {"kind": "batch", "qty": 2}),
    ("t14", {"kind": "batch", "qty": 7}),
    ("t15", {"kind": "batch", "qty": 11}),
    ("t16", {"kind": "batch", "qty": 15}),
    ("t17", {"kind": "none", "qty": 5}),
    ("t18", {"kind": "none", "qty": 9}),
]

_FIXTURE_SOURCES: dict[str, tuple[str, list[tuple[str, dict[str, Value]]]]] = {
    "word_filter": (WORD_FILTER_SOURCE, [(tid, {"s": s}) for tid, s in WORD_FILTER_INPUTS]),
    "pricing": (PRICING_SOURCE, PRICING_INPUTS),
    "calc_suite": (CALC_SUITE_SOURCE, CALC_SUITE_INPUTS),
    "text_kit": (TEXT_KIT_SOURCE, TEXT_KIT_INPUTS),
}

FIXTURE_NAMES = tuple(_FIXTURE_SOURCES)


def build_suite(program: Program, inputs: list[tuple[str, dict[str, Value]]]) -> list[TestCase]:
    """Expected outputs come from running the clean program on each input."""
    suite = []
    for test_id, values in inputs:
        probe = TestCase(id=test_id, inputs=values, expected_output="")
        trace, _ = run_test(program, probe)
        suite.append(TestCase(id=test_id, inputs=values, expected_output=trace.output))
    return suite


def load_fixture(name: str) -> tuple[Program, list[TestCase]]:
    if name not in _FIXTURE_SOURCES:
        raise DataError(f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}")
    source, inputs = _FIXTURE_SOURCES[name]
    program = parse_program(source)
    return program, build_suite(program, inputs)


def word_filter_version() -> FaultyVersion:
    """The canonical two-fault version of the word_filter fixture."""
    program, suite = load_fixture("word_filter")
    return build_oracle(program, WORD_FILTER_FAULTS, suite, version_id="word_filter-2bug")
