"""Toy-language execution substrate: parsing, interpretation, coverage,
breakpoints, mutation-based fault injection, and benchmark generation."""

from .interp import (
    DEFAULT_STEP_BUDGET,
    Interpreter,
    TestCase,
    TestTrace,
    render_value,
    run_test,
)
from .lang import Program, parse_program, render_program
from .mutate import (
    ASSIGNMENT_FAULT,
    PREDICATE_FAULT,
    FaultyVersion,
    Mutant,
    apply_mutants,
    build_oracle,
    enumerate_edits,
    failing_ids,
    run_suite,
)
from .fixtures import FIXTURE_NAMES, build_suite, load_fixture, word_filter_version

__all__ = [
    "ASSIGNMENT_FAULT",
    "DEFAULT_STEP_BUDGET",
    "FIXTURE_NAMES",
    "FaultyVersion",
    "Interpreter",
    "Mutant",
    "PREDICATE_FAULT",
    "Program",
    "TestCase",
    "TestTrace",
    "apply_mutants",
    "build_oracle",
    "build_suite",
    "enumerate_edits",
    "failing_ids",
    "load_fixture",
    "parse_program",
    "render_program",
    "render_value",
    "run_suite",
    "run_test",
    "word_filter_version",
]
