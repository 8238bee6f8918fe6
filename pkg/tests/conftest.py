import pytest

from pmsindex.workbench.fixtures import load_fixture, word_filter_version
from pmsindex.workbench.mutate import run_suite


@pytest.fixture(scope="session")
def word_filter():
    program, suite = load_fixture("word_filter")
    return program, suite


@pytest.fixture(scope="session")
def two_bug_version():
    return word_filter_version()


@pytest.fixture(scope="session")
def two_bug_traces(two_bug_version):
    return run_suite(two_bug_version.program, two_bug_version.suite)
