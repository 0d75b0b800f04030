import os
import sys

import pytest

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, HERE)

from liesym.problem import load_problem_file  # noqa: E402

PROBLEMS = os.path.join(os.path.dirname(HERE), "problems")


def problem_path(name: str) -> str:
    return os.path.join(PROBLEMS, name)


def load(name: str):
    return load_problem_file(problem_path(name))


@pytest.fixture
def problems_dir():
    return PROBLEMS


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
