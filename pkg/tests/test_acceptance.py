"""Acceptance criteria at their stated tolerances.

Run directly (``python tests/test_acceptance.py``) for a plain report, or
through pytest, which prints the same lines in the terminal summary.
"""

import pytest

from mudwater.acceptance import CRITERIA, Context, format_result, run_criterion

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # direct execution outside pytest
    ACCEPTANCE_LINES = []


@pytest.fixture(scope="module")
def context():
    return Context()


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=[f"criterion_{n}" for n in sorted(CRITERIA)])
def test_criterion(number, context):
    res = run_criterion(number, context)
    line = format_result(res)
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert res.passed, line


if __name__ == "__main__":
    ctx = Context()
    results = [run_criterion(n, ctx) for n in sorted(CRITERIA)]
    for res in results:
        print(format_result(res))
    raise SystemExit(0 if all(r.passed for r in results) else 1)
