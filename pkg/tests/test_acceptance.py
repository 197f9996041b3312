"""The eleven acceptance criteria at their stated tolerances.

Each result line is collected and printed in the terminal summary.
"""
import pytest

from wwbreak import acceptance

SLOW = {1, 2, 11}

RESULTS = []


@pytest.mark.parametrize("number", [
    pytest.param(i, marks=pytest.mark.slow) if i in SLOW else i for i in acceptance.CRITERIA
])
def test_criterion(number):
    result = acceptance.CRITERIA[number]()
    RESULTS.append(result)
    print(result.line())
    assert result.passed, result.line()
