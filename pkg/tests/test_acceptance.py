"""Acceptance criteria, one test each, at full size.

Each test records a single PASS/FAIL line, printed in the terminal summary,
and fails if the suite fails or exceeds its wall-clock limit.
"""
import pytest

from conftest import ACCEPTANCE_LINES

from approachability.harness.verify import SUITES

# criterion number -> (suite, runtime limit in seconds or None)
CRITERIA = {
    1: ("duality", 60),
    2: ("dualset", 120),
    3: ("equivalence", 120),
    4: ("maxent", 120),
    5: ("rates", 600),
    6: ("cmdp", 180),
    7: ("bruteforce", 300),
    8: ("complexity", None),
}


@pytest.mark.acceptance
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    name, limit = CRITERIA[number]
    res = SUITES[name]()
    in_time = limit is None or res.runtime < limit
    ok = res.passed and in_time
    budget = "no limit" if limit is None else f"limit {limit}s"
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({name}): {res.runtime:.1f}s, {budget}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    print(res.report())
    assert res.passed, res.report()
    assert in_time, f"{name} took {res.runtime:.1f}s, limit {limit}s"
