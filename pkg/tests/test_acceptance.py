"""Acceptance suite: every release criterion, one pass/fail line per check.

Heavy simulation results are cached inside tqd3d.verify, so the open-system
benchmark and closed-system comparison runs execute once and are shared
between criteria.  Run with `pytest tests/test_acceptance.py -v -s` to see
the printed criterion lines.
"""

import pytest

from tqd3d import verify


@pytest.mark.parametrize(
    "check", verify.CRITERIA, ids=lambda check: check.__name__.removeprefix("check_")
)
def test_criterion(check):
    result = check()
    print(result.line())
    assert result.passed, result.line()
