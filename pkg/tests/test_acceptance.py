"""Acceptance criteria 1-11, one PASS/FAIL line each.

Run with pytest (lines appear in the terminal summary) or directly:
    python3 tests/test_acceptance.py
"""
import sys

import pytest

from ekpolylog import suites

RESULTS = {}


@pytest.mark.parametrize("check", suites.ALL, ids=lambda f: f.__name__)
def test_criterion(check):
    res = check()
    RESULTS[res.number] = res
    print(res.line())
    assert res.passed, res.line()


def main() -> int:
    ok = True
    for check in suites.ALL:
        res = check()
        print(res.line(), flush=True)
        ok &= res.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
