"""The twelve acceptance criteria, one test and one report line each.

The whole suite runs once per session; the cold rebuild of the 4-variable
complexity table alone takes several minutes.
"""

from __future__ import annotations

import pytest

from cmw.acceptance import Config, run_all

CRITERIA = list(range(1, 13))


@pytest.fixture(scope="module")
def results():
    return {r.number: r for r in run_all(Config())}


@pytest.mark.parametrize("number", CRITERIA)
def test_criterion(number, results, capsys):
    r = results[number]
    with capsys.disabled():
        print(f"\n{'PASS' if r.status == 'pass' else 'FAIL'} {r.line()}")
    assert r.status == "pass", r.line()
