"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import pytest

from translab import acceptance


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion, capsys):
    rep = criterion()
    with capsys.disabled():
        print(f"\n{rep.summary_line()}")
    assert rep.passed, rep.to_json()
