"""Runs the ten acceptance criteria; prints one PASS/FAIL line per criterion."""
import pytest

from biunitary_lab import acceptance

IDS = [f"{num}-{name}" for num, name, _ in acceptance.CRITERIA]


@pytest.mark.parametrize("num,name,fn", acceptance.CRITERIA, ids=IDS)
def test_criterion(num, name, fn, capsys):
    ok, details = fn()
    line = acceptance.Result(num, name, ok, details).line()
    with capsys.disabled():
        print("\n" + line)
    failed = {k: v for k, v in details.get("checks", {}).items() if not v}
    assert ok, f"criterion {num} failed checks {sorted(failed)}: {details}"
