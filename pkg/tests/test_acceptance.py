"""The fourteen acceptance criteria, one test each; every run prints a PASS/FAIL line."""
import json

import pytest

from phasecalc.acceptance import CRITERIA, run


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_criterion(number, capsys):
    (res,) = run([number], seed=0)
    with capsys.disabled():
        print(f"\n{res.line()} ({res.seconds:.1f}s)")
    assert res.passed, json.dumps(res.to_json()["measured"], indent=1)[:2000]


if __name__ == "__main__":
    results = run(log=print)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
