"""Acceptance criteria C1..C11 at their stated sizes and tolerances.

Each test records one PASS/FAIL line; the lines are printed in the terminal
summary. Run this file directly to print them without pytest.
"""

import subprocess
import sys

import pytest

from lowsing.harness import criteria

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []


def _record(res):
    budget = criteria.BUDGETS[res.id]
    in_time = res.seconds <= budget
    verdict = "PASS" if res.passed and in_time else "FAIL"
    line = f"[{verdict}] {res.id}: {res.title} ({res.seconds:.1f} s of {budget} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    print("   ", criteria.clean(res.measured))
    return res


@pytest.mark.slow
@pytest.mark.parametrize("cid", list(criteria.ACCEPTANCE))
def test_criterion(cid):
    res = _record(criteria.ACCEPTANCE[cid](7))
    assert res.passed, f"{cid} failed: {criteria.clean(res.measured)}"
    assert res.seconds <= criteria.BUDGETS[cid], f"{cid} took {res.seconds:.1f} s"


def _verify_all(out):
    return subprocess.Popen([sys.executable, "-m", "lowsing.harness.cli", "verify", "all",
                             "--seed", "7", "--out", str(out)],
                            stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)


@pytest.mark.slow
def test_c11_reports_are_byte_identical(tmp_path):
    runs = [_verify_all(tmp_path / "a"), _verify_all(tmp_path / "b")]
    codes = [p.wait() for p in runs]
    a = (tmp_path / "a" / "verify.json").read_bytes()
    b = (tmp_path / "b" / "verify.json").read_bytes()
    same = a == b
    line = f"[{'PASS' if same else 'FAIL'}] C11: repeated verify all --seed 7 gives identical reports"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert same
    assert codes == [0, 0], [p.stderr.read() for p in runs]


if __name__ == "__main__":
    ok = True
    for cid, fn in criteria.ACCEPTANCE.items():
        res = _record(fn(7))
        ok &= res.passed and res.seconds <= criteria.BUDGETS[cid]
    sys.exit(0 if ok else 1)
