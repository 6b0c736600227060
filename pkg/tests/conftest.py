import numpy as np
import pytest

from doslb import lp

_solve = lp.solve


@pytest.fixture(autouse=True)
def certified_lps(monkeypatch):
    """Every optimal LP solved during a test must carry valid certificates."""

    def checked(p):
        s = _solve(p)
        if s.optimal:
            v = lp.certificate_violations(p, s)
            assert lp.certificates_hold(p, s), v
        return s

    monkeypatch.setattr(lp, "solve", checked)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash.setdefault(_VERDICTS, [])

    def record(n, ok, detail):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
