import numpy as np
import pytest


def jordan_nilpotent(sizes):
    """Block-diagonal nilpotent matrix with Jordan blocks of the given sizes."""
    n = sum(sizes)
    N = np.zeros((n, n))
    pos = 0
    for s in sizes:
        for k in range(s - 1):
            N[pos + k, pos + k + 1] = 1.0
        pos += s
    return N


def random_nilpotent(rng, n, q):
    """A similarity transform of a Jordan nilpotent with largest block ``q``."""
    sizes = [q]
    while sum(sizes) < n:
        sizes.append(int(rng.integers(1, min(q, n - sum(sizes)) + 1)))
    J = jordan_nilpotent(sizes)
    S = np.eye(n) + 0.3 * rng.standard_normal((n, n))
    return S @ J @ np.linalg.inv(S)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion; printed in the summary."""

    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
