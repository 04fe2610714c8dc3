import sys

import numpy as np
import pytest


def random_alpha(rng, n, zero_frac=0.1, ties=True):
    """Nonnegative coherences with a few zeros and repeated values."""
    a = rng.uniform(0.01, 1.0, n) ** rng.uniform(0.5, 3.0)
    if ties and n > 3:
        a[rng.integers(0, n, n // 4)] = a[0]
    if zero_frac and n > 2:
        a[rng.random(n) < zero_frac] = 0.0
    if not np.any(a > 0):
        a[0] = 0.5
    return a


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}: {detail}")
