import sys

import numpy as np
import pytest

from nhspectra.model import BoseHubbard, NonBH5, TridiagonalOperator, UnconventionalBH


def catalog(max_dim=12, gammas=(0.0, 0.3, 0.7, 0.95, 1.4)):
    """(label, operator) pairs covering every model family up to ``max_dim``."""
    out = []
    for n in range(0, max_dim):
        for g in gammas:
            out.append((f"ubh{n}-g{g}", UnconventionalBH(n, g).build()))
    for n in (1, 3, 6):
        if n + 1 <= max_dim:
            out.append((f"bh{n}-int", BoseHubbard(n, 0.2 + 0.4j, 0.8, 0.5).build()))
            out.append((f"bh{n}-cplx", BoseHubbard(n, 0.3j, 1 - 0.2j, 0.1 + 0.1j).build()))
    if max_dim >= 5:
        for g in gammas:
            out.append((f"nonbh5-g{g}", NonBH5(g).build()))
    rng = np.random.default_rng(7)
    for n in (1, 2, 4, min(9, max_dim)):
        z = lambda m: rng.normal(size=m) + 1j * rng.normal(size=m)  # noqa: E731
        out.append((f"random{n}", TridiagonalOperator(z(n), z(n - 1), z(n - 1))))
    return out


GAMMA_GRID = tuple(round(0.1 * k, 1) for k in range(10))


def acceptance_catalog(max_dim=12):
    """Every model family on the standard grid gamma = 0, 0.1, ..., 0.9."""
    out = []
    for g in GAMMA_GRID:
        for n in range(max_dim):
            out.append((f"ubh{n}-g{g}", UnconventionalBH(n, g).build()))
        for n in (1, 3, 6):
            if n + 1 <= max_dim:
                out.append((f"bh{n}-g{g}", BoseHubbard(n, 0.0, 1.0, 0.5).with_gamma(g).build()))
        if max_dim >= 5:
            out.append((f"nonbh5-g{g}", NonBH5(g).build()))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
