import numpy as np
import pytest

from softcov import binary_erasure, binary_symmetric, build_channel, noiseless, product_channel

ACCEPTANCE_LINES = []


@pytest.fixture
def identity():
    return noiseless(2)


@pytest.fixture
def bsc():
    return binary_symmetric(0.1)


@pytest.fixture
def bec():
    return binary_erasure(0.3)


@pytest.fixture
def trivial():
    return product_channel([0.5, 0.5], [0.3, 0.7])


def random_channel(seed, nx=None, ny=None, sparse=False):
    """Dirichlet-random channel with random alphabet sizes up to 4."""
    rng = np.random.default_rng(seed)
    nx = nx or int(rng.integers(2, 5))
    ny = ny or int(rng.integers(2, 5))
    W = rng.dirichlet(np.ones(ny), size=nx)
    if sparse:
        W[rng.random(W.shape) < 0.3] = 0.0
        W[np.arange(nx), rng.integers(0, ny, nx)] += 0.2
        W /= W.sum(axis=1, keepdims=True)
    px = rng.dirichlet(np.ones(nx))
    return build_channel(px, W)


@pytest.fixture
def acceptance_report():
    def record(number, name, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2} {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
