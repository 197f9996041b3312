import numpy as np
import pytest

from wwbreak.spectral import Grid


@pytest.fixture
def grid64():
    return Grid(1, 64)


@pytest.fixture
def grid128():
    return Grid(1, 128)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def smooth_field(grid, rng, modes=6, amp=1.0, decay=2.0):
    """Random real trigonometric polynomial with algebraically decaying modes."""
    x = grid.x[0]
    out = np.zeros(grid.shape)
    for m in range(1, modes + 1):
        a, b = rng.standard_normal(2)
        out += (a * np.cos(m * x) + b * np.sin(m * x)) / m**decay
    return amp * out


def band_limited(grid, rng, kmax):
    """Random real field with integer modes up to ``kmax`` (1-D or 2-D)."""
    uh = np.zeros(grid.shape, dtype=complex)
    m = np.rint(grid.kmag * grid.L / (2 * np.pi))
    keep = m <= kmax
    uh[keep] = rng.standard_normal(keep.sum()) + 1j * rng.standard_normal(keep.sum())
    return np.fft.ifftn(uh).real * grid.size


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for result in sorted(RESULTS, key=lambda r: r.number):
            terminalreporter.write_line(result.line())
