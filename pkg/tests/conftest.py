import numpy as np
import pytest

from mpfc.grid import GridFunction, Params


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def params():
    return Params.square(16, 2.0, 0.05)


def random_grid(rng, m, n, h, scale=1.0):
    return GridFunction(scale * rng.standard_normal((m, n)), h)


def mode(params, kx, ky, amplitude=1.0, phase=0.0):
    """Sampled ``amplitude * cos(2 pi (kx x / Lx + ky y / Ly) + phase)``."""
    x = (np.arange(params.m)[:, None] + 0.5) * params.h
    y = (np.arange(params.n)[None, :] + 0.5) * params.h
    return GridFunction(amplitude * np.cos(2 * np.pi * (kx * x / params.Lx + ky * y / params.Ly) + phase), params.h)


def symbol(params, kx, ky):
    """Eigenvalue of ``-lap`` for wavenumbers ``(kx, ky)``."""
    return (4 / params.h**2) * (np.sin(np.pi * kx * params.h / params.Lx) ** 2 + np.sin(np.pi * ky * params.h / params.Ly) ** 2)


_ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record the one-line verdict of an acceptance criterion."""

    def record(number, passed, detail, elapsed=None):
        timing = "" if elapsed is None else f" [{elapsed:.1f} s]"
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'} {detail}{timing}"
        _ACCEPTANCE_LINES[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(_ACCEPTANCE_LINES[number])
