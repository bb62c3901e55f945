"""Discrete norms on periodic cell-centered grids, including the ``-1`` norm.

Every norm carries the ``h^2`` quadrature weight, so ``norm2(1)`` is
``sqrt(Lx * Ly)``.  The ``-1`` norm is defined on mean-zero fields through
the periodic inverse of the 5-point Laplacian, which is diagonal in the
discrete Fourier basis.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .grid import GridFunction
from .operators import _east_diff, _lap, _north_diff

MEAN_ZERO_RTOL = 1e-12


def norm2(phi: GridFunction) -> float:
    return math.sqrt(phi.h * phi.h * float(np.sum(phi.data * phi.data)))


def norm4(phi: GridFunction) -> float:
    return (phi.h * phi.h * float(np.sum(phi.data**4))) ** 0.25


def norm_inf(phi: GridFunction) -> float:
    return float(np.max(np.abs(phi.data)))


def grad_norm2(phi: GridFunction) -> float:
    dx, dy = _east_diff(phi.data, phi.h), _north_diff(phi.data, phi.h)
    return math.sqrt(phi.h * phi.h * float(np.sum(dx * dx) + np.sum(dy * dy)))


def grad_norm4(phi: GridFunction) -> float:
    dx, dy = _east_diff(phi.data, phi.h), _north_diff(phi.data, phi.h)
    return (phi.h * phi.h * float(np.sum(dx**4) + np.sum(dy**4))) ** 0.25


def sobolev_norms(phi: GridFunction) -> tuple[float, float]:
    """Return ``(||phi||_{1,2}, ||phi||_{2,2})``."""
    l2 = norm2(phi) ** 2
    g2 = grad_norm2(phi) ** 2
    lap = _lap(phi.data, phi.h)
    d2 = phi.h * phi.h * float(np.sum(lap * lap))
    return math.sqrt(l2 + g2), math.sqrt(l2 + g2 + d2)


class MeanZeroField:
    """A grid function certified to have zero mean.

    Construction fails if ``|mean| > 1e-12 * ||phi||_inf``.  Use
    :meth:`project` to remove the mean explicitly instead.
    """

    __slots__ = ("field",)

    def __init__(self, phi: GridFunction):
        avg = float(phi.data.mean())
        scale = float(np.max(np.abs(phi.data))) if phi.data.size else 0.0
        if abs(avg) > MEAN_ZERO_RTOL * scale:
            raise ValueError(
                f"field is not mean-zero (mean {avg:.3e}, max {scale:.3e}); "
                "the periodic Poisson problem has no solution"
            )
        self.field = phi

    @classmethod
    def project(cls, phi: GridFunction) -> "MeanZeroField":
        return cls(phi.like(phi.data - phi.data.mean()))

    @property
    def data(self) -> np.ndarray:
        return self.field.data

    @property
    def h(self) -> float:
        return self.field.h


def _as_mean_zero(phi) -> MeanZeroField:
    return phi if isinstance(phi, MeanZeroField) else MeanZeroField(phi)


def laplacian_symbol(m: int, n: int, h: float) -> np.ndarray:
    """Eigenvalues of ``-lap`` on the ``rfft2`` wavenumber grid, shape ``(m, n//2 + 1)``."""
    k = np.arange(m)[:, None]
    l = np.arange(n // 2 + 1)[None, :]
    return (4.0 / (h * h)) * (np.sin(np.pi * k / m) ** 2 + np.sin(np.pi * l / n) ** 2)


class PoissonSolver:
    """Spectral inverse of ``-lap`` on mean-zero periodic fields."""

    def __init__(self, m: int, n: int, h: float):
        self.shape = (m, n)
        self.h = h
        self.symbol = laplacian_symbol(m, n, h)
        inv = np.zeros_like(self.symbol)
        inv[self.symbol > 0] = 1.0 / self.symbol[self.symbol > 0]
        self._inverse = inv

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Mean-zero ``psi`` with ``-lap psi = rhs``; the mean of ``rhs`` is ignored."""
        return np.fft.irfft2(np.fft.rfft2(rhs) * self._inverse, s=self.shape)


@lru_cache(maxsize=32)
def poisson_solver(m: int, n: int, h: float) -> PoissonSolver:
    return PoissonSolver(m, n, h)


def inv_laplacian(phi) -> GridFunction:
    """Unique mean-zero periodic ``psi`` with ``-lap psi = phi``."""
    phi = _as_mean_zero(phi)
    m, n = phi.data.shape
    return GridFunction(poisson_solver(m, n, phi.h).solve(phi.data), phi.h)


def inner_minus1(a, b) -> float:
    a, b = _as_mean_zero(a), _as_mean_zero(b)
    psi = inv_laplacian(b)
    return a.h * a.h * float(np.sum(a.data * psi.data))


def norm_minus1(phi) -> float:
    return math.sqrt(max(inner_minus1(phi, phi), 0.0))


def bramble_constant(Lx: float, Ly: float) -> float:
    """Constant in ``||phi||_4 <= C ||phi||_{1,2}``."""
    return (2.0 * max(max(1.0 / Lx, Lx), max(1.0 / Ly, Ly))) ** 0.25


def sobolev_constant(Lx: float, Ly: float) -> float:
    """Constant in ``||phi||_inf^2 <= C ||phi||_{2,2}^2``."""
    return 4.0 * max(1.0 / (Lx * Ly), Lx / Ly, Ly / Lx, Lx * Ly / 2.0)


def poincare_constant(Lx: float, Ly: float) -> float:
    """Working Poincare constant ``max(Lx, Ly) / 2``; see the test notes for its status."""
    return max(Lx, Ly) / 2.0


def embedding_constant(Lx: float, Ly: float) -> float:
    """Constant in ``||grad phi||_4 <= C ||lap phi||_2``, built from the Bramble and Poincare constants."""
    return bramble_constant(Lx, Ly) * math.sqrt(poincare_constant(Lx, Ly) ** 2 + 1.0)
