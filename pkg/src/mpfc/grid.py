"""Periodic cell-centered grids.

Cell ``(i, j)`` with ``1 <= i <= m``, ``1 <= j <= n`` has its center at
``((i - 1/2) h, (j - 1/2) h)``.  Arrays are stored with shape ``(m, n)``:
axis 0 is ``x`` (index ``i``), axis 1 is ``y`` (index ``j``), C order, so
``j`` varies fastest.  Ghost cells are never stored; periodic wrapping is
done on access.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

SNAPSHOT_MAGIC = b"MPFC0001"
_HEADER = struct.Struct("<8sIIdd")


@dataclass(frozen=True)
class Params:
    """Physical, geometric and solver parameters of one simulation."""

    m: int
    n: int
    h: float
    s: float
    T: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    Lx: float | None = None
    Ly: float | None = None
    tol_rel: float = 1e-10
    tol_abs: float = 1e-13
    max_newton: int = 50

    def __post_init__(self):
        if self.Lx is None:
            object.__setattr__(self, "Lx", self.m * self.h)
        if self.Ly is None:
            object.__setattr__(self, "Ly", self.n * self.h)
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive integers")
        if not self.h > 0:
            raise ValueError("h must be > 0")
        if not self.s > 0:
            raise ValueError("s must be > 0")
        if not self.T > 0:
            raise ValueError("T must be > 0")
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if not self.beta >= 0:
            raise ValueError("beta must be >= 0")
        if not (self.tol_rel > 0 and self.tol_abs > 0):
            raise ValueError("tol_rel and tol_abs must be > 0")
        if self.max_newton < 1:
            raise ValueError("max_newton must be a positive integer")
        eps = np.finfo(float).eps
        for length, cells, name in ((self.Lx, self.m, "Lx"), (self.Ly, self.n, "Ly")):
            if abs(length - cells * self.h) > 8 * eps * max(length, 1.0):
                raise ValueError(f"{name} = {length!r} is not {cells} * h = {cells * self.h!r}")

    @classmethod
    def square(cls, m: int, L: float, s: float, **kw) -> "Params":
        """Params for an ``m x m`` grid on ``[0, L)^2``."""
        return cls(m=m, n=m, h=L / m, s=s, Lx=L, Ly=L, **kw)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    def replace(self, **changes) -> "Params":
        kw = {k: getattr(self, k) for k in self.__dataclass_fields__}
        kw.update(changes)
        if "h" in changes or "m" in changes or "n" in changes:
            if "Lx" not in changes:
                kw["Lx"] = None
            if "Ly" not in changes:
                kw["Ly"] = None
        return Params(**kw)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float, order="C")
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Periodic cell-centered scalar field on an ``m x n`` grid.

    Supports ``+``, ``-``, scalar ``*`` and pointwise ``*`` between fields.
    ``phi[i, j]`` uses the 1-based, periodically wrapped cell index.
    """

    data: np.ndarray
    h: float

    def __post_init__(self):
        a = _frozen(self.data)
        if a.ndim != 2:
            raise ValueError("grid data must be two-dimensional")
        object.__setattr__(self, "data", a)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    def __getitem__(self, ij):
        i, j = ij
        return self.data[wrap_index(i, self.m) - 1, wrap_index(j, self.n) - 1]

    def _other(self, other):
        if isinstance(other, GridFunction):
            if other.shape != self.shape or other.h != self.h:
                raise ValueError("grid functions live on different grids")
            return other.data
        return other

    def __add__(self, other):
        return GridFunction(self.data + self._other(other), self.h)

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.data - self._other(other), self.h)

    def __rsub__(self, other):
        return GridFunction(self._other(other) - self.data, self.h)

    def __mul__(self, other):
        return GridFunction(self.data * self._other(other), self.h)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFunction(self.data / self._other(other), self.h)

    def __neg__(self):
        return GridFunction(-self.data, self.h)

    def __pow__(self, p):
        return GridFunction(self.data**p, self.h)

    def like(self, data) -> "GridFunction":
        """New field on the same grid."""
        return GridFunction(data, self.h)

    @classmethod
    def zeros(cls, params: Params) -> "GridFunction":
        return cls(np.zeros(params.shape), params.h)

    @classmethod
    def constant(cls, c: float, params: Params) -> "GridFunction":
        return cls(np.full(params.shape, float(c)), params.h)


@dataclass(frozen=True, eq=False)
class EdgeField:
    """Edge-centered pair: ``ew`` at ``(i+1/2, j)``, ``i = 0..m``; ``ns`` at ``(i, j+1/2)``, ``j = 0..n``.

    Row ``ew[0]`` is the west seam ``(1/2, j)`` and ``ew[m]`` the east seam
    ``(m+1/2, j)``; for periodic data the two coincide.
    """

    ew: np.ndarray
    ns: np.ndarray
    h: float

    def __post_init__(self):
        ew, ns = _frozen(self.ew), _frozen(self.ns)
        if ew.shape[1] + 1 != ns.shape[1] or ew.shape[0] != ns.shape[0] + 1:
            raise ValueError("ew must be (m+1, n) and ns must be (m, n+1)")
        object.__setattr__(self, "ew", ew)
        object.__setattr__(self, "ns", ns)

    @property
    def shape(self) -> tuple[int, int]:
        return self.ns.shape[0], self.ew.shape[1]

    @classmethod
    def from_periodic(cls, ew: np.ndarray, ns: np.ndarray, h: float) -> "EdgeField":
        """Build from the ``m x n`` arrays of east edges ``(i+1/2, j)`` and north edges ``(i, j+1/2)``."""
        ew = np.concatenate([ew[-1:], ew], axis=0)
        ns = np.concatenate([ns[:, -1:], ns], axis=1)
        return cls(ew, ns, h)

    def is_periodic(self) -> bool:
        return bool(np.array_equal(self.ew[0], self.ew[-1]) and np.array_equal(self.ns[:, 0], self.ns[:, -1]))

    def __add__(self, other: "EdgeField") -> "EdgeField":
        return EdgeField(self.ew + other.ew, self.ns + other.ns, self.h)

    def __mul__(self, c) -> "EdgeField":
        return EdgeField(self.ew * c, self.ns * c, self.h)

    __rmul__ = __mul__


def wrap_index(i: int, extent: int) -> int:
    """Reduce a 1-based index periodically into ``1..extent``."""
    return (i - 1) % extent + 1


def cell_centers(params: Params) -> tuple[np.ndarray, np.ndarray]:
    """Meshgrid ``(X, Y)`` of cell-center coordinates, ``indexing='ij'``."""
    x = (np.arange(1, params.m + 1) - 0.5) * params.h
    y = (np.arange(1, params.n + 1) - 0.5) * params.h
    return np.meshgrid(x, y, indexing="ij")


def sample(f: Callable[[np.ndarray, np.ndarray], np.ndarray], params: Params) -> GridFunction:
    """Evaluate ``f(x, y)`` at every cell center.

    ``f`` must accept broadcastable arrays; scalars are broadcast to the grid.
    """
    X, Y = cell_centers(params)
    values = np.broadcast_to(np.asarray(f(X, Y), dtype=float), X.shape)
    return GridFunction(values, params.h)


def mean(phi: GridFunction) -> float:
    return float(phi.data.mean())


def cosine_modes(params: Params, constant: float = 0.0, modes=()) -> GridFunction:
    """Constant plus a sum of products of cosines.

    Each mode is ``(amplitude, kx, ky, phase_x, phase_y)`` and contributes
    ``amplitude * cos(2 pi kx x / Lx + phase_x) * cos(2 pi ky y / Ly + phase_y)``.
    """

    def f(x, y):
        out = np.full(np.broadcast(x, y).shape, float(constant))
        for a, kx, ky, px, py in modes:
            out += a * np.cos(2 * math.pi * kx * x / params.Lx + px) * np.cos(2 * math.pi * ky * y / params.Ly + py)
        return out

    return sample(f, params)


@dataclass
class Snapshot:
    phi: GridFunction
    time: float = field(default=0.0)


def write_snapshot(path, phi: GridFunction, time: float) -> None:
    """Write the binary snapshot: 32-byte little-endian header, then ``m*n`` float64 values, j fastest."""
    m, n = phi.shape
    payload = _HEADER.pack(SNAPSHOT_MAGIC, m, n, float(phi.h), float(time))
    payload += np.ascontiguousarray(phi.data, dtype="<f8").tobytes(order="C")
    Path(path).write_bytes(payload)


def read_snapshot(path) -> Snapshot:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated snapshot header")
    magic, m, n, h, time = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 8 * m * n
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(m, n)
    return Snapshot(GridFunction(data.astype(float), h), time)
