"""Periodic cell-centered difference operators.

``D`` maps centers to edges by differencing, ``A`` by averaging, and
``d`` maps edges back to centers.  The 5-point Laplacian is
``lap = d_x D_x + d_y D_y``; its square and cube are formed by
composition.  All functions are linear and pure.

The leading-underscore helpers work on raw ``(m, n)`` arrays and are what
the time stepper uses in its inner loops.
"""

from __future__ import annotations

import numpy as np

from .grid import EdgeField, GridFunction


def _east_diff(a, h):
    return (np.roll(a, -1, axis=0) - a) / h


def _north_diff(a, h):
    return (np.roll(a, -1, axis=1) - a) / h


def _lap_x(a, h):
    return (np.roll(a, -1, axis=0) - 2.0 * a + np.roll(a, 1, axis=0)) / (h * h)


def _lap_y(a, h):
    return (np.roll(a, -1, axis=1) - 2.0 * a + np.roll(a, 1, axis=1)) / (h * h)


def _lap(a, h):
    return _lap_x(a, h) + _lap_y(a, h)


def d_center_to_edge(phi: GridFunction) -> EdgeField:
    """Discrete gradient ``(D_x phi, D_y phi)`` on the edges."""
    return EdgeField.from_periodic(_east_diff(phi.data, phi.h), _north_diff(phi.data, phi.h), phi.h)


def a_center_to_edge(phi: GridFunction) -> EdgeField:
    """Center-to-edge averages ``(A_x phi, A_y phi)``."""
    a = phi.data
    return EdgeField.from_periodic(
        0.5 * (np.roll(a, -1, axis=0) + a), 0.5 * (np.roll(a, -1, axis=1) + a), phi.h
    )


gradient = d_center_to_edge


def d_x(u: EdgeField) -> GridFunction:
    return GridFunction((u.ew[1:] - u.ew[:-1]) / u.h, u.h)


def d_y(u: EdgeField) -> GridFunction:
    return GridFunction((u.ns[:, 1:] - u.ns[:, :-1]) / u.h, u.h)


def d_edge_to_center(u: EdgeField) -> GridFunction:
    """Discrete divergence ``d_x u_ew + d_y u_ns``."""
    return GridFunction((u.ew[1:] - u.ew[:-1] + u.ns[:, 1:] - u.ns[:, :-1]) / u.h, u.h)


def laplacian(phi: GridFunction) -> GridFunction:
    return GridFunction(_lap(phi.data, phi.h), phi.h)


def laplacian_x(phi: GridFunction) -> GridFunction:
    return GridFunction(_lap_x(phi.data, phi.h), phi.h)


def laplacian_y(phi: GridFunction) -> GridFunction:
    return GridFunction(_lap_y(phi.data, phi.h), phi.h)


def bilaplacian(phi: GridFunction) -> GridFunction:
    return GridFunction(_lap(_lap(phi.data, phi.h), phi.h), phi.h)


def trilaplacian(phi: GridFunction) -> GridFunction:
    h = phi.h
    return GridFunction(_lap(_lap(_lap(phi.data, h), h), h), h)


def mixed_cross_sum(phi: GridFunction) -> float:
    """``h^2 <lap_x phi, lap_y phi>``; nonnegative for periodic fields."""
    h = phi.h
    return float(h * h * np.sum(_lap_x(phi.data, h) * _lap_y(phi.data, h)))


def laplacian_x_product_expansion(f: GridFunction, g: GridFunction, w: GridFunction) -> GridFunction:
    """Expanded form of ``lap_x(f g w)`` in terms of one-sided edge differences.

    Equal to ``laplacian_x(f * g * w)`` exactly; kept as an independent
    evaluation path for testing the product rule of the 3-point stencil.
    """
    h = f.h
    F, G, W = f.data, g.data, w.data
    dfe, dge, dwe = _east_diff(F, h), _east_diff(G, h), _east_diff(W, h)
    dfw, dgw, dww = (np.roll(e, 1, axis=0) for e in (dfe, dge, dwe))
    out = F * G * _lap_x(W, h) + F * W * _lap_x(G, h) + G * W * _lap_x(F, h)
    out += F * (dge * dwe + dgw * dww)
    out += G * (dfe * dwe + dfw * dww)
    out += np.roll(W, -1, axis=0) * dfe * dge + np.roll(W, 1, axis=0) * dfw * dgw
    return GridFunction(out, h)


def _trapezoid(a, axis):
    return a.sum(axis=axis) - 0.5 * (a.take(0, axis=axis) + a.take(-1, axis=axis))


def edge_inner(u: EdgeField, v: EdgeField) -> float:
    """``h^2 <u, v>_ew + h^2 <u, v>_ns``, seam edges weighted by 1/2.

    For periodic edge fields this is the plain sum over the ``m * n`` distinct edges.
    """
    h = u.h
    return float(h * h * (np.sum(_trapezoid(u.ew * v.ew, 0)) + np.sum(_trapezoid(u.ns * v.ns, 1))))


def center_inner(phi: GridFunction, psi: GridFunction) -> float:
    """``h^2 <phi, psi>``."""
    return float(phi.h * phi.h * np.sum(phi.data * psi.data))
