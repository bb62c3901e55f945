import math

import numpy as np
import pytest

from mpfc import norms
from mpfc.energy import (
    discrete_energy,
    dissipation_identity_residual,
    energy_breakdown,
    modified_pseudo_energy,
    pseudo_energy,
)
from mpfc.grid import GridFunction, Params
from mpfc.stepper import SchemeState, advance, init

from .conftest import mode, symbol

P = Params.square(16, 8.0, 0.1, alpha=0.8, beta=0.5)


def test_energy_of_zero_and_constant():
    assert discrete_energy(GridFunction.zeros(P), P) == 0.0
    c = 0.3
    expected = (c**4 / 4 + P.alpha * c**2 / 2) * P.Lx * P.Ly
    assert discrete_energy(GridFunction.constant(c, P), P) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("kx,ky", [(1, 0), (2, 1), (3, 3)])
def test_energy_of_mode_two_ways(kx, ky):
    a = 0.4
    phi = mode(P, kx, ky, amplitude=a, phase=0.3)
    lam = symbol(P, kx, ky)
    l2 = norms.norm2(phi) ** 2
    # quadratic terms from eigen-relations, quartic term by direct summation
    spectral = 0.25 * norms.norm4(phi) ** 4 + l2 * (P.alpha / 2 - lam + lam**2 / 2)
    assert discrete_energy(phi, P) == pytest.approx(spectral, rel=1e-12)


def test_breakdown_sums(rng):
    phi = GridFunction(rng.standard_normal(P.shape), P.h)
    e = energy_breakdown(phi, P)
    assert e.F == pytest.approx(e.quartic + e.quadratic + e.gradient + e.biharmonic, rel=1e-15)
    assert e.F == pytest.approx(e.convex - e.expansive)
    assert e.expansive == pytest.approx(norms.grad_norm2(phi) ** 2)


def test_pseudo_energy_cases(rng):
    phi = GridFunction(rng.standard_normal(P.shape), P.h)
    assert pseudo_energy(phi, GridFunction.zeros(P), P) == discrete_energy(phi, P)
    psi = norms.MeanZeroField.project(GridFunction(rng.standard_normal(P.shape), P.h))
    kinetic = 0.5 * P.beta * norms.norm_minus1(psi) ** 2
    assert pseudo_energy(phi, psi, P) == pytest.approx(discrete_energy(phi, P) + kinetic, rel=1e-14)
    p0 = P.replace(beta=0.0)
    assert pseudo_energy(phi, psi, p0) == discrete_energy(phi, p0)


def test_pseudo_energy_rejects_non_mean_zero():
    with pytest.raises(ValueError):
        pseudo_energy(GridFunction.zeros(P), GridFunction.constant(1.0, P), P)


def test_modified_energy_lag_term(rng):
    phi = GridFunction(rng.standard_normal(P.shape), P.h)
    prev = GridFunction(rng.standard_normal(P.shape), P.h)
    zero = GridFunction.zeros(P)
    same = SchemeState(phi, phi, zero)
    assert modified_pseudo_energy(same, P) == pseudo_energy(phi, zero, P)
    lagged = SchemeState(phi, prev, zero)
    lag = 0.5 * norms.grad_norm2(phi - prev) ** 2
    assert modified_pseudo_energy(lagged, P) == pytest.approx(discrete_energy(phi, P) + lag, rel=1e-14)
    assert modified_pseudo_energy(lagged, P) >= discrete_energy(phi, P)


def test_init_energy_equals_discrete_energy(rng):
    phi0 = GridFunction(0.2 * rng.standard_normal(P.shape), P.h)
    assert modified_pseudo_energy(init(phi0, P), P) == discrete_energy(phi0, P)
    assert modified_pseudo_energy(init(GridFunction.zeros(P), P), P) == 0.0
    c = 0.1
    expected = (c**4 / 4 + P.alpha * c**2 / 2) * P.Lx * P.Ly
    assert modified_pseudo_energy(init(GridFunction.constant(c, P), P), P) == pytest.approx(expected, rel=1e-14)


def test_residual_vanishes_at_steady_constant():
    state = init(GridFunction.constant(0.25, P), P)
    nxt, _ = advance(state, P)
    assert dissipation_identity_residual(state, nxt, P) == pytest.approx(0.0, abs=1e-14)


def test_residual_small_after_one_step(rng):
    x = (np.arange(P.m)[:, None] + 0.5) * P.h
    phi0 = GridFunction(0.1 + 0.3 * np.cos(2 * np.pi * x / P.Lx) + 0.05 * rng.standard_normal(P.shape), P.h)
    state = init(phi0, P)
    for _ in range(5):
        nxt, report = advance(state, P)
        res = dissipation_identity_residual(state, nxt, P)
        assert res == report.dissipation_residual
        assert abs(res) <= 1e-8 * (1 + abs(report.energy.modified))
        state = nxt
