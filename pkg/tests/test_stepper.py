import numpy as np
import pytest

from mpfc import norms
from mpfc import operators as op
from mpfc import stepper
from mpfc.energy import dissipation_slack, dissipation_terms, modified_pseudo_energy
from mpfc.grid import GridFunction, Params
from mpfc.stepper import (
    NewtonDivergenceError,
    SchemeState,
    advance,
    chemical_potential_half,
    chi,
    coupled_residuals,
    extrapolant,
    init,
    solve_step,
    step_system_residual,
)

from .conftest import mode, symbol


def smooth_data(p, rng=None, noise=0.0):
    x = (np.arange(p.m)[:, None] + 0.5) * p.h
    y = (np.arange(p.n)[None, :] + 0.5) * p.h
    a = 0.1 + 0.2 * np.cos(2 * np.pi * x / p.Lx) * np.sin(2 * np.pi * 2 * y / p.Ly)
    if noise:
        a = a + noise * rng.standard_normal(a.shape)
    return GridFunction(a, p.h)


def test_chi_examples(rng):
    u = GridFunction(rng.standard_normal((5, 4)), 1.0)
    np.testing.assert_allclose(chi(u, u).data, u.data**3, rtol=1e-15)
    z = GridFunction.constant(0.0, Params(m=5, n=4, h=1.0, s=1.0))
    assert not chi(z, z).data.any()
    one = GridFunction(np.ones((2, 2)), 1.0)
    assert not chi(one, -one).data.any()


def test_chi_derivative_by_finite_differences(rng):
    u = rng.standard_normal((4, 4))
    v = rng.standard_normal((4, 4))
    eps = 1e-6
    plus = chi(GridFunction(u + eps, 1.0), GridFunction(v, 1.0)).data
    minus = chi(GridFunction(u - eps, 1.0), GridFunction(v, 1.0)).data
    np.testing.assert_allclose(stepper._dchi(u, v), (plus - minus) / (2 * eps), rtol=1e-7, atol=1e-9)


def test_extrapolant_examples():
    c = GridFunction(np.full((2, 2), 1.7), 1.0)
    np.testing.assert_allclose(extrapolant(c, c).data, c.data, rtol=1e-15)
    two, zero = GridFunction(np.full((2, 2), 2.0), 1.0), GridFunction(np.zeros((2, 2)), 1.0)
    np.testing.assert_array_equal(extrapolant(two, zero).data, 3.0)
    a, b, k = 0.3, -1.1, 5
    np.testing.assert_allclose(
        extrapolant(c * 0 + (a + k * b), c * 0 + (a + (k - 1) * b)).data, a + (k + 0.5) * b, rtol=1e-15
    )


def test_chemical_potential_of_constant_and_zero():
    p = Params.square(8, 4.0, 0.1, alpha=0.7)
    c = GridFunction.constant(0.4, p)
    np.testing.assert_allclose(chemical_potential_half(c, c, c, p).data, 0.4**3 + 0.7 * 0.4, rtol=1e-14)
    z = GridFunction.zeros(p)
    assert not chemical_potential_half(z, z, z, p).data.any()


def test_chemical_potential_of_mode_two_ways():
    p = Params.square(16, 8.0, 0.1, alpha=0.9)
    phi = mode(p, 2, 1, amplitude=0.3, phase=0.5)
    lam = symbol(p, 2, 1)
    expected = phi.data**3 + (p.alpha - 2 * lam + lam**2) * phi.data
    np.testing.assert_allclose(chemical_potential_half(phi, phi, phi, p).data, expected, atol=1e-12)


def test_step_residual_examples():
    p = Params.square(8, 4.0, 0.2)
    c = GridFunction.constant(0.3, p)
    state = init(c, p)
    assert np.abs(step_system_residual(c, state, p).data).max() < 1e-14

    p0 = p.replace(beta=0.0)
    x = GridFunction(np.linspace(0, 1, 64).reshape(8, 8), p.h)
    phik = mode(p, 1, 1, amplitude=0.1)
    state = SchemeState(phik, phik, GridFunction.zeros(p))
    mu = chemical_potential_half(x, phik, phik, p0)
    expected = x.data - p0.s * op.laplacian(mu).data - phik.data
    np.testing.assert_allclose(step_system_residual(x, state, p0).data, expected, atol=1e-13)


def test_solve_constant_is_fixed_point():
    p = Params.square(8, 4.0, 0.5)
    state = init(GridFunction.constant(-0.2, p), p)
    phi, rep = solve_step(state, p)
    assert rep.iterations <= 1 and rep.converged
    np.testing.assert_allclose(phi.data, -0.2, rtol=1e-15)


def test_solve_small_smooth_data():
    # at h = 1/32 the residual cannot be evaluated below ~1e-8 relative (three
    # stacked Laplacians amplify rounding by (8/h^2)^3), so 1e-10 is out of reach
    p = Params.square(32, 1.0, 1 / 32, tol_rel=1e-7)
    state = init(smooth_data(p), p)
    phi, rep = solve_step(state, p)
    rhs_norm = norms.norm2(GridFunction((1 + 2 * p.beta / p.s) * state.phi_k.data, p.h))
    assert rep.converged
    assert rep.final_residual_norm2 <= p.tol_rel * rhs_norm + p.tol_abs
    assert norms.norm2(step_system_residual(phi, state, p)) == pytest.approx(rep.final_residual_norm2, rel=1e-6)


def test_unique_solvability_from_two_guesses(rng):
    p = Params.square(32, 8.0, 0.5, alpha=0.6)
    state = init(smooth_data(p, rng, 0.05), p)
    state, _ = advance(state, p)
    a, _ = solve_step(state, p, guess=state.phi_k)
    b, _ = solve_step(state, p, guess=extrapolant(state.phi_k, state.phi_km1))
    c, _ = solve_step(state, p)
    tol = p.tol_rel * norms.norm2(state.phi_k) + p.tol_abs
    assert norms.norm2(a - b) <= 10 * tol
    assert norms.norm2(a - c) <= 10 * tol


def test_newton_failure_is_raised(rng):
    p = Params.square(16, 8.0, 10.0, max_newton=1, tol_rel=1e-15, tol_abs=1e-300)
    state = init(GridFunction(0.8 * rng.standard_normal(p.shape), p.h), p)
    with pytest.raises(NewtonDivergenceError):
        solve_step(state, p)


def test_advance_constant_state():
    p = Params.square(8, 4.0, 0.3)
    state = init(GridFunction.constant(0.5, p), p)
    for _ in range(3):
        state, rep = advance(state, p)
        np.testing.assert_allclose(state.phi_k.data, 0.5, rtol=1e-15)
        assert not state.psi_k.data.any()
    assert state.k == 3 and state.time == pytest.approx(0.9)


def test_advance_mass_psi_and_coupled_form(rng):
    p = Params.square(32, 16.0, 0.2, alpha=0.7, beta=2.0)
    state = init(smooth_data(p, rng, 0.05), p)
    m0 = stepper.mass(state.phi_k)
    for _ in range(10):
        nxt, rep = advance(state, p)
        assert abs(rep.mass - m0) <= 1e-12 * abs(m0)
        assert abs(nxt.psi_k.data.mean()) <= 1e-12 * max(np.abs(nxt.psi_k.data).max(), 1e-300)
        r_psi, r_phi = coupled_residuals(state, nxt, p)
        tol = p.tol_rel * norms.norm2(GridFunction(stepper._rhs(state, p), p.h)) + p.tol_abs
        assert norms.norm2(r_psi) <= 10 * tol
        assert norms.norm2(r_phi) <= 1e-13 * (1 + norms.norm2(nxt.phi_k))
        state = nxt


def test_pfc_limit_rate_equals_laplacian_of_mu(rng):
    p = Params.square(32, 16.0, 0.5, alpha=0.5, beta=0.0)
    state = init(smooth_data(p, rng, 0.02), p)
    for _ in range(3):
        nxt, rep = advance(state, p)
        rate = (nxt.phi_k - state.phi_k) / p.s
        mu = chemical_potential_half(nxt.phi_k, state.phi_k, state.phi_km1, p)
        tol = p.tol_rel * norms.norm2(state.phi_k) / p.s + p.tol_abs / p.s
        assert norms.norm2(rate - op.laplacian(mu)) <= 10 * tol
        assert abs(rep.dissipation_residual) <= dissipation_slack(rep.energy.modified, p)
        state = nxt


@pytest.mark.parametrize("s", [1e-3, 0.1, 1.0, 10.0])
def test_energy_monotone_and_telescoping(rng, s):
    p = Params.square(32, 16.0, s, alpha=0.5)
    state = init(smooth_data(p, rng, 0.3), p)
    f0 = modified_pseudo_energy(state, p)
    dissipated, residual_sum, last = 0.0, 0.0, f0
    for _ in range(30):
        nxt, rep = advance(state, p)
        assert rep.energy.modified <= last + dissipation_slack(rep.energy.modified, p)
        kinetic, curvature = dissipation_terms(state, nxt, p)
        dissipated += kinetic + curvature
        residual_sum += abs(rep.dissipation_residual)
        last = rep.energy.modified
        state = nxt
    assert abs(last + dissipated - f0) <= residual_sum + 1e-12 * abs(f0)


def test_small_step_decrease_dominated_by_kinetic_term():
    p = Params.square(32, 16.0, 1e-4, alpha=0.5)
    state = init(smooth_data(p), p)
    state, _ = advance(state, p)
    before = modified_pseudo_energy(state, p)
    nxt, rep = advance(state, p)
    kinetic, curvature = dissipation_terms(state, nxt, p)
    assert curvature < 1e-3 * kinetic
    assert before - rep.energy.modified == pytest.approx(kinetic, rel=1e-6)


def test_init_rejects_wrong_shape():
    p = Params.square(8, 4.0, 0.1)
    with pytest.raises(ValueError):
        init(GridFunction(np.zeros((4, 4)), p.h), p)


def test_results_independent_of_worker_threads():
    from concurrent.futures import ThreadPoolExecutor

    p = Params.square(32, 16.0, 0.25)

    def go(_):
        return stepper.integrate(smooth_data(p), p, 5).phi_k.data

    serial = go(0)
    with ThreadPoolExecutor(4) as pool:
        for out in pool.map(go, range(4)):
            assert np.array_equal(out, serial)


def test_divergence_message_reports_roundoff_floor():
    p = Params.square(32, 1.0, 1 / 32)
    with pytest.raises(NewtonDivergenceError, match="roundoff floor"):
        solve_step(init(smooth_data(p), p), p)
