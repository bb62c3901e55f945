"""Second-order convex-splitting time stepper for the MPFC equation.

One step solves the nonlinear equation

    (1 + 2 beta/s) phi_new - s lap mu(phi_new) = (1 + 2 beta/s) phi_k + 2 beta psi_k,

    mu = chi(phi_new, phi_k) + alpha phi_half + 2 lap phi_hat + lap^2 phi_half,

for ``phi_new`` and then updates the velocity-like variable ``psi``.  The
nonlinear solve is Newton's method with GMRES inner solves, preconditioned
by the exact Fourier inverse of the Jacobian with its variable coefficient
replaced by its mean.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .energy import EnergyBreakdown, dissipation_identity_residual, state_energy
from .grid import GridFunction, Params
from .norms import laplacian_symbol
from .operators import _lap

log = logging.getLogger(__name__)

GMRES_RTOL = 1e-8


class NewtonDivergenceError(RuntimeError):
    """The step equation was not solved to tolerance within ``max_newton`` iterations."""


@dataclass(frozen=True, eq=False)
class SchemeState:
    phi_k: GridFunction
    phi_km1: GridFunction
    psi_k: GridFunction
    k: int = 0
    time: float = 0.0


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    final_residual_norm2: float
    converged: bool
    linear_iterations: int = 0


@dataclass(frozen=True)
class StepReport:
    step: int
    time: float
    mass: float
    energy: EnergyBreakdown
    dissipation_residual: float
    solve: SolveReport = field(repr=False)

    @property
    def newton_iters(self) -> int:
        return self.solve.iterations

    @property
    def newton_residual(self) -> float:
        return self.solve.final_residual_norm2


def init(phi0: GridFunction, params: Params) -> SchemeState:
    """Start-up state: ``phi^{-1} = phi^0`` and ``psi^0 = 0``."""
    if phi0.shape != params.shape:
        raise ValueError(f"initial data has shape {phi0.shape}, grid is {params.shape}")
    return SchemeState(phi0, phi0, GridFunction.zeros(params), 0, 0.0)


def chi(phi_new: GridFunction, phi_old: GridFunction) -> GridFunction:
    """Secant form of the cubic term; ``chi(u, u) == u**3``."""
    u, v = phi_new.data, phi_old.data
    return phi_new.like(0.5 * (u * u + v * v) * 0.5 * (u + v))


def _dchi(u, v):
    return 0.5 * u * (u + v) + 0.25 * (u * u + v * v)


def extrapolant(phi_k: GridFunction, phi_km1: GridFunction) -> GridFunction:
    """``(3 phi^k - phi^{k-1}) / 2``."""
    return phi_k.like(1.5 * phi_k.data - 0.5 * phi_km1.data)


def _mu(u, state: SchemeState, params: Params, lap_hat=None):
    h = params.h
    v = state.phi_k.data
    half = 0.5 * (u + v)
    if lap_hat is None:
        lap_hat = _lap(1.5 * v - 0.5 * state.phi_km1.data, h)
    return 0.5 * (u * u + v * v) * half + params.alpha * half + 2.0 * lap_hat + _lap(_lap(half, h), h)


def chemical_potential_half(
    phi_new: GridFunction, phi_k: GridFunction, phi_km1: GridFunction, params: Params
) -> GridFunction:
    """Chemical potential at the half step."""
    state = SchemeState(phi_k, phi_km1, GridFunction.zeros(params))
    return phi_new.like(_mu(phi_new.data, state, params))


def _rhs(state: SchemeState, params: Params) -> np.ndarray:
    return (1.0 + 2.0 * params.beta / params.s) * state.phi_k.data + 2.0 * params.beta * state.psi_k.data


def _residual(u, rhs, state, params, lap_hat=None):
    s = params.s
    return (1.0 + 2.0 * params.beta / s) * u - s * _lap(_mu(u, state, params, lap_hat), params.h) - rhs


def step_system_residual(candidate: GridFunction, state: SchemeState, params: Params) -> GridFunction:
    """Residual of the step equation at ``candidate``."""
    return candidate.like(_residual(candidate.data, _rhs(state, params), state, params))


def _norm2(a, h):
    return h * math.sqrt(float(np.sum(a * a)))


def roundoff_floor(u: np.ndarray, params: Params) -> float:
    """Rough size of rounding noise in the step residual at ``u``.

    Three stacked Laplacians amplify rounding in ``u`` by up to ``(8/h^2)^3``.
    """
    eps = np.finfo(float).eps
    return eps * 0.5 * params.s * (8.0 / params.h**2) ** 3 * _norm2(u, params.h)


class _Jacobian:
    def __init__(self, u, state: SchemeState, params: Params, symbol: np.ndarray):
        self.params = params
        self.shape = u.shape
        self.coef = _dchi(u, state.phi_k.data) + 0.5 * params.alpha
        s, h = params.s, params.h
        self.diag = 1.0 + 2.0 * params.beta / s
        lam = symbol
        frozen = self.diag + s * lam * (float(self.coef.mean()) + 0.5 * lam * lam)
        self.inv_frozen = 1.0 / frozen
        self.inv_frozen[0, 0] = 0.0

    def matvec(self, x):
        v = x.reshape(self.shape)
        h, s = self.params.h, self.params.s
        out = self.diag * v - s * _lap(self.coef * v + 0.5 * _lap(_lap(v, h), h), h)
        return out.ravel()

    def precondition(self, x):
        v = x.reshape(self.shape)
        return np.fft.irfft2(np.fft.rfft2(v) * self.inv_frozen, s=self.shape).ravel()


def solve_step(
    state: SchemeState, params: Params, guess: GridFunction | None = None
) -> tuple[GridFunction, SolveReport]:
    """Solve the step equation for ``phi^{k+1}`` by preconditioned Newton-Krylov.

    The default initial guess is ``2 phi^k - phi^{k-1}``.  The mean of every
    Newton update is removed, so the result has exactly the mass of the
    initial guess (up to roundoff).

    Raises
    ------
    NewtonDivergenceError
        If the residual does not drop below ``tol_rel * ||rhs||_2 + tol_abs``
        within ``max_newton`` iterations.
    """
    h = params.h
    rhs = _rhs(state, params)
    tol = params.tol_rel * _norm2(rhs, h) + params.tol_abs
    if guess is None:
        u = 2.0 * state.phi_k.data - state.phi_km1.data
    else:
        u = np.array(guess.data, dtype=float)
    lap_hat = _lap(1.5 * state.phi_k.data - 0.5 * state.phi_km1.data, h)
    symbol = laplacian_symbol(params.m, params.n, h)
    size = params.m * params.n
    linear_its = 0

    res = _residual(u, rhs, state, params, lap_hat)
    rnorm = _norm2(res, h)
    it = 0
    while rnorm > tol:
        if it >= params.max_newton:
            raise NewtonDivergenceError(
                f"step {state.k + 1}: Newton did not converge in {params.max_newton} iterations "
                f"(residual {rnorm:.3e}, tolerance {tol:.3e}, "
                f"estimated residual roundoff floor {roundoff_floor(u, params):.1e})"
            )
        jac = _Jacobian(u, state, params, symbol)
        A = LinearOperator((size, size), matvec=jac.matvec, dtype=float)
        M = LinearOperator((size, size), matvec=jac.precondition, dtype=float)
        b = -(res - res.mean()).ravel()
        count = [0]

        def _cb(_):
            count[0] += 1

        du, info = gmres(A, b, rtol=GMRES_RTOL, atol=0.0, M=M, restart=50, maxiter=20,
                         callback=_cb, callback_type="pr_norm")
        if info < 0:
            raise NewtonDivergenceError(f"step {state.k + 1}: GMRES breakdown (info={info})")
        linear_its += count[0]
        du = du.reshape(u.shape)
        u = u + (du - du.mean())
        it += 1
        res = _residual(u, rhs, state, params, lap_hat)
        rnorm = _norm2(res, h)
        log.debug("step %d newton %d residual %.3e", state.k + 1, it, rnorm)
    return GridFunction(u, h), SolveReport(it, rnorm, True, linear_its)


def update_psi(phi_new: GridFunction, state: SchemeState, params: Params) -> GridFunction:
    """``psi^{k+1} = (2/s)(phi^{k+1} - phi^k) - psi^k``, i.e. the half-step average of psi is the phi rate.

    The mean is removed to keep roundoff from accumulating in the zero mode.
    """
    psi = (2.0 / params.s) * (phi_new.data - state.phi_k.data) - state.psi_k.data
    return phi_new.like(psi - psi.mean())


def advance(state: SchemeState, params: Params, guess: GridFunction | None = None) -> tuple[SchemeState, StepReport]:
    phi_new, solve = solve_step(state, params, guess)
    nxt = SchemeState(
        phi_k=phi_new,
        phi_km1=state.phi_k,
        psi_k=update_psi(phi_new, state, params),
        k=state.k + 1,
        time=(state.k + 1) * params.s,
    )
    report = StepReport(
        step=nxt.k,
        time=nxt.time,
        mass=mass(phi_new),
        energy=state_energy(nxt, params),
        dissipation_residual=dissipation_identity_residual(state, nxt, params),
        solve=solve,
    )
    return nxt, report


def mass(phi: GridFunction) -> float:
    """``h^2 <phi, 1>``."""
    return phi.h * phi.h * float(np.sum(phi.data))


def coupled_residuals(prev: SchemeState, nxt: SchemeState, params: Params) -> tuple[GridFunction, GridFunction]:
    """Residuals of the coupled three-equation form of the step.

    Returns the residual of the ``psi`` evolution equation and of the
    ``phi`` rate equation, with ``psi`` at the half step taken as the
    average of ``psi^k`` and ``psi^{k+1}``.
    """
    s, beta = params.s, params.beta
    psi_half = 0.5 * (nxt.psi_k.data + prev.psi_k.data)
    mu = _mu(nxt.phi_k.data, prev, params)
    r_psi = beta * (nxt.psi_k.data - prev.psi_k.data) - s * _lap(mu, params.h) + s * psi_half
    r_phi = nxt.phi_k.data - prev.phi_k.data - s * psi_half
    return nxt.phi_k.like(r_psi), nxt.phi_k.like(r_phi)


def run(state: SchemeState, params: Params, nsteps: int):
    """Yield ``(state, report)`` after each of ``nsteps`` steps."""
    for _ in range(nsteps):
        state, report = advance(state, params)
        yield state, report


def integrate(phi0: GridFunction, params: Params, nsteps: int | None = None) -> SchemeState:
    """Advance from ``phi0`` for ``nsteps`` steps (default ``round(T / s)``) and return the final state."""
    if nsteps is None:
        nsteps = steps_to(params.T, params.s)
    state = init(phi0, params)
    for state, _ in run(state, params, nsteps):
        pass
    return state


def steps_to(T: float, s: float) -> int:
    nsteps = round(T / s)
    if abs(nsteps * s - T) > 1e-9 * max(T, 1.0):
        raise ValueError(f"T = {T} is not a whole number of steps of size {s}")
    return int(nsteps)
