"""Discrete MPFC energies and the per-step dissipation balance."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

import numpy as np

from .grid import GridFunction, Params
from .norms import MeanZeroField, grad_norm2, norm2, norm4, norm_minus1
from .operators import _lap

if TYPE_CHECKING:
    from .stepper import SchemeState


@dataclass(frozen=True)
class EnergyBreakdown:
    quartic: float
    quadratic: float
    gradient: float
    biharmonic: float
    kinetic: float = 0.0
    lag: float = 0.0

    @property
    def F(self) -> float:
        return self.quartic + self.quadratic + self.gradient + self.biharmonic

    @property
    def convex(self) -> float:
        """Implicitly treated part of the splitting ``F = convex - expansive``."""
        return self.quartic + self.quadratic + self.biharmonic

    @property
    def expansive(self) -> float:
        return -self.gradient

    @property
    def pseudo(self) -> float:
        return self.F + self.kinetic

    @property
    def modified(self) -> float:
        return self.pseudo + self.lag

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(F=self.F, pseudo=self.pseudo, modified=self.modified)
        return d


def energy_breakdown(
    phi: GridFunction,
    params: Params,
    psi: GridFunction | MeanZeroField | None = None,
    phi_prev: GridFunction | None = None,
) -> EnergyBreakdown:
    """All energy terms at once; ``psi`` and ``phi_prev`` are optional."""
    h = phi.h
    lap = _lap(phi.data, h)
    kinetic = 0.0
    if psi is not None:
        psi = psi if isinstance(psi, MeanZeroField) else MeanZeroField(psi)
        if params.beta != 0.0:
            kinetic = 0.5 * params.beta * norm_minus1(psi) ** 2
    lag = 0.0 if phi_prev is None else 0.5 * grad_norm2(phi - phi_prev) ** 2
    return EnergyBreakdown(
        quartic=0.25 * norm4(phi) ** 4,
        quadratic=0.5 * params.alpha * norm2(phi) ** 2,
        gradient=-grad_norm2(phi) ** 2,
        biharmonic=0.5 * h * h * float(np.sum(lap * lap)),
        kinetic=kinetic,
        lag=lag,
    )


def discrete_energy(phi: GridFunction, params: Params) -> float:
    return energy_breakdown(phi, params).F


def pseudo_energy(phi: GridFunction, psi, params: Params) -> float:
    return energy_breakdown(phi, params, psi=psi).pseudo


def modified_pseudo_energy(state: "SchemeState", params: Params) -> float:
    return state_energy(state, params).modified


def state_energy(state: "SchemeState", params: Params) -> EnergyBreakdown:
    return energy_breakdown(state.phi_k, params, psi=state.psi_k, phi_prev=state.phi_km1)


def dissipation_terms(prev: "SchemeState", nxt: "SchemeState", params: Params) -> tuple[float, float]:
    """The two dissipated quantities of one step.

    Returns ``(s * ||psi_half||_{-1}^2, (s^4 / 2) * ||grad D_s^2 phi||_2^2)``
    with ``psi_half = (phi^{k+1} - phi^k) / s``.
    """
    s = params.s
    increment = nxt.phi_k - prev.phi_k
    psi_half = MeanZeroField.project(increment / s)
    second = nxt.phi_k - 2.0 * prev.phi_k + prev.phi_km1
    return s * norm_minus1(psi_half) ** 2, 0.5 * grad_norm2(second) ** 2


def dissipation_identity_residual(prev: "SchemeState", nxt: "SchemeState", params: Params) -> float:
    """Left minus right side of the exact one-step energy balance.

    Zero for the exact discrete solution; for a Newton solution it is of the
    order of the solver residual.
    """
    kinetic, curvature = dissipation_terms(prev, nxt, params)
    return modified_pseudo_energy(nxt, params) + kinetic + curvature - modified_pseudo_energy(prev, params)


def dissipation_slack(modified: float, params: Params) -> float:
    """Allowed magnitude of the balance residual at the configured Newton tolerance."""
    return 100.0 * params.tol_rel * (1.0 + abs(modified))
