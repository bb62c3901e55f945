"""Convergence, stability and identity/inequality checks for the MPFC scheme.

Convergence is measured by self-refinement: each level is compared with the
next finer one in the norm ``||e||_2 + ||grad lap e||_2`` at the final time
and at every shared time level.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np

from . import norms, operators
from .energy import dissipation_slack, state_energy
from .grid import GridFunction, Params, cosine_modes, mean
from .stepper import advance, init, steps_to

IDENTITY_RTOL = 1e-12
INEQUALITY_SLACK = 1e-10

# Smooth low-mode data on [0, 32)^2 used by the default convergence scenario.
DEFAULT_CONSTANT = 0.07
DEFAULT_MODES = (
    (-0.02, 1, 1, -2 * math.pi * 12 / 32, -2 * math.pi * 1 / 32 - math.pi / 2),
    (0.01, 2, 3, 0.3, 1.1),
)
DEFAULT_L = 32.0


def default_initial_data(params: Params) -> GridFunction:
    """``0.07 - 0.02 cos(2 pi (x - 12)/32) sin(2 pi (y - 1)/32)`` plus a small (2, 3) mode."""
    return cosine_modes(params, DEFAULT_CONSTANT, DEFAULT_MODES)


def h3_error_norm(a: GridFunction, b: GridFunction) -> float:
    """``||a - b||_2 + ||grad lap (a - b)||_2``."""
    if a.shape != b.shape or a.h != b.h:
        raise ValueError(f"grid mismatch: {a.shape} (h={a.h}) vs {b.shape} (h={b.h})")
    d = a - b
    return norms.norm2(d) + norms.grad_norm2(operators.laplacian(d))


def restrict(fine: GridFunction) -> GridFunction:
    """Average each 2x2 block of cells onto the coarse cell it tiles."""
    m, n = fine.shape
    if m % 2 or n % 2:
        raise ValueError(f"cannot coarsen an odd grid {fine.shape}")
    return GridFunction(fine.data.reshape(m // 2, 2, n // 2, 2).mean(axis=(1, 3)), 2.0 * fine.h)


def coarsen_compare(fine: GridFunction, coarse: GridFunction) -> float:
    if fine.shape != (2 * coarse.shape[0], 2 * coarse.shape[1]):
        raise ValueError(f"{fine.shape} is not a 2x refinement of {coarse.shape}")
    return h3_error_norm(restrict(fine), coarse)


def _compare(fine: GridFunction, coarse: GridFunction) -> float:
    if fine.shape == coarse.shape:
        return h3_error_norm(fine, coarse)
    return coarsen_compare(fine, coarse)


@dataclass
class RefinementLadder:
    """Sequence of discretizations of one problem, coarsest first."""

    levels: list[Params]
    initial: Callable[[Params], GridFunction] = default_initial_data

    def __post_init__(self):
        if len(self.levels) < 3:
            raise ValueError("a refinement ladder needs at least 3 levels")
        T = self.levels[0].T
        for a, b in zip(self.levels, self.levels[1:]):
            if not math.isclose(a.s, 2.0 * b.s, rel_tol=1e-12):
                raise ValueError("each level must halve the time step")
            if b.shape not in (a.shape, (2 * a.m, 2 * a.n)):
                raise ValueError("each level must keep or double the grid")
            if not math.isclose(b.T, T):
                raise ValueError("all levels must share the final time")

    @classmethod
    def space_time(cls, ms=(32, 64, 128, 256), L=DEFAULT_L, ratio=0.25, T=0.5, **kw) -> "RefinementLadder":
        """Joint refinement with ``s = ratio * h``."""
        initial = kw.pop("initial", default_initial_data)
        levels = [Params.square(m, L, ratio * L / m, T=T, **kw) for m in ms]
        return cls(levels, initial)

    @classmethod
    def time_only(cls, m=128, L=DEFAULT_L, steps=(10, 20, 40, 80), T=1.0, **kw) -> "RefinementLadder":
        """Fixed grid; ``s = T / steps``.  ``steps`` are steps per unit time when ``T = 1``."""
        initial = kw.pop("initial", default_initial_data)
        levels = [Params.square(m, L, 1.0 / q, T=T, **kw) for q in steps]
        return cls(levels, initial)


@dataclass
class LevelError:
    level: int
    m: int
    n: int
    s: float
    error_final: float | None = None
    error_max: float | None = None
    order_final: float | None = None
    order_max: float | None = None


@dataclass
class ConvergenceReport:
    levels: list[LevelError]
    floor: float
    degenerate: bool = False
    norm: str = "||e||_2 + ||grad_h lap_h e||_2"

    @property
    def orders_final(self) -> list[float]:
        return [e.order_final for e in self.levels if e.order_final is not None]

    @property
    def orders_max(self) -> list[float]:
        return [e.order_max for e in self.levels if e.order_max is not None]

    def within(self, lo=1.8, hi=2.2) -> bool:
        orders = self.orders_final + self.orders_max
        return bool(orders) and all(lo <= q <= hi for q in orders)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "m", "s", "error_h3_final", "error_h3_max_over_time", "order_vs_next", "order_max_vs_next"])
        for e in self.levels:
            w.writerow([e.level, e.m, _fmt(e.s), _fmt(e.error_final), _fmt(e.error_max), _fmt(e.order_final), _fmt(e.order_max)])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"norm: {self.norm}"]
        for e in self.levels:
            lines.append(
                f"level {e.level}: m={e.m} s={e.s:.6g} "
                f"err_final={_g(e.error_final)} err_max={_g(e.error_max)} "
                f"order_final={_g(e.order_final)} order_max={_g(e.order_max)}"
            )
        if self.degenerate:
            lines.append("degenerate: all errors below the roundoff floor")
        return "\n".join(lines)


def _fmt(x) -> str:
    return "" if x is None else format(x, ".17g")


def _g(x) -> str:
    return "-" if x is None else f"{x:.4g}"


def _trajectory(params: Params, initial) -> list[GridFunction]:
    state = init(initial(params), params)
    out = [state.phi_k]
    for _ in range(steps_to(params.T, params.s)):
        state, _ = advance(state, params)
        out.append(state.phi_k)
    return out


def run_convergence(ladder: RefinementLadder, workers: int = 1) -> ConvergenceReport:
    """Run every level to ``T`` and estimate orders from consecutive-level differences."""
    run = partial(_trajectory, initial=ladder.initial)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trajectories = list(pool.map(run, ladder.levels))
    else:
        trajectories = [run(p) for p in ladder.levels]

    levels = [LevelError(i, p.m, p.n, p.s) for i, p in enumerate(ladder.levels)]
    for i in range(len(levels) - 1):
        coarse, fine = trajectories[i], trajectories[i + 1]
        errs = [_compare(fine[2 * k], coarse[k]) for k in range(len(coarse))]
        levels[i].error_final = errs[-1]
        levels[i].error_max = max(errs)

    floor = 100.0 * max(p.tol_abs for p in ladder.levels)
    for a, b in zip(levels, levels[1:]):
        if b.error_final is None:
            continue
        if b.error_final > floor:
            a.order_final = math.log2(a.error_final / b.error_final)
        if b.error_max > floor:
            a.order_max = math.log2(a.error_max / b.error_max)
    degenerate = all(e.error_max is None or e.error_max <= floor for e in levels)
    return ConvergenceReport(levels, floor, degenerate)


@dataclass
class ProbeResult:
    s: float
    steps: int
    monotone: bool
    max_increase: float
    max_residual: float
    slack: float
    modified: list[float] = field(repr=False, default_factory=list)
    residuals: list[float] = field(repr=False, default_factory=list)

    @property
    def passed(self) -> bool:
        return self.monotone and self.max_residual <= self.slack


def run_stability_probe(phi0: GridFunction, params: Params, s_list: Sequence[float], nsteps: int = 100) -> list[ProbeResult]:
    """Step ``nsteps`` times at each step size and check that the modified energy never rises."""
    results = []
    for s in s_list:
        p = params.replace(s=s)
        state = init(phi0, p)
        energies = [state_energy(state, p).modified]
        residuals = []
        for _ in range(nsteps):
            state, report = advance(state, p)
            energies.append(report.energy.modified)
            residuals.append(report.dissipation_residual)
        slack = dissipation_slack(max(abs(e) for e in energies), p)
        increases = np.diff(energies)
        max_inc = float(increases.max()) if increases.size else 0.0
        max_res = float(np.max(np.abs(residuals))) if residuals else 0.0
        results.append(ProbeResult(s, nsteps, max_inc <= slack, max_inc, max_res, slack, energies, residuals))
    return results


# ---------------------------------------------------------------------------
# identity and inequality oracles


@dataclass
class OracleResult:
    name: str
    passed: bool
    cases: int
    worst: float
    informational: bool = False

    def line(self) -> str:
        tag = "PASS" if self.passed else ("INFO" if self.informational else "FAIL")
        return f"{tag} {self.name}: {self.cases} cases, worst ratio {self.worst:.3e}"


def random_field(rng: np.random.Generator, m: int, n: int, h: float) -> GridFunction:
    """Random periodic field: white noise, smooth modes or a mix, with random offset and scale."""
    kind = rng.integers(3)
    if kind == 0:
        a = rng.standard_normal((m, n))
    else:
        x = np.arange(m)[:, None] / m
        y = np.arange(n)[None, :] / n
        a = np.zeros((m, n))
        for _ in range(4):
            kx, ky = rng.integers(0, max(m // 2, 1) + 1), rng.integers(0, max(n // 2, 1) + 1)
            a += rng.standard_normal() * np.cos(2 * np.pi * (kx * x + ky * y) + rng.uniform(0, 2 * np.pi))
        if kind == 2:
            a += 0.1 * rng.standard_normal((m, n))
    a = a * 10.0 ** rng.uniform(-2, 1) + rng.standard_normal()
    return GridFunction(a, h)


def random_edge_field(rng: np.random.Generator, m: int, n: int, h: float):
    return operators.EdgeField.from_periodic(rng.standard_normal((m, n)), rng.standard_normal((m, n)), h)


def _ratio(err, scale):
    return abs(err) / scale if scale > 0 else (0.0 if err == 0 else math.inf)


def check_sbp(rng, m, n, h, cases) -> float:
    """Worst relative defect of ``<D phi, f> + <phi, d f> = 0`` in each direction."""
    worst = 0.0
    for _ in range(cases):
        phi = random_field(rng, m, n, h)
        f = random_edge_field(rng, m, n, h)
        D = operators.d_center_to_edge(phi)
        for Dc, fc, dfc in (
            (D.ew[1:], f.ew[1:], operators.d_x(f)),
            (D.ns[:, 1:], f.ns[:, 1:], operators.d_y(f)),
        ):
            a = h * h * float(np.sum(Dc * fc))
            b = operators.center_inner(phi, dfc)
            scale = h * h * (np.linalg.norm(Dc) * np.linalg.norm(fc) + np.linalg.norm(phi.data) * np.linalg.norm(dfc.data))
            worst = max(worst, _ratio(a + b, scale))
    return worst


def check_green_first(rng, m, n, h, cases) -> float:
    worst = 0.0
    for _ in range(cases):
        phi, psi = random_field(rng, m, n, h), random_field(rng, m, n, h)
        a = operators.edge_inner(operators.d_center_to_edge(phi), operators.d_center_to_edge(psi))
        lap = operators.laplacian(psi)
        b = operators.center_inner(phi, lap)
        scale = norms.grad_norm2(phi) * norms.grad_norm2(psi) + norms.norm2(phi) * norms.norm2(lap)
        worst = max(worst, _ratio(a + b, scale))
    return worst


def check_green_second(rng, m, n, h, cases) -> float:
    worst = 0.0
    for _ in range(cases):
        phi, psi = random_field(rng, m, n, h), random_field(rng, m, n, h)
        lphi, lpsi = operators.laplacian(phi), operators.laplacian(psi)
        a = operators.center_inner(phi, lpsi)
        b = operators.center_inner(lphi, psi)
        scale = norms.norm2(phi) * norms.norm2(lpsi) + norms.norm2(lphi) * norms.norm2(psi)
        worst = max(worst, _ratio(a - b, scale))
    return worst


def check_product_expansion(rng, m, n, h, cases) -> float:
    worst = 0.0
    for _ in range(cases):
        f, g, w = (random_field(rng, m, n, h) for _ in range(3))
        direct = operators.laplacian_x(f * g * w).data
        expanded = operators.laplacian_x_product_expansion(f, g, w).data
        scale = float(np.max(np.abs(direct)))
        worst = max(worst, _ratio(float(np.max(np.abs(direct - expanded))), scale))
    return worst


def check_mean_annihilation(rng, m, n, h, cases) -> float:
    worst = 0.0
    for _ in range(cases):
        lap = operators.laplacian(random_field(rng, m, n, h))
        worst = max(worst, _ratio(abs(mean(lap)), float(np.max(np.abs(lap.data)))))
    return worst


def _ineq(lhs, rhs):
    """Ratio ``lhs / (rhs + slack)``; at most 1 when the inequality holds with slack."""
    bound = rhs * (1.0 + INEQUALITY_SLACK)
    if lhs <= 0:
        return 0.0
    return lhs / bound if bound > 0 else math.inf


def inequality_ratios(phi: GridFunction, Lx: float, Ly: float) -> dict[str, float]:
    """Left/right ratios of the discrete Sobolev-type inequalities for one field."""
    n12, n22 = norms.sobolev_norms(phi)
    lap = operators.laplacian(phi)
    lap2 = norms.norm2(lap) ** 2
    grad_lap2 = norms.grad_norm2(lap) ** 2
    l2 = norms.norm2(phi) ** 2
    out = {
        "bramble": _ineq(norms.norm4(phi), norms.bramble_constant(Lx, Ly) * n12),
        "sobolev": _ineq(norms.norm_inf(phi) ** 2, norms.sobolev_constant(Lx, Ly) * n22**2),
        "laplacian_x": _ineq(norms.norm2(operators.laplacian_x(phi)) ** 2, lap2),
        "laplacian_y": _ineq(norms.norm2(operators.laplacian_y(phi)) ** 2, lap2),
        "cross_sum_sign": _ineq(-operators.mixed_cross_sum(phi), 1e-12 * lap2),
        "grad4_embedding": _ineq(norms.grad_norm4(phi), norms.embedding_constant(Lx, Ly) * norms.norm2(lap)),
        "poincare": _ineq(norms.norm2(phi - mean(phi)), norms.poincare_constant(Lx, Ly) * norms.grad_norm2(phi)),
    }
    for eps in (0.25, 1.0, 4.0):
        out[f"interpolation_eps={eps:g}"] = _ineq(lap2, l2 / (3 * eps * eps) + (2 * eps / 3) * grad_lap2)
    return out


def check_inequalities(rng, m, n, cases, lengths=(1.0, 2 * math.pi, 32.0)) -> dict[str, float]:
    worst: dict[str, float] = {}
    for c in range(cases):
        L = lengths[c % len(lengths)]
        phi = random_field(rng, m, n, L / m)
        for key, r in inequality_ratios(phi, L, n * L / m).items():
            worst[key] = max(worst.get(key, 0.0), r)
    return worst


def check_minus1_modes(m, n, L=1.0) -> float:
    """Worst relative error of ``||mode||_{-1} = ||mode||_2 / sqrt(lambda)`` over all resolvable modes."""
    h = L / m
    x = (np.arange(m)[:, None] + 0.5) / m
    y = (np.arange(n)[None, :] + 0.5) / n
    worst = 0.0
    for k in range(m // 2 + 1):
        for l in range(n // 2 + 1):
            if k == 0 and l == 0:
                continue
            lam = (4.0 / (h * h)) * (math.sin(math.pi * k / m) ** 2 + math.sin(math.pi * l / n) ** 2)
            for phase in (0.0, 0.7):
                phi = GridFunction(np.cos(2 * np.pi * (k * x + l * y) + phase), h)
                if norms.norm2(phi) < 1e-8:
                    continue
                expected = norms.norm2(phi) / math.sqrt(lam)
                worst = max(worst, abs(norms.norm_minus1(norms.MeanZeroField.project(phi)) - expected) / expected)
    return worst


def check_minus1_inner(rng, m, n, h, cases) -> float:
    """Symmetry defect of the ``-1`` inner product; ``inf`` if positivity fails."""
    worst = 0.0
    for _ in range(cases):
        a = norms.MeanZeroField.project(random_field(rng, m, n, h))
        b = norms.MeanZeroField.project(random_field(rng, m, n, h))
        ab, ba = norms.inner_minus1(a, b), norms.inner_minus1(b, a)
        if norms.inner_minus1(a, a) <= 0:
            return math.inf
        scale = norms.norm_minus1(a) * norms.norm_minus1(b)
        worst = max(worst, _ratio(ab - ba, scale))
    return worst


def check_parseval(rng, m, n, h, cases) -> float:
    worst = 0.0
    for _ in range(cases):
        phi = random_field(rng, m, n, h)
        spectral = h * math.sqrt(float(np.sum(np.abs(np.fft.fft2(phi.data)) ** 2)) / (m * n))
        worst = max(worst, _ratio(spectral - norms.norm2(phi), norms.norm2(phi)))
    return worst


def oracle_suite(seed: int = 20240101, grids=(3, 8, 32), identity_cases=200, product_cases=100,
                 inequality_cases=200) -> list[OracleResult]:
    """Run every identity and inequality check with a fixed seed."""
    rng = np.random.default_rng(seed)
    results = []

    def ident(name, fn, cases, grid_list, *args):
        worst = 0.0
        for m in grid_list:
            worst = max(worst, fn(rng, m, m, 1.0 / m, cases, *args))
        results.append(OracleResult(name, worst <= 1.0 * IDENTITY_RTOL, cases * len(grid_list), worst / IDENTITY_RTOL))

    ident("summation by parts", check_sbp, identity_cases, grids)
    ident("Green first identity", check_green_first, identity_cases, grids)
    ident("Green second identity", check_green_second, identity_cases, grids)
    ident("mean of laplacian", check_mean_annihilation, identity_cases, grids)
    ident("product expansion of lap_x(fgw)", check_product_expansion, product_cases, (16,))
    ident("parseval", check_parseval, identity_cases, grids)
    ident("-1 inner product symmetry", check_minus1_inner, identity_cases // 4, grids)

    worst_mode = max(check_minus1_modes(m, m) for m in (8, 32))
    results.append(OracleResult("-1 norm of single modes", worst_mode <= IDENTITY_RTOL, 2, worst_mode / IDENTITY_RTOL))

    for key, worst in check_inequalities(rng, 32, 32, inequality_cases).items():
        info = key == "poincare"
        results.append(OracleResult(f"inequality {key}", worst <= 1.0, inequality_cases, worst, informational=info))
    return results


def suite_passed(results: list[OracleResult]) -> bool:
    return all(r.passed or r.informational for r in results)

