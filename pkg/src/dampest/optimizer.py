"""Minimize the estimation error over probe parameters at fixed photon budget."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .damping_response import var_X_damped
from .estimation import analytic_mse
from .probes import ProbeClass, ProbeSpec, superposition_photons

ALPHA_MAX = 6.0
ALPHA_STEP = 0.01
N_MIN_PHOTONS = 0.05
GOLDEN_TOL = 1e-6
TIE_RTOL = 1e-12

_INV_PHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class OptimumRecord:
    probe_class: ProbeClass
    alpha_star: float
    x0_star: float
    n_meas_star: int
    mse_star: float

    @property
    def spec(self) -> ProbeSpec:
        return ProbeSpec(self.probe_class, self.alpha_star, self.x0_star)


@dataclass(frozen=True)
class ImprovementPoint:
    n_tot: float
    delta_I: float
    delta_II: float
    optima: tuple = ()


def solve_x0(probe_class: ProbeClass, alpha: float, n_tot: float, n_meas: int) -> Optional[float]:
    """Displacement that spends the rest of the per-measurement budget, or None."""
    if n_tot <= 0:
        raise ValueError("n_tot must be positive")
    left = n_tot / n_meas - superposition_photons(probe_class, alpha)
    return math.sqrt(left) if left > 0 else None


def _mse_table(probe_class, alphas, n_meas, n_tot, kappa):
    """Error on an (alpha, N) grid; infeasible cells are +inf."""
    var = var_X_damped(probe_class, alphas, kappa)[:, None]
    s = np.array([superposition_photons(probe_class, a) for a in alphas])[:, None]
    x0_sq = n_tot / n_meas[None, :] - s
    with np.errstate(divide="ignore", invalid="ignore"):
        mse = 4 * var / (n_meas[None, :] * x0_sq)
    return np.where(x0_sq > 0, mse, np.inf)


def golden_section(f, a: float, b: float, tol: float = GOLDEN_TOL) -> float:
    """Minimizer of a unimodal ``f`` on ``[a, b]`` to within ``tol``."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (a + b) / 2


def minimize_mse(probe_class: ProbeClass, n_tot: float, kappa: float, alpha_step: float = ALPHA_STEP) -> OptimumRecord:
    """Coarse (alpha, N) grid followed by golden-section refinement in alpha.

    Ties within a relative ``1e-12`` go to the smaller alpha, then smaller N.
    """
    probe_class = ProbeClass(probe_class)
    if n_tot <= 0:
        raise ValueError("n_tot must be positive")
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if probe_class.is_classical:
        alphas = np.zeros(1)
    else:
        alphas = np.round(np.arange(0.0, ALPHA_MAX + alpha_step / 2, alpha_step), 12)
    n_meas = np.arange(1, max(1, math.floor(n_tot / N_MIN_PHOTONS)) + 1)

    table = _mse_table(probe_class, alphas, n_meas, n_tot, kappa)
    best = table.min()
    if not np.isfinite(best):
        raise ValueError(f"no feasible probe for class {probe_class.value} at n_tot = {n_tot}")
    # flat index in alpha-major order: first hit is smallest alpha, then smallest N
    i, j = np.unravel_index(np.flatnonzero(table.ravel() <= best * (1 + TIE_RTOL))[0], table.shape)
    alpha, n = float(alphas[i]), int(n_meas[j])

    if len(alphas) > 1:
        def objective(a):
            return float(_mse_table(probe_class, np.array([a]), np.array([n]), n_tot, kappa)[0, 0])

        lo, hi = max(0.0, alpha - alpha_step), min(ALPHA_MAX, alpha + alpha_step)
        refined = golden_section(objective, lo, hi)
        if objective(refined) < table[i, j]:
            alpha = refined

    x0 = solve_x0(probe_class, alpha, n_tot, n)
    mse = analytic_mse(ProbeSpec(probe_class, alpha, x0), kappa, n_tot)
    return OptimumRecord(probe_class, alpha, x0, n, mse)


def improvement_curve(n_tot_values: Sequence[float], kappa: float) -> list[ImprovementPoint]:
    """Relative improvement of classes I and II over the classical reference."""
    if len(n_tot_values) == 0:
        raise ValueError("need at least one budget")
    points = []
    for n_tot in n_tot_values:
        opt = {c: minimize_mse(c, n_tot, kappa) for c in (ProbeClass.I, ProbeClass.II, ProbeClass.III)}
        ref = opt[ProbeClass.III].mse_star
        points.append(
            ImprovementPoint(
                n_tot=float(n_tot),
                delta_I=(ref - opt[ProbeClass.I].mse_star) / ref,
                delta_II=(ref - opt[ProbeClass.II].mse_star) / ref,
                optima=tuple(opt.values()),
            )
        )
    return points
