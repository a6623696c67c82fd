"""Linearized estimation of the scaled damping constant and its error.

The estimator reads ``kappa_est = c0 + c1 * mean(X samples)`` with
coefficients from the first-order expansion of ``<X>(kappa)`` around zero.
Under a photon budget ``n_tot = N <n>`` its mean squared error is

    (<n> / n_tot) * Var X(kappa) / (d<X>/dkappa |_0)^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .damping_response import slope_at_zero, var_X_damped
from .observables import DEFAULT_GRID_POINTS, GridDensity, marginal_X
from .probes import ProbeSpec, make_probe, photon_number
from .state_algebra import DyadMix, apply_damping

LINEAR_REGIME_KAPPA = 0.05

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class EstimatorCoeffs:
    c0: float
    c1: float


@dataclass(frozen=True)
class RunConfig:
    """One Monte Carlo experiment: ``runs`` repetitions of ``n_meas`` X readings."""

    spec: ProbeSpec
    kappa_true: float
    n_tot: float
    n_meas: int = 1
    runs: int = 10_000
    seed: int = 20070101
    resource_constrained: bool = True
    grid_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if self.kappa_true < 0:
            raise ValueError("kappa_true must be nonnegative")
        if self.n_tot <= 0:
            raise ValueError("n_tot must be positive")
        if int(self.n_meas) != self.n_meas or self.n_meas < 1:
            raise ValueError("n_meas must be a positive integer")
        if int(self.runs) != self.runs or self.runs < 1:
            raise ValueError("runs must be a positive integer")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.resource_constrained and self.n_meas * photon_number(self.spec) > self.n_tot * (1 + 1e-9):
            raise ValueError(
                f"budget exceeded: {self.n_meas} x {photon_number(self.spec):.6g} photons > n_tot = {self.n_tot}"
            )


@dataclass(frozen=True)
class ErrorReport:
    analytic_mse: float
    empirical_mse: float
    empirical_stderr: Optional[float]
    runs: int
    mean_estimate: float
    mean_estimate_stderr: Optional[float]

    @property
    def consistent(self) -> bool:
        """Empirical and analytic errors agree within three standard errors."""
        if self.empirical_stderr is None:
            return False
        return abs(self.empirical_mse - self.analytic_mse) < 3 * self.empirical_stderr


def linearize(spec: ProbeSpec) -> EstimatorCoeffs:
    slope = slope_at_zero(spec.x0)
    if slope == 0:
        raise ValueError("zero signal: first moment insensitive to kappa (x0 = 0)")
    c1 = 1.0 / slope
    return EstimatorCoeffs(c0=-c1 * spec.x0, c1=c1)


def estimate_kappa(coeffs: EstimatorCoeffs, samples) -> float:
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("no samples")
    return coeffs.c0 + coeffs.c1 * float(np.mean(samples))


def analytic_mse(spec: ProbeSpec, kappa: float, n_tot: float) -> float:
    """Budget-constrained error; the variance is taken at ``kappa``, the slope at 0."""
    if n_tot <= 0:
        raise ValueError("n_tot must be positive")
    slope = slope_at_zero(spec.x0)
    if slope == 0:
        raise ValueError("zero signal: first moment insensitive to kappa (x0 = 0)")
    var = var_X_damped(spec.probe_class, spec.alpha, kappa)
    return photon_number(spec) / n_tot * var / slope**2


def splitmix64(x: int) -> int:
    z = (x + _GOLDEN64) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def run_seed(seed: int, run_index: int) -> int:
    """Per-run seed: two splitmix64 rounds over (seed, run index)."""
    return splitmix64(splitmix64(seed) ^ (run_index & _MASK64))


def sample_from_density(density: GridDensity, count: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draw with linear interpolation of the cumulative trapezoid."""
    if count < 1:
        raise ValueError("count must be at least 1")
    return np.interp(rng.random(count), density.cdf(), density.grid)


def sample_X(state: DyadMix, count: int, seed: int, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Draw ``count`` X outcomes from ``state``; identical seeds give identical draws."""
    density = marginal_X(state, points=points)
    return sample_from_density(density, count, np.random.default_rng(seed))


def empirical_mse(config: RunConfig) -> ErrorReport:
    """Simulate ``config.runs`` independent experiments and compare with theory.

    The analytic value uses ``c1^2 Var X(kappa) / N``, which equals the
    budget formula whenever ``N <n> = n_tot``.
    """
    spec = config.spec
    coeffs = linearize(spec)
    state = apply_damping(make_probe(spec), config.kappa_true)
    density = marginal_X(state, points=config.grid_points)
    cdf, grid = density.cdf(), density.grid

    estimates = np.empty(config.runs)
    for i in range(config.runs):
        rng = np.random.default_rng(run_seed(config.seed, i))
        samples = np.interp(rng.random(config.n_meas), cdf, grid)
        estimates[i] = coeffs.c0 + coeffs.c1 * samples.mean()

    sq = (config.kappa_true - estimates) ** 2
    var = var_X_damped(spec.probe_class, spec.alpha, config.kappa_true)
    analytic = coeffs.c1**2 * var / config.n_meas
    if config.runs > 1:
        stderr = float(np.std(sq, ddof=1) / np.sqrt(config.runs))
        est_stderr = float(np.std(estimates, ddof=1) / np.sqrt(config.runs))
    else:
        stderr = est_stderr = None
    return ErrorReport(
        analytic_mse=float(analytic),
        empirical_mse=float(sq.mean()),
        empirical_stderr=stderr,
        runs=config.runs,
        mean_estimate=float(estimates.mean()),
        mean_estimate_stderr=est_stderr,
    )
