"""Closed-form damped X moments for the four probe classes.

These hold for any displacement ``X0``: damping commutes with displacement
up to the shrink ``X0 -> X0 e^{-kappa/2}``, which leaves the variance alone.
The test suite checks them against the dyad pipeline at ``X0`` in {0, 1, 3}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .probes import ProbeClass


@dataclass(frozen=True)
class DampedMoments:
    mean: float
    variance: float
    slope_at_zero: float


def mean_X_damped(x0: float, kappa):
    if np.any(np.asarray(kappa) < 0):
        raise ValueError("kappa must be nonnegative")
    return x0 * np.exp(-np.asarray(kappa) / 2)


def var_X_damped(probe_class: ProbeClass, alpha, kappa):
    """Variance of X after damping; vectorized over ``alpha`` and ``kappa``."""
    probe_class = ProbeClass(probe_class)
    alpha = np.asarray(alpha, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa < 0):
        raise ValueError("kappa must be nonnegative")
    # 1/(1 + e^{a^2/2}) written to stay finite for large alpha
    damp = alpha**2 * np.exp(-0.5 * alpha**2) / (1 + np.exp(-0.5 * alpha**2))
    if probe_class is ProbeClass.I:
        out = 0.5 - damp * (1 + np.exp(-kappa / 2)) ** 2 / 8
    elif probe_class is ProbeClass.II:
        out = 0.5 - damp * (1 + np.exp(-kappa)) / 4
    else:
        out = np.full(np.broadcast(alpha, kappa).shape, 0.5)
    return out if out.ndim else float(out)


def slope_at_zero(x0: float) -> float:
    """d<X>/dkappa at kappa = 0."""
    return -0.5 * x0


def damped_moments(probe_class: ProbeClass, alpha: float, x0: float, kappa: float) -> DampedMoments:
    return DampedMoments(
        mean=float(mean_X_damped(x0, kappa)),
        variance=float(var_X_damped(probe_class, alpha, kappa)),
        slope_at_zero=slope_at_zero(x0),
    )
