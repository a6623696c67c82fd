"""Estimating a photon damping constant with entangled and separable cat-state probes."""

from .damping_response import mean_X_damped, slope_at_zero, var_X_damped
from .estimation import ErrorReport, RunConfig, analytic_mse, empirical_mse, estimate_kappa, linearize
from .observables import mean_photons, mean_var_P, mean_var_X
from .optimizer import improvement_curve, minimize_mse, solve_x0
from .probes import ProbeClass, ProbeSpec, make_probe, normalization_constant, photon_number
from .state_algebra import DyadMix, apply_beam_splitter, apply_damping, apply_displacement, overlap

__version__ = "0.1.0"
