"""Named cross-checks between the dyad pipeline and the Fock-space oracle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from . import fock_oracle as fo
from .damping_response import var_X_damped
from .observables import mean_photons, mean_var_P, mean_var_X
from .probes import ProbeClass, ProbeSpec, make_probe
from .state_algebra import apply_damping, overlap


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    deviation: float
    tolerance: float
    detail: str = ""


def _dim(cutoff: Optional[int], default: int) -> fo.FockCutoff:
    return fo.FockCutoff(cutoff if cutoff is not None else default)


def check_overlap(cutoff=None) -> tuple[float, float]:
    c = _dim(cutoff, 60)
    amps = [0, 1.3 + 0.7j, -2.1j, 3.0, -1.5 + 2.5j]
    dev = 0.0
    for a, b in itertools.product(amps, repeat=2):
        v = np.vdot(fo.coherent_fock(b, c), fo.coherent_fock(a, c))
        dev = max(dev, abs(v - overlap(b, a)))
    return dev, 1e-10


def check_beam_splitter_map(cutoff=None) -> tuple[float, float]:
    c = _dim(cutoff, 40)
    u = fo.beam_splitter_unitary(c)
    amps = [0, 1.0, -2.0j, 1.2 + 1.2j, -1.4 + 0.5j]
    worst = 0.0
    for a, b in itertools.product(amps, repeat=2):
        out = u @ np.kron(fo.coherent_fock(a, c), fo.coherent_fock(b, c))
        target = np.kron(fo.coherent_fock((a - b) / np.sqrt(2), c), fo.coherent_fock((a + b) / np.sqrt(2), c))
        worst = max(worst, 1 - abs(np.vdot(target, out)) ** 2)
    return worst, 1e-8


def check_unitarity(cutoff=None) -> tuple[float, float]:
    c = _dim(cutoff, 40)
    u = fo.beam_splitter_unitary(c)
    defect = u.conj().T @ u - sp.identity(c.dim**2, format="csr")
    n = np.arange(c.dim)
    total = sp.diags((n[:, None] + n[None, :]).ravel().astype(float))
    comm = u @ total - total @ u
    dev = max(abs(defect).max(), abs(comm).max() if comm.nnz else 0.0)
    return float(dev), 1e-9


def check_coherent_damping(cutoff=None) -> tuple[float, float]:
    c = _dim(cutoff, 30)
    rho = fo.FockDensity.from_pure(np.kron(fo.coherent_fock(2, c), fo.coherent_fock(0, c)), c)
    out = fo.integrate_master_equation(rho, 0.5)
    n1 = out.expect(np.diag(np.arange(c.dim, dtype=float))).real
    return abs(n1 - 4 * np.exp(-0.5)), 1e-6


def check_closed_form_variance(cutoff=None) -> tuple[float, float]:
    c = _dim(cutoff, 60)
    dev = 0.0
    for cls, alpha in itertools.product((ProbeClass.I, ProbeClass.II), (0.8, 1.6, 3.0)):
        rho = fo.fock_probe(ProbeSpec(cls, alpha, 0.0), c)
        for kappa in (0.01, 0.1, 1.0):
            var = fo.fock_moments(fo.integrate_master_equation(rho, kappa))[1]
            dev = max(dev, abs(var - var_X_damped(cls, alpha, kappa)))
    return dev, 1e-5


def check_probe_moments(cutoff=None) -> tuple[float, float]:
    dev = 0.0
    for cls in ProbeClass:
        alpha = 0.0 if cls.is_classical else 1.3
        spec = ProbeSpec(cls, alpha, 2.0)
        c = fo.probe_cutoff(spec) if cutoff is None else fo.FockCutoff(cutoff)
        rho = fo.fock_probe(spec, c)
        for kappa in (0.0, 0.3):
            fm = fo.fock_moments(fo.integrate_master_equation(rho, kappa))
            damped = apply_damping(make_probe(spec), kappa)
            dm = (*mean_var_X(damped), *mean_var_P(damped), mean_photons(damped))
            dev = max(dev, float(np.max(np.abs(np.subtract(fm, dm)))))
    return dev, 1e-5


CHECKS: dict[str, Callable] = {
    "overlap": check_overlap,
    "beam-splitter-map": check_beam_splitter_map,
    "unitarity": check_unitarity,
    "coherent-damping": check_coherent_damping,
    "closed-form-variance": check_closed_form_variance,
    "probe-moments": check_probe_moments,
}


def run_checks(names=None, cutoff: Optional[int] = None) -> list[CheckResult]:
    """Run the selected checks (all by default); failures never raise."""
    results = []
    for name in names or CHECKS:
        try:
            dev, tol = CHECKS[name](cutoff)
            results.append(CheckResult(name, bool(dev < tol), float(dev), tol))
        except (ValueError, MemoryError) as exc:
            results.append(CheckResult(name, False, float("nan"), float("nan"), f"{type(exc).__name__}: {exc}"))
    return results
