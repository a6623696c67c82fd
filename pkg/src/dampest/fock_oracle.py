"""Truncated Fock-space cross-check of the coherent-dyad pipeline.

Nothing here uses the coherent-state algebra: states come from number-basis
expansions, the beam splitter from a matrix exponential of its generator,
and damping from fourth-order Runge-Kutta on the mode-1 Lindblad term.

Two-mode densities are held as sums ``sum_k A_k (x) B_k`` of single-mode
operators. The master equation only acts on mode 1, so each ``A_k`` is
propagated on its own; the full ``dim^2 x dim^2`` matrix is assembled on
request via :attr:`FockDensity.entries`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.stats import poisson

from .probes import ProbeClass, ProbeSpec

TAIL_TOL = 1e-12
STEPS_PER_UNIT_KAPPA = 200
RK4_STABLE = 2.5


class CutoffError(ValueError):
    """The Fock cutoff cannot hold the requested state."""


@dataclass(frozen=True)
class FockCutoff:
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError("cutoff dimension must be an integer >= 2")

    @classmethod
    def for_amplitude(cls, m: float) -> "FockCutoff":
        """Poisson-tail rule ``dim = ceil(m^2 + 6 m + 12)``."""
        return cls(math.ceil(m * m + 6 * m + 12))


def _as_cutoff(cutoff) -> FockCutoff:
    return cutoff if isinstance(cutoff, FockCutoff) else FockCutoff(int(cutoff))


@lru_cache(maxsize=None)
def annihilation(dim: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
    a.setflags(write=False)
    return a


def quadrature_matrix(dim: int, theta: float = 0.0) -> np.ndarray:
    a = annihilation(dim)
    return (a * np.exp(-1j * theta) + a.T * np.exp(1j * theta)) / np.sqrt(2)


def coherent_fock(alpha: complex, cutoff) -> np.ndarray:
    """Number-basis coefficients ``exp(-|a|^2/2) a^n / sqrt(n!)``, truncated.

    Raises:
        CutoffError: if more than ``1e-12`` of the norm lies beyond the cutoff.
    """
    dim = _as_cutoff(cutoff).dim
    alpha = complex(alpha)
    tail = poisson.sf(dim - 1, abs(alpha) ** 2)
    if tail >= TAIL_TOL:
        raise CutoffError(f"tail mass {tail:.2e} beyond dim={dim} for |alpha|={abs(alpha):.3g}")
    c = np.empty(dim, dtype=complex)
    c[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    return c


def displacement_matrix(delta: complex, dim: int, pad: int = 40) -> np.ndarray:
    """``exp(delta a^dag - conj(delta) a)`` computed in a padded space, then cropped."""
    big = dim + pad
    a = annihilation(big)
    d = la.expm(complex(delta) * a.T - np.conj(delta) * a)
    return d[:dim, :dim]


@lru_cache(maxsize=8)
def beam_splitter_unitary(cutoff) -> sp.csr_matrix:
    """``exp(pi/4 (a1 a2^dag - a1^dag a2))`` on the truncated two-mode space.

    Basis index is ``n1 * dim + n2``. The generator conserves ``n1 + n2``,
    so the exponential is taken block by block and stored sparse.
    """
    dim = _as_cutoff(cutoff).dim
    n1, n2 = np.divmod(np.arange(dim * dim), dim)
    a = sp.csr_matrix(annihilation(dim))
    gen = ((np.pi / 4) * (sp.kron(a, a.T) - sp.kron(a.T, a))).tocsr()
    rows, cols, vals = [], [], []
    for total in range(2 * dim - 1):
        idx = np.flatnonzero(n1 + n2 == total)
        block = la.expm(gen[idx][:, idx].toarray())
        r, c = np.meshgrid(idx, idx, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(block.ravel())
    u = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim * dim, dim * dim)
    )
    u.eliminate_zeros()
    return u


@dataclass(frozen=True, eq=False)
class FockDensity:
    """Two-mode density ``sum_k A_k (x) B_k`` in the number basis.

    ``mode1`` and ``mode2`` are stacks of shape ``(K, dim, dim)``.
    """

    cutoff: FockCutoff
    mode1: np.ndarray
    mode2: np.ndarray

    def __post_init__(self):
        dim = self.cutoff.dim
        m1 = np.asarray(self.mode1, dtype=complex).reshape(-1, dim, dim)
        m2 = np.asarray(self.mode2, dtype=complex).reshape(-1, dim, dim)
        if len(m1) != len(m2):
            raise ValueError("mode1 and mode2 stacks must have equal length")
        object.__setattr__(self, "mode1", m1)
        object.__setattr__(self, "mode2", m2)

    @property
    def dim(self) -> int:
        return self.cutoff.dim

    @classmethod
    def from_pure(cls, psi, cutoff, discard: float = TAIL_TOL) -> "FockDensity":
        """Density of a two-mode ket via its Schmidt decomposition.

        The weakest Schmidt components are dropped while their combined
        weight stays below ``discard`` times the norm.
        """
        cutoff = _as_cutoff(cutoff)
        dim = cutoff.dim
        u, s, vh = np.linalg.svd(np.asarray(psi, dtype=complex).reshape(dim, dim))
        tail = np.cumsum((s**2)[::-1])[::-1]
        keep = tail > discard * tail[0]
        keep[0] = True
        u, v = u[:, keep] * s[keep], vh[keep]
        mode1 = np.einsum("ai,bj->ijab", u, u.conj()).reshape(-1, dim, dim)
        mode2 = np.einsum("ia,jb->ijab", v, v.conj()).reshape(-1, dim, dim)
        return cls(cutoff, mode1, mode2)

    @classmethod
    def from_matrix(cls, rho, cutoff, rtol: float = 1e-14) -> "FockDensity":
        """Operator-Schmidt split of a full ``dim^2 x dim^2`` matrix."""
        cutoff = _as_cutoff(cutoff)
        dim = cutoff.dim
        r = np.asarray(rho, dtype=complex).reshape(dim, dim, dim, dim).transpose(0, 2, 1, 3).reshape(dim**2, dim**2)
        u, s, vh = np.linalg.svd(r)
        keep = s > rtol * s[0]
        return cls(cutoff, (u[:, keep] * s[keep]).T, vh[keep])

    @classmethod
    def from_dyads(cls, state, cutoff) -> "FockDensity":
        """Expand a coherent-dyad mix in the number basis (comparison target only)."""
        cutoff = _as_cutoff(cutoff)
        mode1, mode2 = [], []
        for t in state.terms:
            mode1.append(t.weight * np.outer(coherent_fock(t.ket1, cutoff), coherent_fock(t.bra1, cutoff).conj()))
            mode2.append(np.outer(coherent_fock(t.ket2, cutoff), coherent_fock(t.bra2, cutoff).conj()))
        return cls(cutoff, mode1, mode2)

    def __len__(self) -> int:
        return len(self.mode1)

    @property
    def entries(self) -> np.ndarray:
        d2 = self.dim**2
        return np.einsum("kab,kcd->acbd", self.mode1, self.mode2).reshape(d2, d2)

    def expect(self, op1=None, op2=None) -> complex:
        """Tr(rho op1 (x) op2); ``None`` means identity on that mode."""
        t1 = np.einsum("kaa->k", self.mode1) if op1 is None else np.einsum("kab,ba->k", self.mode1, op1)
        t2 = np.einsum("kaa->k", self.mode2) if op2 is None else np.einsum("kab,ba->k", self.mode2, op2)
        return complex(np.sum(t1 * t2))

    def trace(self) -> complex:
        return self.expect()

    def hs_inner(self, other: "FockDensity") -> complex:
        """Hilbert-Schmidt product Tr(self^dagger other) without assembling matrices."""
        g1 = np.einsum("kab,lab->kl", self.mode1.conj(), other.mode1)
        g2 = np.einsum("kab,lab->kl", self.mode2.conj(), other.mode2)
        return complex(np.sum(g1 * g2))

    def max_deviation(self, other: "FockDensity") -> float:
        """Largest entrywise difference of the assembled matrices."""
        return float(np.max(np.abs(self.entries - other.entries)))

    def min_eigenvalue(self) -> float:
        m = self.entries
        return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])

    def hermiticity_defect(self) -> float:
        m = self.entries
        return float(np.max(np.abs(m - m.conj().T)))


def _lindblad_mode1(a: np.ndarray) -> np.ndarray:
    """``a rho a^dag - (n rho + rho n)/2`` on a stack of mode-1 blocks."""
    dim = a.shape[-1]
    n = np.arange(dim)
    out = -0.5 * (n[:, None] + n[None, :]) * a
    root = np.sqrt(n[1:])
    out[..., :-1, :-1] += root[:, None] * root[None, :] * a[..., 1:, 1:]
    return out


def integrate_master_equation(rho0: FockDensity, kappa_final: float, steps: int | None = None) -> FockDensity:
    """Propagate ``d rho/d kappa = L_1 rho`` with fixed-step classical RK4.

    The free rotation is absent (interaction picture). ``steps`` defaults to
    200 per unit kappa.

    Raises:
        ValueError: if the step is outside the RK4 stability interval, or
            the trace drifts by more than 1e-6.
    """
    if kappa_final < 0:
        raise ValueError("kappa_final must be nonnegative")
    if steps is None:
        steps = max(1, math.ceil(STEPS_PER_UNIT_KAPPA * kappa_final))
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if kappa_final == 0:
        return rho0
    h = kappa_final / steps
    # the fastest mode decays at rate dim - 1; RK4 is stable up to h * rate ~ 2.78
    if h * (rho0.dim - 1) > RK4_STABLE:
        raise ValueError(f"step {h:.3g} is unstable at dim={rho0.dim}; use at least {math.ceil(kappa_final * (rho0.dim - 1) / RK4_STABLE)} steps")
    y = rho0.mode1.copy()
    for _ in range(steps):
        k1 = _lindblad_mode1(y)
        k2 = _lindblad_mode1(y + 0.5 * h * k1)
        k3 = _lindblad_mode1(y + 0.5 * h * k2)
        k4 = _lindblad_mode1(y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    out = FockDensity(rho0.cutoff, y, rho0.mode2)
    drift = abs(out.trace() - rho0.trace())
    if drift > 1e-6:
        raise ValueError(f"trace drift {drift:.2e}; use more steps")
    return out


def fock_moments(rho: FockDensity) -> tuple[float, float, float, float, float]:
    """``(mean_X, var_X, mean_P, var_P, mean_n)`` from number-basis matrices."""
    dim = rho.dim
    x, p = quadrature_matrix(dim), quadrature_matrix(dim, np.pi / 2)
    n = np.diag(np.arange(dim, dtype=float))
    s = 1 / np.sqrt(2)

    mean_x = s * (rho.expect(x) - rho.expect(None, x))
    x2 = 0.5 * (rho.expect(x @ x) + rho.expect(None, x @ x) - 2 * rho.expect(x, x))
    mean_p = s * (rho.expect(p) + rho.expect(None, p))
    p2 = 0.5 * (rho.expect(p @ p) + rho.expect(None, p @ p) + 2 * rho.expect(p, p))
    mean_n = rho.expect(n) + rho.expect(None, n)
    return (
        mean_x.real,
        (x2 - mean_x**2).real,
        mean_p.real,
        (p2 - mean_p**2).real,
        mean_n.real,
    )


def _cat_fock(alpha: float, cutoff) -> np.ndarray:
    v = coherent_fock(0.5j * alpha, cutoff) + coherent_fock(-0.5j * alpha, cutoff)
    return v / np.linalg.norm(v)


def _check_tail(vec: np.ndarray, dim: int, margin: int = 1):
    tail = float(np.sum(abs(vec[-margin:]) ** 2))
    if tail >= TAIL_TOL:
        raise CutoffError(f"displaced state leaks {tail:.2e} into the top Fock level (dim={dim})")


def probe_cutoff(spec: ProbeSpec) -> FockCutoff:
    """Cutoff-rule dimension covering every amplitude the probe passes through."""
    return FockCutoff.for_amplitude(abs(spec.x0) + 0.5 * spec.alpha)


def fock_probe(spec: ProbeSpec, cutoff=None) -> FockDensity:
    """Probe state built in the number basis, as seen by the damping channel."""
    cutoff = probe_cutoff(spec) if cutoff is None else _as_cutoff(cutoff)
    dim = cutoff.dim
    cls, alpha, x0 = spec.probe_class, spec.alpha, spec.x0
    vac = coherent_fock(0, cutoff)
    if cls is ProbeClass.I:
        m1 = displacement_matrix(x0 / np.sqrt(2), dim) @ vac
        m2 = displacement_matrix(-x0 / np.sqrt(2), dim) @ _cat_fock(alpha, cutoff)
        for v in (m1, m2):
            _check_tail(v, dim)
        psi = np.kron(m1, m2)
    elif cls is ProbeClass.II:
        m1 = displacement_matrix(x0, dim) @ _cat_fock(alpha, cutoff)
        _check_tail(m1, dim)
        psi = np.kron(m1, _cat_fock(alpha, cutoff))
    elif cls is ProbeClass.III:
        psi = np.kron(coherent_fock(x0 / np.sqrt(2), cutoff), coherent_fock(-x0 / np.sqrt(2), cutoff))
    else:
        psi = np.kron(coherent_fock(x0, cutoff), vac)
    if cls.uses_beam_splitter:
        psi = beam_splitter_unitary(cutoff) @ psi
    return FockDensity.from_pure(psi, cutoff)
