"""Moments and measurement statistics of the EPR observables.

Conventions: ``x = (a + a^dagger)/sqrt2``, ``p = x(pi/2)``, and

    X = (x1 - x2)/sqrt2,    P = (p1 + p2)/sqrt2.

Expectations over a :class:`~dampest.state_algebra.DyadMix` use the
matrix-element rule ``<a'|(a^dagger)^p a^q|a> = conj(a')^p a^q <a'|a>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .state_algebra import DyadMix, apply_beam_splitter, overlap

# exponents are (p1, q1, p2, q2) for (a1^dag)^p1 a1^q1 (a2^dag)^p2 a2^q2
Monomial = tuple[int, int, int, int]


def _mode_product(p, q, r, s):
    """Normal-order (a^dag^p a^q)(a^dag^r a^s) -> {(p', q'): coeff}."""
    out = {}
    for k in range(min(q, r) + 1):
        out[(p + r - k, q + s - k)] = comb(q, k) * comb(r, k) * factorial(k)
    return out


@dataclass(frozen=True)
class NormalOrderedPoly:
    """Polynomial in two-mode ladder operators, kept in normal order."""

    monomials: dict

    def __post_init__(self):
        clean = {}
        for key, coeff in self.monomials.items():
            key = tuple(int(e) for e in key)
            if len(key) != 4 or min(key) < 0:
                raise ValueError(f"bad exponent tuple {key}")
            coeff = complex(coeff)
            if not np.isfinite(coeff):
                raise ValueError("coefficients must be finite")
            if coeff != 0:
                clean[key] = clean.get(key, 0) + coeff
        object.__setattr__(self, "monomials", clean)

    @classmethod
    def constant(cls, c) -> "NormalOrderedPoly":
        return cls({(0, 0, 0, 0): c})

    @classmethod
    def annihilation(cls, mode: int) -> "NormalOrderedPoly":
        return cls({(0, 1, 0, 0) if mode == 1 else (0, 0, 0, 1): 1})

    @classmethod
    def creation(cls, mode: int) -> "NormalOrderedPoly":
        return cls({(1, 0, 0, 0) if mode == 1 else (0, 0, 1, 0): 1})

    def coefficient(self, key: Monomial) -> complex:
        return self.monomials.get(tuple(key), 0j)

    def __add__(self, other):
        other = _as_poly(other)
        merged = dict(self.monomials)
        for key, c in other.monomials.items():
            merged[key] = merged.get(key, 0) + c
        return NormalOrderedPoly(merged)

    __radd__ = __add__

    def __neg__(self):
        return NormalOrderedPoly({k: -c for k, c in self.monomials.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return NormalOrderedPoly({k: c * other for k, c in self.monomials.items()})
        out: dict = {}
        for (p1, q1, p2, q2), c in self.monomials.items():
            for (r1, s1, r2, s2), d in other.monomials.items():
                for (e1, f1), w1 in _mode_product(p1, q1, r1, s1).items():
                    for (e2, f2), w2 in _mode_product(p2, q2, r2, s2).items():
                        key = (e1, f1, e2, f2)
                        out[key] = out.get(key, 0) + c * d * w1 * w2
        return NormalOrderedPoly(out)

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, other):
        return self * (1 / other)

    def dagger(self) -> "NormalOrderedPoly":
        return NormalOrderedPoly({(q1, p1, q2, p2): np.conj(c) for (p1, q1, p2, q2), c in self.monomials.items()})


def _as_poly(value) -> NormalOrderedPoly:
    if isinstance(value, NormalOrderedPoly):
        return value
    return NormalOrderedPoly.constant(value)


def quadrature(mode: int, theta: float = 0.0) -> NormalOrderedPoly:
    """Single-mode quadrature ``(a e^{-i theta} + a^dagger e^{i theta})/sqrt2``."""
    a = NormalOrderedPoly.annihilation(mode)
    ad = NormalOrderedPoly.creation(mode)
    return (a * np.exp(-1j * theta) + ad * np.exp(1j * theta)) / np.sqrt(2)


def normal_order_X_ops():
    """Return ``(X, X^2, P, P^2)`` as normal-ordered polynomials."""
    x1, x2 = quadrature(1), quadrature(2)
    p1, p2 = quadrature(1, np.pi / 2), quadrature(2, np.pi / 2)
    X = (x1 - x2) / np.sqrt(2)
    P = (p1 + p2) / np.sqrt(2)
    return X, X * X, P, P * P


def photon_number_op() -> NormalOrderedPoly:
    return NormalOrderedPoly({(1, 1, 0, 0): 1, (0, 0, 1, 1): 1})


def _expectations(state: DyadMix, polys) -> list[complex]:
    """Tr(rho * poly) for several polynomials, sharing the overlap factors."""
    base = state.weight * overlap(state.bra1, state.ket1) * overlap(state.bra2, state.ket2)
    cols = (np.conj(state.bra1), state.ket1, np.conj(state.bra2), state.ket2)
    out = []
    for poly in polys:
        exps = np.array(list(poly.monomials), dtype=int).reshape(-1, 4)
        coeffs = np.array(list(poly.monomials.values()), dtype=complex)
        # (terms, monomials) table of conj(b1)^p1 k1^q1 conj(b2)^p2 k2^q2
        table = np.ones((len(base), len(exps)), dtype=complex)
        for i, col in enumerate(cols):
            if exps[:, i].any():
                table *= col[:, None] ** exps[None, :, i]
        out.append(complex(base @ table @ coeffs))
    return out


def dyad_expectation(state: DyadMix, poly: NormalOrderedPoly) -> complex:
    """Tr(rho * poly) summed over dyads."""
    return _expectations(state, [poly])[0]


_X, _X2, _P, _P2 = normal_order_X_ops()
_N = photon_number_op()
_ONE = NormalOrderedPoly.constant(1)


def _mean_var(state: DyadMix, first, second, trace_tol: float = 1e-6):
    tr, m, m2 = _expectations(state, [_ONE, first, second])
    if abs(tr - 1) > trace_tol:
        raise ValueError(f"state is not normalized (trace = {tr:.3g})")
    return m.real, m2.real - m.real**2


def mean_var_X(state: DyadMix) -> tuple[float, float]:
    return _mean_var(state, _X, _X2)


def mean_var_P(state: DyadMix) -> tuple[float, float]:
    return _mean_var(state, _P, _P2)


def mean_photons(state: DyadMix) -> float:
    """<n1> + <n2>."""
    return dyad_expectation(state, _N).real


def quadrature_amplitude(x, alpha, theta: float = 0.0):
    """Wavefunction <x_theta|alpha> of a coherent state, broadcasting over inputs."""
    x = np.asarray(x, dtype=float)
    b = np.asarray(alpha, dtype=complex) * np.exp(-1j * theta)
    return np.pi**-0.25 * np.exp(-0.5 * x**2 + np.sqrt(2) * x * b - 0.5 * b**2 - 0.5 * abs(alpha) ** 2)


def joint_distribution(state: DyadMix, X_grid, P_grid) -> np.ndarray:
    """Joint density W(X, P) on the outer product grid, shape ``(len(X), len(P))``.

    The EPR eigenstates are ``|X, P> = U_BS |p=P>_1 |x=-X>_2``, so the state
    is pulled back through the beam splitter and read out with a p-quadrature
    on mode 1 and an x-quadrature at ``-X`` on mode 2.
    """
    X_grid = np.asarray(X_grid, dtype=float)
    P_grid = np.asarray(P_grid, dtype=float)
    back = apply_beam_splitter(state, inverse=True)
    f1 = quadrature_amplitude(P_grid[:, None], back.ket1[None, :], np.pi / 2) * np.conj(
        quadrature_amplitude(P_grid[:, None], back.bra1[None, :], np.pi / 2)
    )
    f2 = quadrature_amplitude(-X_grid[:, None], back.ket2[None, :]) * np.conj(
        quadrature_amplitude(-X_grid[:, None], back.bra2[None, :])
    )
    return np.einsum("j,xj,pj->xp", back.weight, f2, f1).real


@dataclass(frozen=True)
class GridDensity:
    """Probability density sampled on a uniform grid."""

    x_min: float
    x_max: float
    values: np.ndarray

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, len(self.values))

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.grid))

    def moments(self) -> tuple[float, float]:
        x = self.grid
        mean = np.trapezoid(x * self.values, x)
        var = np.trapezoid((x - mean) ** 2 * self.values, x)
        return float(mean), float(var)

    def cdf(self) -> np.ndarray:
        """Cumulative trapezoid, pinned to end at exactly 1."""
        x = self.grid
        steps = 0.5 * (self.values[1:] + self.values[:-1]) * np.diff(x)
        c = np.concatenate([[0.0], np.cumsum(steps)])
        return c / c[-1]


DEFAULT_GRID_POINTS = 16384


def marginal_X_values(state: DyadMix, X) -> np.ndarray:
    """Unnormalized X-marginal; the P integral is done analytically per dyad.

    Integrating ``<p|a><a'|p>`` over p leaves the overlap ``<a'|a>``.
    """
    X = np.asarray(X, dtype=float)
    back = apply_beam_splitter(state, inverse=True)
    w = back.weight * overlap(back.bra1, back.ket1)
    f2 = quadrature_amplitude(-X[:, None], back.ket2[None, :]) * np.conj(
        quadrature_amplitude(-X[:, None], back.bra2[None, :])
    )
    return (f2 @ w).real


def marginal_X(state: DyadMix, grid=None, points: int = DEFAULT_GRID_POINTS, tail_tol: float = 1e-8) -> GridDensity:
    """Density of X outcomes on a uniform grid.

    Args:
        state: normalized Hermitian state.
        grid: ``(x_min, x_max)``. Defaults to ``mean +- 8 sigma`` with sigma
            floored at the vacuum width.
        points: number of grid points.
        tail_tol: largest probability mass allowed outside the grid.

    Raises:
        ValueError: if the grid misses more than ``tail_tol`` of the mass.
    """
    if grid is None:
        mean, var = mean_var_X(state)
        half = 8 * np.sqrt(max(var, 0.5))
        grid = (mean - half, mean + half)
    x_min, x_max = float(grid[0]), float(grid[1])
    if not x_max > x_min:
        raise ValueError("grid must be strictly increasing")
    x = np.linspace(x_min, x_max, points)
    values = marginal_X_values(state, x)
    mass = np.trapezoid(values, x)
    total = state.trace().real
    if abs(total - mass) > tail_tol:
        raise ValueError(f"grid [{x_min:.4g}, {x_max:.4g}] misses {abs(total - mass):.2e} of the probability mass")
    values = np.clip(values, 0.0, None) / mass
    return GridDensity(x_min, x_max, values)
