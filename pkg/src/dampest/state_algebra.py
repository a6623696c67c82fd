"""Two-mode density operators as finite sums of coherent-state dyads.

A state is stored as

    rho = sum_j w_j |a_j><a'_j| (x) |b_j><b'_j|

with complex coherent amplitudes ``a, a', b, b'`` and complex weights ``w``.
Beam splitting, displacement and zero-temperature amplitude damping of
mode 1 all map dyads to dyads, so every state in the pipeline is exact
within this representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

SQRT2 = np.sqrt(2.0)


class CoherentDyad(NamedTuple):
    """One term ``weight * |ket1><bra1| (x) |ket2><bra2|``."""

    ket1: complex
    bra1: complex
    ket2: complex
    bra2: complex
    weight: complex


def overlap(bra, ket):
    """Coherent-state overlap <bra|ket>.

    Works elementwise on arrays. Evaluated through its exponent so that the
    modulus is exactly ``exp(-|bra - ket|^2 / 2)``.
    """
    return np.exp(overlap_exponent(bra, ket))


def overlap_exponent(bra, ket):
    """log <bra|ket> on the analytic branch: -|bra|^2/2 - |ket|^2/2 + conj(bra) ket."""
    bra = np.asarray(bra, dtype=complex)
    ket = np.asarray(ket, dtype=complex)
    return -0.5 * abs(bra) ** 2 - 0.5 * abs(ket) ** 2 + np.conj(bra) * ket


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=complex).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DyadMix:
    """Immutable list of coherent dyads stored column-wise."""

    ket1: np.ndarray
    bra1: np.ndarray
    ket2: np.ndarray
    bra2: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        cols = [_frozen(getattr(self, name)) for name in ("ket1", "bra1", "ket2", "bra2", "weight")]
        n = len(cols[0])
        if any(len(c) != n for c in cols):
            raise ValueError("all dyad columns must have the same length")
        for c in cols:
            if not np.all(np.isfinite(c)):
                raise ValueError("dyad amplitudes and weights must be finite")
        for name, c in zip(("ket1", "bra1", "ket2", "bra2", "weight"), cols):
            object.__setattr__(self, name, c)

    @classmethod
    def from_terms(cls, terms: Sequence[CoherentDyad]) -> "DyadMix":
        if len(terms) == 0:
            return cls(*([np.zeros(0, dtype=complex)] * 5))
        cols = np.array([tuple(t) for t in terms], dtype=complex).T
        return cls(*cols)

    def __len__(self) -> int:
        return len(self.weight)

    def __iter__(self) -> Iterator[CoherentDyad]:
        return self.terms

    @property
    def terms(self) -> Iterator[CoherentDyad]:
        for row in zip(self.ket1, self.bra1, self.ket2, self.bra2, self.weight):
            yield CoherentDyad(*(complex(v) for v in row))

    def replace(self, **cols) -> "DyadMix":
        fields = {name: getattr(self, name) for name in ("ket1", "bra1", "ket2", "bra2", "weight")}
        fields.update(cols)
        return DyadMix(**fields)

    def term_overlaps(self) -> np.ndarray:
        """Per-term trace factor <bra1|ket1><bra2|ket2>."""
        return overlap(self.bra1, self.ket1) * overlap(self.bra2, self.ket2)

    def trace(self) -> complex:
        return complex(np.sum(self.weight * self.term_overlaps()))

    def purity(self) -> complex:
        """Tr rho^2 from pairwise dyad overlaps."""
        # Tr(|k><b|k'><b'|) = <b|k'><b'|k> for each mode
        m1 = overlap(self.bra1[:, None], self.ket1[None, :]) * overlap(self.bra1[None, :], self.ket1[:, None])
        m2 = overlap(self.bra2[:, None], self.ket2[None, :]) * overlap(self.bra2[None, :], self.ket2[:, None])
        return complex(np.einsum("j,k,jk->", self.weight, self.weight, m1 * m2))

    def adjoint(self) -> "DyadMix":
        return DyadMix(self.bra1, self.ket1, self.bra2, self.ket2, np.conj(self.weight))

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        """True when every term has its adjoint partner somewhere in the mix."""
        adj = self.adjoint()
        a = np.stack([self.ket1, self.bra1, self.ket2, self.bra2, self.weight], axis=1)
        b = np.stack([adj.ket1, adj.bra1, adj.ket2, adj.bra2, adj.weight], axis=1)
        dist = np.max(np.abs(a[:, None, :] - b[None, :, :]), axis=2)
        return bool(np.all(np.min(dist, axis=0) <= atol)) if len(self) else True


def pure_product_state(mode1_terms, mode2_terms) -> DyadMix:
    """Density operator of ``(sum_i c_i|a_i>) (x) (sum_k d_k|b_k>)``.

    Args:
        mode1_terms: sequence of ``(amplitude, coefficient)`` pairs for mode 1.
        mode2_terms: same for mode 2.

    Returns:
        DyadMix with ``(n1 * n2)**2`` terms. No normalization is applied.
    """
    if len(mode1_terms) == 0 or len(mode2_terms) == 0:
        raise ValueError("each mode needs at least one coherent term")
    a, c = (np.array(v, dtype=complex) for v in zip(*mode1_terms))
    b, d = (np.array(v, dtype=complex) for v in zip(*mode2_terms))
    # branches of the product ket, ordered mode-1 major
    amp1 = np.repeat(a, len(b))
    amp2 = np.tile(b, len(a))
    coef = np.repeat(c, len(b)) * np.tile(d, len(a))
    ket = np.arange(len(coef))
    kk, bb = np.meshgrid(ket, ket, indexing="ij")
    kk, bb = kk.ravel(), bb.ravel()
    return DyadMix(amp1[kk], amp1[bb], amp2[kk], amp2[bb], coef[kk] * np.conj(coef[bb]))


def _bs_map(x, y, inverse):
    if inverse:
        return (x + y) / SQRT2, (y - x) / SQRT2
    return (x - y) / SQRT2, (x + y) / SQRT2


def apply_beam_splitter(state: DyadMix, inverse: bool = False) -> DyadMix:
    """50:50 beam splitter ``U|a, b> = |(a - b)/sqrt2, (a + b)/sqrt2>``.

    The map is phase free on coherent products, so weights are untouched.
    ``inverse=True`` applies ``U^dagger``.
    """
    k1, k2 = _bs_map(state.ket1, state.ket2, inverse)
    b1, b2 = _bs_map(state.bra1, state.bra2, inverse)
    return DyadMix(k1, b1, k2, b2, state.weight)


def apply_displacement(state: DyadMix, mode: int, delta: complex) -> DyadMix:
    """Displace one mode, ``D(delta)|a> = exp(i Im(delta conj(a))) |a + delta>``."""
    if mode not in (1, 2):
        raise ValueError(f"mode must be 1 or 2, got {mode!r}")
    delta = complex(delta)
    ket = state.ket1 if mode == 1 else state.ket2
    bra = state.bra1 if mode == 1 else state.bra2
    phase = np.exp(1j * (np.imag(delta * np.conj(ket)) - np.imag(delta * np.conj(bra))))
    cols = {f"ket{mode}": ket + delta, f"bra{mode}": bra + delta, "weight": state.weight * phase}
    return state.replace(**cols)


def apply_damping(state: DyadMix, kappa: float) -> DyadMix:
    """Exact zero-temperature amplitude damping of mode 1 by ``kappa = gamma t``.

    ``|a><a'| -> <a'|a>^(1 - e^-kappa) |a e^-kappa/2><a' e^-kappa/2|``; the
    complex power is taken on the analytic branch of the overlap exponent.
    """
    if kappa < 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    if kappa == 0:
        return state
    shrink = np.exp(-kappa / 2)
    factor = np.exp(-np.expm1(-kappa) * overlap_exponent(state.bra1, state.ket1))
    return state.replace(ket1=state.ket1 * shrink, bra1=state.bra1 * shrink, weight=state.weight * factor)


def prune(state: DyadMix, tol: float = 0.0) -> DyadMix:
    """Drop zero-weight terms and terms whose trace contribution is below ``tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    contribution = np.abs(state.weight) * np.abs(state.term_overlaps())
    keep = (state.weight != 0) & ~(contribution < tol)
    if np.all(keep):
        return state
    return DyadMix(state.ket1[keep], state.bra1[keep], state.ket2[keep], state.bra2[keep], state.weight[keep])


def coalesce(state: DyadMix, atol: float = 0.0) -> DyadMix:
    """Merge terms whose four amplitudes agree within ``atol``, summing weights.

    Order of first appearance is kept. Merged weights that cancel are left as
    zero; follow with :func:`prune` to remove them.
    """
    amps = np.stack([state.ket1, state.bra1, state.ket2, state.bra2], axis=1)
    keys: list[int] = []
    weights: list[complex] = []
    for j in range(len(state)):
        for slot, k in enumerate(keys):
            if np.max(np.abs(amps[j] - amps[k])) <= atol:
                weights[slot] += state.weight[j]
                break
        else:
            keys.append(j)
            weights.append(complex(state.weight[j]))
    idx = np.array(keys, dtype=int)
    return DyadMix(state.ket1[idx], state.bra1[idx], state.ket2[idx], state.bra2[idx], weights)


def vacuum() -> DyadMix:
    return pure_product_state([(0, 1)], [(0, 1)])
