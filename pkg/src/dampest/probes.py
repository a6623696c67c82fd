"""Probe states entering the damping channel.

Four classes are compared:

* ``I``   mode-2 cat ``|i alpha/2> + |-i alpha/2>`` next to vacuum, displaced
  by ``D1(X0/sqrt2) D2(-X0/sqrt2)`` and entangled by the beam splitter;
* ``II``  product of two such cats, displaced by ``D1(X0)``, no beam splitter;
* ``III`` ``|X0/sqrt2> |-X0/sqrt2>`` through the beam splitter;
* ``IV``  ``|X0> |0>`` without beam splitter.

Every constructor returns the state as seen by the damping channel.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .state_algebra import DyadMix, apply_beam_splitter, apply_displacement, pure_product_state


class ProbeClass(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"

    @property
    def uses_beam_splitter(self) -> bool:
        return self in (ProbeClass.I, ProbeClass.III)

    @property
    def is_classical(self) -> bool:
        return self in (ProbeClass.III, ProbeClass.IV)


@dataclass(frozen=True)
class ProbeSpec:
    probe_class: ProbeClass
    alpha: float = 0.0
    x0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "probe_class", ProbeClass(self.probe_class))
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.probe_class.is_classical and self.alpha != 0:
            raise ValueError(f"class {self.probe_class.value} probes carry no superposition (alpha must be 0)")


def normalization_constant(alpha: float) -> float:
    """N_alpha = [2 (1 + exp(-alpha^2/2))]^(-1/2).

    ``<i a/2 | -i a/2> = exp(-a^2/2)`` is real, so the cat has squared norm
    ``N^2 (2 + 2 exp(-a^2/2))``.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    return 1.0 / np.sqrt(2.0 * (1.0 + np.exp(-0.5 * alpha**2)))


def cat_terms(alpha: float) -> list[tuple[complex, complex]]:
    """Coherent terms of the normalized cat ``N (|i alpha/2> + |-i alpha/2>)``."""
    n = normalization_constant(alpha)
    return [(0.5j * alpha, n), (-0.5j * alpha, n)]


def make_probe(spec: ProbeSpec) -> DyadMix:
    """Build the probe density operator immediately before damping."""
    cls, alpha, x0 = spec.probe_class, spec.alpha, spec.x0
    if cls is ProbeClass.I:
        state = pure_product_state([(0, 1)], cat_terms(alpha))
        state = apply_displacement(state, 1, x0 / np.sqrt(2))
        state = apply_displacement(state, 2, -x0 / np.sqrt(2))
    elif cls is ProbeClass.II:
        state = pure_product_state(cat_terms(alpha), cat_terms(alpha))
        state = apply_displacement(state, 1, x0)
    elif cls is ProbeClass.III:
        state = pure_product_state([(x0 / np.sqrt(2), 1)], [(-x0 / np.sqrt(2), 1)])
    else:
        state = pure_product_state([(x0, 1)], [(0, 1)])
    if cls.uses_beam_splitter:
        state = apply_beam_splitter(state)
    return state


def superposition_photons(probe_class: ProbeClass, alpha: float) -> float:
    """Photon cost of the cat part alone (the ``X0``-independent term)."""
    probe_class = ProbeClass(probe_class)
    q = 0.25 * alpha**2
    if probe_class is ProbeClass.I:
        return q * np.tanh(q)
    if probe_class is ProbeClass.II:
        return 2 * q * np.tanh(q)
    return 0.0


def photon_number(spec: ProbeSpec) -> float:
    """Mean photon number per measurement, ``X0^2`` plus the superposition cost."""
    return spec.x0**2 + superposition_photons(spec.probe_class, spec.alpha)
