"""Semiclassical quantization of the rotor with a geometric-phase shift.

The collective momentum is quantized as ``P = (m - gamma / 2 pi) hbar`` with
``gamma`` the Berry phase of the internal level. Two energies are reported:

* ``energy_exact = H0(P) +/- sqrt(Rc^2 + r^2)``
* ``energy_first_order``, the expansion about ``P = m hbar``::

      H0(m hbar) +/- sqrt(Rc^2 + r^2)
                 +/- (hbar/2) H0'(m hbar)
                 -/+ (hbar/2) (Rc / sqrt(Rc^2 + r^2)) H0'(m hbar)

For linear ``H0`` the two coincide; for quadratic ``H0`` they differ by
``(gamma hbar / 2 pi)^2 / (2 I)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .berry import analytic_two_level_phase, branch_sign
from .errors import BadInput
from .models import CollectiveModel, TwoLevelModel, collective_derivative, collective_energy

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QuantizedLevel:
    m: int
    branch: int
    gamma: float
    P_quantized: float
    energy_exact: float
    energy_first_order: float

    @property
    def truncation_residual(self) -> float:
        return abs(self.energy_exact - self.energy_first_order)


def quantized_momentum(m: int, gamma: float, hbar: float) -> float:
    return (m - gamma / TWO_PI) * hbar


def quantize_level(
    collective: CollectiveModel, internal: TwoLevelModel, m: int, branch
) -> QuantizedLevel:
    s = branch_sign(branch)
    if int(m) != m:
        raise BadInput(f"quantum number m must be an integer, got {m}")
    m = int(m)
    hbar = collective.hbar
    gamma = analytic_two_level_phase(internal, s)
    P = quantized_momentum(m, gamma, hbar)
    h = internal.half_gap
    exact = collective_energy(collective, P) + s * h

    P0 = m * hbar
    slope = collective_derivative(collective, P0)
    cos_ratio = internal.Rc / h
    first = (
        collective_energy(collective, P0)
        + s * h
        + s * 0.5 * hbar * slope
        - s * 0.5 * hbar * cos_ratio * slope
    )
    return QuantizedLevel(
        m=m, branch=s, gamma=gamma, P_quantized=P, energy_exact=exact, energy_first_order=first
    )


def spectrum(
    collective: CollectiveModel, internal: TwoLevelModel, m_range: Iterable[int]
) -> list[QuantizedLevel]:
    """Both branches for every ``m``, sorted by exact energy (ties by branch,
    then ``m``)."""
    ms = sorted(set(int(m) for m in m_range))
    if not ms:
        raise BadInput("m_range is empty")
    levels = [quantize_level(collective, internal, m, s) for m in ms for s in (-1, 1)]
    levels.sort(key=lambda lv: (lv.energy_exact, lv.branch, lv.m))
    return levels


def max_truncation_residual(levels: Iterable[QuantizedLevel]) -> float:
    return max(lv.truncation_residual for lv in levels)
