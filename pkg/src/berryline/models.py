"""Parameterized Hamiltonians.

* :class:`TwoLevelModel` -- the internal 2x2 Hamiltonian
  ``[[Rc, r e^{i phi}], [r e^{-i phi}, -Rc]]`` of a rotor.
* :class:`ThreeLevelModel` -- an SU(3) three-level system whose tracked state
  carries the connection ``cos^2(theta) dchi1 + sin^2(theta) cos^2(phi) dchi2``.
* :class:`CollectiveModel` -- the collective part ``H0(P)`` of the rotor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadInput, FrameDegeneracy
from .numerics import solve_scalar

_SQRT3 = math.sqrt(3.0)
_PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class TwoLevelModel:
    Rc: float
    r: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.Rc) and self.Rc >= 0):
            raise BadInput(f"Rc must be a finite non-negative number, got {self.Rc}")
        if not (math.isfinite(self.r) and self.r >= 0):
            raise BadInput(f"r must be a finite non-negative number, got {self.r}")

    @property
    def half_gap(self) -> float:
        return math.hypot(self.Rc, self.r)


@dataclass(frozen=True)
class ThreeLevelModel:
    """Angles are stored exactly as given; theta must lie in [0, pi/2]."""

    theta: float
    phi: float = 0.0
    chi1: float = 0.0
    chi2: float = 0.0

    def __post_init__(self):
        for name in ("theta", "phi", "chi1", "chi2"):
            if not math.isfinite(getattr(self, name)):
                raise BadInput(f"{name} must be finite")
        if not 0.0 <= self.theta <= math.pi / 2:
            raise BadInput(f"theta must lie in [0, pi/2], got {self.theta}")

    def spectrum(self) -> tuple[float, float, float]:
        """``(mu1, mu2, mu3)``; mu1 belongs to :func:`three_level_state`."""
        return three_level_spectrum(self.theta)


COLLECTIVE_KINDS = ("linear", "quadratic")


@dataclass(frozen=True)
class CollectiveModel:
    """``H0(P) = omega P`` (linear) or ``P**2 / (2 I)`` (quadratic).

    ``parameter`` is omega or the moment of inertia I respectively.
    """

    kind: str
    parameter: float
    hbar: float = 1.0

    def __post_init__(self):
        if self.kind not in COLLECTIVE_KINDS:
            raise BadInput(f"collective kind must be one of {COLLECTIVE_KINDS}, got {self.kind!r}")
        if not (math.isfinite(self.parameter) and self.parameter > 0):
            raise BadInput(f"collective parameter must be positive, got {self.parameter}")
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise BadInput(f"hbar must be positive, got {self.hbar}")


def two_level_hamiltonian(model: TwoLevelModel, phi: float) -> np.ndarray:
    off = model.r * np.exp(1j * phi)
    return np.array([[model.Rc, off], [np.conj(off), -model.Rc]], dtype=complex)


def two_level_hamiltonian_batch(model: TwoLevelModel, phis) -> np.ndarray:
    phis = np.asarray(phis, dtype=float)
    H = np.empty(phis.shape + (2, 2), dtype=complex)
    off = model.r * np.exp(1j * phis)
    H[..., 0, 0] = model.Rc
    H[..., 1, 1] = -model.Rc
    H[..., 0, 1] = off
    H[..., 1, 0] = off.conj()
    return H


def three_level_spectrum(theta: float) -> tuple[float, float, float]:
    s, c = math.sin(theta), math.cos(theta)
    return (s / _SQRT3 + c, s / _SQRT3 - c, -2.0 * s / _SQRT3)


def three_level_state(model: ThreeLevelModel) -> np.ndarray:
    st = math.sin(model.theta)
    return np.array(
        [
            math.cos(model.theta) * np.exp(1j * model.chi1),
            st * math.cos(model.phi) * np.exp(1j * model.chi2),
            st * math.sin(model.phi),
        ],
        dtype=complex,
    )


def three_level_state_batch(theta, phi, chi1, chi2) -> np.ndarray:
    """Stack of tracked states, shape ``(K, 3)``, for broadcastable angle arrays."""
    theta, phi, chi1, chi2 = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (theta, phi, chi1, chi2))
    )
    st = np.sin(theta)
    out = np.empty(theta.shape + (3,), dtype=complex)
    out[..., 0] = np.cos(theta) * np.exp(1j * chi1)
    out[..., 1] = st * np.cos(phi) * np.exp(1j * chi2)
    out[..., 2] = st * np.sin(phi)
    return out


def _complete_frame(psi: np.ndarray) -> list[np.ndarray]:
    """Orthonormal frame ``[psi, e, e']`` by Gram-Schmidt of the standard basis
    against ``psi`` (two passes per vector)."""
    frame = [psi / np.linalg.norm(psi)]
    for k in range(3):
        if len(frame) == 3:
            break
        w = np.zeros(3, dtype=complex)
        w[k] = 1.0
        for _ in range(2):
            for f in frame:
                w = w - np.vdot(f, w) * f
        norm = np.linalg.norm(w)
        if norm < _PIVOT_TOL:
            continue
        frame.append(w / norm)
    if len(frame) < 3:
        raise FrameDegeneracy("Gram-Schmidt completion failed for every basis vector")
    return frame


def three_level_hamiltonian(model: ThreeLevelModel) -> np.ndarray:
    """Hermitian 3x3 matrix ``sum_k mu_k |psi_k><psi_k|``.

    ``psi_1`` is :func:`three_level_state`; ``psi_2`` and ``psi_3`` complete an
    orthonormal frame deterministically. The eigenvalues are the closed-form
    ``mu_1, mu_2, mu_3`` and the matrix is traceless.
    """
    frame = _complete_frame(three_level_state(model))
    H = np.zeros((3, 3), dtype=complex)
    for mu, v in zip(model.spectrum(), frame):
        H += mu * np.outer(v, v.conj())
    return 0.5 * (H + H.conj().T)


def collective_energy(model: CollectiveModel, P: float) -> float:
    if model.kind == "linear":
        return model.parameter * P
    return P * P / (2.0 * model.parameter)


def collective_derivative(model: CollectiveModel, P: float) -> float:
    if model.kind == "linear":
        return model.parameter
    return P / model.parameter


def collective_energy_delta(model: CollectiveModel, P: float, dP: float) -> float:
    """``H0(P + dP) - H0(P)`` without cancellation when ``dP << |P|``."""
    if model.kind == "linear":
        return model.parameter * dP
    return (P + 0.5 * dP) * dP / model.parameter


def collective_momentum(model: CollectiveModel, energy: float, bracket: tuple[float, float]) -> float:
    """Invert ``H0`` on a bracket where it is monotone."""
    return solve_scalar(lambda P: collective_energy(model, P), energy, bracket)
