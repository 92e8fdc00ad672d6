"""Geometric phases: closed-form values and a Wilson-loop (overlap product)
engine over discretized parameter loops.

Loop orientation
----------------
``two_level_phi_winding`` loops run the Hamiltonian angle as
``phi(t) = -2 pi n t``. The field vector ``(r cos phi, -r sin phi, Rc)`` of
``[[Rc, r e^{i phi}], [r e^{-i phi}, -Rc]]`` then circulates counterclockwise
about the z axis ``n`` times, and the upper level picks up
``-pi (1 - Rc / sqrt(Rc^2 + r^2))`` per turn.

``su3_chi_winding`` loops run ``chi_i(t) = chi_i0 + 2 pi n_i t``; theta and phi
are constant unless a sinusoidal wobble ``a sin(2 pi t)`` is requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import (
    BadInput,
    DegeneratePoint,
    GapCollapse,
    InsufficientResolution,
    UnsupportedLoop,
)
from .models import (
    ThreeLevelModel,
    TwoLevelModel,
    three_level_hamiltonian,
    three_level_spectrum,
    three_level_state_batch,
    two_level_hamiltonian_batch,
)
from .numerics import eig_hermitian_batch, integrate_closed

TWO_PI = 2.0 * math.pi
TWO_LEVEL = "two_level_phi_winding"
SU3 = "su3_chi_winding"
MIN_POINTS = 16

DEFAULT_GAP_TOL = 1e-8
DEFAULT_PHASE_TOL = 1e-6


def wrap_phase(x: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    y = math.remainder(x, TWO_PI)
    return math.pi if y <= -math.pi else y


def branch_sign(branch) -> int:
    """Normalize a two-level branch label (``+1/-1``, ``'+'/'-'``,
    ``'plus'/'minus'``) to ``+1`` or ``-1``."""
    if branch in (1, "+", "plus", "upper"):
        return 1
    if branch in (-1, "-", "minus", "lower"):
        return -1
    raise BadInput(f"unknown branch {branch!r}; expected plus or minus")


@dataclass(frozen=True)
class ParameterLoop:
    """A closed curve in model parameter space sampled at ``points`` values of
    ``t`` in ``[0, 1)``.

    Build with :meth:`two_level` or :meth:`su3`.
    """

    kind: str
    base_model: TwoLevelModel | ThreeLevelModel
    windings: tuple[int, ...]
    points: int = 1024
    theta_wobble: float = 0.0
    phi_wobble: float = 0.0

    def __post_init__(self):
        if self.kind == TWO_LEVEL:
            if not isinstance(self.base_model, TwoLevelModel) or len(self.windings) != 1:
                raise BadInput("two-level loops need a TwoLevelModel and one winding number")
            if self.theta_wobble or self.phi_wobble:
                raise BadInput("wobble applies to SU(3) loops only")
        elif self.kind == SU3:
            if not isinstance(self.base_model, ThreeLevelModel) or len(self.windings) != 2:
                raise BadInput("SU(3) loops need a ThreeLevelModel and two winding numbers")
            th = self.base_model.theta
            a = abs(self.theta_wobble)
            if th - a < 0.0 or th + a > math.pi / 2:
                raise BadInput("theta wobble leaves [0, pi/2]")
        else:
            raise BadInput(f"unknown loop kind {self.kind!r}")
        if any(int(n) != n for n in self.windings):
            raise BadInput("winding numbers must be integers")
        if int(self.points) != self.points or self.points < MIN_POINTS:
            raise BadInput(f"loop needs K >= {MIN_POINTS} points, got {self.points}")

    @classmethod
    def two_level(cls, model: TwoLevelModel, winding: int = 1, points: int = 1024) -> "ParameterLoop":
        return cls(TWO_LEVEL, model, (int(winding),), points)

    @classmethod
    def su3(
        cls,
        model: ThreeLevelModel,
        n1: int = 1,
        n2: int = 0,
        points: int = 1024,
        theta_wobble: float = 0.0,
        phi_wobble: float = 0.0,
    ) -> "ParameterLoop":
        return cls(SU3, model, (int(n1), int(n2)), points, theta_wobble, phi_wobble)

    @property
    def fixed_angles(self) -> bool:
        return self.theta_wobble == 0.0 and self.phi_wobble == 0.0

    def reversed(self) -> "ParameterLoop":
        """The same curve traversed backwards (``t -> 1 - t``)."""
        return replace(
            self,
            windings=tuple(-n for n in self.windings),
            theta_wobble=-self.theta_wobble,
            phi_wobble=-self.phi_wobble,
        )

    def with_points(self, points: int) -> "ParameterLoop":
        return replace(self, points=points)

    def su3_angles(self, t: np.ndarray):
        """``(theta, phi, chi1, chi2)`` arrays along the loop."""
        m = self.base_model
        s = np.sin(TWO_PI * t)
        n1, n2 = self.windings
        return (
            m.theta + self.theta_wobble * s,
            m.phi + self.phi_wobble * s,
            m.chi1 + TWO_PI * n1 * t,
            m.chi2 + TWO_PI * n2 * t,
        )

    def two_level_angles(self, t: np.ndarray) -> np.ndarray:
        return -TWO_PI * self.windings[0] * t


@dataclass(frozen=True)
class BerryPhaseResult:
    """``numerical`` is wrapped to (-pi, pi]; ``unwrapped`` is the sum of
    per-step overlap phases and is meaningful for smooth gauges (the tracked
    SU(3) state). ``analytic`` and ``discrepancy`` are None when no closed
    form applies."""

    branch: int
    analytic: Optional[float]
    numerical: float
    unwrapped: float
    discrepancy: Optional[float]
    points: int
    resolution_change: Optional[float] = None


def analytic_two_level_phase(model: TwoLevelModel, branch) -> float:
    """``-/+ pi (1 - Rc / sqrt(Rc^2 + r^2))`` for the upper/lower level, one
    counterclockwise turn."""
    s = branch_sign(branch)
    if model.Rc == 0.0 and model.r == 0.0:
        raise DegeneratePoint("Berry phase is undefined at the level crossing Rc = r = 0")
    h = model.half_gap
    # 1 - Rc/h rewritten to avoid cancellation for r << Rc
    one_minus_cos = model.r * model.r / (h * (h + model.Rc))
    return -s * math.pi * one_minus_cos


def analytic_su3_phase(loop: ParameterLoop) -> float:
    if loop.kind != SU3:
        raise UnsupportedLoop("analytic_su3_phase needs an SU(3) loop")
    if not loop.fixed_angles:
        raise UnsupportedLoop("theta or phi vary along the loop; use wilson_loop_phase")
    m = loop.base_model
    n1, n2 = loop.windings
    c2 = math.cos(m.theta) ** 2
    b = math.sin(m.theta) ** 2 * math.cos(m.phi) ** 2
    return -TWO_PI * (n1 * c2 + n2 * b)


def connection_integral_su3(loop: ParameterLoop, n: int = 4096) -> float:
    """``-∮ (cos^2 theta dchi1 + sin^2 theta cos^2 phi dchi2)`` by midpoint
    quadrature in the loop parameter."""
    if loop.kind != SU3:
        raise UnsupportedLoop("connection_integral_su3 needs an SU(3) loop")
    n1, n2 = loop.windings

    def one_form(t):
        theta, phi, _, _ = loop.su3_angles(t)
        a = np.cos(theta) ** 2
        b = np.sin(theta) ** 2 * np.cos(phi) ** 2
        return -TWO_PI * (n1 * a + n2 * b)

    return integrate_closed(one_form, n)


def overlap_phase(states: np.ndarray) -> tuple[float, float]:
    """Wilson-loop phase of a closed chain of states.

    ``states`` has shape ``(K, N)``; the chain closes from the last state back
    to the first. Returns ``(wrapped, unwrapped)`` where
    ``unwrapped = -sum_k arg <v_k | v_{k+1}>``.
    """
    ov = np.einsum("ki,ki->k", states.conj(), np.roll(states, -1, axis=0))
    if np.min(np.abs(ov)) < 1e-300:
        raise InsufficientResolution(len(states), math.inf, 0.0)
    unwrapped = -math.fsum(np.angle(ov).tolist())
    return wrap_phase(unwrapped), unwrapped


def _check_gap(t: np.ndarray, gaps: np.ndarray, gap_tol: float) -> None:
    k = int(np.argmin(gaps))
    if gaps[k] < gap_tol:
        raise GapCollapse(float(t[k]), float(gaps[k]), gap_tol)


def loop_states(
    loop: ParameterLoop,
    branch=None,
    points: Optional[int] = None,
    method: str = "auto",
    gap_tol: float = DEFAULT_GAP_TOL,
) -> np.ndarray:
    """States of the tracked level at ``t_k = k / points``; shape ``(points, N)``.

    Two-level loops use :func:`~berryline.numerics.eig_hermitian_batch`.
    SU(3) loops use the tracked state directly (``method='tracked'``, level 0
    only, no gap requirement) or diagonalize the reconstructed Hamiltonian
    (``method='eigen'``, any level, gap-checked).
    """
    K = loop.points if points is None else int(points)
    t = np.arange(K) / K
    if loop.kind == TWO_LEVEL:
        s = branch_sign(1 if branch is None else branch)
        H = two_level_hamiltonian_batch(loop.base_model, loop.two_level_angles(t))
        values, vectors = eig_hermitian_batch(H, check=False)
        _check_gap(t, values[:, 1] - values[:, 0], gap_tol)
        return vectors[:, :, 1 if s > 0 else 0]

    level = 0 if branch is None else int(branch)
    if level not in (0, 1, 2):
        raise BadInput(f"SU(3) level index must be 0, 1 or 2, got {branch!r}")
    if method == "auto":
        method = "tracked" if level == 0 else "eigen"
    theta, phi, chi1, chi2 = loop.su3_angles(t)
    if method == "tracked":
        if level != 0:
            raise BadInput("the tracked-state path follows level 0 only")
        return three_level_state_batch(theta, phi, chi1, chi2)
    if method != "eigen":
        raise BadInput(f"unknown method {method!r}")

    Hs = np.stack(
        [
            three_level_hamiltonian(ThreeLevelModel(float(a), float(b), float(c), float(d)))
            for a, b, c, d in zip(theta, phi, chi1, chi2)
        ]
    )
    values, vectors = eig_hermitian_batch(Hs)
    mus = np.array([three_level_spectrum(float(a)) for a in theta])
    target = mus[:, level]
    idx = np.argmin(np.abs(values - target[:, None]), axis=1)
    others = np.abs(mus - target[:, None])
    others[:, level] = np.inf
    _check_gap(t, others.min(axis=1), gap_tol)
    return vectors[np.arange(K), :, idx]


def wilson_loop_phase(
    loop: ParameterLoop,
    branch=None,
    *,
    method: str = "auto",
    gap_tol: float = DEFAULT_GAP_TOL,
    phase_tol: Optional[float] = DEFAULT_PHASE_TOL,
    gauge: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> BerryPhaseResult:
    """Discrete Berry phase ``-arg prod_k <v(t_k), v(t_{k+1})>`` over the loop.

    The states are sampled on ``2K`` points; the K-point chain (every other
    state) gives the reported phase and the 2K chain checks resolution: if
    the wrapped phases differ by more than ``phase_tol``
    :class:`InsufficientResolution` is raised. ``phase_tol=None`` skips the
    check. ``gauge``, if given, is applied to the ``(2K, N)`` state stack
    before the overlaps are formed; any per-point rephasing leaves the
    wrapped phase unchanged.

    ``branch`` is ``+1/-1`` (or ``'plus'/'minus'``) for two-level loops and
    a level index (default 0) for SU(3) loops.
    """
    K = loop.points
    refine = phase_tol is not None
    states = loop_states(loop, branch, 2 * K if refine else K, method, gap_tol)
    if gauge is not None:
        states = np.asarray(gauge(states), dtype=complex)
    coarse = states[::2] if refine else states
    wrapped, unwrapped = overlap_phase(coarse)

    change = None
    if refine:
        fine, _ = overlap_phase(states)
        change = abs(wrap_phase(fine - wrapped))
        if change > phase_tol:
            raise InsufficientResolution(K, change, phase_tol)

    analytic = None
    if loop.kind == TWO_LEVEL:
        label = branch_sign(1 if branch is None else branch)
        if not (loop.base_model.Rc == 0.0 and loop.base_model.r == 0.0):
            analytic = loop.windings[0] * analytic_two_level_phase(loop.base_model, label)
    else:
        label = 0 if branch is None else int(branch)
        if label == 0 and loop.fixed_angles:
            analytic = analytic_su3_phase(loop)
    discrepancy = None if analytic is None else abs(wrap_phase(wrapped - analytic))
    return BerryPhaseResult(
        branch=label,
        analytic=analytic,
        numerical=wrapped,
        unwrapped=unwrapped,
        discrepancy=discrepancy,
        points=K,
        resolution_change=change,
    )
