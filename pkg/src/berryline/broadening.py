"""Fundamental-length line broadening.

A level is smeared over a patch of internal offsets ``0 <= r <= l/2``. Each
offset carries its own Berry phase and therefore its own quantized momentum;
the spread of the resulting energies is the broadening ``dE_berry``. It is
compared with the closed forms

* two-level: ``(hbar / 16) (l / Rc)^2 H0'``
* SU(3), ``cos(theta) = r / Rc``: ``(hbar / 4) (l / Rc)^2 H0'``

and with the linear bound ``nu0 (l / Rc) beta`` of the indeterminate-operator
picture. The shift of the internal eigenvalue across the patch (``dE_gap``)
is reported next to ``dE_berry`` and never added to it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .berry import ParameterLoop, analytic_su3_phase, branch_sign
from .errors import BadInput, PredictionUnderflow
from .models import (
    CollectiveModel,
    ThreeLevelModel,
    TwoLevelModel,
    collective_derivative,
    collective_energy_delta,
    three_level_spectrum,
)
from .numerics import FitResult, fit_loglog
from .quantize import quantize_level, quantized_momentum

TWO_PI = 2.0 * math.pi
MAX_RATIO = 0.1
WARN_RATIO = 0.01
SCALING_MAX_RATIO = 0.01
SCALING_KINDS = ("two_level", "su3", "mead")


class PatchRatioWarning(UserWarning):
    """l / Rc is above 0.01, where the small-patch expansion degrades."""


@dataclass(frozen=True)
class PatchConfig:
    l: float
    Rc: float = 1.0
    n_samples: int = 101
    collective: CollectiveModel = field(default_factory=lambda: CollectiveModel("linear", 1.0))
    m: int = 0
    branch: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.l) and self.l > 0):
            raise BadInput(f"l must be positive, got {self.l}")
        if not (math.isfinite(self.Rc) and self.Rc > 0):
            raise BadInput(f"Rc must be positive, got {self.Rc}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise BadInput(f"n_samples must be an integer >= 2, got {self.n_samples}")
        if int(self.m) != self.m:
            raise BadInput(f"m must be an integer, got {self.m}")
        object.__setattr__(self, "branch", branch_sign(self.branch))
        ratio = self.l / self.Rc
        if ratio > MAX_RATIO:
            raise BadInput(f"l/Rc = {ratio:.3g} exceeds {MAX_RATIO}; the patch must be small")
        if ratio > WARN_RATIO:
            warnings.warn(
                f"l/Rc = {ratio:.3g} > {WARN_RATIO}: quadratic law is only approximate",
                PatchRatioWarning,
                stacklevel=3,
            )

    @property
    def ratio(self) -> float:
        return self.l / self.Rc

    def radii(self) -> np.ndarray:
        return np.linspace(0.0, 0.5 * self.l, int(self.n_samples))


@dataclass(frozen=True)
class BroadeningReport:
    dE_berry: float
    dE_gap: float
    dE_predicted: float
    relative_error: float
    coefficient: float
    samples: list[tuple[float, float]]
    gap_samples: list[tuple[float, float]]

    @property
    def gap_to_berry_ratio(self) -> float:
        return self.dE_gap / self.dE_berry if self.dE_berry > 0 else math.inf


@dataclass(frozen=True)
class MeadBound:
    nu0: float
    l_over_Rc: float
    beta: float
    bound: float


def _prediction(config: PatchConfig, coefficient: float) -> tuple[float, float]:
    hbar = config.collective.hbar
    slope = abs(collective_derivative(config.collective, config.m * hbar))
    predicted = coefficient * hbar * config.ratio**2 * slope
    if not predicted >= 1e-300:
        raise PredictionUnderflow(
            f"predicted broadening {predicted:.3e} underflows (H0' = {slope:.3e} at m hbar)"
        )
    return predicted, slope


def _report(config, shifts, gap_shifts, predicted, slope) -> BroadeningReport:
    rs = config.radii()
    dE = float(np.max(shifts) - np.min(shifts))
    dgap = float(np.max(gap_shifts) - np.min(gap_shifts))
    hbar = config.collective.hbar
    return BroadeningReport(
        dE_berry=dE,
        dE_gap=dgap,
        dE_predicted=predicted,
        relative_error=abs(dE - predicted) / predicted,
        coefficient=dE / (hbar * config.ratio**2 * slope),
        samples=[(float(r), float(x)) for r, x in zip(rs, shifts)],
        gap_samples=[(float(r), float(x)) for r, x in zip(rs, gap_shifts)],
    )


def _berry_channel(config: PatchConfig, gammas: Sequence[float]) -> np.ndarray:
    # energy shift from the Berry phase alone, relative to the r = 0 state
    hbar = config.collective.hbar
    P0 = quantized_momentum(config.m, gammas[0], hbar)
    return np.array(
        [
            collective_energy_delta(config.collective, P0, (gammas[0] - g) / TWO_PI * hbar)
            for g in gammas
        ]
    )


def sweep_patch(config: PatchConfig) -> BroadeningReport:
    """Two-level broadening over ``0 <= r <= l/2``."""
    predicted, slope = _prediction(config, 1.0 / 16.0)
    levels = [
        quantize_level(config.collective, TwoLevelModel(config.Rc, float(r)), config.m, config.branch)
        for r in config.radii()
    ]
    shifts = _berry_channel(config, [lv.gamma for lv in levels])
    # sqrt(Rc^2 + r^2) - Rc, cancellation-free
    gap = np.array(
        [config.branch * r * r / (math.hypot(config.Rc, r) + config.Rc) for r in config.radii()]
    )
    return _report(config, shifts, gap, predicted, slope)


def sweep_patch_su3(config: PatchConfig) -> BroadeningReport:
    """SU(3) broadening: ``cos(theta) = r / Rc`` on a loop winding chi1 once.

    The tracked level ``mu1`` is used; ``config.branch`` is ignored.
    ``dE_gap`` is the spread of ``mu1`` across the patch, in the internal
    Hamiltonian's units.
    """
    predicted, slope = _prediction(config, 0.25)
    gammas, mus = [], []
    for r in config.radii():
        theta = math.acos(min(1.0, r / config.Rc))
        gammas.append(analytic_su3_phase(ParameterLoop.su3(ThreeLevelModel(theta), 1, 0)))
        mus.append(three_level_spectrum(theta)[0])
    shifts = _berry_channel(config, gammas)
    gap = np.array(mus) - mus[0]
    return _report(config, shifts, gap, predicted, slope)


def mead_bound(nu0: float, l_over_Rc: float, beta: float = 1.0) -> MeadBound:
    """Linear frequency-spread bound ``nu0 (l / Rc) beta``."""
    for name, v in (("nu0", nu0), ("l_over_Rc", l_over_Rc), ("beta", beta)):
        if not (math.isfinite(v) and v > 0):
            raise BadInput(f"{name} must be positive, got {v}")
    return MeadBound(nu0=nu0, l_over_Rc=l_over_Rc, beta=beta, bound=nu0 * l_over_Rc * beta)


@dataclass(frozen=True)
class MeadComparison:
    mead: MeadBound
    report: BroadeningReport

    @property
    def measured_ratio(self) -> float:
        return self.report.dE_berry / self.mead.bound

    @property
    def predicted_ratio(self) -> float:
        return self.report.dE_predicted / self.mead.bound


def compare_with_mead(
    l_over_Rc: float,
    nu0: float = 1.0,
    beta: float = 1.0,
    Rc: float = 1.0,
    collective: CollectiveModel | None = None,
    n_samples: int = 101,
    m: int = 0,
) -> MeadComparison:
    """Two-level broadening divided by the linear bound at the same ``l / Rc``."""
    collective = collective or CollectiveModel("linear", 1.0)
    bound = mead_bound(nu0, l_over_Rc, beta)
    config = PatchConfig(l=l_over_Rc * Rc, Rc=Rc, n_samples=n_samples, collective=collective, m=m)
    return MeadComparison(mead=bound, report=sweep_patch(config))


def _check_ratios(ratios: Sequence[float]) -> list[float]:
    rs = [float(x) for x in ratios]
    if len(rs) < 3:
        raise BadInput("scaling study needs at least 3 ratios")
    if any(not (0.0 < x <= SCALING_MAX_RATIO) for x in rs):
        raise BadInput(f"every ratio must lie in (0, {SCALING_MAX_RATIO}]")
    if math.log10(max(rs) / min(rs)) < 2.0 - 1e-12:
        raise BadInput("ratios must span at least two decades")
    return rs


def scaling_samples(
    ratios: Sequence[float],
    which: str = "two_level",
    *,
    Rc: float = 1.0,
    collective: CollectiveModel | None = None,
    n_samples: int = 101,
    m: int = 0,
    branch=1,
    nu0: float = 1.0,
    beta: float = 1.0,
) -> list[tuple[float, float]]:
    """``(ratio, spread)`` pairs; spread is ``dE_berry`` or the linear bound."""
    which = which.replace("-", "_")
    if which not in SCALING_KINDS:
        raise BadInput(f"which must be one of {SCALING_KINDS}, got {which!r}")
    rs = _check_ratios(ratios)
    collective = collective or CollectiveModel("linear", 1.0)
    out = []
    for x in rs:
        if which == "mead":
            out.append((x, mead_bound(nu0, x, beta).bound))
            continue
        config = PatchConfig(
            l=x * Rc, Rc=Rc, n_samples=n_samples, collective=collective, m=m, branch=branch
        )
        sweep = sweep_patch if which == "two_level" else sweep_patch_su3
        out.append((x, sweep(config).dE_berry))
    return out


def scaling_study(ratios: Sequence[float], which: str = "two_level", **kwargs) -> FitResult:
    """Log-log fit of the spread against ``l / Rc``; the slope is the exponent."""
    pairs = scaling_samples(ratios, which, **kwargs)
    return fit_loglog([p[0] for p in pairs], [p[1] for p in pairs])
