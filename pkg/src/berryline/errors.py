"""Exception hierarchy.

Input problems derive from :class:`BadInput` (a ``ValueError``); failures of a
numerical procedure on valid input derive from :class:`NumericalFailure`.
The CLI maps the first family to exit code 2 and the second to exit code 3.
"""

from __future__ import annotations


class BerrylineError(Exception):
    """Base class for every error raised by the package."""


class BadInput(BerrylineError, ValueError):
    """Arguments violate a documented precondition."""


class NotHermitian(BadInput):
    pass


class InvalidPanelCount(BadInput):
    pass


class NoBracket(BadInput):
    pass


class UnsupportedLoop(BadInput):
    pass


class DegeneratePoint(BadInput):
    """Berry phase requested at the level crossing Rc = r = 0."""


class NumericalFailure(BerrylineError, ArithmeticError):
    """A numerical procedure could not deliver its contract."""


class NoConvergence(NumericalFailure):
    pass


class GapCollapse(NumericalFailure):
    def __init__(self, t: float, gap: float, gap_tol: float):
        super().__init__(f"spectral gap {gap:.3e} < gap_tol {gap_tol:.3e} at t = {t:.17g}")
        self.t = t
        self.gap = gap
        self.gap_tol = gap_tol


class InsufficientResolution(NumericalFailure):
    def __init__(self, points: int, change: float, phase_tol: float):
        super().__init__(
            f"doubling K = {points} changed the phase by {change:.3e} > phase_tol {phase_tol:.3e}"
        )
        self.points = points
        self.change = change
        self.phase_tol = phase_tol


class FrameDegeneracy(NumericalFailure):
    pass


class PredictionUnderflow(NumericalFailure):
    pass
