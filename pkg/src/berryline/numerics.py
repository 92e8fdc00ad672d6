"""Small-matrix linear algebra, closed-loop quadrature, scalar root finding and
log-log line fitting.

Everything here is a pure function of its inputs. Tolerances are relative with
a ``+1`` absolute floor, e.g. ``tol * (1 + |x|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BadInput, InvalidPanelCount, NoBracket, NoConvergence, NotHermitian

HERMITIAN_RTOL = 1e-14
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs of a Hermitian matrix.

    ``values`` ascend; ``vectors[:, k]`` is the unit eigenvector for
    ``values[k]`` with its largest-modulus component real and positive.
    """

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    rms_residual: float
    n_points: int


def _as_small_matrix(H) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] not in (2, 3):
        raise BadInput(f"expected a 2x2 or 3x3 matrix, got shape {H.shape}")
    return H


def hermiticity_defect(H) -> float:
    """``max |H[i, j] - conj(H[j, i])|``."""
    H = np.asarray(H, dtype=complex)
    return float(np.max(np.abs(H - H.conj().swapaxes(-1, -2))))


def is_hermitian(H) -> bool:
    H = np.asarray(H, dtype=complex)
    return hermiticity_defect(H) <= HERMITIAN_RTOL * (1.0 + float(np.max(np.abs(H))))


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-modulus entry is real and positive.

    Accepts a single ``(N, M)`` array of column vectors or a stack
    ``(..., N, M)``. Near-ties (within a relative 1e-12) go to the lowest
    index. The pivot entry is set to its exact modulus, which makes the
    convention idempotent.
    """
    V = np.array(vectors, dtype=complex, copy=True)
    mod = np.abs(V)
    top = mod.max(axis=-2, keepdims=True)
    # first index whose modulus is within the tie tolerance of the maximum
    pivot = np.argmax(mod >= top * (1.0 - _TIE_RTOL), axis=-2)[..., None, :]
    c = np.take_along_axis(V, pivot, axis=-2)
    cmod = np.abs(c)
    # columns already in convention are left bit-for-bit untouched
    rotate = (cmod > 0) & ((c.imag != 0) | (c.real < 0))
    safe = np.where(cmod > 0, cmod, 1.0)
    V = np.where(rotate, V * (c.conj() / safe), V)
    np.put_along_axis(V, pivot, cmod.astype(complex), axis=-2)
    return V


def eig_hermitian(H) -> EigenSystem:
    """Diagonalize a 2x2 or 3x3 Hermitian matrix.

    Raises:
        NotHermitian: if ``max|H - H^dagger| > 1e-14 (1 + max|H|)``.
    """
    H = _as_small_matrix(H)
    if not is_hermitian(H):
        raise NotHermitian(
            f"Hermiticity defect {hermiticity_defect(H):.3e} exceeds tolerance"
        )
    values, vectors = np.linalg.eigh(H)
    return EigenSystem(values=values, vectors=fix_phases(vectors))


def eig_hermitian_batch(Hs: np.ndarray, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`eig_hermitian` over a ``(K, N, N)`` stack.

    Returns ``(values, vectors)`` with shapes ``(K, N)`` and ``(K, N, N)``.
    ``check=False`` skips the Hermiticity test for stacks that are Hermitian
    by construction.
    """
    Hs = np.asarray(Hs, dtype=complex)
    if Hs.ndim != 3 or Hs.shape[1] != Hs.shape[2] or Hs.shape[1] not in (2, 3):
        raise BadInput(f"expected a stack of 2x2 or 3x3 matrices, got shape {Hs.shape}")
    if check:
        defect = np.max(np.abs(Hs - Hs.conj().swapaxes(-1, -2)), axis=(1, 2))
        scale = np.max(np.abs(Hs), axis=(1, 2))
        bad = np.flatnonzero(defect > HERMITIAN_RTOL * (1.0 + scale))
        if bad.size:
            raise NotHermitian(f"matrix {int(bad[0])} of the stack is not Hermitian")
    if Hs.shape[1] == 2:
        values, vectors = _eigh_2x2(Hs)
    else:
        values, vectors = np.linalg.eigh(Hs)
    return values, fix_phases(vectors)


def _eigh_2x2(Hs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigenpairs of a stack of 2x2 Hermitian matrices.

    With ``H = m I + [[z, b], [b*, -z]]`` the upper vector is
    ``(cos(t/2), e^{-i arg b} sin(t/2))`` for ``t = atan2(2|b|, 2z)``.
    """
    a = Hs[:, 0, 0].real
    d = Hs[:, 1, 1].real
    b = Hs[:, 0, 1]
    mean = 0.5 * (a + d)
    z = 0.5 * (a - d)
    bmod = np.abs(b)
    radius = np.hypot(z, bmod)
    half = 0.5 * np.arctan2(bmod, z)
    c, s = np.cos(half), np.sin(half)
    ph = np.exp(1j * np.angle(b))
    vectors = np.empty_like(Hs)
    vectors[:, 0, 1] = c
    vectors[:, 1, 1] = ph.conj() * s
    vectors[:, 0, 0] = -ph * s
    vectors[:, 1, 0] = c
    values = np.stack([mean - radius, mean + radius], axis=1)
    return values, vectors


def integrate_closed(f: Callable, n: int) -> float:
    """Composite midpoint rule for ``∮ f(t) dt`` over one period ``[0, 1]``.

    ``f`` is called once with the array of panel midpoints and may return an
    array or a scalar (broadcast). For a periodic integrand the midpoint rule
    is exact on trigonometric polynomials of degree below ``n``.
    """
    if int(n) != n or n < 8:
        raise InvalidPanelCount(f"panel count must be an integer >= 8, got {n}")
    n = int(n)
    t = (np.arange(n) + 0.5) / n
    vals = np.broadcast_to(np.asarray(f(t), dtype=float), t.shape)
    return math.fsum(vals.tolist()) / n


def solve_scalar(
    g: Callable[[float], float],
    target: float,
    bracket: Sequence[float],
    rtol: float = 1e-12,
    maxiter: int = 200,
) -> float:
    """Solve ``g(x) = target`` for monotone continuous ``g`` on a bracket.

    Secant steps are taken when they land strictly inside the current
    bracket and the bracket keeps shrinking; otherwise the step is a
    bisection. Stops once ``|g(x) - target| <= rtol (1 + |target|)``.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise NoBracket(f"bracket [{lo}, {hi}] is empty")
    tol = rtol * (1.0 + abs(target))
    flo = g(lo) - target
    fhi = g(hi) - target
    if abs(flo) <= tol:
        return lo
    if abs(fhi) <= tol:
        return hi
    if flo * fhi > 0:
        raise NoBracket(
            f"g({lo}) - target = {flo:.3e} and g({hi}) - target = {fhi:.3e} do not straddle 0"
        )

    width = hi - lo
    for _ in range(maxiter):
        x = hi - fhi * (hi - lo) / (fhi - flo)
        mid = 0.5 * (lo + hi)
        if not lo < x < hi or (hi - lo) > 0.5 * width:
            x = mid
        width = hi - lo
        if not lo < x < hi:
            # bracket collapsed to adjacent floats
            break
        fx = g(x) - target
        if abs(fx) <= tol:
            return x
        if (fx < 0) == (flo < 0):
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
    raise NoConvergence(f"no root within tolerance after {maxiter} iterations")


def fit_loglog(xs, ys) -> FitResult:
    """Least-squares line through ``(ln x, ln y)``; the slope is the power-law
    exponent."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise BadInput("xs and ys must be 1-D arrays of equal length")
    if x.size < 2:
        raise BadInput("need at least two points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise BadInput("non-finite entries")
    if np.any(x <= 0) or np.any(y <= 0):
        raise BadInput("all entries must be positive")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise BadInput("xs must not all be equal")
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        n_points=int(x.size),
    )
