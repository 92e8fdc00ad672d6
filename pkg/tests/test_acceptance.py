"""Acceptance suite: every criterion at its stated tolerance.

Run ``pytest tests/test_acceptance.py`` to get the per-criterion summary.
"""

import math

import numpy as np
import pytest

from berryline.berry import (
    ParameterLoop,
    analytic_su3_phase,
    analytic_two_level_phase,
    connection_integral_su3,
    wilson_loop_phase,
)
from berryline.broadening import PatchConfig, scaling_study, sweep_patch, sweep_patch_su3
from berryline.cli import main
from berryline.models import CollectiveModel, ThreeLevelModel, TwoLevelModel, three_level_hamiltonian
from berryline.numerics import eig_hermitian, integrate_closed, solve_scalar
from berryline.quantize import max_truncation_residual, spectrum

criterion = pytest.mark.criterion

K_FINE = 100_000
GRID = np.geomspace(0.1, 10.0, 10)
RATIOS = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2]


def closed_form_two_level(Rc, r, sign):
    return -sign * math.pi * (1 - Rc / math.hypot(Rc, r))


def closed_form_mus(theta):
    s, c = math.sin(theta), math.cos(theta)
    return (s / math.sqrt(3) + c, s / math.sqrt(3) - c, -2 * s / math.sqrt(3))


@criterion(1, "two-level Wilson loop matches the closed form, K=1e5")
@pytest.mark.parametrize("Rc", GRID)
def test_two_level_phase_oracle(Rc):
    worst, worst_anti = 0.0, 0.0
    for r in GRID:
        loop = ParameterLoop.two_level(TwoLevelModel(float(Rc), float(r)), points=K_FINE)
        plus = wilson_loop_phase(loop, "plus").numerical
        minus = wilson_loop_phase(loop, "minus").numerical
        worst = max(worst, abs(plus - closed_form_two_level(Rc, r, 1)), abs(minus - closed_form_two_level(Rc, r, -1)))
        worst_anti = max(worst_anti, abs(plus + minus))
    assert worst <= 1e-8
    assert worst_anti <= 1e-10


def su3_draws():
    rng = np.random.default_rng(0)
    windings = [-2, -1, 0, 1, 2]
    out = []
    for _ in range(20):
        theta = rng.uniform(0.0, math.pi / 2)
        phi, chi1, chi2 = rng.uniform(0.0, 2 * math.pi, size=3)
        n1, n2 = rng.choice(windings, size=2)
        out.append((float(theta), float(phi), float(chi1), float(chi2), int(n1), int(n2)))
    return out


@criterion(2, "SU(3) analytic, connection integral and Wilson loop agree")
@pytest.mark.parametrize("draw", su3_draws(), ids=lambda d: f"n{d[4]}_{d[5]}_th{d[0]:.3f}")
def test_su3_triple_agreement(draw):
    theta, phi, chi1, chi2, n1, n2 = draw
    loop = ParameterLoop.su3(ThreeLevelModel(theta, phi, chi1, chi2), n1, n2, points=K_FINE)
    a = analytic_su3_phase(loop)
    b = connection_integral_su3(loop, n=4096)
    c = wilson_loop_phase(loop).unwrapped
    assert abs(a - b) <= 1e-8
    assert abs(a - c) <= 1e-8
    assert abs(b - c) <= 1e-8


@criterion(3, "three-level eigenvalues match the closed-form spectrum")
def test_spectrum_reconstruction():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        m = ThreeLevelModel(rng.uniform(0, math.pi / 2), *rng.uniform(-math.pi, math.pi, size=3))
        vals = eig_hermitian(three_level_hamiltonian(m)).values
        worst = max(worst, float(np.max(np.abs(vals - sorted(closed_form_mus(m.theta))))))
    assert worst <= 1e-12


@criterion(4, "two-level broadening coefficient 1/16")
def test_two_level_coefficient():
    rep = sweep_patch(PatchConfig(l=1e-3, Rc=1.0))
    assert rep.coefficient == pytest.approx(0.0625, rel=1e-3)


@criterion(5, "SU(3) broadening coefficient 1/4")
def test_su3_coefficient():
    rep = sweep_patch_su3(PatchConfig(l=1e-3, Rc=1.0))
    assert rep.coefficient == pytest.approx(0.25, rel=1e-3)


@criterion(6, "quadratic scaling for both models, linear Mead bound")
def test_scaling_law():
    for which in ("two_level", "su3"):
        slope = scaling_study(RATIOS, which).slope
        assert 1.99 <= slope <= 2.01, which
    assert abs(scaling_study(RATIOS, "mead").slope - 1.0) <= 1e-12


@criterion(7, "first-order spectrum exact for linear H0, O(hbar^2) for quadratic")
def test_quantization_structure():
    internal = TwoLevelModel(1.0, 1.0)
    for omega, hbar in ((1.0, 1.0), (2.5, 0.3)):
        for lv in spectrum(CollectiveModel("linear", omega, hbar), internal, range(-5, 6)):
            assert abs(lv.energy_exact - lv.energy_first_order) <= 1e-14

    res = [
        max_truncation_residual(spectrum(CollectiveModel("quadratic", 1.0, hbar), internal, range(-5, 6)))
        for hbar in (0.1, 0.05)
    ]
    assert 3.6 <= res[0] / res[1] <= 4.4


def random_gauge(rng):
    def rephase(states):
        return states * np.exp(1j * rng.uniform(-np.pi, np.pi, size=(len(states), 1)))

    return rephase


@criterion(8, "per-point rephasing leaves the Wilson loop unchanged")
@pytest.mark.parametrize(
    "loop, branch",
    [
        (ParameterLoop.two_level(TwoLevelModel(1.0, 1.0), points=4096), "plus"),
        (ParameterLoop.su3(ThreeLevelModel(math.pi / 3, math.pi / 4), 1, 1, points=16384), 0),
    ],
    ids=["two_level", "su3"],
)
def test_gauge_invariance(loop, branch):
    rng = np.random.default_rng(8)
    base = wilson_loop_phase(loop, branch, phase_tol=None).numerical
    for _ in range(100):
        gauged = wilson_loop_phase(loop, branch, phase_tol=None, gauge=random_gauge(rng)).numerical
        assert abs(gauged - base) < 1e-12


@criterion(9, "eigensolver, root finder and quadrature floor")
def test_numerics_floor():
    rng = np.random.default_rng(9)
    for n in (2, 3):
        for _ in range(1000):
            A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            H = (A + A.conj().T) / 2
            es = eig_hermitian(H)
            V = es.vectors
            assert np.max(np.abs(H @ V - V * es.values)) <= 1e-12
            assert np.max(np.abs(V.conj().T @ V - np.eye(n))) <= 1e-12

    assert solve_scalar(lambda x: x * x, 4.0, (0.0, 10.0)) == pytest.approx(2.0, abs=1e-12)
    assert solve_scalar(lambda x: x, -3.0, (-10.0, 0.0)) == pytest.approx(-3.0, abs=1e-12)
    assert abs(solve_scalar(lambda x: x**3 + x, 10.0, (0.0, 3.0)) - 2.0) <= 1e-12

    assert abs(integrate_closed(lambda t: np.sin(2 * np.pi * t), 64)) <= 1e-12
    assert integrate_closed(lambda t: np.ones_like(t), 8) == 1.0
    assert abs(integrate_closed(lambda t: np.cos(2 * np.pi * t) ** 2, 256) - 0.5) <= 1e-12


CLI_CASES = {
    "berry": ["two-level", "--Rc", "1", "--r", "1", "--points", "4096"],
    "spectrum": ["--Rc", "1", "--r", "1", "--h0", "quadratic", "--hbar", "0.1"],
    "broaden": ["--l", "1e-3", "--Rc", "1"],
    "scaling": ["--which", "su3", "--ratios", "1e-4,1e-3,1e-2"],
    "mead-compare": ["--nu0", "2", "--ratio", "1e-3"],
}


@criterion(10, "CLI output is byte-identical and echoed inputs round-trip")
@pytest.mark.parametrize("command", sorted(CLI_CASES))
def test_cli_determinism(command, tmp_path):
    first, again, echoed = (tmp_path / f"{name}.json" for name in ("first", "again", "echoed"))
    common = ["--format", "json", "--quiet", "--out"]
    assert main([command, *CLI_CASES[command], *common, str(first)]) == 0
    assert main([command, *CLI_CASES[command], *common, str(again)]) == 0
    assert first.read_bytes() == again.read_bytes()
    assert main([command, "--config", str(first), *common, str(echoed)]) == 0
    assert first.read_bytes() == echoed.read_bytes()
