"""End-to-end checks against the published Ensemble 1/2 figures and the exact oracles."""
from math import log, pi
from pathlib import Path

import numpy as np
import pytest

from src.config import load_config
from src.ensemble import CnType, VnType, build, instantiate
from src.gf2core import make_repetition, make_spc
from src.oracle import exact_expected_spectrum, lemma1_gap, lemma2_gap, maximize_S
from src.saddle import alpha_star, growth_rate, growth_rate_bits, solve_at, sweep
from ui.components import cv_discrepancy, display_alpha_star

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="module")
def ens1():
    return load_config(CONFIGS / "ensemble1.json")


@pytest.fixture(scope="module")
def ens2():
    return load_config(CONFIGS / "ensemble2.json")


@pytest.fixture(scope="module")
def ldpc36():
    return load_config(CONFIGS / "ldpc_3_6.json")


def test_ensemble1_rate_and_cv(ens1):
    assert ens1.rate == pytest.approx(0.5, abs=1e-4)
    assert ens1.cv_product == pytest.approx(1.19, abs=0.01)


@pytest.mark.slow
def test_ensemble1_is_bad_behaviourally(ens1):
    assert ens1.classification == "bad"
    curve = sweep(ens1, np.geomspace(1e-4, 1e-2, 20))
    assert curve.all_converged
    assert np.all(curve.values > -1e-9)


def test_ensemble2_discrepancy_is_reported(ens2):
    note = cv_discrepancy(ens2)
    assert note is not None
    assert "0.5" in note
    report = display_alpha_star(alpha_star(ens2), ens2, "json")
    assert '"published": 0.002625' in report
    assert '"matches_published": false' in report


@pytest.mark.slow
@pytest.mark.parametrize("name", ["ensemble1", "ensemble2"])
def test_hundred_point_sweeps(name):
    ens = load_config(CONFIGS / f"{name}.json")
    curve = sweep(ens)
    assert len(curve.points) == 100
    assert curve.all_converged
    assert max(p.residual_max for p in curve.points) < 1e-10
    assert curve.seconds < 10
    for p in curve.points:
        assert p.g_value == pytest.approx(p.g_pre, abs=1e-9)


def test_lemma1_reference_values():
    wef = make_repetition(2).wef
    assert lemma1_gap(wef, 1.0, 100).gap == pytest.approx(-log(pi * 50) / 200, abs=0.005)
    gaps = [abs(lemma1_gap(wef, 1.0, ell).gap) for ell in (100, 200, 400, 800)]
    assert gaps == sorted(gaps, reverse=True)


@pytest.mark.slow
def test_lemma2_reference_values():
    iowef = make_spc(7, "cyclic").iowef
    gaps = [abs(lemma2_gap(iowef, 1 / 7, 2 / 7, ell).gap) for ell in (175, 350, 700)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.03


@pytest.mark.slow
def test_finite_n_spectrum_converges_to_growth_rate(ldpc36):
    g = growth_rate(ldpc36, 0.3)
    gaps = []
    for n in (60, 120, 240):
        spectrum = exact_expected_spectrum(instantiate(ldpc36, n))
        gaps.append(abs(spectrum.growth_estimate(round(0.3 * n)) - g))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.05


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0.02, 0.05, 0.1])
def test_max_s_matches_growth_rate_ensemble1(ens1, alpha):
    value, _ = maximize_S(ens1, alpha)
    assert value == pytest.approx(growth_rate(ens1, alpha), abs=1e-4)


@pytest.mark.parametrize("alpha", [0.01, 0.05, 0.2, 0.4, 0.7])
def test_max_s_single_type_collapse(ldpc36, alpha):
    value, _ = maximize_S(ldpc36, alpha)
    assert value == pytest.approx(growth_rate(ldpc36, alpha), abs=1e-6)


@pytest.mark.parametrize("gamma", np.linspace(0.05, 0.95, 10))
def test_bits_identity(ldpc36, gamma):
    assert growth_rate_bits(ldpc36, gamma) * ldpc36.y == pytest.approx(
        solve_at(ldpc36, gamma * ldpc36.y).g_value, abs=1e-12)


def test_equal_types_collapse(ldpc36):
    split = build(
        [VnType(make_repetition(3), 0.25), VnType(make_repetition(3), 0.75)],
        [CnType(make_spc(6), 0.4), CnType(make_spc(6), 0.6)],
    )
    for alpha in (0.03, 0.3, 0.6):
        assert growth_rate(split, alpha) == pytest.approx(growth_rate(ldpc36, alpha), abs=1e-10)
