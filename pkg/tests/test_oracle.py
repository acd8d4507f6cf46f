from fractions import Fraction
from math import log, pi
from pathlib import Path

import pytest

from src.config import load_config
from src.ensemble import CnType, VnType, build, instantiate
from src.errors import DomainError, ResourceLimitError, StructuralZeroError
from src.gf2core import make_explicit, make_repetition, make_spc
from src.oracle import (
    FiniteSpectrum, brute_force_spectrum, check_valid_counts, exact_expected_spectrum, io_saddle,
    lemma1_gap, lemma2_gap, maximize_S, support_line, theta_range,
)
from src.saddle import solve_at
from src.wefalgebra import ExactPoly, io_moments, poly_pow_coeff

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="module")
def ldpc36():
    return build([VnType(make_repetition(3), 1.0)], [CnType(make_spc(6), 1.0)], name="(3,6)")


@pytest.fixture(scope="module")
def toy():
    return build([VnType(make_repetition(2), 1.0)], [CnType(make_spc(4), 1.0)], name="toy")


# ── single-code coefficient limits ─────────────────────────────────────────

def test_lemma1_repetition_gap_follows_stirling():
    res = lemma1_gap(make_repetition(2).wef, 1.0, 100)
    assert res.limit == pytest.approx(log(2))
    assert res.saddle[0] == pytest.approx(1.0)
    assert res.gap == pytest.approx(-log(pi * 50) / 200, abs=5e-3)


def test_lemma1_unreachable_weight():
    with pytest.raises(StructuralZeroError):
        lemma1_gap(make_repetition(2).wef, 1.0, 101)


def test_lemma1_gap_shrinks():
    wef = make_repetition(2).wef
    gaps = [abs(lemma1_gap(wef, 1.0, ell).gap) for ell in (100, 200, 400, 800)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_lemma1_spc7():
    res = lemma1_gap(make_spc(7).wef, 2.0, 500)
    assert abs(res.gap) < 0.02


def test_lemma1_non_integer_target():
    with pytest.raises(DomainError):
        lemma1_gap(make_spc(7).wef, 2.5, 333)


def test_lemma2_collinear_support_is_reduced():
    iowef = make_repetition(2).iowef
    assert support_line(iowef) == (1, 2)
    res = lemma2_gap(iowef, 0.5, 1.0, 100)
    assert res.reduced
    assert res.limit == pytest.approx(log(2))


def test_lemma2_off_line_target():
    with pytest.raises(StructuralZeroError):
        lemma2_gap(make_repetition(3).iowef, 0.5, 1.0, 100)


def test_lemma2_full_rank_saddle():
    iowef = make_spc(7, "cyclic").iowef
    assert support_line(iowef) is None
    res = lemma2_gap(iowef, 0.5, 0.75, 200)
    assert not res.reduced
    eu, ev, *_ = io_moments(iowef, log(res.saddle[0]), log(res.saddle[1]))
    assert (eu, ev) == pytest.approx((0.5, 0.75), abs=1e-9)


def test_lemma2_hull_edge_target():
    # output weight is at most twice the input weight, so theta = 2 xi is an edge of the hull
    res = lemma2_gap(make_spc(7, "cyclic").iowef, 1 / 7, 2 / 7, 700)
    assert res.reduced
    assert abs(res.gap) < 0.03


@pytest.mark.slow
def test_lemma2_hull_edge_gap_shrinks():
    iowef = make_spc(7, "cyclic").iowef
    gaps = [abs(lemma2_gap(iowef, 1 / 7, 2 / 7, ell).gap) for ell in (175, 350, 700)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


@pytest.mark.slow
def test_lemma2_gap_shrinks_full_rank():
    iowef = make_spc(7, "cyclic").iowef
    gaps = [abs(lemma2_gap(iowef, 0.5, 0.75, ell).gap) for ell in (200, 400, 800)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.02


def test_theta_range_and_interior_check():
    iowef = make_spc(7, "cyclic").iowef
    lo, hi = theta_range(iowef, 1.0)
    assert lo == pytest.approx(1 / 3)
    assert hi == pytest.approx(2.0)
    with pytest.raises(DomainError):
        io_saddle(iowef, 1.0, 2.5)


# ── finite-n spectra ───────────────────────────────────────────────────────

@pytest.mark.parametrize("n", [2, 4])
def test_exact_matches_brute_force(toy, n):
    inst = instantiate(toy, n)
    exact = exact_expected_spectrum(inst)
    brute = brute_force_spectrum(inst)
    assert exact.values == brute.values
    assert exact[0] == 1


@pytest.mark.slow
def test_exact_matches_brute_force_two_input_bits():
    ens = build([VnType(make_spc(3, "cyclic"), 1.0)], [CnType(make_spc(3), 1.0)], name="spc3")
    inst = instantiate(ens, 3)
    assert (inst.E, inst.N) == (9, 6)
    exact = exact_expected_spectrum(inst)
    assert exact.values == brute_force_spectrum(inst).values
    assert exact.values == (1, Fraction(3, 2), Fraction(93, 28), Fraction(36, 7),
                            Fraction(9, 2), Fraction(27, 14), Fraction(9, 28))


def test_identity_checks_accept_everything():
    ens = build([VnType(make_repetition(2), 1.0)], [CnType(make_explicit(["10", "01"]), 1.0)])
    inst = instantiate(ens, 2)
    assert brute_force_spectrum(inst).values == (1, 2, 1)
    assert exact_expected_spectrum(inst).values == (1, 2, 1)


def test_check_valid_counts_are_polynomial_powers(ldpc36):
    inst = instantiate(ldpc36, 60)
    counts = check_valid_counts(inst)
    spc6 = ExactPoly.from_wef(make_spc(6).wef)
    for v in (0, 2, 10, 57, 90, 180):
        assert counts[v] == poly_pow_coeff(spc6, 30, v)


def test_spectrum_growth_estimate():
    spec = FiniteSpectrum(n=2, values=(Fraction(1), Fraction(0), Fraction(9, 4)))
    assert spec.growth_estimate(1) == float("-inf")
    assert spec.growth_estimate(2) == pytest.approx(log(9 / 4) / 2)


def test_resource_guards(ldpc36):
    with pytest.raises(ResourceLimitError):
        brute_force_spectrum(instantiate(ldpc36, 60))
    ens2 = load_config(CONFIGS / "ensemble2.json")
    with pytest.raises(ResourceLimitError):
        maximize_S(ens2, 0.05)


# ── pre-Lagrange maximisation ──────────────────────────────────────────────

def test_max_s_regular_equals_growth(ldpc36):
    value, appt = maximize_S(ldpc36, 0.3)
    assert value == pytest.approx(solve_at(ldpc36, 0.3).g_value, abs=1e-6)
    assert appt.beta == pytest.approx(0.9)
    assert appt.alpha_t == pytest.approx((0.3,))


def test_max_s_alpha_domain(ldpc36):
    with pytest.raises(DomainError):
        maximize_S(ldpc36, 1.5)


@pytest.mark.slow
def test_max_s_ensemble1():
    ens1 = load_config(CONFIGS / "ensemble1.json")
    point = solve_at(ens1, 0.05)
    value, appt = maximize_S(ens1, 0.05)
    assert value == pytest.approx(point.g_value, abs=1e-4)
    assert appt.x0_t[1] == pytest.approx(point.x0, rel=0.05)
    assert sum(appt.alpha_t) == pytest.approx(0.05)


@pytest.mark.slow
def test_max_s_coarse_grid_is_lower_bound():
    ens1 = load_config(CONFIGS / "ensemble1.json")
    value, _ = maximize_S(ens1, 0.05, grid_resolution=5, refinements=0)
    assert value <= solve_at(ens1, 0.05).g_value + 1e-9
