from math import comb, log

import numpy as np
import pytest

from src.errors import DomainError, InvalidParameterError, ResourceLimitError
from src.gf2core import make_hamming_7_4, make_repetition, make_spc
from src.wefalgebra import (
    ExactPoly, binary_entropy, dlog_A, dlog_B_x, dlog_B_y, io_means, io_moments, log_A, log_B,
    poly_pow_coeff, poly_pow_coeff_bivar, power_table_1d, power_table_2d, weight_moments,
)


def test_exact_poly_str():
    assert str(ExactPoly.from_iowef(make_repetition(2).iowef)) == "1 + x y^2"
    assert str(ExactPoly(1, {0: 1, 3: 7})) == "1 + 7 x^3"


def test_exact_poly_rejects_bad_exponents():
    with pytest.raises(InvalidParameterError):
        ExactPoly(2, {3: 1})


def test_central_binomial():
    assert poly_pow_coeff({0: 1, 2: 1}, 100, 100) == comb(100, 50)


def test_target_beyond_degree_is_zero():
    assert poly_pow_coeff({0: 1, 2: 1}, 10, 21) == 0
    assert poly_pow_coeff_bivar(make_repetition(2).iowef.to_poly(), 10, 11, 0) == 0


def test_odd_target_is_structural_zero():
    assert poly_pow_coeff({0: 1, 2: 1}, 101, 101) == 0


@pytest.mark.parametrize("ell,w", [(5, 12), (50, 100), (37, 111)])
def test_univariate_methods_agree(ell, w):
    p = ExactPoly.from_wef(make_spc(7).wef)
    assert poly_pow_coeff(p, ell, w, "squaring") == poly_pow_coeff(p, ell, w, "recurrence")


@pytest.mark.parametrize("ell,wx,wy", [(4, 3, 8), (30, 5, 10), (21, 12, 40)])
def test_bivariate_methods_agree(ell, wx, wy):
    p = ExactPoly.from_iowef(make_spc(7, "cyclic").iowef)
    assert poly_pow_coeff_bivar(p, ell, wx, wy, "squaring") == poly_pow_coeff_bivar(p, ell, wx, wy, "recurrence")


def test_bivariate_rep2_central_binomial():
    assert poly_pow_coeff_bivar(make_repetition(2).iowef.to_poly(), 40, 20, 40) == comb(40, 20)


def test_power_tables_sum_to_codebook_size():
    p = ExactPoly.from_wef(make_hamming_7_4().wef)
    assert sum(power_table_1d(p, 3, 21)) == 16 ** 3
    b = ExactPoly.from_iowef(make_spc(4).iowef)
    table = power_table_2d(b, 3, 9, 12)
    assert sum(int(c) for c in table.ravel()) == 8 ** 3


def test_degree_guard():
    with pytest.raises(ResourceLimitError):
        poly_pow_coeff(ExactPoly.from_wef(make_spc(7).wef), 10_000, 5)


def test_unknown_method():
    with pytest.raises(InvalidParameterError):
        poly_pow_coeff({0: 1, 2: 1}, 3, 2, method="fft")


# ── log-domain evaluation ──────────────────────────────────────────────────

def test_log_A_at_one_is_log_codebook_size():
    wef = make_spc(7).wef
    assert log_A(wef, 1.0) == pytest.approx(log(64), abs=1e-12)
    assert dlog_A(wef, 1.0) == pytest.approx(3.5, abs=1e-12)


def test_log_A_large_argument_does_not_overflow():
    wef = make_hamming_7_4().wef
    assert log_A(wef, 1e200) == pytest.approx(7 * log(1e200), rel=1e-12)


def test_weight_moments_variance():
    mean, var = weight_moments(make_repetition(2).wef, 0.0)
    assert mean == pytest.approx(1.0)
    assert var == pytest.approx(1.0)


def test_domain_errors():
    with pytest.raises(DomainError):
        log_A(make_spc(7).wef, 0.0)
    with pytest.raises(DomainError):
        log_B(make_repetition(2).iowef, -1.0, 1.0)
    with pytest.raises(DomainError):
        binary_entropy(1.5)


def test_io_moments_repetition():
    eu, ev, vu, cuv, vv = io_moments(make_repetition(2).iowef, 0.0, 0.0)
    assert (eu, ev) == pytest.approx((0.5, 1.0))
    assert (vu, cuv, vv) == pytest.approx((0.25, 0.5, 1.0))


def test_log_derivatives_match_finite_differences():
    iowef = make_spc(7, "cyclic").iowef
    x, y, h = 0.7, 1.3, 1e-6
    num_x = (log_B(iowef, x * np.exp(h), y) - log_B(iowef, x * np.exp(-h), y)) / (2 * h)
    num_y = (log_B(iowef, x, y * np.exp(h)) - log_B(iowef, x, y * np.exp(-h))) / (2 * h)
    assert dlog_B_x(iowef, x, y) == pytest.approx(num_x, rel=1e-6)
    assert dlog_B_y(iowef, x, y) == pytest.approx(num_y, rel=1e-6)


def test_binary_entropy():
    assert binary_entropy(0.5) == pytest.approx(log(2))
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0


SAMPLE_Z = np.geomspace(1e-3, 1e3, 200)


@pytest.mark.parametrize("code", [make_hamming_7_4(), make_spc(7), make_repetition(3)], ids=lambda c: c.describe())
def test_weight_mean_increases_within_support(code):
    wef = code.wef
    means = np.array([dlog_A(wef, z) for z in SAMPLE_Z])
    assert np.all(np.diff(means) > 0)
    assert np.all(means > 0)
    assert np.all(means < wef.degree)


@pytest.mark.parametrize("code", [make_hamming_7_4(), make_spc(7)], ids=lambda c: c.describe())
def test_log_domain_matches_direct_sums(code):
    coeffs = np.array(code.wef.coeffs, dtype=float)
    weights = np.arange(len(coeffs))
    for z in SAMPLE_Z:
        terms = coeffs * z ** weights
        assert log_A(code.wef, z) == pytest.approx(log(terms.sum()), rel=1e-12, abs=1e-12)
        assert dlog_A(code.wef, z) == pytest.approx((weights * terms).sum() / terms.sum(), rel=1e-12, abs=1e-15)


def test_log_B_matches_direct_sum():
    iowef = make_spc(7, "cyclic").iowef
    table = np.array(iowef.coeffs, dtype=float)
    us = np.arange(table.shape[0])[:, None]
    vs = np.arange(table.shape[1])[None, :]
    for x in SAMPLE_Z[::20]:
        for y in SAMPLE_Z[::20]:
            terms = table * x ** us * y ** vs
            assert log_B(iowef, x, y) == pytest.approx(log(terms.sum()), rel=1e-12, abs=1e-12)


def test_saturated_mean_stays_at_degree():
    wef = make_hamming_7_4().wef
    for z in (7e4, 1e5, 1e8):
        assert dlog_A(wef, z) <= 7.0
    assert weight_moments(wef, 200.0)[0] == 7.0


def test_io_means_match_pointwise_moments():
    iowef = make_spc(7, "cyclic").iowef
    log_xs = np.linspace(-5.0, 5.0, 11)
    eu, ev = io_means(iowef, log_xs, 0.3)
    for lx, a, b in zip(log_xs, eu, ev):
        m = io_moments(iowef, lx, 0.3)
        assert (a, b) == pytest.approx(m[:2], rel=1e-12)
