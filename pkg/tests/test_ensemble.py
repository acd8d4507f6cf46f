from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from src.config import load_config
from src.ensemble import CnType, VnType, build, instantiate, smallest_valid_n
from src.errors import DegenerateEnsembleError, InvalidParameterError, ValidationError
from src.gf2core import make_explicit, make_hamming_7_4, make_repetition, make_spc

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="module")
def ens1():
    return load_config(CONFIGS / "ensemble1.json")


@pytest.fixture(scope="module")
def ens2():
    return load_config(CONFIGS / "ensemble2.json")


@pytest.fixture(scope="module")
def ldpc36():
    return build([VnType(make_repetition(3), 1.0)], [CnType(make_spc(6), 1.0)], name="(3,6)")


def test_ensemble1_parameters(ens1):
    assert ens1.rate == pytest.approx(0.5, abs=1e-4)
    assert ens1.C == pytest.approx(0.208674, rel=1e-5)
    assert ens1.V == pytest.approx(5.72177, rel=1e-5)
    assert ens1.cv_product == pytest.approx(1.19, abs=0.01)
    assert ens1.classification == "bad"


def test_ensemble2_literal_parameters(ens2):
    # published C*V is 0.5; the listed fractions do not reproduce it
    assert ens2.cv_product == pytest.approx(1.2284, abs=1e-3)
    assert ens2.rate == pytest.approx(0.50694, abs=1e-4)
    assert ens2.classification == "bad"


def test_regular_ldpc(ldpc36):
    assert ldpc36.int_lambda == pytest.approx(1 / 3)
    assert ldpc36.int_rho == pytest.approx(1 / 6)
    assert ldpc36.y == pytest.approx(1.0)
    assert ldpc36.rate == pytest.approx(0.5)
    assert ldpc36.V is None
    assert ldpc36.classification == "good"
    assert "VNs" in ldpc36.classification_reason
    assert ldpc36.rate_exact() == Fraction(1, 2)
    assert ldpc36.edges_per_vn == pytest.approx(3.0)
    assert ldpc36.beta_sup == pytest.approx(3.0)


def test_shares_sum_to_one(ens1, ens2):
    for ens in (ens1, ens2):
        assert ens.gamma.sum() == pytest.approx(1.0)
        assert ens.delta.sum() == pytest.approx(1.0)
        assert np.allclose(ens.lambdas_from_deltas(), [t.lam for t in ens.vn_types])


def test_lambda_poly(ens1):
    assert ens1.lambda_poly() == pytest.approx({1: 0.055646, 6: 0.944354})


def test_cv_matches_edge_polynomial_derivatives():
    ens = build(
        [VnType(make_repetition(2), 0.25), VnType(make_repetition(3), 0.75)],
        [CnType(make_spc(6), 0.5), CnType(make_spc(7), 0.5)],
    )
    lam, rho = ens.lambda_poly(), ens.rho_poly()
    assert rho == pytest.approx({5: 0.5, 6: 0.5})
    lambda_prime_0 = lam.get(1, 0.0)
    rho_prime_1 = sum(d * c for d, c in rho.items())
    assert ens.cv_product == pytest.approx(lambda_prime_0 * rho_prime_1, rel=1e-12)
    assert ens.cv_product == pytest.approx(1.375, rel=1e-12)


def test_z_lhs_sup(ldpc36, ens1):
    # SPC-6 contains the all-ones word, so the sup reaches 1/∫λ
    assert ldpc36.z_lhs_sup == pytest.approx(1 / ldpc36.int_lambda)
    assert ens1.z_lhs_sup < 1 / ens1.int_lambda
    assert ens1.beta_sup == pytest.approx(ens1.z_lhs_sup)


def test_fraction_deficit_is_reported():
    with pytest.raises(ValidationError, match="deficit"):
        build([VnType(make_repetition(3), 0.9)], [CnType(make_spc(6), 1.0)])


def test_fraction_range():
    with pytest.raises(ValidationError):
        build([VnType(make_repetition(3), 1.5), VnType(make_repetition(2), -0.5)], [CnType(make_spc(6), 1.0)])


def test_nonpositive_rate():
    with pytest.raises(DegenerateEnsembleError):
        build([VnType(make_repetition(2), 1.0)], [CnType(make_repetition(3), 1.0)])


def test_undetermined_with_distance_one_component():
    ens = build([VnType(make_repetition(2), 1.0)], [CnType(make_explicit(["1000", "0100", "0010", "0001"]), 1.0)])
    assert ens.classification == "undetermined"


def test_instantiate_regular(ldpc36):
    inst = instantiate(ldpc36, 60)
    assert inst.vn_counts == (60,)
    assert inst.cn_counts == (30,)
    assert (inst.E, inst.N, inst.M, inst.m) == (180, 60, 30, 30)
    assert inst.design_rate == Fraction(1, 2)


def test_instantiate_rejects_fractional_counts(ldpc36):
    assert smallest_valid_n(ldpc36) == 2
    with pytest.raises(InvalidParameterError) as err:
        instantiate(ldpc36, 3)
    assert err.value.smallest_n == 2


def test_instantiate_toy_graph():
    ens = build([VnType(make_repetition(2), 1.0)], [CnType(make_spc(4), 1.0)])
    inst = instantiate(ens, 4)
    assert inst.E == 8
    assert inst.cn_counts == (2,)


def test_instantiate_mixed_types(ens1):
    n0 = smallest_valid_n(ens1)
    inst = instantiate(ens1, n0)
    assert inst.E == sum(c * t.code.q for c, t in zip(inst.cn_counts, ens1.cn_types))
    assert sum(inst.vn_counts) == n0
    assert inst.design_rate == ens1.rate_exact()


def test_hamming_only_checks_have_no_C():
    ens = build([VnType(make_spc(7, "cyclic"), 1.0)], [CnType(make_hamming_7_4(), 1.0)])
    assert ens.C is None
    assert ens.classification == "good"
