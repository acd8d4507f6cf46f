from math import comb

import pytest

from src.errors import InvalidParameterError
from src.gf2core import (
    BinaryLinearCode, SPC_FORMS, enumerate_iowef, enumerate_wef, gf2_rank, make_explicit,
    make_hamming_7_4, make_repetition, make_spc, row_from_bits, row_to_string,
)


def test_row_packing_is_column_ordered():
    assert row_from_bits([1, 1, 0]) == 0b011
    assert row_to_string(0b011, 3) == "110"
    assert gf2_rank([0b011, 0b110, 0b101]) == 2


# ── repetition ─────────────────────────────────────────────────────────────

def test_repetition_2_iowef_is_one_plus_x_y2():
    code = make_repetition(2)
    assert code.k == 1 and code.q == 2
    assert code.iowef.to_poly() == {(0, 0): 1, (1, 2): 1}
    assert code.iowef.weight2_total == 1


def test_repetition_3_wef():
    assert make_repetition(3).wef.coeffs == (1, 0, 0, 1)


def test_repetition_rejects_short_length():
    with pytest.raises(InvalidParameterError):
        make_repetition(1)


# ── SPC forms ──────────────────────────────────────────────────────────────

@pytest.mark.parametrize("form", SPC_FORMS)
def test_spc7_wef_same_for_every_form(form):
    coeffs = make_spc(7, form).wef.coeffs
    assert [coeffs[u] for u in (0, 2, 4, 6)] == [1, 21, 35, 7]
    assert all(coeffs[u] == 0 for u in (1, 3, 5, 7))


def test_spc7_cyclic_weight2_by_input_weight():
    iowef = make_spc(7, "cyclic").iowef
    assert [iowef[u, 2] for u in range(1, 7)] == [6, 5, 4, 3, 2, 1]


def test_spc7_antisystematic_weight1_inputs_give_weight6():
    iowef = make_spc(7, "antisystematic").iowef
    assert iowef[1, 2] == 0
    assert iowef[1, 6] == 6


def test_spc7_systematic_weight2_entries():
    iowef = make_spc(7, "systematic").iowef
    assert iowef[1, 2] == 6
    assert iowef[2, 2] == 15


def test_spc_forms_have_different_iowefs():
    cyc = make_spc(7, "cyclic").iowef
    anti = make_spc(7, "antisystematic").iowef
    sys_ = make_spc(7, "systematic").iowef
    assert cyc.coeffs[1] != anti.coeffs[1]
    assert cyc.coeffs != sys_.coeffs
    assert anti.coeffs != sys_.coeffs


def test_antisystematic_needs_odd_length():
    with pytest.raises(InvalidParameterError):
        make_spc(8, "antisystematic")


def test_unknown_spc_form():
    with pytest.raises(InvalidParameterError):
        make_spc(7, "bogus")


# ── Hamming and explicit ───────────────────────────────────────────────────

def test_hamming_7_4():
    code = make_hamming_7_4()
    assert code.wef.coeffs == (1, 0, 0, 7, 7, 0, 0, 1)
    assert code.min_distance == 3
    assert code.wef.total() == 16


def test_explicit_rows_match_named_constructions():
    assert make_explicit(["11"]).wef == make_repetition(2).wef
    assert make_explicit(["110", "011"]).rows == make_spc(3, "cyclic").rows
    identity = make_explicit(["10", "01"])
    assert identity.wef.coeffs == (1, 2, 1)
    assert identity.min_distance == 1


def test_explicit_rank_deficient_reports_rank():
    with pytest.raises(InvalidParameterError, match="rank 1"):
        make_explicit(["11", "11"])


def test_explicit_rejects_ragged_rows():
    with pytest.raises(InvalidParameterError):
        make_explicit(["110", "01"])


def test_length_guard():
    with pytest.raises(InvalidParameterError):
        make_repetition(25)


# ── invariants ─────────────────────────────────────────────────────────────

ALL_CODES = [
    make_repetition(2), make_repetition(3), make_hamming_7_4(),
    *(make_spc(7, f) for f in SPC_FORMS), make_spc(6), make_explicit(["1000", "0110", "0001"]),
]


@pytest.mark.parametrize("code", ALL_CODES, ids=lambda c: c.describe())
def test_iowef_marginal_equals_wef(code):
    iowef = enumerate_iowef(code)
    assert iowef.output_marginal() == enumerate_wef(code)
    assert iowef[0, 0] == 1
    assert all(iowef[0, v] == 0 for v in range(1, code.q + 1))
    for u in range(code.k + 1):
        assert sum(iowef.coeffs[u]) == comb(code.k, u)
    assert code.wef.total() == 2 ** code.k


def test_row_permutation_keeps_weight_profile():
    code = make_spc(7, "cyclic")
    permuted = BinaryLinearCode(rows=tuple(reversed(code.rows)), q=7)
    assert permuted.wef == code.wef
    assert permuted.iowef == code.iowef


def test_codewords_and_membership():
    code = make_spc(4)
    words = code.codewords()
    assert len(words) == 8
    table = code.membership_table()
    assert table.sum() == 8
    assert all(table[w] for _, w in words)
    assert code.contains(0b1111) and not code.contains(0b0001)


def test_iowef_frame_shape():
    df = make_hamming_7_4().iowef.as_frame()
    assert df.shape == (5, 8)
    assert df.values.sum() == 16
