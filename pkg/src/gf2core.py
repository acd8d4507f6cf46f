# src/gf2core.py – binary linear component codes and their exact enumerators
"""
Component codes are stored as generator rows packed into int bitsets
(bit j = column j; character j of an ASCII row string = column j).
Input bit i of a message selects generator row i.

All enumerators come from exhaustive enumeration of the 2^k messages.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from src.errors import InvalidParameterError, ResourceLimitError
from src.settings import MAX_CODE_LENGTH, MAX_ENUM_DIMENSION

logger = logging.getLogger(__name__)

SPC_FORMS = ("systematic", "cyclic", "antisystematic")


def row_from_bits(bits: Sequence[int]) -> int:
    """Pack a list of bits into an int bitset (LSB = column 0)."""
    row = 0
    for j, b in enumerate(bits):
        if b:
            row |= 1 << j
    return row


def row_to_string(row: int, q: int) -> str:
    return "".join("1" if (row >> j) & 1 else "0" for j in range(q))


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of a list of int bitsets (Gaussian elimination on pivots)."""
    pivots: dict[int, int] = {}
    rank = 0
    for row in rows:
        r = row
        while r:
            top = r.bit_length() - 1
            if top not in pivots:
                pivots[top] = r
                rank += 1
                break
            r ^= pivots[top]
    return rank


@dataclass(frozen=True)
class WeightEnumerator:
    """A(z) = Σ_u coeffs[u] z^u, exact integer coefficients."""

    coeffs: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.coeffs) - 1

    @property
    def degree(self) -> int:
        """Largest weight present."""
        return max(u for u, a in enumerate(self.coeffs) if a)

    @property
    def min_distance(self) -> int | None:
        nonzero = [u for u, a in enumerate(self.coeffs) if u >= 1 and a]
        return nonzero[0] if nonzero else None

    @property
    def weight2(self) -> int:
        return self.coeffs[2] if len(self.coeffs) > 2 else 0

    def total(self) -> int:
        return sum(self.coeffs)

    def support(self) -> Tuple[np.ndarray, np.ndarray]:
        """Weights with nonzero count and log of the counts, for log-domain evaluation."""
        weights = np.array([u for u, a in enumerate(self.coeffs) if a], dtype=float)
        logs = np.array([np.log(float(a)) for a in self.coeffs if a], dtype=float)
        return weights, logs

    def to_poly(self) -> dict[int, int]:
        return {u: a for u, a in enumerate(self.coeffs) if a}


@dataclass(frozen=True)
class IOWeightEnumerator:
    """B(x, y) = Σ coeffs[u][v] x^u y^v; u = input weight, v = output weight."""

    coeffs: Tuple[Tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return len(self.coeffs) - 1

    @property
    def q(self) -> int:
        return len(self.coeffs[0]) - 1

    def __getitem__(self, uv: Tuple[int, int]) -> int:
        u, v = uv
        return self.coeffs[u][v]

    def output_marginal(self) -> WeightEnumerator:
        return WeightEnumerator(tuple(sum(row[v] for row in self.coeffs) for v in range(self.q + 1)))

    @property
    def weight2_total(self) -> int:
        """B_2: total number of weight-2 local codewords, over every input weight."""
        return sum(row[2] for row in self.coeffs) if self.q >= 2 else 0

    @property
    def min_distance(self) -> int | None:
        return self.output_marginal().min_distance

    def support(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(u, v, log B_uv) over nonzero entries."""
        entries = [(u, v, c) for u, row in enumerate(self.coeffs) for v, c in enumerate(row) if c]
        us = np.array([e[0] for e in entries], dtype=float)
        vs = np.array([e[1] for e in entries], dtype=float)
        logs = np.array([np.log(float(e[2])) for e in entries], dtype=float)
        return us, vs, logs

    def to_poly(self) -> dict[Tuple[int, int], int]:
        return {(u, v): c for u, row in enumerate(self.coeffs) for v, c in enumerate(row) if c}

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [list(row) for row in self.coeffs],
            index=pd.Index(range(self.k + 1), name="u"),
            columns=pd.Index(range(self.q + 1), name="v"),
        )


@dataclass(frozen=True)
class BinaryLinearCode:
    """Binary (q, k) linear block code given by a full-rank generator matrix."""

    rows: Tuple[int, ...]
    q: int
    label: str = ""

    def __post_init__(self):
        k = len(self.rows)
        if k < 1:
            raise InvalidParameterError("generator needs at least one row")
        if self.q > MAX_CODE_LENGTH:
            raise InvalidParameterError(f"code length {self.q} exceeds the desk-scale limit {MAX_CODE_LENGTH}")
        if k > self.q:
            raise InvalidParameterError(f"dimension k={k} exceeds length q={self.q}")
        if any(r < 0 or r >> self.q for r in self.rows):
            raise InvalidParameterError(f"generator row wider than q={self.q}")
        rank = gf2_rank(self.rows)
        if rank < k:
            raise InvalidParameterError(f"generator is rank-deficient: rank {rank} < {k} rows")

    @property
    def k(self) -> int:
        return len(self.rows)

    @property
    def rate(self) -> float:
        return self.k / self.q

    def rows_as_strings(self) -> List[str]:
        return [row_to_string(r, self.q) for r in self.rows]

    def encode(self, message: int) -> int:
        word = 0
        for i, row in enumerate(self.rows):
            if (message >> i) & 1:
                word ^= row
        return word

    def codewords(self) -> List[Tuple[int, int]]:
        """(message, codeword) for all 2^k messages, in Gray-code order."""
        if self.k > MAX_ENUM_DIMENSION:
            raise ResourceLimitError(f"k={self.k} exceeds the enumeration limit {MAX_ENUM_DIMENSION}")
        out = [(0, 0)]
        message, word = 0, 0
        for step in range(1, 1 << self.k):
            flip = (step & -step).bit_length() - 1
            message ^= 1 << flip
            word ^= self.rows[flip]
            out.append((message, word))
        return out

    @cached_property
    def _codeword_set(self) -> frozenset:
        return frozenset(w for _, w in self.codewords())

    def contains(self, word: int) -> bool:
        return word in self._codeword_set

    def membership_table(self) -> np.ndarray:
        """Boolean lookup indexed by the q-bit word."""
        table = np.zeros(1 << self.q, dtype=bool)
        table[list(self._codeword_set)] = True
        return table

    @cached_property
    def wef(self) -> WeightEnumerator:
        return enumerate_wef(self)

    @cached_property
    def iowef(self) -> IOWeightEnumerator:
        return enumerate_iowef(self)

    @property
    def min_distance(self) -> int | None:
        return self.wef.min_distance

    def describe(self) -> str:
        return self.label or f"({self.q},{self.k}) code"


# ── Constructors ───────────────────────────────────────────────────────────

def make_repetition(q: int) -> BinaryLinearCode:
    if q < 2:
        raise InvalidParameterError(f"repetition length must be >= 2, got {q}")
    return BinaryLinearCode(rows=((1 << q) - 1,), q=q, label=f"repetition-{q}")


def make_spc(q: int, form: str = "systematic") -> BinaryLinearCode:
    if form not in SPC_FORMS:
        raise InvalidParameterError(f"unknown SPC form {form!r}; expected one of {', '.join(SPC_FORMS)}")
    if q < 3:
        raise InvalidParameterError(f"SPC length must be >= 3, got {q}")
    k = q - 1
    last = 1 << k
    if form == "systematic":
        rows = tuple((1 << i) | last for i in range(k))
    elif form == "cyclic":
        rows = tuple((1 << i) | (1 << (i + 1)) for i in range(k))
    else:
        if q % 2 == 0:
            raise InvalidParameterError(
                f"antisystematic SPC needs odd length; q={q} gives a d_min=1 code"
            )
        ones = (1 << k) - 1
        rows = tuple((ones ^ (1 << i)) | last for i in range(k))
    return BinaryLinearCode(rows=rows, q=q, label=f"SPC-{q} ({form})")


def make_hamming_7_4() -> BinaryLinearCode:
    G = [[1, 0, 0, 0, 0, 1, 1],
         [0, 1, 0, 0, 1, 0, 1],
         [0, 0, 1, 0, 1, 1, 0],
         [0, 0, 0, 1, 1, 1, 1]]
    return BinaryLinearCode(rows=tuple(row_from_bits(r) for r in G), q=7, label="Hamming(7,4)")


def make_explicit(rows: Sequence[str], label: str = "") -> BinaryLinearCode:
    if not rows:
        raise InvalidParameterError("explicit code needs at least one row")
    q = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != q:
            raise InvalidParameterError(f"row {i} has length {len(r)}, expected {q}")
        if set(r) - {"0", "1"}:
            raise InvalidParameterError(f"row {i} is not a bitstring: {r!r}")
    packed = tuple(row_from_bits([int(c) for c in r]) for r in rows)
    rank = gf2_rank(packed)
    if rank < len(packed):
        raise InvalidParameterError(f"explicit generator is rank-deficient: rank {rank} < {len(packed)} rows")
    return BinaryLinearCode(rows=packed, q=q, label=label or f"explicit ({q},{len(rows)})")


# ── Enumerators ────────────────────────────────────────────────────────────

def enumerate_iowef(code: BinaryLinearCode) -> IOWeightEnumerator:
    table = [[0] * (code.q + 1) for _ in range(code.k + 1)]
    for message, word in code.codewords():
        table[message.bit_count()][word.bit_count()] += 1
    for u in range(code.k + 1):
        assert sum(table[u]) == comb(code.k, u)
    logger.debug("IO-WEF of %s enumerated over %d messages", code.describe(), 1 << code.k)
    return IOWeightEnumerator(tuple(tuple(row) for row in table))


def enumerate_wef(code: BinaryLinearCode) -> WeightEnumerator:
    counts = [0] * (code.q + 1)
    for _, word in code.codewords():
        counts[word.bit_count()] += 1
    return WeightEnumerator(tuple(counts))
