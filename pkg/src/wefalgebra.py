# src/wefalgebra.py – exact coefficient extraction and log-domain enumerator evaluation
"""
Two halves:

* ExactPoly and the ``poly_pow_coeff*`` functions work with Python ints only.
  Powers are taken by truncated repeated squaring or, for large targets, by
  the power-series recurrence of P = p^ℓ (p·P' = ℓ·p'·P). Both are exact.
* ``log_A``/``log_B`` and friends evaluate enumerators and their
  logarithmic derivatives as log-sum-exp over monomials, so arguments far
  from 1 never overflow.

All logarithms are natural.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from functools import lru_cache
from math import ceil, log2
from typing import Dict, Mapping, Tuple

import numpy as np
from scipy.special import logsumexp, xlog1py, xlogy

from src.errors import DomainError, InvalidParameterError, ResourceLimitError
from src.gf2core import IOWeightEnumerator, WeightEnumerator
from src.settings import MAX_POWER_DEGREE, SQUARING_WORK_BUDGET

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]


class ExactPoly(defaultdict):
    """Sparse polynomial with exact integer coefficients, keyed by exponent tuples."""

    def __init__(self, nvars: int = 1, terms: Mapping | None = None):
        super().__init__(int)
        self.nvars = nvars
        for e, c in (terms or {}).items():
            key = (e,) if isinstance(e, int) else tuple(e)
            if len(key) != nvars:
                raise InvalidParameterError(f"exponent {e!r} does not have {nvars} variable(s)")
            if c < 0:
                raise InvalidParameterError(f"negative coefficient {c} at {e!r}")
            if c:
                self[key] = int(c)

    @classmethod
    def from_wef(cls, wef: WeightEnumerator) -> "ExactPoly":
        return cls(1, wef.to_poly())

    @classmethod
    def from_iowef(cls, iowef: IOWeightEnumerator) -> "ExactPoly":
        return cls(2, iowef.to_poly())

    def degrees(self) -> Exponent:
        return tuple(max((e[i] for e in self), default=0) for i in range(self.nvars))

    def coeff(self, *exps: int) -> int:
        return self.get(tuple(exps), 0)

    def constant(self) -> int:
        return self.get((0,) * self.nvars, 0)

    def mul(self, other: "ExactPoly", bound: Exponent) -> "ExactPoly":
        oth_items = list(other.items())
        res = ExactPoly(self.nvars)
        for ea, ca in self.items():
            for eb, cb in oth_items:
                e = tuple(x + y for x, y in zip(ea, eb))
                if all(x <= b for x, b in zip(e, bound)):
                    res[e] += ca * cb
        return res

    def sqr(self, bound: Exponent) -> "ExactPoly":
        items = [(e, c) for e, c in self.items() if all(x <= b for x, b in zip(e, bound))]
        res = ExactPoly(self.nvars)
        for i, (ea, ca) in enumerate(items):
            e2 = tuple(2 * x for x in ea)
            if all(x <= b for x, b in zip(e2, bound)):
                res[e2] += ca * ca
            for eb, cb in items[i + 1:]:
                e = tuple(x + y for x, y in zip(ea, eb))
                if all(x <= b for x, b in zip(e, bound)):
                    res[e] += 2 * ca * cb
        return res

    def truncated_pow(self, ell: int, bound: Exponent) -> "ExactPoly":
        """p^ℓ with every term above ``bound`` (componentwise) dropped along the way."""
        if ell < 1:
            raise InvalidParameterError(f"power must be >= 1, got {ell}")
        x = ExactPoly(self.nvars, {e: c for e, c in self.items() if all(a <= b for a, b in zip(e, bound))})
        y = None
        while ell > 1:
            if ell % 2:
                y = x.mul(y, bound) if y is not None else x
            x = x.sqr(bound)
            ell //= 2
        return x.mul(y, bound) if y is not None else x

    def __str__(self):
        if not self:
            return "0"
        names = ("x", "y") if self.nvars == 2 else ("x",)

        def mono(e, c):
            parts = [f"{n}^{p}" if p > 1 else n for n, p in zip(names, e) if p]
            if not parts:
                return str(c)
            return " ".join(([str(c)] if c != 1 else []) + parts)

        return " + ".join(mono(e, c) for e, c in sorted(self.items()))


def _check_degree(poly: ExactPoly, ell: int):
    for d in poly.degrees():
        if ell * d > MAX_POWER_DEGREE:
            raise ResourceLimitError(
                f"power degree {ell}*{d}={ell * d} exceeds the limit {MAX_POWER_DEGREE}"
            )


def _squaring_work(bound: Exponent, ell: int) -> int:
    cells = int(np.prod([b + 1 for b in bound]))
    return cells * cells * max(1, ceil(log2(ell + 1)))


def _pow_series_1d(a: Dict[int, int], ell: int, w: int) -> list:
    """Coefficients 0..w of a(x)^ℓ via n·a0·c_n = Σ_k a_k((ℓ+1)k − n)c_{n−k}."""
    a0 = a.get(0, 0)
    if not a0:
        raise InvalidParameterError("recurrence needs a nonzero constant term")
    terms = sorted((k, c) for k, c in a.items() if k > 0 and c)
    c = [0] * (w + 1)
    c[0] = a0 ** ell
    for n in range(1, w + 1):
        s = 0
        for k, ak in terms:
            if k > n:
                break
            s += ak * ((ell + 1) * k - n) * c[n - k]
        q, r = divmod(s, n * a0)
        assert r == 0
        c[n] = q
    return c


def _pow_series_2d(b: Dict[Exponent, int], ell: int, wx: int, wy: int) -> np.ndarray:
    """Rows 0..wx of b(x, y)^ℓ (truncated at wy) for b(0, y) = b00 constant."""
    b00 = b.get((0, 0), 0)
    if not b00 or any(u == 0 and v > 0 for (u, v) in b):
        raise InvalidParameterError("bivariate recurrence needs p(0, y) to be a nonzero constant")
    terms = sorted(((u, v), c) for (u, v), c in b.items() if u > 0 and c)
    P = np.zeros((wx + 1, wy + 1), dtype=object)
    P[:] = 0
    P[0, 0] = b00 ** ell
    for u in range(1, wx + 1):
        row = np.zeros(wy + 1, dtype=object)
        row[:] = 0
        for (i, j), bij in terms:
            if i > u or j > wy:
                continue
            row[j:] += (bij * ((ell + 1) * i - u)) * P[u - i, : wy + 1 - j]
        denom = u * b00
        for v in range(wy + 1):
            q, r = divmod(row[v], denom)
            assert r == 0
            row[v] = q
        P[u] = row
    return P


def _choose_method(method: str, poly: ExactPoly, ell: int, bound: Exponent) -> str:
    if method in ("squaring", "recurrence"):
        return method
    if method != "auto":
        raise InvalidParameterError(f"unknown power method {method!r}")
    if _squaring_work(bound, ell) <= SQUARING_WORK_BUDGET:
        return "squaring"
    if poly.nvars == 2 and any(u == 0 and v > 0 for (u, v) in poly):
        return "squaring"
    return "recurrence" if poly.constant() else "squaring"


def poly_pow_coeff(p: ExactPoly | Mapping[int, int], ell: int, w: int, method: str = "auto") -> int:
    """Exact Coeff[p(x)^ℓ, x^w]."""
    if not isinstance(p, ExactPoly):
        p = ExactPoly(1, p)
    if p.nvars != 1:
        raise InvalidParameterError("poly_pow_coeff expects a univariate polynomial")
    if ell < 1 or w < 0:
        raise InvalidParameterError(f"need ell >= 1 and w >= 0, got ell={ell}, w={w}")
    _check_degree(p, ell)
    if w > ell * p.degrees()[0]:
        return 0
    chosen = _choose_method(method, p, ell, (w,))
    logger.debug("Coeff[p^%d, x^%d] via %s", ell, w, chosen)
    if chosen == "squaring":
        return p.truncated_pow(ell, (w,)).coeff(w)
    return _pow_series_1d({e[0]: c for e, c in p.items()}, ell, w)[w]


def poly_pow_coeff_bivar(p: ExactPoly | Mapping[Exponent, int], ell: int, wx: int, wy: int,
                         method: str = "auto") -> int:
    """Exact Coeff[p(x, y)^ℓ, x^wx y^wy]."""
    if not isinstance(p, ExactPoly):
        p = ExactPoly(2, p)
    if p.nvars != 2:
        raise InvalidParameterError("poly_pow_coeff_bivar expects a bivariate polynomial")
    if ell < 1 or wx < 0 or wy < 0:
        raise InvalidParameterError(f"need ell >= 1 and nonnegative targets, got {ell}, {wx}, {wy}")
    _check_degree(p, ell)
    dx, dy = p.degrees()
    if wx > ell * dx or wy > ell * dy:
        return 0
    chosen = _choose_method(method, p, ell, (wx, wy))
    logger.debug("Coeff[p^%d, x^%d y^%d] via %s", ell, wx, wy, chosen)
    if chosen == "squaring":
        return p.truncated_pow(ell, (wx, wy)).coeff(wx, wy)
    return int(_pow_series_2d(dict(p), ell, wx, wy)[wx, wy])


def power_table_1d(p: ExactPoly, ell: int, w: int) -> list:
    """All coefficients 0..w of p^ℓ (exact)."""
    _check_degree(p, ell)
    if p.constant():
        return _pow_series_1d({e[0]: c for e, c in p.items()}, ell, w)
    full = p.truncated_pow(ell, (w,))
    return [full.coeff(n) for n in range(w + 1)]


def power_table_2d(p: ExactPoly, ell: int, wx: int, wy: int) -> np.ndarray:
    """Object array of coefficients [0..wx] × [0..wy] of p^ℓ (exact)."""
    _check_degree(p, ell)
    if p.constant() and not any(u == 0 and v > 0 for (u, v) in p):
        return _pow_series_2d(dict(p), ell, wx, wy)
    full = p.truncated_pow(ell, (wx, wy))
    table = np.zeros((wx + 1, wy + 1), dtype=object)
    table[:] = 0
    for (u, v), c in full.items():
        table[u, v] = c
    return table


# ── Log-domain evaluation ──────────────────────────────────────────────────

@lru_cache(maxsize=None)
def _wef_support(wef: WeightEnumerator):
    return wef.support()


@lru_cache(maxsize=None)
def _iowef_support(iowef: IOWeightEnumerator):
    return iowef.support()


def _require_positive(name: str, value: float):
    if not value > 0 or not np.isfinite(value):
        raise DomainError(f"{name} must be a positive finite real, got {value}")


def log_A_log(wef: WeightEnumerator, log_z: float) -> float:
    weights, logs = _wef_support(wef)
    return float(logsumexp(logs + weights * log_z))


def weight_moments(wef: WeightEnumerator, log_z: float) -> Tuple[float, float]:
    """Mean and variance of the weight under P(u) ∝ A_u z^u; the mean is z·A'(z)/A(z)."""
    weights, logs = _wef_support(wef)
    a = logs + weights * log_z
    p = np.exp(a - logsumexp(a))
    mean = float(np.clip(p @ weights, weights[0], weights[-1]))
    var = float(p @ (weights - mean) ** 2)
    return mean, var


def log_A(wef: WeightEnumerator, z: float) -> float:
    _require_positive("z", z)
    return log_A_log(wef, float(np.log(z)))


def dlog_A(wef: WeightEnumerator, z: float) -> float:
    """z·A'(z)/A(z)."""
    _require_positive("z", z)
    return weight_moments(wef, float(np.log(z)))[0]


def log_B_log(iowef: IOWeightEnumerator, log_x: float, log_y: float) -> float:
    us, vs, logs = _iowef_support(iowef)
    return float(logsumexp(logs + us * log_x + vs * log_y))


def io_moments(iowef: IOWeightEnumerator, log_x: float, log_y: float):
    """(E u, E v, Var u, Cov(u, v), Var v) under P(u, v) ∝ B_uv x^u y^v."""
    us, vs, logs = _iowef_support(iowef)
    a = logs + us * log_x + vs * log_y
    p = np.exp(a - logsumexp(a))
    eu = float(np.clip(p @ us, us.min(), us.max()))
    ev = float(np.clip(p @ vs, vs.min(), vs.max()))
    du, dv = us - eu, vs - ev
    return eu, ev, float(p @ (du * du)), float(p @ (du * dv)), float(p @ (dv * dv))


def io_means(iowef: IOWeightEnumerator, log_xs: np.ndarray, log_y: float) -> Tuple[np.ndarray, np.ndarray]:
    """(E u, E v) for every log x in ``log_xs`` at one fixed log y."""
    us, vs, logs = _iowef_support(iowef)
    lx = np.atleast_1d(np.asarray(log_xs, dtype=float))
    a = logs + vs * log_y + np.outer(lx, us)
    p = np.exp(a - logsumexp(a, axis=1, keepdims=True))
    return np.clip(p @ us, us.min(), us.max()), np.clip(p @ vs, vs.min(), vs.max())


def log_B(iowef: IOWeightEnumerator, x: float, y: float) -> float:
    _require_positive("x", x)
    _require_positive("y", y)
    return log_B_log(iowef, float(np.log(x)), float(np.log(y)))


def dlog_B_x(iowef: IOWeightEnumerator, x: float, y: float) -> float:
    """x·∂B/∂x / B."""
    _require_positive("x", x)
    _require_positive("y", y)
    return io_moments(iowef, float(np.log(x)), float(np.log(y)))[0]


def dlog_B_y(iowef: IOWeightEnumerator, x: float, y: float) -> float:
    """y·∂B/∂y / B."""
    _require_positive("x", x)
    _require_positive("y", y)
    return io_moments(iowef, float(np.log(x)), float(np.log(y)))[1]


def binary_entropy(p: float) -> float:
    """h(p) = −p log p − (1−p) log(1−p), natural log, h(0) = h(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"entropy argument must lie in [0, 1], got {p}")
    return float(-xlogy(p, p) - xlog1py(1.0 - p, -p))
