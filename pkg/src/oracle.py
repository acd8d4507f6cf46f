# src/oracle.py – exact and brute-force certificates for the saddle solver
"""
Everything here is computed independently of src/saddle.py:

* lemma1_gap / lemma2_gap    – finite-ℓ coefficient vs. its single-code limit
* exact_expected_spectrum    – E[N_w] for a finite instance, exact rationals
* brute_force_spectrum       – the same average over all E! edge permutations
* maximize_S                 – grid maximisation of the pre-Lagrange objective
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, gcd, isclose, log
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import logit

from src.ensemble import Ensemble, FiniteInstance
from src.errors import DomainError, ResourceLimitError, SolverError, StructuralZeroError
from src.gf2core import IOWeightEnumerator, WeightEnumerator
from src.settings import (
    BRUTE_MAX_EDGES, BRUTE_MAX_INPUT_BITS, BRUTE_PERMUTATION_CHUNK, LOG_SEARCH_SPAN,
    MAX_EXACT_EDGES, MAX_S_GRID, MAX_S_REFINEMENTS, MAX_S_VN_TYPES, NEWTON_MAX_HALVINGS,
    NEWTON_MAX_STEPS, RESIDUAL_ACCEPT, RESIDUAL_TARGET, ROOT_XTOL,
)
from src.wefalgebra import (
    ExactPoly, binary_entropy, io_moments, log_A_log, log_B_log, poly_pow_coeff,
    poly_pow_coeff_bivar, power_table_1d, power_table_2d, weight_moments,
)

logger = logging.getLogger(__name__)


# ── Result types ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class LemmaResult:
    gap: float
    limit: float
    finite: float
    coefficient: int
    ell: int
    saddle: Tuple[float, ...]       # (z,) for lemma1_gap, (x0, y0) for lemma2_gap
    reduced: bool = False           # lemma2_gap solved along a line (collinear support or hull edge)


@dataclass(frozen=True)
class FiniteSpectrum:
    n: int
    values: Tuple[Fraction, ...]    # E[N_w], w = 0..N

    def __getitem__(self, w: int) -> Fraction:
        return self.values[w]

    def __len__(self) -> int:
        return len(self.values)

    def growth_estimate(self, w: int) -> float:
        """(1/n)·log E[N_w]; −inf where the expectation is zero."""
        value = self.values[w]
        if value == 0:
            return float("-inf")
        return (log(value.numerator) - log(value.denominator)) / self.n


@dataclass(frozen=True)
class TypeApportionment:
    alpha: float
    beta: float
    alpha_t: Tuple[float, ...]
    beta_t: Tuple[float, ...]
    eps_t: Tuple[float, ...]
    z0: float
    x0_t: Tuple[float, ...]
    y0_t: Tuple[float, ...]
    evaluated: int = 0
    skipped: int = 0


# ── Single-code saddles ────────────────────────────────────────────────────

def _target_index(value: float, ell: int, name: str) -> int:
    w = value * ell
    if not isclose(w, round(w), abs_tol=1e-9):
        raise DomainError(f"{name}·ell = {w:g} is not an integer")
    return int(round(w))


def _solve_weight_saddle(wef: WeightEnumerator, mean: float) -> float:
    """log z with z·A'(z)/A(z) = mean (monotone in log z)."""
    if not 0.0 < mean < wef.degree:
        raise DomainError(f"target weight {mean:g} outside (0, {wef.degree})")

    def f(lz):
        return weight_moments(wef, lz)[0] - mean

    lo, hi = -LOG_SEARCH_SPAN, LOG_SEARCH_SPAN
    while f(lo) > 0:
        lo *= 2
    while f(hi) < 0:
        hi *= 2
    return brentq(f, lo, hi, xtol=ROOT_XTOL)


def lemma1_gap(wef: WeightEnumerator, xi: float, ell: int) -> LemmaResult:
    w = _target_index(xi, ell, "xi")
    if not 0.0 < xi < wef.degree:
        raise DomainError(f"xi={xi:g} outside (0, {wef.degree})")
    coefficient = poly_pow_coeff(ExactPoly.from_wef(wef), ell, w)
    if coefficient == 0:
        raise StructuralZeroError(f"Coeff[A^{ell}, x^{w}] is zero: weight {w} is unreachable")
    lz = _solve_weight_saddle(wef, xi)
    limit = log_A_log(wef, lz) - xi * lz
    finite = log(coefficient) / ell
    return LemmaResult(gap=finite - limit, limit=limit, finite=finite, coefficient=coefficient,
                       ell=ell, saddle=(float(np.exp(lz)),))


def support_line(iowef: IOWeightEnumerator) -> Optional[Tuple[int, int]]:
    """Primitive direction (a, b) if every support point lies on one ray from the origin."""
    pts = [(int(u), int(v)) for u, v in zip(*iowef.support()[:2]) if (u, v) != (0, 0)]
    a, b = pts[0]
    g = gcd(a, b)
    a, b = a // g, b // g
    if all(u * b == v * a for u, v in pts):
        return a, b
    return None


def _line_wef(iowef: IOWeightEnumerator, a: int, b: int) -> WeightEnumerator:
    """Univariate enumerator in the step count s along the support line."""
    coeffs: Dict[int, int] = {}
    for (u, v), c in iowef.to_poly().items():
        s = u // a if a else v // b
        coeffs[s] = coeffs.get(s, 0) + c
    return WeightEnumerator(tuple(coeffs.get(s, 0) for s in range(max(coeffs) + 1)))


def theta_range(iowef: IOWeightEnumerator, xi: float) -> Tuple[float, float]:
    """Closed range of output weight over the support's convex hull at input weight xi."""
    us, vs, _ = iowef.support()
    lo, hi = np.inf, -np.inf
    for (u1, v1), (u2, v2) in itertools.combinations_with_replacement(zip(us, vs), 2):
        if u1 > u2:
            u1, v1, u2, v2 = u2, v2, u1, v1
        if not u1 <= xi <= u2:
            continue
        v = v1 if u1 == u2 else v1 + (v2 - v1) * (xi - u1) / (u2 - u1)
        if u1 == u2 and u1 == xi:
            lo, hi = min(lo, v1, v2), max(hi, v1, v2)
        elif u1 != u2:
            lo, hi = min(lo, v), max(hi, v)
    return float(lo), float(hi)


def io_saddle(iowef: IOWeightEnumerator, xi: float, theta: float,
              seed: Tuple[float, float] | None = None) -> Tuple[float, float]:
    """(log x0, log y0) with mean input weight xi and mean output weight theta (full-rank support)."""
    lo, hi = theta_range(iowef, xi)
    if not (0.0 < xi < iowef.k and lo < theta < hi):
        raise DomainError(f"(xi, theta)=({xi:g}, {theta:g}) is not interior to the support hull")
    if seed is None:
        ly = _solve_weight_saddle(iowef.output_marginal(), theta)
        f = lambda lx: io_moments(iowef, lx, ly)[0] - xi
        a, b = -LOG_SEARCH_SPAN, LOG_SEARCH_SPAN
        lx = brentq(f, a, b, xtol=ROOT_XTOL) if f(a) < 0 < f(b) else 0.0
        state = np.array([lx, ly])
    else:
        state = np.asarray(seed, dtype=float)

    def resid(s):
        eu, ev, *_ = io_moments(iowef, s[0], s[1])
        return np.array([eu - xi, ev - theta])

    r = resid(state)
    norm = np.max(np.abs(r))
    for _ in range(NEWTON_MAX_STEPS):
        if norm < RESIDUAL_TARGET:
            break
        _, _, vu, cuv, vv = io_moments(iowef, *state)
        try:
            step = np.linalg.solve([[vu, cuv], [cuv, vv]], -r)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular moment matrix at ({xi:g}, {theta:g})", residuals=r) from exc
        step *= min(1.0, 10.0 / max(np.max(np.abs(step)), 1e-300))
        t = 1.0
        for _ in range(NEWTON_MAX_HALVINGS):
            cand = state + t * step
            rc = resid(cand)
            nc = np.max(np.abs(rc)) if np.all(np.isfinite(rc)) else np.inf
            if nc < norm:
                state, r, norm = cand, rc, nc
                break
            t *= 0.5
        else:
            break
    if norm >= RESIDUAL_ACCEPT:
        raise SolverError(f"per-type saddle did not converge at ({xi:g}, {theta:g})", residuals=r)
    return float(state[0]), float(state[1])


def _hull_face(iowef: IOWeightEnumerator, xi: float, theta: float) -> Optional[Tuple[WeightEnumerator, int]]:
    """Enumerator along the hull edge through (xi, theta), or None when the target is interior.

    On a supporting line every factor of the power must sit on the line itself, so the
    bivariate coefficient is a univariate one in u. Returns (face WEF in u − u_min, u_min).
    """
    lo, hi = theta_range(iowef, xi)
    on_lo, on_hi = isclose(theta, lo, abs_tol=1e-12), isclose(theta, hi, abs_tol=1e-12)
    if not (on_lo or on_hi):
        return None
    edge = hi if on_hi else lo
    pts = list(iowef.to_poly().items())
    for ((u1, v1), _), ((u2, v2), _) in itertools.combinations(pts, 2):
        if u1 == u2:
            continue
        if u1 > u2:
            u1, v1, u2, v2 = u2, v2, u1, v1
        if u1 <= xi <= u2 and isclose(v1 + (v2 - v1) * (xi - u1) / (u2 - u1), edge, abs_tol=1e-12):
            face = {u: c for (u, v), c in pts if (v - v1) * (u2 - u1) == (v2 - v1) * (u - u1)}
            u_min = min(face)
            return WeightEnumerator(tuple(face.get(u, 0) for u in range(u_min, max(face) + 1))), u_min
    raise DomainError(f"(xi, theta)=({xi:g}, {theta:g}) sits on a vertical hull edge")


def lemma2_gap(iowef: IOWeightEnumerator, xi: float, theta: float, ell: int) -> LemmaResult:
    wx = _target_index(xi, ell, "xi")
    wy = _target_index(theta, ell, "theta")
    coefficient = poly_pow_coeff_bivar(ExactPoly.from_iowef(iowef), ell, wx, wy)
    if coefficient == 0:
        raise StructuralZeroError(f"Coeff[B^{ell}, x^{wx} y^{wy}] is zero: (u, v) target is unreachable")
    finite = log(coefficient) / ell
    face = _hull_face(iowef, xi, theta) if support_line(iowef) is None else None
    if face is not None:
        face_wef, u_min = face
        mean = xi - u_min
        if isclose(mean, 0.0, abs_tol=1e-12) or isclose(mean, face_wef.length, abs_tol=1e-12):
            # hull vertex: every factor is the vertex itself
            limit = log(face_wef.coeffs[round(mean)])
            s0 = float("nan")
        else:
            ls = _solve_weight_saddle(face_wef, mean)
            limit = log_A_log(face_wef, ls) - mean * ls
            s0 = float(np.exp(ls))
        # the 2-D saddle is at infinity; report the face variable and NaN
        return LemmaResult(gap=finite - limit, limit=limit, finite=finite, coefficient=coefficient,
                           ell=ell, saddle=(s0, float("nan")), reduced=True)
    line = support_line(iowef)
    if line is not None:
        a, b = line
        line_wef = _line_wef(iowef, a, b)
        steps = xi / a
        ls = _solve_weight_saddle(line_wef, steps)
        limit = log_A_log(line_wef, ls) - steps * ls
        # any (x0, y0) on x^a y^b = s0 is a saddle; report y0 = 1
        saddle = (float(np.exp(ls / a)), 1.0)
        return LemmaResult(gap=finite - limit, limit=limit, finite=finite, coefficient=coefficient,
                           ell=ell, saddle=saddle, reduced=True)
    lx, ly = io_saddle(iowef, xi, theta)
    limit = log_B_log(iowef, lx, ly) - xi * lx - theta * ly
    return LemmaResult(gap=finite - limit, limit=limit, finite=finite, coefficient=coefficient,
                       ell=ell, saddle=(float(np.exp(lx)), float(np.exp(ly))))


# ── Finite-n spectra ───────────────────────────────────────────────────────

def _convolve_2d(acc: np.ndarray, table: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    """Truncated 2-D product of two exact coefficient arrays, looping over the sparser one."""
    sparse, dense = (acc, table) if np.count_nonzero(acc) <= np.count_nonzero(table) else (table, acc)
    padded = np.zeros(shape, dtype=object)
    padded[:] = 0
    h, w = min(shape[0], dense.shape[0]), min(shape[1], dense.shape[1])
    padded[:h, :w] = dense[:h, :w]
    out = np.zeros(shape, dtype=object)
    out[:] = 0
    for u, v in zip(*np.nonzero(sparse)):
        if u >= shape[0] or v >= shape[1]:
            continue
        out[u:, v:] += sparse[u, v] * padded[: shape[0] - u, : shape[1] - v]
    return out


def check_valid_counts(instance: FiniteInstance) -> List[int]:
    """N_c(v): number of check-valid edge assignments of weight v, v = 0..E (exact)."""
    E = instance.E
    acc = ExactPoly(1, {0: 1})
    for count, code in zip(instance.cn_counts, instance.cn_codes):
        if count == 0:
            continue
        table = power_table_1d(ExactPoly.from_wef(code.wef), count, E)
        acc = acc.mul(ExactPoly(1, {i: c for i, c in enumerate(table) if c}), (E,))
    return [acc.coeff(v) for v in range(E + 1)]


def variable_valid_table(instance: FiniteInstance) -> np.ndarray:
    """Object array [w, v]: split assignments with input weight w and edge weight v."""
    N, E = instance.N, instance.E
    acc = np.zeros((N + 1, E + 1), dtype=object)
    acc[:] = 0
    acc[0, 0] = 1
    for count, code in zip(instance.vn_counts, instance.vn_codes):
        if count == 0:
            continue
        table = power_table_2d(ExactPoly.from_iowef(code.iowef), count,
                               min(N, count * code.k), min(E, count * code.q))
        acc = _convolve_2d(acc, table, (N + 1, E + 1))
    return acc


def exact_expected_spectrum(instance: FiniteInstance) -> FiniteSpectrum:
    if instance.E > MAX_EXACT_EDGES:
        raise ResourceLimitError(f"E={instance.E} exceeds the exact-spectrum limit {MAX_EXACT_EDGES}")
    E = instance.E
    n_c = check_valid_counts(instance)
    vv = variable_valid_table(instance)
    prob = [Fraction(n_c[v], comb(E, v)) for v in range(E + 1)]
    values = tuple(sum((vv[w, v] * prob[v] for v in range(E + 1) if vv[w, v] and prob[v]), Fraction(0))
                   for w in range(instance.N + 1))
    logger.info("exact spectrum for n=%d (E=%d, N=%d) computed", instance.n, E, instance.N)
    return FiniteSpectrum(n=instance.n, values=values)


def _edge_labelings(instance: FiniteInstance) -> Tuple[np.ndarray, np.ndarray]:
    """Edge words (bit j = VN socket j) and input weights for all global inputs."""
    words = np.zeros(1, dtype=np.int64)
    weights = np.zeros(1, dtype=np.int64)
    offset = 0
    for count, code in zip(instance.vn_counts, instance.vn_codes):
        local = code.codewords()
        lw = np.array([c for _, c in local], dtype=np.int64)
        lu = np.array([m.bit_count() for m, _ in local], dtype=np.int64)
        for _ in range(count):
            words = (words[:, None] | (lw[None, :] << offset)).ravel()
            weights = (weights[:, None] + lu[None, :]).ravel()
            offset += code.q
    return words, weights


def brute_force_spectrum(instance: FiniteInstance) -> FiniteSpectrum:
    E, N = instance.E, instance.N
    if E > BRUTE_MAX_EDGES or N > BRUTE_MAX_INPUT_BITS:
        raise ResourceLimitError(
            f"brute force needs E <= {BRUTE_MAX_EDGES} and N <= {BRUTE_MAX_INPUT_BITS}, got E={E}, N={N}"
        )
    words, weights = _edge_labelings(instance)
    bits = ((words[:, None] >> np.arange(E)) & 1).astype(np.int64)      # (inputs, E)
    checks = []
    offset = 0
    for count, code in zip(instance.cn_counts, instance.cn_codes):
        table = code.membership_table()
        for _ in range(count):
            checks.append((offset, code.q, table))
            offset += code.q

    counts = np.zeros(N + 1, dtype=np.int64)
    perms = itertools.permutations(range(E))
    while True:
        block = np.array(list(itertools.islice(perms, BRUTE_PERMUTATION_CHUNK)), dtype=np.int64)
        if block.size == 0:
            break
        # surviving (permutation, input) pairs, pruned CN by CN
        p_idx = np.repeat(np.arange(len(block)), len(words))
        i_idx = np.tile(np.arange(len(words)), len(block))
        for start, q, table in checks:
            sockets = block[p_idx, start:start + q]                      # CN socket j ← VN socket π(j)
            local = bits[i_idx[:, None], sockets]
            word = (local << np.arange(q)).sum(axis=1)
            keep = table[word]
            p_idx, i_idx = p_idx[keep], i_idx[keep]
            if p_idx.size == 0:
                break
        counts += np.bincount(weights[i_idx], minlength=N + 1)
    total = factorial(E)
    logger.info("brute force over %d permutations x %d inputs done", total, len(words))
    return FiniteSpectrum(n=instance.n, values=tuple(Fraction(int(c), total) for c in counts))


# ── Pre-Lagrange objective ─────────────────────────────────────────────────

@dataclass(frozen=True)
class _TypeTerm:
    """X_t and β_t for one VN type; collinear types carry (log s0, a, b) instead of (log x0, log y0)."""

    value: float
    beta_t: float
    lx: Optional[float] = None
    ly: Optional[float] = None
    line: Optional[Tuple[float, int, int]] = None

class _Objective:
    """S(α⃗, β⃗) = Σ_t X_t(α_t, β_t) + Y(β) for one ensemble and one α."""

    def __init__(self, ens: Ensemble, alpha: float):
        self.ens = ens
        self.alpha = alpha
        self.iowefs = [t.code.iowef for t in ens.vn_types]
        self.lines = [support_line(b) for b in self.iowefs]
        self.line_wefs = [_line_wef(b, *ln) if ln else None for b, ln in zip(self.iowefs, self.lines)]
        self.cn = [t.code.wef for t in ens.cn_types]
        self.free = [i for i, ln in enumerate(self.lines) if ln is None]
        self.seeds: Dict[int, Tuple[float, float]] = {}

    def cn_side(self, beta: float) -> Tuple[float, float]:
        """(Y(β), log z0) with all CN types sharing z0."""
        ens = self.ens
        if not 0.0 < beta < ens.beta_sup:
            raise DomainError(f"beta={beta:g} outside (0, {ens.beta_sup:g})")

        def f(lz):
            return ens.m_over_n * sum(g * weight_moments(A, lz)[0] for g, A in zip(ens.gamma, self.cn)) - beta

        lo, hi = -LOG_SEARCH_SPAN, LOG_SEARCH_SPAN
        while f(lo) > 0:
            lo *= 2
        while f(hi) < 0:
            hi *= 2
        lz = brentq(f, lo, hi, xtol=ROOT_XTOL)
        y = (ens.m_over_n * sum(g * log_A_log(A, lz) for g, A in zip(ens.gamma, self.cn))
             - beta * lz - binary_entropy(beta * ens.int_lambda) / ens.int_lambda)
        return y, lz

    def vn_term(self, t: int, alpha_t: float, frac: float) -> "_TypeTerm":
        delta = float(self.ens.delta[t])
        if alpha_t == 0.0:
            return _TypeTerm(0.0, 0.0)
        xi = alpha_t / delta
        line = self.lines[t]
        if line is not None:
            a, b = line
            wef = self.line_wefs[t]
            ls = _solve_weight_saddle(wef, xi / a)
            value = delta * (log_A_log(wef, ls) - (xi / a) * ls)
            return _TypeTerm(value, alpha_t * b / a, line=(ls, a, b))
        iowef = self.iowefs[t]
        lo, hi = theta_range(iowef, xi)
        theta = lo + frac * (hi - lo)
        try:
            lx, ly = io_saddle(iowef, xi, theta, seed=self.seeds.get(t))
        except SolverError:
            lx, ly = io_saddle(iowef, xi, theta)
        self.seeds[t] = (lx, ly)
        value = delta * (log_B_log(iowef, lx, ly) - xi * lx - theta * ly)
        return _TypeTerm(value, delta * theta, lx=lx, ly=ly)

    def evaluate(self, weights: Sequence[float], fracs: Sequence[float]):
        terms = []
        frac_iter = iter(fracs)
        for t, w in enumerate(weights):
            frac = next(frac_iter) if t in self.free else 0.0
            terms.append(self.vn_term(t, self.alpha * w, frac))
        beta = sum(term.beta_t for term in terms)
        y, lz = self.cn_side(beta)
        return sum(term.value for term in terms) + y, terms, beta, lz


def _simplex_box(point: Sequence[float], half: Sequence[float], res: int, free_dims: int):
    """Grid over the first T−1 simplex weights and the free β fractions, clipped to the domain."""
    axes = []
    for i, (c, h) in enumerate(zip(point, half)):
        is_frac = i >= len(point) - free_dims
        lo, hi = (1e-9, 1 - 1e-9) if is_frac else (0.0, 1.0)
        axes.append(np.unique(np.clip(np.linspace(c - h, c + h, res), lo, hi)))
    return itertools.product(*axes)


def maximize_S(ens: Ensemble, alpha: float, grid_resolution: int = MAX_S_GRID,
               refinements: int = MAX_S_REFINEMENTS) -> Tuple[float, TypeApportionment]:
    """Grid maximum of S over type apportionments, refined around the incumbent."""
    T = len(ens.vn_types)
    if T > MAX_S_VN_TYPES:
        raise ResourceLimitError(f"{T} VN types exceed the grid-maximisation limit {MAX_S_VN_TYPES}")
    if not 0.0 < alpha < ens.alpha_max:
        raise DomainError(f"alpha={alpha:g} outside (0, {ens.alpha_max:g})")
    obj = _Objective(ens, alpha)
    F = len(obj.free)
    dims = (T - 1) + F
    res = grid_resolution

    center = [0.5] * dims
    half = [0.5] * dims
    best = None
    evaluated = skipped = 0
    for rnd in range(refinements + 1):
        for p in _simplex_box(center, half, res, F) if dims else [()]:
            head = list(p[: T - 1])
            if sum(head) > 1.0 + 1e-12:
                continue
            weights = head + [max(0.0, 1.0 - sum(head))]
            try:
                value, terms, beta, lz = obj.evaluate(weights, p[T - 1:])
            except (DomainError, SolverError, ValueError):
                skipped += 1
                continue
            evaluated += 1
            if best is None or value > best[0]:
                best = (value, list(p), weights, terms, beta, lz)
        if best is None or not dims:
            break
        center = best[1]
        half = [2.0 * h * 2.0 / (res - 1) for h in half]
        logger.info("maximize_S refinement %d: S=%.10g", rnd, best[0])

    if best is None:
        raise SolverError(f"no feasible apportionment at alpha={alpha:g}",
                          diagnostics={"skipped": skipped})
    value, _, weights, terms, beta, lz = best
    apportionment = _apportionment(ens, alpha, weights, terms, beta, lz, evaluated, skipped)
    return value, apportionment


def _apportionment(ens: Ensemble, alpha: float, weights, terms, beta: float, lz: float,
                   evaluated: int, skipped: int) -> TypeApportionment:
    """Per-type saddle values at the optimum; collinear types take y0 from the fourth equation."""
    sigma = beta * ens.int_lambda
    ly_global = float(logit(sigma)) - lz
    x0, y0 = [], []
    for term in terms:
        if term.line is not None:
            ls, a, b = term.line
            x0.append(float(np.exp((ls - b * ly_global) / a)))
            y0.append(float(np.exp(ly_global)))
        elif term.lx is None:
            x0.append(float("nan"))
            y0.append(float("nan"))
        else:
            x0.append(float(np.exp(term.lx)))
            y0.append(float(np.exp(term.ly)))
    eps = tuple(float(g * weight_moments(t.code.wef, lz)[0]) for g, t in zip(ens.gamma, ens.cn_types))
    return TypeApportionment(
        alpha=alpha,
        beta=beta,
        alpha_t=tuple(alpha * w for w in weights),
        beta_t=tuple(term.beta_t for term in terms),
        eps_t=eps,
        z0=float(np.exp(lz)),
        x0_t=tuple(x0),
        y0_t=tuple(y0),
        evaluated=evaluated,
        skipped=skipped,
    )
