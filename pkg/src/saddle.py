# src/saddle.py – growth rate G(α) from the 4×4 saddle-point system
"""
Unknowns are carried as the state vector

    θ = (log x0, log y0, log z0, b),   b = logit(β·∫λ)

so every iterate is feasible (x0, y0, z0 > 0 and 0 < β∫λ < 1).
Residuals are log-ratios, in the order

    r_Z = log[(∫ρ/∫λ) Σ γ_t z A_t'/A_t]   − log β
    r_X = log[Σ δ_t x ∂_x B_t / B_t]      − log α
    r_Y = log[Σ δ_t y ∂_y B_t / B_t]      − log β
    r_W = b − log y0 − log z0              (β∫λ(1 + y0 z0) = y0 z0)

and the Jacobian is assembled from the tilted weight moments
(variances/covariances) supplied by wefalgebra.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq
from scipy.special import expit, log_expit, logit

from src.ensemble import Ensemble
from src.errors import DomainError, NoCrossingError, SolverError
from src.settings import (
    ALPHA_STAR_RATIO, ALPHA_STAR_START, ALPHA_STAR_TOL, LOG_SEARCH_SPAN, LOG_X_SCAN_POINTS,
    NESTED_BETA_PROBES, NEWTON_MAX_HALVINGS, NEWTON_MAX_STEPS, RESIDUAL_ACCEPT,
    RESIDUAL_TARGET, ROOT_XTOL, SWEEP_ALPHA_MAX_FRACTION, SWEEP_ALPHA_MIN, SWEEP_POINTS,
)
from src.wefalgebra import binary_entropy, io_means, io_moments, log_A_log, log_B_log, weight_moments

logger = logging.getLogger(__name__)

EQUATIONS = ("z", "x", "y", "w")
MAX_LOG_STEP = 10.0


@dataclass(frozen=True, eq=False)
class SaddlePoint:
    alpha: float
    x0: float
    y0: float
    z0: float
    beta: float
    residuals: np.ndarray
    g_value: float
    g_pre: float = float("nan")
    iterations: int = 0
    method: str = ""
    state: Tuple[float, float, float, float] = (np.nan,) * 4
    converged: bool = True
    error: str = ""

    @property
    def residual_max(self) -> float:
        return float(np.max(np.abs(self.residuals))) if self.converged else float("nan")

    @classmethod
    def failed(cls, alpha: float, error: str) -> "SaddlePoint":
        nan = float("nan")
        return cls(alpha=alpha, x0=nan, y0=nan, z0=nan, beta=nan,
                   residuals=np.full(4, np.nan), g_value=nan, converged=False, error=error)


@dataclass(eq=False)
class GrowthCurve:
    ensemble: Ensemble
    points: List[SaddlePoint]
    seconds: float = 0.0

    @property
    def alphas(self) -> np.ndarray:
        return np.array([p.alpha for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p.g_value for p in self.points])

    @property
    def all_converged(self) -> bool:
        return all(p.converged for p in self.points)

    def failures(self) -> List[SaddlePoint]:
        return [p for p in self.points if not p.converged]

    def zero_crossings(self) -> List[float]:
        """α values where consecutive converged points change sign (linear interpolation)."""
        pts = [p for p in self.points if p.converged]
        out = []
        for a, b in zip(pts, pts[1:]):
            if a.g_value < 0 <= b.g_value or b.g_value < 0 <= a.g_value:
                w = a.g_value / (a.g_value - b.g_value)
                out.append(a.alpha + w * (b.alpha - a.alpha))
        return out

    def to_frame(self, with_bits: bool = False) -> pd.DataFrame:
        df = pd.DataFrame({
            "alpha": [p.alpha for p in self.points],
            "G": [p.g_value for p in self.points],
            "x0": [p.x0 for p in self.points],
            "y0": [p.y0 for p in self.points],
            "z0": [p.z0 for p in self.points],
            "beta": [p.beta for p in self.points],
            "residual_max": [p.residual_max for p in self.points],
            "converged": [p.converged for p in self.points],
        })
        if with_bits:
            y = self.ensemble.y
            df["gamma"] = df["alpha"] / y
            df["H"] = df["G"] / y
        return df


# ── Model evaluation ───────────────────────────────────────────────────────

class _Model:
    """Precomputed ensemble quantities and the residual/Jacobian/G evaluators."""

    def __init__(self, ens: Ensemble):
        self.ens = ens
        self.delta = np.asarray(ens.delta, dtype=float)
        self.gamma = np.asarray(ens.gamma, dtype=float)
        self.vn = [t.code.iowef for t in ens.vn_types]
        self.cn = [t.code.wef for t in ens.cn_types]
        self.int_lambda = ens.int_lambda
        self.log_int_lambda = float(np.log(ens.int_lambda))
        self.m_over_n = ens.m_over_n

    def z_side(self, lz: float) -> Tuple[float, float]:
        """(S_z, dS_z/dlog z) for the z-equation LHS."""
        mom = np.array([weight_moments(w, lz) for w in self.cn])
        return (float(self.m_over_n * (self.gamma @ mom[:, 0])),
                float(self.m_over_n * (self.gamma @ mom[:, 1])))

    def vn_side(self, lx: float, ly: float) -> np.ndarray:
        """δ-weighted (E u, E v, Var u, Cov uv, Var v)."""
        mom = np.array([io_moments(b, lx, ly) for b in self.vn])
        return self.delta @ mom

    def vn_mean_y(self, lxs: np.ndarray, ly: float) -> np.ndarray:
        """δ-weighted E v over a grid of log x."""
        return sum(d * io_means(b, lxs, ly)[1] for d, b in zip(self.delta, self.vn))

    def log_beta(self, b: float) -> float:
        return float(log_expit(b)) - self.log_int_lambda

    def residuals(self, theta: np.ndarray, log_alpha: float) -> np.ndarray:
        lx, ly, lz, b = theta
        with np.errstate(divide="ignore", invalid="ignore"):
            sz, _ = self.z_side(lz)
            sx, sy, *_ = self.vn_side(lx, ly)
            lb = self.log_beta(b)
            return np.array([np.log(sz) - lb, np.log(sx) - log_alpha, np.log(sy) - lb, b - ly - lz])

    def jacobian(self, theta: np.ndarray) -> np.ndarray:
        lx, ly, lz, b = theta
        sz, dsz = self.z_side(lz)
        sx, sy, vu, cuv, vv = self.vn_side(lx, ly)
        dlb = float(expit(-b))          # d log β / d b = 1 − σ(b)
        return np.array([
            [0.0, 0.0, dsz / sz, -dlb],
            [vu / sx, cuv / sx, 0.0, 0.0],
            [cuv / sy, vv / sy, 0.0, -dlb],
            [0.0, -1.0, -1.0, 1.0],
        ])

    def growth(self, theta: np.ndarray, alpha: float) -> Tuple[float, float]:
        """(G in the final closed form, G in the pre-simplification form)."""
        lx, ly, lz, b = theta
        vn_term = float(sum(d * log_B_log(B, lx, ly) for d, B in zip(self.delta, self.vn)))
        cn_term = float(self.m_over_n * sum(g * log_A_log(A, lz) for g, A in zip(self.gamma, self.cn)))
        sigma = float(expit(b))
        beta = sigma / self.int_lambda
        g = vn_term - alpha * lx + cn_term + float(log_expit(-b)) / self.int_lambda
        g_pre = (vn_term - alpha * lx - beta * ly + cn_term - beta * lz
                 - binary_entropy(sigma) / self.int_lambda)
        return g, g_pre

    def point(self, theta: np.ndarray, alpha: float, r: np.ndarray, iterations: int, method: str) -> SaddlePoint:
        lx, ly, lz, b = (float(v) for v in theta)
        g, g_pre = self.growth(theta, alpha)
        return SaddlePoint(
            alpha=alpha, x0=float(np.exp(lx)), y0=float(np.exp(ly)), z0=float(np.exp(lz)),
            beta=float(expit(b)) / self.int_lambda, residuals=np.asarray(r, dtype=float),
            g_value=g, g_pre=g_pre, iterations=iterations, method=method, state=(lx, ly, lz, b),
        )


def _merit(r: np.ndarray) -> float:
    return float(np.max(np.abs(r))) if np.all(np.isfinite(r)) else np.inf


def _newton(model: _Model, alpha: float, theta0: np.ndarray,
            max_steps: int = NEWTON_MAX_STEPS, max_halvings: int = NEWTON_MAX_HALVINGS):
    """Damped Newton with step halving. Returns (θ, r, iterations)."""
    log_alpha = float(np.log(alpha))
    theta = np.asarray(theta0, dtype=float)
    r = model.residuals(theta, log_alpha)
    norm = _merit(r)
    it = 0
    for it in range(1, max_steps + 1):
        if norm < RESIDUAL_TARGET:
            break
        try:
            step = np.linalg.solve(model.jacobian(theta), -r)
        except np.linalg.LinAlgError:
            logger.debug("singular Jacobian at alpha=%g, iteration %d", alpha, it)
            break
        if not np.all(np.isfinite(step)):
            break
        biggest = np.max(np.abs(step))
        if biggest > MAX_LOG_STEP:
            step *= MAX_LOG_STEP / biggest
        t = 1.0
        for _ in range(max_halvings):
            cand = theta + t * step
            rc = model.residuals(cand, log_alpha)
            nc = _merit(rc)
            if nc < norm:
                theta, r, norm = cand, rc, nc
                break
            t *= 0.5
        else:
            break
        logger.debug("newton alpha=%g it=%d |r|=%.3e t=%g", alpha, it, norm, t)
    return theta, r, it


# ── Cold start: nested bisection ───────────────────────────────────────────

def _bracket_root(f, lo: float, hi: float, max_doublings: int = 4):
    """Widen [lo, hi] until f changes sign (f increasing); None if it never does."""
    flo, fhi = f(lo), f(hi)
    for _ in range(max_doublings):
        if flo <= 0 <= fhi:
            break
        if flo > 0:
            lo *= 2
            flo = f(lo)
        if fhi < 0:
            hi *= 2
            fhi = f(hi)
    if not (np.isfinite(flo) and np.isfinite(fhi)) or not flo <= 0 <= fhi:
        return None
    return lo, hi


def _solve_log_z(model: _Model, beta: float) -> Optional[float]:
    target = float(np.log(beta))

    def f(lz):
        with np.errstate(divide="ignore"):
            return float(np.log(model.z_side(lz)[0])) - target

    bracket = _bracket_root(f, -LOG_SEARCH_SPAN, LOG_SEARCH_SPAN)
    if bracket is None:
        return None
    return brentq(f, *bracket, xtol=ROOT_XTOL)


def _log_x_candidates(model: _Model, ly: float, beta: float) -> List[float]:
    """All roots in log x of the y-equation at fixed y0 (monotonicity is not assumed)."""
    target = float(np.log(beta))

    def f(lx):
        with np.errstate(divide="ignore"):
            return float(np.log(model.vn_side(lx, ly)[1])) - target

    grid = np.linspace(-LOG_SEARCH_SPAN, LOG_SEARCH_SPAN, LOG_X_SCAN_POINTS)
    with np.errstate(divide="ignore"):
        vals = np.log(model.vn_mean_y(grid, ly)) - target
    roots = []
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if not (np.isfinite(fa) and np.isfinite(fb)):
            continue
        if fa == 0:
            roots.append(float(a))
        elif fa * fb < 0:
            try:
                roots.append(brentq(f, a, b, xtol=ROOT_XTOL))
            except ValueError:
                roots.append(float(a - fa * (b - a) / (fb - fa)))
    return roots


def _inner_states(model: _Model, alpha: float, beta: float) -> List[np.ndarray]:
    """States (lx, ly, lz, b, outer residual) consistent with the z-, y- and fourth equations at β."""
    lz = _solve_log_z(model, beta)
    if lz is None:
        return []
    b = float(logit(beta * model.int_lambda))
    ly = b - lz
    out = []
    for lx in _log_x_candidates(model, ly, beta):
        with np.errstate(divide="ignore"):
            fout = float(np.log(model.vn_side(lx, ly)[0]) - np.log(alpha))
        out.append(np.array([lx, ly, lz, b, fout]))
    return out


def _cold_start(model: _Model, alpha: float) -> SaddlePoint:
    ens = model.ens
    probes = ens.beta_sup * expit(np.linspace(-30.0, 8.0, NESTED_BETA_PROBES))
    rows = [_inner_states(model, alpha, beta) for beta in probes]
    brackets = []
    for i in range(len(rows) - 1):
        if not rows[i + 1]:
            continue
        for c in rows[i]:
            d = min(rows[i + 1], key=lambda e: abs(e[0] - c[0]))
            if c[4] == 0 or c[4] * d[4] < 0:
                brackets.append((probes[i], probes[i + 1], c, d))
    logger.info("cold start at alpha=%g: %d beta bracket(s) from %d probes", alpha, len(brackets), len(probes))

    found: List[SaddlePoint] = []
    best_r = None
    for b_lo, b_hi, c, d in brackets:
        w = c[4] / (c[4] - d[4]) if c[4] != d[4] else 0.0
        theta0 = c[:4] + w * (d[:4] - c[:4])
        theta, r, it = _newton(model, alpha, theta0)
        if _merit(r) >= RESIDUAL_ACCEPT:
            def fout(beta, ref=c[0]):
                states = _inner_states(model, alpha, beta)
                if not states:
                    return np.nan
                return min(states, key=lambda e: abs(e[0] - ref))[4]
            try:
                beta_star = brentq(fout, b_lo, b_hi, xtol=1e-15, rtol=1e-13)
                states = _inner_states(model, alpha, beta_star)
                theta0 = min(states, key=lambda e: abs(e[0] - c[0]))[:4]
                theta, r, it = _newton(model, alpha, theta0)
            except (ValueError, RuntimeError):
                pass
        if best_r is None or _merit(r) < _merit(best_r):
            best_r = r
        if _merit(r) < RESIDUAL_ACCEPT:
            found.append(model.point(theta, alpha, r, it, "nested"))

    unique: List[SaddlePoint] = []
    for p in found:
        if not any(np.allclose(p.state, q.state, atol=1e-7) for q in unique):
            unique.append(p)
    if not unique:
        raise SolverError(
            f"no converged saddle point at alpha={alpha:g}",
            residuals=best_r,
            diagnostics={"beta_probes": len(probes), "brackets": len(brackets),
                         "beta_range": (float(probes[0]), float(probes[-1]))},
        )
    if len(unique) > 1:
        logger.warning("alpha=%g: %d distinct converged candidates; keeping the smallest residual",
                       alpha, len(unique))
    return min(unique, key=lambda p: p.residual_max)


# ── Public operations ──────────────────────────────────────────────────────

def _check_alpha(ens: Ensemble, alpha: float):
    if not 0.0 < alpha < ens.alpha_max:
        raise DomainError(f"alpha={alpha:g} outside (0, {ens.alpha_max:g})")


def solve_at(ens: Ensemble, alpha: float, warm_start: SaddlePoint | Sequence[float] | None = None,
             _model: _Model | None = None) -> SaddlePoint:
    """Solve the 4×4 system at α; warm_start is a previous SaddlePoint or state vector."""
    _check_alpha(ens, alpha)
    model = _model or _Model(ens)
    if warm_start is not None:
        state = warm_start.state if isinstance(warm_start, SaddlePoint) else warm_start
        if np.all(np.isfinite(state)):
            theta, r, it = _newton(model, alpha, np.asarray(state, dtype=float))
            if _merit(r) < RESIDUAL_ACCEPT:
                return model.point(theta, alpha, r, it, "newton-warm")
            logger.info("warm start failed at alpha=%g (|r|=%.2e); falling back to cold start",
                        alpha, _merit(r))
    return _cold_start(model, alpha)


def default_grid(ens: Ensemble, points: int = SWEEP_POINTS, alpha_min: float = SWEEP_ALPHA_MIN,
                 alpha_max: float | None = None) -> np.ndarray:
    hi = alpha_max if alpha_max is not None else SWEEP_ALPHA_MAX_FRACTION * ens.alpha_max
    if points == 1:
        return np.array([alpha_min])
    return np.geomspace(alpha_min, hi, points)


def _predict(prev: List[SaddlePoint], alpha: float) -> Optional[np.ndarray]:
    """Secant predictor in log α from the last two converged points."""
    if not prev:
        return None
    last = np.asarray(prev[-1].state)
    if len(prev) < 2:
        return last
    before = np.asarray(prev[-2].state)
    span = np.log(prev[-1].alpha) - np.log(prev[-2].alpha)
    if span == 0:
        return last
    return last + (last - before) * (np.log(alpha) - np.log(prev[-1].alpha)) / span


def _polish_point(args) -> Optional[SaddlePoint]:
    """Extra Newton pass from a converged state; None when the state is already at target."""
    ens, alpha, state = args
    model = _Model(ens)
    start = np.asarray(state, dtype=float)
    theta, r, it = _newton(model, alpha, start)
    if np.array_equal(theta, start):
        return None
    return model.point(theta, alpha, r, it, "polish")


def sweep(ens: Ensemble, alpha_grid: Sequence[float] | None = None, workers: int = 1) -> GrowthCurve:
    grid = np.asarray(default_grid(ens) if alpha_grid is None else alpha_grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise DomainError("alpha grid must be strictly increasing")
    model = _Model(ens)
    start = time.perf_counter()
    points: List[SaddlePoint] = []
    converged: List[SaddlePoint] = []
    for alpha in grid:
        alpha = float(alpha)
        try:
            _check_alpha(ens, alpha)
            guess = _predict(converged, alpha)
            point = None
            if guess is not None:
                theta, r, it = _newton(model, alpha, guess)
                if _merit(r) < RESIDUAL_ACCEPT:
                    point = model.point(theta, alpha, r, it, "newton-warm")
            if point is None:
                point = solve_at(ens, alpha, warm_start=converged[-1] if converged else None, _model=model)
            converged.append(point)
        except (SolverError, DomainError) as exc:
            logger.warning("sweep point alpha=%g failed: %s", alpha, exc)
            point = SaddlePoint.failed(alpha, str(exc))
        points.append(point)

    # polish at every worker count; the curve is identical for any value of workers
    jobs = [(ens, p.alpha, p.state) for p in points if p.converged]
    if workers > 1 and jobs:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            polished = list(pool.map(_polish_point, jobs))
    else:
        polished = [_polish_point(job) for job in jobs]
    results = iter(polished)
    points = [(next(results) or p) if p.converged else p for p in points]

    seconds = time.perf_counter() - start
    curve = GrowthCurve(ensemble=ens, points=points, seconds=seconds)
    logger.info("sweep of %d points on %s: %d converged in %.2f s",
                len(points), ens.name or "<unnamed>", len(points) - len(curve.failures()), seconds)
    return curve


def growth_rate(ens: Ensemble, alpha: float) -> float:
    return solve_at(ens, alpha).g_value


def growth_rate_bits(ens: Ensemble, gamma: float) -> float:
    """H(γ) = G(γ y)/y."""
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma={gamma:g} outside (0, 1)")
    return solve_at(ens, gamma * ens.y).g_value / ens.y


def growth_rate_bits_curve(curve: GrowthCurve) -> pd.DataFrame:
    y = curve.ensemble.y
    return pd.DataFrame({"gamma": curve.alphas / y, "H": curve.values / y})


@dataclass(frozen=True)
class AlphaStar:
    value: float
    method: str                      # "classification" | "scan" | "first-probe"
    classification: str
    bracket: Tuple[float, float] | None = None
    probes: Tuple[Tuple[float, float], ...] = ()
    g_at_value: float | None = None


def alpha_star(ens: Ensemble, alpha_lo: float = ALPHA_STAR_START, ratio: float = ALPHA_STAR_RATIO,
               use_classification: bool = True) -> AlphaStar:
    """Ensemble relative minimum distance inf{α > 0 : G(α) ≥ 0}."""
    cls = ens.classification
    if use_classification and cls == "bad":
        return AlphaStar(0.0, "classification", cls)

    model = _Model(ens)
    probes: List[Tuple[float, float]] = []
    prev: Optional[SaddlePoint] = None
    alpha = alpha_lo
    while alpha < ens.alpha_max:
        point = solve_at(ens, alpha, warm_start=prev, _model=model)
        probes.append((alpha, point.g_value))
        if point.g_value >= 0:
            if prev is None:
                return AlphaStar(0.0, "first-probe", cls, probes=tuple(probes), g_at_value=point.g_value)
            lo, hi = prev.alpha, alpha
            anchor = {"p": prev}

            def g(a):
                p = solve_at(ens, a, warm_start=anchor["p"], _model=model)
                anchor["p"] = p
                return p.g_value

            root = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            g_root = g(root)
            if abs(g_root) > ALPHA_STAR_TOL:
                logger.warning("alpha* bisection ended with |G|=%.2e", abs(g_root))
            logger.info("alpha* bracket [%g, %g] -> %.9g", lo, hi, root)
            return AlphaStar(root, "scan", cls, bracket=(lo, hi), probes=tuple(probes), g_at_value=g_root)
        prev = point
        alpha *= ratio
    raise NoCrossingError(
        f"no sign change of G below alpha_max={ens.alpha_max:g}",
        diagnostics={"probes": probes},
    )
