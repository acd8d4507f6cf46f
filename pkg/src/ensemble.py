# src/ensemble.py – irregular D-GLDPC ensemble model and derived parameters
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import DegenerateEnsembleError, InvalidParameterError, ValidationError
from src.gf2core import BinaryLinearCode
from src.settings import FRACTION_SUM_TOL

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VnType:
    code: BinaryLinearCode
    lam: float


@dataclass(frozen=True)
class CnType:
    code: BinaryLinearCode
    rho: float


def _rational(x: float) -> Fraction:
    """Decimal-derived rational for a stored fraction (0.055646 → 27823/500000)."""
    return Fraction(repr(float(x))).limit_denominator(10**9)


@dataclass(frozen=True, eq=False)
class Ensemble:
    vn_types: Tuple[VnType, ...]
    cn_types: Tuple[CnType, ...]
    int_lambda: float
    int_rho: float
    gamma: np.ndarray
    delta: np.ndarray
    y: float
    rate: float
    C: Optional[float]
    V: Optional[float]
    name: str = ""

    # ── derived views ──────────────────────────────────────────────────────
    @property
    def alpha_max(self) -> float:
        return self.y

    @property
    def m_over_n(self) -> float:
        """CNs per VN, ∫ρ/∫λ."""
        return self.int_rho / self.int_lambda

    @property
    def edges_per_vn(self) -> float:
        """Average VN degree, 1/∫λ; β never exceeds it."""
        return 1.0 / self.int_lambda

    @property
    def cn_max_weights(self) -> np.ndarray:
        return np.array([t.code.wef.degree for t in self.cn_types], dtype=float)

    @property
    def z_lhs_sup(self) -> float:
        """Supremum over z of the z-equation LHS, (∫ρ/∫λ)·Σ γ_t d_t."""
        return float(self.m_over_n * (self.gamma @ self.cn_max_weights))

    @property
    def beta_sup(self) -> float:
        return min(self.edges_per_vn, self.z_lhs_sup)

    @property
    def cv_product(self) -> Optional[float]:
        if self.C is None or self.V is None:
            return None
        return self.C * self.V

    @property
    def classification(self) -> str:
        return _classify(self)[0]

    @property
    def classification_reason(self) -> str:
        return _classify(self)[1]

    def lambda_poly(self) -> Dict[int, float]:
        """λ(x) as {exponent: coefficient}, exponent q_t − 1."""
        poly: Dict[int, float] = {}
        for t in self.vn_types:
            poly[t.code.q - 1] = poly.get(t.code.q - 1, 0.0) + t.lam
        return dict(sorted(poly.items()))

    def rho_poly(self) -> Dict[int, float]:
        poly: Dict[int, float] = {}
        for t in self.cn_types:
            poly[t.code.q - 1] = poly.get(t.code.q - 1, 0.0) + t.rho
        return dict(sorted(poly.items()))

    def lambdas_from_deltas(self) -> np.ndarray:
        q = np.array([t.code.q for t in self.vn_types], dtype=float)
        weights = self.delta * q
        return weights / weights.sum()

    def rate_exact(self) -> Fraction:
        """Design rate on the normalised decimal-derived fractions."""
        lam, rho = normalized_fractions(self)
        num = sum(r * (1 - Fraction(t.code.k, t.code.q)) for r, t in zip(rho, self.cn_types))
        den = sum(l * Fraction(t.code.k, t.code.q) for l, t in zip(lam, self.vn_types))
        return 1 - num / den


def _classify(ens: Ensemble) -> Tuple[str, str]:
    dmins = [t.code.min_distance for t in ens.vn_types] + [t.code.min_distance for t in ens.cn_types]
    if any(d is None or d < 2 for d in dmins):
        return "undetermined", "a component code has minimum distance 1"
    if ens.C is None or ens.V is None:
        side = "CNs" if ens.C is None else "VNs"
        return "good", f"no {side} with minimum distance 2"
    cv = ens.C * ens.V
    if cv < 1.0:
        return "good", f"C*V = {cv:.6g} < 1"
    return "bad", f"C*V = {cv:.6g} >= 1"


def build(vn_types: Sequence[VnType], cn_types: Sequence[CnType], name: str = "") -> Ensemble:
    if not vn_types or not cn_types:
        raise ValidationError("an ensemble needs at least one VN type and one CN type")
    for side, types, attr in (("vn", vn_types, "lam"), ("cn", cn_types, "rho")):
        for i, t in enumerate(types):
            frac = getattr(t, attr)
            if not 0.0 < frac <= 1.0:
                raise ValidationError(f"edge fraction must lie in (0, 1], got {frac}", f"{side}[{i}]")
            if t.code.q < 2:
                raise ValidationError(f"node code length must be >= 2, got {t.code.q}", f"{side}[{i}]")
        total = sum(_rational(getattr(t, attr)) for t in types)
        if abs(total - 1) > _rational(FRACTION_SUM_TOL):
            raise ValidationError(
                f"{'lambda' if side == 'vn' else 'rho'} fractions sum to {float(total):.9f} "
                f"(deficit {float(1 - total):+.3e}, tolerance {FRACTION_SUM_TOL:g})",
                side,
            )

    lam = np.array([t.lam for t in vn_types], dtype=float)
    rho = np.array([t.rho for t in cn_types], dtype=float)
    q = np.array([t.code.q for t in vn_types], dtype=float)
    k = np.array([t.code.k for t in vn_types], dtype=float)
    s = np.array([t.code.q for t in cn_types], dtype=float)
    h = np.array([t.code.k for t in cn_types], dtype=float)

    int_lambda = float(np.sum(lam / q))
    int_rho = float(np.sum(rho / s))
    delta = lam / (q * int_lambda)
    gamma = rho / (s * int_rho)
    y = float(np.sum(lam * k / q) / int_lambda)
    rate = float(1.0 - np.sum(rho * (1.0 - h / s)) / np.sum(lam * k / q))

    cn_d2 = [t for t in cn_types if t.code.min_distance == 2]
    vn_d2 = [t for t in vn_types if t.code.min_distance == 2]
    C = 2.0 * sum(t.rho * t.code.wef.weight2 / t.code.q for t in cn_d2) if cn_d2 else None
    V = 2.0 * sum(t.lam * t.code.iowef.weight2_total / t.code.q for t in vn_d2) if vn_d2 else None

    if rate <= 0.0:
        raise DegenerateEnsembleError(f"design rate R = {rate:.6g} is not positive")

    ens = Ensemble(
        vn_types=tuple(vn_types),
        cn_types=tuple(cn_types),
        int_lambda=int_lambda,
        int_rho=int_rho,
        gamma=gamma,
        delta=delta,
        y=y,
        rate=rate,
        C=C,
        V=V,
        name=name,
    )
    logger.info("Built ensemble %s: R=%.6f, y=%.6f, C=%s, V=%s (%s)",
                name or "<unnamed>", rate, y, C, V, ens.classification)
    return ens


# ── Finite instances ───────────────────────────────────────────────────────

def normalized_fractions(ens: Ensemble) -> Tuple[List[Fraction], List[Fraction]]:
    lam = [_rational(t.lam) for t in ens.vn_types]
    rho = [_rational(t.rho) for t in ens.cn_types]
    lam_total, rho_total = sum(lam), sum(rho)
    return [l / lam_total for l in lam], [r / rho_total for r in rho]


def _node_fractions(ens: Ensemble) -> Tuple[List[Fraction], List[Fraction]]:
    """VNs of each type per VN, and CNs of each type per VN (exact)."""
    lam, rho = normalized_fractions(ens)
    int_lam = sum(l / t.code.q for l, t in zip(lam, ens.vn_types))
    per_vn = [(l / t.code.q) / int_lam for l, t in zip(lam, ens.vn_types)]
    per_cn = [(r / t.code.q) / int_lam for r, t in zip(rho, ens.cn_types)]
    return per_vn, per_cn


def smallest_valid_n(ens: Ensemble) -> int:
    per_vn, per_cn = _node_fractions(ens)
    return lcm(*(f.denominator for f in per_vn + per_cn))


@dataclass(frozen=True, eq=False)
class FiniteInstance:
    ensemble: Ensemble
    n: int
    vn_counts: Tuple[int, ...]
    cn_counts: Tuple[int, ...]
    E: int
    m: int
    N: int
    M: int
    design_rate: Fraction = field(default=Fraction(0))

    @property
    def vn_codes(self) -> List[BinaryLinearCode]:
        return [t.code for t in self.ensemble.vn_types]

    @property
    def cn_codes(self) -> List[BinaryLinearCode]:
        return [t.code for t in self.ensemble.cn_types]


def instantiate(ens: Ensemble, n: int) -> FiniteInstance:
    if n < 1:
        raise InvalidParameterError(f"VN count must be positive, got {n}")
    per_vn, per_cn = _node_fractions(ens)
    vn_counts = [n * f for f in per_vn]
    cn_counts = [n * f for f in per_cn]
    if any(c.denominator != 1 for c in vn_counts + cn_counts):
        n0 = smallest_valid_n(ens)
        err = InvalidParameterError(
            f"n={n} gives non-integer node counts; valid n are multiples of {n0}"
        )
        err.smallest_n = n0
        raise err
    vn_counts = [int(c) for c in vn_counts]
    cn_counts = [int(c) for c in cn_counts]
    E = sum(c * t.code.q for c, t in zip(vn_counts, ens.vn_types))
    E_check = sum(c * t.code.q for c, t in zip(cn_counts, ens.cn_types))
    assert E == E_check, (E, E_check)
    N = sum(c * t.code.k for c, t in zip(vn_counts, ens.vn_types))
    M = sum(c * (t.code.q - t.code.k) for c, t in zip(cn_counts, ens.cn_types))
    return FiniteInstance(
        ensemble=ens,
        n=n,
        vn_counts=tuple(vn_counts),
        cn_counts=tuple(cn_counts),
        E=E,
        m=sum(cn_counts),
        N=N,
        M=M,
        design_rate=1 - Fraction(M, N),
    )
