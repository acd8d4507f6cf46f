# ui/components.py
"""Terminal renderings of codes, ensembles and oracle results (table / csv / json)."""
import json
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from src.ensemble import Ensemble
from src.gf2core import BinaryLinearCode
from src.oracle import FiniteSpectrum, LemmaResult, TypeApportionment
from src.saddle import AlphaStar
from src.settings import (
    PUBLISHED_ALPHA_STAR_ENSEMBLE_2, PUBLISHED_ALPHA_STAR_MATCH_TOL, PUBLISHED_CV_ENSEMBLE_1,
    PUBLISHED_CV_ENSEMBLE_2,
)
from src.wefalgebra import ExactPoly

FORMATS = ("table", "csv", "json")
FLOAT_FORMAT = "%.12g"

PUBLISHED_CV = {"Ensemble 1": PUBLISHED_CV_ENSEMBLE_1, "Ensemble 2": PUBLISHED_CV_ENSEMBLE_2}
CV_MATCH_TOL = 0.01


def render_frame(df: pd.DataFrame, fmt: str, index: bool = False) -> str:
    if fmt == "csv":
        return df.to_csv(index=index, float_format=FLOAT_FORMAT)
    if fmt == "json":
        return df.to_json(orient="records", indent=2, double_precision=15) + "\n"
    return df.to_string(index=index) + "\n"


def render_record(record: Dict, fmt: str) -> str:
    """One flat key/value record."""
    if fmt == "json":
        return json.dumps(record, indent=2, default=_jsonable) + "\n"
    df = pd.DataFrame({"field": list(record), "value": [_plain(v) for v in record.values()]})
    if fmt == "csv":
        return df.to_csv(index=False)
    width = max(len(k) for k in record)
    return "".join(f"{k:<{width}}  {_plain(v)}\n" for k, v in record.items())


def _plain(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (list, tuple)):
        return " ".join(str(_plain(x)) for x in v)
    return v


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return str(v)


# ── Codes ──────────────────────────────────────────────────────────────────

def display_code_info(code: BinaryLinearCode, fmt: str = "table") -> str:
    """WEF and IO-WEF tables, minimum distance and dimensions."""
    wef, iowef = code.wef, code.iowef
    b_u2 = [iowef[u, 2] if code.q >= 2 else 0 for u in range(1, code.k + 1)]
    info = {
        "label": code.describe(),
        "q": code.q,
        "k": code.k,
        "d_min": code.min_distance,
        "generator": code.rows_as_strings(),
        "A": list(wef.coeffs),
        "A(z)": str(ExactPoly.from_wef(wef)).replace("x", "z"),
        "B(x,y)": str(ExactPoly.from_iowef(iowef)),
        "B_u2": b_u2,
        "B_2": iowef.weight2_total,
    }
    table = iowef.as_frame()
    if fmt == "json":
        info["B"] = [list(row) for row in iowef.coeffs]
        return json.dumps(info, indent=2) + "\n"
    if fmt == "csv":
        long = table.stack().rename("B_uv").reset_index()
        return render_record(info, "csv") + long.to_csv(index=False)
    return (render_record(info, "table")
            + "\nIO-WEF B_{u,v} (rows u = input weight, columns v = output weight)\n"
            + table.to_string() + "\n")


# ── Ensembles ──────────────────────────────────────────────────────────────

def type_frame(ens: Ensemble) -> pd.DataFrame:
    rows = []
    for t, (vt, d) in enumerate(zip(ens.vn_types, ens.delta)):
        rows.append({"side": "vn", "type": t + 1, "code": vt.code.describe(), "q": vt.code.q,
                     "k": vt.code.k, "d_min": vt.code.min_distance, "fraction": vt.lam, "node_share": d})
    for t, (ct, g) in enumerate(zip(ens.cn_types, ens.gamma)):
        rows.append({"side": "cn", "type": t + 1, "code": ct.code.describe(), "q": ct.code.q,
                     "k": ct.code.k, "d_min": ct.code.min_distance, "fraction": ct.rho, "node_share": g})
    return pd.DataFrame(rows)


def cv_discrepancy(ens: Ensemble) -> Optional[str]:
    published = PUBLISHED_CV.get(ens.name)
    if published is None or ens.cv_product is None or abs(ens.cv_product - published) <= CV_MATCH_TOL:
        return None
    return (f"DISCREPANCY: published C*V = {published:g}; the listed edge fractions give "
            f"C*V = {ens.cv_product:.6g} and R = {ens.rate:.6f}")


def ensemble_record(ens: Ensemble) -> Dict:
    return {
        "name": ens.name,
        "R": ens.rate,
        "int_lambda": ens.int_lambda,
        "int_rho": ens.int_rho,
        "edges_per_vn": ens.edges_per_vn,
        "y": ens.y,
        "C": ens.C,
        "V": ens.V,
        "CV": ens.cv_product,
        "classification": ens.classification,
        "reason": ens.classification_reason,
    }


def display_ensemble_info(ens: Ensemble, fmt: str = "table") -> str:
    record = ensemble_record(ens)
    note = cv_discrepancy(ens)
    if note:
        record["note"] = note
    types = type_frame(ens)
    if fmt == "json":
        record["types"] = types.to_dict(orient="records")
        return json.dumps(record, indent=2, default=_jsonable) + "\n"
    if fmt == "csv":
        return render_record(record, "csv") + types.to_csv(index=False, float_format=FLOAT_FORMAT)
    cv = "n/a" if ens.cv_product is None else f"{ens.cv_product:.3f}"
    verdict = ("classification undetermined" if ens.classification == "undetermined"
               else f"asymptotically {ens.classification}")
    head = f"R={ens.rate:.6f}, C·V={cv}, {verdict}\n"
    out = head + "\n" + render_record(record, "table") + "\n" + types.to_string(index=False) + "\n"
    if note:
        out += "\n" + note + "\n"
    return out


# ── Results ────────────────────────────────────────────────────────────────

def display_alpha_star(result: AlphaStar, ens: Ensemble, fmt: str = "table") -> str:
    record = {
        "ensemble": ens.name,
        "alpha_star": result.value,
        "method": result.method,
        "classification": result.classification,
        "bracket": list(result.bracket) if result.bracket else None,
        "G_at_alpha_star": result.g_at_value,
        "probes": len(result.probes),
    }
    if ens.name == "Ensemble 2":
        record["published"] = PUBLISHED_ALPHA_STAR_ENSEMBLE_2
        record["matches_published"] = abs(result.value - PUBLISHED_ALPHA_STAR_ENSEMBLE_2) <= PUBLISHED_ALPHA_STAR_MATCH_TOL
    return render_record(record, fmt)


def display_lemma(result: LemmaResult, fmt: str = "table", tag: str = "") -> str:
    record = {
        "ell": result.ell,
        "finite": result.finite,
        "limit": result.limit,
        "gap": result.gap,
        "saddle": list(result.saddle),
        "reduced_to_line": result.reduced,
        "coefficient_digits": len(str(result.coefficient)),
    }
    if tag:
        record["provenance"] = tag
    return render_record(record, fmt)


def spectrum_frame(spectrum: FiniteSpectrum) -> pd.DataFrame:
    return pd.DataFrame({
        "w": range(len(spectrum)),
        "E_N_w": [str(v) for v in spectrum.values],
        "E_N_w_float": [float(v) for v in spectrum.values],
        "growth_estimate": [spectrum.growth_estimate(w) for w in range(len(spectrum))],
    })


def display_max_s(value: float, appt: TypeApportionment, g_value: Optional[float], fmt: str = "table") -> str:
    record = {
        "alpha": appt.alpha,
        "max_S": value,
        "G_saddle": g_value,
        "difference": None if g_value is None else value - g_value,
        "beta": appt.beta,
        "alpha_t": list(appt.alpha_t),
        "beta_t": list(appt.beta_t),
        "eps_t": list(appt.eps_t),
        "z0": appt.z0,
        "x0_t": list(appt.x0_t),
        "y0_t": list(appt.y0_t),
        "evaluated": appt.evaluated,
        "skipped": appt.skipped,
    }
    return render_record(record, fmt)


def reproduction_frame(rows: List[Dict]) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=["ensemble", "quantity", "computed", "published", "status"])
