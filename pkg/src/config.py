# src/config.py – ensemble description files (JSON schema v1) and code specs
"""
Schema v1:

    {
      "schema": 1,
      "name": "Ensemble 1",
      "vn": [{"code": {"kind": "repetition", "q": 2}, "lambda": 0.055646}, ...],
      "cn": [{"code": {"kind": "hamming74"}, "rho": 0.965221}, ...]
    }

Code kinds: repetition {q}, spc {q, form}, hamming74 {}, explicit {rows}.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence

from src.ensemble import CnType, Ensemble, VnType, build
from src.errors import InvalidParameterError, ValidationError
from src.gf2core import SPC_FORMS, BinaryLinearCode, make_explicit, make_hamming_7_4, make_repetition, make_spc

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CODE_KINDS = ("repetition", "spc", "hamming74", "explicit")


def _require(obj: Dict[str, Any], key: str, path: str):
    if key not in obj:
        raise ValidationError(f"missing field {key!r}", path)
    return obj[key]


def _int_field(obj: Dict[str, Any], key: str, path: str) -> int:
    value = _require(obj, key, path)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{key!r} must be an integer, got {value!r}", f"{path}.{key}")
    return value


def code_from_spec(spec: Dict[str, Any], path: str = "code") -> BinaryLinearCode:
    if not isinstance(spec, dict):
        raise ValidationError("code spec must be an object", path)
    kind = _require(spec, "kind", path)
    try:
        if kind == "repetition":
            return make_repetition(_int_field(spec, "q", path))
        if kind == "spc":
            return make_spc(_int_field(spec, "q", path), spec.get("form", "systematic"))
        if kind == "hamming74":
            return make_hamming_7_4()
        if kind == "explicit":
            rows = _require(spec, "rows", path)
            if not isinstance(rows, list) or not all(isinstance(r, str) for r in rows):
                raise ValidationError("'rows' must be a list of bitstrings", f"{path}.rows")
            return make_explicit(rows, spec.get("label", ""))
    except ValidationError:
        raise
    except InvalidParameterError as exc:
        raise ValidationError(str(exc), path) from exc
    raise ValidationError(f"unknown code kind {kind!r}; expected one of {', '.join(CODE_KINDS)}", f"{path}.kind")


def code_to_spec(code: BinaryLinearCode) -> Dict[str, Any]:
    """Canonical spec; named constructions are recognised by their generator rows."""
    if code.k == 1 and code.rows[0] == (1 << code.q) - 1:
        return {"kind": "repetition", "q": code.q}
    if code.q >= 3 and code.k == code.q - 1:
        for form in SPC_FORMS:
            try:
                if make_spc(code.q, form).rows == code.rows:
                    return {"kind": "spc", "q": code.q, "form": form}
            except InvalidParameterError:
                continue
    if code.rows == make_hamming_7_4().rows and code.q == 7:
        return {"kind": "hamming74"}
    spec: Dict[str, Any] = {"kind": "explicit", "rows": code.rows_as_strings()}
    if code.label:
        spec["label"] = code.label
    return spec


def code_from_args(args: Sequence[str]) -> BinaryLinearCode:
    """CLI form: ``repetition 2``, ``spc 7 cyclic``, ``hamming74``, ``explicit 110 011``."""
    if not args:
        raise ValidationError("empty code spec")
    kind, rest = args[0], list(args[1:])
    path = "code-spec"
    if kind in ("repetition", "spc"):
        if not rest or not rest[0].isdigit():
            raise ValidationError(f"{kind} needs a length, e.g. '{kind} 7'", path)
        spec: Dict[str, Any] = {"kind": kind, "q": int(rest[0])}
        if kind == "spc" and len(rest) > 1:
            spec["form"] = rest[1]
        return code_from_spec(spec, path)
    if kind == "explicit":
        return code_from_spec({"kind": "explicit", "rows": rest}, path)
    return code_from_spec({"kind": kind}, path)


def _types(entries: Any, side: str) -> List:
    frac_key = "lambda" if side == "vn" else "rho"
    if not isinstance(entries, list) or not entries:
        raise ValidationError(f"'{side}' must be a non-empty list", side)
    out = []
    for i, entry in enumerate(entries):
        path = f"{side}[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError("entry must be an object", path)
        code = code_from_spec(_require(entry, "code", path), f"{path}.code")
        frac = _require(entry, frac_key, path)
        if isinstance(frac, bool) or not isinstance(frac, (int, float)):
            raise ValidationError(f"'{frac_key}' must be a number, got {frac!r}", f"{path}.{frac_key}")
        out.append(VnType(code, float(frac)) if side == "vn" else CnType(code, float(frac)))
    return out


def ensemble_from_config(data: Dict[str, Any], default_name: str = "") -> Ensemble:
    if not isinstance(data, dict):
        raise ValidationError("top level must be an object")
    schema = data.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema version {schema!r}", "schema")
    unknown = set(data) - {"schema", "name", "vn", "cn", "comment"}
    if unknown:
        raise ValidationError(f"unknown field(s) {', '.join(sorted(unknown))}")
    vn = _types(_require(data, "vn", "$"), "vn")
    cn = _types(_require(data, "cn", "$"), "cn")
    return build(vn, cn, name=data.get("name", default_name))


def load_config(path: str | Path) -> Ensemble:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc.strerror}", str(path)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from exc
    logger.info("Loaded config %s", path)
    return ensemble_from_config(data, default_name=path.stem)


def ensemble_to_config(ens: Ensemble) -> Dict[str, Any]:
    return {
        "schema": SCHEMA_VERSION,
        "name": ens.name,
        "vn": [{"code": code_to_spec(t.code), "lambda": t.lam} for t in ens.vn_types],
        "cn": [{"code": code_to_spec(t.code), "rho": t.rho} for t in ens.cn_types],
    }


def dump_config(ens: Ensemble) -> str:
    return json.dumps(ensemble_to_config(ens), indent=2) + "\n"
