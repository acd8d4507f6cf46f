# dgldpc.py
"""
Command-line front end for the D-GLDPC growth-rate toolkit.

Subcommands:
- code-info SPEC...        WEF / IO-WEF tables of a component code
- ensemble-info CONFIG     R, ∫λ, ∫ρ, y, C, V, C·V and classification
- growth CONFIG            G(α) sweep → <out>.csv + <out>.gp
- alpha-star CONFIG        relative minimum distance α*
- oracle lemma1|lemma2|finite-n|brute|max-s
- emit-config CONFIG       canonical schema-v1 JSON
- reproduce                published-value comparison for Ensembles 1 and 2

Examples:
  python dgldpc.py code-info spc 7 cyclic
  python dgldpc.py ensemble-info configs/ensemble1.json
  python dgldpc.py growth configs/ensemble2.json --points 100 --out ens2
  python dgldpc.py oracle lemma2 --code spc 7 cyclic --xi 1/7 --theta 2/7 --ell 175 350 700
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from src import oracle, saddle
from src.config import code_from_args, dump_config, load_config
from src.ensemble import instantiate
from src.errors import DGLDPCError, InvalidParameterError, NoCrossingError, StructuralZeroError
from src.gf2core import WeightEnumerator, make_repetition, make_spc
from src.settings import (
    ALPHA_STAR_RATIO, ALPHA_STAR_START, MAX_S_GRID, MAX_S_REFINEMENTS, PUBLISHED_ALPHA_STAR_ENSEMBLE_2,
    PUBLISHED_ALPHA_STAR_MATCH_TOL, PUBLISHED_CV_ENSEMBLE_1, PUBLISHED_CV_ENSEMBLE_2, PUBLISHED_RATE, PUBLISHED_SWEEP_SECONDS,
    SWEEP_ALPHA_MAX_FRACTION, SWEEP_ALPHA_MIN, SWEEP_POINTS,
)
from ui.components import (
    FORMATS, display_alpha_star, display_code_info, display_ensemble_info, display_lemma, display_max_s,
    render_frame, render_record, reproduction_frame, spectrum_frame,
)
from ui.growth_plot import curve_to_csv, write_growth_files

logger = logging.getLogger("dgldpc")


def _number(text: str) -> float:
    """Accepts decimals and ratios such as 1/7."""
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dgldpc",
        description="Growth rate of the weight distribution of irregular D-GLDPC ensembles",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Examples:" + __doc__.split("Examples:")[1],
    )
    parser.add_argument("--format", choices=FORMATS, default="table", help="Output format (default: table)")
    parser.add_argument("--verbose", "-v", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    parser.add_argument("--workers", type=int, default=1, help="Processes for the sweep polish pass (default: 1)")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("code-info", help="Print WEF / IO-WEF tables of a component code")
    p.add_argument("spec", nargs="+", help="repetition Q | spc Q [systematic|cyclic|antisystematic] | "
                                          "hamming74 | explicit ROW...")

    p = sub.add_parser("ensemble-info", help="Derived ensemble parameters and classification")
    p.add_argument("config")

    p = sub.add_parser("growth", help="Sweep G(alpha) and write CSV + gnuplot script")
    p.add_argument("config")
    p.add_argument("--points", type=int, default=SWEEP_POINTS, help=f"Grid size (default: {SWEEP_POINTS})")
    p.add_argument("--alpha-min", type=_number, default=SWEEP_ALPHA_MIN,
                   help=f"Smallest alpha (default: {SWEEP_ALPHA_MIN:g})")
    p.add_argument("--alpha-max", type=_number, default=None,
                   help=f"Largest alpha (default: {SWEEP_ALPHA_MAX_FRACTION:g}*y)")
    p.add_argument("--out", default=None, help="Output stem; writes <out>.csv and <out>.gp")
    p.add_argument("--bits", action="store_true", help="Plot H(gamma) = G(gamma*y)/y instead of G(alpha)")
    p.add_argument("--with-bits", action="store_true", help="Add gamma and H columns to the CSV")

    p = sub.add_parser("alpha-star", help="Ensemble relative minimum distance")
    p.add_argument("config")
    p.add_argument("--alpha-lo", type=_number, default=ALPHA_STAR_START,
                   help=f"First probe (default: {ALPHA_STAR_START:g})")
    p.add_argument("--ratio", type=float, default=ALPHA_STAR_RATIO,
                   help=f"Probe spacing (default: {ALPHA_STAR_RATIO:g})")
    p.add_argument("--scan", action="store_true", help="Scan for the sign change even if C*V classifies the ensemble")

    p = sub.add_parser("emit-config", help="Re-emit a config in canonical schema-v1 JSON")
    p.add_argument("config")

    p = sub.add_parser("reproduce", help="Compare Ensembles 1 and 2 with their published figures")
    p.add_argument("--configs-dir", default="configs", help="Directory with ensemble1.json / ensemble2.json")
    p.add_argument("--no-sweeps", action="store_true", help="Skip the 100-point timing sweeps")

    o = sub.add_parser("oracle", help="Exact / brute-force certificates").add_subparsers(dest="oracle")

    p = o.add_parser("lemma1", help="(1/l) log Coeff[A^l, x^(xi l)] against its limit")
    p.add_argument("--code", nargs="+", help="Component code spec (its WEF is used)")
    p.add_argument("--coeffs", help="WEF coefficients instead of a code, e.g. 1,0,1")
    p.add_argument("--xi", type=_number)
    p.add_argument("--ell", type=int, nargs="+")
    p.add_argument("--examples", action="store_true", help="Run the reference examples")

    p = o.add_parser("lemma2", help="Bivariate analogue on an IO-WEF")
    p.add_argument("--code", nargs="+")
    p.add_argument("--xi", type=_number)
    p.add_argument("--theta", type=_number)
    p.add_argument("--ell", type=int, nargs="+")
    p.add_argument("--examples", action="store_true", help="Run the reference examples")

    p = o.add_parser("finite-n", help="Exact (1/n) log E[N_w] against G(alpha)")
    p.add_argument("config")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--alpha", type=_number, required=True)

    p = o.add_parser("brute", help="Exact vs. brute-force expected spectrum on a tiny instance")
    p.add_argument("config")
    p.add_argument("--n", type=int, required=True)

    p = o.add_parser("max-s", help="Grid maximum of the pre-Lagrange objective against G(alpha)")
    p.add_argument("config")
    p.add_argument("--alpha", type=_number, required=True)
    p.add_argument("--grid", type=int, default=MAX_S_GRID, help=f"Points per axis (default: {MAX_S_GRID})")
    p.add_argument("--refinements", type=int, default=MAX_S_REFINEMENTS,
                   help=f"Refinement rounds (default: {MAX_S_REFINEMENTS})")
    return parser


# ── Subcommands ────────────────────────────────────────────────────────────

def cmd_code_info(args) -> None:
    print(display_code_info(code_from_args(args.spec), args.format), end="")


def cmd_ensemble_info(args) -> None:
    print(display_ensemble_info(load_config(args.config), args.format), end="")


def cmd_growth(args) -> None:
    ens = load_config(args.config)
    grid = saddle.default_grid(ens, args.points, args.alpha_min, args.alpha_max)
    curve = saddle.sweep(ens, grid, workers=args.workers)
    if args.out:
        csv_path, gp_path = write_growth_files(curve, args.out, bits=args.bits, with_bits=args.with_bits)
        print(f"Saved: {csv_path}")
        print(f"Saved: {gp_path}")
    else:
        print(curve_to_csv(curve, with_bits=args.with_bits), end="")
    failed = len(curve.failures())
    print(f"{len(curve.points)} points ({failed} failed) in {curve.seconds:.2f} s "
          f"[published: {PUBLISHED_SWEEP_SECONDS[0]} s / {PUBLISHED_SWEEP_SECONDS[1]} s per 100 points]",
          file=sys.stderr)
    for alpha in curve.zero_crossings():
        print(f"G changes sign near alpha = {alpha:.6g}", file=sys.stderr)


def cmd_alpha_star(args) -> None:
    ens = load_config(args.config)
    result = saddle.alpha_star(ens, alpha_lo=args.alpha_lo, ratio=args.ratio, use_classification=not args.scan)
    print(display_alpha_star(result, ens, args.format), end="")


def cmd_emit_config(args) -> None:
    print(dump_config(load_config(args.config)), end="")


def _lemma1_examples():
    rep2 = make_repetition(2).wef            # 1 + x^2
    spc7 = make_spc(7).wef
    return [
        (rep2, 1.0, 100, "A=1+x^2, xi=1, l=100 [DERIVED: C(l,l/2), Stirling]"),
        (rep2, 1.0, 101, "A=1+x^2, xi=1, l odd [TRIVIAL: structural zero]"),
        (spc7, 2.0, 500, "A=SPC-7 WEF, xi=2, l=500 [DERIVED: exact big-int oracle]"),
    ]


def _lemma2_examples():
    return [
        (make_repetition(2).iowef, 0.5, 1.0, 100, "B=1+xy^2, xi=1/2, theta=1 [TRIVIAL: C(l,l/2)]"),
        (make_repetition(3).iowef, 0.5, 1.0, 100, "B=1+xy^3, theta!=3xi [TRIVIAL: structural zero]"),
        (make_spc(7, "cyclic").iowef, 1 / 7, 2 / 7, 700, "B=SPC-7 (C), xi=1/7, theta=2/7, l=700 [DERIVED]"),
    ]


def _run_lemmas(cases, fn, fmt: str) -> None:
    for case in cases:
        *params, tag = case
        try:
            print(display_lemma(fn(*params), fmt, tag), end="")
        except StructuralZeroError as exc:
            print(render_record({"provenance": tag, "structural_zero": str(exc)}, fmt), end="")


def cmd_oracle_lemma1(args) -> None:
    if args.examples:
        _run_lemmas(_lemma1_examples(), oracle.lemma1_gap, args.format)
        return
    if args.xi is None or not args.ell or not (args.code or args.coeffs):
        raise InvalidParameterError("lemma1 needs --code or --coeffs, --xi and --ell (or --examples)")
    if args.coeffs:
        wef = WeightEnumerator(tuple(int(c) for c in args.coeffs.split(",")))
    else:
        wef = code_from_args(args.code).wef
    rows = []
    for ell in args.ell:
        r = oracle.lemma1_gap(wef, args.xi, ell)
        rows.append({"ell": ell, "finite": r.finite, "limit": r.limit, "gap": r.gap, "z": r.saddle[0]})
    print(render_frame(pd.DataFrame(rows), args.format), end="")


def cmd_oracle_lemma2(args) -> None:
    if args.examples:
        _run_lemmas(_lemma2_examples(), oracle.lemma2_gap, args.format)
        return
    if args.xi is None or args.theta is None or not args.ell or not args.code:
        raise InvalidParameterError("lemma2 needs --code, --xi, --theta and --ell (or --examples)")
    iowef = code_from_args(args.code).iowef
    rows = []
    for ell in args.ell:
        r = oracle.lemma2_gap(iowef, args.xi, args.theta, ell)
        rows.append({"ell": ell, "finite": r.finite, "limit": r.limit, "gap": r.gap,
                     "x0": r.saddle[0], "y0": r.saddle[1], "reduced": r.reduced})
    print(render_frame(pd.DataFrame(rows), args.format), end="")


def cmd_oracle_finite_n(args) -> None:
    ens = load_config(args.config)
    g = saddle.solve_at(ens, args.alpha).g_value
    rows = []
    for n in args.n:
        spectrum = oracle.exact_expected_spectrum(instantiate(ens, n))
        w = round(args.alpha * n)
        estimate = spectrum.growth_estimate(w)
        rows.append({"n": n, "w": w, "estimate": estimate, "G": g, "gap": abs(estimate - g)})
    print(render_frame(pd.DataFrame(rows), args.format), end="")


def cmd_oracle_brute(args) -> None:
    instance = instantiate(load_config(args.config), args.n)
    exact = oracle.exact_expected_spectrum(instance)
    brute = oracle.brute_force_spectrum(instance)
    df = spectrum_frame(exact)
    df["brute"] = [str(v) for v in brute.values]
    df["equal"] = [a == b for a, b in zip(exact.values, brute.values)]
    print(render_frame(df, args.format), end="")


def cmd_oracle_max_s(args) -> None:
    ens = load_config(args.config)
    value, appt = oracle.maximize_S(ens, args.alpha, args.grid, args.refinements)
    g = saddle.solve_at(ens, args.alpha).g_value
    print(display_max_s(value, appt, g, args.format), end="")


def cmd_reproduce(args) -> None:
    directory = Path(args.configs_dir)
    rows = []
    published_cv = {"Ensemble 1": PUBLISHED_CV_ENSEMBLE_1, "Ensemble 2": PUBLISHED_CV_ENSEMBLE_2}
    for stem, seconds in zip(("ensemble1", "ensemble2"), PUBLISHED_SWEEP_SECONDS):
        ens = load_config(directory / f"{stem}.json")
        name = ens.name
        rows.append([name, "R", ens.rate, PUBLISHED_RATE, _status(abs(ens.rate - PUBLISHED_RATE) <= 1e-4)])
        cv = ens.cv_product
        pub = published_cv.get(name)
        rows.append([name, "C*V", cv, pub, _status(cv is not None and pub is not None and abs(cv - pub) <= 0.01)])
        rows.append([name, "classification", ens.classification,
                     "bad" if name == "Ensemble 1" else "good", _status(
                         ens.classification == ("bad" if name == "Ensemble 1" else "good"))])
        astar = saddle.alpha_star(ens)
        pub_astar = 0.0 if name == "Ensemble 1" else PUBLISHED_ALPHA_STAR_ENSEMBLE_2
        rows.append([name, "alpha*", astar.value, pub_astar,
                     _status(abs(astar.value - pub_astar) <= PUBLISHED_ALPHA_STAR_MATCH_TOL)])
        try:
            scanned = saddle.alpha_star(ens, use_classification=False)
            rows.append([name, "alpha* (scan)", scanned.value, pub_astar,
                         _status(abs(scanned.value - pub_astar) <= PUBLISHED_ALPHA_STAR_MATCH_TOL)])
        except NoCrossingError as exc:
            rows.append([name, "alpha* (scan)", None, pub_astar, f"DISCREPANCY: {exc}"])
        if not args.no_sweeps:
            start = time.perf_counter()
            curve = saddle.sweep(ens, workers=args.workers)
            elapsed = time.perf_counter() - start
            rows.append([name, "sweep seconds (100 pts)", elapsed, seconds,
                         "ok" if curve.all_converged else f"{len(curve.failures())} failed"])
    df = reproduction_frame([dict(zip(["ensemble", "quantity", "computed", "published", "status"], r))
                             for r in rows])
    print(render_frame(df, args.format), end="")


def _status(ok: bool) -> str:
    return "match" if ok else "DISCREPANCY"


COMMANDS = {
    "code-info": cmd_code_info,
    "ensemble-info": cmd_ensemble_info,
    "growth": cmd_growth,
    "alpha-star": cmd_alpha_star,
    "emit-config": cmd_emit_config,
    "reproduce": cmd_reproduce,
}

ORACLE_COMMANDS = {
    "lemma1": cmd_oracle_lemma1,
    "lemma2": cmd_oracle_lemma2,
    "finite-n": cmd_oracle_finite_n,
    "brute": cmd_oracle_brute,
    "max-s": cmd_oracle_max_s,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)

    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s")
    logging.getLogger().setLevel(level)

    handler = COMMANDS.get(args.command)
    if args.command == "oracle":
        handler = ORACLE_COMMANDS.get(args.oracle)
    if handler is None:
        parser.print_help()
        return 1

    try:
        handler(args)
    except DGLDPCError as exc:
        logger.error("Command failed: %s", exc)
        if args.verbose:
            raise
        return exc.exit_code
    except Exception as exc:
        logger.error("Command failed: %s", exc)
        if args.verbose:
            raise
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
