"""
Growth-rate figure emission
- CSV of the sweep (one row per α, solver diagnostics included)
- gnuplot script drawing G(α) (or H(γ) with --bits) with a zero line
"""

from __future__ import annotations

from pathlib import Path
from typing import Tuple

from src.saddle import GrowthCurve

CSV_FLOAT_FORMAT = "%.12g"


def curve_to_csv(curve: GrowthCurve, with_bits: bool = False) -> str:
    return curve.to_frame(with_bits=with_bits).to_csv(index=False, float_format=CSV_FLOAT_FORMAT)


def gnuplot_script(csv_name: str, title: str, y: float, bits: bool = False) -> str:
    """Script reading ``csv_name`` (relative to the script's directory)."""
    if bits:
        xlabel, ylabel = "{/Symbol g}", "H({/Symbol g})"
        using = f"($1/{y:.15g}):($2/{y:.15g})"
        xmax = 1.0
    else:
        xlabel, ylabel = "{/Symbol a}", "G({/Symbol a})"
        using = "1:2"
        xmax = y
    stem = Path(csv_name).stem
    title = title.replace("'", "")
    return "\n".join([
        "# growth-rate curve; run with: gnuplot " + f"{stem}.gp",
        "set datafile separator ','",
        "set terminal pngcairo size 900,600 enhanced",
        f"set output '{stem}.png'",
        f"set title '{title}'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
        "set grid",
        "set key top left",
        f"set xrange [0:{xmax:.6g}]",
        "set key autotitle columnhead",
        # unconverged rows have an empty G field and are skipped as missing data
        f"plot '{csv_name}' using {using} with lines lw 2 title '{title}', \\",
        "     0 with lines lt -1 dt 2 notitle",
        "",
    ])


def write_growth_files(curve: GrowthCurve, out: str | Path, bits: bool = False,
                       with_bits: bool = False) -> Tuple[Path, Path]:
    """Write ``<out>.csv`` and ``<out>.gp``; returns both paths."""
    out = Path(out)
    stem = out.with_suffix("") if out.suffix in (".csv", ".gp") else out
    csv_path = stem.parent / f"{stem.name}.csv"
    gp_path = stem.parent / f"{stem.name}.gp"
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(curve_to_csv(curve, with_bits=with_bits))
    title = curve.ensemble.name or stem.name
    gp_path.write_text(gnuplot_script(csv_path.name, title, curve.ensemble.y, bits=bits))
    return csv_path, gp_path
