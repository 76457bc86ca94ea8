"""Plot-data emitters (CSV series) and a dependency-free SVG line plot."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from ..polar_dictionary import g_magnitude

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")


def coherence_plot(beta_max: float = 10.0, step: float = 0.01):
    """``(beta, |G(beta)|)`` samples on ``[0, beta_max]``."""
    beta = np.round(np.arange(0.0, beta_max + step / 2, step), 12)
    return beta, g_magnitude(beta)


def envelope_is_monotone(beta, g, window: float = 0.5, upto: float = 10.0) -> bool:
    """Max of ``g`` over ``[b, b + window]`` never increases for ``b = 0, window, ...``."""
    peaks = []
    for b in np.arange(0.0, upto + 1e-9, window):
        sel = (beta >= b - 1e-12) & (beta <= b + window + 1e-12)
        if sel.any():
            peaks.append(float(np.max(g[sel])))
    return all(p2 <= p1 + 1e-12 for p1, p2 in zip(peaks, peaks[1:]))


def write_coherence_plot(path: str | Path, beta_max: float = 10.0, step: float = 0.01) -> Path:
    path = Path(path)
    beta, g = coherence_plot(beta_max, step)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["beta", "g_magnitude"])
        w.writerows((repr(float(b)), repr(float(v))) for b, v in zip(beta, g))
    write_svg(path.with_suffix(".svg"), {"|G(beta)|": (beta, g)}, "beta", "|G(beta)|")
    return path


def write_svg(path: Path, series: dict, xlabel: str, ylabel: str, logx: bool = False) -> Path:
    width, height, pad = 640, 420, 60
    xs = np.concatenate([np.asarray(x, float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, float) for _, y in series.values()])
    ys = ys[np.isfinite(ys)]
    if logx:
        xs = np.log10(xs[xs > 0])
    x0, x1 = (float(xs.min()), float(xs.max())) if xs.size else (0.0, 1.0)
    y0, y1 = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def sx(x):
        x = math.log10(x) if logx else x
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
             f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle">{escape(xlabel)}</text>',
             f'<text x="15" y="{height / 2}" transform="rotate(-90 15 {height / 2})" '
             f'text-anchor="middle">{escape(ylabel)}</text>',
             f'<text x="{pad - 5}" y="{height - pad}" text-anchor="end" font-size="10">{y0:.3g}</text>',
             f'<text x="{pad - 5}" y="{pad}" text-anchor="end" font-size="10">{y1:.3g}</text>']
    for i, (name, (x, y)) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{sx(a):.1f},{sy(b):.1f}" for a, b in zip(x, y) if np.isfinite(b))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{width - pad + 5 - 120}" y="{pad + 15 * i}" fill="{color}" '
                     f'font-size="11">{escape(name)}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")
    return path


def write_outputs(out: Path, cfg, summary, traces, svg: bool = True) -> dict[str, Path]:
    stem = out.with_suffix("")
    paths: dict[str, Path] = {}

    summary_path = Path(f"{stem}.summary.csv")
    with summary_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "sweep_name", "sweep_value", "trials", "mean_nmse_linear",
                    "mean_nmse_db", "ci95_low_db", "ci95_high_db"])
        for r in summary:
            w.writerow([r.method, cfg.sweep, repr(r.sweep_value), r.trials, repr(r.mean_nmse),
                        repr(r.mean_nmse_db), repr(r.ci_low_db), repr(r.ci_high_db)])
    paths["summary"] = summary_path

    series = {}
    for r in summary:
        series.setdefault(r.method, []).append(r)
    for method, rows in series.items():
        p = Path(f"{stem}.{method}.series.csv")
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sweep_value", "mean_nmse_db", "ci95_low_db", "ci95_high_db"])
            for r in rows:
                w.writerow([repr(r.sweep_value), repr(r.mean_nmse_db), repr(r.ci_low_db),
                            repr(r.ci_high_db)])
        paths[f"series:{method}"] = p

    if traces:
        p = Path(f"{stem}.traces.csv")
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "sweep_value", "trial", "iteration", "objective"])
            for r in traces:
                for it, v in enumerate(r.trace):
                    w.writerow([r.method, repr(r.sweep_value), r.trial, it, repr(float(v))])
        paths["traces"] = p

    if svg and series:
        data = {m: ([r.sweep_value for r in rows], [r.mean_nmse_db for r in rows])
                for m, rows in series.items()}
        logx = cfg.sweep in ("distance", "sampling") and all(
            r.sweep_value > 0 for rows in series.values() for r in rows)
        paths["svg"] = write_svg(Path(f"{stem}.svg"), data, cfg.sweep, "NMSE (dB)", logx=logx)
    return paths
