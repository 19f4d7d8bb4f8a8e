"""Minimal hand-emitted SVG line charts (no plotting dependency).

Diagnostic output only: axes, decade ticks, colored polylines, a text
legend.  Output is deterministic for identical inputs.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

_PALETTE = ("#1f6fb4", "#e08214", "#2a9d5c", "#c0392b", "#7d5ba6")
_W, _H = 720, 480
_ML, _MR, _MT, _MB = 70, 20, 40, 55


def _ticks_linear(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def _ticks_log(lo: float, hi: float) -> list[float]:
    lo_e = math.ceil(math.log10(lo) - 1e-12)
    hi_e = math.floor(math.log10(hi) + 1e-12)
    ticks = [10.0**e for e in range(lo_e, hi_e + 1)]
    return ticks or [lo, hi]


def line_chart(
    x: Sequence[float],
    series: Mapping[str, Sequence[float]],
    title: str,
    xlabel: str,
    ylabel: str,
    logx: bool = True,
) -> str:
    xs = [float(v) for v in x]
    tx = (lambda v: math.log10(v)) if logx else (lambda v: v)
    x_lo, x_hi = tx(min(xs)), tx(max(xs))
    ys_all = [float(v) for vals in series.values() for v in vals if math.isfinite(v)]
    y_lo, y_hi = min(ys_all), max(ys_all)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.06 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def px(v: float) -> float:
        return _ML + (tx(v) - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def py(v: float) -> float:
        return _H - _MB - (v - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
    ]

    x_ticks = _ticks_log(min(xs), max(xs)) if logx else _ticks_linear(min(xs), max(xs))
    for t in x_ticks:
        if not (min(xs) <= t <= max(xs)):
            continue
        xp = px(t)
        out.append(f'<line x1="{xp:.2f}" y1="{_H - _MB}" x2="{xp:.2f}" y2="{_H - _MB + 5}" stroke="black"/>')
        out.append(f'<text x="{xp:.2f}" y="{_H - _MB + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks_linear(y_lo, y_hi):
        yp = py(t)
        out.append(f'<line x1="{_ML - 5}" y1="{yp:.2f}" x2="{_ML}" y2="{yp:.2f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 8}" y="{yp + 4:.2f}" text-anchor="end">{t:.4g}</text>')
    out.append(
        f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>'
    )
    out.append(
        f'<text x="18" y="{(_MT + _H - _MB) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(_MT + _H - _MB) / 2:.1f})">{ylabel}</text>'
    )

    for idx, (label, vals) in enumerate(series.items()):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(
            f"{px(xv):.2f},{py(float(yv)):.2f}"
            for xv, yv in zip(xs, vals)
            if math.isfinite(float(yv))
        )
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.8"/>')
        lx, ly = _W - _MR - 150, _MT + 16 * (idx + 1)
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" stroke="{color}" stroke-width="1.8"/>')
        out.append(f'<text x="{lx + 30}" y="{ly}">{label}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_chart(path: str, *args, **kwargs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(line_chart(*args, **kwargs))
