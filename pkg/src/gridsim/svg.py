"""Minimal deterministic SVG line charts.

Output depends only on the input data: fixed number formatting, no
timestamps, no random ids, so identical inputs give byte-identical files.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .errors import DomainError

WIDTH = 640
HEIGHT = 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 55
COLORS = ("#0072bd", "#d95319", "#edb120", "#7e2f8e", "#77ac30", "#4dbeee", "#a2142f")
N_TICKS = 5


@dataclass(frozen=True)
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]


@dataclass
class PlotSpec:
    series: list[Series] = field(default_factory=list)
    x_label: str = ""
    y_label: str = ""
    title: str = ""
    path: str | Path | None = None

    def __post_init__(self):
        for s in self.series:
            if len(s.x) != len(s.y):
                raise DomainError(f"series {s.label!r}: x and y lengths differ")
        if self.series and len({len(s.x) for s in self.series}) != 1:
            raise DomainError("all series must share the same x length")


def _num(v: float) -> str:
    return f"{v:.2f}"


def _bounds(values, pad=True):
    lo, hi = min(values), max(values)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    elif pad and lo > 0 and lo < 0.25 * hi:
        lo = 0.0
    return lo, hi


def render_svg(spec: PlotSpec) -> str:
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B
    xs = [float(v) for s in spec.series for v in s.x]
    ys = [float(v) for s in spec.series for v in s.y]
    x0, x1 = _bounds(xs, pad=False) if xs else (0.0, 1.0)
    y0, y1 = _bounds(ys) if ys else (0.0, 1.0)

    def px(x):
        return MARGIN_L + (x - x0) / (x1 - x0) * plot_w

    def py(y):
        return MARGIN_T + plot_h - (y - y0) / (y1 - y0) * plot_h

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    if spec.title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="22" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="15">{escape(spec.title)}</text>')
    # axes
    out.append(f'<g class="axes" stroke="#000000" stroke-width="1" fill="none">'
               f'<line x1="{MARGIN_L}" y1="{MARGIN_T + plot_h}" x2="{MARGIN_L + plot_w}" '
               f'y2="{MARGIN_T + plot_h}"/>'
               f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{MARGIN_T + plot_h}"/></g>')
    ticks = ['<g class="ticks" font-family="sans-serif" font-size="11" fill="#333333">']
    for k in range(N_TICKS + 1):
        xv = x0 + (x1 - x0) * k / N_TICKS
        yv = y0 + (y1 - y0) * k / N_TICKS
        ticks.append(f'<text x="{_num(px(xv))}" y="{MARGIN_T + plot_h + 16}" '
                     f'text-anchor="middle">{xv:.4g}</text>')
        ticks.append(f'<text x="{MARGIN_L - 6}" y="{_num(py(yv) + 4)}" '
                     f'text-anchor="end">{yv:.4g}</text>')
    ticks.append("</g>")
    out.extend(ticks)
    if spec.x_label:
        out.append(f'<text x="{MARGIN_L + plot_w / 2:.2f}" y="{HEIGHT - 12}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="13">{escape(spec.x_label)}</text>')
    if spec.y_label:
        out.append(f'<text x="16" y="{MARGIN_T + plot_h / 2:.2f}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="13" '
                   f'transform="rotate(-90 16 {MARGIN_T + plot_h / 2:.2f})">'
                   f'{escape(spec.y_label)}</text>')
    for k, s in enumerate(spec.series):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{_num(px(float(a)))},{_num(py(float(b)))}" for a, b in zip(s.x, s.y))
        out.append(f'<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{pts}"/>')
        ly = MARGIN_T + 14 + 16 * k
        out.append(f'<text x="{MARGIN_L + plot_w - 8}" y="{ly}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11" fill="{color}">'
                   f'{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(spec: PlotSpec, path=None) -> Path:
    if path is None and spec.path is None:
        raise DomainError("no output path given")
    target = Path(path if path is not None else spec.path)
    try:
        target.write_text(render_svg(spec))
    except OSError as exc:
        raise OSError(f"cannot write {target}: {exc.strerror}") from exc
    return target
