"""Self-contained SVG line charts (no plotting dependency)."""
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union
from xml.sax.saxutils import escape
import logging
import math

import numpy as np

logger = logging.getLogger(__name__)

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"]
MARGIN = {"left": 70, "right": 160, "top": 40, "bottom": 50}

Series = Dict[str, Tuple[Sequence[float], Sequence[float]]]


def _nice_ticks(lo: float, hi: float, count: int = 5) -> List[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    base = 10 ** math.floor(math.log10(raw))
    step = min((b * base for b in (1, 2, 5, 10) if b * base >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [round(v, 12) for v in np.arange(start, hi + step / 2, step)]


def _log_ticks(lo: float, hi: float) -> List[float]:
    return [10.0 ** k for k in range(math.floor(lo), math.ceil(hi) + 1) if lo <= k <= hi] or [10.0 ** lo]


def _fmt(value: float) -> str:
    return f"{value:.3g}"


def line_chart(
    series: Series,
    title: str,
    x_label: str,
    y_label: str,
    log_x: bool = False,
    log_y: bool = False,
    width: int = 720,
    height: int = 440,
) -> str:
    """One polyline per series. On log axes, non-positive points are left out."""
    cleaned = {}
    for name, (xs, ys) in series.items():
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        keep = np.isfinite(xs) & np.isfinite(ys)
        if log_x:
            keep &= xs > 0
        if log_y:
            keep &= ys > 0
        if keep.sum() < len(xs):
            logger.debug(f"{title}: left out {len(xs) - int(keep.sum())} points of {name}")
        if keep.any():
            cleaned[name] = (np.log10(xs[keep]) if log_x else xs[keep], np.log10(ys[keep]) if log_y else ys[keep])

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
    ]
    left, top = MARGIN["left"], MARGIN["top"]
    plot_w = width - MARGIN["left"] - MARGIN["right"]
    plot_h = height - MARGIN["top"] - MARGIN["bottom"]

    if not cleaned:
        parts.append(f'<text x="{width / 2:.1f}" y="{height / 2:.1f}" text-anchor="middle">no data</text></svg>')
        return "\n".join(parts)

    all_x = np.concatenate([x for x, _ in cleaned.values()])
    all_y = np.concatenate([y for _, y in cleaned.values()])
    x_lo, x_hi = float(all_x.min()), float(all_x.max())
    y_lo, y_hi = float(all_y.min()), float(all_y.max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    def px(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return top + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts.append(f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>')

    x_ticks = [math.log10(v) for v in _log_ticks(x_lo, x_hi)] if log_x else _nice_ticks(x_lo, x_hi)
    y_ticks = [math.log10(v) for v in _log_ticks(y_lo, y_hi)] if log_y else _nice_ticks(y_lo, y_hi)
    for tick in x_ticks:
        if x_lo <= tick <= x_hi:
            label = _fmt(10 ** tick) if log_x else _fmt(tick)
            parts.append(f'<line x1="{px(tick):.1f}" y1="{top}" x2="{px(tick):.1f}" y2="{top + plot_h}" stroke="#ddd"/>')
            parts.append(f'<text x="{px(tick):.1f}" y="{top + plot_h + 16}" text-anchor="middle">{label}</text>')
    for tick in y_ticks:
        if y_lo <= tick <= y_hi:
            label = _fmt(10 ** tick) if log_y else _fmt(tick)
            parts.append(f'<line x1="{left}" y1="{py(tick):.1f}" x2="{left + plot_w}" y2="{py(tick):.1f}" stroke="#ddd"/>')
            parts.append(f'<text x="{left - 6}" y="{py(tick) + 4:.1f}" text-anchor="end">{label}</text>')

    parts.append(
        f'<text x="{left + plot_w / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(x_label)}</text>'
    )
    parts.append(
        f'<text x="16" y="{top + plot_h / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + plot_h / 2:.1f})">{escape(y_label)}</text>'
    )

    for k, (name, (xs, ys)) in enumerate(cleaned.items()):
        color = PALETTE[k % len(PALETTE)]
        points = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.8"/>')
        legend_y = top + 14 + 18 * k
        parts.append(
            f'<line x1="{left + plot_w + 12}" y1="{legend_y}" x2="{left + plot_w + 34}" y2="{legend_y}" '
            f'stroke="{color}" stroke-width="2.5"/>'
        )
        parts.append(f'<text x="{left + plot_w + 40}" y="{legend_y + 4}">{escape(name)}</text>')

    parts.append("</svg>")
    return "\n".join(parts)


def write_chart(path: Union[str, Path], series: Series, **kwargs) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(line_chart(series, **kwargs))
    logger.info(f"Wrote chart {path}")
