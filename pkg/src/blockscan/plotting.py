"""Dependency-free SVG rendering of points and minimal significant rectangles.

The only <rect> elements in the output are the detection outlines, one per
minimal rectangle, so tests (and humans with grep) can count them; the
frame is drawn with <path>.  Label-1 points are red, label-0 black.
"""
from __future__ import annotations

from xml.sax.saxutils import escape

from .detection import Detection
from .model import Dataset

__all__ = ["render_svg", "write_svg"]

PANEL_W = 480.0
PANEL_H = 480.0
MARGIN = 40.0


def _bounds(dataset: Dataset, pad_frac: float = 0.04):
    x0, x1 = float(dataset.xs.min()), float(dataset.xs.max())
    y0, y1 = float(dataset.ys.min()), float(dataset.ys.max())
    dx = (x1 - x0) or 1.0
    dy = (y1 - y0) or 1.0
    return (x0 - pad_frac * dx, x1 + pad_frac * dx,
            y0 - pad_frac * dy, y1 + pad_frac * dy)


class _Panel:
    def __init__(self, x_off: float, bounds):
        self.x_off = x_off
        self.x0, self.x1, self.y0, self.y1 = bounds

    def px(self, x: float) -> float:
        return self.x_off + MARGIN + (x - self.x0) / (self.x1 - self.x0) * PANEL_W

    def py(self, y: float) -> float:
        # SVG y grows downward
        return MARGIN + (self.y1 - y) / (self.y1 - self.y0) * PANEL_H


def _panel_svg(panel: _Panel, dataset: Dataset, minimal: list[Detection],
               title: str) -> list[str]:
    out = []
    fx0, fy0 = panel.px(panel.x0), panel.py(panel.y1)
    out.append(
        f'<path d="M {fx0:.2f} {fy0:.2f} h {PANEL_W:.2f} v {PANEL_H:.2f} '
        f'h {-PANEL_W:.2f} Z" fill="none" stroke="#888" stroke-width="1"/>')
    out.append(f'<text x="{panel.px(panel.x0) + PANEL_W / 2:.2f}" y="{MARGIN - 12:.2f}" '
               f'text-anchor="middle" font-size="14">{escape(title)}</text>')
    for x, y, lab in zip(dataset.xs, dataset.ys, dataset.labels):
        color = "#d62728" if lab else "#000000"
        out.append(f'<circle cx="{panel.px(float(x)):.2f}" cy="{panel.py(float(y)):.2f}" '
                   f'r="1.6" fill="{color}"/>')
    for d in minimal:
        x = panel.px(d.x_lo)
        y = panel.py(d.y_hi)
        w = panel.px(d.x_hi) - x
        h = panel.py(d.y_lo) - y
        out.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" '
                   f'fill="none" stroke="#1f77b4" stroke-width="1.5"/>')
    return out


def render_svg(dataset: Dataset, panels: list[tuple[str, list[Detection]]]) -> str:
    """One SVG with a panel per (title, minimal detections) pair."""
    bounds = _bounds(dataset)
    total_w = len(panels) * (PANEL_W + 2 * MARGIN)
    total_h = PANEL_H + 2 * MARGIN
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w:.0f}" '
        f'height="{total_h:.0f}" viewBox="0 0 {total_w:.0f} {total_h:.0f}">',
    ]
    for pos, (title, minimal) in enumerate(panels):
        panel = _Panel(pos * (PANEL_W + 2 * MARGIN), bounds)
        parts.extend(_panel_svg(panel, dataset, minimal, title))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path: str, dataset: Dataset, panels) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_svg(dataset, panels))
