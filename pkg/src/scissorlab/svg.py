"""Minimal deterministic SVG rendering for curves and simple plots.

Hand-emitted markup with no dependencies: each figure is a grid of panels,
each panel a framed data window with its curves drawn as polylines, a small
legend, and the data ranges printed in the corners. Coordinates are
formatted with fixed precision so identical inputs produce byte-identical
files (part of the reproducibility contract of the command-line tools).

The y axis points up (data convention), so curves are flipped into SVG's
screen coordinates during layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError

__all__ = ["Curve", "Panel", "render_svg"]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#17becf")

PANEL_W = 360
PANEL_H = 300
PAD = 44
FONT = "font-family=\"Helvetica, Arial, sans-serif\""


@dataclass(frozen=True)
class Curve:
    """One labeled polyline; ``closed`` joins the last point to the first."""

    label: str
    points: tuple
    closed: bool = False
    dashed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "points",
                           tuple((float(x), float(y))
                                 for x, y in self.points))
        if len(self.points) < 2:
            raise DomainError(f"curve {self.label!r} needs >= 2 points")


@dataclass(frozen=True)
class Panel:
    """A framed data window. ``equal_axes`` keeps x and y scales identical
    (geometry); disable it for profile plots."""

    title: str
    curves: tuple
    equal_axes: bool = True

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))
        if not self.curves:
            raise DomainError(f"panel {self.title!r} has no curves")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _rng(v: float) -> str:
    return f"{v:.4g}"


def _panel_svg(panel: Panel, ox: float, oy: float, parts: list) -> None:
    xs = [p[0] for c in panel.curves for p in c.points]
    ys = [p[1] for c in panel.curves for p in c.points]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    dx = x1 - x0 or 1.0
    dy = y1 - y0 or 1.0
    # 5% data margin
    x0, x1 = x0 - 0.05 * dx, x1 + 0.05 * dx
    y0, y1 = y0 - 0.05 * dy, y1 + 0.05 * dy
    w = PANEL_W - 2 * PAD
    h = PANEL_H - 2 * PAD
    sx = w / (x1 - x0)
    sy = h / (y1 - y0)
    if panel.equal_axes:
        s = min(sx, sy)
        cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        x0, x1 = cx - 0.5 * w / s, cx + 0.5 * w / s
        y0, y1 = cy - 0.5 * h / s, cy + 0.5 * h / s
        sx = sy = s

    def px(x):
        return ox + PAD + (x - x0) * sx

    def py(y):
        return oy + PANEL_H - PAD - (y - y0) * sy

    parts.append(f'<rect x="{_fmt(ox + PAD)}" y="{_fmt(oy + PAD)}" '
                 f'width="{_fmt(w)}" height="{_fmt(h)}" fill="none" '
                 f'stroke="#888" stroke-width="1"/>')
    parts.append(f'<text x="{_fmt(ox + PANEL_W / 2)}" y="{_fmt(oy + 24)}" '
                 f'text-anchor="middle" font-size="14" {FONT}>'
                 f'{panel.title}</text>')
    # corner range labels
    parts.append(f'<text x="{_fmt(ox + PAD)}" y="{_fmt(oy + PANEL_H - 8)}" '
                 f'font-size="10" fill="#666" {FONT}>{_rng(x0)}</text>')
    parts.append(f'<text x="{_fmt(ox + PANEL_W - PAD)}" '
                 f'y="{_fmt(oy + PANEL_H - 8)}" text-anchor="end" '
                 f'font-size="10" fill="#666" {FONT}>{_rng(x1)}</text>')
    parts.append(f'<text x="{_fmt(ox + 6)}" y="{_fmt(oy + PANEL_H - PAD)}" '
                 f'font-size="10" fill="#666" {FONT}>{_rng(y0)}</text>')
    parts.append(f'<text x="{_fmt(ox + 6)}" y="{_fmt(oy + PAD + 10)}" '
                 f'font-size="10" fill="#666" {FONT}>{_rng(y1)}</text>')

    for i, curve in enumerate(panel.curves):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}"
                          for x, y in curve.points)
        tag = "polygon" if curve.closed else "polyline"
        dash = ' stroke-dasharray="6 4"' if curve.dashed else ""
        parts.append(f'<{tag} points="{coords}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"{dash}/>')
        parts.append(f'<text x="{_fmt(ox + PANEL_W - PAD)}" '
                     f'y="{_fmt(oy + PAD + 14 + 13 * i)}" text-anchor="end" '
                     f'font-size="11" fill="{color}" {FONT}>'
                     f'{curve.label}</text>')


def render_svg(panels, ncols: int = 0) -> str:
    """Render panels into a standalone SVG document string."""
    panels = tuple(panels)
    if not panels:
        raise DomainError("nothing to render")
    if ncols < 1:
        ncols = min(len(panels), 3)
    nrows = (len(panels) + ncols - 1) // ncols
    width = ncols * PANEL_W
    height = nrows * PANEL_H
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    for i, panel in enumerate(panels):
        ox = (i % ncols) * PANEL_W
        oy = (i // ncols) * PANEL_H
        _panel_svg(panel, ox, oy, parts)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
