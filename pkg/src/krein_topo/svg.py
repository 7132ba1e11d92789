"""Minimal SVG plots: scatter clouds, polylines, axes and a dotted unit circle.

Output is deterministic: coordinates are printed with a fixed number of
decimals and elements appear in insertion order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["Plot"]

_COLORS = ("#1f4e79", "#b03a2e", "#1e8449", "#7d3c98", "#b9770e", "#117a65", "#2e4053", "#a04000")


def _fmt(x: float) -> str:
    return f"{x:.3f}"


@dataclass
class Plot:
    """A single panel with linear axes.

    Parameters
    ----------
    xlim, ylim : tuple of float
        Data ranges mapped onto the drawing area.
    width, height : int
        Canvas size in pixels.
    equal : bool
        Enlarge one range so that both axes use the same scale.
    """

    xlim: Tuple[float, float]
    ylim: Tuple[float, float]
    width: int = 480
    height: int = 480
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    equal: bool = False
    margin: int = 50
    _items: List[str] = field(default_factory=list, repr=False)

    def __post_init__(self):
        x0, x1 = map(float, self.xlim)
        y0, y1 = map(float, self.ylim)
        if x1 <= x0 or y1 <= y0:
            raise ValueError("plot ranges must be increasing")
        if self.equal:
            sx = (x1 - x0) / (self.width - 2 * self.margin)
            sy = (y1 - y0) / (self.height - 2 * self.margin)
            s = max(sx, sy)
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            hw, hh = 0.5 * s * (self.width - 2 * self.margin), 0.5 * s * (self.height - 2 * self.margin)
            x0, x1, y0, y1 = cx - hw, cx + hw, cy - hh, cy + hh
        self.xlim = (x0, x1)
        self.ylim = (y0, y1)

    # coordinate transforms
    def _px(self, x):
        x0, x1 = self.xlim
        return self.margin + (np.asarray(x, dtype=float) - x0) / (x1 - x0) * (self.width - 2 * self.margin)

    def _py(self, y):
        y0, y1 = self.ylim
        return self.height - self.margin - (np.asarray(y, dtype=float) - y0) / (y1 - y0) * (self.height - 2 * self.margin)

    def points(self, x: Sequence[float], y: Sequence[float], color: Optional[str] = None, radius: float = 1.2) -> "Plot":
        color = color or _COLORS[0]
        px, py = self._px(x), self._py(y)
        for a, b in zip(np.atleast_1d(px), np.atleast_1d(py)):
            self._items.append(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="{radius}" fill="{color}"/>')
        return self

    def line(self, x: Sequence[float], y: Sequence[float], color: Optional[str] = None, width: float = 1.2,
             dash: Optional[str] = None) -> "Plot":
        """Polyline; non-finite values split it into pieces."""
        color = color or _COLORS[0]
        px, py = self._px(x), self._py(y)
        style = f' stroke-dasharray="{dash}"' if dash else ""
        piece: List[str] = []
        for a, b in zip(px, py):
            if np.isfinite(a) and np.isfinite(b):
                piece.append(f"{_fmt(a)},{_fmt(b)}")
            elif piece:
                self._emit_line(piece, color, width, style)
                piece = []
        if piece:
            self._emit_line(piece, color, width, style)
        return self

    def _emit_line(self, piece, color, width, style):
        if len(piece) > 1:
            self._items.append(f'<polyline points="{" ".join(piece)}" fill="none" stroke="{color}" '
                               f'stroke-width="{width}"{style}/>')

    def unit_circle(self, n: int = 361) -> "Plot":
        t = np.linspace(0.0, 2 * np.pi, n)
        return self.line(np.cos(t), np.sin(t), color="#555555", width=1.0, dash="2,3")

    def hline(self, y: float, color: str = "#555555") -> "Plot":
        return self.line(list(self.xlim), [y, y], color=color, width=0.8, dash="4,3")

    def vline(self, x: float, color: str = "#555555") -> "Plot":
        return self.line([x, x], list(self.ylim), color=color, width=0.8, dash="4,3")

    @staticmethod
    def color(i: int) -> str:
        return _COLORS[i % len(_COLORS)]

    def _axes(self) -> List[str]:
        m, w, h = self.margin, self.width, self.height
        out = [f'<rect x="{m}" y="{m}" width="{w - 2 * m}" height="{h - 2 * m}" fill="none" stroke="black" stroke-width="1"/>']
        for axis in ("x", "y"):
            lo, hi = self.xlim if axis == "x" else self.ylim
            for t in np.linspace(lo, hi, 5):
                if axis == "x":
                    p = float(self._px(t))
                    out.append(f'<line x1="{_fmt(p)}" y1="{h - m}" x2="{_fmt(p)}" y2="{h - m + 5}" stroke="black"/>')
                    out.append(f'<text x="{_fmt(p)}" y="{h - m + 18}" font-size="11" text-anchor="middle">{t:.3g}</text>')
                else:
                    p = float(self._py(t))
                    out.append(f'<line x1="{m - 5}" y1="{_fmt(p)}" x2="{m}" y2="{_fmt(p)}" stroke="black"/>')
                    out.append(f'<text x="{m - 8}" y="{_fmt(p + 4)}" font-size="11" text-anchor="end">{t:.3g}</text>')
        if self.title:
            out.append(f'<text x="{w / 2:.1f}" y="{m / 2:.1f}" font-size="13" text-anchor="middle">{escape(self.title)}</text>')
        if self.xlabel:
            out.append(f'<text x="{w / 2:.1f}" y="{h - 10}" font-size="12" text-anchor="middle">{escape(self.xlabel)}</text>')
        if self.ylabel:
            out.append(f'<text x="14" y="{h / 2:.1f}" font-size="12" text-anchor="middle" '
                       f'transform="rotate(-90 14 {h / 2:.1f})">{escape(self.ylabel)}</text>')
        return out

    def render(self) -> str:
        m, w, h = self.margin, self.width, self.height
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'
                f'<rect width="{w}" height="{h}" fill="white"/>\n'
                f'<clipPath id="area"><rect x="{m}" y="{m}" width="{w - 2 * m}" height="{h - 2 * m}"/></clipPath>\n')
        body = "<g clip-path=\"url(#area)\">\n" + "\n".join(self._items) + "\n</g>\n"
        return head + "\n".join(self._axes()) + "\n" + body + "</svg>\n"

    def save(self, path) -> None:
        Path(path).write_text(self.render())
