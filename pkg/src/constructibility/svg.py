"""Static SVG snapshots of configurations.

Coordinates are midpoints of certified intervals at the requested precision,
written as exact decimals, so raising the precision only adds digits.
"""

from __future__ import annotations

import math
from fractions import Fraction

from . import projective as pj
from .numbers import approx, sqrt
from .projective import Conic, HLine, HPoint

__all__ = ["render_svg", "decimal_str"]


def decimal_str(x: Fraction, digits: int) -> str:
    """x rounded to `digits` decimal places, without going through floats."""
    scaled = round(x * 10**digits)
    sign = "-" if scaled < 0 else ""
    s = str(abs(scaled)).rjust(digits + 1, "0")
    if digits == 0:
        return sign + s
    out = f"{sign}{s[:-digits]}.{s[-digits:]}".rstrip("0").rstrip(".")
    return "0" if out in ("", "-0", "-") else out


def _mid(v, bits):
    return Fraction(approx(v, bits).mid)


def _clip_line(coeffs, box):
    """Segment of a*x + b*y + c = 0 inside the square [-box, box]^2, or None."""
    a, b, c = coeffs
    pts = []
    if b != 0:
        for x in (-box, box):
            y = -(a * x + c) / b
            if -box <= y <= box:
                pts.append((x, y))
    if a != 0:
        for y in (-box, box):
            x = -(b * y + c) / a
            if -box <= x <= box:
                pts.append((x, y))
    pts = sorted(set(pts))
    if len(pts) < 2:
        return None
    return pts[0], pts[-1]


def render_svg(cfg, precision_bits=32, box=3, size=600, highlight=()):
    """SVG text for the finite part of cfg inside [-box, box]^2."""
    digits = max(1, math.ceil(precision_bits * math.log10(2)))
    box = Fraction(box)

    def fmt(v):
        return decimal_str(v, digits)

    stroke = fmt(box / 300)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{fmt(-box)} {fmt(-box)} {fmt(2 * box)} {fmt(2 * box)}">',
        '<g transform="scale(1,-1)" fill="none" stroke-linecap="round">',
    ]
    for i, obj in cfg:
        if isinstance(obj, Conic):
            if pj.is_circle(obj):
                cx, cy = (_mid(v, precision_bits) for v in pj.circle_center(obj).affine())
                r = _mid(sqrt(pj.circle_radius_sq(obj)), precision_bits)
                out.append(f'<circle id="o{i}" cx="{fmt(cx)}" cy="{fmt(cy)}" r="{fmt(r)}" '
                           f'stroke="#1f4e79" stroke-width="{stroke}"/>')
            else:
                out.append(f"<!-- o{i}: conic {obj.to_str()} not drawn -->")
        elif isinstance(obj, HLine):
            if obj.is_at_infinity:
                continue
            seg = _clip_line([_mid(v, precision_bits) for v in obj.coords], box)
            if seg is None:
                continue
            (x1, y1), (x2, y2) = seg
            out.append(f'<line id="o{i}" x1="{fmt(x1)}" y1="{fmt(y1)}" x2="{fmt(x2)}" y2="{fmt(y2)}" '
                       f'stroke="#777777" stroke-width="{stroke}"/>')
    for i, obj in cfg:
        if isinstance(obj, HPoint) and obj.is_finite:
            x, y = (_mid(v, precision_bits) for v in obj.affine())
            if abs(x) > box or abs(y) > box:
                continue
            color = "#c0392b" if i in highlight else "#000000"
            out.append(f'<circle id="o{i}" cx="{fmt(x)}" cy="{fmt(y)}" r="{fmt(box / 120)}" fill="{color}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
