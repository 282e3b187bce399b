"""SVG drawings of level approximations, one row per level."""
from __future__ import annotations

from xml.sax.saxutils import escape

from .construct import GdIfs, verify_separation
from .exactnum import eval_numeric
from .kernels import graph_arrays, level_intervals

WIDTH = 800.0
MARGIN = 20.0
ROW = 28.0
BAR = 12.0


def _num(x: float) -> str:
    s = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(f: GdIfs, u: str, m: int, precision_bits: int = 128) -> str:
    """Rows 0..m of I_u^k as filled bars; row 1 labels the basic gaps of F_u."""
    if m < 0:
        raise ValueError("m must be >= 0")
    arrays = graph_arrays(f)
    lo_v = float(arrays[5][arrays[7][u]])
    span = float(arrays[6][arrays[7][u]]) or 1.0
    scale = (WIDTH - 2 * MARGIN) / span

    def x(t: float) -> float:
        return MARGIN + (t - lo_v) * scale

    height = MARGIN * 2 + ROW * (m + 1) + (14 if m >= 1 else 0)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_num(WIDTH)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(WIDTH)} {_num(height)}">',
        f"<title>{escape(f'level approximations of F_{u} over [{_num(lo_v)}, {_num(lo_v + span)}], levels 0..{m}')}</title>",
        '<g fill="black" stroke="none">',
    ]
    for level in range(m + 1):
        y = MARGIN + level * ROW
        for a, b in level_intervals(f, u, level, arrays):
            w = max((b - a) * scale, 0.25)
            out.append(f'<rect x="{_num(x(a))}" y="{_num(y)}" width="{_num(w)}" height="{_num(BAR)}"/>')
    out.append("</g>")
    if m >= 1:
        rep = verify_separation(f)
        y = MARGIN + ROW + BAR + 12
        out.append('<g font-family="monospace" font-size="9" text-anchor="middle" fill="#444">')
        for gp in rep.positive_gaps(u):
            a = float(_mid(gp.left, precision_bits))
            b = float(_mid(gp.right, precision_bits))
            out.append(f'<text x="{_num(x((a + b) / 2))}" y="{_num(y)}">{escape(str(gp.length))}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _mid(v, bits):
    from .exactnum import Enclosure

    return v.mid if isinstance(v, Enclosure) else eval_numeric(v, bits).mid
