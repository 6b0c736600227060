"""Minimal SVG line plots (no plotting dependency)."""

import math
from xml.sax.saxutils import escape

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
W, H = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 80, 190, 40, 60


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * step:
        out.append(v)
        v += step
    return out


def line_plot(path, x, series, title="", xlabel="", ylabel="", logy=False):
    """Write a line plot.

    ``series`` is a list of dicts with keys label, y and optionally lo/hi
    (a shaded band) and dash (bool).
    """
    x = [float(v) for v in x]

    def ty(v):
        return math.log10(v) if logy else v

    ys = []
    for s in series:
        for key in ("y", "lo", "hi"):
            for v in s.get(key) if s.get(key) is not None else ():
                v = float(v)
                if math.isfinite(v) and (not logy or v > 0):
                    ys.append(ty(v))
    ylo, yhi = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if yhi - ylo < 1e-12:
        yhi = ylo + 1.0
    xlo, xhi = (min(x), max(x)) if x else (0.0, 1.0)
    if xhi - xlo < 1e-12:
        xhi = xlo + 1.0
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def px(v):
        return LEFT + (v - xlo) / (xhi - xlo) * pw

    def py(v):
        return TOP + ph - (v - ylo) / (yhi - ylo) * ph

    def pts(xs, vals):
        out = []
        for a, b in zip(xs, vals):
            b = float(b)
            if math.isfinite(b) and (not logy or b > 0):
                out.append(f"{px(a):.2f},{py(ty(b)):.2f}")
        return " ".join(out)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{LEFT + pw / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in _ticks(xlo, xhi):
        parts.append(f'<line x1="{px(v):.2f}" y1="{TOP + ph}" x2="{px(v):.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{px(v):.2f}" y="{TOP + ph + 18}" text-anchor="middle">{v:g}</text>')
    for v in _ticks(ylo, yhi):
        lab = f"{10 ** v:.3g}" if logy else f"{v:g}"
        parts.append(f'<line x1="{LEFT - 5}" y1="{py(v):.2f}" x2="{LEFT}" y2="{py(v):.2f}" stroke="black"/>')
        parts.append(f'<text x="{LEFT - 8}" y="{py(v) + 4:.2f}" text-anchor="end">{lab}</text>')
    parts.append(f'<text x="{LEFT + pw / 2}" y="{H - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(f'<text transform="translate(18,{TOP + ph / 2}) rotate(-90)" text-anchor="middle">{escape(ylabel)}</text>')
    for i, s in enumerate(series):
        color = COLORS[i % len(COLORS)]
        if s.get("lo") is not None and s.get("hi") is not None:
            upper = pts(x, s["hi"])
            lower = pts(x[::-1], list(s["lo"])[::-1])
            parts.append(f'<polygon points="{upper} {lower}" fill="{color}" fill-opacity="0.15" stroke="none"/>')
        dash = ' stroke-dasharray="6,4"' if s.get("dash") else ""
        parts.append(f'<polyline points="{pts(x, s["y"])}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        ly = TOP + 14 + 18 * i
        parts.append(f'<line x1="{W - RIGHT + 12}" y1="{ly}" x2="{W - RIGHT + 36}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>')
        parts.append(f'<text x="{W - RIGHT + 42}" y="{ly + 4}">{escape(s["label"])}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
