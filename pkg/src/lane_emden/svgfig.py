"""Minimal dependency-free SVG line plots for the report output.

Deliberately small: polylines with axes, ticks, a legend and a title,
written with deterministic number formatting so identical data produce
bit-identical files.
"""

import math

__all__ = ["Figure"]

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#7f7f7f"]


def _fmt(x):
    return f"{x:.6g}"


def _ticks(lo, hi, n=6):
    """Round tick positions covering [lo, hi]."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if step >= raw:
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-9 * step:
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


class Figure:
    """Accumulates labelled polylines, then renders one SVG file."""

    def __init__(self, title="", xlabel="", ylabel="", width=720, height=480):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.width = width
        self.height = height
        self.series = []

    def line(self, x, y, label=None, color=None, dash=None):
        pts = [(float(a), float(b)) for a, b in zip(x, y)
               if math.isfinite(a) and math.isfinite(b)]
        if not pts:
            return
        color = color or _PALETTE[len(self.series) % len(_PALETTE)]
        self.series.append((pts, label, color, dash))

    def _bounds(self):
        xs = [p[0] for s in self.series for p in s[0]]
        ys = [p[1] for s in self.series for p in s[0]]
        if not xs:
            return 0.0, 1.0, 0.0, 1.0
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        if x1 == x0:
            x1 = x0 + 1.0
        if y1 == y0:
            y1 = y0 + 1.0
        my = 0.05 * (y1 - y0)
        return x0, x1, y0 - my, y1 + my

    def render(self):
        W, H = self.width, self.height
        ml, mr, mt, mb = 72, 24, 36, 52
        x0, x1, y0, y1 = self._bounds()

        def px(x):
            return ml + (x - x0) / (x1 - x0) * (W - ml - mr)

        def py(y):
            return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb)

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" '
               f'height="{H}" viewBox="0 0 {W} {H}">',
               f'<rect width="{W}" height="{H}" fill="white"/>']
        font = 'font-family="Helvetica,Arial,sans-serif"'
        # frame and ticks
        out.append(f'<rect x="{ml}" y="{mt}" width="{W-ml-mr}" '
                   f'height="{H-mt-mb}" fill="none" stroke="#333"/>')
        for tx in _ticks(x0, x1):
            if tx < x0 - 1e-12 or tx > x1 + 1e-12:
                continue
            X = _fmt(px(tx))
            out.append(f'<line x1="{X}" y1="{py(y0)}" x2="{X}" '
                       f'y2="{_fmt(py(y0)+5)}" stroke="#333"/>')
            out.append(f'<text x="{X}" y="{_fmt(py(y0)+18)}" {font} '
                       f'font-size="11" text-anchor="middle">{_fmt(tx)}</text>')
        for ty in _ticks(y0, y1):
            if ty < y0 - 1e-12 or ty > y1 + 1e-12:
                continue
            Y = _fmt(py(ty))
            out.append(f'<line x1="{ml-5}" y1="{Y}" x2="{ml}" y2="{Y}" '
                       f'stroke="#333"/>')
            out.append(f'<text x="{ml-8}" y="{_fmt(float(Y)+4)}" {font} '
                       f'font-size="11" text-anchor="end">{_fmt(ty)}</text>')
        # series
        for pts, label, color, dash in self.series:
            d = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
            dd = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(f'<polyline points="{d}" fill="none" stroke="{color}" '
                       f'stroke-width="1.6"{dd}/>')
        # labels, title, legend
        if self.title:
            out.append(f'<text x="{W/2}" y="22" {font} font-size="14" '
                       f'text-anchor="middle">{self.title}</text>')
        if self.xlabel:
            out.append(f'<text x="{(ml+W-mr)/2}" y="{H-14}" {font} '
                       f'font-size="12" text-anchor="middle">{self.xlabel}</text>')
        if self.ylabel:
            out.append(f'<text x="16" y="{(mt+H-mb)/2}" {font} font-size="12" '
                       f'text-anchor="middle" transform="rotate(-90 16 '
                       f'{(mt+H-mb)/2})">{self.ylabel}</text>')
        ly = mt + 14
        for pts, label, color, dash in self.series:
            if not label:
                continue
            out.append(f'<line x1="{W-mr-150}" y1="{ly}" x2="{W-mr-120}" '
                       f'y2="{ly}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{W-mr-114}" y="{ly+4}" {font} '
                       f'font-size="11">{label}</text>')
            ly += 16
        out.append("</svg>")
        return "\n".join(out)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())
        return path
