"""Minimal native SVG line charts."""
import math
from xml.sax.saxutils import escape

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
WIDTH, HEIGHT, PAD = 640, 400, 60


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def line_chart(x, series, xlabel="", ylabel="", title=""):
    """SVG text for one chart; ``series`` maps a label to y values (non-finite points skipped)."""
    pts = [(xi, yi) for ys in series.values() for xi, yi in zip(x, ys)
           if math.isfinite(xi) and yi is not None and math.isfinite(yi)]
    if pts:
        x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
        y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(v):
        return PAD + (v - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def sy(v):
        return HEIGHT - PAD - (v - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'font-family="sans-serif" font-size="11">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" '
           'fill="none" stroke="black"/>']
    for v in _ticks(x0, x1):
        out.append(f'<text x="{sx(v):.1f}" y="{HEIGHT - PAD + 16}" text-anchor="middle">{v:.3g}</text>')
    for v in _ticks(y0, y1):
        out.append(f'<text x="{PAD - 6}" y="{sy(v) + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{HEIGHT / 2}" text-anchor="middle" '
               f'transform="rotate(-90 15 {HEIGHT / 2})">{escape(ylabel)}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{PAD - 20}" text-anchor="middle" font-size="13">'
               f'{escape(title)}</text>')

    for k, (label, ys) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        # break the polyline wherever a value is missing
        runs, cur = [], []
        for xi, yi in zip(x, ys):
            if yi is None or not math.isfinite(yi):
                if cur:
                    runs.append(cur)
                cur = []
            else:
                cur.append(f"{sx(xi):.2f},{sy(yi):.2f}")
        if cur:
            runs.append(cur)
        for r in runs:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                       f'points="{" ".join(r)}"/>')
        ly = PAD + 14 + 14 * k
        out.append(f'<line x1="{WIDTH - PAD - 90}" y1="{ly - 4}" x2="{WIDTH - PAD - 70}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{WIDTH - PAD - 65}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
