"""Tiny SVG 1.1 line/step charts, no renderer dependency.

Just enough plotting to eyeball a loss profile, a sweep step function,
or an error trend: axes, ticks, one or more polylines.  Anything fancier
belongs in a real plotting package.
"""

from xml.sax.saxutils import escape

__all__ = ["line_plot"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")

_W, _H = 720, 460
_ML, _MR, _MT, _MB = 72, 24, 40, 56  # margins: left, right, top, bottom


def _ticks(lo, hi, count=5):
    if hi <= lo:
        return [lo]
    span = hi - lo
    return [lo + span * i / (count - 1) for i in range(count)]


def _fmt(v):
    return f"{v:.4g}"


def line_plot(path, series, title="", xlabel="", ylabel="", step=False):
    """Write an SVG chart of one or more (xs, ys, label) series.

    Parameters
    ----------
    path : str or Path
        Output file.
    series : list of (sequence, sequence, str)
        x values, y values, legend label (empty string to omit).
    step : bool
        Draw step-after segments instead of straight connections,
        appropriate for piecewise-constant data like u_hat(c).
    """
    xs_all = [float(v) for s in series for v in s[0]]
    ys_all = [float(v) for s in series for v in s[1]]
    if not xs_all:
        raise ValueError("nothing to plot")
    xmin, xmax = min(xs_all), max(xs_all)
    ymin, ymax = min(ys_all), max(ys_all)
    if xmax == xmin:
        xmin, xmax = xmin - 0.5, xmax + 0.5
    if ymax == ymin:
        ymin, ymax = ymin - 0.5, ymax + 0.5
    # breathe a little so lines do not sit on the frame
    ypad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - ypad, ymax + ypad

    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def sx(v):
        return _ML + (v - xmin) / (xmax - xmin) * pw

    def sy(v):
        return _MT + ph - (v - ymin) / (ymax - ymin) * ph

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">'
    )
    out.append(f'<rect width="{_W}" height="{_H}" fill="white"/>')
    if title:
        out.append(
            f'<text x="{_W / 2}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{escape(title)}</text>'
        )
    # frame
    out.append(
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" '
        f'fill="none" stroke="#333" stroke-width="1"/>'
    )
    for tv in _ticks(xmin, xmax):
        px = sx(tv)
        out.append(
            f'<line x1="{px:.2f}" y1="{_MT + ph}" x2="{px:.2f}" '
            f'y2="{_MT + ph + 5}" stroke="#333"/>'
        )
        out.append(
            f'<text x="{px:.2f}" y="{_MT + ph + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt(tv)}</text>'
        )
    for tv in _ticks(ymin, ymax):
        py = sy(tv)
        out.append(
            f'<line x1="{_ML - 5}" y1="{py:.2f}" x2="{_ML}" '
            f'y2="{py:.2f}" stroke="#333"/>'
        )
        out.append(
            f'<text x="{_ML - 8}" y="{py + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(tv)}</text>'
        )
    if xlabel:
        out.append(
            f'<text x="{_ML + pw / 2}" y="{_H - 14}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{escape(xlabel)}</text>'
        )
    if ylabel:
        cy = _MT + ph / 2
        out.append(
            f'<text x="18" y="{cy}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" '
            f'transform="rotate(-90 18 {cy})">{escape(ylabel)}</text>'
        )

    for i, (xs, ys, label) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = []
        prev = None
        for xv, yv in zip(xs, ys):
            px, py = sx(float(xv)), sy(float(yv))
            if step and prev is not None:
                pts.append(f"{px:.2f},{prev:.2f}")
            pts.append(f"{px:.2f},{py:.2f}")
            prev = py
        out.append(
            f'<polyline points="{" ".join(pts)}" fill="none" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        if label:
            ly = _MT + 16 + 16 * i
            out.append(
                f'<line x1="{_ML + pw - 120}" y1="{ly - 4}" x2="{_ML + pw - 96}" '
                f'y2="{ly - 4}" stroke="{color}" stroke-width="1.5"/>'
            )
            out.append(
                f'<text x="{_ML + pw - 90}" y="{ly}" font-family="sans-serif" '
                f'font-size="11">{escape(str(label))}</text>'
            )
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
