"""Self-contained SVG line charts for run records.

Hand-rolled on purpose: the outputs carry no external references, embed no
fonts, and are byte-stable for a given record, so tests can compare them
structurally.
"""

from __future__ import annotations

from .simulator import RunRecord

_PALETTE = ("#1f6feb", "#d1242f", "#2da44e", "#9a6700")

_WIDTH = 720
_HEIGHT = 480
_MARGIN_L = 70
_MARGIN_R = 20
_MARGIN_T = 44
_MARGIN_B = 52


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _bounds(values):
    lo, hi = min(values), max(values)
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def line_chart(series, *, title: str, x_label: str, y_label: str,
               equal_aspect: bool = False) -> str:
    """Render labelled (xs, ys) series into an SVG document string."""
    if not series:
        raise ValueError("need at least one series")
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x_lo, x_hi = _bounds(xs_all)
    y_lo, y_hi = _bounds(ys_all)

    pw = _WIDTH - _MARGIN_L - _MARGIN_R
    ph = _HEIGHT - _MARGIN_T - _MARGIN_B
    sx = pw / (x_hi - x_lo)
    sy = ph / (y_hi - y_lo)
    if equal_aspect:
        s = min(sx, sy)
        x_mid, y_mid = (x_lo + x_hi) / 2.0, (y_lo + y_hi) / 2.0
        x_lo, x_hi = x_mid - pw / (2 * s), x_mid + pw / (2 * s)
        y_lo, y_hi = y_mid - ph / (2 * s), y_mid + ph / (2 * s)
        sx = sy = s

    def px(x):
        return _MARGIN_L + (x - x_lo) * sx

    def py(y):
        return _HEIGHT - _MARGIN_B - (y - y_lo) * sy

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{pw}" height="{ph}" '
        f'fill="none" stroke="#444444" stroke-width="1"/>',
    ]

    for i in range(5):
        xv = x_lo + (x_hi - x_lo) * i / 4
        yv = y_lo + (y_hi - y_lo) * i / 4
        gx, gy = px(xv), py(yv)
        parts.append(f'<line x1="{gx:.2f}" y1="{_MARGIN_T}" x2="{gx:.2f}" '
                     f'y2="{_HEIGHT - _MARGIN_B}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<line x1="{_MARGIN_L}" y1="{gy:.2f}" x2="{_WIDTH - _MARGIN_R}" '
                     f'y2="{gy:.2f}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{gx:.2f}" y="{_HEIGHT - _MARGIN_B + 18}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">{_fmt(xv)}</text>')
        parts.append(f'<text x="{_MARGIN_L - 6}" y="{gy + 4:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{_fmt(yv)}</text>')

    parts.append(f'<text x="{_MARGIN_L + pw / 2:.1f}" y="{_HEIGHT - 10}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="13">{x_label}</text>')
    parts.append(f'<text x="18" y="{_MARGIN_T + ph / 2:.1f}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="13" '
                 f'transform="rotate(-90 18 {_MARGIN_T + ph / 2:.1f})">{y_label}</text>')

    for idx, (label, xs, ys) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        ly = _MARGIN_T + 16 + 18 * idx
        lx = _WIDTH - _MARGIN_R - 150
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 30}" y="{ly}" font-family="sans-serif" '
                     f'font-size="12">{label}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def tracking_chart(record: RunRecord) -> str:
    refs_x = [r.ref_x for r in record.rows]
    refs_y = [r.ref_y for r in record.rows]
    tips_x = [r.tip_x for r in record.rows]
    tips_y = [r.tip_y for r in record.rows]
    return line_chart([("reference", refs_x, refs_y), ("tracked", tips_x, tips_y)],
                      title="Tip trajectory vs reference",
                      x_label="x (mm)", y_label="y (mm)", equal_aspect=True)


def tension_chart(record: RunRecord) -> str:
    steps = [r.step for r in record.rows]
    series = [
        ("tau_i", steps, [r.tau_i for r in record.rows]),
        ("tau_l", steps, [r.tau_l for r in record.rows]),
        ("tau_r", steps, [r.tau_r for r in record.rows]),
        ("T_bb", steps, [r.t_bb for r in record.rows]),
    ]
    return line_chart(series, title="Tendon and backbone tensions",
                      x_label="step", y_label="tension (N)")


def error_profile_chart(record: RunRecord) -> str:
    arcs = [r.arclen for r in record.rows]
    errs = [r.err for r in record.rows]
    return line_chart([("tracking error", arcs, errs)],
                      title="Tracking error vs distance traversed",
                      x_label="reference arc length (mm)", y_label="error (mm)")
