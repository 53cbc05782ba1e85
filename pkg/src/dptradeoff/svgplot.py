"""Minimal hand-rolled SVG output: a curve plot and a scatter plot.

Plots are static artifacts (1000x600, plain axes); no plotting library.
"""

from __future__ import annotations

import numpy as np

WIDTH, HEIGHT = 1000, 600
MARGIN = 70


def _scaler(lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0

    def f(v):
        return out_lo + (v - lo) / span * (out_hi - out_lo)

    return f


def _axes(xlab, ylab, xt, yt, sx, sy):
    parts = [
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 18}" text-anchor="middle" '
        f'font-size="16">{xlab}</text>',
        f'<text x="20" y="{HEIGHT // 2}" text-anchor="middle" font-size="16" '
        f'transform="rotate(-90 20 {HEIGHT // 2})">{ylab}</text>',
    ]
    for t in xt:
        x = sx(t)
        parts.append(f'<line x1="{x:.1f}" y1="{HEIGHT - MARGIN}" x2="{x:.1f}" y2="{HEIGHT - MARGIN + 6}" stroke="black"/>')
        parts.append(f'<text x="{x:.1f}" y="{HEIGHT - MARGIN + 22}" text-anchor="middle" font-size="12">{t:g}</text>')
    for t in yt:
        y = sy(t)
        parts.append(f'<line x1="{MARGIN - 6}" y1="{y:.1f}" x2="{MARGIN}" y2="{y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{MARGIN - 10}" y="{y + 4:.1f}" text-anchor="end" font-size="12">{t:.3g}</text>')
    return parts


def _document(body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">\n<rect width="100%" height="100%" fill="white"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def curve_svg(curve, title: str = "") -> str:
    """Line plot of the curve on [0, 1] with breakpoints marked."""
    ps = np.linspace(0.0, 1.0, 201)
    vs = np.asarray(curve.value(ps), dtype=float)
    lo, hi = float(vs.min()), float(vs.max())
    pad = 0.05 * (hi - lo if hi > lo else max(hi, 1.0))
    sx = _scaler(0.0, 1.0, MARGIN, WIDTH - MARGIN)
    sy = _scaler(lo - pad, hi + pad, HEIGHT - MARGIN, MARGIN)

    body = _axes(
        "perception level P",
        "distortion D(P)",
        np.linspace(0, 1, 6),
        np.linspace(lo, hi, 5) if hi > lo else [lo],
        sx,
        sy,
    )
    pts = " ".join(f"{sx(p):.2f},{sy(v):.2f}" for p, v in zip(ps, vs))
    body.append(f'<polyline points="{pts}" fill="none" stroke="#1f6fb2" stroke-width="2"/>')
    for bp in curve.breakpoints:
        body.append(
            f'<circle cx="{sx(bp):.2f}" cy="{sy(float(curve.value(bp))):.2f}" r="5" '
            f'fill="#d62728" stroke="black"/>'
        )
    if title:
        body.append(f'<text x="{WIDTH // 2}" y="30" text-anchor="middle" font-size="18">{title}</text>')
    return _document(body)


def scatter_svg(points, hull_indices, active_indices=(), title: str = "") -> str:
    """Scatter of projected dual vertices with hull extremes highlighted."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        return _document(['<text x="500" y="300" text-anchor="middle">no points</text>'])
    x, y = pts[:, 0], pts[:, 1]
    padx = 0.05 * (x.max() - x.min() if x.max() > x.min() else 1.0)
    pady = 0.05 * (y.max() - y.min() if y.max() > y.min() else 1.0)
    sx = _scaler(x.min() - padx, x.max() + padx, MARGIN, WIDTH - MARGIN)
    sy = _scaler(y.min() - pady, y.max() + pady, HEIGHT - MARGIN, MARGIN)

    body = _axes(
        "intercept",
        "slope",
        np.linspace(x.min(), x.max(), 5) if x.max() > x.min() else [x.min()],
        np.linspace(y.min(), y.max(), 5) if y.max() > y.min() else [y.min()],
        sx,
        sy,
    )
    hull = [int(i) for i in hull_indices]
    if len(hull) >= 2:
        ordered = _hull_order(pts[hull])
        path = " ".join(f"{sx(pts[hull[j], 0]):.2f},{sy(pts[hull[j], 1]):.2f}" for j in ordered)
        body.append(f'<polygon points="{path}" fill="none" stroke="#999" stroke-dasharray="5,4"/>')
    for i, (px, py) in enumerate(pts):
        body.append(f'<circle cx="{sx(px):.2f}" cy="{sy(py):.2f}" r="3" fill="#7f7f7f"/>')
    for i in hull:
        body.append(
            f'<circle cx="{sx(pts[i, 0]):.2f}" cy="{sy(pts[i, 1]):.2f}" r="5" '
            f'fill="none" stroke="#1f6fb2" stroke-width="2"/>'
        )
    for i in active_indices:
        px, py = pts[int(i)]
        body.append(
            f'<path d="M {sx(px) - 6:.2f} {sy(py) - 6:.2f} L {sx(px) + 6:.2f} {sy(py) + 6:.2f} '
            f'M {sx(px) - 6:.2f} {sy(py) + 6:.2f} L {sx(px) + 6:.2f} {sy(py) - 6:.2f}" '
            f'stroke="#d62728" stroke-width="2"/>'
        )
    if title:
        body.append(f'<text x="{WIDTH // 2}" y="30" text-anchor="middle" font-size="18">{title}</text>')
    return _document(body)


def _hull_order(pts: np.ndarray) -> list[int]:
    center = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - center[1], pts[:, 0] - center[0])
    return list(np.argsort(ang))
