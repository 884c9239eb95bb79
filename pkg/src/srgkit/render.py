"""Static SVG plots of SRG regions.

The SVG is written by hand (plain string formatting with fixed precision) so
that identical regions give byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import SrgRegion, region_boundary


@dataclass(frozen=True)
class PlotConfig:
    width: int = 640
    height: int = 640
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None
    annuli: bool = False
    title: str = ""
    pad: float = 0.1


def _f(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def _finite_runs(z: np.ndarray, inf: np.ndarray) -> list[np.ndarray]:
    runs, cur = [], []
    for p, i in zip(z, inf):
        if i:
            if cur:
                runs.append(np.array(cur))
            cur = []
        else:
            cur.append(p)
    if cur:
        runs.append(np.array(cur))
    return runs


def auto_limits(points: np.ndarray, pad: float = 0.1) -> tuple[tuple[float, float], tuple[float, float]]:
    """Bounding box of the finite part of a boundary, padded by ``pad`` and squared up.

    Far-away samples (near the point at infinity) are ignored so that
    unbounded regions still get a useful view.
    """
    pts = points[np.isfinite(points)]
    if pts.size == 0:
        return (-1.0, 1.0), (-1.0, 1.0)
    mag = np.abs(pts)
    keep = pts[mag <= 10.0 * np.median(mag) + 1.0]
    if keep.size == 0:
        keep = pts
    x0, x1 = float(keep.real.min()), float(keep.real.max())
    y0, y1 = float(keep.imag.min()), float(keep.imag.max())
    span = max(x1 - x0, y1 - y0, 1e-3 * max(1.0, float(np.max(np.abs(keep)))), 1e-6)
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    half = 0.5 * span * (1.0 + 2.0 * pad)
    return (cx - half, cx + half), (cy - half, cy + half)


def render_svg(r: SrgRegion, cfg: PlotConfig = PlotConfig(), samples=None, samples_inf=None) -> str:
    """SVG document showing the boundary of ``r``.

    Parameters
    ----------
    r : SrgRegion
    cfg : PlotConfig
        Size, viewport (``xlim``/``ylim``; auto-fit when None) and layers.
    samples : array of complex, optional
        Oracle points overlaid as dots.
    """
    path = region_boundary(r)
    bz, binf = path.as_arrays() if path.points else (np.zeros(0, complex), np.zeros(0, bool))
    finite = bz[~binf]
    ax_x, ax_y = auto_limits(finite, cfg.pad) if (cfg.xlim is None or cfg.ylim is None) else (None, None)
    xlim = cfg.xlim or ax_x
    ylim = cfg.ylim or ax_y
    W, H = cfg.width, cfg.height

    def X(x):
        return (np.asarray(x) - xlim[0]) / (xlim[1] - xlim[0]) * W

    def Y(y):
        return (ylim[1] - np.asarray(y)) / (ylim[1] - ylim[0]) * H

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        '<defs><clipPath id="view"><rect x="0" y="0" width="%d" height="%d"/></clipPath></defs>' % (W, H),
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
    ]
    if cfg.title:
        out.append(f'<title>{cfg.title}</title>')
    # axes
    out.append('<g id="axes" stroke="#888" stroke-width="1">')
    if ylim[0] <= 0 <= ylim[1]:
        out.append(f'<line x1="0" y1="{_f(Y(0))}" x2="{W}" y2="{_f(Y(0))}"/>')
    if xlim[0] <= 0 <= xlim[1]:
        out.append(f'<line x1="{_f(X(0))}" y1="0" x2="{_f(X(0))}" y2="{H}"/>')
    out.append("</g>")
    out.append('<g id="ticks" font-family="sans-serif" font-size="11" fill="#444">')
    out.append(f'<text x="4" y="{H - 4}">Re [{xlim[0]:.4g}, {xlim[1]:.4g}]</text>')
    out.append(f'<text x="4" y="14">Im [{ylim[0]:.4g}, {ylim[1]:.4g}]</text>')
    out.append("</g>")
    if cfg.annuli:
        out.append('<g id="annuli" clip-path="url(#view)" fill="none" stroke="#9ab" stroke-width="0.5">')
        sx = W / (xlim[1] - xlim[0])
        for a, g in zip(r.alphas, r.gains):
            for rad in (g.min_gain, g.max_gain):
                if 0 < rad < math.inf and rad * sx < 1e5:
                    out.append(f'<circle cx="{_f(X(a))}" cy="{_f(Y(0))}" r="{_f(rad * sx)}"/>')
        out.append("</g>")
    fill = "none" if (r.includes_infinity or path.whole_plane) else "#cfe3f7"
    out.append(f'<g id="boundary" clip-path="url(#view)" fill="{fill}" stroke="#1f4e99" stroke-width="1.5">')
    if path.whole_plane:
        out.append(f'<rect x="0" y="0" width="{W}" height="{H}" fill="#cfe3f7" stroke="none"/>')
    for run in _finite_runs(bz, binf):
        # clamp far-away vertices so renderers do not choke on huge coordinates
        xs = np.clip(X(run.real), -10 * W, 11 * W)
        ys = np.clip(Y(run.imag), -10 * H, 11 * H)
        if run.size == 1:
            out.append(f'<circle cx="{_f(xs[0])}" cy="{_f(ys[0])}" r="3" fill="#1f4e99"/>')
            continue
        coords = [f"{_f(x)},{_f(y)}" for x, y in zip(xs, ys)]
        pts = " ".join(c for k, c in enumerate(coords) if k == 0 or c != coords[k - 1])
        out.append(f'<polyline points="{pts}"/>' if fill == "none" else f'<polygon points="{pts}"/>')
    out.append("</g>")
    if samples is not None and len(samples):
        s = np.asarray(samples, dtype=complex)
        if samples_inf is not None:
            s = s[~np.asarray(samples_inf, dtype=bool)]
        inside = (s.real >= xlim[0]) & (s.real <= xlim[1]) & (s.imag >= ylim[0]) & (s.imag <= ylim[1])
        out.append('<g id="oracle" fill="#d2452c" fill-opacity="0.6">')
        for p in s[inside]:
            out.append(f'<circle cx="{_f(X(p.real))}" cy="{_f(Y(p.imag))}" r="1.5"/>')
        out.append("</g>")
    if r.includes_infinity:
        out.append('<g id="infinity" font-family="sans-serif" font-size="14" fill="#1f4e99">')
        out.append(f'<circle cx="{W - 16}" cy="16" r="9" fill="none" stroke="#1f4e99"/>')
        out.append(f'<text x="{W - 22}" y="21">&#8734;</text>')
        out.append(f'<text x="{W - 110}" y="21">contains</text>')
        out.append("</g>")
    if r.empty:
        out.append(f'<text x="10" y="30" font-family="sans-serif" fill="#b00">empty region: {r.diagnostic}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
