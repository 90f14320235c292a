"""Static SVG rendering of a DDF graph."""

from __future__ import annotations

from .ddf import DDF, INF

W, H, PAD = 480, 320, 40


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def to_svg(F: DDF, x_max: float | None = None, title: str = "") -> str:
    """Staircase/segment plot; a jump at ``x`` gets a filled dot at the attained left value and a hollow dot above."""
    finite = [float(k.x) for k in F.knots if k.x != INF]
    if x_max is None:
        x_max = (max(finite) * 1.25 if finite and max(finite) > 0 else 1.0)

    def sx(x):
        return PAD + (W - 2 * PAD) * min(float(x), x_max) / x_max

    def sy(p):
        return H - PAD - (H - 2 * PAD) * float(p)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
             '<rect width="100%" height="100%" fill="white"/>',
             f'<line x1="{PAD}" y1="{sy(0)}" x2="{W - PAD}" y2="{sy(0)}" stroke="black"/>',
             f'<line x1="{PAD}" y1="{sy(0)}" x2="{PAD}" y2="{sy(1)}" stroke="black"/>',
             f'<text x="{PAD - 6}" y="{sy(1) + 4}" font-size="10" text-anchor="end">1</text>',
             f'<text x="{W - PAD}" y="{sy(0) + 14}" font-size="10" text-anchor="end">{_fmt(x_max)}</text>']
    if title:
        parts.append(f'<text x="{W / 2}" y="{PAD / 2}" font-size="12" text-anchor="middle">{title}</text>')
    ks = [k for k in F.knots if k.x != INF]
    path = []
    for a, b in zip(ks, ks[1:]):
        path.append(f'<line x1="{sx(a.x):.2f}" y1="{sy(a.p_right):.2f}" x2="{sx(b.x):.2f}" y2="{sy(b.p_left):.2f}" '
                    'stroke="steelblue" stroke-width="2"/>')
    if ks:
        last = ks[-1]
        path.append(f'<line x1="{sx(last.x):.2f}" y1="{sy(last.p_right):.2f}" x2="{W - PAD}" y2="{sy(last.p_right):.2f}" '
                    'stroke="steelblue" stroke-width="2"/>')
    for k in ks:
        if k.p_right != k.p_left:
            path.append(f'<circle cx="{sx(k.x):.2f}" cy="{sy(k.p_left):.2f}" r="3" fill="steelblue"/>')
            path.append(f'<circle cx="{sx(k.x):.2f}" cy="{sy(k.p_right):.2f}" r="3" fill="white" stroke="steelblue"/>')
    parts.extend(path)
    if F.mass_at_infinity > 0:
        parts.append(f'<text x="{W - PAD}" y="{sy(F.top) - 6:.2f}" font-size="10" text-anchor="end">'
                     f'mass at +inf: {_fmt(float(F.mass_at_infinity))}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
