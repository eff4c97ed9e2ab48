"""Deterministic SVG rendering of a Reeb graph.

Vertices are placed with the critical value on the vertical axis (larger
values higher); vertices sharing a value spread horizontally in id order.
Parallel edges bow sideways so multi-edges stay visible.  Output is
presentation-only and never parsed back.
"""

from __future__ import annotations

from .reeb import ReebGraph

_W, _H, _MARGIN = 520, 420, 45


def render_reeb_svg(g: ReebGraph) -> str:
    vmin = min(v.value for v in g.vertices)
    vmax = max(v.value for v in g.vertices)
    span = (vmax - vmin) or 1.0

    def sy(value: float) -> float:
        return _H - _MARGIN - (value - vmin) / span * (_H - 2 * _MARGIN)

    by_value: dict[float, list[int]] = {}
    for v in g.vertices:
        by_value.setdefault(round(v.value, 12), []).append(v.id)
    pos: dict[int, tuple[float, float]] = {}
    for val, ids in by_value.items():
        for rank, vid in enumerate(sorted(ids)):
            x = _MARGIN + (rank + 1) * (_W - 2 * _MARGIN) / (len(ids) + 1)
            pos[vid] = (x, sy(g.vertices[vid].value))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]

    seen_pairs: dict[tuple[int, int], int] = {}
    for e in g.edges:
        (x1, y1), (x2, y2) = pos[e.u], pos[e.v]
        key = (min(e.u, e.v), max(e.u, e.v))
        k = seen_pairs.get(key, 0)
        seen_pairs[key] = k + 1
        bow = ((k + 1) // 2) * 28 * (-1 if k % 2 else 1)
        mx, my = (x1 + x2) / 2 + bow, (y1 + y2) / 2
        on_cycle = e.homology != (0, 0)
        color = "#c0392b" if on_cycle else "#2c3e50"
        parts.append(
            f'<path d="M {x1:.1f} {y1:.1f} Q {mx:.1f} {my:.1f} {x2:.1f} {y2:.1f}" '
            f'fill="none" stroke="{color}" stroke-width="1.6"/>'
        )

    for v in g.vertices:
        x, y = pos[v.id]
        parts.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="4.5" fill="#2980b9"/>')
        parts.append(
            f'<text x="{x + 8:.1f}" y="{y + 4:.1f}" font-size="11" '
            f'font-family="monospace">v{v.id} ({v.value:.4g})</text>'
        )

    parts.append(
        f'<text x="{_MARGIN}" y="{_MARGIN - 18}" font-size="12" '
        f'font-family="monospace">betti1={g.betti1}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
