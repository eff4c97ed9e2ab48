"""Critical points and level-set components of a torus grid field.

Critical points are detected per grid cell (both gradient components change
sign over the cell corners), refined by Newton iteration on the bilinear
interpolant of the stencil gradient, and classified by the Hessian signature.
Level-set components are traced by marching squares with periodic wrap; the
homology class (p, q) of a component is the integer displacement of its
continuously unwrapped polyline, and a component separates the torus exactly
when (p, q) = (0, 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import CriticalLevel, DegenerateCritical, NoCrossing, TopologyError
from .field import GridField, TorusPoint

__all__ = [
    "CriticalPoint",
    "LevelCurve",
    "find_critical_points",
    "critical_values",
    "regular_value_tolerance",
    "trace_level_component",
    "enumerate_level_components",
]

NEWTON_MAX_ITER = 20
REGULAR_TOL_FACTOR = 1e-6


@dataclass(frozen=True)
class CriticalPoint:
    location: TorusPoint
    value: float
    index: int  # 0 minimum, 1 saddle, 2 maximum
    hessian_det: float


@dataclass
class LevelCurve:
    """A closed level-set component: polyline points plus homology class."""

    level: float
    points: np.ndarray  # (M, 2) wrapped into [0,1)^2, closed implicitly
    homology: tuple[int, int]
    crossed_edges: list = dc_field(default_factory=list, repr=False)

    @property
    def is_nonseparating(self) -> bool:
        return self.homology != (0, 0)

    @property
    def leftmost_x(self) -> float:
        return float(self.points[:, 0].min())


# ---------------------------------------------------------------------------
# Critical points
# ---------------------------------------------------------------------------

def _sign_change_cells(arr: np.ndarray) -> np.ndarray:
    """Cells over whose four corners ``arr`` attains both signs (or zero)."""
    c00 = arr
    c10 = np.roll(arr, -1, axis=0)
    c01 = np.roll(arr, -1, axis=1)
    c11 = np.roll(arr, (-1, -1), axis=(0, 1))
    lo = np.minimum(np.minimum(c00, c10), np.minimum(c01, c11))
    hi = np.maximum(np.maximum(c00, c10), np.maximum(c01, c11))
    return (lo <= 0.0) & (hi >= 0.0)


def _newton_refine(field: GridField, i: int, j: int, gscale: float):
    """Newton on the interpolated gradient, started from the cell center.

    Returns the refined (x, y) or None when the iteration leaves the
    neighbourhood of the cell or fails to converge (capped at 20 iterations,
    with a bisection sweep along the cell diagonal as fallback).
    """
    n = field.n
    x = (i + 0.5) / n
    y = (j + 0.5) / n
    tol = 1e-11 * gscale
    for _ in range(NEWTON_MAX_ITER):
        gx, gy = field.grad_at(x, y)
        g = np.array([float(gx), float(gy)])
        if np.hypot(g[0], g[1]) <= tol:
            return x % 1.0, y % 1.0
        jac = field.grad_jacobian_at(x, y)
        try:
            step = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError:
            break
        limit = 0.75 / n
        norm = np.hypot(step[0], step[1])
        if norm > limit:
            step *= limit / norm
        x += step[0]
        y += step[1]
        # wandered more than two cells away: not this cell's critical point
        dx = (x - (i + 0.5) / n + 0.5) % 1.0 - 0.5
        dy = (y - (j + 0.5) / n + 0.5) % 1.0 - 0.5
        if max(abs(dx), abs(dy)) > 2.0 / n:
            return None
    gx, gy = field.grad_at(x, y)
    if np.hypot(float(gx), float(gy)) <= 100 * tol:
        return x % 1.0, y % 1.0
    return _diagonal_fallback(field, i, j, tol)


def _diagonal_fallback(field: GridField, i: int, j: int, tol: float):
    """Bisection sweep of |grad| along the cell diagonal for skewed cells."""
    n = field.n

    def mag(t: float) -> float:
        gx, gy = field.grad_at((i + t) / n, (j + t) / n)
        return float(np.hypot(gx, gy))

    ts = np.linspace(0.0, 1.0, 33)
    k = int(np.argmin([mag(t) for t in ts]))
    a, b = ts[max(k - 1, 0)], ts[min(k + 1, len(ts) - 1)]
    for _ in range(40):
        m1, m2 = a + (b - a) / 3, b - (b - a) / 3
        if mag(m1) < mag(m2):
            b = m2
        else:
            a = m1
    t = (a + b) / 2
    x, y = (i + t) / n, (j + t) / n
    if mag(t) <= 1e3 * tol:
        return x % 1.0, y % 1.0
    return None


def _torus_dist(ax, ay, bx, by) -> float:
    dx = abs((ax - bx + 0.5) % 1.0 - 0.5)
    dy = abs((ay - by + 0.5) % 1.0 - 0.5)
    return max(dx, dy)


def find_critical_points(field: GridField) -> list[CriticalPoint]:
    """All non-degenerate critical points of the field, sorted by value.

    Raises DegenerateCritical when a refined point has a (near-)singular
    Hessian, which signals the field is not Morse at this grid resolution.
    """
    if field.vrange < 1e-12 * max(1.0, abs(field.vmax)):
        raise DegenerateCritical("field is constant at grid resolution")

    gx, gy = field.grad_nodes
    gscale = max(1.0, float(np.abs(gx).max()), float(np.abs(gy).max()))
    cells = np.argwhere(_sign_change_cells(gx) & _sign_change_cells(gy))

    hxx, hyy, hxy = field.hess_nodes
    hscale = max(1.0, float(np.abs(hxx).max()), float(np.abs(hyy).max()),
                 float(np.abs(hxy).max()))
    det_tol = 1e-10 * hscale * hscale

    found: list[CriticalPoint] = []
    for i, j in cells:
        refined = _newton_refine(field, int(i), int(j), gscale)
        if refined is None:
            continue
        x, y = refined
        if any(_torus_dist(x, y, p.location.x, p.location.y) < 0.75 / field.n
               for p in found):
            continue
        a, b, c = (float(v) for v in field.hess_at(x, y))
        det = a * b - c * c
        if abs(det) < det_tol:
            raise DegenerateCritical(
                f"near-singular Hessian at ({x:.6f}, {y:.6f}); field is not "
                f"Morse at resolution {field.n}"
            )
        if det < 0:
            index = 1
        elif a > 0:
            index = 0
        else:
            index = 2
        value = float(field.exact_at(x, y))
        found.append(CriticalPoint(TorusPoint(x, y), value, index, det))

    found.sort(key=lambda p: (p.value, p.location.x, p.location.y))
    return found


def critical_values(field: GridField) -> list[float]:
    cache = getattr(field, "_critical_values_cache", None)
    if cache is None:
        cache = sorted({p.value for p in find_critical_points(field)})
        field._critical_values_cache = cache
    return cache


def regular_value_tolerance(field: GridField) -> float:
    return REGULAR_TOL_FACTOR * field.vrange


def _assert_regular(field: GridField, c: float, crit_vals=None) -> None:
    vals = critical_values(field) if crit_vals is None else crit_vals
    tol = regular_value_tolerance(field)
    for w in vals:
        if abs(c - w) <= tol:
            raise CriticalLevel(f"level {c} is within {tol:.2e} of critical value {w}")


# ---------------------------------------------------------------------------
# Marching squares with periodic wrap
# ---------------------------------------------------------------------------
#
# Grid edges: ('h', i, j) joins nodes (i,j)-(i+1,j); ('v', i, j) joins
# (i,j)-(i,j+1).  The cell (i,j) is bounded by bottom ('h',i,j), right
# ('v',i+1,j), top ('h',i,j+1) and left ('v',i,j), indices mod N.

_SIDES = ("b", "r", "t", "l")


def _cell_edges(i: int, j: int, n: int):
    return {
        "b": ("h", i % n, j % n),
        "r": ("v", (i + 1) % n, j % n),
        "t": ("h", i % n, (j + 1) % n),
        "l": ("v", i % n, j % n),
    }


class _LevelData:
    """Per-level crossing tables shared by tracing calls."""

    def __init__(self, field: GridField, c: float):
        v = field.values
        s = v > c
        self.field = field
        self.c = c
        self.hcross = s != np.roll(s, -1, axis=0)  # edge (i,j)-(i+1,j)
        self.vcross = s != np.roll(s, -1, axis=1)  # edge (i,j)-(i,j+1)
        self.sign = s

    def crossed(self, edge) -> bool:
        kind, i, j = edge
        return bool(self.hcross[i, j] if kind == "h" else self.vcross[i, j])

    def crossing_t(self, edge) -> float:
        kind, i, j = edge
        v = self.field.values
        n = self.field.n
        if kind == "h":
            v0, v1 = v[i, j], v[(i + 1) % n, j]
        else:
            v0, v1 = v[i, j], v[i, (j + 1) % n]
        return float((self.c - v0) / (v1 - v0))


def _exit_side(ld: _LevelData, i: int, j: int, entry_side: str) -> str:
    n = ld.field.n
    edges = _cell_edges(i, j, n)
    crossed = [s for s in _SIDES if ld.crossed(edges[s])]
    if entry_side not in crossed:
        raise TopologyError("marching-squares walk lost the level curve")
    if len(crossed) == 2:
        return crossed[0] if crossed[1] == entry_side else crossed[1]
    if len(crossed) == 4:
        # ambiguous saddle cell: asymptotic decider on the bilinear patch
        v = ld.field.values
        f00 = v[i % n, j % n] - ld.c
        f10 = v[(i + 1) % n, j % n] - ld.c
        f01 = v[i % n, (j + 1) % n] - ld.c
        f11 = v[(i + 1) % n, (j + 1) % n] - ld.c
        saddle = (f00 * f11 - f10 * f01) / (f00 + f11 - f10 - f01)
        if (saddle > 0) == (f00 > 0):
            pairs = {"b": "r", "r": "b", "t": "l", "l": "t"}
        else:
            pairs = {"b": "l", "l": "b", "t": "r", "r": "t"}
        return pairs[entry_side]
    raise TopologyError(f"cell ({i},{j}) has {len(crossed)} crossings at level {ld.c}")


def _edge_point_unwrapped(ld: _LevelData, side: str, ci: int, cj: int):
    """Crossing point on a side of the *unwrapped* cell (ci, cj)."""
    n = ld.field.n
    edge = _cell_edges(ci, cj, n)[side]
    t = ld.crossing_t(edge)
    if side == "b":
        return (ci + t) / n, cj / n
    if side == "t":
        return (ci + t) / n, (cj + 1) / n
    if side == "l":
        return ci / n, (cj + t) / n
    return (ci + 1) / n, (cj + t) / n


_STEP = {"b": (0, -1), "t": (0, 1), "l": (-1, 0), "r": (1, 0)}
_OPPOSITE = {"b": "t", "t": "b", "l": "r", "r": "l"}


def _trace_from(ld: _LevelData, start_cell: tuple[int, int], entry_side: str):
    """Walk the level curve until it returns to the starting edge.

    Returns (points_unwrapped, wrapped_edge_ids); the final point is the
    start crossing again, displaced by the homology class.
    """
    n = ld.field.n
    ci, cj = start_cell  # unwrapped cell coordinates
    side = entry_side
    start_edge = _cell_edges(ci, cj, n)[side]
    points = [_edge_point_unwrapped(ld, side, ci, cj)]
    edges = [start_edge]
    for _ in range(4 * n * n):
        exit_side = _exit_side(ld, ci % n, cj % n, side)
        points.append(_edge_point_unwrapped(ld, exit_side, ci, cj))
        exit_edge = _cell_edges(ci, cj, n)[exit_side]
        if exit_edge == start_edge:
            return points, edges
        edges.append(exit_edge)
        di, dj = _STEP[exit_side]
        ci += di
        cj += dj
        side = _OPPOSITE[exit_side]
    raise TopologyError("level-curve walk failed to close")


def _curve_from_walk(c: float, points, edges) -> LevelCurve:
    pts = np.asarray(points)
    p = int(round(pts[-1, 0] - pts[0, 0]))
    q = int(round(pts[-1, 1] - pts[0, 1]))
    wrapped = np.mod(pts[:-1], 1.0)
    return LevelCurve(level=c, points=wrapped, homology=(p, q), crossed_edges=edges)


def trace_level_component(field: GridField, c: float, seed: tuple[int, int],
                          crit_vals=None) -> LevelCurve:
    """Trace the level-set component of f^{-1}(c) crossing the seed cell.

    ``seed`` is a grid cell (i, j).  Raises CriticalLevel when c is within
    tolerance of a critical value and NoCrossing when the seed cell does not
    straddle the level.
    """
    _assert_regular(field, c, crit_vals)
    ld = _LevelData(field, c)
    i, j = int(seed[0]) % field.n, int(seed[1]) % field.n
    for s in _SIDES:
        if ld.crossed(_cell_edges(i, j, field.n)[s]):
            points, edges = _trace_from(ld, (i, j), s)
            return _curve_from_walk(c, points, edges)
    raise NoCrossing(f"cell ({i},{j}) does not straddle level {c}")


def enumerate_level_components(field: GridField, c: float,
                               crit_vals=None) -> list[LevelCurve]:
    """All components of f^{-1}(c), each traced once, ordered by leftmost x."""
    _assert_regular(field, c, crit_vals)
    ld = _LevelData(field, c)
    n = field.n
    visited: set = set()
    curves: list[LevelCurve] = []
    hidx = np.argwhere(ld.hcross)
    vidx = np.argwhere(ld.vcross)
    for kind, idx in (("h", hidx), ("v", vidx)):
        for i, j in idx:
            edge = (kind, int(i), int(j))
            if edge in visited:
                continue
            # enter through this edge into the cell that has it as bottom/left
            cell = (int(i), int(j))
            side = "b" if kind == "h" else "l"
            points, edges = _trace_from(ld, cell, side)
            for e in edges:
                if e in visited:
                    raise TopologyError("level component traversed an edge twice")
                visited.add(e)
            curves.append(_curve_from_walk(c, points, edges))
    curves.sort(key=lambda cv: cv.leftmost_x)
    return curves
