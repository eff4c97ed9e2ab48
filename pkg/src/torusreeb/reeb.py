"""Kronrod-Reeb graph of a torus grid field.

The graph is built by a value sweep: critical values split the range into
slabs, level components at each slab midlevel are traced (marching squares),
and slab components are attached to critical components through connected
components of PL preimages of value windows on the triangulated grid (every
square split into two triangles along the (0,0)-(1,1) diagonal, union-find
connectivity via scipy sparse connected components).  Families of regular
components that pass through a critical value unchanged are merged, so each
edge of the graph is one maximal regular family, carrying its open value
interval, a representative level curve and that curve's homology class.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import MultipleCycles, TopologyError
from .field import GridField
from .morse import (
    CriticalPoint,
    LevelCurve,
    enumerate_level_components,
    find_critical_points,
)

__all__ = ["ReebVertex", "ReebEdge", "ReebGraph", "Cycle", "build_reeb_graph",
           "find_cycle", "reeb_to_json"]


# ---------------------------------------------------------------------------
# Triangulated periodic grid
# ---------------------------------------------------------------------------

class TriangulatedGrid:
    """The N x N torus grid, each cell split along its main diagonal.

    Cell (i, j) has corners a=(i,j), b=(i+1,j), c=(i+1,j+1), d=(i,j+1) and
    triangles L=(a,b,c) (index 2*(i+N*j)) and U=(a,c,d) (index 2*(i+N*j)+1).
    Two triangles are glued within a value window [lo, hi] when their shared
    edge's value range intersects the window, which reproduces exact PL
    connectivity of the preimage f^{-1}([lo, hi]).
    """

    def __init__(self, field: GridField):
        self.field = field
        n = field.n
        v = field.values
        va = v
        vb = np.roll(v, -1, axis=0)
        vc = np.roll(v, (-1, -1), axis=(0, 1))
        vd = np.roll(v, -1, axis=1)

        def tri_minmax(x, y, z):
            return (np.minimum(np.minimum(x, y), z).ravel(order="F"),
                    np.maximum(np.maximum(x, y), z).ravel(order="F"))

        # ravel order='F' flattens as i + N*j to match cell indexing
        lmin, lmax = tri_minmax(va, vb, vc)
        umin, umax = tri_minmax(va, vc, vd)
        t = 2 * n * n
        self.tmin = np.empty(t)
        self.tmax = np.empty(t)
        self.tmin[0::2], self.tmax[0::2] = lmin, lmax
        self.tmin[1::2], self.tmax[1::2] = umin, umax

        cell = (np.arange(n * n)).reshape(n, n, order="F")  # cell[i, j]
        left_cell = np.roll(cell, 1, axis=0)
        down_cell = np.roll(cell, 1, axis=1)
        tl = 2 * cell
        tu = 2 * cell + 1
        # shared edges: diagonal a-c, bottom a-b (with U of cell below),
        # left a-d (U of this cell with L of cell to the left)
        e_u = np.concatenate([tl.ravel(order="F"), tl.ravel(order="F"),
                              tu.ravel(order="F")])
        e_v = np.concatenate([tu.ravel(order="F"),
                              (2 * down_cell + 1).ravel(order="F"),
                              (2 * left_cell).ravel(order="F")])
        emin = np.concatenate([np.minimum(va, vc).ravel(order="F"),
                               np.minimum(va, vb).ravel(order="F"),
                               np.minimum(va, vd).ravel(order="F")])
        emax = np.concatenate([np.maximum(va, vc).ravel(order="F"),
                               np.maximum(va, vb).ravel(order="F"),
                               np.maximum(va, vd).ravel(order="F")])
        self.edge_u = e_u
        self.edge_v = e_v
        self.emin = emin
        self.emax = emax
        self.n_tri = t

    def window_labels(self, lo: float, hi: float) -> np.ndarray:
        """Component labels of f^{-1}([lo, hi]); -1 outside the preimage."""
        in_tri = (self.tmin <= hi) & (self.tmax >= lo)
        in_edge = (self.emin <= hi) & (self.emax >= lo)
        u, v = self.edge_u[in_edge], self.edge_v[in_edge]
        g = coo_matrix((np.ones(len(u)), (u, v)), shape=(self.n_tri, self.n_tri))
        _, labels = connected_components(g, directed=False)
        labels = labels.astype(np.int64)
        labels[~in_tri] = -1
        return labels

    def locate(self, x: float, y: float) -> int:
        n = self.field.n
        fi, fj = x * n, y * n
        i, j = int(np.floor(fi)), int(np.floor(fj))
        u, v = fi - i, fj - j
        cell = (i % n) + n * (j % n)
        return 2 * cell + (0 if v <= u else 1)

    def neighbourhood(self, x: float, y: float) -> list[int]:
        """Triangles of the cell containing (x, y) and the 8 cells around it."""
        n = self.field.n
        i0, j0 = int(np.floor(x * n)), int(np.floor(y * n))
        tris = [self.locate(x, y)]
        for di in (0, -1, 1):
            for dj in (0, -1, 1):
                cell = ((i0 + di) % n) + n * ((j0 + dj) % n)
                tris.extend((2 * cell, 2 * cell + 1))
        return tris

    def curve_triangle(self, curve: LevelCurve) -> int:
        kind, i, j = curve.crossed_edges[0]
        n = self.field.n
        if kind == "h":  # bottom edge of cell (i, j) -> its L triangle
            return 2 * (i + n * j)
        return 2 * (i + n * j) + 1  # left edge of cell (i, j) -> its U triangle


# ---------------------------------------------------------------------------
# Graph data
# ---------------------------------------------------------------------------

@dataclass
class ReebVertex:
    id: int
    value: float
    points: list[CriticalPoint]
    degree: int = 0


@dataclass
class ReebEdge:
    id: int
    u: int            # lower vertex id
    v: int            # upper vertex id
    vmin: float
    vmax: float
    curve: LevelCurve
    homology: tuple[int, int]


@dataclass
class Cycle:
    edge_ids: list[int]


@dataclass
class ReebGraph:
    vertices: list[ReebVertex]
    edges: list[ReebEdge]
    betti1: int
    n_components: int
    field: GridField = dc_field(repr=False, default=None)
    # internals used by the decomposition: slab midlevels and, per edge,
    # its member curve + triangle per slab index
    _slab_levels: list[float] = dc_field(default_factory=list, repr=False)
    _edge_members: dict = dc_field(default_factory=dict, repr=False)

    def vertex(self, vid: int) -> ReebVertex:
        return self.vertices[vid]


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def _cluster_values(points: list[CriticalPoint], tol: float):
    """Group critical points into shared critical levels (values within tol)."""
    levels: list[float] = []
    groups: list[list[CriticalPoint]] = []
    for p in points:  # already sorted by value
        if levels and p.value - levels[-1] <= tol:
            groups[-1].append(p)
            levels[-1] = float(np.mean([q.value for q in groups[-1]]))
        else:
            levels.append(p.value)
            groups.append([p])
    return levels, groups


def _locate_in_window(tri: TriangulatedGrid, labels: np.ndarray, p: CriticalPoint) -> int:
    for t in tri.neighbourhood(p.location.x, p.location.y):
        if labels[t] >= 0:
            return int(labels[t])
    raise TopologyError(
        f"critical point at ({p.location.x:.4f}, {p.location.y:.4f}) not found "
        "in the level window of its critical value"
    )


class _FamilyUnion:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def build_reeb_graph(field: GridField) -> ReebGraph:
    """Build the Kronrod-Reeb graph of the field.

    Multiple critical components at a shared critical value yield multiple
    vertices at that value; DegenerateCritical propagates from the Morse
    validation.
    """
    crit = find_critical_points(field)
    cluster_tol = 1e-6 * field.vrange
    w, groups = _cluster_values(crit, cluster_tol)
    tri = TriangulatedGrid(field)

    if len(w) < 2:
        raise TopologyError("field has a single critical level; no sweep possible")

    min_gap = min(b - a for a, b in zip(w, w[1:]))
    # window half-width: wide enough to absorb the O(1/N^2) smooth-vs-PL value
    # offset of refined critical points, well below the slab half-width
    delta = min(4e-3 * field.vrange, 0.2 * min_gap)
    for k, grp in enumerate(groups):
        for p in grp:
            pl_val = float(field.value_at(p.location.x, p.location.y))
            delta = max(delta, 1.6 * abs(pl_val - w[k]))
    if delta >= 0.45 * min_gap:
        raise TopologyError(
            "critical values too close for the grid resolution: "
            f"window {delta:.3e} vs value gap {min_gap:.3e}"
        )

    # vertices: critical components of each critical level
    level_labels = [tri.window_labels(wk - delta, wk + delta) for wk in w]
    vertices: list[ReebVertex] = []
    vertex_of: list[dict[int, int]] = []  # per level: component label -> vertex id
    for k, grp in enumerate(groups):
        table: dict[int, int] = {}
        for p in grp:
            lab = _locate_in_window(tri, level_labels[k], p)
            if lab not in table:
                table[lab] = len(vertices)
                vertices.append(ReebVertex(id=len(vertices), value=w[k], points=[]))
            vertices[table[lab]].points.append(p)
        vertex_of.append(table)

    # slab midlevels and their level components
    slab_levels = [(a + b) / 2 for a, b in zip(w, w[1:])]
    crit_vals = w
    slab_comps: list[list[LevelCurve]] = [
        enumerate_level_components(field, c, crit_vals=crit_vals) for c in slab_levels
    ]
    slab_tris = [[tri.curve_triangle(cv) for cv in comps] for comps in slab_comps]

    # attachments of slab curves to critical-level components
    def attach(k_slab: int, k_level: int, lo: float, hi: float):
        """Map each slab-k curve to the unique level component of w[k_level]
        inside its connected piece of f^{-1}([lo, hi])."""
        region = tri.window_labels(lo, hi)
        lev = level_labels[k_level]
        both = (region >= 0) & (lev >= 0)
        pairs = {}
        for r, l in zip(region[both], lev[both]):
            if r in pairs and pairs[r] != l:
                raise TopologyError(
                    "value window contains two distinct level components; "
                    "resolution too coarse for this field"
                )
            pairs[int(r)] = int(l)
        out = []
        for t in slab_tris[k_slab]:
            r = int(region[t])
            if r < 0 or r not in pairs:
                raise TopologyError("slab curve not attached to a level component")
            out.append(pairs[r])
        return out

    n_slab = len(slab_levels)
    up_attach = [attach(k, k + 1, slab_levels[k], w[k + 1] + delta) for k in range(n_slab)]
    down_attach = [attach(k, k, w[k] - delta, slab_levels[k]) for k in range(n_slab)]

    # merge families passing through regular level components
    node_base = np.cumsum([0] + [len(c) for c in slab_comps])
    fam = _FamilyUnion(int(node_base[-1]))
    ends_up: dict[int, int] = {}
    ends_down: dict[int, int] = {}
    for k in range(n_slab):
        for idx, lab in enumerate(up_attach[k]):
            node = int(node_base[k]) + idx
            if lab in vertex_of[k + 1]:
                ends_up[node] = vertex_of[k + 1][lab]
            else:
                # regular pass-through: join with the matching curve above
                partners = [i for i, l2 in enumerate(down_attach[k + 1]) if l2 == lab]
                if len(partners) != 1:
                    raise TopologyError(
                        f"regular component at value {w[k + 1]:.6g} continues into "
                        f"{len(partners)} families"
                    )
                fam.union(node, int(node_base[k + 1]) + partners[0])
        for idx, lab in enumerate(down_attach[k]):
            node = int(node_base[k]) + idx
            if lab in vertex_of[k]:
                ends_down[node] = vertex_of[k][lab]
            elif k == 0:
                raise TopologyError("bottom slab attaches to a regular component")

    # assemble edges from family classes
    members: dict[int, list[tuple[int, int]]] = {}
    for k in range(n_slab):
        for idx in range(len(slab_comps[k])):
            node = int(node_base[k]) + idx
            members.setdefault(fam.find(node), []).append((k, idx))
    edges: list[ReebEdge] = []
    edge_members: dict[int, dict[int, tuple[LevelCurve, int]]] = {}
    for root, mem in sorted(members.items(), key=lambda kv: min(kv[1])):
        mem.sort()
        k_lo, i_lo = mem[0]
        k_hi, i_hi = mem[-1]
        lo_node = int(node_base[k_lo]) + i_lo
        hi_node = int(node_base[k_hi]) + i_hi
        if lo_node not in ends_down or hi_node not in ends_up:
            raise TopologyError("edge family with a loose end")
        u = ends_down[lo_node]
        v = ends_up[hi_node]
        vmin, vmax = vertices[u].value, vertices[v].value
        mid = (vmin + vmax) / 2
        rep_k = min(range(k_lo, k_hi + 1), key=lambda k: abs(slab_levels[k] - mid))
        rep_curve = slab_comps[rep_k][dict(mem)[rep_k]]
        eid = len(edges)
        edges.append(ReebEdge(id=eid, u=u, v=v, vmin=vmin, vmax=vmax,
                              curve=rep_curve, homology=rep_curve.homology))
        edge_members[eid] = {k: (slab_comps[k][i], slab_tris[k][i]) for k, i in mem}
        vertices[u].degree += 1
        vertices[v].degree += 1

    # graph component count (over vertices, via edges)
    comp = _FamilyUnion(len(vertices))
    for e in edges:
        comp.union(e.u, e.v)
    n_components = len({comp.find(v.id) for v in vertices})
    betti1 = len(edges) - len(vertices) + n_components

    return ReebGraph(vertices=vertices, edges=edges, betti1=betti1,
                     n_components=n_components, field=field,
                     _slab_levels=slab_levels, _edge_members=edge_members)


# ---------------------------------------------------------------------------
# Cycle extraction
# ---------------------------------------------------------------------------

def find_cycle(g: ReebGraph):
    """The unique simple cycle of the graph, or None for a tree.

    Raises MultipleCycles when betti1 > 1 (not a valid torus field input).
    """
    if g.betti1 > 1:
        raise MultipleCycles(f"betti1 = {g.betti1} > 1")
    if g.betti1 == 0:
        return None
    alive_edges = {e.id for e in g.edges}
    degree = {v.id: 0 for v in g.vertices}
    for e in g.edges:
        degree[e.u] += 1
        degree[e.v] += 1
    changed = True
    while changed:
        changed = False
        for e in list(alive_edges):
            eu, ev = g.edges[e].u, g.edges[e].v
            if degree[eu] == 1 or degree[ev] == 1:
                alive_edges.discard(e)
                degree[eu] -= 1
                degree[ev] -= 1
                changed = True
    if not alive_edges or any(
        degree[v] not in (0, 2) for v in degree
    ):
        raise MultipleCycles("cycle stripping did not leave a single simple cycle")

    # order the remaining edges into a closed walk
    incident: dict[int, list[int]] = {}
    for e in alive_edges:
        incident.setdefault(g.edges[e].u, []).append(e)
        incident.setdefault(g.edges[e].v, []).append(e)
    start_edge = min(alive_edges)
    ordered = [start_edge]
    here = g.edges[start_edge].v
    while len(ordered) < len(alive_edges):
        nxt = [e for e in incident[here] if e not in ordered]
        if not nxt:
            raise MultipleCycles("cycle walk terminated early; multiple loops present")
        ordered.append(nxt[0])
        e = g.edges[nxt[0]]
        here = e.u if e.v == here else e.v
    if here != g.edges[start_edge].u and len(alive_edges) > 1:
        raise MultipleCycles("stripped subgraph is not a single closed walk")
    return Cycle(edge_ids=ordered)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def reeb_to_json(g: ReebGraph) -> dict:
    return {
        "schema": 1,
        "vertices": [
            {
                "id": v.id,
                "value": v.value,
                "degree": v.degree,
                "points": [
                    {"x": p.location.x, "y": p.location.y,
                     "value": p.value, "index": p.index}
                    for p in v.points
                ],
            }
            for v in g.vertices
        ],
        "edges": [
            {"id": e.id, "u": e.u, "v": e.v, "vmin": e.vmin, "vmax": e.vmax,
             "homology": [e.homology[0], e.homology[1]]}
            for e in g.edges
        ],
        "betti1": g.betti1,
    }


def critical_points_json(points: list[CriticalPoint]) -> list[dict]:
    return [
        {"x": p.location.x, "y": p.location.y, "value": p.value, "index": p.index}
        for p in points
    ]
