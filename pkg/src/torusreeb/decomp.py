"""Annular decomposition along non-separating level curves.

Cutting the torus along all non-separating components of a regular level
f^{-1}(c) on the Reeb cycle leaves m cylinder blocks, cyclically ordered.
Each block carries the piece of the Reeb graph it contains (interior critical
vertices plus two boundary stubs), blocks are compared by labelled-graph
isomorphism, and the cyclic index n is the order of the rotation symmetry
group of the resulting cyclic word.  Only rotations count: reflections act by
-1 on homology and are never isotopic to the identity.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field as dc_field

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import NoCrossing, NoCycle, TopologyError
from .field import GridField
from .morse import LevelCurve, enumerate_level_components
from .reeb import Cycle, ReebGraph, TriangulatedGrid

__all__ = ["Block", "CyclicBlockWord", "decompose", "cyclic_index",
           "orbit_curves", "rotation_symmetry_order", "decomposition_json"]

EXPR_LABEL_TOL = 1e-4
GRID_LABEL_TOL = 1e-2


@dataclass
class Block:
    index: int
    left_curve: int
    right_curve: int
    critical_values: list[float]
    vertex_ids: list[int]
    graph: nx.MultiGraph = dc_field(repr=False, default=None)


@dataclass
class CyclicBlockWord:
    blocks: list[Block]
    curves: list[LevelCurve]
    level: float
    word: list[int]            # equivalence class label per block
    symmetry_order: int        # g = order of the label-preserving rotation group
    period: int                # primitive period m // g
    label_tol: float

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def cyclic_index(self) -> int:
        return self.symmetry_order


# ---------------------------------------------------------------------------
# Cell regions between the cut curves
# ---------------------------------------------------------------------------

def _barrier_cells(n: int, curves: list[LevelCurve]) -> np.ndarray:
    barrier = np.zeros((n, n), dtype=bool)
    for cv in curves:
        for kind, i, j in cv.crossed_edges:
            barrier[i, j] = True
            if kind == "h":
                barrier[i, (j - 1) % n] = True
            else:
                barrier[(i - 1) % n, j] = True
    return barrier


def _region_labels(n: int, barrier: np.ndarray) -> np.ndarray:
    free = ~barrier
    idx = np.arange(n * n).reshape(n, n)  # cell (i, j) -> i*n + j
    rows, cols = [], []
    for axis in (0, 1):
        nb = np.roll(idx, -1, axis=axis)
        ok = free & np.roll(free, -1, axis=axis)
        rows.append(idx[ok])
        cols.append(nb[ok])
    g = coo_matrix(
        (np.ones(sum(len(r) for r in rows)),
         (np.concatenate(rows), np.concatenate(cols))),
        shape=(n * n, n * n),
    )
    _, labels = connected_components(g, directed=False)
    labels = labels.astype(np.int64).reshape(n, n)
    labels[barrier] = -1
    return labels


def _probe_region(labels: np.ndarray, x: float, y: float, direction: int, n: int) -> int:
    """Region label found by stepping from (x, y) in +/-x until off the barrier."""
    j = int(np.floor(y * n)) % n
    i0 = int(np.floor(x * n))
    for step in range(1, n // 2):
        lab = labels[(i0 + direction * step) % n, j]
        if lab >= 0:
            return int(lab)
    raise TopologyError("no open region found next to a cut curve")


def _nearest_region(labels: np.ndarray, x: float, y: float, n: int) -> int:
    i0 = int(np.floor(x * n)) % n
    j0 = int(np.floor(y * n)) % n
    if labels[i0, j0] >= 0:
        return int(labels[i0, j0])
    for radius in range(1, n // 2):
        ring = []
        for di in range(-radius, radius + 1):
            for dj in range(-radius, radius + 1):
                if max(abs(di), abs(dj)) == radius:
                    ring.append(labels[(i0 + di) % n, (j0 + dj) % n])
        hit = [int(v) for v in ring if v >= 0]
        if hit:
            return hit[0]
    raise TopologyError("point is isolated by cut curves")


# ---------------------------------------------------------------------------
# Decomposition
# ---------------------------------------------------------------------------

def label_tolerance(field: GridField) -> float:
    rel = EXPR_LABEL_TOL if field.source is not None else GRID_LABEL_TOL
    return rel * field.vrange


def decompose(field: GridField, reeb: ReebGraph, cycle: Cycle | None,
              c: float, label_tol: float | None = None) -> CyclicBlockWord:
    """Cut along all non-separating components of f^{-1}(c) and build the
    cyclic word of cylinder blocks.

    ``c`` must be a regular value inside some cycle-edge interval; a tree
    Reeb graph (cycle is None) raises NoCycle since the cyclic index is
    undefined there.  ``label_tol`` overrides the relative value tolerance
    used for block equivalence.
    """
    if cycle is None:
        raise NoCycle("Reeb graph is a tree; cyclic index undefined")
    n = field.n
    comps = enumerate_level_components(field, c)  # CriticalLevel raised here
    cut = [cv for cv in comps if cv.is_nonseparating]
    if not cut:
        raise NoCrossing(f"level {c} has no non-separating components")
    m = len(cut)

    barrier = _barrier_cells(n, cut)
    labels = _region_labels(n, barrier)
    region_ids = sorted({int(v) for v in labels[labels >= 0]})
    if len(region_ids) != m:
        raise TopologyError(
            f"cutting along {m} curves produced {len(region_ids)} regions"
        )

    # cyclic order: curves already sorted by leftmost x; block i sits right of
    # curve i and left of curve i+1
    right_of = []
    left_of = []
    for cv in cut:
        x0, y0 = cv.points[0]
        right_of.append(_probe_region(labels, x0, y0, +1, n))
        left_of.append(_probe_region(labels, x0, y0, -1, n))
    for i in range(m):
        if right_of[i] != left_of[(i + 1) % m]:
            raise TopologyError("cut curves are not cyclically ordered by x")
    if sorted(right_of) != region_ids:
        raise TopologyError("blocks and regions do not correspond bijectively")

    region_to_block = {region: i for i, region in enumerate(right_of)}

    # assign Reeb vertices to blocks through their critical points
    vertex_block: dict[int, int] = {}
    for v in reeb.vertices:
        blocks_hit = {
            region_to_block[_nearest_region(labels, p.location.x, p.location.y, n)]
            for p in v.points
        }
        if len(blocks_hit) != 1:
            raise TopologyError(f"critical component {v.id} straddles a cut curve")
        vertex_block[v.id] = blocks_hit.pop()

    # split edges into cut edges (family contains a level-c curve) and
    # interior edges
    cut_edge_ids = [e.id for e in reeb.edges if e.vmin < c < e.vmax
                    and e.homology != (0, 0)]
    if len(cut_edge_ids) != m:
        raise TopologyError(
            f"{m} cut curves but {len(cut_edge_ids)} cycle edges cross level {c}"
        )
    curve_edge = _match_curves_to_edges(field, reeb, cut, cut_edge_ids, c)

    # which side of curve i carries values above c
    side_above = []
    for cv in cut:
        x0, y0 = cv.points[0]
        probe_x = (x0 + 2.5 / n) % 1.0
        side_above.append(float(field.value_at(probe_x, y0)) > c)

    blocks: list[Block] = []
    for i in range(m):
        g = nx.MultiGraph()
        g.add_node("L", kind="L")
        g.add_node("R", kind="R")
        vids = sorted(v for v, b in vertex_block.items() if b == i)
        for vid in vids:
            g.add_node(vid, kind="crit", value=reeb.vertices[vid].value)
        for e in reeb.edges:
            if e.id in curve_edge.values():
                continue
            if vertex_block[e.u] == i and vertex_block[e.v] == i:
                g.add_edge(e.u, e.v)
            elif vertex_block[e.u] == i or vertex_block[e.v] == i:
                raise TopologyError(f"uncut edge {e.id} crosses a cut curve")
        # boundary stubs: block i is right of curve i and left of curve i+1
        for boundary, curve_idx in (("L", i), ("R", (i + 1) % m)):
            e = reeb.edges[curve_edge[curve_idx]]
            right_is_above = side_above[curve_idx]
            into_block_above = right_is_above if boundary == "L" else not right_is_above
            anchor = e.v if into_block_above else e.u
            if vertex_block[anchor] != i:
                raise TopologyError("cut-edge stub anchors outside its block")
            g.add_edge(boundary, anchor)
        values = sorted(
            p.value for vid in vids for p in reeb.vertices[vid].points
        )
        blocks.append(Block(index=i, left_curve=i, right_curve=(i + 1) % m,
                            critical_values=values, vertex_ids=vids, graph=g))

    tol = label_tol * field.vrange if label_tol is not None else label_tolerance(field)
    word = _classify_blocks(blocks, tol)
    g_order = rotation_symmetry_order(word)
    return CyclicBlockWord(blocks=blocks, curves=cut, level=c, word=word,
                           symmetry_order=g_order, period=m // g_order,
                           label_tol=tol)


def _match_curves_to_edges(field: GridField, reeb: ReebGraph,
                           cut: list[LevelCurve], cut_edge_ids: list[int],
                           c: float) -> dict[int, int]:
    """Map cut-curve index -> Reeb edge id via PL connectivity inside the slab."""
    ws = sorted({v.value for v in reeb.vertices})
    k_c = bisect.bisect_right(ws, c) - 1
    tri = TriangulatedGrid(field)
    out: dict[int, int] = {}
    used: set[int] = set()
    for idx, cv in enumerate(cut):
        t_curve = tri.curve_triangle(cv)
        match = None
        for eid in cut_edge_ids:
            members = reeb._edge_members.get(eid, {})
            if k_c not in members:
                raise TopologyError(f"cut edge {eid} has no family member in the slab of {c}")
            member_curve, member_tri = members[k_c]
            lo, hi = sorted((c, member_curve.level))
            labels = tri.window_labels(lo, hi)
            if labels[t_curve] >= 0 and labels[t_curve] == labels[member_tri]:
                match = eid
                break
        if match is None or match in used:
            raise TopologyError("could not match a cut curve to a unique cycle edge")
        used.add(match)
        out[idx] = match
    return out


# ---------------------------------------------------------------------------
# Block equivalence and the cyclic word
# ---------------------------------------------------------------------------

def _blocks_equivalent(b1: Block, b2: Block, tol: float) -> bool:
    if len(b1.critical_values) != len(b2.critical_values):
        return False
    if any(abs(a - b) > tol for a, b in zip(b1.critical_values, b2.critical_values)):
        return False

    def node_match(a, b):
        if a["kind"] != b["kind"]:
            return False
        if a["kind"] == "crit":
            return abs(a["value"] - b["value"]) <= tol
        return True

    matcher = nx.algorithms.isomorphism.MultiGraphMatcher(
        b1.graph, b2.graph, node_match=node_match
    )
    return matcher.is_isomorphic()


def _classify_blocks(blocks: list[Block], tol: float) -> list[int]:
    reps: list[Block] = []
    word: list[int] = []
    for b in blocks:
        for label, rep in enumerate(reps):
            if _blocks_equivalent(b, rep, tol):
                word.append(label)
                break
        else:
            word.append(len(reps))
            reps.append(b)
    return word


def rotation_symmetry_order(word: list[int]) -> int:
    """Order of the group of label-preserving rotations of a cyclic word."""
    m = len(word)
    if m == 0:
        raise ValueError("empty word")
    count = 0
    for r in range(m):
        if all(word[(i + r) % m] == word[i] for i in range(m)):
            count += 1
    return count


def cyclic_index(word: CyclicBlockWord) -> int:
    """n = order of the rotation symmetry group = m / primitive period."""
    return rotation_symmetry_order(word.word)


def orbit_curves(word: CyclicBlockWord, chosen_curve: int) -> list[int]:
    """The n cut curves in the rotation orbit of the chosen one.

    Consecutive pairs bound the cylinders the wreath construction runs over.
    """
    if not 0 <= chosen_curve < word.m:
        raise ValueError(f"curve {chosen_curve} out of range")
    n = word.symmetry_order
    step = word.period
    return [(chosen_curve + k * step) % word.m for k in range(n)]


def decomposition_json(word: CyclicBlockWord, chosen_curve: int = 0) -> dict:
    return {
        "schema": 1,
        "m": word.m,
        "level": word.level,
        "word": list(word.word),
        "cyclic_index": word.cyclic_index,
        "orbit": orbit_curves(word, chosen_curve),
        "blocks": [
            {"id": b.index, "left": b.left_curve, "right": b.right_curve,
             "critical_values": b.critical_values}
            for b in word.blocks
        ],
    }
