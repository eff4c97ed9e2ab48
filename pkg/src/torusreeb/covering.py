"""The Z_n-quotient of a field invariant under x -> x + 1/n.

The deck rotation by 1/n acts freely; the covering map p(x, y) =
(n*x mod 1, y) relates the field f to its quotient through f = fhat o p.
The quotient keeps the full grid resolution in the rescaled coordinate
(supersampled through the source expression when one exists) and is pushed
through the whole Reeb + decomposition pipeline: it keeps the single cycle
but has cyclic index 1, and divides the critical point count by n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decomp import decompose
from .errors import NoCrossing, NotInvariant
from .field import GridField, sample_grid
from .morse import find_critical_points
from .reeb import build_reeb_graph, find_cycle

__all__ = ["QuotientResult", "build_quotient", "covering_map", "quotient_json"]


class RescaledField:
    """Analytic source of the quotient: evaluate(u, y) = base(u/n, y)."""

    def __init__(self, base, n: int):
        self.base = base
        self.n = n

    def evaluate(self, u, y):
        return self.base.evaluate(np.asarray(u, dtype=float) / self.n, y)


@dataclass
class QuotientResult:
    n: int
    quotient: GridField
    commutation_error: float
    invariance_error: float
    quotient_critical_count: int
    quotient_betti1: int
    quotient_cyclic_index: int


def covering_map(n: int):
    """p(x, y) = (n*x mod 1, y): the n-sheet covering of the quotient torus."""

    def p(x, y):
        return (np.asarray(x, dtype=float) * n) % 1.0, np.asarray(y, dtype=float)

    return p


def _invariance_error(field: GridField, n: int) -> float:
    c = np.arange(field.n, dtype=float) / field.n
    xs, ys = np.meshgrid(c, c, indexing="ij")
    shifted = np.asarray(field.exact_at((xs + 1.0 / n) % 1.0, ys))
    return float(np.abs(shifted - field.values).max())


def build_quotient(field: GridField, n: int) -> QuotientResult:
    """Quotient by the free rotation x -> x + 1/n and verify the diagram.

    ``n`` must be the cyclic index of the field; NotInvariant is raised when
    the 1/n-rotation does not preserve the field within tolerance (the
    claimed index was wrong).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    tol = (1e-9 if field.source is not None else 1e-3 * field.vrange)
    inv_err = _invariance_error(field, n)
    if inv_err > tol:
        raise NotInvariant(
            f"1/{n}-rotation changes the field by {inv_err:.3e} (tol {tol:.1e}); "
            "the claimed cyclic index does not match the field"
        )

    res = field.n
    if field.source is not None:
        source = RescaledField(field.source, n)
        quotient = sample_grid(source, res)
    else:
        c = np.arange(res, dtype=float) / res
        us, ys = np.meshgrid(c, c, indexing="ij")
        values = np.asarray(field.value_at(us / n, ys))
        quotient = GridField(values, source=None)

    # commutation f = fhat o p, measured at the grid nodes
    p = covering_map(n)
    c = np.arange(res, dtype=float) / res
    xs, ys = np.meshgrid(c, c, indexing="ij")
    px, py = p(xs, ys)
    fhat_at_p = np.asarray(quotient.exact_at(px, py))
    comm_err = float(np.abs(fhat_at_p - field.values).max())

    crit = find_critical_points(quotient)
    graph = build_reeb_graph(quotient)
    cycle = find_cycle(graph)
    if cycle is None:
        q_index = 0
    else:
        level = _regular_cycle_level(graph, cycle)
        q_index = decompose(quotient, graph, cycle, level).cyclic_index

    return QuotientResult(
        n=n,
        quotient=quotient,
        commutation_error=comm_err,
        invariance_error=inv_err,
        quotient_critical_count=len(crit),
        quotient_betti1=graph.betti1,
        quotient_cyclic_index=q_index,
    )


def _regular_cycle_level(graph, cycle) -> float:
    for eid in cycle.edge_ids:
        e = graph.edges[eid]
        return e.curve.level
    raise NoCrossing("cycle has no edges")


def quotient_json(result: QuotientResult) -> dict:
    return {
        "schema": 1,
        "n": result.n,
        "commutation_error": result.commutation_error,
        "invariance_error": result.invariance_error,
        "quotient": {
            "critical_count": result.quotient_critical_count,
            "betti1": result.quotient_betti1,
            "cyclic_index": result.quotient_cyclic_index,
        },
    }
