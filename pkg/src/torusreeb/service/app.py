"""FastAPI service wrapping the analysis pipeline.

Every endpoint is a stateless compute job: field in, report out.  Package
errors map onto HTTP 422 with a stable error code and the exit code the CLI
should propagate.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..covering import build_quotient
from ..decomp import decompose, decomposition_json, orbit_curves
from ..errors import NoCycle, TorusReebError, exit_code_for
from ..field import (
    FieldExpr,
    GridField,
    parse_field_expr,
    read_field_text,
    sample_grid,
    write_field_text,
)
from ..present import (
    assemble_pi1,
    format_word,
    free_abelian_presentation,
    presentation_from_text,
    presentation_to_text,
)
from ..reeb import build_reeb_graph, critical_points_json, find_cycle, reeb_to_json
from ..svg import render_reeb_svg
from ..verification import run_verification
from .schemas import (
    AnalyzeRequest,
    AnalyzeResponse,
    DecomposeRequest,
    DecomposeResponse,
    ErrorInfo,
    FieldSpec,
    Pi1Request,
    Pi1Response,
    QuotientRequest,
    QuotientResponse,
    RenderRequest,
    RenderResponse,
    VerifyRequest,
    VerifyResponse,
)

app = FastAPI(title="torusreeb", version=__version__)


@app.exception_handler(TorusReebError)
async def _package_error(_: Request, exc: TorusReebError):
    info = ErrorInfo(error=type(exc).__name__, message=str(exc),
                     exit_code=exit_code_for(exc))
    return JSONResponse(status_code=422, content=info.model_dump())


def _field_from_spec(spec: FieldSpec) -> GridField:
    if spec.expr is not None:
        return sample_grid(parse_field_expr(spec.expr), spec.resolution)
    if spec.file_text is not None:
        loaded = read_field_text(spec.file_text)
        if isinstance(loaded, FieldExpr):
            return sample_grid(loaded, spec.resolution)
        return loaded
    return GridField(np.asarray(spec.grid, dtype=float).T.copy())


def _cycle_level(graph, cycle) -> float:
    return graph.edges[cycle.edge_ids[0]].curve.level


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/analyze", response_model=AnalyzeResponse, response_model_by_alias=True)
def analyze(req: AnalyzeRequest):
    field = _field_from_spec(req.field)
    graph = build_reeb_graph(field)
    cycle = find_cycle(graph)
    points = [p for v in graph.vertices for p in v.points]
    points.sort(key=lambda p: (p.value, p.location.x, p.location.y))
    return {
        "schema": 1,
        "critical_points": critical_points_json(points),
        "reeb": reeb_to_json(graph),
        "has_cycle": cycle is not None,
        "cycle_edges": cycle.edge_ids if cycle else None,
        "svg": render_reeb_svg(graph),
    }


def _decomposition(field: GridField, level, label_tol=None):
    graph = build_reeb_graph(field)
    cycle = find_cycle(graph)
    if cycle is None:
        raise NoCycle("Reeb graph is a tree; cyclic index undefined")
    c = _cycle_level(graph, cycle) if level is None else level
    word = decompose(field, graph, cycle, c, label_tol=label_tol)
    return graph, cycle, c, word


@app.post("/decompose", response_model=DecomposeResponse, response_model_by_alias=True)
def decompose_endpoint(req: DecomposeRequest):
    field = _field_from_spec(req.field)
    _, _, c, word = _decomposition(field, req.level, req.field.label_tol)
    return decomposition_json(word, req.chosen_curve)


@app.post("/pi1", response_model=Pi1Response, response_model_by_alias=True)
def pi1(req: Pi1Request):
    field = _field_from_spec(req.field)
    _, _, _, word = _decomposition(field, req.level, req.field.label_tol)
    n = word.cyclic_index
    if req.base_presentation is not None:
        base = presentation_from_text(req.base_presentation)
        base_source = "user"
    else:
        rank = req.assume_abelian_rank if req.assume_abelian_rank is not None else 1
        base = free_abelian_presentation(rank)
        base_source = f"assumed_abelian_rank_{rank}"
    asm = assemble_pi1(base, n)
    return {
        "schema": 1,
        "cyclic_index": n,
        "base_source": base_source,
        "generators": list(asm.presentation.generators),
        "relators": [format_word(w) for w in asm.presentation.relators],
        "presentation_text": presentation_to_text(asm.presentation),
        "eval_table": asm.eval_map(),
        "krot_table": asm.krot_map(),
    }


@app.post("/verify", response_model=VerifyResponse, response_model_by_alias=True)
def verify(req: VerifyRequest):
    return run_verification(req.n, resolution=req.resolution, eps=req.eps,
                            seed=req.seed, frames=req.frames,
                            corrupt_slide=req.corrupt_slide)


@app.post("/quotient", response_model=QuotientResponse, response_model_by_alias=True)
def quotient(req: QuotientRequest):
    field = _field_from_spec(req.field)
    n = req.n
    if n is None:
        _, _, _, word = _decomposition(field, None, req.field.label_tol)
        n = word.cyclic_index
    result = build_quotient(field, n)
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
        "quotient_field_file": write_field_text(result.quotient, prefer_expr=False),
    }


@app.post("/render", response_model=RenderResponse)
def render(req: RenderRequest):
    field = _field_from_spec(req.field)
    return {"svg": render_reeb_svg(build_reeb_graph(field))}
