"""Pydantic request/response models for the service endpoints."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field, model_validator


class FieldSpec(BaseModel):
    """One torus field: an expression, a raw grid, or a field file's text.

    ``grid`` rows follow the field file convention (row = y index); exactly
    one of the three inputs must be given.  ``resolution`` applies when the
    field comes from an expression.
    """

    expr: Optional[str] = None
    grid: Optional[list[list[float]]] = None
    file_text: Optional[str] = None
    resolution: int = 256
    label_tol: Optional[float] = Field(
        default=None, description="relative block-label tolerance override"
    )

    @model_validator(mode="after")
    def _one_source(self):
        given = sum(v is not None for v in (self.expr, self.grid, self.file_text))
        if given != 1:
            raise ValueError("exactly one of expr, grid, file_text is required")
        return self


class CriticalPointOut(BaseModel):
    x: float
    y: float
    value: float
    index: int


class ReebVertexOut(BaseModel):
    id: int
    value: float
    degree: int
    points: list[CriticalPointOut]


class ReebEdgeOut(BaseModel):
    id: int
    u: int
    v: int
    vmin: float
    vmax: float
    homology: list[int]


class ReebGraphOut(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    vertices: list[ReebVertexOut]
    edges: list[ReebEdgeOut]
    betti1: int

    model_config = {"populate_by_name": True}


class AnalyzeRequest(BaseModel):
    field: FieldSpec


class AnalyzeResponse(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    critical_points: list[CriticalPointOut]
    reeb: ReebGraphOut
    has_cycle: bool
    cycle_edges: Optional[list[int]] = None
    svg: str

    model_config = {"populate_by_name": True}


class DecomposeRequest(BaseModel):
    field: FieldSpec
    level: Optional[float] = None
    chosen_curve: int = 0


class BlockOut(BaseModel):
    id: int
    left: int
    right: int
    critical_values: list[float]


class DecomposeResponse(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    m: int
    level: float
    word: list[int]
    cyclic_index: int
    orbit: list[int]
    blocks: list[BlockOut]

    model_config = {"populate_by_name": True}


class Pi1Request(BaseModel):
    field: FieldSpec
    level: Optional[float] = None
    base_presentation: Optional[str] = Field(
        default=None, description="presentation text format: 'gens: ...' / 'rels: ...'"
    )
    assume_abelian_rank: Optional[int] = None

    @model_validator(mode="after")
    def _base_choice(self):
        if self.base_presentation is not None and self.assume_abelian_rank is not None:
            raise ValueError("give base_presentation or assume_abelian_rank, not both")
        return self


class Pi1Response(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    cyclic_index: int
    base_source: str
    generators: list[str]
    relators: list[str]
    presentation_text: str
    eval_table: dict[str, int]
    krot_table: dict[str, int]

    model_config = {"populate_by_name": True}


class VerifyRequest(BaseModel):
    n: int = Field(ge=1)
    resolution: int = 256
    eps: Optional[float] = None
    seed: int = 0
    frames: int = 16
    corrupt_slide: bool = False


class CheckOut(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class VerifyResponse(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    n: int
    resolution: int
    eps: float
    seed: int
    all_passed: bool
    checks: list[CheckOut]

    model_config = {"populate_by_name": True}


class QuotientRequest(BaseModel):
    field: FieldSpec
    n: Optional[int] = Field(
        default=None, description="cyclic index; computed from the field when omitted"
    )


class QuotientInfo(BaseModel):
    critical_count: int
    betti1: int
    cyclic_index: int


class QuotientResponse(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    n: int
    commutation_error: float
    invariance_error: float
    quotient: QuotientInfo
    quotient_field_file: str

    model_config = {"populate_by_name": True}


class RenderRequest(BaseModel):
    field: FieldSpec


class RenderResponse(BaseModel):
    svg: str


class ErrorInfo(BaseModel):
    error: str
    message: str
    exit_code: int
