from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class PointModel(BaseModel):
    re: str
    im: str


class WeightModel(BaseModel):
    kind: Literal["unit", "boundary_poly"] = "unit"
    vertices_theta: list[float] = Field(default_factory=list)


class PointSetFile(BaseModel):
    label: str
    weight: WeightModel = Field(default_factory=WeightModel)
    points: list[PointModel]


class WeightSummary(BaseModel):
    kind: str
    vertices: list[float] = Field(default_factory=list)
    norm_const: float


class RunConfig(BaseModel):
    command: str
    scenario: str | None = None
    params: dict[str, Any] = Field(default_factory=dict)
    seed: int
    brute_limit: int
    max_enumeration: int
    random_trials: int


class LedgerEvent(BaseModel):
    event_type: str
    data: dict[str, Any]


class Provenance(BaseModel):
    tool: str = "blaschke-stab"
    version: str
    config: RunConfig
    scenario_label: str | None = None
    events: list[LedgerEvent] = Field(default_factory=list)


class FeketeRecordRow(BaseModel):
    n: int
    points: list[list[float]]
    logV: float
    mu: float | None
    logM: float | None
    method: str


class SandwichRow(BaseModel):
    p: str
    eps: float
    R: float
    alpha: float | None = None
    K: float | None = None
    q: WeightSummary
    lower_log: float | None = None
    upper_log: float | None = None
    upper_certified_log: float | None = None
    phi_eps: float | None = None
    n0: int | None = None
    witness_lower: list[list[float]] = Field(default_factory=list)
    witness_upper: list[list[float]] = Field(default_factory=list)
    lower_exact: bool = False
    method: str
    seed: int
    flag: str | None = None


class InterpCheckRow(BaseModel):
    function: str
    p: str
    nodes: int
    grid_points: int
    norm_bound: float
    max_violation: float
    passed: bool


class EtaBlockRow(BaseModel):
    k: int
    start: int
    length: int
    mass: float
    min_log_eta: float
    max_log_eta: float
    max_log_ratio: float | None = None


class HarmonicReport(BaseModel):
    arcs: list[list[float]]
    measure: float
    eps: float
    R: float
    p: str
    omega_min: float
    omega_min_theta: float
    lower: float
    upper: float
