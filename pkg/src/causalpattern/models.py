"""Request and response bodies of the HTTP service.

Pydantic validates shapes, enum values, and numeric types at the boundary;
domain rules (acyclicity, observability, disjointness, ...) stay in the core
modules and surface through the service's exception handlers.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from .sem import BenchmarkConfig

__all__ = [
    "DiscoverRequest",
    "DiscoverResponse",
    "DsepRequest",
    "DsepResponse",
    "ClaimRequest",
    "ClaimResponse",
    "SimulateRequest",
    "SimulateResponse",
    "BenchmarkRequest",
    "BenchmarkResponse",
    "CounterexampleRequest",
    "CounterexampleResponse",
    "ErrorBody",
]


class DiscoverRequest(BaseModel):
    graph_text: Optional[str] = None
    data_text: Optional[str] = None
    alpha: float = 0.01
    collider_rule: Literal["literal", "sepset"] = "literal"
    include_trace: bool = False
    source: str = "<request>"


class DiscoverResponse(BaseModel):
    pattern_text: str
    vertices: list[str]
    edges: list[str]
    oracle_kind: Literal["exact", "data"]
    query_count: int
    singular_queries: int
    trace: Optional[list[str]] = None


class DsepRequest(BaseModel):
    graph_text: str
    x: str
    y: str
    given: list[str] = Field(default_factory=list)
    method: Literal["reach", "enum"] = "reach"
    source: str = "<request>"


class DsepResponse(BaseModel):
    separated: bool
    verdict: Literal["independent", "dependent"]
    graph_kind: Literal["dag", "pattern"]


class ClaimRequest(BaseModel):
    graph_text: str
    source_vertex: str
    target_vertex: str
    rule: Literal["auto", "thm2", "thm3", "cor1"] = "auto"
    premise: Literal["arrow", "strict"] = "arrow"
    source: str = "<request>"


class ClaimResponse(BaseModel):
    kind: Literal["DefiniteCause", "NotACause", "Undetermined"]
    witness: str
    rendered: str
    rule_applied: Literal["thm2", "thm3", "cor1"]
    path: Optional[list[str]] = None
    anchor: Optional[str] = None


class SimulateRequest(BaseModel):
    n_vars: int = 10
    avg_degree: float = 2.0
    n_samples: int = 1000
    seed: int = 0
    coeff_low: float = 0.5
    coeff_high: float = 1.5
    noise_sd: float = 1.0


class SimulateResponse(BaseModel):
    csv_text: str
    graph_text: str
    columns: list[str]
    n: int


class BenchmarkRequest(BaseModel):
    n_vars: int = 10
    avg_degree: float = 2.0
    n_samples: int = 5000
    alpha: float = 0.01
    n_trials: int = 100
    coeff_low: float = 0.3
    coeff_high: float = 1.0
    noise_sd: float = 1.0
    seed: int = 0
    collider_rule: Literal["literal", "sepset"] = "sepset"
    oracle: Literal["data", "exact"] = "data"
    jobs: Optional[int] = None

    def to_config(self, default_jobs: int) -> BenchmarkConfig:
        return BenchmarkConfig(
            n_vars=self.n_vars,
            avg_degree=self.avg_degree,
            n_samples=self.n_samples,
            alpha=self.alpha,
            n_trials=self.n_trials,
            coeff_low=self.coeff_low,
            coeff_high=self.coeff_high,
            noise_sd=self.noise_sd,
            seed=self.seed,
            collider_rule=self.collider_rule,
            oracle=self.oracle,
            jobs=self.jobs if self.jobs is not None else default_jobs,
        )


class BenchmarkResponse(BaseModel):
    trials_completed: int
    trials_failed: int
    failure_kinds: list[str]
    singular_queries: int
    adjacency_omissions: int
    adjacency_omission_opportunities: int
    adjacency_omission_rate: float
    adjacency_commissions: int
    adjacency_commission_opportunities: int
    adjacency_commission_rate: float
    arrowhead_omissions: int
    arrowhead_omission_opportunities: int
    arrowhead_omission_rate: float
    arrowhead_commissions: int
    arrowhead_commission_opportunities: int
    arrowhead_commission_rate: float
    kv_text: str
    text: str


class CounterexampleRequest(BaseModel):
    max_vertices: int
    max_latents: int
    jobs: Optional[int] = None


class CounterexampleResponse(BaseModel):
    found: bool
    detail: Optional[str] = None
    report_text: Optional[str] = None
    source_vertex: Optional[str] = None
    target_vertex: Optional[str] = None
    instances_checked: Optional[int] = None


class ErrorBody(BaseModel):
    error: str
    detail: str
