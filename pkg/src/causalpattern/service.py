"""HTTP front end: a thin JSON layer over :mod:`causalpattern.ops`.

Every route validates its body with the models in
:mod:`causalpattern.models`, delegates to the shared ops layer, and maps
domain errors onto status codes:

* 400 — a submitted document failed to parse (message names source and line)
* 404 — a queried vertex is unknown or not observed
* 422 — a request is syntactically fine but semantically invalid

A completed counterexample search that finds nothing within its bounds is a
successful computation and returns 200 with ``found: false``.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__, models, ops
from .errors import (
    CausalError,
    NotFoundWithinBounds,
    NotObserved,
    ParseError,
    UnknownVertex,
)
from .graphs import Pattern, render_pattern
from .latent import render_report

__all__ = ["create_app", "app"]


def _edge_lines(p: Pattern) -> list[str]:
    return [
        line
        for line in render_pattern(p).splitlines()
        if not line.startswith("node ")
    ]


def _error_response(status: int, exc: Exception) -> JSONResponse:
    body = models.ErrorBody(error=type(exc).__name__, detail=str(exc))
    return JSONResponse(status_code=status, content=body.model_dump())


def create_app() -> FastAPI:
    """Build the service application (importable, testable, deployable)."""
    app = FastAPI(title="causalpattern", version=__version__)

    @app.exception_handler(ParseError)
    async def _parse_error(request: Request, exc: ParseError) -> JSONResponse:
        return _error_response(400, exc)

    @app.exception_handler(UnknownVertex)
    async def _unknown_vertex(request: Request, exc: UnknownVertex) -> JSONResponse:
        return _error_response(404, exc)

    @app.exception_handler(NotObserved)
    async def _not_observed(request: Request, exc: NotObserved) -> JSONResponse:
        return _error_response(404, exc)

    @app.exception_handler(CausalError)
    async def _domain_error(request: Request, exc: CausalError) -> JSONResponse:
        return _error_response(422, exc)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/discover", response_model=models.DiscoverResponse)
    def discover(body: models.DiscoverRequest) -> models.DiscoverResponse:
        result = ops.run_discover(
            graph_text=body.graph_text,
            data_text=body.data_text,
            source=body.source,
            alpha=body.alpha,
            collider_rule=body.collider_rule,
        )
        return models.DiscoverResponse(
            pattern_text=render_pattern(result.pattern),
            vertices=list(result.pattern.vertices),
            edges=_edge_lines(result.pattern),
            oracle_kind=result.oracle_kind,
            query_count=result.query_count,
            singular_queries=result.singular_queries,
            trace=list(result.trace.render_lines()) if body.include_trace else None,
        )

    @app.post("/dsep", response_model=models.DsepResponse)
    def dsep(body: models.DsepRequest) -> models.DsepResponse:
        result = ops.run_dsep(
            graph_text=body.graph_text,
            source=body.source,
            x=body.x,
            y=body.y,
            given=tuple(body.given),
            method=body.method,
        )
        return models.DsepResponse(
            separated=result.separated,
            verdict=result.verdict,
            graph_kind=result.graph_kind,
        )

    @app.post("/claim", response_model=models.ClaimResponse)
    def claim(body: models.ClaimRequest) -> models.ClaimResponse:
        result = ops.run_claim(
            graph_text=body.graph_text,
            source=body.source,
            x=body.source_vertex,
            z=body.target_vertex,
            rule=body.rule,
            premise=body.premise,
        )
        verdict = result.verdict
        return models.ClaimResponse(
            kind=verdict.kind,
            witness=verdict.witness,
            rendered=verdict.render(),
            rule_applied=result.rule_applied,
            path=list(verdict.path) if verdict.path is not None else None,
            anchor=verdict.anchor,
        )

    @app.post("/simulate", response_model=models.SimulateResponse)
    def simulate(body: models.SimulateRequest) -> models.SimulateResponse:
        result = ops.run_simulate(
            n_vars=body.n_vars,
            avg_degree=body.avg_degree,
            n_samples=body.n_samples,
            seed=body.seed,
            coeff_low=body.coeff_low,
            coeff_high=body.coeff_high,
            noise_sd=body.noise_sd,
        )
        return models.SimulateResponse(
            csv_text=result.csv_text(),
            graph_text=result.graph_text(),
            columns=list(result.dataset.columns),
            n=result.dataset.n,
        )

    @app.post("/benchmark", response_model=models.BenchmarkResponse)
    def benchmark(body: models.BenchmarkRequest) -> models.BenchmarkResponse:
        report = ops.run_benchmark(body.to_config(ops.default_jobs()))
        return models.BenchmarkResponse(
            trials_completed=report.trials_completed,
            trials_failed=report.trials_failed,
            failure_kinds=list(report.failure_kinds),
            singular_queries=report.singular_queries,
            adjacency_omissions=report.adjacency_omissions,
            adjacency_omission_opportunities=report.adjacency_omission_opportunities,
            adjacency_omission_rate=report.adjacency_omission_rate,
            adjacency_commissions=report.adjacency_commissions,
            adjacency_commission_opportunities=report.adjacency_commission_opportunities,
            adjacency_commission_rate=report.adjacency_commission_rate,
            arrowhead_omissions=report.arrowhead_omissions,
            arrowhead_omission_opportunities=report.arrowhead_omission_opportunities,
            arrowhead_omission_rate=report.arrowhead_omission_rate,
            arrowhead_commissions=report.arrowhead_commissions,
            arrowhead_commission_opportunities=report.arrowhead_commission_opportunities,
            arrowhead_commission_rate=report.arrowhead_commission_rate,
            kv_text=report.render_kv(),
            text=report.render_text(),
        )

    @app.post("/counterexample", response_model=models.CounterexampleResponse)
    def counterexample(
        body: models.CounterexampleRequest,
    ) -> models.CounterexampleResponse:
        jobs = body.jobs if body.jobs is not None else ops.default_jobs()
        try:
            report = ops.run_counterexample(
                max_vertices=body.max_vertices,
                max_latents=body.max_latents,
                jobs=jobs,
            )
        except NotFoundWithinBounds as exc:
            return models.CounterexampleResponse(found=False, detail=str(exc))
        return models.CounterexampleResponse(
            found=True,
            report_text=render_report(report),
            source_vertex=report.x,
            target_vertex=report.z,
            instances_checked=report.instances_checked,
        )

    return app


app = create_app()
