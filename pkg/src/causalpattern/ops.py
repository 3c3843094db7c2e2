"""One orchestration layer shared by the HTTP service and the CLI.

Each operation takes document text plus plain parameters, runs the
corresponding pipeline, and returns a small result object; the service
serializes results to JSON models and the command line renders them as
text, so the two front ends cannot drift apart.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Union

import numpy as np

from .dsep import d_separated_sets
from .errors import InvalidParameter, NotObserved
from .graphs import (
    Dag,
    GraphLike,
    Pattern,
    parse_dag_text,
    parse_graph_text,
    render_dag,
)
from .latent import (
    ClaimVerdict,
    CounterexampleReport,
    LatentInstance,
    definite_cause_edge,
    definite_cause_path,
    not_a_cause,
    restricted_pattern,
    search_counterexample,
)
from .pc import DSepOracle, PcTrace, pc
from .sem import (
    BenchmarkConfig,
    Dataset,
    ErrorReport,
    LinearSem,
    ci_oracle_from_data,
    monte_carlo_benchmark,
    random_linear_sem,
    random_sparse_dag,
    sample_linear_sem,
)

__all__ = [
    "JOBS_ENV_VAR",
    "default_jobs",
    "DiscoveryResult",
    "run_discover",
    "SeparationResult",
    "run_dsep",
    "ClaimResult",
    "run_claim",
    "SimulationResult",
    "run_simulate",
    "run_benchmark",
    "run_counterexample",
]

JOBS_ENV_VAR = "CAUSALPATTERN_JOBS"


def default_jobs() -> int:
    """Worker count used when no ``jobs`` value is given explicitly.

    The :data:`JOBS_ENV_VAR` environment variable overrides the machine's
    available parallelism.
    """
    raw = os.environ.get(JOBS_ENV_VAR)
    if raw is not None:
        try:
            jobs = int(raw)
        except ValueError:
            raise InvalidParameter(
                f"{JOBS_ENV_VAR} must be an integer, got {raw!r}"
            ) from None
        if jobs < 1:
            raise InvalidParameter(f"{JOBS_ENV_VAR} must be at least 1, got {jobs}")
        return jobs
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# Discovery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscoveryResult:
    """Outcome of one discovery run."""

    pattern: Pattern
    trace: PcTrace
    oracle_kind: str  # "exact" or "data"
    query_count: int
    compute_count: int
    singular_queries: int


def run_discover(
    *,
    graph_text: Union[str, None] = None,
    data_text: Union[str, None] = None,
    source: str = "<input>",
    alpha: float = 0.01,
    collider_rule: str = "literal",
) -> DiscoveryResult:
    """Discover a pattern from a directed-graph document (exact oracle) or
    from a CSV dataset (Fisher-z oracle at level ``alpha``).

    A graph document may carry an ``observe`` line, in which case discovery
    runs on the observable margin: queries are answered in the full graph
    but may mention observed vertices only.
    """
    if (graph_text is None) == (data_text is None):
        raise InvalidParameter("provide exactly one of graph_text and data_text")
    if graph_text is not None:
        g, observed = parse_dag_text(graph_text, source=source)
        oracle = DSepOracle(g, within=observed)
        kind = "exact"
    else:
        dataset = Dataset.from_csv(data_text, source=source)
        oracle = ci_oracle_from_data(dataset, alpha)
        kind = "data"
    pattern, trace = pc(oracle, collider_rule=collider_rule)
    return DiscoveryResult(
        pattern=pattern,
        trace=trace,
        oracle_kind=kind,
        query_count=oracle.query_count,
        compute_count=oracle.compute_count,
        singular_queries=getattr(oracle, "singular_count", 0),
    )


# ---------------------------------------------------------------------------
# Separation queries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeparationResult:
    """Outcome of one separation query."""

    separated: bool
    graph_kind: str  # "dag" or "pattern"

    @property
    def verdict(self) -> str:
        return "independent" if self.separated else "dependent"


def run_dsep(
    *,
    graph_text: str,
    source: str = "<input>",
    x: str,
    y: str,
    given: tuple[str, ...] = (),
    method: str = "reach",
) -> SeparationResult:
    """Answer one separation query against a graph or pattern document.

    On a directed-graph document with an ``observe`` line, the query may
    mention observed vertices only, while separation is still decided in the
    full graph.
    """
    kind, graph, observed = parse_graph_text(graph_text, source=source)
    if observed is not None:
        outside = sorted({x, y, *given} - observed)
        if outside:
            raise NotObserved(f"query mentions unobservable vertices {outside}")
    separated = d_separated_sets(graph, {x}, {y}, given, method=method)
    return SeparationResult(separated=separated, graph_kind=kind)


# ---------------------------------------------------------------------------
# Claim queries
# ---------------------------------------------------------------------------

CLAIM_RULES = ("auto", "thm2", "thm3", "cor1")


@dataclass(frozen=True)
class ClaimResult:
    """Outcome of one causal-claim query."""

    verdict: ClaimVerdict
    rule_applied: str  # "thm2", "thm3", or "cor1"
    graph_kind: str


def _pattern_for_claims(kind: str, graph: GraphLike, observed) -> Pattern:
    if kind == "pattern":
        return graph
    assert isinstance(graph, Dag)
    inst = LatentInstance(graph, observed if observed is not None else frozenset(graph.vertices))
    return restricted_pattern(inst)


def run_claim(
    *,
    graph_text: str,
    source: str = "<input>",
    x: str,
    z: str,
    rule: str = "auto",
    premise: str = "arrow",
) -> ClaimResult:
    """Answer "does ``x`` definitely cause / definitely not cause ``z``?".

    Pattern documents are queried directly.  A directed-graph document is
    first turned into the pattern its observable margin induces (the whole
    graph when it has no ``observe`` line).

    ``rule`` picks the procedure: ``thm2`` certifies *absence* of causation
    from the absence of a semi-directed path, ``thm3`` certifies causation
    from a single anchored non-triangle edge, ``cor1`` from a strictly
    directed path of such links.  ``auto`` tries the positive rules first
    (thm3 for the sharper single-edge witness, then cor1) and otherwise
    reports thm2's verdict, which is either NotACause or an Undetermined
    explaining the semi-directed path that keeps causation possible.
    """
    if rule not in CLAIM_RULES:
        raise InvalidParameter(f"unknown rule {rule!r}; expected one of {CLAIM_RULES}")
    kind, graph, observed = parse_graph_text(graph_text, source=source)
    p = _pattern_for_claims(kind, graph, observed)
    if rule == "thm2":
        return ClaimResult(not_a_cause(p, x, z), "thm2", kind)
    if rule == "thm3":
        return ClaimResult(definite_cause_edge(p, x, z, premise=premise), "thm3", kind)
    if rule == "cor1":
        return ClaimResult(definite_cause_path(p, x, z, premise=premise), "cor1", kind)
    edge_verdict = definite_cause_edge(p, x, z, premise=premise)
    if edge_verdict.kind == "DefiniteCause":
        return ClaimResult(edge_verdict, "thm3", kind)
    path_verdict = definite_cause_path(p, x, z, premise=premise)
    if path_verdict.kind == "DefiniteCause":
        return ClaimResult(path_verdict, "cor1", kind)
    return ClaimResult(not_a_cause(p, x, z), "thm2", kind)


# ---------------------------------------------------------------------------
# Simulation, benchmark, counterexample search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimulationResult:
    """A generated graph, its linear model, and one sampled dataset."""

    graph: Dag
    sem: LinearSem
    dataset: Dataset

    def graph_text(self) -> str:
        return render_dag(self.graph)

    def csv_text(self) -> str:
        return self.dataset.to_csv()


def run_simulate(
    *,
    n_vars: int,
    avg_degree: float,
    n_samples: int,
    seed: int,
    coeff_low: float = 0.5,
    coeff_high: float = 1.5,
    noise_sd: float = 1.0,
) -> SimulationResult:
    """Generate a sparse graph, a random linear model on it, and samples.

    The three random stages draw from independent streams spawned from
    ``seed``, so the result is a pure function of the arguments.
    """
    ss = np.random.SeedSequence(seed)
    seed_dag, seed_sem, seed_data = (int(v) for v in ss.generate_state(3))
    g = random_sparse_dag(n_vars, avg_degree, seed=seed_dag)
    sem = random_linear_sem(
        g, seed=seed_sem, coeff_low=coeff_low, coeff_high=coeff_high, noise_sd=noise_sd
    )
    dataset = sample_linear_sem(sem, n_samples, seed=seed_data)
    return SimulationResult(graph=g, sem=sem, dataset=dataset)


def run_benchmark(config: BenchmarkConfig) -> ErrorReport:
    """Run the Monte Carlo benchmark (validates the config first)."""
    return monte_carlo_benchmark(config)


def run_counterexample(
    *, max_vertices: int, max_latents: int, jobs: int = 1
) -> CounterexampleReport:
    """Search for a counterexample to the strengthened causation claim.

    Raises :class:`causalpattern.errors.NotFoundWithinBounds` when the
    bounds admit none.
    """
    return search_counterexample(max_vertices, max_latents, jobs=jobs)
