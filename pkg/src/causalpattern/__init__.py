"""causalpattern: constraint-based discovery of causal patterns.

The package discovers which causal orientations a set of conditional
independence facts pins down, analyzes what remains decidable when some
variables are unmeasured, certifies or refutes individual causal claims, and
measures error rates of the whole pipeline on simulated data.

Layering (each item depends only on those above it):

* :mod:`causalpattern.graphs` — directed acyclic graphs, mark-bearing
  patterns, path utilities, text serialization.
* :mod:`causalpattern.dsep` — separation queries (two independent
  implementations).
* :mod:`causalpattern.pc` — the three-stage discovery algorithm over
  pluggable independence oracles, with replayable traces.
* :mod:`causalpattern.latent` — unmeasured-variable analysis: patterns over
  an observable margin, edge/arrow certificates, claim checking, and the
  exhaustive counterexample search.
* :mod:`causalpattern.sem` — linear simulation, partial-correlation tests,
  data-backed oracles, Monte Carlo error benchmarks.
* :mod:`causalpattern.ops` / :mod:`causalpattern.service` /
  :mod:`causalpattern.cli` — one orchestration layer shared by the HTTP
  service and the command-line client.
"""

from .errors import (
    CausalError,
    CycleDetected,
    DuplicateEdge,
    DuplicateVertex,
    EnumerationLimit,
    GraphError,
    IndexOutOfRange,
    InstanceTooLarge,
    InsufficientSamples,
    InvalidParameter,
    NotAdjacent,
    NotAdjacentInPattern,
    NotAnAncestor,
    NotFoundWithinBounds,
    NotObserved,
    OracleFailure,
    OrientationCycle,
    ParseError,
    QueryInvariantViolated,
    SelfEdge,
    SetsNotDisjoint,
    SingularConditioning,
    UnknownVertex,
    VertexSetMismatch,
)
from .graphs import (
    Dag,
    Edge,
    Mark,
    Pattern,
    adjacent_aux,
    ancestors,
    bidirected,
    build_dag,
    build_pattern,
    descendants,
    directed,
    enumerate_paths,
    is_collider,
    parse_dag_text,
    parse_graph_text,
    parse_pattern_text,
    path_interior_vertices,
    render_dag,
    render_pattern,
    triangle_containing,
    undirected,
)
from .dsep import (
    ENUM_VERTEX_LIMIT,
    SepQuery,
    d_separated_enum,
    d_separated_reach,
    d_separated_sets,
)
from .pc import (
    CiOracle,
    DSepOracle,
    PcTrace,
    SepsetLog,
    pattern_represents,
    pc,
    pc_orient_colliders,
    pc_orient_propagate,
    pc_skeleton,
    unshielded_colliders,
)
from .latent import (
    ClaimVerdict,
    CounterexampleReport,
    LatentInstance,
    arrowhead_certificate,
    definite_cause_edge,
    definite_cause_path,
    inducing_path_exists,
    inducing_paths,
    not_a_cause,
    parse_report,
    random_instance,
    render_report,
    restricted_pattern,
    search_counterexample,
    semi_directed_path_exists,
    separation_equivalence,
    shieldable_ancestor,
    verify_counterexample,
)
from .sem import (
    BenchmarkConfig,
    DataOracle,
    Dataset,
    ErrorReport,
    LinearSem,
    PatternComparison,
    ci_oracle_from_data,
    compare_patterns,
    fisher_z_independent,
    monte_carlo_benchmark,
    partial_correlation,
    random_linear_sem,
    random_sparse_dag,
    sample_linear_sem,
)

__version__ = "0.1.0"
