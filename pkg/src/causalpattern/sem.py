"""Linear simulation, correlation tests, and Monte Carlo error benchmarks.

This module closes the loop around discovery: sample data from a random
linear model with Gaussian noise, answer independence queries from the data
with Fisher-z partial-correlation tests, run discovery on those answers, and
score the result against the pattern an exact oracle would have produced on
the generating graph.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Union

import numpy as np
from scipy import stats

from .errors import (
    InsufficientSamples,
    InvalidParameter,
    OracleFailure,
    OrientationCycle,
    ParseError,
    QueryInvariantViolated,
    SingularConditioning,
    UnknownVertex,
    VertexSetMismatch,
)
from .graphs import Dag, Mark, Pattern
from .pc import CiOracle, DSepOracle, pc

__all__ = [
    "random_sparse_dag",
    "LinearSem",
    "random_linear_sem",
    "sample_linear_sem",
    "Dataset",
    "partial_correlation",
    "fisher_z_independent",
    "DataOracle",
    "ci_oracle_from_data",
    "BenchmarkConfig",
    "PatternComparison",
    "compare_patterns",
    "ErrorReport",
    "monte_carlo_benchmark",
]


# ---------------------------------------------------------------------------
# Random graphs and linear models
# ---------------------------------------------------------------------------


def random_sparse_dag(n_vars: int, avg_degree: float, seed: int) -> Dag:
    """Random directed acyclic graph with the given expected average degree.

    A random vertex order is drawn, then each forward pair becomes an edge
    independently with probability ``avg_degree / (n_vars - 1)`` (capped at
    1), which makes a vertex's expected total degree ``avg_degree``.
    Vertices are named ``V01, V02, ...``.
    """
    if n_vars < 2:
        raise InvalidParameter("need at least two variables")
    if avg_degree <= 0:
        raise InvalidParameter("average degree must be positive")
    rng = np.random.default_rng(seed)
    width = max(2, len(str(n_vars)))
    names = tuple(f"V{str(i + 1).zfill(width)}" for i in range(n_vars))
    order = [names[i] for i in rng.permutation(n_vars)]
    p = min(avg_degree / (n_vars - 1), 1.0)
    edges = []
    for i in range(n_vars):
        for j in range(i + 1, n_vars):
            if rng.random() < p:
                edges.append((order[i], order[j]))
    return Dag(names, frozenset(edges))


@dataclass(frozen=True)
class LinearSem:
    """Linear model with independent Gaussian noise.

    Each variable equals the coefficient-weighted sum of its graph parents
    plus a noise term with the given standard deviation.
    """

    dag: Dag
    coefficients: Mapping[tuple[str, str], float]
    noise_sd: Mapping[str, float]

    def __post_init__(self) -> None:
        coeffs = dict(self.coefficients)
        sds = dict(self.noise_sd)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "noise_sd", sds)
        if set(coeffs) != set(self.dag.edges):
            raise InvalidParameter("coefficients must cover exactly the graph edges")
        if set(sds) != set(self.dag.vertices):
            raise InvalidParameter("noise_sd must cover exactly the graph vertices")
        for v, sd in sds.items():
            if not sd > 0:
                raise InvalidParameter(f"noise standard deviation for {v!r} must be positive")


def random_linear_sem(
    dag: Dag,
    seed: int,
    coeff_low: float = 0.5,
    coeff_high: float = 1.5,
    noise_sd: float = 1.0,
) -> LinearSem:
    """Random linear model on ``dag``: coefficient magnitudes uniform in
    ``[coeff_low, coeff_high]`` with independent random sign, shared noise
    standard deviation."""
    if not 0 < coeff_low <= coeff_high:
        raise InvalidParameter("need 0 < coeff_low <= coeff_high")
    if noise_sd <= 0:
        raise InvalidParameter("noise_sd must be positive")
    rng = np.random.default_rng(seed)
    coeffs = {}
    for edge in sorted(dag.edges):
        magnitude = float(rng.uniform(coeff_low, coeff_high))
        sign = 1.0 if rng.random() < 0.5 else -1.0
        coeffs[edge] = sign * magnitude
    return LinearSem(dag, coeffs, {v: float(noise_sd) for v in dag.vertices})


def sample_linear_sem(sem: LinearSem, n_samples: int, seed: int) -> "Dataset":
    """Draw ``n_samples`` joint observations from the linear model."""
    if n_samples < 1:
        raise InvalidParameter("need at least one sample")
    rng = np.random.default_rng(seed)
    names = sem.dag.vertices
    col = {v: i for i, v in enumerate(names)}
    values = rng.standard_normal((n_samples, len(names)))
    for i, v in enumerate(names):
        values[:, i] *= sem.noise_sd[v]
    for v in sem.dag.topological_order:
        for u in sorted(sem.dag.parents_of(v)):
            values[:, col[v]] += sem.coefficients[(u, v)] * values[:, col[u]]
    return Dataset(names, values)


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable numeric table: named columns over float64 rows."""

    columns: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        cols = tuple(self.columns)
        if len(set(cols)) != len(cols) or not cols:
            raise InvalidParameter("column names must be non-empty and unique")
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != len(cols):
            raise InvalidParameter(
                f"values must be a 2-d array with {len(cols)} columns"
            )
        if arr.shape[0] < 1:
            raise InvalidParameter("dataset needs at least one row")
        arr.setflags(write=False)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise UnknownVertex(f"no column named {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.index(name)]

    def to_csv(self) -> str:
        """Comma-separated text with a header row; floats use the shortest
        representation that round-trips exactly."""
        lines = [",".join(self.columns)]
        for row in self.values:
            lines.append(",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, *, source: str = "<string>") -> "Dataset":
        lines = [ln for ln in text.splitlines()]
        if not lines or not lines[0].strip():
            raise ParseError("missing header row", source=source, line_no=1)
        columns = tuple(tok.strip() for tok in lines[0].split(","))
        if any(not c for c in columns):
            raise ParseError("empty column name in header", source=source, line_no=1)
        rows = []
        for line_no, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            cells = line.split(",")
            if len(cells) != len(columns):
                raise ParseError(
                    f"row has {len(cells)} cells, header has {len(columns)}",
                    source=source,
                    line_no=line_no,
                )
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise ParseError(
                    f"non-numeric cell: {exc}", source=source, line_no=line_no
                ) from None
        if not rows:
            raise ParseError("no data rows", source=source, line_no=0)
        try:
            return cls(columns, np.array(rows))
        except InvalidParameter as exc:
            raise ParseError(str(exc), source=source, line_no=0) from None


# ---------------------------------------------------------------------------
# Partial correlation and the independence test
# ---------------------------------------------------------------------------


def partial_correlation(d: Dataset, x: str, y: str, s: Iterable[str] = ()) -> float:
    """Correlation of ``x`` and ``y`` after linearly removing ``s``.

    Computed from the inverse of the correlation submatrix over
    ``{x, y} ∪ s``.  Raises :class:`SingularConditioning` when that matrix is
    singular (including any zero-variance column) and
    :class:`InsufficientSamples` when fewer than ``len(s) + 3`` rows exist.
    """
    s = sorted(set(s))
    if x == y:
        raise QueryInvariantViolated("query variables must differ")
    if x in s or y in s:
        raise QueryInvariantViolated("conditioning set must not contain x or y")
    cols = [d.index(x), d.index(y)] + [d.index(v) for v in s]
    if d.n < len(s) + 3:
        raise InsufficientSamples(
            f"{d.n} rows cannot support conditioning on {len(s)} variables"
        )
    sub = d.values[:, cols]
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.corrcoef(sub, rowvar=False)
    if not np.all(np.isfinite(corr)):
        raise SingularConditioning("a selected column has zero variance")

    def snap(r: float) -> float:
        # values within rounding distance of ±1 are ±1 (duplicate columns
        # land one ulp short of 1.0 through the normalization division)
        r = float(np.clip(r, -1.0, 1.0))
        return math.copysign(1.0, r) if 1.0 - abs(r) < 4e-16 else r

    if not s:
        return snap(corr[0, 1])
    try:
        precision = np.linalg.inv(corr)
    except np.linalg.LinAlgError:
        raise SingularConditioning("correlation matrix is singular") from None
    denom = precision[0, 0] * precision[1, 1]
    if not denom > 0 or not np.isfinite(denom):
        raise SingularConditioning("correlation matrix is numerically singular")
    r = -precision[0, 1] / math.sqrt(denom)
    if not np.isfinite(r):
        raise SingularConditioning("partial correlation is undefined")
    return snap(r)


def fisher_z_independent(
    d: Dataset, x: str, y: str, s: Iterable[str], alpha: float
) -> bool:
    """Gaussian independence test: True when the z-transformed partial
    correlation is insignificant at level ``alpha`` (two-sided)."""
    if not 0 < alpha < 1:
        raise InvalidParameter("alpha must lie strictly between 0 and 1")
    s = sorted(set(s))
    if d.n <= len(s) + 3:
        raise InsufficientSamples(
            f"Fisher z needs more than {len(s) + 3} rows, dataset has {d.n}"
        )
    r = partial_correlation(d, x, y, s)
    if 1.0 - abs(r) < 1e-15:
        return False  # |z| is effectively infinite
    z = 0.5 * math.sqrt(d.n - len(s) - 3) * math.log((1 + r) / (1 - r))
    critical = float(stats.norm.ppf(1 - alpha / 2))
    return abs(z) < critical


class DataOracle(CiOracle):
    """Independence oracle backed by Fisher-z tests on a dataset.

    A singular conditioning matrix is treated as "dependent" (the
    conservative answer) and counted in ``singular_count``; too few samples
    is unrecoverable and surfaces as :class:`OracleFailure`.
    """

    def __init__(self, dataset: Dataset, alpha: float) -> None:
        super().__init__()
        if not 0 < alpha < 1:
            raise InvalidParameter("alpha must lie strictly between 0 and 1")
        self.dataset = dataset
        self.alpha = alpha
        self.singular_count = 0

    def _evaluate(self, x: str, y: str, s: frozenset[str]) -> bool:
        try:
            return fisher_z_independent(self.dataset, x, y, sorted(s), self.alpha)
        except SingularConditioning:
            self.singular_count += 1
            return False
        except InsufficientSamples as exc:
            raise OracleFailure(str(exc)) from exc

    def default_vertices(self) -> tuple[str, ...]:
        return self.dataset.columns


def ci_oracle_from_data(d: Dataset, alpha: float) -> DataOracle:
    """Convenience constructor for :class:`DataOracle`."""
    return DataOracle(d, alpha)


# ---------------------------------------------------------------------------
# Pattern comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PatternComparison:
    """Error counts of an estimated pattern against a reference pattern.

    Adjacency errors count vertex pairs; arrowhead errors count endpoint
    slots (two per edge) and consider only edges present in *both* patterns,
    since an arrowhead on a spurious or missing edge is already an adjacency
    error.
    """

    adjacency_omissions: int
    adjacency_omission_opportunities: int
    adjacency_commissions: int
    adjacency_commission_opportunities: int
    arrowhead_omissions: int
    arrowhead_omission_opportunities: int
    arrowhead_commissions: int
    arrowhead_commission_opportunities: int


def compare_patterns(truth: Pattern, estimate: Pattern) -> PatternComparison:
    """Count adjacency and arrowhead errors of ``estimate`` w.r.t. ``truth``."""
    if set(truth.vertices) != set(estimate.vertices):
        raise VertexSetMismatch("patterns are over different vertex sets")
    true_pairs = {e.pair for e in truth.edges}
    est_pairs = {e.pair for e in estimate.edges}
    n = len(truth.vertices)
    all_pairs = n * (n - 1) // 2

    shared = true_pairs & est_pairs
    arrow_om = arrow_om_opp = arrow_com = arrow_com_opp = 0
    for a, b in sorted(shared):
        for u, v in ((a, b), (b, a)):
            t = truth.mark_at(u, v)
            e = estimate.mark_at(u, v)
            if t is Mark.ARROW:
                arrow_om_opp += 1
                if e is Mark.PLAIN:
                    arrow_om += 1
            else:
                arrow_com_opp += 1
                if e is Mark.ARROW:
                    arrow_com += 1

    return PatternComparison(
        adjacency_omissions=len(true_pairs - est_pairs),
        adjacency_omission_opportunities=len(true_pairs),
        adjacency_commissions=len(est_pairs - true_pairs),
        adjacency_commission_opportunities=all_pairs - len(true_pairs),
        arrowhead_omissions=arrow_om,
        arrowhead_omission_opportunities=arrow_om_opp,
        arrowhead_commissions=arrow_com,
        arrowhead_commission_opportunities=arrow_com_opp,
    )


# ---------------------------------------------------------------------------
# Monte Carlo benchmark
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkConfig:
    """Configuration of one Monte Carlo benchmark run.

    The coefficient band and collider rule defaults are calibrated, not
    arbitrary: signed magnitudes in [0.3, 1.0] keep variables from becoming
    nearly collinear (strong coefficients let conditioning sets explain a
    true edge's endpoint almost completely, so the edge tests independent
    and is dropped), while the recorded-sepset collider rule reproduces the
    characteristic error profile of classic constraint-based discovery:
    adjacency errors and missed arrowheads in the low single digits, added
    arrowheads around twenty percent.
    """

    n_vars: int = 10
    avg_degree: float = 2.0
    n_samples: int = 5000
    alpha: float = 0.01
    n_trials: int = 100
    coeff_low: float = 0.3
    coeff_high: float = 1.0
    noise_sd: float = 1.0
    seed: int = 0
    collider_rule: str = "sepset"
    oracle: str = "data"
    jobs: int = 1

    def validate(self) -> None:
        if self.n_vars < 2:
            raise InvalidParameter("n_vars must be at least 2")
        if self.avg_degree <= 0:
            raise InvalidParameter("avg_degree must be positive")
        if self.n_samples < 1:
            raise InvalidParameter("n_samples must be positive")
        if not 0 < self.alpha < 1:
            raise InvalidParameter("alpha must lie strictly between 0 and 1")
        if self.n_trials < 1:
            raise InvalidParameter("n_trials must be positive")
        if not 0 < self.coeff_low <= self.coeff_high:
            raise InvalidParameter("need 0 < coeff_low <= coeff_high")
        if self.noise_sd <= 0:
            raise InvalidParameter("noise_sd must be positive")
        if self.collider_rule not in ("literal", "sepset"):
            raise InvalidParameter(f"unknown collider rule {self.collider_rule!r}")
        if self.oracle not in ("data", "exact"):
            raise InvalidParameter(f"unknown oracle kind {self.oracle!r}")
        if self.jobs < 1:
            raise InvalidParameter("jobs must be at least 1")


@dataclass(frozen=True)
class _TrialOutcome:
    failed: bool
    failure_kind: str = ""
    singular_queries: int = 0
    comparison: Union[PatternComparison, None] = None


def _run_trial(args: tuple[BenchmarkConfig, int]) -> _TrialOutcome:
    config, index = args
    ss = np.random.SeedSequence(config.seed, spawn_key=(index,))
    seed_dag, seed_sem, seed_data = (int(v) for v in ss.generate_state(3))
    g = random_sparse_dag(config.n_vars, config.avg_degree, seed=seed_dag)
    truth, _ = pc(DSepOracle(g))
    if config.oracle == "exact":
        oracle: CiOracle = DSepOracle(g)
    else:
        sem = random_linear_sem(
            g,
            seed=seed_sem,
            coeff_low=config.coeff_low,
            coeff_high=config.coeff_high,
            noise_sd=config.noise_sd,
        )
        data = sample_linear_sem(sem, config.n_samples, seed=seed_data)
        oracle = DataOracle(data, config.alpha)
    try:
        estimate, _ = pc(oracle, g.vertices, collider_rule=config.collider_rule)
    except (OracleFailure, OrientationCycle) as exc:
        return _TrialOutcome(
            failed=True,
            failure_kind=type(exc).__name__,
            singular_queries=getattr(oracle, "singular_count", 0),
        )
    return _TrialOutcome(
        failed=False,
        singular_queries=getattr(oracle, "singular_count", 0),
        comparison=compare_patterns(truth, estimate),
    )


@dataclass(frozen=True)
class ErrorReport:
    """Aggregated benchmark outcome.

    All rates are ratios of summed integer counts over all completed trials,
    accumulated in trial order, so a report is bit-identical across runs and
    across worker counts.
    """

    config: BenchmarkConfig
    trials_completed: int
    trials_failed: int
    failure_kinds: tuple[str, ...]
    singular_queries: int
    adjacency_omissions: int
    adjacency_omission_opportunities: int
    adjacency_commissions: int
    adjacency_commission_opportunities: int
    arrowhead_omissions: int
    arrowhead_omission_opportunities: int
    arrowhead_commissions: int
    arrowhead_commission_opportunities: int

    @staticmethod
    def _rate(num: int, den: int) -> float:
        return num / den if den else 0.0

    @property
    def adjacency_omission_rate(self) -> float:
        return self._rate(self.adjacency_omissions, self.adjacency_omission_opportunities)

    @property
    def adjacency_commission_rate(self) -> float:
        return self._rate(self.adjacency_commissions, self.adjacency_commission_opportunities)

    @property
    def arrowhead_omission_rate(self) -> float:
        return self._rate(self.arrowhead_omissions, self.arrowhead_omission_opportunities)

    @property
    def arrowhead_commission_rate(self) -> float:
        return self._rate(self.arrowhead_commissions, self.arrowhead_commission_opportunities)

    def render_kv(self) -> str:
        c = self.config
        pairs = [
            ("adjacency_commission_count", self.adjacency_commissions),
            ("adjacency_commission_opportunities", self.adjacency_commission_opportunities),
            ("adjacency_commission_rate", f"{self.adjacency_commission_rate:.6f}"),
            ("adjacency_omission_count", self.adjacency_omissions),
            ("adjacency_omission_opportunities", self.adjacency_omission_opportunities),
            ("adjacency_omission_rate", f"{self.adjacency_omission_rate:.6f}"),
            ("alpha", c.alpha),
            ("arrowhead_commission_count", self.arrowhead_commissions),
            ("arrowhead_commission_opportunities", self.arrowhead_commission_opportunities),
            ("arrowhead_commission_rate", f"{self.arrowhead_commission_rate:.6f}"),
            ("arrowhead_omission_count", self.arrowhead_omissions),
            ("arrowhead_omission_opportunities", self.arrowhead_omission_opportunities),
            ("arrowhead_omission_rate", f"{self.arrowhead_omission_rate:.6f}"),
            ("avg_degree", c.avg_degree),
            ("collider_rule", c.collider_rule),
            ("n_samples", c.n_samples),
            ("n_trials", c.n_trials),
            ("n_vars", c.n_vars),
            ("oracle", c.oracle),
            ("seed", c.seed),
            ("singular_queries", self.singular_queries),
            ("trials_completed", self.trials_completed),
            ("trials_failed", self.trials_failed),
        ]
        return "\n".join(f"{k}={v}" for k, v in pairs) + "\n"

    def render_text(self) -> str:
        c = self.config

        def line(label: str, num: int, den: int, note: str) -> str:
            return f"{label:<22} {num}/{den} = {100 * self._rate(num, den):.2f}%  ({note})"

        lines = [
            (
                f"benchmark: vars={c.n_vars} degree={c.avg_degree} samples={c.n_samples}"
                f" alpha={c.alpha} trials={c.n_trials} seed={c.seed}"
                f" oracle={c.oracle} collider_rule={c.collider_rule}"
            ),
            (
                f"trials completed: {self.trials_completed}, failed: {self.trials_failed},"
                f" singular-conditioning fallbacks: {self.singular_queries}"
            ),
            line(
                "adjacency omission:",
                self.adjacency_omissions,
                self.adjacency_omission_opportunities,
                "missing edges / true edges",
            ),
            line(
                "adjacency commission:",
                self.adjacency_commissions,
                self.adjacency_commission_opportunities,
                "extra edges / true non-edges",
            ),
            line(
                "arrowhead omission:",
                self.arrowhead_omissions,
                self.arrowhead_omission_opportunities,
                "missing arrowheads / arrowhead slots on shared edges",
            ),
            line(
                "arrowhead commission:",
                self.arrowhead_commissions,
                self.arrowhead_commission_opportunities,
                "extra arrowheads / plain slots on shared edges",
            ),
            (
                "note: arrowhead slots are edge endpoints (two per edge) and only"
                " edges present in both patterns count; arrowheads on missing or"
                " extra edges are already adjacency errors."
            ),
        ]
        if self.failure_kinds:
            lines.insert(2, "failures: " + ", ".join(self.failure_kinds))
        return "\n".join(lines) + "\n"


def monte_carlo_benchmark(config: BenchmarkConfig) -> ErrorReport:
    """Run the configured trials and aggregate their error counts.

    Trial ``i`` derives its own random streams from ``(seed, i)`` through a
    splittable seed sequence, so results do not depend on scheduling;
    aggregation walks trials in index order, so the report is identical for
    any ``jobs`` value.
    """
    config.validate()
    args = [(config, i) for i in range(config.n_trials)]
    if config.jobs == 1:
        outcomes = [_run_trial(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(_run_trial, args, chunksize=8))

    totals = dict.fromkeys(
        (
            "adjacency_omissions",
            "adjacency_omission_opportunities",
            "adjacency_commissions",
            "adjacency_commission_opportunities",
            "arrowhead_omissions",
            "arrowhead_omission_opportunities",
            "arrowhead_commissions",
            "arrowhead_commission_opportunities",
        ),
        0,
    )
    completed = 0
    failed = 0
    failure_kinds: list[str] = []
    singular = 0
    for outcome in outcomes:
        singular += outcome.singular_queries
        if outcome.failed:
            failed += 1
            failure_kinds.append(outcome.failure_kind)
            continue
        completed += 1
        cmp = outcome.comparison
        for key in totals:
            totals[key] += getattr(cmp, key)
    return ErrorReport(
        config=config,
        trials_completed=completed,
        trials_failed=failed,
        failure_kinds=tuple(failure_kinds),
        singular_queries=singular,
        **totals,
    )
