"""Exception taxonomy for the causalpattern package.

Every error raised by this package derives from :class:`CausalError`, so
callers can catch one base type. Subclasses are grouped by the stage that
raises them: graph construction, separation queries, orientation, latent
analysis, data/statistics, searches, and file parsing.
"""

from __future__ import annotations


class CausalError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------------------
# Graph construction and lookup
# ---------------------------------------------------------------------------


class GraphError(CausalError):
    """Invalid graph construction or malformed graph operation."""


class CycleDetected(GraphError):
    """A directed cycle was found where an acyclic graph is required.

    Attributes
    ----------
    cycle:
        A vertex sequence ``(v0, v1, ..., v0)`` tracing one offending cycle.
    """

    def __init__(self, cycle: tuple[str, ...]):
        self.cycle = tuple(cycle)
        super().__init__("directed cycle: " + " -> ".join(self.cycle))


class SelfEdge(GraphError):
    """An edge connects a vertex to itself."""


class DuplicateEdge(GraphError):
    """The same vertex pair is linked by more than one edge."""


class DuplicateVertex(GraphError):
    """The same vertex name is declared more than once."""


class UnknownVertex(CausalError):
    """A named vertex does not exist in the graph (or dataset) at hand."""


class NotAdjacent(GraphError):
    """An edge lookup was made for a vertex pair with no edge."""


class VertexSetMismatch(CausalError):
    """Two structures that must share a vertex set do not."""


class IndexOutOfRange(CausalError):
    """A positional index lies outside the sequence it indexes."""


# ---------------------------------------------------------------------------
# Separation queries
# ---------------------------------------------------------------------------


class QueryInvariantViolated(CausalError):
    """A separation query breaks a structural precondition (x == y, endpoint
    inside the conditioning set, or an empty side where one is required)."""


class SetsNotDisjoint(CausalError):
    """Vertex sets that must be pairwise disjoint overlap."""


class EnumerationLimit(CausalError):
    """A literal-enumeration routine was asked to run beyond its size cap;
    pass ``force=True`` to accept the exponential cost deliberately."""


# ---------------------------------------------------------------------------
# Discovery and orientation
# ---------------------------------------------------------------------------


class OracleFailure(CausalError):
    """The independence oracle could not answer a query it was given."""


class OrientationCycle(CausalError):
    """Orientation propagation would create (or met) a directed cycle among
    strictly directed edges, which no acyclic generating model can produce."""


# ---------------------------------------------------------------------------
# Latent-variable analysis and claim checking
# ---------------------------------------------------------------------------


class NotAnAncestor(CausalError):
    """The queried vertex is not an ancestor of the stated target."""


class NotObserved(CausalError):
    """A vertex required to be observed is latent (or outside the observed
    margin) in the instance at hand."""


class NotAdjacentInPattern(CausalError):
    """The queried vertex pair is not adjacent in the discovered pattern."""


class InstanceTooLarge(CausalError):
    """The instance exceeds the size cap of an exhaustive routine."""


class VerificationFailed(CausalError):
    """An independently recomputed certificate disagrees with a report."""


class NotFoundWithinBounds(CausalError):
    """An exhaustive search finished without a hit.

    Attributes
    ----------
    instances_checked:
        Number of instances the search examined before giving up.
    """

    def __init__(self, message: str, instances_checked: int):
        self.instances_checked = int(instances_checked)
        super().__init__(f"{message} (instances checked: {self.instances_checked})")


# ---------------------------------------------------------------------------
# Data, statistics, and configuration
# ---------------------------------------------------------------------------


class InvalidParameter(CausalError):
    """A configuration value is outside its legal range."""


class InsufficientSamples(CausalError):
    """Too few samples for the requested statistic to be defined."""


class SingularConditioning(CausalError):
    """The conditioning correlation matrix is singular, so the partial
    correlation is undefined."""


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


class ParseError(CausalError):
    """A text document (graph file, report file, CSV) is malformed.

    Attributes
    ----------
    source:
        Name of the offending document (file name or ``"<string>"``).
    line_no:
        1-based line number of the offending line, or 0 when the problem is
        document-level.
    """

    def __init__(self, message: str, *, source: str = "<string>", line_no: int = 0):
        self.source = source
        self.line_no = int(line_no)
        where = f"{source}:{line_no}: " if line_no else f"{source}: "
        super().__init__(where + message)
