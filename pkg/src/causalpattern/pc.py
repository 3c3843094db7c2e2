"""Constraint-based discovery of causal patterns from independence queries.

The algorithm asks an oracle conditional-independence questions and builds a
:class:`~causalpattern.graphs.Pattern` in three stages:

* **skeleton** — start from the complete undirected graph and delete the
  edge ``a - b`` as soon as some conditioning set separates ``a`` from
  ``b``; candidate sets are drawn, at growing cardinality, from vertices
  that are adjacent to ``a`` or ``b`` *and* lie on a path between them in
  the current working graph, both recomputed live as edges disappear.
* **collider orientation** — each unshielded triple ``a - b - c`` (``a``,
  ``c`` non-adjacent) gets arrowheads at ``b`` exactly when no candidate
  conditioning set containing ``b`` separates ``a`` from ``c``.  Triple
  decisions are independent of one another and arrowheads accumulate, so a
  pair of triples may leave an edge with arrowheads at both ends.
* **propagation** — two sound closure rules add arrowheads forced by the
  ones already present, rescanning until a fixpoint.

Every edge deletion and orientation is appended to a :class:`PcTrace`;
replaying a trace reproduces the output pattern exactly.
"""

from __future__ import annotations

import abc
import itertools
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .dsep import SepQuery, d_separated_enum, d_separated_reach
from .errors import (
    DuplicateVertex,
    InvalidParameter,
    NotObserved,
    OrientationCycle,
    UnknownVertex,
    VertexSetMismatch,
)
from .graphs import (
    Dag,
    Edge,
    GraphLike,
    Mark,
    Pattern,
    _interior_candidates_flow,
)

__all__ = [
    "CiOracle",
    "DSepOracle",
    "SepsetLog",
    "PcTrace",
    "DeletionEvent",
    "ColliderEvent",
    "TripleSkippedEvent",
    "PropagationEvent",
    "pc_skeleton",
    "pc_orient_colliders",
    "pc_orient_propagate",
    "pc",
    "unshielded_colliders",
    "pattern_represents",
]


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


class CiOracle(abc.ABC):
    """Conditional-independence oracle with memoization and accounting.

    Subclasses implement :meth:`_evaluate`.  Queries are canonicalized (the
    variable pair is sorted) so the answer is symmetric, and each distinct
    question is evaluated once per oracle instance — repeated questions
    within one run always receive the same answer.

    Attributes
    ----------
    query_count:
        Number of questions asked (including repeats served from memory).
    compute_count:
        Number of distinct questions actually evaluated.
    cond_size_counts:
        Histogram of conditioning-set sizes over all questions asked.
    """

    def __init__(self) -> None:
        self._memo: dict[tuple[str, str, frozenset[str]], bool] = {}
        self.query_count = 0
        self.compute_count = 0
        self.cond_size_counts: Counter[int] = Counter()

    def independent(self, x: str, y: str, s: Iterable[str] = ()) -> bool:
        """True when ``x`` and ``y`` are judged independent given ``s``."""
        sset = frozenset(s)
        if x > y:
            x, y = y, x
        self.query_count += 1
        self.cond_size_counts[len(sset)] += 1
        key = (x, y, sset)
        if key not in self._memo:
            self.compute_count += 1
            self._memo[key] = bool(self._evaluate(x, y, sset))
        return self._memo[key]

    @abc.abstractmethod
    def _evaluate(self, x: str, y: str, s: frozenset[str]) -> bool:
        """Answer one canonical question (x < y, ``s`` a frozenset)."""

    def default_vertices(self) -> Union[tuple[str, ...], None]:
        """Variable set this oracle covers, when it knows one."""
        return None


class DSepOracle(CiOracle):
    """Exact oracle: answers queries by separation in a known graph.

    Parameters
    ----------
    g:
        The generating directed acyclic graph.
    within:
        Optional observable margin; queries mentioning a vertex outside it
        raise :class:`NotObserved`.  Separation is still decided in the full
        graph, so latent vertices influence answers without being mentioned.
    method:
        ``"reach"`` (default) or ``"enum"`` — which separation
        implementation answers the queries.
    """

    def __init__(
        self,
        g: Dag,
        *,
        within: Union[Iterable[str], None] = None,
        method: str = "reach",
    ) -> None:
        super().__init__()
        if method not in ("reach", "enum"):
            raise InvalidParameter(f"unknown method {method!r}; use 'reach' or 'enum'")
        self.g = g
        self.method = method
        if within is None:
            self.within: Union[frozenset[str], None] = None
        else:
            within = frozenset(within)
            for v in sorted(within):
                g.neighbors_of(v)  # raises UnknownVertex
            self.within = within

    def _evaluate(self, x: str, y: str, s: frozenset[str]) -> bool:
        if self.within is not None:
            outside = sorted({x, y, *s} - self.within)
            if outside:
                raise NotObserved(
                    f"query mentions unobservable vertices {outside}"
                )
        q = SepQuery(x, y, s)
        if self.method == "reach":
            return d_separated_reach(self.g, q)
        return d_separated_enum(self.g, q, force=True)

    def default_vertices(self) -> tuple[str, ...]:
        if self.within is not None:
            return tuple(sorted(self.within))
        return self.g.vertices


# ---------------------------------------------------------------------------
# Separating-set log and trace
# ---------------------------------------------------------------------------


class SepsetLog:
    """Record of the separating set that removed each edge."""

    def __init__(self) -> None:
        self._sets: dict[frozenset[str], frozenset[str]] = {}

    def record(self, a: str, b: str, s: Iterable[str]) -> None:
        self._sets[frozenset((a, b))] = frozenset(s)

    def get(self, a: str, b: str) -> Union[frozenset[str], None]:
        return self._sets.get(frozenset((a, b)))

    def pairs(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted(tuple(sorted(p)) for p in self._sets))

    def __len__(self) -> int:
        return len(self._sets)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SepsetLog) and self._sets == other._sets


def _render_set(s: frozenset[str]) -> str:
    return "{" + ",".join(sorted(s)) + "}"


@dataclass(frozen=True)
class DeletionEvent:
    """Edge ``a - b`` deleted; ``sepset`` separated the pair at round ``n``."""

    a: str
    b: str
    sepset: frozenset[str]
    n: int

    def render(self) -> str:
        return f"DEL {self.a} {self.b} | S={_render_set(self.sepset)} | n={self.n}"


@dataclass(frozen=True)
class ColliderEvent:
    """Arrowheads at ``b`` oriented on edges from ``a`` and ``c``."""

    a: str
    b: str
    c: str

    def render(self) -> str:
        return f"ORIENT {self.a} {self.b} {self.c} | stepC"


@dataclass(frozen=True)
class TripleSkippedEvent:
    """Unshielded triple left unoriented because ``b`` fell outside the
    candidate conditioning vertices for the pair (defensive; cannot happen
    when the triple is genuinely unshielded in the same graph)."""

    a: str
    b: str
    c: str

    def render(self) -> str:
        return f"SKIP {self.a} {self.b} {self.c} | stepC | reason=outside-candidates"


@dataclass(frozen=True)
class PropagationEvent:
    """Closure rule ``rule`` oriented ``tail -> head`` (rule 1 records the
    directed-edge origin ``a`` that forced it)."""

    rule: int
    tail: str
    head: str
    origin: Union[str, None] = None

    def render(self) -> str:
        if self.rule == 1:
            return f"ORIENT {self.tail} {self.head} | stepD1 | from={self.origin}"
        return f"ORIENT {self.tail} {self.head} | stepD2"


TraceEvent = Union[DeletionEvent, ColliderEvent, TripleSkippedEvent, PropagationEvent]


@dataclass
class PcTrace:
    """Ordered log of every discovery decision; replayable."""

    events: list[TraceEvent] = field(default_factory=list)

    def append(self, event: TraceEvent) -> None:
        self.events.append(event)

    def render_lines(self) -> tuple[str, ...]:
        return tuple(e.render() for e in self.events)

    def render(self) -> str:
        return "\n".join(self.render_lines()) + ("\n" if self.events else "")

    def replay(self, vertices: Iterable[str]) -> Pattern:
        """Rebuild the output pattern by reapplying the logged decisions to
        the complete undirected graph over ``vertices``."""
        order = sorted(vertices)
        table = _MarkTable.complete(order)
        for event in self.events:
            if isinstance(event, DeletionEvent):
                table.remove(event.a, event.b)
            elif isinstance(event, ColliderEvent):
                table.set_arrow(event.a, event.b)
                table.set_arrow(event.c, event.b)
            elif isinstance(event, PropagationEvent):
                table.set_arrow(event.tail, event.head)
        return table.to_pattern(order)


class _MarkTable:
    """Mutable adjacency-with-marks working structure."""

    def __init__(self, marks: dict[tuple[str, str], list[Mark]]) -> None:
        self._marks = marks

    @classmethod
    def complete(cls, order: Sequence[str]) -> "_MarkTable":
        return cls(
            {
                (a, b): [Mark.PLAIN, Mark.PLAIN]
                for a, b in itertools.combinations(order, 2)
            }
        )

    @classmethod
    def from_pattern(cls, p: Pattern) -> "_MarkTable":
        return cls({e.pair: [e.mark_a, e.mark_b] for e in p.edges})

    def has_edge(self, u: str, v: str) -> bool:
        return (min(u, v), max(u, v)) in self._marks

    def remove(self, u: str, v: str) -> None:
        pair = (min(u, v), max(u, v))
        if pair not in self._marks:
            raise UnknownVertex(f"no edge between {u!r} and {v!r} to delete")
        del self._marks[pair]

    def set_arrow(self, u: str, v: str) -> None:
        """Place an arrowhead at the ``v`` end of edge ``u ~ v``."""
        pair = (min(u, v), max(u, v))
        if pair not in self._marks:
            raise UnknownVertex(f"no edge between {u!r} and {v!r} to orient")
        self._marks[pair][pair.index(v)] = Mark.ARROW

    def mark_at(self, u: str, v: str) -> Mark:
        pair = (min(u, v), max(u, v))
        return self._marks[pair][pair.index(v)]

    def is_undirected(self, u: str, v: str) -> bool:
        pair = (min(u, v), max(u, v))
        marks = self._marks.get(pair)
        return marks is not None and marks[0] is Mark.PLAIN and marks[1] is Mark.PLAIN

    def is_strict(self, tail: str, head: str) -> bool:
        pair = (min(tail, head), max(tail, head))
        marks = self._marks.get(pair)
        if marks is None:
            return False
        return (
            marks[pair.index(tail)] is Mark.PLAIN
            and marks[pair.index(head)] is Mark.ARROW
        )

    def neighbors(self, v: str) -> tuple[str, ...]:
        out = [b if a == v else a for (a, b) in self._marks if v in (a, b)]
        return tuple(sorted(out))

    def strict_children(self, v: str) -> tuple[str, ...]:
        return tuple(w for w in self.neighbors(v) if self.is_strict(v, w))

    def has_strict_path(self, u: str, w: str) -> bool:
        """True when strictly directed edges lead from ``u`` to ``w``."""
        seen = {u}
        queue = deque([u])
        while queue:
            v = queue.popleft()
            for nxt in self.strict_children(v):
                if nxt == w:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return False

    def to_pattern(self, order: Sequence[str]) -> Pattern:
        edges = frozenset(
            Edge(a, b, marks[0], marks[1]) for (a, b), marks in self._marks.items()
        )
        return Pattern(tuple(order), edges)


# ---------------------------------------------------------------------------
# Stage 1: skeleton
# ---------------------------------------------------------------------------


def _checked_order(vertices: Iterable[str]) -> tuple[str, ...]:
    listed = list(vertices)
    if len(set(listed)) != len(listed):
        raise DuplicateVertex("vertex list contains repeats")
    if len(listed) < 2:
        raise InvalidParameter("discovery needs at least two vertices")
    return tuple(sorted(listed))


def pc_skeleton(
    oracle: CiOracle,
    vertices: Iterable[str],
    *,
    trace: Union[PcTrace, None] = None,
) -> tuple[Pattern, SepsetLog]:
    """Stage 1: prune the complete graph down to the skeleton.

    Pairs are scanned in lexicographic order at conditioning cardinality
    ``n = 0, 1, 2, ...``; for each still-adjacent pair the candidate pool is
    the set of vertices adjacent to either endpoint that also lie on some
    path between them *in the current working graph*, and every size-``n``
    subset of the pool is tried in lexicographic order.  The first
    separating set deletes the edge immediately (later pairs in the same
    sweep see the smaller graph) and is recorded.  The sweep at ``n + 1``
    runs unless every remaining pair's candidate pool is smaller than
    ``n + 1``.
    """
    order = _checked_order(vertices)
    trace = trace if trace is not None else PcTrace()
    sepsets = SepsetLog()
    adj: dict[str, set[str]] = {v: set(order) - {v} for v in order}
    pairs = list(itertools.combinations(order, 2))

    version = 0
    pool_cache: dict[tuple[str, str], tuple[int, tuple[str, ...]]] = {}

    def pool(a: str, b: str) -> tuple[str, ...]:
        hit = pool_cache.get((a, b))
        if hit is not None and hit[0] == version:
            return hit[1]
        candidates = sorted((adj[a] | adj[b]) - {a, b})
        on_paths = _interior_candidates_flow(adj, a, b, candidates)
        result = tuple(sorted(on_paths))
        pool_cache[(a, b)] = (version, result)
        return result

    def delete(a: str, b: str, s: frozenset[str], n: int) -> None:
        nonlocal version
        adj[a].discard(b)
        adj[b].discard(a)
        version += 1
        sepsets.record(a, b, s)
        trace.append(DeletionEvent(a, b, s, n))

    n = 0
    while True:
        for a, b in pairs:
            if b not in adj[a]:
                continue
            if n == 0:
                if oracle.independent(a, b, frozenset()):
                    delete(a, b, frozenset(), 0)
                continue
            t = pool(a, b)
            if len(t) < n:
                continue
            for combo in itertools.combinations(t, n):
                if oracle.independent(a, b, frozenset(combo)):
                    delete(a, b, frozenset(combo), n)
                    break
        n += 1
        if all(len(pool(a, b)) < n for a, b in pairs if b in adj[a]):
            break

    skeleton = Pattern(
        order,
        frozenset(
            Edge(a, b, Mark.PLAIN, Mark.PLAIN) for a, b in pairs if b in adj[a]
        ),
    )
    return skeleton, sepsets


# ---------------------------------------------------------------------------
# Stage 2: collider orientation
# ---------------------------------------------------------------------------


def pc_orient_colliders(
    skeleton: Pattern,
    oracle: CiOracle,
    *,
    rule: str = "literal",
    sepsets: Union[SepsetLog, None] = None,
    trace: Union[PcTrace, None] = None,
) -> Pattern:
    """Stage 2: place arrowheads at the middle of unshielded triples.

    For each triple ``a - b - c`` with ``a``, ``c`` non-adjacent (scanned in
    order of ``b``, then the sorted pair), arrowheads ``a -> b <- c`` are
    added exactly when conditioning cannot separate ``a`` from ``c`` with
    ``b`` in the conditioning set.

    ``rule="literal"`` (default) re-queries the oracle over every subset of
    the pair's candidate pool that contains ``b`` (pool computed once on the
    finished skeleton; sizes ascending, lexicographic within a size).
    ``rule="sepset"`` instead consults the recorded separating set: the
    triple is oriented when ``b`` is absent from it.  The two coincide on
    exact oracles but may differ on noisy ones.

    Decisions are mutually independent and arrowheads accumulate; two
    triples may jointly leave an edge arrowed at both ends.
    """
    if rule not in ("literal", "sepset"):
        raise InvalidParameter(f"unknown collider rule {rule!r}")
    if rule == "sepset" and sepsets is None:
        raise InvalidParameter("rule='sepset' needs the recorded separating sets")
    for e in skeleton.edges:
        if e.mark_a is not Mark.PLAIN or e.mark_b is not Mark.PLAIN:
            raise InvalidParameter("collider orientation expects an undirected skeleton")
    trace = trace if trace is not None else PcTrace()

    order = skeleton.vertices
    nb = {v: skeleton.neighbors_of(v) for v in order}
    table = _MarkTable.from_pattern(skeleton)

    pool_cache: dict[tuple[str, str], tuple[str, ...]] = {}

    def pool(a: str, c: str) -> tuple[str, ...]:
        key = (a, c)
        if key not in pool_cache:
            candidates = sorted((nb[a] | nb[c]) - {a, c})
            on_paths = _interior_candidates_flow(nb, a, c, candidates)
            pool_cache[key] = tuple(sorted(on_paths))
        return pool_cache[key]

    for b in order:
        for a, c in itertools.combinations(sorted(nb[b]), 2):
            if skeleton.has_edge(a, c):
                continue
            if rule == "literal":
                t = pool(a, c)
                if b not in t:
                    trace.append(TripleSkippedEvent(a, b, c))
                    continue
                rest = tuple(v for v in t if v != b)
                separated = False
                for k in range(len(rest) + 1):
                    for combo in itertools.combinations(rest, k):
                        if oracle.independent(a, c, frozenset((b,) + combo)):
                            separated = True
                            break
                    if separated:
                        break
                orient = not separated
            else:
                recorded = sepsets.get(a, c)
                if recorded is None:
                    raise InvalidParameter(
                        f"no separating set recorded for non-adjacent pair ({a}, {c})"
                    )
                orient = b not in recorded
            if orient:
                table.set_arrow(a, b)
                table.set_arrow(c, b)
                trace.append(ColliderEvent(a, b, c))

    return table.to_pattern(order)


# ---------------------------------------------------------------------------
# Stage 3: propagation
# ---------------------------------------------------------------------------


def pc_orient_propagate(
    p: Pattern, *, trace: Union[PcTrace, None] = None
) -> Pattern:
    """Stage 3: close the pattern under two sound orientation rules.

    Rule 1: ``a -> b`` strictly directed, ``b - c`` undirected, ``a`` and
    ``c`` non-adjacent — orient ``b -> c`` (otherwise ``b`` would have been
    an unshielded collider of the triple).  Rule 2: a strictly directed path
    from ``u`` to ``w`` plus an undirected edge ``u - w`` — orient
    ``u -> w`` (the reverse would close a directed cycle).

    The scan is deterministic (rule 1 first, vertices in lexicographic
    order); the first applicable orientation is applied and the scan
    restarts, until a fixpoint.  The result is idempotent under re-running.
    Raises :class:`OrientationCycle` when an application would close a
    directed cycle among strictly directed edges.
    """
    trace = trace if trace is not None else PcTrace()
    order = p.vertices
    table = _MarkTable.from_pattern(p)

    def next_application() -> Union[PropagationEvent, None]:
        for b in order:
            for a in table.neighbors(b):
                if not table.is_strict(a, b):
                    continue
                for c in table.neighbors(b):
                    if c == a or not table.is_undirected(b, c):
                        continue
                    if table.has_edge(a, c):
                        continue
                    return PropagationEvent(1, b, c, origin=a)
        for u, w in itertools.combinations(order, 2):
            if not table.is_undirected(u, w):
                continue
            for tail, head in ((u, w), (w, u)):
                if table.has_strict_path(tail, head):
                    return PropagationEvent(2, tail, head)
        return None

    while True:
        event = next_application()
        if event is None:
            break
        if table.has_strict_path(event.head, event.tail):
            raise OrientationCycle(
                f"orienting {event.tail} -> {event.head} closes a directed cycle"
            )
        table.set_arrow(event.tail, event.head)
        trace.append(event)

    return table.to_pattern(order)


def pc(
    oracle: CiOracle,
    vertices: Union[Iterable[str], None] = None,
    *,
    collider_rule: str = "literal",
) -> tuple[Pattern, PcTrace]:
    """Run all three discovery stages and return (pattern, trace).

    ``vertices`` defaults to the oracle's own variable set when it has one.

    Examples
    --------
    >>> from .graphs import build_dag
    >>> g = build_dag(["A", "B", "C"], [("A", "B"), ("C", "B")])
    >>> pattern, _ = pc(DSepOracle(g))
    >>> sorted(pattern.arrows_into("B"))
    ['A', 'C']
    """
    if vertices is None:
        vertices = oracle.default_vertices()
        if vertices is None:
            raise InvalidParameter(
                "this oracle has no default variable set; pass vertices explicitly"
            )
    trace = PcTrace()
    skeleton, sepsets = pc_skeleton(oracle, vertices, trace=trace)
    with_colliders = pc_orient_colliders(
        skeleton, oracle, rule=collider_rule, sepsets=sepsets, trace=trace
    )
    final = pc_orient_propagate(with_colliders, trace=trace)
    return final, trace


# ---------------------------------------------------------------------------
# Comparison helpers
# ---------------------------------------------------------------------------


def unshielded_colliders(c: GraphLike) -> frozenset[tuple[str, str, str]]:
    """Triples ``(a, b, c)`` (``a < c``, both non-adjacent) whose edges both
    point at ``b``.  On directed graphs these are pairs of parents; on
    patterns, any pair of arrowheads into ``b``.
    """
    out: set[tuple[str, str, str]] = set()
    for b in c.vertices:
        if isinstance(c, Dag):
            into = c.parents_of(b)
        else:
            into = c.arrows_into(b)
        for a, d in itertools.combinations(sorted(into), 2):
            if not c.has_edge(a, d):
                out.add((a, b, d))
    return frozenset(out)


def pattern_represents(p: Pattern, g: Dag) -> bool:
    """True when pattern ``p`` is a faithful summary of directed graph ``g``:
    the adjacencies coincide, every strictly directed edge of ``p`` appears
    in ``g`` with that orientation, and every unshielded collider of ``g``
    carries both its arrowheads in ``p``.
    """
    if set(p.vertices) != set(g.vertices):
        raise VertexSetMismatch("pattern and graph are over different vertex sets")
    p_adj = {e.pair for e in p.edges}
    g_adj = {(min(t, h), max(t, h)) for t, h in g.edges}
    if p_adj != g_adj:
        return False
    for e in p.edges:
        if e.mark_a is Mark.PLAIN and e.mark_b is Mark.ARROW:
            if (e.a, e.b) not in g.edges:
                return False
        elif e.mark_a is Mark.ARROW and e.mark_b is Mark.PLAIN:
            if (e.b, e.a) not in g.edges:
                return False
    for a, b, c in unshielded_colliders(g):
        if p.mark_at(a, b) is not Mark.ARROW or p.mark_at(c, b) is not Mark.ARROW:
            return False
    return True
