"""Analysis of directed graphs whose vertex set is only partially observed.

A :class:`LatentInstance` pairs a directed acyclic graph with the subset of
its vertices that are observable.  The central object derived from an
instance is its *restricted pattern*: the mixed graph produced by running the
constraint-based discovery pipeline against exact separation answers that may
mention observed vertices only.  Unobserved vertices influence those answers
without appearing in them, so the restricted pattern can contain extra
adjacencies and bidirected edges relative to the generating graph.

The module provides three groups of tools on top of that construction:

* **Structural oracles** (:func:`inducing_path_exists`,
  :func:`shieldable_ancestor`, :func:`arrowhead_certificate`,
  :func:`separation_equivalence`) re-derive properties of the restricted
  pattern directly from the generating graph by path enumeration.  They are
  deliberately independent of the discovery pipeline so the two routes can be
  checked against each other.

* **A claim engine** (:func:`not_a_cause`, :func:`definite_cause_edge`,
  :func:`definite_cause_path`) that turns pattern features into three-valued
  causal verdicts with explicit witnesses.  The verdicts are sound but not
  complete: ``Undetermined`` never means "not a cause".

* **A counterexample search** (:func:`search_counterexample`) demonstrating
  why the claim engine's triangle premise cannot be dropped: it enumerates
  small instances, modulo vertex relabeling, until it finds one whose
  restricted pattern contains an anchored strictly directed path from ``x``
  to ``z`` even though the generating graph has no directed path from ``x``
  to ``z``.  Reports re-verify through independent code paths and serialize
  to a text format for fixtures.
"""

from __future__ import annotations

import itertools
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from .dsep import d_separated_sets
from .errors import (
    InstanceTooLarge,
    InvalidParameter,
    NotAdjacentInPattern,
    NotAnAncestor,
    NotFoundWithinBounds,
    NotObserved,
    ParseError,
    QueryInvariantViolated,
    UnknownVertex,
    VerificationFailed,
)
from .graphs import (
    Dag,
    Mark,
    Pattern,
    _iter_simple_paths,
    ancestors,
    descendants,
    is_collider,
    parse_dag_text,
    parse_pattern_text,
    render_dag,
    render_pattern,
    triangle_containing,
)
from .pc import DSepOracle, pc

__all__ = [
    "LatentInstance",
    "restricted_pattern",
    "shieldable_ancestor",
    "inducing_paths",
    "inducing_path_exists",
    "arrowhead_certificate",
    "separation_equivalence",
    "semi_directed_path_exists",
    "ClaimVerdict",
    "not_a_cause",
    "definite_cause_edge",
    "definite_cause_path",
    "CounterexampleReport",
    "render_report",
    "parse_report",
    "search_counterexample",
    "verify_counterexample",
    "random_instance",
]


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatentInstance:
    """A directed acyclic graph together with its observable vertex subset.

    Vertices outside ``observed`` are latent: separation queries about the
    observable margin may not mention them, yet they shape the answers.

    Examples
    --------
    >>> from .graphs import build_dag
    >>> inst = LatentInstance(build_dag(["A", "B", "T"], [("T", "A"), ("T", "B")]),
    ...                       frozenset({"A", "B"}))
    >>> sorted(inst.latent)
    ['T']
    """

    g: Dag
    observed: frozenset[str]

    def __post_init__(self) -> None:
        observed = frozenset(self.observed)
        object.__setattr__(self, "observed", observed)
        unknown = sorted(observed - set(self.g.vertices))
        if unknown:
            raise UnknownVertex(f"observed vertices {unknown} are not in the graph")
        if len(observed) < 2:
            raise InvalidParameter("an instance needs at least two observed vertices")

    @property
    def latent(self) -> frozenset[str]:
        """The unobservable vertices."""
        return frozenset(self.g.vertices) - self.observed


def restricted_pattern(
    inst: LatentInstance,
    *,
    collider_rule: str = "literal",
    method: str = "reach",
) -> Pattern:
    """The mixed graph the discovery pipeline recovers from the observable
    margin of ``inst``.

    Every separation query is answered exactly, in the full graph, but may
    mention observed vertices only.  With no latent vertices this coincides
    with running discovery on the graph directly.

    Examples
    --------
    >>> from .graphs import build_dag
    >>> inst = LatentInstance(build_dag(["A", "B", "C"], [("A", "B"), ("B", "C")]),
    ...                       frozenset({"A", "C"}))
    >>> print(render_pattern(restricted_pattern(inst)), end="")
    node A
    node C
    A -- C
    """
    oracle = DSepOracle(inst.g, within=inst.observed, method=method)
    p, _ = pc(oracle, collider_rule=collider_rule)
    return p


# ---------------------------------------------------------------------------
# Shieldable ancestors and inducing paths
# ---------------------------------------------------------------------------


def _directed_paths(g: Dag, x: str, y: str) -> Iterator[tuple[str, ...]]:
    """All directed paths from ``x`` to ``y``, in lexicographic order."""
    children = {v: tuple(sorted(g.children_of(v))) for v in g.vertices}

    def rec(v: str, path: tuple[str, ...]) -> Iterator[tuple[str, ...]]:
        if v == y:
            yield path
            return
        for w in children[v]:
            yield from rec(w, path + (w,))

    yield from rec(x, (x,))


def _shielded_by_reach(inst: LatentInstance, s: str, a: str) -> bool:
    """Reachability form of the shieldable test, assuming ``s`` is a strict
    ancestor of ``a``: some directed path from ``s`` to ``a`` avoids all
    observables before ``a`` exactly when ``a`` is reachable from ``s``
    through latent vertices only."""
    if s in inst.observed:
        return True
    seen = {s}
    frontier = deque([s])
    while frontier:
        v = frontier.popleft()
        for w in inst.g.children_of(v):
            if w == a:
                return False
            if w not in seen and w not in inst.observed:
                seen.add(w)
                frontier.append(w)
    return True


def shieldable_ancestor(
    inst: LatentInstance, s: str, a: str, *, method: str = "auto"
) -> bool:
    """True when every directed path from ``s`` to ``a`` passes through an
    observable vertex other than ``a``.

    ``s`` must be a strict ancestor of ``a``.  An observable ``s`` trivially
    qualifies, since ``s`` itself lies on each of those paths.  ``method``
    selects the route: ``"enumerate"`` inspects every directed path,
    ``"reach"`` uses the equivalent latent-only reachability test, and
    ``"auto"`` (default) enumerates on small graphs and switches to
    reachability on larger ones.

    Examples
    --------
    >>> from .graphs import build_dag
    >>> g = build_dag(["A", "T"], [("T", "A")])
    >>> shieldable_ancestor(LatentInstance(g, frozenset({"A", "T"})), "T", "A")
    True
    """
    inst.g.neighbors_of(s)
    inst.g.neighbors_of(a)
    if s == a or s not in ancestors(inst.g, a):
        raise NotAnAncestor(f"{s!r} is not a strict ancestor of {a!r}")
    if method == "auto":
        method = "enumerate" if len(inst.g.vertices) <= 9 else "reach"
    if method == "reach":
        return _shielded_by_reach(inst, s, a)
    if method == "enumerate":
        return all(
            any(v in inst.observed for v in path[:-1])
            for path in _directed_paths(inst.g, s, a)
        )
    raise InvalidParameter(f"unknown method {method!r}; use 'reach', 'enumerate' or 'auto'")


def _iter_inducing_paths(
    inst: LatentInstance, a: str, b: str
) -> Iterator[tuple[str, ...]]:
    """Paths in the generating graph that force ``a`` and ``b`` to stay
    adjacent in the restricted pattern: every observable interior vertex is a
    collider on the path, and every collider is an ancestor of ``a`` or ``b``
    all of whose routes down to that endpoint can be blocked by observables.
    """
    g = inst.g
    anc = {a: ancestors(g, a), b: ancestors(g, b)}
    shield_memo: dict[tuple[str, str], bool] = {}

    def shielded(v: str, end: str) -> bool:
        key = (v, end)
        if key not in shield_memo:
            shield_memo[key] = _shielded_by_reach(inst, v, end)
        return shield_memo[key]

    for path in _iter_simple_paths(g, a, b):
        ok = True
        for i in range(1, len(path) - 1):
            v = path[i]
            coll = is_collider(g, path, i)
            if not coll:
                if v in inst.observed:
                    ok = False
                    break
                continue
            if not (
                (v in anc[a] and shielded(v, a)) or (v in anc[b] and shielded(v, b))
            ):
                ok = False
                break
        if ok:
            yield path


def _validate_observed_pair(inst: LatentInstance, a: str, b: str) -> None:
    inst.g.neighbors_of(a)
    inst.g.neighbors_of(b)
    outside = sorted({a, b} - inst.observed)
    if outside:
        raise NotObserved(f"vertices {outside} are not observed")
    if a == b:
        raise QueryInvariantViolated("query needs two distinct vertices")


def inducing_paths(inst: LatentInstance, a: str, b: str) -> tuple[tuple[str, ...], ...]:
    """All adjacency-forcing paths between observed ``a`` and ``b`` (see
    :func:`inducing_path_exists`), in lexicographic order."""
    _validate_observed_pair(inst, a, b)
    return tuple(_iter_inducing_paths(inst, a, b))


def inducing_path_exists(inst: LatentInstance, a: str, b: str) -> bool:
    """True when some path between observed ``a`` and ``b`` keeps them
    adjacent in the restricted pattern regardless of conditioning.

    Qualifying paths have only colliders as observable interior vertices, and
    each collider is an ancestor of ``a`` or of ``b`` whose every directed
    path to that endpoint meets an observable first.

    Examples
    --------
    >>> from .graphs import build_dag
    >>> g = build_dag(["A", "M", "B"], [("A", "M"), ("M", "B")])
    >>> inducing_path_exists(LatentInstance(g, frozenset({"A", "M", "B"})), "A", "B")
    False
    >>> inducing_path_exists(LatentInstance(g, frozenset({"A", "B"})), "A", "B")
    True
    """
    _validate_observed_pair(inst, a, b)
    for _ in _iter_inducing_paths(inst, a, b):
        return True
    return False


def _inducing_path_into(inst: LatentInstance, a: str, b: str) -> bool:
    """True when some adjacency-forcing path between ``a`` and ``b`` ends
    with an edge pointing at ``b``."""
    for path in _iter_inducing_paths(inst, a, b):
        if (path[-2], b) in inst.g.edges:
            return True
    return False


def arrowhead_certificate(
    inst: LatentInstance,
    a: str,
    b: str,
    *,
    pattern: Union[Pattern, None] = None,
    max_vertices: int = 9,
) -> bool:
    """Certify, by path enumeration, an arrowhead at ``b`` on the pattern
    edge between ``a`` and ``b``.

    The certificate is a disjunction over side vertices ``c``:

    1. ``c`` is pattern-adjacent to ``b`` but not to ``a``, and both the
       ``a``–``b`` and ``c``–``b`` adjacencies are forced by paths whose last
       edge points at ``b``; or
    2. some edge carries an arrowhead into ``a`` in the pattern, and ``b`` is
       a descendant of ``a`` in the generating graph.

    This is a validation oracle for small instances; it recomputes everything
    from the generating graph instead of trusting the discovery pipeline,
    and refuses graphs with more than ``max_vertices`` vertices.
    """
    if len(inst.g.vertices) > max_vertices:
        raise InstanceTooLarge(
            f"certificate enumeration is limited to {max_vertices} vertices;"
            f" this graph has {len(inst.g.vertices)}"
        )
    _validate_observed_pair(inst, a, b)
    p = restricted_pattern(inst) if pattern is None else pattern
    if not p.has_edge(a, b):
        raise NotAdjacentInPattern(
            f"{a!r} and {b!r} are not adjacent in the restricted pattern"
        )
    if _inducing_path_into(inst, a, b):
        for c in sorted(p.neighbors_of(b) - p.neighbors_of(a) - {a}):
            if _inducing_path_into(inst, c, b):
                return True
    if b in descendants(inst.g, a) and p.arrows_into(a):
        return True
    return False


def separation_equivalence(
    inst: LatentInstance,
    xs: Iterable[str],
    ys: Iterable[str],
    s: Iterable[str] = (),
    *,
    pattern: Union[Pattern, None] = None,
    method: str = "reach",
) -> bool:
    """True when separation of ``xs`` from ``ys`` given ``s`` agrees between
    the full generating graph and the restricted pattern.

    All three sets must consist of observed vertices.  Agreement on every
    such query is the correctness guarantee of the restricted pattern: the
    observable margin and the pattern encode the same independence facts.
    """
    xs, ys, s = frozenset(xs), frozenset(ys), frozenset(s)
    outside = sorted((xs | ys | s) - inst.observed)
    if outside:
        raise NotObserved(f"vertices {outside} are not observed")
    left = d_separated_sets(inst.g, xs, ys, s, method=method)
    p = restricted_pattern(inst) if pattern is None else pattern
    right = d_separated_sets(p, xs, ys, s, method=method)
    return left == right


# ---------------------------------------------------------------------------
# Semi-directed paths and claim verdicts
# ---------------------------------------------------------------------------


def _shortest_lex_path(
    succ: Mapping[str, Sequence[str]], x: str, y: str
) -> Union[tuple[str, ...], None]:
    """Shortest path from ``x`` to ``y`` in the graph given by sorted
    successor lists, lexicographically smallest among the shortest."""
    rev: dict[str, list[str]] = {v: [] for v in succ}
    for u, ws in succ.items():
        for w in ws:
            rev[w].append(u)
    dist = {y: 0}
    frontier = deque([y])
    while frontier:
        w = frontier.popleft()
        for u in rev[w]:
            if u not in dist:
                dist[u] = dist[w] + 1
                frontier.append(u)
    if x not in dist:
        return None
    path = [x]
    while path[-1] != y:
        cur = path[-1]
        path.append(
            next(w for w in succ[cur] if dist.get(w, -1) == dist[cur] - 1)
        )
    return tuple(path)


def semi_directed_path_exists(
    p: Pattern, x: str, y: str
) -> Union[tuple[str, ...], None]:
    """A path from ``x`` to ``y`` that never travels against an arrowhead:
    each step leaves its vertex through an edge whose mark at that vertex is
    plain.  Returns the shortest such path (lexicographic tiebreak) or None.

    Examples
    --------
    >>> from .graphs import build_pattern, Edge
    >>> p = build_pattern(["X", "A", "Y"],
    ...                   [Edge("X", "A", Mark.PLAIN, Mark.PLAIN),
    ...                    Edge("A", "Y", Mark.PLAIN, Mark.ARROW)])
    >>> semi_directed_path_exists(p, "X", "Y")
    ('X', 'A', 'Y')
    >>> semi_directed_path_exists(p, "Y", "X") is None
    True
    """
    p.neighbors_of(x)
    p.neighbors_of(y)
    if x == y:
        raise QueryInvariantViolated("path endpoints must differ")
    succ = {
        v: tuple(
            sorted(w for w in p.neighbors_of(v) if p.mark_at(w, v) is Mark.PLAIN)
        )
        for v in p.vertices
    }
    return _shortest_lex_path(succ, x, y)


_CLAIM_KINDS = ("DefiniteCause", "NotACause", "Undetermined")


@dataclass(frozen=True)
class ClaimVerdict:
    """Three-valued answer to a causal question about a pattern.

    ``DefiniteCause`` means every generating graph compatible with the
    pattern has a directed path between the queried vertices; ``NotACause``
    means none has; ``Undetermined`` means the sound rules do not apply —
    it never asserts absence of causation.  ``witness`` explains the verdict;
    ``path`` and ``anchor`` carry its structured parts when present.
    """

    kind: str
    witness: str
    path: Union[tuple[str, ...], None] = None
    anchor: Union[str, None] = None

    def __post_init__(self) -> None:
        if self.kind not in _CLAIM_KINDS:
            raise InvalidParameter(
                f"unknown verdict kind {self.kind!r}; expected one of {_CLAIM_KINDS}"
            )

    def render(self) -> str:
        return f"{self.kind}; witness: {self.witness}"


def not_a_cause(p: Pattern, x: str, y: str) -> ClaimVerdict:
    """Assert, when possible, that ``x`` cannot cause ``y``.

    If the pattern has no semi-directed path from ``x`` to ``y`` then no
    generating graph compatible with it — latent vertices included — has a
    directed path from ``x`` to ``y``, and the verdict is ``NotACause``.
    Otherwise the found path is returned as an ``Undetermined`` explanation.
    """
    path = semi_directed_path_exists(p, x, y)
    if path is None:
        return ClaimVerdict(
            "NotACause", witness=f"no semi-directed path from {x} to {y}"
        )
    return ClaimVerdict(
        "Undetermined",
        witness="semi-directed path found: " + " ".join(path),
        path=path,
    )


def _anchors(p: Pattern, x: str, premise: str) -> frozenset[str]:
    if premise == "arrow":
        return p.arrows_into(x)
    if premise == "strict":
        return p.directed_parents_of(x)
    raise InvalidParameter(f"unknown premise {premise!r}; use 'arrow' or 'strict'")


def _anchor_missing(x: str, premise: str) -> str:
    if premise == "arrow":
        return f"no vertex with an arrowhead into {x}"
    return f"no vertex with a strictly directed edge into {x}"


def definite_cause_edge(
    p: Pattern, x: str, z: str, *, premise: str = "arrow"
) -> ClaimVerdict:
    """Assert, when possible, that ``x`` causes ``z`` from a single edge.

    ``DefiniteCause`` requires a strictly directed edge ``x -> z`` that lies
    in no triangle, plus an anchor vertex ``c`` whose edge carries an
    arrowhead into ``x`` (``premise="strict"`` demands the stronger
    ``c -> x``).  Under those premises every generating graph compatible with
    the pattern has a directed path from ``x`` to ``z``.
    """
    p.neighbors_of(x)
    p.neighbors_of(z)
    if x == z:
        raise QueryInvariantViolated("claim endpoints must differ")
    anchors = _anchors(p, x, premise)
    if not p.is_strictly_directed(x, z):
        return ClaimVerdict(
            "Undetermined", witness=f"no strictly directed edge {x} -> {z}"
        )
    if triangle_containing(p, x, z):
        return ClaimVerdict(
            "Undetermined", witness=f"edge {x} -> {z} lies in a triangle"
        )
    if not anchors:
        return ClaimVerdict("Undetermined", witness=_anchor_missing(x, premise))
    c = min(anchors)
    return ClaimVerdict(
        "DefiniteCause", witness=f"C={c}, edge {x}->{z}", path=(x, z), anchor=c
    )


def definite_cause_path(
    p: Pattern, x: str, z: str, *, premise: str = "arrow"
) -> ClaimVerdict:
    """Assert, when possible, that ``x`` causes ``z`` along a multi-edge path.

    ``DefiniteCause`` requires an anchor vertex with an arrowhead into ``x``
    (``premise="strict"``: a strictly directed edge into ``x``) and a path of
    strictly directed edges from ``x`` to ``z`` in which no consecutive pair
    of vertices lies in a triangle.  A single qualifying edge reduces to
    :func:`definite_cause_edge`.
    """
    p.neighbors_of(x)
    p.neighbors_of(z)
    if x == z:
        raise QueryInvariantViolated("claim endpoints must differ")
    anchors = _anchors(p, x, premise)
    if not anchors:
        return ClaimVerdict("Undetermined", witness=_anchor_missing(x, premise))
    succ = {
        u: tuple(
            sorted(
                w
                for w in p.directed_children_of(u)
                if not triangle_containing(p, u, w)
            )
        )
        for u in p.vertices
    }
    path = _shortest_lex_path(succ, x, z)
    if path is None:
        return ClaimVerdict(
            "Undetermined",
            witness=f"no triangle-free strictly directed path from {x} to {z}",
        )
    c = min(anchors)
    return ClaimVerdict(
        "DefiniteCause", witness=f"C={c}, path {'->'.join(path)}", path=path, anchor=c
    )


# ---------------------------------------------------------------------------
# Counterexample reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CounterexampleReport:
    """A found violation of the triangle-free premise's dispensability.

    The instance's restricted pattern contains a strictly directed path from
    ``x`` to ``z`` whose every edge tail has an arrowhead into it, yet the
    generating graph has no directed path from ``x`` to ``z``.  ``anchors``
    lists, per path edge, the tail and a vertex with an arrowhead into it.
    """

    instance: LatentInstance
    x: str
    z: str
    pattern: Pattern
    path: tuple[str, ...]
    anchors: tuple[tuple[str, str], ...]
    max_vertices: int
    max_latents: int
    instances_checked: int

    @property
    def g(self) -> Dag:
        return self.instance.g

    @property
    def observed(self) -> frozenset[str]:
        return self.instance.observed


def render_report(report: CounterexampleReport) -> str:
    """Serialize a report: graph and pattern sections in the graph text
    format, then a verdict section of key/value lines."""
    lines = ["section graph"]
    lines.append(render_dag(report.g, report.observed).rstrip("\n"))
    lines.append("section pattern")
    lines.append(render_pattern(report.pattern).rstrip("\n"))
    lines.append("section verdict")
    lines.append(f"source {report.x}")
    lines.append(f"target {report.z}")
    lines.append("path " + " ".join(report.path))
    for tail, c in report.anchors:
        lines.append(f"anchor {tail} {c}")
    lines.append(f"max-vertices {report.max_vertices}")
    lines.append(f"max-latents {report.max_latents}")
    lines.append(f"instances-checked {report.instances_checked}")
    return "\n".join(lines) + "\n"


def _verdict_int(value: str, key: str, source: str, line_no: int) -> int:
    try:
        n = int(value)
    except ValueError:
        raise ParseError(
            f"{key} expects an integer, got {value!r}", source=source, line_no=line_no
        ) from None
    if n < 0:
        raise ParseError(f"{key} must be non-negative", source=source, line_no=line_no)
    return n


def parse_report(text: str, *, source: str = "<string>") -> CounterexampleReport:
    """Parse the serialization produced by :func:`render_report`."""
    sections: dict[str, list[tuple[int, str]]] = {}
    order: list[str] = []
    current: Union[str, None] = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "section":
            if len(tokens) != 2:
                raise ParseError(
                    "section lines read 'section <name>'",
                    source=source,
                    line_no=line_no,
                )
            current = tokens[1]
            if current in sections:
                raise ParseError(
                    f"duplicate section {current!r}", source=source, line_no=line_no
                )
            sections[current] = []
            order.append(current)
            continue
        if current is None:
            raise ParseError(
                "content before the first section line", source=source, line_no=line_no
            )
        sections[current].append((line_no, raw))
    if order != ["graph", "pattern", "verdict"]:
        raise ParseError(
            f"expected sections graph, pattern, verdict in order; got {order}",
            source=source,
            line_no=0,
        )

    def body(name: str) -> str:
        rows = sections[name]
        if not rows:
            raise ParseError(f"section {name!r} is empty", source=source, line_no=0)
        # pad with blank lines so parser locations match the full document
        first = rows[0][0]
        return "\n" * (first - 1) + "\n".join(raw for _, raw in rows)

    g, observed = parse_dag_text(body("graph"), source=source)
    if observed is None:
        raise ParseError(
            "the graph section needs an observe line", source=source, line_no=0
        )
    pattern = parse_pattern_text(body("pattern"), source=source)

    scalars: dict[str, str] = {}
    path: Union[tuple[str, ...], None] = None
    anchors: list[tuple[str, str]] = []
    for line_no, raw in sections["verdict"]:
        tokens = raw.split("#", 1)[0].split()
        key = tokens[0]
        if key == "path":
            if len(tokens) < 3:
                raise ParseError(
                    "path needs at least two vertices", source=source, line_no=line_no
                )
            if path is not None:
                raise ParseError("duplicate path line", source=source, line_no=line_no)
            path = tuple(tokens[1:])
        elif key == "anchor":
            if len(tokens) != 3:
                raise ParseError(
                    "anchor lines read 'anchor <tail> <vertex>'",
                    source=source,
                    line_no=line_no,
                )
            anchors.append((tokens[1], tokens[2]))
        elif key in ("source", "target", "max-vertices", "max-latents", "instances-checked"):
            if len(tokens) != 2:
                raise ParseError(
                    f"{key} expects exactly one value", source=source, line_no=line_no
                )
            if key in scalars:
                raise ParseError(
                    f"duplicate {key} line", source=source, line_no=line_no
                )
            scalars[key] = tokens[1]
            if key in ("max-vertices", "max-latents", "instances-checked"):
                _verdict_int(tokens[1], key, source, line_no)
        else:
            raise ParseError(
                f"unrecognized verdict key {key!r}", source=source, line_no=line_no
            )
    missing = [
        k
        for k in ("source", "target", "max-vertices", "max-latents", "instances-checked")
        if k not in scalars
    ]
    if missing:
        raise ParseError(
            f"verdict section is missing {missing}", source=source, line_no=0
        )
    if path is None:
        raise ParseError("verdict section is missing the path", source=source, line_no=0)
    return CounterexampleReport(
        instance=LatentInstance(g, observed),
        x=scalars["source"],
        z=scalars["target"],
        pattern=pattern,
        path=path,
        anchors=tuple(anchors),
        max_vertices=int(scalars["max-vertices"]),
        max_latents=int(scalars["max-latents"]),
        instances_checked=int(scalars["instances-checked"]),
    )


# ---------------------------------------------------------------------------
# Exhaustive search
# ---------------------------------------------------------------------------

_SEARCH_NAMES = tuple("abcdefg")
_SEARCH_VERTEX_CAP = 6


def _canonical_codes(m: int) -> np.ndarray:
    """Sorted canonical integer encodings, one per isomorphism class of
    directed acyclic graphs on ``m`` vertices.

    Every such graph relabels to one whose edges all point from lower to
    higher index, so enumerating the upper-triangular bit patterns covers all
    classes; mapping each to the minimum of its encodings over all vertex
    permutations (edge ``i -> j`` occupies bit ``i*m + j``) and deduplicating
    leaves exactly one representative per class.
    """
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    k = np.arange(1 << len(pairs), dtype=np.uint64)
    best: Union[np.ndarray, None] = None
    for perm in itertools.permutations(range(m)):
        code = np.zeros(len(k), dtype=np.uint64)
        for slot, (i, j) in enumerate(pairs):
            bit = (k >> np.uint64(slot)) & np.uint64(1)
            code |= bit << np.uint64(perm[i] * m + perm[j])
        best = code if best is None else np.minimum(best, code)
    return np.unique(best)


def _decode_dag(code: int, m: int) -> Dag:
    names = _SEARCH_NAMES[:m]
    edges = []
    for pos in range(m * m):
        if (code >> pos) & 1:
            edges.append((names[pos // m], names[pos % m]))
    return Dag(names, frozenset(edges))


def _premise_violation(
    inst: LatentInstance, desc: Mapping[str, frozenset[str]]
) -> Union[tuple[str, str, tuple[str, ...], tuple[tuple[str, str], ...]], None]:
    """First (by source, then target) anchored strictly directed pattern path
    whose endpoints have no directed connection in the generating graph."""
    p = restricted_pattern(inst)
    succ = {u: tuple(sorted(p.directed_children_of(u))) for u in p.vertices}
    for x in p.vertices:
        if not p.arrows_into(x):
            continue
        reach: set[str] = set()
        frontier = deque([x])
        while frontier:
            for w in succ[frontier.popleft()]:
                if w not in reach:
                    reach.add(w)
                    frontier.append(w)
        targets = sorted(v for v in reach if v != x and v not in desc[x])
        if not targets:
            continue
        z = targets[0]
        path = _shortest_lex_path(succ, x, z)
        assert path is not None
        anchors = tuple((u, min(p.arrows_into(u))) for u in path[:-1])
        return x, z, path, anchors
    return None


def _scan_instances(
    m: int, codes: Iterable[int], max_latents: int
) -> tuple[int, Union[tuple, None]]:
    """Scan instances for the given graph codes in canonical order.

    Returns (instances checked up to and including any hit, hit or None)
    where a hit is (code, latent index tuple, x, z, path, anchors).
    """
    names = _SEARCH_NAMES[:m]
    checked = 0
    for code in codes:
        g = _decode_dag(int(code), m)
        desc = {v: descendants(g, v) for v in names}
        connected_pairs = sum(len(desc[v]) for v in names)
        for k in range(0, min(max_latents, m - 2) + 1):
            for latent_idx in itertools.combinations(range(m), k):
                checked += 1
                # a violation needs an observed pair with no directed
                # connection; a graph whose every ordered pair is connected
                # (only the complete order) cannot provide one
                if connected_pairs == m * (m - 1):
                    continue
                latent = {names[i] for i in latent_idx}
                inst = LatentInstance(g, frozenset(names) - latent)
                hit = _premise_violation(inst, desc)
                if hit is not None:
                    return checked, (int(code), latent_idx) + hit
    return checked, None


def _scan_chunk(args: tuple[int, tuple[int, ...], int]) -> tuple[int, Union[tuple, None]]:
    m, codes, max_latents = args
    return _scan_instances(m, codes, max_latents)


def _presentation_relabel(
    inst: LatentInstance, x: str, z: str
) -> dict[str, str]:
    """Rename vertices for reporting: sources become X and Z, latent vertices
    T (or T1, T2, ...), remaining observed vertices A, B, C, ..."""
    mapping = {x: "X", z: "Z"}
    latents = sorted(inst.latent)
    if len(latents) == 1:
        mapping[latents[0]] = "T"
    else:
        for i, v in enumerate(latents, start=1):
            mapping[v] = f"T{i}"
    rest = sorted(v for v in inst.g.vertices if v not in mapping)
    for v, name in zip(rest, itertools.chain("ABCDEFGHJK")):
        mapping[v] = name
    return mapping


def search_counterexample(
    max_vertices: int, max_latents: int, *, jobs: int = 1
) -> CounterexampleReport:
    """Exhaustively search small instances for a violation of the
    triangle-free premise's dispensability.

    Enumerates generating graphs up to ``max_vertices`` vertices — one
    representative per relabeling class, in canonical order — and every
    latent subset up to ``max_latents``, leaving at least two observed
    vertices.  For each instance it computes the restricted pattern and looks
    for observed ``x``, ``z`` such that the pattern has a strictly directed
    path from ``x`` to ``z``, some edge carries an arrowhead into ``x``, yet
    the generating graph has no directed path from ``x`` to ``z``.  (On such
    a path every later edge tail automatically receives an arrowhead from its
    predecessor, so anchoring the first tail anchors them all.)

    The first instance found — smallest vertex count, then canonical code,
    then latent-subset order — is relabeled for presentation, re-verified,
    and returned.  ``jobs`` parallelizes the scan without changing which
    instance is reported.
    """
    if max_vertices < 4:
        raise InvalidParameter("the search needs max_vertices >= 4")
    if max_vertices > _SEARCH_VERTEX_CAP:
        raise InstanceTooLarge(
            f"exhaustive enumeration is supported up to {_SEARCH_VERTEX_CAP} vertices"
        )
    if max_latents < 0:
        raise InvalidParameter("max_latents cannot be negative")
    if jobs < 1:
        raise InvalidParameter("jobs must be at least 1")

    checked = 0
    found: Union[tuple, None] = None
    found_m = 0
    for m in range(2, max_vertices + 1):
        codes = [int(c) for c in _canonical_codes(m)]
        if jobs == 1 or len(codes) < 256:
            n, hit = _scan_instances(m, codes, max_latents)
            checked += n
            if hit is not None:
                found, found_m = hit, m
                break
        else:
            chunks = [
                (m, tuple(codes[i : i + 64]), max_latents)
                for i in range(0, len(codes), 64)
            ]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for n, hit in pool.map(_scan_chunk, chunks):
                    checked += n
                    if hit is not None:
                        found, found_m = hit, m
                        break
            if found is not None:
                break
    if found is None:
        raise NotFoundWithinBounds(
            f"no violation among {checked} instances with at most"
            f" {max_vertices} vertices and {max_latents} latent",
            instances_checked=checked,
        )

    code, latent_idx, x, z, path, anchors = found
    names = _SEARCH_NAMES[:found_m]
    g = _decode_dag(code, found_m)
    inst = LatentInstance(g, frozenset(names) - {names[i] for i in latent_idx})
    mapping = _presentation_relabel(inst, x, z)
    inst = LatentInstance(
        g.relabel(mapping), frozenset(mapping[v] for v in inst.observed)
    )
    report = CounterexampleReport(
        instance=inst,
        x=mapping[x],
        z=mapping[z],
        pattern=restricted_pattern(inst),
        path=tuple(mapping[v] for v in path),
        anchors=tuple((mapping[t], mapping[c]) for t, c in anchors),
        max_vertices=max_vertices,
        max_latents=max_latents,
        instances_checked=checked,
    )
    verify_counterexample(report)
    return report


def _closure_matrix(g: Dag) -> tuple[dict[str, int], np.ndarray]:
    """Reachability by repeated boolean matrix squaring; shares no code with
    the frontier-based descendant helpers."""
    idx = {v: i for i, v in enumerate(g.vertices)}
    n = len(idx)
    a = np.zeros((n, n), dtype=bool)
    for t, h in g.edges:
        a[idx[t], idx[h]] = True
    reach = a.copy()
    for _ in range(max(1, n.bit_length())):
        reach = reach | (reach @ reach)
    return idx, reach


def verify_counterexample(report: CounterexampleReport) -> None:
    """Re-verify a report through independent routes, raising
    :class:`VerificationFailed` on any discrepancy.

    Checks: the path and anchors are premise witnesses under direct edge-mark
    reads; the pattern reproduces from the generating graph using the
    enumeration-based separation oracle under both collider rules; matrix
    reachability confirms the generating graph has no directed path from
    ``x`` to ``z``; and some consecutive path pair lies in a pattern triangle
    (otherwise the sound single-edge rule would contradict the report).
    """

    def fail(msg: str) -> None:
        raise VerificationFailed(msg)

    inst, p, path = report.instance, report.pattern, report.path
    if len(path) < 2 or len(set(path)) != len(path):
        fail("the path must visit at least two distinct vertices, none twice")
    if report.x != path[0] or report.z != path[-1]:
        fail("path endpoints disagree with the reported source and target")
    if sorted(p.vertices) != sorted(inst.observed):
        fail("the pattern is not over the observed vertices")
    if {report.x, report.z} - inst.observed:
        fail("source and target must be observed")
    if report.instances_checked < 1:
        fail("a found report implies at least one instance was checked")

    edge_marks = {
        (e.a, e.b): (e.mark_a, e.mark_b) for e in p.edges
    }

    def mark(u: str, v: str) -> Union[Mark, None]:
        if (u, v) in edge_marks:
            return edge_marks[(u, v)][1]
        if (v, u) in edge_marks:
            return edge_marks[(v, u)][0]
        return None

    for u, w in zip(path, path[1:]):
        if not (mark(w, u) is Mark.PLAIN and mark(u, w) is Mark.ARROW):
            fail(f"path edge {u} -> {w} is not strictly directed in the pattern")
    if len(report.anchors) != len(path) - 1 or tuple(
        t for t, _ in report.anchors
    ) != path[:-1]:
        fail("anchors must list each path edge tail once, in order")
    for tail, c in report.anchors:
        if c == tail or mark(c, tail) is not Mark.ARROW:
            fail(f"anchor {c} has no arrowhead into {tail}")

    for rule in ("literal", "sepset"):
        recomputed = restricted_pattern(inst, collider_rule=rule, method="enum")
        if recomputed != p:
            fail(f"the pattern does not reproduce under the {rule} collider rule")

    idx, reach = _closure_matrix(inst.g)
    if reach[idx[report.x], idx[report.z]]:
        fail("the generating graph has a directed path from source to target")

    neighbor_sets = {v: set() for v in p.vertices}
    for a, b in edge_marks:
        neighbor_sets[a].add(b)
        neighbor_sets[b].add(a)
    if not any(
        neighbor_sets[u] & neighbor_sets[w] - {u, w}
        for u, w in zip(path, path[1:])
    ):
        fail("no consecutive path pair lies in a triangle")


# ---------------------------------------------------------------------------
# Random instances for statistical suites
# ---------------------------------------------------------------------------


def random_instance(
    seed: int, *, max_observed: int = 7, max_latents: int = 3
) -> LatentInstance:
    """A reproducible random instance: 3 to ``max_observed`` observed
    vertices, 0 to ``max_latents`` latent ones, edges drawn over a random
    vertex order with a density drawn from [0.25, 0.6]."""
    if max_observed < 3:
        raise InvalidParameter("max_observed must be at least 3")
    if max_latents < 0:
        raise InvalidParameter("max_latents cannot be negative")
    rng = np.random.default_rng(seed)
    n_obs = int(rng.integers(3, max_observed + 1))
    n_lat = int(rng.integers(0, max_latents + 1))
    n = n_obs + n_lat
    names = tuple(f"V{i:02d}" for i in range(1, n + 1))
    order = [names[i] for i in rng.permutation(n)]
    density = float(rng.uniform(0.25, 0.6))
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                edges.append((order[i], order[j]))
    latent = {order[int(i)] for i in rng.choice(n, size=n_lat, replace=False)}
    return LatentInstance(Dag(names, frozenset(edges)), frozenset(names) - latent)
