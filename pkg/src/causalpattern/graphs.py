"""Vertex-labeled graphs: directed acyclic graphs and mixed-mark patterns.

Two graph kinds share one vocabulary:

* :class:`Dag` — a directed acyclic graph over named vertices.  Every edge
  ``(tail, head)`` implicitly carries a plain mark at the tail and an
  arrowhead at the head.
* :class:`Pattern` — a mixed graph whose edges carry an explicit
  :class:`Mark` at each endpoint, giving undirected (``A -- B``), directed
  (``A -> B``), and bidirected (``A <-> B``) edges.  Patterns are what
  constraint-based discovery produces: a summary of every orientation the
  evidence pins down.

Both kinds expose ``neighbors_of``, ``mark_at`` and ``has_edge``, so the
path utilities below (path enumeration, collider tests, interior-vertex
computation, triangles) work on either.

Vertices are plain strings.  All iteration orders used by algorithms in this
package are lexicographic, and constructors normalize vertex tuples to sorted
order, so equal structures compare equal and every derived order is
reproducible.

A small line-oriented text format serializes both kinds; see
:func:`parse_dag_text`, :func:`parse_pattern_text`, :func:`render_dag`,
:func:`render_pattern`.
"""

from __future__ import annotations

import heapq
from collections import defaultdict, deque
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from .errors import (
    CycleDetected,
    DuplicateEdge,
    DuplicateVertex,
    GraphError,
    IndexOutOfRange,
    InvalidParameter,
    NotAdjacent,
    ParseError,
    QueryInvariantViolated,
    SelfEdge,
    UnknownVertex,
)

__all__ = [
    "Mark",
    "Edge",
    "undirected",
    "directed",
    "bidirected",
    "Dag",
    "Pattern",
    "build_dag",
    "build_pattern",
    "ancestors",
    "descendants",
    "is_collider",
    "enumerate_paths",
    "adjacent_aux",
    "path_interior_vertices",
    "triangle_containing",
    "parse_dag_text",
    "parse_pattern_text",
    "parse_graph_text",
    "render_dag",
    "render_pattern",
]


class Mark(Enum):
    """Endpoint mark of an edge: a plain end or an arrowhead."""

    PLAIN = "plain"
    ARROW = "arrow"

    def __repr__(self) -> str:  # stable, short
        return f"Mark.{self.name}"


@dataclass(frozen=True)
class Edge:
    """One pattern edge between ``a`` and ``b`` with a mark at each end.

    Instances are normalized so that ``a < b`` lexicographically; each
    unordered vertex pair therefore has exactly one representation.

    Examples
    --------
    >>> Edge("B", "A", Mark.ARROW, Mark.PLAIN) == directed("A", "B")
    True
    """

    a: str
    b: str
    mark_a: Mark
    mark_b: Mark

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise SelfEdge(f"edge endpoints coincide: {self.a!r}")
        if self.a > self.b:
            a, b, ma, mb = self.a, self.b, self.mark_a, self.mark_b
            object.__setattr__(self, "a", b)
            object.__setattr__(self, "b", a)
            object.__setattr__(self, "mark_a", mb)
            object.__setattr__(self, "mark_b", ma)

    @property
    def pair(self) -> tuple[str, str]:
        """The unordered endpoint pair as a sorted tuple."""
        return (self.a, self.b)

    def mark_at(self, v: str) -> Mark:
        """Mark at endpoint ``v``."""
        if v == self.a:
            return self.mark_a
        if v == self.b:
            return self.mark_b
        raise UnknownVertex(f"{v!r} is not an endpoint of edge {self.a}~{self.b}")

    def other(self, v: str) -> str:
        """The endpoint opposite ``v``."""
        if v == self.a:
            return self.b
        if v == self.b:
            return self.a
        raise UnknownVertex(f"{v!r} is not an endpoint of edge {self.a}~{self.b}")


def undirected(a: str, b: str) -> Edge:
    """Edge ``a -- b`` (plain at both ends)."""
    return Edge(a, b, Mark.PLAIN, Mark.PLAIN)


def directed(tail: str, head: str) -> Edge:
    """Edge ``tail -> head`` (plain at the tail, arrowhead at the head)."""
    return Edge(tail, head, Mark.PLAIN, Mark.ARROW)


def bidirected(a: str, b: str) -> Edge:
    """Edge ``a <-> b`` (arrowhead at both ends)."""
    return Edge(a, b, Mark.ARROW, Mark.ARROW)


def _check_vertex_names(names: Sequence[str]) -> tuple[str, ...]:
    seen: set[str] = set()
    for name in names:
        if not isinstance(name, str) or not name:
            raise GraphError(f"vertex names must be non-empty strings, got {name!r}")
        if any(ch.isspace() for ch in name) or "#" in name:
            raise GraphError(f"vertex name {name!r} contains whitespace or '#'")
        if name in seen:
            raise DuplicateVertex(f"vertex {name!r} declared more than once")
        seen.add(name)
    if not names:
        raise GraphError("a graph needs at least one vertex")
    return tuple(sorted(names))


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over named vertices.

    Parameters
    ----------
    vertices:
        Vertex names (normalized to sorted order).
    edges:
        Directed edges as ``(tail, head)`` pairs.

    Raises
    ------
    CycleDetected, SelfEdge, DuplicateEdge, DuplicateVertex, UnknownVertex
        On any malformed input.

    Examples
    --------
    >>> g = Dag(("A", "B", "C"), frozenset({("A", "B"), ("B", "C")}))
    >>> sorted(descendants(g, "A"))
    ['B', 'C']
    """

    vertices: tuple[str, ...]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self) -> None:
        names = _check_vertex_names(tuple(self.vertices))
        object.__setattr__(self, "vertices", names)
        object.__setattr__(self, "edges", frozenset(self.edges))
        vset = set(names)
        pairs: set[tuple[str, str]] = set()
        for tail, head in sorted(self.edges):
            if tail not in vset:
                raise UnknownVertex(f"edge tail {tail!r} is not a declared vertex")
            if head not in vset:
                raise UnknownVertex(f"edge head {head!r} is not a declared vertex")
            if tail == head:
                raise SelfEdge(f"self edge at {tail!r}")
            pair = (tail, head) if tail < head else (head, tail)
            if pair in pairs:
                raise DuplicateEdge(f"more than one edge between {pair[0]!r} and {pair[1]!r}")
            pairs.add(pair)
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        color: dict[str, int] = {}  # 0 unseen implicit, 1 on stack, 2 done
        parent: dict[str, str] = {}
        children = defaultdict(list)
        for tail, head in sorted(self.edges):
            children[tail].append(head)
        for root in self.vertices:
            if color.get(root):
                continue
            stack: list[tuple[str, Iterator[str]]] = [(root, iter(children[root]))]
            color[root] = 1
            while stack:
                v, it = stack[-1]
                advanced = False
                for w in it:
                    c = color.get(w, 0)
                    if c == 1:
                        cycle = [w]
                        cur = v
                        while cur != w:
                            cycle.append(cur)
                            cur = parent[cur]
                        cycle.append(w)
                        cycle = cycle[::-1]
                        raise CycleDetected(tuple(cycle))
                    if c == 0:
                        parent[w] = v
                        color[w] = 1
                        stack.append((w, iter(children[w])))
                        advanced = True
                        break
                if not advanced:
                    color[v] = 2
                    stack.pop()

    # -- adjacency -----------------------------------------------------

    @cached_property
    def _parents(self) -> dict[str, frozenset[str]]:
        acc: dict[str, set[str]] = {v: set() for v in self.vertices}
        for tail, head in self.edges:
            acc[head].add(tail)
        return {v: frozenset(s) for v, s in acc.items()}

    @cached_property
    def _children(self) -> dict[str, frozenset[str]]:
        acc: dict[str, set[str]] = {v: set() for v in self.vertices}
        for tail, head in self.edges:
            acc[tail].add(head)
        return {v: frozenset(s) for v, s in acc.items()}

    def _require(self, v: str) -> None:
        if v not in self._parents:
            raise UnknownVertex(f"unknown vertex {v!r}")

    def parents_of(self, v: str) -> frozenset[str]:
        """Vertices with an edge into ``v``."""
        self._require(v)
        return self._parents[v]

    def children_of(self, v: str) -> frozenset[str]:
        """Vertices with an edge out of ``v``."""
        self._require(v)
        return self._children[v]

    def neighbors_of(self, v: str) -> frozenset[str]:
        """Vertices adjacent to ``v`` ignoring direction."""
        return self.parents_of(v) | self.children_of(v)

    def has_edge(self, u: str, v: str) -> bool:
        """True when ``u`` and ``v`` are adjacent (either direction)."""
        self._require(u)
        self._require(v)
        return (u, v) in self.edges or (v, u) in self.edges

    def mark_at(self, u: str, v: str) -> Mark:
        """Mark at the ``v`` end of the edge between ``u`` and ``v``."""
        if (u, v) in self.edges:
            return Mark.ARROW
        if (v, u) in self.edges:
            return Mark.PLAIN
        self._require(u)
        self._require(v)
        raise NotAdjacent(f"no edge between {u!r} and {v!r}")

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        """A deterministic topological order (lexicographic tie-break)."""
        indeg = {v: len(self._parents[v]) for v in self.vertices}
        ready = [v for v in self.vertices if indeg[v] == 0]
        heapq.heapify(ready)
        out: list[str] = []
        while ready:
            v = heapq.heappop(ready)
            out.append(v)
            for w in sorted(self._children[v]):
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(ready, w)
        return tuple(out)

    def relabel(self, mapping: Mapping[str, str]) -> "Dag":
        """Copy of this graph with vertices renamed through ``mapping``."""
        missing = [v for v in self.vertices if v not in mapping]
        if missing:
            raise UnknownVertex(f"relabel mapping misses vertices {missing}")
        return Dag(
            tuple(mapping[v] for v in self.vertices),
            frozenset((mapping[t], mapping[h]) for t, h in self.edges),
        )


@dataclass(frozen=True)
class Pattern:
    """Mixed graph whose edges carry explicit endpoint marks.

    Parameters
    ----------
    vertices:
        Vertex names (normalized to sorted order).
    edges:
        :class:`Edge` values; at most one edge per vertex pair.

    Examples
    --------
    >>> p = Pattern(("A", "B", "C"), frozenset({directed("A", "B"), undirected("B", "C")}))
    >>> p.mark_at("A", "B") is Mark.ARROW
    True
    """

    vertices: tuple[str, ...]
    edges: frozenset[Edge]

    def __post_init__(self) -> None:
        names = _check_vertex_names(tuple(self.vertices))
        object.__setattr__(self, "vertices", names)
        object.__setattr__(self, "edges", frozenset(self.edges))
        vset = set(names)
        pairs: set[tuple[str, str]] = set()
        for e in sorted(self.edges, key=lambda e: e.pair):
            for v in e.pair:
                if v not in vset:
                    raise UnknownVertex(f"edge endpoint {v!r} is not a declared vertex")
            if e.pair in pairs:
                raise DuplicateEdge(f"more than one edge between {e.a!r} and {e.b!r}")
            pairs.add(e.pair)

    @cached_property
    def _by_pair(self) -> dict[tuple[str, str], Edge]:
        return {e.pair: e for e in self.edges}

    @cached_property
    def _neighbors(self) -> dict[str, frozenset[str]]:
        acc: dict[str, set[str]] = {v: set() for v in self.vertices}
        for e in self.edges:
            acc[e.a].add(e.b)
            acc[e.b].add(e.a)
        return {v: frozenset(s) for v, s in acc.items()}

    def _require(self, v: str) -> None:
        if v not in self._neighbors:
            raise UnknownVertex(f"unknown vertex {v!r}")

    def neighbors_of(self, v: str) -> frozenset[str]:
        """Vertices adjacent to ``v`` by any edge."""
        self._require(v)
        return self._neighbors[v]

    def has_edge(self, u: str, v: str) -> bool:
        """True when some edge joins ``u`` and ``v``."""
        self._require(u)
        self._require(v)
        return (min(u, v), max(u, v)) in self._by_pair

    def edge_between(self, u: str, v: str) -> Union[Edge, None]:
        """The edge joining ``u`` and ``v``, or None."""
        self._require(u)
        self._require(v)
        return self._by_pair.get((min(u, v), max(u, v)))

    def mark_at(self, u: str, v: str) -> Mark:
        """Mark at the ``v`` end of the edge between ``u`` and ``v``."""
        e = self.edge_between(u, v)
        if e is None:
            raise NotAdjacent(f"no edge between {u!r} and {v!r}")
        return e.mark_at(v)

    def is_strictly_directed(self, tail: str, head: str) -> bool:
        """True for an edge that is plain at ``tail`` and arrowed at ``head``."""
        e = self.edge_between(tail, head)
        return (
            e is not None
            and e.mark_at(tail) is Mark.PLAIN
            and e.mark_at(head) is Mark.ARROW
        )

    def is_undirected_edge(self, u: str, v: str) -> bool:
        """True for an edge plain at both ends."""
        e = self.edge_between(u, v)
        return e is not None and e.mark_a is Mark.PLAIN and e.mark_b is Mark.PLAIN

    def is_bidirected(self, u: str, v: str) -> bool:
        """True for an edge arrowed at both ends."""
        e = self.edge_between(u, v)
        return e is not None and e.mark_a is Mark.ARROW and e.mark_b is Mark.ARROW

    def arrows_into(self, v: str) -> frozenset[str]:
        """Neighbors ``u`` whose edge with ``v`` carries an arrowhead at ``v``."""
        return frozenset(u for u in self.neighbors_of(v) if self.mark_at(u, v) is Mark.ARROW)

    def directed_parents_of(self, v: str) -> frozenset[str]:
        """Neighbors ``u`` with a strictly directed edge ``u -> v``."""
        return frozenset(u for u in self.neighbors_of(v) if self.is_strictly_directed(u, v))

    def directed_children_of(self, v: str) -> frozenset[str]:
        """Neighbors ``w`` with a strictly directed edge ``v -> w``."""
        return frozenset(w for w in self.neighbors_of(v) if self.is_strictly_directed(v, w))

    def relabel(self, mapping: Mapping[str, str]) -> "Pattern":
        """Copy of this pattern with vertices renamed through ``mapping``."""
        missing = [v for v in self.vertices if v not in mapping]
        if missing:
            raise UnknownVertex(f"relabel mapping misses vertices {missing}")
        return Pattern(
            tuple(mapping[v] for v in self.vertices),
            frozenset(
                Edge(mapping[e.a], mapping[e.b], e.mark_a, e.mark_b) for e in self.edges
            ),
        )


GraphLike = Union[Dag, Pattern]

EdgeInput = Union[Edge, tuple[str, str, Mark, Mark]]


def build_dag(vertices: Iterable[str], edges: Iterable[tuple[str, str]]) -> Dag:
    """Construct a :class:`Dag`, validating the raw edge list.

    Unlike the :class:`Dag` constructor (whose frozenset argument silently
    collapses repeats), this helper rejects a literally repeated edge.
    """
    edge_list = [tuple(e) for e in edges]
    seen: set[tuple[str, str]] = set()
    for e in edge_list:
        if len(e) != 2:
            raise GraphError(f"directed edges are (tail, head) pairs, got {e!r}")
        if e in seen:
            raise DuplicateEdge(f"edge {e[0]!r} -> {e[1]!r} listed more than once")
        seen.add(e)  # unordered duplicates are caught by the constructor
    return Dag(tuple(vertices), frozenset(edge_list))


def build_pattern(vertices: Iterable[str], edges: Iterable[EdgeInput]) -> Pattern:
    """Construct a :class:`Pattern` from Edge values or 4-tuples."""
    norm: list[Edge] = []
    for e in edges:
        if isinstance(e, Edge):
            norm.append(e)
        else:
            a, b, ma, mb = e
            norm.append(Edge(a, b, ma, mb))
    seen: set[tuple[str, str]] = set()
    for e in norm:
        if e.pair in seen:
            raise DuplicateEdge(f"more than one edge between {e.a!r} and {e.b!r}")
        seen.add(e.pair)
    return Pattern(tuple(vertices), frozenset(norm))


# ---------------------------------------------------------------------------
# Ancestry
# ---------------------------------------------------------------------------


def _directed_maps(
    c: GraphLike,
) -> tuple[Callable[[str], frozenset[str]], Callable[[str], frozenset[str]]]:
    """(parents, children) accessors; on patterns only strictly directed
    edges count, so undirected and bidirected edges carry no ancestry."""
    if isinstance(c, Dag):
        return c.parents_of, c.children_of
    return c.directed_parents_of, c.directed_children_of


def _closure(start: str, step: Callable[[str], frozenset[str]]) -> frozenset[str]:
    out: set[str] = set()
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in step(v):
            if w not in out:
                out.add(w)
                queue.append(w)
    out.discard(start)
    return frozenset(out)


def ancestors(c: GraphLike, v: str) -> frozenset[str]:
    """Strict ancestors of ``v``: vertices with a directed path into ``v``.

    ``v`` itself is excluded.  On patterns only strictly directed edges
    (plain tail, arrowed head) contribute.
    """
    parents, _ = _directed_maps(c)
    parents(v)  # vertex check
    return _closure(v, parents)


def descendants(c: GraphLike, v: str) -> frozenset[str]:
    """Strict descendants of ``v``: vertices reachable by a directed path.

    ``v`` itself is excluded.  On patterns only strictly directed edges
    contribute.
    """
    _, children = _directed_maps(c)
    children(v)  # vertex check
    return _closure(v, children)


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


def _iter_simple_paths(
    c: GraphLike, x: str, y: str, max_edges: Union[int, None] = None
) -> Iterator[tuple[str, ...]]:
    """Yield simple paths from x to y over undirected adjacency, in
    depth-first lexicographic order."""
    sorted_neighbors = {v: tuple(sorted(c.neighbors_of(v))) for v in c.vertices}
    path = [x]
    on_path = {x}
    stack: list[Iterator[str]] = [iter(sorted_neighbors[x])]
    while stack:
        advanced = False
        for w in stack[-1]:
            if w in on_path:
                continue
            if w == y:
                yield tuple(path) + (y,)
                continue
            if max_edges is not None and len(path) >= max_edges:
                continue
            path.append(w)
            on_path.add(w)
            stack.append(iter(sorted_neighbors[w]))
            advanced = True
            break
        if not advanced:
            on_path.discard(path.pop())
            stack.pop()


def enumerate_paths(
    c: GraphLike, x: str, y: str, max_len: Union[int, None] = None
) -> tuple[tuple[str, ...], ...]:
    """All simple paths between ``x`` and ``y`` ignoring edge direction.

    Paths are vertex sequences starting at ``x`` and ending at ``y`` with no
    repeated vertex, listed in depth-first lexicographic order.  ``max_len``
    bounds the number of edges per path.

    Examples
    --------
    >>> g = build_dag(["A", "B", "C"], [("A", "B"), ("B", "C"), ("A", "C")])
    >>> enumerate_paths(g, "A", "C")
    (('A', 'B', 'C'), ('A', 'C'))
    """
    if x == y:
        raise QueryInvariantViolated("path endpoints must differ")
    c.neighbors_of(x)
    c.neighbors_of(y)
    if max_len is not None and max_len < 1:
        raise InvalidParameter("max_len must be at least 1")
    return tuple(_iter_simple_paths(c, x, y, max_len))


def is_collider(c: GraphLike, path: Sequence[str], position: int) -> bool:
    """True when the vertex at ``position`` has arrowheads from both path
    neighbors, i.e. the path enters and leaves it head-on.

    ``position`` must be interior: ``0 < position < len(path) - 1``.
    """
    if not 0 < position < len(path) - 1:
        raise IndexOutOfRange(
            f"position {position} is not interior to a path of {len(path)} vertices"
        )
    prev_v, v, next_v = path[position - 1], path[position], path[position + 1]
    return c.mark_at(prev_v, v) is Mark.ARROW and c.mark_at(next_v, v) is Mark.ARROW


def adjacent_aux(c: GraphLike, a: str, b: str) -> frozenset[str]:
    """Vertices adjacent to ``a`` or to ``b``, excluding ``a`` and ``b``."""
    if a == b:
        raise QueryInvariantViolated("adjacent_aux needs two distinct vertices")
    return (c.neighbors_of(a) | c.neighbors_of(b)) - {a, b}


# -- interior vertices: enumeration route and flow route -------------------


def _neighbor_sets(c: GraphLike) -> dict[str, frozenset[str]]:
    return {v: c.neighbors_of(v) for v in c.vertices}


def _two_vertex_disjoint(
    nb: Mapping[str, frozenset[str]], v: str, a: str, b: str
) -> bool:
    """True when two paths run from ``v`` to ``a`` and to ``b`` sharing no
    vertex except ``v`` — equivalently, ``v`` lies on a simple a..b path.

    Implemented as a two-unit max-flow with unit vertex capacities (vertex
    splitting); two breadth-first augmentations suffice.
    """
    residual: dict[tuple, set] = defaultdict(set)

    def add_arc(u, w):
        residual[u].add(w)

    for x, ys in nb.items():
        if x != v:
            add_arc(("in", x), ("out", x))
        for y in ys:
            add_arc(("out", x), ("in", y))
    add_arc(("out", a), "T")
    add_arc(("out", b), "T")
    source = ("out", v)

    flow = 0
    while flow < 2:
        prev: dict = {source: None}
        queue = deque([source])
        reached = False
        while queue:
            u = queue.popleft()
            if u == "T":
                reached = True
                break
            for w in residual[u]:
                if w not in prev:
                    prev[w] = u
                    queue.append(w)
        if not reached:
            return False
        node = "T"
        while prev[node] is not None:
            u = prev[node]
            residual[u].discard(node)
            residual[node].add(u)
            node = u
        flow += 1
    return True


def _interior_candidates_flow(
    nb: Mapping[str, frozenset[str]], a: str, b: str, candidates: Iterable[str]
) -> frozenset[str]:
    return frozenset(v for v in candidates if _two_vertex_disjoint(nb, v, a, b))


def path_interior_vertices(
    c: GraphLike, a: str, b: str, method: str = "flow"
) -> frozenset[str]:
    """Vertices other than ``a``/``b`` lying on some simple path between them
    (edge directions ignored).

    ``method="flow"`` (default) decides each candidate vertex ``v`` by a
    two-unit vertex-capacitated max-flow from ``v`` to ``{a, b}`` — ``v`` is
    on a simple a..b path exactly when two paths from ``v`` reach ``a`` and
    ``b`` while sharing no other vertex.  ``method="enumerate"`` takes the
    union of interiors over literally enumerated paths; it is exponential and
    kept as an independent cross-check.
    """
    if a == b:
        raise QueryInvariantViolated("path_interior_vertices needs distinct endpoints")
    c.neighbors_of(a)
    c.neighbors_of(b)
    if method == "enumerate":
        out: set[str] = set()
        for path in _iter_simple_paths(c, a, b):
            out.update(path[1:-1])
        return frozenset(out)
    if method == "flow":
        nb = _neighbor_sets(c)
        candidates = [v for v in c.vertices if v not in (a, b)]
        return _interior_candidates_flow(nb, a, b, candidates)
    raise InvalidParameter(f"unknown method {method!r}; use 'flow' or 'enumerate'")


def triangle_containing(p: GraphLike, x: str, z: str) -> bool:
    """True when adjacent vertices ``x`` and ``z`` have a common neighbor.

    Raises :class:`NotAdjacent` when ``x`` and ``z`` are not adjacent.
    """
    if x == z:
        raise QueryInvariantViolated("triangle query needs distinct vertices")
    if not p.has_edge(x, z):
        raise NotAdjacent(f"no edge between {x!r} and {z!r}")
    return bool((p.neighbors_of(x) & p.neighbors_of(z)) - {x, z})


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_RESERVED = {"node", "observe", "section", "--", "->", "<->"}

_EDGE_MARKS = {
    "->": (Mark.PLAIN, Mark.ARROW),
    "--": (Mark.PLAIN, Mark.PLAIN),
    "<->": (Mark.ARROW, Mark.ARROW),
}


def _check_name_token(tok: str, source: str, line_no: int) -> str:
    if tok in _RESERVED:
        raise ParseError(
            f"{tok!r} is a reserved word and cannot name a vertex",
            source=source,
            line_no=line_no,
        )
    return tok


def _statements(text: str, source: str) -> Iterator[tuple[int, list[str]]]:
    for line_no, raw in enumerate(text.splitlines(), start=1):
        hash_at = raw.find("#")
        line = raw if hash_at < 0 else raw[:hash_at]
        tokens = line.split()
        if tokens:
            yield line_no, tokens


@dataclass
class _ParsedGraph:
    names: list[str]
    edges: list[tuple[int, str, str, str]]  # line_no, a, op, b
    observed: Union[list[str], None]


def _parse_graph_statements(text: str, source: str) -> _ParsedGraph:
    names: list[str] = []
    declared: set[str] = set()
    edges: list[tuple[int, str, str, str]] = []
    seen_pairs: set[tuple[str, str]] = set()
    observed: Union[list[str], None] = None

    for line_no, tokens in _statements(text, source):
        head = tokens[0]
        if head == "node":
            if len(tokens) != 2:
                raise ParseError("node lines are 'node NAME'", source=source, line_no=line_no)
            name = _check_name_token(tokens[1], source, line_no)
            if name in declared:
                raise ParseError(f"vertex {name!r} declared twice", source=source, line_no=line_no)
            declared.add(name)
            names.append(name)
        elif head == "observe":
            if len(tokens) < 2:
                raise ParseError(
                    "observe lines name at least one vertex", source=source, line_no=line_no
                )
            if observed is None:
                observed = []
            for tok in tokens[1:]:
                name = _check_name_token(tok, source, line_no)
                if name not in declared:
                    raise ParseError(
                        f"observe references undeclared vertex {name!r}",
                        source=source,
                        line_no=line_no,
                    )
                if name in observed:
                    raise ParseError(
                        f"vertex {name!r} observed twice", source=source, line_no=line_no
                    )
                observed.append(name)
        elif len(tokens) == 3 and tokens[1] in _EDGE_MARKS:
            a = _check_name_token(tokens[0], source, line_no)
            b = _check_name_token(tokens[2], source, line_no)
            for v in (a, b):
                if v not in declared:
                    raise ParseError(
                        f"edge references undeclared vertex {v!r}",
                        source=source,
                        line_no=line_no,
                    )
            if a == b:
                raise ParseError(f"self edge at {a!r}", source=source, line_no=line_no)
            pair = (min(a, b), max(a, b))
            if pair in seen_pairs:
                raise ParseError(
                    f"more than one edge between {pair[0]!r} and {pair[1]!r}",
                    source=source,
                    line_no=line_no,
                )
            seen_pairs.add(pair)
            edges.append((line_no, a, tokens[1], b))
        else:
            raise ParseError(
                f"unrecognized statement {' '.join(tokens)!r}", source=source, line_no=line_no
            )
    if not names:
        raise ParseError("document declares no vertices", source=source, line_no=0)
    return _ParsedGraph(names, edges, observed)


def parse_dag_text(
    text: str, *, source: str = "<string>"
) -> tuple[Dag, Union[frozenset[str], None]]:
    """Parse a directed-graph document.

    Returns the graph and the observed-vertex set (None when the document has
    no ``observe`` line).  Only ``->`` edges are legal here.
    """
    parsed = _parse_graph_statements(text, source)
    for line_no, a, op, b in parsed.edges:
        if op != "->":
            raise ParseError(
                f"edge {a} {op} {b} is not directed; a directed-graph document"
                " allows only '->' edges",
                source=source,
                line_no=line_no,
            )
    try:
        g = Dag(tuple(parsed.names), frozenset((a, b) for _, a, _, b in parsed.edges))
    except CycleDetected as exc:
        raise ParseError(str(exc), source=source, line_no=0) from exc
    observed = None if parsed.observed is None else frozenset(parsed.observed)
    return g, observed


def parse_pattern_text(text: str, *, source: str = "<string>") -> Pattern:
    """Parse a pattern document (``->``, ``--`` and ``<->`` edges)."""
    parsed = _parse_graph_statements(text, source)
    if parsed.observed is not None:
        raise ParseError(
            "observe lines do not belong in a pattern document", source=source, line_no=0
        )
    edges = []
    for _, a, op, b in parsed.edges:
        ma, mb = _EDGE_MARKS[op]
        edges.append(Edge(a, b, ma, mb))
    return Pattern(tuple(parsed.names), frozenset(edges))


def parse_graph_text(
    text: str, *, source: str = "<string>"
) -> tuple[str, GraphLike, Union[frozenset[str], None]]:
    """Parse a graph document of either kind.

    Returns ``(kind, graph, observed)`` where ``kind`` is ``"dag"`` or
    ``"pattern"``.  Documents whose edges are all ``->`` (and acyclic) parse
    as directed graphs; any ``--`` or ``<->`` edge makes the document a
    pattern.  Patterns admit no ``observe`` line.
    """
    parsed = _parse_graph_statements(text, source)
    if all(op == "->" for _, _, op, _ in parsed.edges):
        try:
            g, observed = parse_dag_text(text, source=source)
            return "dag", g, observed
        except ParseError as exc:
            if "cycle" not in str(exc):
                raise
            # fall through: a cyclic all-directed document is read as a pattern
    p = parse_pattern_text(text, source=source)
    return "pattern", p, None


def render_dag(g: Dag, observed: Union[Iterable[str], None] = None) -> str:
    """Canonical text for a directed graph: sorted node lines, sorted edges,
    then one ``observe`` line when an observed set is given."""
    lines = [f"node {v}" for v in g.vertices]
    lines += [f"{t} -> {h}" for t, h in sorted(g.edges, key=lambda e: (min(e), max(e), e))]
    if observed is not None:
        obs = sorted(observed)
        for v in obs:
            if v not in g._parents:
                raise UnknownVertex(f"observed vertex {v!r} is not in the graph")
        lines.append("observe " + " ".join(obs))
    return "\n".join(lines) + "\n"


def _render_edge(e: Edge) -> str:
    if e.mark_a is Mark.PLAIN and e.mark_b is Mark.PLAIN:
        return f"{e.a} -- {e.b}"
    if e.mark_a is Mark.ARROW and e.mark_b is Mark.ARROW:
        return f"{e.a} <-> {e.b}"
    if e.mark_a is Mark.PLAIN:
        return f"{e.a} -> {e.b}"
    return f"{e.b} -> {e.a}"


def render_pattern(p: Pattern) -> str:
    """Canonical text for a pattern: sorted node lines then sorted edges."""
    lines = [f"node {v}" for v in p.vertices]
    lines += [_render_edge(e) for e in sorted(p.edges, key=lambda e: e.pair)]
    return "\n".join(lines) + "\n"
