"""Graph structures, path machinery, and the text format."""

import itertools

import numpy as np
import pytest

from causalpattern.errors import (
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
from causalpattern.graphs import (
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

from .helpers import all_dags, dag, pattern, random_pattern, random_test_dag
from .oracles import closure_ancestors, interior_by_recursion, recursive_paths


# ---------------------------------------------------------------------------
# Edges
# ---------------------------------------------------------------------------


class TestEdge:
    def test_normalizes_endpoint_order(self):
        e = Edge("B", "A", Mark.ARROW, Mark.PLAIN)
        assert (e.a, e.b) == ("A", "B")
        assert e.mark_a is Mark.PLAIN and e.mark_b is Mark.ARROW
        assert e == directed("A", "B")

    def test_constructors(self):
        assert undirected("X", "Y").mark_at("X") is Mark.PLAIN
        assert directed("X", "Y").mark_at("Y") is Mark.ARROW
        assert directed("X", "Y").mark_at("X") is Mark.PLAIN
        assert bidirected("X", "Y").mark_at("X") is Mark.ARROW

    def test_self_edge_rejected(self):
        with pytest.raises(SelfEdge):
            Edge("A", "A", Mark.PLAIN, Mark.PLAIN)

    def test_other_and_unknown_endpoint(self):
        e = directed("A", "B")
        assert e.other("A") == "B"
        with pytest.raises(UnknownVertex):
            e.mark_at("C")


# ---------------------------------------------------------------------------
# Dag construction and accessors
# ---------------------------------------------------------------------------


class TestDag:
    def test_vertices_normalized_sorted(self):
        g = Dag(("C", "A", "B"), frozenset({("C", "A")}))
        assert g.vertices == ("A", "B", "C")

    def test_structural_equality(self):
        g1 = Dag(("B", "A"), frozenset({("A", "B")}))
        g2 = Dag(("A", "B"), frozenset({("A", "B")}))
        assert g1 == g2 and hash(g1) == hash(g2)

    def test_cycle_detected_with_cycle_attribute(self):
        with pytest.raises(CycleDetected) as exc:
            Dag(("A", "B", "C"), frozenset({("A", "B"), ("B", "C"), ("C", "A")}))
        cycle = exc.value.cycle
        assert cycle[0] == cycle[-1]
        assert set(cycle) == {"A", "B", "C"}
        for t, h in zip(cycle, cycle[1:]):
            assert (t, h) in {("A", "B"), ("B", "C"), ("C", "A")}

    def test_two_cycle_reported_as_duplicate_pair(self):
        # a 2-cycle violates the one-edge-per-pair invariant, which is
        # diagnosed before acyclicity
        with pytest.raises(DuplicateEdge):
            Dag(("A", "B"), frozenset({("A", "B"), ("B", "A")}))

    def test_duplicate_unordered_pair_rejected(self):
        with pytest.raises(DuplicateEdge):
            build_dag(["A", "B", "C"], [("A", "B"), ("B", "A")])

    def test_literal_duplicate_rejected_by_builder(self):
        with pytest.raises(DuplicateEdge):
            build_dag(["A", "B"], [("A", "B"), ("A", "B")])

    def test_unknown_endpoint(self):
        with pytest.raises(UnknownVertex):
            Dag(("A", "B"), frozenset({("A", "Q")}))

    def test_self_edge(self):
        with pytest.raises(SelfEdge):
            Dag(("A", "B"), frozenset({("A", "A")}))

    def test_duplicate_vertex(self):
        with pytest.raises(DuplicateVertex):
            Dag(("A", "A", "B"), frozenset())

    def test_empty_vertex_set_rejected(self):
        with pytest.raises(GraphError):
            Dag((), frozenset())

    def test_bad_vertex_names(self):
        with pytest.raises(GraphError):
            Dag(("A B",), frozenset())
        with pytest.raises(GraphError):
            Dag(("",), frozenset())

    def test_accessors(self):
        g = dag("A>B C>B B>D")
        assert g.parents_of("B") == {"A", "C"}
        assert g.children_of("B") == {"D"}
        assert g.neighbors_of("B") == {"A", "C", "D"}
        assert g.has_edge("B", "A") and not g.has_edge("A", "C")
        assert g.mark_at("A", "B") is Mark.ARROW
        assert g.mark_at("B", "A") is Mark.PLAIN
        with pytest.raises(NotAdjacent):
            g.mark_at("A", "C")
        with pytest.raises(UnknownVertex):
            g.parents_of("Q")

    def test_topological_order(self):
        g = dag("A>B C>B B>D")
        order = g.topological_order
        pos = {v: i for i, v in enumerate(order)}
        for t, h in g.edges:
            assert pos[t] < pos[h]
        assert order == ("A", "C", "B", "D")  # lexicographic tie-break

    def test_relabel(self):
        g = dag("A>B")
        h = g.relabel({"A": "X", "B": "Y"})
        assert h == dag("X>Y")
        with pytest.raises(UnknownVertex):
            g.relabel({"A": "X"})


class TestPattern:
    def test_mark_accessors(self):
        p = pattern("A>B B-C A*D")
        assert p.mark_at("A", "B") is Mark.ARROW
        assert p.mark_at("B", "A") is Mark.PLAIN
        assert p.is_strictly_directed("A", "B")
        assert not p.is_strictly_directed("B", "A")
        assert p.is_undirected_edge("B", "C")
        assert p.is_bidirected("A", "D")
        assert p.arrows_into("B") == {"A"}
        assert p.arrows_into("A") == {"D"}
        assert p.directed_parents_of("B") == {"A"}
        assert p.directed_children_of("A") == {"B"}
        with pytest.raises(NotAdjacent):
            p.mark_at("A", "C")

    def test_duplicate_pair_rejected(self):
        with pytest.raises(DuplicateEdge):
            build_pattern(["A", "B"], [directed("A", "B"), undirected("A", "B")])

    def test_unknown_endpoint(self):
        with pytest.raises(UnknownVertex):
            Pattern(("A", "B"), frozenset({directed("A", "Q")}))

    def test_relabel_preserves_marks(self):
        p = pattern("A>B B-C")
        q = p.relabel({"A": "X", "B": "Y", "C": "Z"})
        assert q == pattern("X>Y Y-Z")


# ---------------------------------------------------------------------------
# Ancestry
# ---------------------------------------------------------------------------


class TestAncestry:
    def test_frozen_example(self):
        g = dag("A>B B>C B>D E>C", extra="F")
        assert ancestors(g, "C") == {"A", "B", "E"}
        assert ancestors(g, "A") == frozenset()
        assert descendants(g, "A") == {"B", "C", "D"}
        assert descendants(g, "F") == frozenset()

    def test_strictness_excludes_self(self):
        g = dag("A>B")
        assert "A" not in ancestors(g, "A")
        assert "B" not in descendants(g, "B")

    def test_against_matrix_closure_exhaustive(self):
        for g in all_dags(4):
            want = closure_ancestors(g)
            for v in g.vertices:
                assert ancestors(g, v) == want[v], (g.edges, v)

    def test_against_matrix_closure_random(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            g = random_test_dag(rng, 8)
            want = closure_ancestors(g)
            for v in g.vertices:
                assert ancestors(g, v) == want[v]

    def test_pattern_ancestry_uses_strict_edges_only(self):
        p = pattern("A>B B-C B*D D>E")
        assert descendants(p, "A") == {"B"}
        assert ancestors(p, "E") == {"D"}
        assert ancestors(p, "C") == frozenset()

    def test_unknown_vertex(self):
        with pytest.raises(UnknownVertex):
            ancestors(dag("A>B"), "Q")


# ---------------------------------------------------------------------------
# Path machinery
# ---------------------------------------------------------------------------


class TestEnumeratePaths:
    def test_triangle_frozen(self):
        g = build_dag(["A", "B", "C"], [("A", "B"), ("B", "C"), ("A", "C")])
        assert enumerate_paths(g, "A", "C") == (("A", "B", "C"), ("A", "C"))

    def test_complete_five_has_sixteen_paths_per_pair(self):
        names = ["A", "B", "C", "D", "E"]
        edges = [(a, b) for a, b in itertools.combinations(names, 2)]
        g = build_dag(names, edges)
        for x, y in itertools.combinations(names, 2):
            assert len(enumerate_paths(g, x, y)) == 16

    def test_against_recursive_enumeration(self):
        for g in all_dags(4):
            for x, y in itertools.combinations(g.vertices, 2):
                got = enumerate_paths(g, x, y)
                assert set(got) == recursive_paths(g, x, y)
                assert list(got) == sorted(got)  # depth-first lex order
        rng = np.random.default_rng(11)
        for _ in range(25):
            p = random_pattern(rng, 6)
            got = enumerate_paths(p, "A", "F")
            assert set(got) == recursive_paths(p, "A", "F")

    def test_max_len_bounds_edges(self):
        g = build_dag(["A", "B", "C"], [("A", "B"), ("B", "C"), ("A", "C")])
        assert enumerate_paths(g, "A", "C", max_len=1) == (("A", "C"),)
        for g in all_dags(4):
            for x, y in itertools.combinations(g.vertices, 2):
                for cap in (1, 2, 3):
                    got = set(enumerate_paths(g, x, y, max_len=cap))
                    assert got == recursive_paths(g, x, y, max_edges=cap)

    def test_validation(self):
        g = dag("A>B")
        with pytest.raises(QueryInvariantViolated):
            enumerate_paths(g, "A", "A")
        with pytest.raises(UnknownVertex):
            enumerate_paths(g, "A", "Q")
        with pytest.raises(InvalidParameter):
            enumerate_paths(g, "A", "B", max_len=0)


class TestIsCollider:
    def test_dag_chain_fork_collider(self):
        chain = dag("A>B B>C")
        assert not is_collider(chain, ("A", "B", "C"), 1)
        fork = dag("B>A B>C")
        assert not is_collider(fork, ("A", "B", "C"), 1)
        coll = dag("A>B C>B")
        assert is_collider(coll, ("A", "B", "C"), 1)

    def test_pattern_marks(self):
        p = pattern("A>B C*B B-D")
        assert is_collider(p, ("A", "B", "C"), 1)
        assert not is_collider(p, ("A", "B", "D"), 1)

    def test_position_bounds(self):
        g = dag("A>B B>C")
        for bad in (0, 2, -1, 5):
            with pytest.raises(IndexOutOfRange):
                is_collider(g, ("A", "B", "C"), bad)

    def test_nonadjacent_raises(self):
        g = dag("A>B B>C", extra="D")
        with pytest.raises(NotAdjacent):
            is_collider(g, ("A", "D", "C"), 1)


class TestAdjacentAux:
    def test_set_algebra_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            g = random_test_dag(rng, 7)
            nb = {v: g.neighbors_of(v) for v in g.vertices}
            for a, b in itertools.combinations(g.vertices, 2):
                assert adjacent_aux(g, a, b) == (nb[a] | nb[b]) - {a, b}

    def test_validation(self):
        g = dag("A>B")
        with pytest.raises(QueryInvariantViolated):
            adjacent_aux(g, "A", "A")
        with pytest.raises(UnknownVertex):
            adjacent_aux(g, "A", "Q")


class TestPathInterior:
    def test_frozen_example(self):
        # B sits on A-B-C; D hangs off B and is on no A..C path
        g = dag("A>B B>C B>D")
        assert path_interior_vertices(g, "A", "C") == {"B"}
        assert path_interior_vertices(g, "A", "C", method="enumerate") == {"B"}

    def test_flow_equals_enumeration_exhaustive(self):
        for g in all_dags(4):
            for a, b in itertools.combinations(g.vertices, 2):
                flow = path_interior_vertices(g, a, b, method="flow")
                enum = path_interior_vertices(g, a, b, method="enumerate")
                assert flow == enum == interior_by_recursion(g, a, b), (g.edges, a, b)

    def test_flow_equals_enumeration_random_dense(self):
        rng = np.random.default_rng(5)
        for trial in range(40):
            n = int(rng.integers(5, 9))
            g = random_test_dag(rng, n, edge_prob=float(rng.uniform(0.2, 0.9)))
            verts = g.vertices
            a, b = sorted(rng.choice(len(verts), size=2, replace=False))
            a, b = verts[a], verts[b]
            flow = path_interior_vertices(g, a, b, method="flow")
            enum = path_interior_vertices(g, a, b, method="enumerate")
            assert flow == enum

    def test_flow_on_patterns_ignores_marks(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            p = random_pattern(rng, 6)
            flow = path_interior_vertices(p, "A", "F", method="flow")
            assert flow == interior_by_recursion(p, "A", "F")

    def test_disconnected_pair_has_empty_interior(self):
        g = dag("A>B", extra="C D")
        assert path_interior_vertices(g, "A", "C") == frozenset()
        assert path_interior_vertices(g, "B", "D", method="enumerate") == frozenset()

    def test_validation(self):
        g = dag("A>B")
        with pytest.raises(InvalidParameter):
            path_interior_vertices(g, "A", "B", method="magic")
        with pytest.raises(QueryInvariantViolated):
            path_interior_vertices(g, "A", "A")


class TestTriangle:
    def test_triangle_cases(self):
        p = pattern("A>B B>C A>C C-D")
        assert triangle_containing(p, "A", "B")
        assert triangle_containing(p, "A", "C")
        assert not triangle_containing(p, "C", "D")

    def test_requires_adjacency(self):
        p = pattern("A>B B>C")
        with pytest.raises(NotAdjacent):
            triangle_containing(p, "A", "C")
        with pytest.raises(QueryInvariantViolated):
            triangle_containing(p, "A", "A")

    def test_works_on_dags(self):
        g = dag("A>B B>C A>C")
        assert triangle_containing(g, "A", "C")


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

SAMPLE_DAG_TEXT = """\
# a small system
node A
node B
node T   # unmeasured
A -> B
T -> B   # trailing comment
observe A B
"""


class TestTextFormat:
    def test_parse_dag_with_comments_and_observe(self):
        g, observed = parse_dag_text(SAMPLE_DAG_TEXT)
        assert g == dag("A>B T>B")
        assert observed == {"A", "B"}

    def test_parse_dag_without_observe(self):
        g, observed = parse_dag_text("node A\nnode B\nA -> B\n")
        assert observed is None

    def test_dag_round_trip(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            g = random_test_dag(rng, 6)
            text = render_dag(g)
            back, observed = parse_dag_text(text)
            assert back == g and observed is None
            assert render_dag(back) == text
            obs = frozenset(v for v in g.vertices if rng.random() < 0.6)
            if obs:
                text2 = render_dag(g, observed=obs)
                back2, obs2 = parse_dag_text(text2)
                assert back2 == g and obs2 == obs

    def test_pattern_round_trip(self):
        rng = np.random.default_rng(22)
        for _ in range(25):
            p = random_pattern(rng, 6)
            text = render_pattern(p)
            assert parse_pattern_text(text) == p
            assert render_pattern(parse_pattern_text(text)) == text

    def test_pattern_rendering_directions(self):
        p = pattern("B>A A-C A*D")
        text = render_pattern(p)
        assert "B -> A" in text
        assert "A -- C" in text
        assert "A <-> D" in text

    def test_parse_errors_carry_location(self):
        cases = [
            ("node A\nA -> Q\n", "undeclared"),
            ("node A\nnode A\n", "twice"),
            ("node A\nnode B\nA -> B\nA -> B\n", "more than one edge"),
            ("node A\nnode B\nA -> B\nB -> A\n", "more than one edge"),
            ("node A\nA -> A\n", "self edge"),
            ("node observe\n", "reserved"),
            ("node A\nwhat is this\n", "unrecognized"),
            ("node A\nnode B\nobserve A Q\n", "undeclared"),
            ("node A\nnode B\nobserve A A\n", "observed twice"),
            ("", "no vertices"),
            ("node A\nnode B\nA -- B\n", "only '->'"),
        ]
        for text, needle in cases:
            with pytest.raises(ParseError) as exc:
                parse_dag_text(text, source="doc.txt")
            assert needle in str(exc.value), (text, str(exc.value))
            assert "doc.txt" in str(exc.value)

    def test_cyclic_dag_document(self):
        text = "node A\nnode B\nA -> B\nB -> A\n"
        # duplicate-pair error fires first; a genuine 3-cycle reports the cycle
        text3 = "node A\nnode B\nnode C\nA -> B\nB -> C\nC -> A\n"
        with pytest.raises(ParseError) as exc:
            parse_dag_text(text3)
        assert "cycle" in str(exc.value)

    def test_pattern_rejects_observe(self):
        with pytest.raises(ParseError):
            parse_pattern_text("node A\nnode B\nA -- B\nobserve A\n")

    def test_graph_kind_detection(self):
        kind, g, observed = parse_graph_text(SAMPLE_DAG_TEXT)
        assert kind == "dag" and isinstance(g, Dag) and observed == {"A", "B"}
        kind, p, observed = parse_graph_text("node A\nnode B\nA -- B\n")
        assert kind == "pattern" and isinstance(p, Pattern) and observed is None
        # cyclic all-directed document falls back to a pattern reading
        kind, p, _ = parse_graph_text("node A\nnode B\nnode C\nA -> B\nB -> C\nC -> A\n")
        assert kind == "pattern"
        assert p.is_strictly_directed("C", "A")

    def test_render_dag_checks_observed(self):
        with pytest.raises(UnknownVertex):
            render_dag(dag("A>B"), observed={"Q"})
