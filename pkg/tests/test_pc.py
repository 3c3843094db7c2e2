"""Discovery algorithm: skeleton, collider orientation, propagation, traces."""

import itertools

import numpy as np
import pytest

from causalpattern.dsep import SepQuery, d_separated_reach
from causalpattern.errors import (
    DuplicateVertex,
    InvalidParameter,
    NotObserved,
    OrientationCycle,
    VertexSetMismatch,
)
from causalpattern.graphs import Dag, Mark, build_dag
from causalpattern.pc import (
    CiOracle,
    DSepOracle,
    PcTrace,
    pattern_represents,
    pc,
    pc_orient_colliders,
    pc_orient_propagate,
    pc_skeleton,
    unshielded_colliders,
)
from causalpattern.sem import random_sparse_dag

from .helpers import all_dags, dag, pattern


def truth_adjacency(g: Dag) -> set[tuple[str, str]]:
    return {(min(t, h), max(t, h)) for t, h in g.edges}


class TestOracleAccounting:
    def test_memoization_and_symmetry(self):
        g = dag("A>B C>B")
        o = DSepOracle(g)
        first = o.independent("A", "C")
        assert o.independent("C", "A") == first
        assert o.query_count == 2
        assert o.compute_count == 1
        assert o.cond_size_counts == {0: 2}
        o.independent("A", "C", {"B"})
        assert o.cond_size_counts == {0: 2, 1: 1}

    def test_within_margin_enforced(self):
        g = dag("T>A T>B")
        o = DSepOracle(g, within={"A", "B"})
        assert o.independent("A", "B") is False
        with pytest.raises(NotObserved):
            o.independent("A", "T")
        with pytest.raises(NotObserved):
            o.independent("A", "B", {"T"})
        assert o.default_vertices() == ("A", "B")

    def test_enum_method_agrees(self):
        g = dag("A>B B>C A>D D>C")
        o1 = DSepOracle(g, method="reach")
        o2 = DSepOracle(g, method="enum")
        for x, y in itertools.combinations(g.vertices, 2):
            assert o1.independent(x, y) == o2.independent(x, y)
        with pytest.raises(InvalidParameter):
            DSepOracle(g, method="magic")


class TestFrozenRuns:
    def test_pure_collider(self):
        g = dag("A>B C>B")
        pat, trace = pc(DSepOracle(g))
        assert pat == pattern("A>B C>B")
        assert trace.render_lines() == (
            "DEL A C | S={} | n=0",
            "ORIENT A B C | stepC",
        )

    def test_chain_stays_unoriented(self):
        g = dag("A>B B>C")
        pat, trace = pc(DSepOracle(g))
        assert pat == pattern("A-B B-C")
        assert trace.render_lines() == ("DEL A C | S={B} | n=1",)

    def test_two_parent_cause(self):
        # A and B collide at X which then causes Z; the X -> Z orientation is
        # forced by propagation rule 1.
        g = dag("A>X B>X X>Z")
        pat, trace = pc(DSepOracle(g))
        assert pat == pattern("A>X B>X X>Z")
        assert trace.render_lines() == (
            "DEL A B | S={} | n=0",
            "DEL A Z | S={X} | n=1",
            "DEL B Z | S={X} | n=1",
            "ORIENT A X B | stepC",
            "ORIENT X Z | stepD1 | from=A",
        )

    def test_six_vertex_latent_margin(self):
        # One unmeasured vertex T; the margin keeps a C-X adjacency that has
        # no corresponding edge (the chain C -> Z -> D -> X cannot be blocked
        # without opening the collider path through T), and the correct Z -> X
        # orientation arrives via propagation rule 2.
        g = dag("T>X T>Z C>Z Z>D E>D D>X")
        o = DSepOracle(g, within={"C", "D", "E", "X", "Z"})
        pat, trace = pc(o)
        assert pat == pattern("C>X C-Z E>D D>X Z>D Z>X")
        assert trace.render_lines() == (
            "DEL C E | S={} | n=0",
            "DEL E Z | S={} | n=0",
            "DEL C D | S={Z} | n=1",
            "DEL E X | S={D,Z} | n=2",
            "ORIENT E D Z | stepC",
            "ORIENT C X D | stepC",
            "ORIENT Z X | stepD2",
        )

    def test_independent_pair(self):
        g = dag("", extra="A B")
        pat, trace = pc(DSepOracle(g))
        assert pat.edges == frozenset()
        assert trace.render_lines() == ("DEL A B | S={} | n=0",)


class TestSkeleton:
    def test_returns_undirected_pattern_and_sepsets(self):
        g = dag("A>X B>X X>Z")
        skeleton, sepsets = pc_skeleton(DSepOracle(g), g.vertices)
        assert {e.pair for e in skeleton.edges} == truth_adjacency(g)
        assert all(
            e.mark_a is Mark.PLAIN and e.mark_b is Mark.PLAIN for e in skeleton.edges
        )
        assert sepsets.get("A", "B") == frozenset()
        assert sepsets.get("B", "A") == frozenset()
        assert sepsets.get("A", "Z") == {"X"}
        assert sepsets.get("A", "X") is None
        assert len(sepsets) == 3
        assert sepsets.pairs() == (("A", "B"), ("A", "Z"), ("B", "Z"))

    def test_exhaustive_adjacency_recovery(self):
        for g in all_dags(4):
            skeleton, _ = pc_skeleton(DSepOracle(g), g.vertices)
            assert {e.pair for e in skeleton.edges} == truth_adjacency(g), g.edges

    def test_adjacency_iff_no_separating_subset(self):
        # ground truth straight from the definition: adjacency survives
        # exactly when no subset of the remaining vertices separates the pair
        rng = np.random.default_rng(13)
        for trial in range(10):
            g = random_sparse_dag(7, 1.8, seed=trial)
            skeleton, _ = pc_skeleton(DSepOracle(g), g.vertices)
            for x, y in itertools.combinations(g.vertices, 2):
                rest = set(g.vertices) - {x, y}
                separable = any(
                    d_separated_reach(g, SepQuery(x, y, frozenset(s)))
                    for k in range(len(rest) + 1)
                    for s in itertools.combinations(sorted(rest), k)
                )
                assert skeleton.has_edge(x, y) == (not separable)

    def test_validation(self):
        g = dag("A>B")
        with pytest.raises(DuplicateVertex):
            pc_skeleton(DSepOracle(g), ["A", "A", "B"])
        with pytest.raises(InvalidParameter):
            pc_skeleton(DSepOracle(g), ["A"])


class TestColliderStage:
    def test_requires_undirected_skeleton(self):
        g = dag("A>B C>B")
        with pytest.raises(InvalidParameter):
            pc_orient_colliders(pattern("A>B C-B"), DSepOracle(g))

    def test_unknown_rule_and_missing_sepsets(self):
        g = dag("A>B C>B")
        skeleton, sepsets = pc_skeleton(DSepOracle(g), g.vertices)
        with pytest.raises(InvalidParameter):
            pc_orient_colliders(skeleton, DSepOracle(g), rule="magic")
        with pytest.raises(InvalidParameter):
            pc_orient_colliders(skeleton, DSepOracle(g), rule="sepset")

    def test_literal_and_sepset_agree_on_exact_oracles(self):
        for g in all_dags(4):
            oracle = DSepOracle(g)
            skeleton, sepsets = pc_skeleton(oracle, g.vertices)
            lit = pc_orient_colliders(skeleton, oracle, rule="literal")
            rec = pc_orient_colliders(skeleton, oracle, rule="sepset", sepsets=sepsets)
            assert lit == rec, g.edges

    def test_accumulating_arrowheads_can_produce_bidirected(self):
        # A -> X <- B and C -> Y <- X on the margin hiding nothing: classic
        # double collider leaves X with arrowheads from both sides when two
        # triples share the edge X ~ Y.
        g = dag("A>X T>X T>Y B>Y")
        o = DSepOracle(g, within={"A", "B", "X", "Y"})
        pat, _ = pc(o)
        assert pat == pattern("A>X X*Y B>Y")


class TestPropagation:
    def test_rule_one_frozen(self):
        p = pattern("A>B B-C", extra="")
        out = pc_orient_propagate(p)
        assert out == pattern("A>B B>C")

    def test_rule_two_frozen(self):
        p = pattern("A>B B>C A-C")
        out = pc_orient_propagate(p)
        assert out == pattern("A>B B>C A>C")

    def test_orientation_cycle_raised(self):
        p = pattern("A>B B-C C>D D>B")
        with pytest.raises(OrientationCycle):
            pc_orient_propagate(p)

    def test_idempotent(self):
        cases = [
            pattern("A>B B-C"),
            pattern("A>B B>C A-C"),
            pattern("A>X B>X X-Z A-Z"),
            pattern("A*B B-C A>D"),
        ]
        for p in cases:
            once = pc_orient_propagate(p)
            assert pc_orient_propagate(once) == once

    def test_leaves_bidirected_and_directed_edges_alone(self):
        p = pattern("A*B B>C")
        out = pc_orient_propagate(p)
        assert out == p

    def test_trace_events_recorded(self):
        trace = PcTrace()
        pc_orient_propagate(pattern("A>B B-C"), trace=trace)
        assert trace.render_lines() == ("ORIENT B C | stepD1 | from=A",)


class TestWholePipeline:
    def test_exhaustive_soundness_small(self):
        for g in all_dags(4):
            pat, trace = pc(DSepOracle(g))
            assert {e.pair for e in pat.edges} == truth_adjacency(g), g.edges
            assert unshielded_colliders(pat) == unshielded_colliders(g), g.edges
            assert pattern_represents(pat, g), g.edges

    def test_replay_reproduces_pattern(self):
        for g in all_dags(4)[::7]:
            pat, trace = pc(DSepOracle(g))
            assert trace.replay(g.vertices) == pat
        for seed in range(5):
            g = random_sparse_dag(10, 2.0, seed=seed)
            pat, trace = pc(DSepOracle(g))
            assert trace.replay(g.vertices) == pat
            assert pattern_represents(pat, g)

    def test_deterministic_across_runs(self):
        g = random_sparse_dag(9, 2.2, seed=42)
        pat1, tr1 = pc(DSepOracle(g))
        pat2, tr2 = pc(DSepOracle(g))
        assert pat1 == pat2
        assert tr1.render_lines() == tr2.render_lines()

    def test_vertices_default_and_explicit(self):
        g = dag("A>B C>B")
        o = DSepOracle(g)
        assert pc(o)[0] == pc(DSepOracle(g), g.vertices)[0]

        class Opaque(CiOracle):
            def _evaluate(self, x, y, s):
                return False

        with pytest.raises(InvalidParameter):
            pc(Opaque())

    def test_latent_margin_restricts_vertices(self):
        g = dag("T>A T>B")
        pat, _ = pc(DSepOracle(g, within={"A", "B"}))
        assert pat.vertices == ("A", "B")
        assert pat.has_edge("A", "B")  # the latent fork induces adjacency


class TestComparisonHelpers:
    def test_unshielded_colliders_dag(self):
        g = dag("A>B C>B A>C D>B")
        # pairs into B: (A,C) shielded, (A,D), (C,D) unshielded
        assert unshielded_colliders(g) == {("A", "B", "D"), ("C", "B", "D")}

    def test_unshielded_colliders_pattern(self):
        p = pattern("A>B C*B A-D")
        assert unshielded_colliders(p) == {("A", "B", "C")}

    def test_pattern_represents_clauses(self):
        g = dag("A>B C>B")
        assert pattern_represents(pattern("A>B C>B"), g)
        assert pattern_represents(pattern("A-B B-C"), g) is False  # missing collider
        assert pattern_represents(pattern("B>A C>B"), g) is False  # wrong direction
        assert pattern_represents(pattern("A>B C>B A-C"), g) is False  # extra edge
        assert pattern_represents(pattern("A>B", extra="C"), g) is False  # missing edge
        with pytest.raises(VertexSetMismatch):
            pattern_represents(pattern("A>B"), g)

    def test_pattern_represents_allows_extra_undirected(self):
        g = dag("A>B B>C")
        assert pattern_represents(pattern("A-B B-C"), g)
