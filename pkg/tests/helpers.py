"""Shared construction helpers for the test suite."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from causalpattern.errors import CycleDetected
from causalpattern.graphs import Dag, Edge, Mark, Pattern

NAMES = ("A", "B", "C", "D", "E", "F", "G", "H")


def dag(edges: str, extra: str = "") -> Dag:
    """Compact builder: ``dag("A>B C>B")`` reads each token tail>head;
    ``extra`` lists isolated vertices, space-separated."""
    pairs = []
    names = set(extra.split())
    for token in edges.split():
        tail, head = token.split(">")
        pairs.append((tail, head))
        names.update((tail, head))
    return Dag(tuple(sorted(names)), frozenset(pairs))


def pattern(edges: str, extra: str = "") -> Pattern:
    """Compact builder: tokens ``A>B`` (directed), ``A-B`` (undirected),
    ``A*B`` (bidirected)."""
    out = []
    names = set(extra.split())
    for token in edges.split():
        if ">" in token:
            a, b = token.split(">")
            out.append(Edge(a, b, Mark.PLAIN, Mark.ARROW))
        elif "*" in token:
            a, b = token.split("*")
            out.append(Edge(a, b, Mark.ARROW, Mark.ARROW))
        else:
            a, b = token.split("-")
            out.append(Edge(a, b, Mark.PLAIN, Mark.PLAIN))
        names.update((a, b))
    return Pattern(tuple(sorted(names)), frozenset(out))


@lru_cache(maxsize=None)
def all_dags(n: int) -> tuple[Dag, ...]:
    """Every directed acyclic graph on vertices A.. (n of them), enumerated
    by assigning each unordered pair one of {absent, ->, <-} and keeping the
    acyclic assignments.  Deterministic order."""
    names = NAMES[:n]
    pairs = list(itertools.combinations(names, 2))
    out = []
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (a, b), state in zip(pairs, states):
            if state == 1:
                edges.append((a, b))
            elif state == 2:
                edges.append((b, a))
        try:
            out.append(Dag(names, frozenset(edges)))
        except CycleDetected:
            continue
    return tuple(out)


def all_subsets(items):
    """All subsets of ``items`` as frozensets, sizes ascending then lex."""
    items = sorted(items)
    for k in range(len(items) + 1):
        for combo in itertools.combinations(items, k):
            yield frozenset(combo)


def random_pattern(rng: np.random.Generator, n: int, edge_prob: float = 0.4) -> Pattern:
    """Random mixed graph: each pair gets an edge with ``edge_prob`` and one
    of the four mark combinations uniformly."""
    names = NAMES[:n] if n <= len(NAMES) else tuple(f"V{i:02d}" for i in range(1, n + 1))
    marks = (
        (Mark.PLAIN, Mark.PLAIN),
        (Mark.PLAIN, Mark.ARROW),
        (Mark.ARROW, Mark.PLAIN),
        (Mark.ARROW, Mark.ARROW),
    )
    edges = []
    for a, b in itertools.combinations(names, 2):
        if rng.random() < edge_prob:
            ma, mb = marks[rng.integers(0, 4)]
            edges.append(Edge(a, b, ma, mb))
    return Pattern(tuple(names), frozenset(edges))


def random_test_dag(rng: np.random.Generator, n: int, edge_prob: float = 0.35) -> Dag:
    """Random directed acyclic graph via a random vertex order."""
    names = NAMES[:n] if n <= len(NAMES) else tuple(f"V{i:02d}" for i in range(1, n + 1))
    order = list(names)
    rng.shuffle(order)
    edges = []
    for i, j in itertools.combinations(range(len(order)), 2):
        if rng.random() < edge_prob:
            edges.append((order[i], order[j]))
    return Dag(tuple(names), frozenset(edges))
