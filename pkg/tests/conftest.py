import itertools
import os

import numpy as np
import pytest

from screenlab.corpus import parse_corpus
from screenlab.phrase_graph import SimilarityGraph

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
GOLDEN_DIR = os.path.join(DATA_DIR, "golden")
FIXTURE_DIR = os.path.join(DATA_DIR, "fixture_corpus")


@pytest.fixture(scope="session")
def golden_paths():
    return (
        os.path.join(GOLDEN_DIR, "utterances.jsonl"),
        os.path.join(GOLDEN_DIR, "films.jsonl"),
    )


@pytest.fixture(scope="session")
def golden_corpus(golden_paths):
    return parse_corpus(*golden_paths)


@pytest.fixture(scope="session")
def fixture_paths():
    return (
        os.path.join(FIXTURE_DIR, "utterances.jsonl"),
        os.path.join(FIXTURE_DIR, "films.jsonl"),
        os.path.join(FIXTURE_DIR, "phrase_groups.jsonl"),
    )


def graph_from_edges(n, edges):
    """Tiny helper: build a SimilarityGraph from (i, j[, w]) tuples."""
    ids = [f"n{i:02d}" for i in range(n)]
    src = np.asarray([e[0] for e in edges], dtype=np.int64)
    dst = np.asarray([e[1] for e in edges], dtype=np.int64)
    w = np.asarray([e[2] if len(e) > 2 else 1.0 for e in edges], dtype=np.float64)
    return SimilarityGraph(node_ids=ids, src=src, dst=dst, weight=w)


def clique_edges(nodes):
    return [(i, j) for i, j in itertools.combinations(nodes, 2)]


def set_partitions(n):
    """All partitions of range(n) as restricted-growth label tuples."""

    def rec(i, maxv, cur):
        if i == n:
            yield tuple(cur)
            return
        for v in range(maxv + 1):
            cur.append(v)
            yield from rec(i + 1, max(maxv, v + 1) if v == maxv else maxv, cur)
            cur.pop()

    yield from rec(0, 0, [])
