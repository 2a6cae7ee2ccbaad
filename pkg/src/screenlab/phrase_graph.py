"""Semantic-similarity graph over utterance texts and Leiden clustering.

Texts are deduplicated exactly (repeated lines become one node), embedded
nodes are joined by a cosine kNN graph thresholded at tau, and the graph is
partitioned by the Leiden algorithm (local move -> refinement ->
aggregation) under weighted modularity with a resolution parameter.
Clustering is single-threaded and deterministic given the seed; refinement
randomness comes from the package's splitmix64 counter generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import rng
from ._leiden_impl import _local_move, _refine
from .corpus import Corpus

DEFAULT_KNN_K = 10
DEFAULT_TAU = 0.8
DEFAULT_RESOLUTION = 1.0
DEFAULT_REFINE_THETA = 0.01
DEFAULT_RESTARTS = 4

_LEIDEN_STREAM = 0x4C454944  # stream tag for leiden randomness


class MissingEmbeddingError(ValueError):
    def __init__(self, texts: Sequence[str]):
        self.texts = list(texts)
        preview = ", ".join(repr(t) for t in self.texts[:5])
        more = "" if len(self.texts) <= 5 else f" (+{len(self.texts) - 5} more)"
        super().__init__(f"missing embeddings for texts: {preview}{more}")


@dataclass
class SimilarityGraph:
    """Undirected weighted graph over deduplicated texts; no self-loops."""

    node_ids: list[str]
    src: np.ndarray  # int64, src < dst
    dst: np.ndarray
    weight: np.ndarray  # float64

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return int(self.src.shape[0])

    @property
    def total_weight(self) -> float:
        return float(self.weight.sum())

    def strengths(self) -> np.ndarray:
        n = self.n_nodes
        s = np.bincount(self.src, weights=self.weight, minlength=n)
        s += np.bincount(self.dst, weights=self.weight, minlength=n)
        return s

    def to_symmetric_csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.n_nodes
        heads = np.concatenate([self.src, self.dst])
        tails = np.concatenate([self.dst, self.src])
        ws = np.concatenate([self.weight, self.weight])
        order = np.lexsort((tails, heads))
        heads, tails, ws = heads[order], tails[order], ws[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, heads + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, tails.astype(np.int64), ws.astype(np.float64)


@dataclass
class Partition:
    community_of: dict[str, int]
    quality: float
    resolution: float
    seed: int

    @property
    def n_communities(self) -> int:
        return len(set(self.community_of.values()))


@dataclass
class PhraseGroup:
    """A community of semantically equivalent utterance texts."""

    group_id: int
    member_texts: frozenset[str]
    utterance_ids: list[str]
    representative: str
    count: int


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"vectors must share one dimension, got {a.shape} and {b.shape}")
    na = float(np.sqrt((a * a).sum()))
    nb = float(np.sqrt((b * b).sum()))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity is undefined for zero vectors")
    return float(np.clip((a * b).sum() / (na * nb), -1.0, 1.0))


def build_knn_graph(
    texts: Sequence[str],
    embeddings: Mapping[str, np.ndarray],
    k: int = DEFAULT_KNN_K,
    tau: float = DEFAULT_TAU,
) -> SimilarityGraph:
    """Cosine kNN graph over the deduplicated texts, thresholded at tau.

    Nodes are ordered lexicographically and neighbor ties rank by
    (-similarity, node order), so the construction is invariant to the
    input ordering of texts. Exact all-pairs similarity; no ANN index.
    """
    uniq = sorted(set(texts))
    missing = [t for t in uniq if t not in embeddings]
    if missing:
        raise MissingEmbeddingError(missing)
    n = len(uniq)
    if n == 0:
        return SimilarityGraph([], np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0))
    mat = np.asarray([np.asarray(embeddings[t], dtype=np.float64) for t in uniq])
    norms = np.sqrt((mat * mat).sum(axis=1))
    zero = [uniq[i] for i in np.flatnonzero(norms == 0.0)]
    if zero:
        raise ValueError(f"zero embedding vectors for texts: {zero[:5]}")
    mat = mat / norms[:, None]
    sims = np.clip(mat @ mat.T, -1.0, 1.0)

    kk = min(k, n - 1)
    pairs: dict[tuple[int, int], float] = {}
    idx = np.arange(n)
    for i in range(n):
        row = sims[i]
        order = np.lexsort((idx, -row))
        taken = 0
        for j in order:
            if j == i:
                continue
            if row[j] < tau or taken == kk:
                break
            key = (i, j) if i < j else (j, i)
            pairs.setdefault(key, float(row[j]))
            taken += 1
    if pairs:
        keys = sorted(pairs)
        src = np.asarray([p[0] for p in keys], dtype=np.int64)
        dst = np.asarray([p[1] for p in keys], dtype=np.int64)
        wts = np.asarray([pairs[p] for p in keys], dtype=np.float64)
    else:
        src = np.zeros(0, np.int64)
        dst = np.zeros(0, np.int64)
        wts = np.zeros(0, np.float64)
    return SimilarityGraph(node_ids=uniq, src=src, dst=dst, weight=wts)


def _membership_array(g: SimilarityGraph, assignment) -> np.ndarray:
    if isinstance(assignment, dict):
        missing = [t for t in g.node_ids if t not in assignment]
        if missing:
            raise ValueError(f"assignment does not cover nodes: {missing[:5]}")
        arr = np.asarray([assignment[t] for t in g.node_ids], dtype=np.int64)
    else:
        arr = np.asarray(assignment, dtype=np.int64)
        if arr.shape[0] != g.n_nodes:
            raise ValueError("assignment length does not match node count")
    return arr


def modularity(g: SimilarityGraph, assignment, resolution: float = DEFAULT_RESOLUTION) -> float:
    """Q = sum_c [ w_c/W - resolution * (s_c / 2W)^2 ]."""
    w_total = g.total_weight
    if w_total <= 0.0:
        raise ValueError("modularity is undefined for a graph with zero total weight")
    comm = _membership_array(g, assignment)
    ncomm = int(comm.max()) + 1 if comm.size else 0
    same = comm[g.src] == comm[g.dst]
    intra = np.bincount(comm[g.src][same], weights=g.weight[same], minlength=ncomm)
    s_c = np.bincount(comm, weights=g.strengths(), minlength=ncomm)
    return float((intra / w_total).sum() - resolution * ((s_c / (2.0 * w_total)) ** 2).sum())


def _compact(labels: np.ndarray) -> tuple[np.ndarray, int]:
    uniq, inv = np.unique(labels, return_inverse=True)
    return inv.astype(np.int64), int(uniq.shape[0])


def _aggregate(indptr, nbr, wts, selfw, strength, rc, nr):
    n = indptr.shape[0] - 1
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    cs = rc[src]
    cd = rc[nbr]
    inter = cs != cd
    selfw_new = np.bincount(rc, weights=selfw, minlength=nr)
    if (~inter).any():
        # intra edges appear twice in the symmetric CSR
        selfw_new += 0.5 * np.bincount(cs[~inter], weights=wts[~inter], minlength=nr)
    strength_new = np.bincount(rc, weights=strength, minlength=nr)

    codes = cs[inter] * nr + cd[inter]
    w_inter = wts[inter]
    if codes.size:
        order = np.argsort(codes, kind="stable")
        codes_s = codes[order]
        w_s = w_inter[order]
        starts = np.concatenate([[0], np.flatnonzero(np.diff(codes_s)) + 1])
        uniq_codes = codes_s[starts]
        sums = np.add.reduceat(w_s, starts)
        new_src = (uniq_codes // nr).astype(np.int64)
        new_dst = (uniq_codes % nr).astype(np.int64)
    else:
        new_src = np.zeros(0, np.int64)
        new_dst = np.zeros(0, np.int64)
        sums = np.zeros(0, np.float64)
    indptr_new = np.zeros(nr + 1, dtype=np.int64)
    np.add.at(indptr_new, new_src + 1, 1)
    np.cumsum(indptr_new, out=indptr_new)
    return indptr_new, new_dst, sums, selfw_new, strength_new


def _components_of(indptr, nbr, members: np.ndarray) -> list[np.ndarray]:
    member_set = set(int(m) for m in members)
    seen: set[int] = set()
    comps = []
    for start in members:
        start = int(start)
        if start in seen:
            continue
        stack = [start]
        seen.add(start)
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for e in range(indptr[v], indptr[v + 1]):
                u = int(nbr[e])
                if u in member_set and u not in seen:
                    seen.add(u)
                    stack.append(u)
        comps.append(np.asarray(sorted(comp), dtype=np.int64))
    return comps


def _split_disconnected(indptr, nbr, membership: np.ndarray) -> np.ndarray:
    """Relabel disconnected communities into their connected components.

    Splitting a disconnected community always increases modularity, so this
    is a safe normalization pass.
    """
    out = membership.copy()
    next_label = int(out.max()) + 1 if out.size else 0
    for c in np.unique(out):
        members = np.flatnonzero(out == c)
        comps = _components_of(indptr, nbr, members)
        for comp in comps[1:]:
            out[comp] = next_label
            next_label += 1
    return out


def _leiden_run(g: SimilarityGraph, resolution: float, key, theta: float) -> tuple[np.ndarray, float]:
    """One full Leiden optimization under the given random key.

    Full passes restart the level cascade (local move -> refinement ->
    aggregation) from the current flat partition on the original graph and
    repeat until a pass leaves it unchanged. Quality is re-verified on the
    original graph after every local-move phase and must never decrease.
    """
    n0 = g.n_nodes
    indptr0, nbr0, wts0 = g.to_symmetric_csr()
    total_w = g.total_weight
    strength0 = g.strengths()
    ctr = 0
    q_prev = -np.inf
    flat = np.arange(n0, dtype=np.int64)

    for _pass in range(n0 + 1):
        indptr, nbr, wts = indptr0, nbr0, wts0
        selfw = np.zeros(n0)
        strength = strength0
        node_map = np.arange(n0, dtype=np.int64)
        comm_init, _ = _compact(flat)
        pass_moves = 0

        while True:
            n = indptr.shape[0] - 1
            order = rng.permutation(key, n, start=ctr)
            ctr += n
            comm = comm_init.copy()
            moves = _local_move(indptr, nbr, wts, strength, total_w, resolution, comm, order)
            pass_moves += moves
            comm_c, nc = _compact(comm)
            flat = comm_c[node_map]
            q = modularity(g, flat, resolution)
            if q < q_prev - 1e-9:
                raise RuntimeError(f"Leiden quality decreased: {q_prev} -> {q}")
            q_prev = max(q_prev, q)
            if nc == n or nc == 1:
                break  # every community is a single node: cascade done
            order2 = rng.permutation(key, n, start=ctr)
            ctr += n
            pool = rng.uniforms(key, n, start=ctr)
            ctr += n
            rcomm = _refine(
                indptr, nbr, wts, strength, total_w, resolution, comm_c, order2, pool, theta
            )
            rc, nr = _compact(rcomm)
            if nr == n:
                break  # refinement kept singletons; aggregation would be identity
            parent_of_refined = np.empty(nr, dtype=np.int64)
            parent_of_refined[rc] = comm_c
            indptr, nbr, wts, selfw, strength = _aggregate(
                indptr, nbr, wts, selfw, strength, rc, nr
            )
            comm_init, _ = _compact(parent_of_refined)
            node_map = rc[node_map]

        if pass_moves == 0:
            break

    flat = _split_disconnected(indptr0, nbr0, flat)
    q_final = modularity(g, flat, resolution)
    if q_final < q_prev - 1e-9:
        raise RuntimeError("final Leiden quality below tracked quality")
    return flat, q_final


def leiden_partition(
    g: SimilarityGraph,
    resolution: float = DEFAULT_RESOLUTION,
    seed: int = 0,
    theta: float = DEFAULT_REFINE_THETA,
    restarts: int = DEFAULT_RESTARTS,
) -> Partition:
    """Partition the graph with the Leiden algorithm.

    Runs `restarts` independent seeded optimizations (visit order and
    refinement randomness drawn from the splitmix64 substreams of the seed)
    and keeps the best quality, first-found winning ties. Deterministic
    given the seed; every returned community induces a connected subgraph.
    """
    n0 = g.n_nodes
    if n0 == 0:
        raise ValueError("leiden_partition requires a nonempty graph")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if g.total_weight <= 0.0:
        community_of = {t: i for i, t in enumerate(g.node_ids)}
        return Partition(community_of, 0.0, resolution, seed)

    base = rng.seed_key(seed, _LEIDEN_STREAM)
    best_flat = None
    best_q = -np.inf
    for r in range(restarts):
        flat, q = _leiden_run(g, resolution, rng.substream(base, r), theta)
        if q > best_q:
            best_q = q
            best_flat = flat

    labels = _relabel_first_occurrence(best_flat)
    quality = modularity(g, labels, resolution)
    community_of = {t: int(labels[i]) for i, t in enumerate(g.node_ids)}
    return Partition(community_of=community_of, quality=quality, resolution=resolution, seed=seed)


def _relabel_first_occurrence(labels: np.ndarray) -> np.ndarray:
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, v in enumerate(labels):
        v = int(v)
        if v not in mapping:
            mapping[v] = len(mapping)
        out[i] = mapping[v]
    return out


def community_is_connected(g: SimilarityGraph, partition: Partition) -> bool:
    """BFS check that every community induces a connected subgraph."""
    indptr, nbr, _ = g.to_symmetric_csr()
    comm = _membership_array(g, partition.community_of)
    for c in np.unique(comm):
        members = np.flatnonzero(comm == c)
        if len(_components_of(indptr, nbr, members)) > 1:
            return False
    return True


def make_phrase_groups(corpus: Corpus, partition: Partition, min_count: int) -> list[PhraseGroup]:
    """Phrase groups with at least min_count utterances, sorted by count
    descending (ties by representative). Representative is the most
    frequent member text, ties resolved lexicographically.
    """
    text_count: dict[str, int] = {}
    text_utts: dict[str, list[str]] = {}
    for u in corpus.utterances:
        text_count[u.text] = text_count.get(u.text, 0) + 1
        # qualified ids: utt_id alone is only unique within a film
        text_utts.setdefault(u.text, []).append(f"{u.film_id}:{u.utt_id}")
    missing = [t for t in text_count if t not in partition.community_of]
    if missing:
        raise ValueError(f"partition does not cover corpus texts: {missing[:5]}")

    by_comm: dict[int, list[str]] = {}
    for text in text_count:
        by_comm.setdefault(partition.community_of[text], []).append(text)

    groups: list[PhraseGroup] = []
    for cid, texts in by_comm.items():
        count = sum(text_count[t] for t in texts)
        if count < min_count:
            continue
        rep = min(texts, key=lambda t: (-text_count[t], t))
        utt_ids = [uid for t in sorted(texts) for uid in text_utts[t]]
        groups.append(
            PhraseGroup(
                group_id=cid,
                member_texts=frozenset(texts),
                utterance_ids=utt_ids,
                representative=rep,
                count=count,
            )
        )
    groups.sort(key=lambda gr: (-gr.count, gr.representative))
    for new_id, gr in enumerate(groups):
        gr.group_id = new_id
    return groups
