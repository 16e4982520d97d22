"""
Exact k-nearest-neighbor graphs by blocked brute force.

Candidate neighbors are screened with the Gram-matrix expansion of squared
distances, then the survivors are re-measured directly from coordinate
differences and ordered by (distance, index). The screening slack covers the
expansion's rounding error, so the result is exact and does not depend on
the block size or thread count.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import PointCloud
from .errors import EmptyDataset, InvalidParam, KTooLarge

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class KnnGraph:
    indices: np.ndarray  # (n, k) int64, row i never contains i
    distances: np.ndarray  # (n, k) float64, ascending per row
    k: int

    @property
    def n(self) -> int:
        return self.indices.shape[0]


@dataclass(frozen=True)
class EdgeSet:
    edges: np.ndarray  # (m, 2) int64 with edges[:, 0] < edges[:, 1], lexicographically sorted
    n: int

    def __len__(self):
        return len(self.edges)


def _exact_rows(queries, ref, ref_sq, k, query_ids):
    """k nearest rows of ``ref`` for each query; ``query_ids`` marks self-matches to skip (-1 for none)."""
    d = queries.shape[1]
    q_sq = np.einsum("ij,ij->i", queries, queries)
    approx = q_sq[:, None] + ref_sq[None, :] - 2.0 * (queries @ ref.T)
    rows = np.arange(len(queries))
    has_self = query_ids >= 0
    approx[rows[has_self], query_ids[has_self]] = np.inf
    kth = np.partition(approx, k - 1, axis=1)[:, k - 1]
    slack = 8.0 * (d + 2) * _EPS * (q_sq + ref_sq.max()) + 1e-300
    out_idx = np.empty((len(queries), k), dtype=np.int64)
    out_dist = np.empty((len(queries), k), dtype=np.float64)
    for r in rows:
        cand = np.flatnonzero(approx[r] <= kth[r] + slack[r])
        diff = ref[cand] - queries[r]
        # same reduction as np.linalg.norm(..., axis=1), so reported distances match a plain norm bitwise
        dist = np.sqrt(np.sum(diff * diff, axis=1))
        order = np.lexsort((cand, dist))[:k]
        out_idx[r] = cand[order]
        out_dist[r] = dist[order]
    return out_idx, out_dist


def nearest_neighbors(queries, ref, k, block_size=256, self_ids=None, threads=1):
    """
    Exact Euclidean kNN of each query row among the rows of ``ref``.

    Ties are broken by smaller reference index. When ``self_ids`` is given,
    query ``i`` never returns reference row ``self_ids[i]``.
    """
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    ref = np.ascontiguousarray(ref, dtype=np.float64)
    nq = len(queries)
    if self_ids is None:
        self_ids = np.full(nq, -1, dtype=np.int64)
    ref_sq = np.einsum("ij,ij->i", ref, ref)
    indices = np.empty((nq, k), dtype=np.int64)
    distances = np.empty((nq, k), dtype=np.float64)
    block_size = max(1, int(block_size))
    starts = range(0, nq, block_size)

    def run(start):
        stop = min(start + block_size, nq)
        idx, dist = _exact_rows(queries[start:stop], ref, ref_sq, k, self_ids[start:stop])
        indices[start:stop] = idx
        distances[start:stop] = dist

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, starts))
    else:
        for s in starts:
            run(s)
    return indices, distances


def build_knn(cloud: PointCloud, k: int, block_size: int = 256, threads: int = 1) -> KnnGraph:
    """Exact kNN graph of a cloud, excluding self-loops."""
    n = cloud.n
    if n < 2:
        raise EmptyDataset("a kNN graph needs at least 2 points")
    if not 1 <= k <= n - 1:
        raise KTooLarge(f"k must lie in [1, {n - 1}], got {k}")
    if block_size < 1:
        raise InvalidParam("block_size must be positive")
    idx, dist = nearest_neighbors(
        cloud.coords, cloud.coords, k, block_size, self_ids=np.arange(n, dtype=np.int64), threads=threads
    )
    idx.setflags(write=False)
    dist.setflags(write=False)
    return KnnGraph(idx, dist, k)


def symmetrize(graph: KnnGraph) -> EdgeSet:
    """Undirected, deduplicated edge list with i < j."""
    n, k = graph.indices.shape
    src = np.repeat(np.arange(n, dtype=np.int64), k)
    dst = graph.indices.ravel()
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    keys = np.unique(lo * n + hi)
    edges = np.column_stack([keys // n, keys % n]).astype(np.int64)
    edges.setflags(write=False)
    return EdgeSet(edges, n)


def save_graph_csv(graph: KnnGraph, path) -> None:
    """Debug dump of directed (i, j, distance) triples."""
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["i", "j", "distance"])
        for i in range(graph.n):
            for j, dist in zip(graph.indices[i], graph.distances[i]):
                writer.writerow([i, int(j), f"{dist:.17g}"])
