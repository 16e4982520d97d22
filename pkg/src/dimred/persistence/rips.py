"""
Vietoris-Rips persistence in dimensions 0 and 1 over Z/2.

Edges are totally ordered by (length, i, j). Dimension 0 is Kruskal's
algorithm with union-find: every merge kills the younger component at the
edge length, and the merging edges are exactly the minimum spanning tree.

Dimension 1 reduces the coboundary matrix of the remaining edges, latest
edge first. A triangle is keyed by ``rank(longest edge) * n + opposite
vertex``, which orders triangles compatibly with the filtration, so the
pivot of a column is its smallest key. Columns that reach a fresh pivot
without any addition are not stored; they are rebuilt from the distance
data when a later column needs them.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit, types
from numba.typed import Dict, List
from scipy.spatial.distance import pdist, squareform

from ..dataset import PointCloud
from ..errors import InvalidDim


@dataclass(frozen=True)
class PersistenceDiagram:
    """Rows of ``points`` are (birth, death, dim); death may be ``inf``."""

    points: np.ndarray
    n_source_points: int

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64).reshape(-1, 3)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def bars(self, dim):
        """(m, 2) array of (birth, death) in one homology dimension."""
        return self.points[self.points[:, 2] == dim, :2]

    def finite(self, dim):
        b = self.bars(dim)
        return b[np.isfinite(b[:, 1])]

    def essential(self, dim):
        b = self.bars(dim)
        return b[~np.isfinite(b[:, 1])]

    def __len__(self):
        return len(self.points)


def distance_matrix(coords):
    return squareform(pdist(np.asarray(coords, dtype=np.float64)))


def enclosing_radius(dist):
    """min_i max_j d(i, j); the Rips complex is a cone, hence acyclic, from this value on."""
    return float(dist.max(axis=1).min())


def sorted_edges(dist, cap=np.inf):
    """Upper-triangle edges with length <= cap, ordered by (length, i, j)."""
    iu, ju = np.triu_indices(len(dist), k=1)
    vals = dist[iu, ju]
    keep = vals <= cap
    iu, ju, vals = iu[keep], ju[keep], vals[keep]
    order = np.lexsort((ju, iu, vals))
    return iu[order].astype(np.int64), ju[order].astype(np.int64), vals[order]


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def _kruskal(n, ei, ej):
    """Indices (into the sorted edge list) of the edges that merge components."""
    parent = np.arange(n)
    out = np.empty(max(n - 1, 0), dtype=np.int64)
    count = 0
    for e in range(len(ei)):
        if count == n - 1:
            break
        a = _find(parent, ei[e])
        b = _find(parent, ej[e])
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
            out[count] = e
            count += 1
    return out[:count]


@njit(cache=True)
def _coboundary(r, i, j, rank, n):
    out = np.empty(n, dtype=np.int64)
    m = 0
    for v in range(n):
        if v == i or v == j:
            continue
        r1 = rank[i, v]
        r2 = rank[j, v]
        if r1 < 0 or r2 < 0:
            continue
        if r >= r1 and r >= r2:
            out[m] = r * n + v
        elif r1 >= r2:
            out[m] = r1 * n + j
        else:
            out[m] = r2 * n + i
        m += 1
    return out[:m]


@njit(cache=True)
def _symdiff(a, b):
    out = np.empty(len(a) + len(b), dtype=np.int64)
    i = 0
    j = 0
    m = 0
    while i < len(a) and j < len(b):
        if a[i] < b[j]:
            out[m] = a[i]
            i += 1
            m += 1
        elif b[j] < a[i]:
            out[m] = b[j]
            j += 1
            m += 1
        else:
            i += 1
            j += 1
    while i < len(a):
        out[m] = a[i]
        i += 1
        m += 1
    while j < len(b):
        out[m] = b[j]
        j += 1
        m += 1
    return out[:m]


@njit(cache=True)
def _reduce_h1(n, ei, ej, rank, is_tree):
    """Return (edge rank, pivot triangle key) pairs; key -1 marks an essential class."""
    n_edges = len(ei)
    owner = Dict.empty(key_type=types.int64, value_type=types.int64)
    slot = Dict.empty(key_type=types.int64, value_type=types.int64)
    stored = List()
    stored.append(np.empty(0, dtype=np.int64))
    births = np.empty(n_edges, dtype=np.int64)
    deaths = np.empty(n_edges, dtype=np.int64)
    count = 0
    for r in range(n_edges - 1, -1, -1):
        if is_tree[r]:
            continue
        col = _coboundary(r, ei[r], ej[r], rank, n)
        if len(col) == 0:
            births[count] = r
            deaths[count] = -1
            count += 1
            continue
        pivot = col.min()
        if pivot not in owner:
            owner[pivot] = r
            births[count] = r
            deaths[count] = pivot
            count += 1
            continue
        col = np.sort(col)
        while len(col) > 0 and col[0] in owner:
            other = owner[col[0]]
            if other in slot:
                col = _symdiff(col, stored[slot[other]])
            else:
                col = _symdiff(col, np.sort(_coboundary(other, ei[other], ej[other], rank, n)))
        if len(col) == 0:
            births[count] = r
            deaths[count] = -1
        else:
            owner[col[0]] = r
            slot[r] = len(stored)
            stored.append(col)
            births[count] = r
            deaths[count] = col[0]
        count += 1
    return births[:count], deaths[:count]


def rips_persistence(points, max_dim=1, max_filtration=None) -> PersistenceDiagram:
    """
    Persistence diagram of the Rips filtration of a point cloud.

    Parameters
    ----------
    points : PointCloud or (n, d) array
    max_dim : int
        0 or 1.
    max_filtration : float, optional
        Triangles longer than this are left out of the dimension-1
        computation; classes still alive there are reported with death
        ``inf``. Defaults to the enclosing radius, past which nothing is
        left to compute.

    Zero-length bars are dropped.
    """
    if max_dim not in (0, 1):
        raise InvalidDim(f"max_dim must be 0 or 1, got {max_dim}")
    coords = points.coords if isinstance(points, PointCloud) else np.asarray(points, dtype=np.float64)
    if coords.ndim == 1:
        coords = coords[:, None]
    n = len(coords)
    if n < 1:
        raise InvalidDim("rips_persistence needs at least one point")
    rows = [(0.0, np.inf, 0.0)]
    if n == 1:
        return PersistenceDiagram(np.array(rows), 1)

    dist = distance_matrix(coords)
    ei, ej, ev = sorted_edges(dist)
    tree = _kruskal(n, ei, ej)
    deaths0 = ev[tree]
    rows += [(0.0, d, 0.0) for d in deaths0 if d > 0.0]

    if max_dim >= 1 and n >= 3:
        cap = enclosing_radius(dist) if max_filtration is None else float(max_filtration)
        keep = ev <= cap
        ci, cj, cv = ei[keep], ej[keep], ev[keep]
        rank = np.full((n, n), -1, dtype=np.int64)
        rank[ci, cj] = np.arange(len(ci))
        rank[cj, ci] = np.arange(len(ci))
        is_tree = np.zeros(len(ci), dtype=np.bool_)
        is_tree[tree[tree < len(ci)]] = True
        b_rank, d_key = _reduce_h1(n, ci, cj, rank, is_tree)
        for br, dk in zip(b_rank, d_key):
            birth = cv[br]
            death = np.inf if dk < 0 else cv[dk // n]
            if death > birth:
                rows.append((birth, death, 1.0))
    return PersistenceDiagram(np.array(rows), n)


def save_diagram_csv(diagram: PersistenceDiagram, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("birth,death,dim\n")
        for b, d, k in diagram.points:
            death = "inf" if np.isinf(d) else f"{d:.17g}"
            fh.write(f"{b:.17g},{death},{int(k)}\n")


def load_diagram_csv(path) -> PersistenceDiagram:
    rows = np.genfromtxt(path, delimiter=",", skip_header=1, dtype=np.float64).reshape(-1, 3)
    n_source = int(np.sum(rows[:, 2] == 0))
    return PersistenceDiagram(rows, n_source)
