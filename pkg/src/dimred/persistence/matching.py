"""
Bottleneck and order-1 Wasserstein distances between persistence diagrams.

Both use the L-infinity ground metric and allow any point to be matched to
its projection on the diagonal, at cost half its persistence. Essential
(infinite) bars are matched separately by sorted birth time; diagrams with
different numbers of essential bars are infinitely far apart.
"""

import warnings

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from ..errors import InfiniteMismatchWarning
from .rips import PersistenceDiagram


def _split(diagram, dim):
    if isinstance(diagram, PersistenceDiagram):
        bars = diagram.bars(dim)
    else:
        bars = np.asarray(diagram, dtype=np.float64).reshape(-1, 2)
    inf = ~np.isfinite(bars[:, 1])
    return bars[~inf], np.sort(bars[inf, 0])


def _canonical_pair(d1, d2, dim):
    """Split both diagrams and order the pair canonically, so d(a, b) and d(b, a) run the same computation."""
    a, e1 = _split(d1, dim)
    b, e2 = _split(d2, dim)
    a = a[np.lexsort((a[:, 1], a[:, 0]))]
    b = b[np.lexsort((b[:, 1], b[:, 0]))]
    if (len(a), a.tobytes()) > (len(b), b.tobytes()):
        a, b, e1, e2 = b, a, e2, e1
    return a, e1, b, e2


def _essential_costs(e1, e2):
    if len(e1) != len(e2):
        warnings.warn(
            InfiniteMismatchWarning(f"{len(e1)} vs {len(e2)} essential bars; distance is infinite"), stacklevel=3
        )
        return None
    return np.abs(e1 - e2)


def _linf(a, b):
    return np.maximum(np.abs(a[:, None, 0] - b[None, :, 0]), np.abs(a[:, None, 1] - b[None, :, 1]))


def _has_perfect_matching(cross, diag_a, diag_b, eps):
    """Perfect matching of A + diag(B) against B + diag(A) using only edges of cost <= eps."""
    m, k = cross.shape
    size = m + k
    adj = np.zeros((size, size), dtype=bool)
    adj[:m, :k] = cross <= eps
    adj[np.arange(m), k + np.arange(m)] = diag_a <= eps
    adj[m + np.arange(k), np.arange(k)] = diag_b <= eps
    adj[m:, k:] = True
    match = maximum_bipartite_matching(csr_matrix(adj), perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck_finite(a, b):
    """Exact bottleneck distance between two finite (m, 2) / (k, 2) arrays of bars."""
    m, k = len(a), len(b)
    if m == 0 and k == 0:
        return 0.0
    diag_a = (a[:, 1] - a[:, 0]) / 2.0
    diag_b = (b[:, 1] - b[:, 0]) / 2.0
    cross = _linf(a, b)
    candidates = np.unique(np.concatenate([cross.ravel(), diag_a, diag_b, [0.0]]))
    lo, hi = 0, len(candidates) - 1
    # the largest candidate always admits a matching: everything can go to the diagonal
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(cross, diag_a, diag_b, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def wasserstein_finite(a, b):
    """Exact order-1 Wasserstein distance between finite bar arrays (Hungarian assignment)."""
    m, k = len(a), len(b)
    if m == 0 and k == 0:
        return 0.0
    diag_a = (a[:, 1] - a[:, 0]) / 2.0
    diag_b = (b[:, 1] - b[:, 0]) / 2.0
    cost = np.full((m + k, k + m), np.inf)
    cost[:m, :k] = _linf(a, b)
    cost[np.arange(m), k + np.arange(m)] = diag_a
    cost[m + np.arange(k), np.arange(k)] = diag_b
    cost[m:, k:] = 0.0
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum())


def bottleneck_distance(d1, d2, dim=0) -> float:
    a, e1, b, e2 = _canonical_pair(d1, d2, dim)
    ess = _essential_costs(e1, e2)
    if ess is None:
        return float("inf")
    return max(bottleneck_finite(a, b), float(ess.max()) if len(ess) else 0.0)


def wasserstein_distance(d1, d2, dim=0) -> float:
    a, e1, b, e2 = _canonical_pair(d1, d2, dim)
    ess = _essential_costs(e1, e2)
    if ess is None:
        return float("inf")
    return wasserstein_finite(a, b) + float(ess.sum())
