"""
Initial embeddings (random projection, PCA, spectral Laplacian) and the
pairwise distortion statistic.
"""

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .dataset import PointCloud, make_rng
from .errors import (
    AllPairsDegenerate,
    DimensionMismatch,
    DisconnectedGraphWarning,
    EigenFailure,
    InvalidDim,
    InvalidParam,
    SvdFailure,
)
from .knn import KnnGraph, symmetrize

METHODS = ("random", "pca", "spectral", "layout")

# above this feature count PCA switches to the eigendecomposition of the n x n Gram matrix
DENSE_SVD_MAX_DIM = 2000
# dense eigh is used for the Laplacian up to this many points, ARPACK beyond
DENSE_EIGH_MAX_N = 3000


@dataclass(frozen=True)
class Embedding:
    coords: np.ndarray
    method: str
    source_n: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] < 1:
            raise InvalidDim(f"embedding must be an n x m matrix with m >= 1, got shape {coords.shape}")
        if coords.shape[0] != self.source_n:
            raise DimensionMismatch(f"embedding has {coords.shape[0]} rows, source has {self.source_n}")
        if not np.all(np.isfinite(coords)):
            raise InvalidParam("embedding coordinates must be finite")
        if self.method not in METHODS:
            raise InvalidParam(f"unknown embedding method {self.method!r}")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def n(self):
        return self.coords.shape[0]

    @property
    def dim(self):
        return self.coords.shape[1]


@dataclass(frozen=True)
class PcaInfo:
    singular_values: np.ndarray
    epsilon: float
    frobenius_norm: float
    residual_norm: float  # ||X - X_hat||_F of the rank-k truncation


@dataclass(frozen=True)
class DistortionStats:
    mean: float
    min: float
    max: float
    std: float
    n_pairs: int

    def to_dict(self):
        return {"mean": self.mean, "min": self.min, "max": self.max, "std": self.std, "n_pairs": self.n_pairs}


def jl_dimension(n_points, eps, factor=8.0):
    """Target dimension ``ceil(factor * ln(n) / eps^2)`` for a distortion budget ``eps``."""
    return int(np.ceil(factor * np.log(n_points) / eps**2))


def projection_matrix(d, target_dim, seed):
    """d x m matrix with i.i.d. N(0, 1/m) entries."""
    rng = make_rng(seed)
    return rng.standard_normal((d, target_dim)) / np.sqrt(target_dim)


def random_projection(cloud: PointCloud, target_dim: int, seed: int = 0) -> Embedding:
    if not 1 <= target_dim <= cloud.d:
        raise InvalidDim(f"target_dim must lie in [1, {cloud.d}], got {target_dim}")
    proj = projection_matrix(cloud.d, target_dim, seed)
    return Embedding(cloud.coords @ proj, "random", cloud.n, {"target_dim": target_dim, "seed": int(seed)})


def _fix_signs(vectors):
    """Flip each column so its largest-magnitude entry is positive."""
    pivot = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivot, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def pca_embedding(cloud: PointCloud, target_dim: int):
    """
    Project the centered data onto its top ``target_dim`` right singular vectors.

    Returns
    -------
    (Embedding, PcaInfo)
        ``PcaInfo.epsilon`` solves ``sum_{i<=k} s_i^2 = (1 - eps)^2 ||X||_F^2``.
    """
    n, d = cloud.coords.shape
    if not 1 <= target_dim <= min(n, d):
        raise InvalidDim(f"target_dim must lie in [1, {min(n, d)}], got {target_dim}")
    x = cloud.coords - cloud.coords.mean(axis=0)
    try:
        if d <= DENSE_SVD_MAX_DIM:
            _, s, vt = linalg.svd(x, full_matrices=False, lapack_driver="gesdd")
            w = vt.T
        else:
            # Gram side: X X^T = U S^2 U^T, W = X^T U S^-1
            evals, u = linalg.eigh(x @ x.T)
            order = np.argsort(evals)[::-1]
            evals, u = np.clip(evals[order], 0.0, None), u[:, order]
            s = np.sqrt(evals)
            keep = s > s[0] * 1e-12 if s[0] > 0 else np.zeros_like(s, dtype=bool)
            w = np.zeros((d, len(s)))
            w[:, keep] = (x.T @ u[:, keep]) / s[keep]
    except (linalg.LinAlgError, ValueError) as exc:
        raise SvdFailure(str(exc)) from exc
    w_k = _fix_signs(w[:, :target_dim])
    coords = x @ w_k
    fro_sq = float(np.sum(x * x))
    kept = float(np.sum(s[:target_dim] ** 2))
    eps = 0.0 if fro_sq == 0 else 1.0 - np.sqrt(min(kept / fro_sq, 1.0))
    residual = float(np.sqrt(max(fro_sq - kept, 0.0)))
    info = PcaInfo(s.copy(), float(eps), float(np.sqrt(fro_sq)), residual)
    emb = Embedding(coords, "pca", n, {"target_dim": target_dim, "epsilon": float(eps)})
    return emb, info


def pca_reconstruction(cloud: PointCloud, target_dim: int):
    """Rank-k approximation X_hat = U_k S_k W_k^T of the centered data, plus W_k."""
    x = cloud.coords - cloud.coords.mean(axis=0)
    u, s, vt = linalg.svd(x, full_matrices=False)
    k = target_dim
    return (u[:, :k] * s[:k]) @ vt[:k], vt[:k].T, x


def graph_weights(graph: KnnGraph, kernel_bandwidth=None):
    """
    Symmetric sparse affinity matrix of the symmetrized kNN graph.

    ``kernel_bandwidth`` may be ``None`` (unit weights), a positive float, or
    ``"median"`` for the median kNN distance. Returns ``(A, bandwidth_used)``.
    """
    edges = symmetrize(graph).edges
    n = graph.n
    if kernel_bandwidth is None:
        weights = np.ones(len(edges))
        bw = None
    else:
        if kernel_bandwidth == "median":
            bw = float(np.median(graph.distances))
        else:
            bw = float(kernel_bandwidth)
        if not bw > 0:
            raise InvalidParam(f"kernel bandwidth must be positive, got {bw}")
        # an undirected edge may be listed by either endpoint; both carry the same distance
        directed = sparse.csr_matrix(
            (graph.distances.ravel(), (np.repeat(np.arange(n), graph.k), graph.indices.ravel())), shape=(n, n)
        )
        both = directed.maximum(directed.T).tocsr()
        dist = np.asarray(both[edges[:, 0], edges[:, 1]]).ravel()
        weights = np.exp(-(dist**2) / bw**2)
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    vals = np.concatenate([weights, weights])
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n)), bw


def normalized_laplacian(adjacency):
    """Dense or sparse ``I - D^-1/2 A D^-1/2``."""
    deg = np.asarray(adjacency.sum(axis=1)).ravel()
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    d_half = sparse.diags(inv_sqrt)
    return sparse.identity(adjacency.shape[0], format="csr") - d_half @ adjacency @ d_half


def spectral_embedding(cloud: PointCloud, graph: KnnGraph, target_dim: int, kernel_bandwidth=None) -> Embedding:
    """
    Laplacian eigenmap on the symmetrized kNN graph.

    Columns are eigenvectors of the symmetric normalized Laplacian for the
    smallest eigenvalues after the null space. A graph with c components has
    c zero eigenvalues; all of them are skipped, the remaining components are
    embedded jointly and a :class:`DisconnectedGraphWarning` reports c.
    """
    n = cloud.n
    if graph.n != n:
        raise DimensionMismatch(f"graph has {graph.n} vertices, cloud has {n} points")
    adjacency, bw = graph_weights(graph, kernel_bandwidth)
    n_comp, _ = csgraph.connected_components(adjacency, directed=False)
    if not 1 <= target_dim <= n - n_comp:
        raise InvalidDim(f"target_dim must lie in [1, {n - n_comp}] for this graph, got {target_dim}")
    if n_comp > 1:
        warnings.warn(DisconnectedGraphWarning(n_comp), stacklevel=2)
    lap = normalized_laplacian(adjacency)
    n_eig = n_comp + target_dim
    try:
        if n <= DENSE_EIGH_MAX_N:
            evals, evecs = linalg.eigh(lap.toarray(), subset_by_index=[0, n_eig - 1])
        else:
            # shift-invert around a small negative sigma keeps the factorization non-singular
            evals, evecs = eigsh(lap.tocsc(), k=n_eig, sigma=-1e-3, which="LM")
            order = np.argsort(evals)
            evals, evecs = evals[order], evecs[:, order]
    except (linalg.LinAlgError, ArpackNoConvergence, ValueError) as exc:
        raise EigenFailure(str(exc)) from exc
    vecs = _fix_signs(evecs[:, n_comp:n_eig])
    params = {
        "target_dim": target_dim,
        "kernel_bandwidth": bw,
        "n_components": int(n_comp),
        "eigenvalues": [float(v) for v in evals[n_comp:n_eig]],
    }
    return Embedding(vecs, "spectral", n, params)


def distortion_stats(cloud: PointCloud, embedding: Embedding, n_pairs: int = 10000, seed: int = 0) -> DistortionStats:
    """Summary of ``||f(u) - f(v)|| / ||u - v||`` over uniformly sampled distinct pairs.

    Pairs of coincident source points are skipped and replaced by fresh draws.
    """
    n = cloud.n
    if n < 2 or n_pairs < 1:
        raise InvalidParam("distortion needs n >= 2 points and n_pairs >= 1")
    if embedding.n != n:
        raise DimensionMismatch(f"embedding has {embedding.n} rows, cloud has {n}")
    rng = make_rng(seed)
    x, y = cloud.coords, embedding.coords
    ratios = np.empty(0)
    for _ in range(64):
        need = n_pairs - len(ratios)
        if need <= 0:
            break
        i = rng.integers(0, n, size=need)
        j = (i + rng.integers(1, n, size=need)) % n
        src = np.linalg.norm(x[i] - x[j], axis=1)
        ok = src > 0
        dst = np.linalg.norm(y[i[ok]] - y[j[ok]], axis=1)
        ratios = np.concatenate([ratios, dst / src[ok]])
    if len(ratios) < n_pairs:
        raise AllPairsDegenerate("could not sample enough pairs of distinct source points")
    return DistortionStats(
        float(ratios.mean()), float(ratios.min()), float(ratios.max()), float(ratios.std()), int(n_pairs)
    )


def save_embedding(embedding: Embedding, path, extra=None) -> None:
    """CSV of coordinates (17 significant digits) plus a ``.json`` sidecar with method and params."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(f"y{j}" for j in range(embedding.dim)) + "\n")
        for row in embedding.coords:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    sidecar = {"method": embedding.method, "source_n": embedding.source_n, "params": embedding.params}
    if extra:
        sidecar.update(extra)
    with open(path.with_suffix(".json"), "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def pca_info_dict(info: PcaInfo):
    return {
        "singular_values": [float(s) for s in info.singular_values],
        "epsilon": info.epsilon,
        "frobenius_norm": info.frobenius_norm,
        "residual_norm": info.residual_norm,
    }


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
