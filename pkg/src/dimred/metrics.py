"""
Local structure metrics (edge stress, neighborhood preservation) and
context loss measured by linear-SVM and kNN classifier accuracy.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from numba import njit

from .dataset import PointCloud, make_rng
from .errors import DimensionMismatch, InvalidParam, KTooLarge, SingleClass, UnlabeledData
from .knn import KnnGraph, build_knn, nearest_neighbors, symmetrize

STRESS_DENOM_FLOOR = 1e-12
# per-edge stresses below this are rounding noise of an exact similarity and count as zero
STRESS_ZERO = 1e-12


def _coords(obj):
    return obj.coords if hasattr(obj, "coords") else np.asarray(obj, dtype=np.float64)


@dataclass
class StressReport:
    sigma: float
    mean: float
    std: float
    max: float
    n_edges: int
    n_clamped: int

    def to_dict(self):
        return asdict(self)


@dataclass
class NeighborhoodReport:
    mean: float
    std: float
    k: int

    def to_dict(self):
        return asdict(self)


@dataclass
class ContextReport:
    alpha_x_svm: float
    alpha_y_svm: float
    alpha_x_knn: float
    alpha_y_knn: float
    kappa_svm: float
    kappa_knn: float
    split_seed: int
    test_fraction: float
    k: int
    clamped: bool = False

    def to_dict(self):
        return asdict(self)


def edge_stresses(cloud, embedding, graph: KnnGraph):
    """Per-edge ``|1 - ||x - y|| / ||f(x) - f(y)|| |`` over the symmetrized graph, and the clamp count."""
    x, y = _coords(cloud), _coords(embedding)
    if len(x) != len(y) or graph.n != len(x):
        raise DimensionMismatch(f"cloud ({len(x)}), embedding ({len(y)}) and graph ({graph.n}) sizes differ")
    e = symmetrize(graph).edges
    hi = np.linalg.norm(x[e[:, 0]] - x[e[:, 1]], axis=1)
    lo = np.linalg.norm(y[e[:, 0]] - y[e[:, 1]], axis=1)
    clamped = lo < STRESS_DENOM_FLOOR
    lam = np.abs(1.0 - hi / np.maximum(lo, STRESS_DENOM_FLOOR))
    lam[lam < STRESS_ZERO] = 0.0
    return lam, int(clamped.sum())


def embedding_stress(cloud, embedding, graph: KnnGraph) -> StressReport:
    """Coefficient of variation of the edge stresses; 0 when every stress is 0."""
    lam, n_clamped = edge_stresses(cloud, embedding, graph)
    mean = float(lam.mean())
    std = float(lam.std())
    sigma = std / mean if mean > 0 else 0.0
    return StressReport(sigma, mean, std, float(lam.max()), len(lam), n_clamped)


def neighborhood_preservation(cloud, embedding, k: int) -> NeighborhoodReport:
    """Mean and std over points of ``|N_X(x) & N_Y(f(x))| / k``."""
    x, y = _coords(cloud), _coords(embedding)
    n = len(x)
    if len(y) != n:
        raise DimensionMismatch(f"cloud has {n} rows, embedding has {len(y)}")
    if not 1 <= k <= n - 1:
        raise KTooLarge(f"k must lie in [1, {n - 1}], got {k}")
    gx = build_knn(PointCloud(x), k).indices
    gy = build_knn(PointCloud(y), k).indices
    # overlap of two sorted index sets per row
    sx = np.sort(gx, axis=1)
    sy = np.sort(gy, axis=1)
    overlap = np.array([np.intersect1d(a, b, assume_unique=True).size for a, b in zip(sx, sy)])
    scores = overlap / k
    return NeighborhoodReport(float(scores.mean()), float(scores.std()), k)


def stratified_split(labels, test_fraction=0.3, seed=0):
    """Per-class shuffled split; each class with 2+ members keeps at least one point on each side."""
    labels = np.asarray(labels)
    if not 0 < test_fraction < 1:
        raise InvalidParam("test_fraction must lie in (0, 1)")
    rng = make_rng(seed)
    train, test = [], []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(len(members))]
        n_test = int(round(test_fraction * len(members)))
        if len(members) >= 2:
            n_test = min(max(n_test, 1), len(members) - 1)
        else:
            n_test = 0
        test.append(members[:n_test])
        train.append(members[n_test:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


@njit(cache=True)
def _pegasos_ovr(x, target, orders, reg):
    """Binary Pegasos updates for every class column of ``target`` (+1/-1)."""
    n_cls = target.shape[1]
    d = x.shape[1]
    radius = 1.0 / np.sqrt(reg)
    weights = np.zeros((n_cls, d))
    for c in range(n_cls):
        w = np.zeros(d)
        t = 0
        for e in range(orders.shape[0]):
            for i in orders[e]:
                t += 1
                eta = 1.0 / (reg * t)
                margin = target[i, c] * np.dot(w, x[i])
                w *= 1.0 - eta * reg
                if margin < 1.0:
                    w += eta * target[i, c] * x[i]
                norm = np.sqrt(np.dot(w, w))
                if norm > radius:
                    w *= radius / norm
        weights[c] = w
    return weights


@njit(cache=True)
def _pegasos_multiclass(x, y, n_cls, orders, reg):
    """Pegasos updates for the joint multiclass hinge ``max_c (1[c != y] + w_c.x) - w_y.x``."""
    d = x.shape[1]
    radius = 1.0 / np.sqrt(reg)
    w = np.zeros((n_cls, d))
    t = 0
    for e in range(orders.shape[0]):
        for i in orders[e]:
            t += 1
            eta = 1.0 / (reg * t)
            scores = w @ x[i]
            yi = y[i]
            worst = -1
            best = scores[yi]
            for c in range(n_cls):
                if c != yi and scores[c] + 1.0 > best:
                    best = scores[c] + 1.0
                    worst = c
            w *= 1.0 - eta * reg
            if worst >= 0:
                w[yi] += eta * x[i]
                w[worst] -= eta * x[i]
            norm = np.sqrt(np.sum(w * w))
            if norm > radius:
                w *= radius / norm
    return w


SVM_MODES = ("multiclass", "ovr")


def train_linear_svm(data, labels, train_idx, test_idx, reg=1e-4, epochs=50, seed=0, mode="multiclass"):
    """
    Accuracy on ``test_idx`` of a linear SVM fitted on ``train_idx``.

    Training is Pegasos-style stochastic subgradient descent on the
    L2-regularized hinge loss, with a constant feature for the bias and
    features standardized on the training split. The prediction is the class
    with the largest linear score; ties go to the smallest class label.

    Parameters
    ----------
    mode : {"multiclass", "ovr"}
        ``"multiclass"`` minimizes the joint multiclass hinge loss (one weight
        vector per class, trained together). ``"ovr"`` trains one binary
        classifier per class against the rest. The two agree for two classes
        up to optimization noise; for many classes in low dimension the joint
        loss can carve out classes that no single line separates from the rest.
    """
    if mode not in SVM_MODES:
        raise InvalidParam(f"mode must be one of {SVM_MODES}, got {mode!r}")
    data = _coords(data)
    labels = np.asarray(labels)
    train_idx = np.asarray(train_idx)
    test_idx = np.asarray(test_idx)
    classes = np.unique(labels[train_idx])
    if len(classes) < 2:
        raise SingleClass("the training split holds a single class")
    if reg <= 0 or epochs < 1:
        raise InvalidParam("reg must be positive and epochs >= 1")
    mu = data[train_idx].mean(axis=0)
    sd = data[train_idx].std(axis=0)
    sd[sd == 0] = 1.0

    def features(idx):
        z = (data[idx] - mu) / sd
        return np.hstack([z, np.ones((len(idx), 1))])

    xtr, xte = features(train_idx), features(test_idx)
    ytr = np.searchsorted(classes, labels[train_idx])
    rng = make_rng(seed)
    orders = np.array([rng.permutation(len(train_idx)) for _ in range(epochs)], dtype=np.int64)
    if mode == "ovr":
        target = np.where(ytr[:, None] == np.arange(len(classes))[None, :], 1.0, -1.0)
        weights = _pegasos_ovr(xtr, target, orders, float(reg))
    else:
        weights = _pegasos_multiclass(xtr, ytr.astype(np.int64), len(classes), orders, float(reg))
    pred = classes[np.argmax(xte @ weights.T, axis=1)]
    return float(np.mean(pred == labels[test_idx]))


def knn_predict(data, labels, k, train_idx, test_idx):
    data = _coords(data)
    labels = np.asarray(labels)
    train_idx = np.asarray(train_idx)
    test_idx = np.asarray(test_idx)
    if not 1 <= k <= len(train_idx):
        raise KTooLarge(f"k must lie in [1, {len(train_idx)}], got {k}")
    nbr, _ = nearest_neighbors(data[test_idx], data[train_idx], k)
    votes = labels[train_idx][nbr]
    n_cls = int(labels.max()) + 1
    counts = np.zeros((len(test_idx), n_cls), dtype=np.int64)
    np.add.at(counts, (np.repeat(np.arange(len(test_idx)), k), votes.ravel()), 1)
    # argmax returns the first maximum, i.e. the smallest tied label
    return np.argmax(counts, axis=1)


def knn_classifier_accuracy(data, labels, k, train_idx, test_idx) -> float:
    """Exact majority-vote kNN accuracy; neighbour ties by smaller index, vote ties by smaller label."""
    pred = knn_predict(data, labels, k, train_idx, test_idx)
    return float(np.mean(pred == np.asarray(labels)[np.asarray(test_idx)]))


def kappa_svm(alpha_x, alpha_y):
    return math.log(min(alpha_x / alpha_y, alpha_y / alpha_x))


def kappa_knn(alpha_x, alpha_y):
    return math.log(alpha_y / alpha_x)


def context_loss(
    x, y, test_fraction=0.3, k=10, seed=0, labels=None, reg=1e-4, epochs=50, svm_mode="multiclass"
) -> ContextReport:
    """
    SVM and kNN context loss between labeled data and its embedding.

    One stratified split (drawn from ``seed``) is shared by both spaces and
    both classifiers. Zero accuracies are clamped to ``1 / (2 |test|)``
    before taking logs, and ``clamped`` is set.
    """
    if labels is None:
        labels = getattr(x, "labels", None)
    if labels is None:
        raise UnlabeledData("context loss needs labeled data")
    labels = np.asarray(labels)
    xc, yc = _coords(x), _coords(y)
    if len(xc) != len(yc) or len(labels) != len(xc):
        raise DimensionMismatch("data, embedding and labels must have the same number of rows")
    train, test = stratified_split(labels, test_fraction, seed)
    if len(test) == 0:
        raise InvalidParam("the split left no test points")
    acc = {
        "svm_x": train_linear_svm(xc, labels, train, test, reg, epochs, seed, svm_mode),
        "svm_y": train_linear_svm(yc, labels, train, test, reg, epochs, seed, svm_mode),
        "knn_x": knn_classifier_accuracy(xc, labels, k, train, test),
        "knn_y": knn_classifier_accuracy(yc, labels, k, train, test),
    }
    floor = 1.0 / (2 * len(test))
    clamped = any(v == 0.0 for v in acc.values())
    acc = {key: max(v, floor) for key, v in acc.items()}
    return ContextReport(
        alpha_x_svm=acc["svm_x"],
        alpha_y_svm=acc["svm_y"],
        alpha_x_knn=acc["knn_x"],
        alpha_y_knn=acc["knn_y"],
        kappa_svm=kappa_svm(acc["svm_x"], acc["svm_y"]),
        kappa_knn=kappa_knn(acc["knn_x"], acc["knn_y"]),
        split_seed=int(seed),
        test_fraction=float(test_fraction),
        k=int(k),
        clamped=clamped,
    )
