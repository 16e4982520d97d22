"""
Kernel fitting and the attraction/repulsion force layout.

The layout kernel is ``phi(r) = 1 / (1 + a r^(2b))``. Graph neighbours pull
on each other with magnitude ``phi(1/r)`` and sampled non-neighbours push
apart with magnitude ``phi(r)``. Forces are evaluated from the positions at
the start of each iteration and applied together, so the result does not
depend on point order or thread count.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import curve_fit

from .dataset import make_rng
from .embedding import Embedding, save_embedding
from .errors import DimensionMismatch, FitDiverged, InvalidParam
from .knn import EdgeSet

DIST_FLOOR = 1e-8
FIT_SAMPLES = 300
FIT_RMS_LIMIT = 0.2
INIT_SCALE = 10.0  # initial RMS point norm, in units of min_dist


@dataclass(frozen=True)
class KernelParams:
    a: float
    b: float
    min_dist: float
    spread: float
    rms: float = 0.0


@dataclass(frozen=True)
class LayoutParams:
    n_iters: int = 128
    learning_rate_initial: float = 1.0
    neg_samples_per_point: int = 5
    kernel: KernelParams = field(default_factory=lambda: fit_kernel(0.1, 1.0))
    seed: int = 0
    exact_repulsion: bool = False
    rescale_init: bool = True

    def __post_init__(self):
        if self.n_iters < 0:
            raise InvalidParam("n_iters must be >= 0")
        if self.neg_samples_per_point < 1:
            raise InvalidParam("neg_samples_per_point must be >= 1")
        if not self.learning_rate_initial > 0:
            raise InvalidParam("learning_rate_initial must be positive")


def _phi(r, a, b):
    return 1.0 / (1.0 + a * np.power(r, 2.0 * b))


def kernel_target(r, min_dist, spread):
    """Flat at 1 inside the ``min_dist`` ball, exponential decay with scale ``spread`` outside."""
    r = np.asarray(r, dtype=np.float64)
    return np.where(r <= min_dist, 1.0, np.exp(-(r - min_dist) / spread))


def fit_kernel(min_dist: float, spread: float) -> KernelParams:
    """Least-squares fit of (a, b) to the target curve on 300 points of (0, 3 (min_dist + spread)]."""
    if not (min_dist > 0 and spread > 0):
        raise InvalidParam(f"min_dist and spread must be positive, got {min_dist}, {spread}")
    hi = 3.0 * (min_dist + spread)
    r = np.linspace(hi / FIT_SAMPLES, hi, FIT_SAMPLES)
    target = kernel_target(r, min_dist, spread)
    try:
        (a, b), _ = curve_fit(_phi, r, target, p0=(1.0, 1.0), bounds=([1e-12, 0.5], [np.inf, 64.0]), maxfev=20000)
    except RuntimeError as exc:
        raise FitDiverged(str(exc)) from exc
    rms = float(np.sqrt(np.mean((_phi(r, a, b) - target) ** 2)))
    if not np.isfinite(rms) or rms >= FIT_RMS_LIMIT:
        raise FitDiverged(f"kernel fit residual RMS {rms:.3g} for min_dist={min_dist}, spread={spread}")
    return KernelParams(float(a), float(b), float(min_dist), float(spread), rms)


def kernel_eval(params: KernelParams, r):
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0):
        raise InvalidParam("kernel_eval needs r >= 0")
    out = _phi(r, params.a, params.b)
    return float(out) if out.ndim == 0 else out


def _attraction(r, a, b):
    # phi(1/r) rewritten as r^2b / (r^2b + a) to stay finite for tiny r
    p = np.power(r, 2.0 * b)
    return p / (p + a)


def _unit(diff, r, src, dst):
    """Unit vectors along ``diff``; coincident pairs get a fixed axis direction signed by index order."""
    out = np.zeros_like(diff)
    far = r > DIST_FLOOR
    out[far] = diff[far] / r[far, None]
    near = ~far
    if near.any():
        out[near, 0] = np.sign(dst[near] - src[near])
    return out


def _accumulate(n, src, vec):
    # bincount returns integers for empty input, hence the explicit dtype
    cols = [np.bincount(src, weights=vec[:, j], minlength=n) for j in range(vec.shape[1])]
    return np.column_stack(cols).astype(np.float64, copy=False)


def _negative_samples(rng, n, count, edge_keys, rounds=4):
    """``count`` uniform non-neighbour draws per point; draws that stay neighbours after ``rounds`` are dropped."""
    src = np.repeat(np.arange(n, dtype=np.int64), count)
    dst = (src + rng.integers(1, n, size=src.size)) % n
    if len(edge_keys) == 0:
        return src, dst
    for attempt in range(rounds + 1):
        keys = src * n + dst
        pos = np.searchsorted(edge_keys, keys)
        hit = (pos < len(edge_keys)) & (edge_keys[np.minimum(pos, len(edge_keys) - 1)] == keys)
        if not hit.any():
            break
        if attempt == rounds:
            src, dst = src[~hit], dst[~hit]
            break
        dst[hit] = (src[hit] + rng.integers(1, n, size=int(hit.sum()))) % n
    return src, dst


def layout_forces(y, att_src, att_dst, rep_src, rep_dst, kernel):
    """Net force on every point: pulls along graph edges plus pushes from the given repulsion pairs."""
    n = len(y)
    a, b = kernel.a, kernel.b
    diff = y[att_dst] - y[att_src]
    r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    mag = _attraction(np.maximum(r, DIST_FLOOR), a, b)
    force = _accumulate(n, att_src, mag[:, None] * _unit(diff, r, att_src, att_dst))
    if len(rep_src):
        diff = y[rep_dst] - y[rep_src]
        r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        mag = _phi(np.maximum(r, DIST_FLOOR), a, b)
        force -= _accumulate(n, rep_src, mag[:, None] * _unit(diff, r, rep_src, rep_dst))
    return force


def do_layout(init: Embedding, edges: EdgeSet, params: LayoutParams, trajectory_dir=None, checkpoint_every=0):
    """
    Run ``params.n_iters`` synchronous force iterations starting from ``init``.

    The learning rate decays linearly from ``learning_rate_initial`` to 0. With
    ``rescale_init`` the start is scaled about its centroid to an RMS point
    norm of ``10 * min_dist``; the centroid itself is kept, so the layout is
    translation-equivariant. ``exact_repulsion`` replaces negative sampling
    by all non-neighbour pairs (meant for small n).
    """
    n = init.n
    if edges.n != n:
        raise DimensionMismatch(f"edge set covers {edges.n} points, embedding has {n}")
    base = {"n_iters": params.n_iters, "seed": int(params.seed), "a": params.kernel.a, "b": params.kernel.b}
    if params.n_iters == 0:
        return Embedding(init.coords, "layout", n, base)

    centroid = init.coords.mean(axis=0)
    y = init.coords - centroid
    scale = 1.0
    if params.rescale_init:
        rms = np.sqrt(np.mean(np.einsum("ij,ij->i", y, y)))
        if rms > 0:
            scale = INIT_SCALE * params.kernel.min_dist / rms
            y = y * scale

    e = edges.edges
    att_src = np.concatenate([e[:, 0], e[:, 1]])
    att_dst = np.concatenate([e[:, 1], e[:, 0]])
    edge_keys = np.sort(att_src * n + att_dst)
    if params.exact_repulsion:
        ii, jj = np.nonzero(~np.eye(n, dtype=bool))
        keep = np.isin(ii * n + jj, edge_keys, invert=True)
        all_rep = (ii[keep].astype(np.int64), jj[keep].astype(np.int64))

    rng = make_rng(params.seed)
    if trajectory_dir is not None:
        trajectory_dir = Path(trajectory_dir)
        trajectory_dir.mkdir(parents=True, exist_ok=True)
    for it in range(params.n_iters):
        lr = params.learning_rate_initial * (1.0 - it / params.n_iters)
        if params.exact_repulsion:
            rep_src, rep_dst = all_rep
        elif n > 1:
            rep_src, rep_dst = _negative_samples(rng, n, params.neg_samples_per_point, edge_keys)
        else:
            rep_src = rep_dst = np.empty(0, dtype=np.int64)
        y = y + lr * layout_forces(y, att_src, att_dst, rep_src, rep_dst, params.kernel)
        if trajectory_dir is not None and checkpoint_every and (it + 1) % checkpoint_every == 0:
            snap = Embedding(y + centroid, "layout", n, {"iteration": it + 1})
            save_embedding(snap, trajectory_dir / f"iter_{it + 1:05d}.csv")

    out = dict(base, init_scale=float(scale), learning_rate_initial=params.learning_rate_initial,
               neg_samples_per_point=params.neg_samples_per_point, exact_repulsion=params.exact_repulsion)
    return Embedding(y + centroid, "layout", n, out)
