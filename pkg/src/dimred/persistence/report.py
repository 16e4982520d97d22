"""Persistence-based comparison of a cloud and its embedding on a shared random subsample."""

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from ..dataset import PointCloud, make_rng
from ..errors import DimensionMismatch, EmptyDiagramWarning, SubsampleTooSmall, ZeroMassCurve
from .curves import betti_curve, default_t_max, dtw_distance, emd_rescaled, twed_distance
from .matching import bottleneck_distance, wasserstein_distance
from .rips import rips_persistence

MIN_SUBSAMPLE = 8


@dataclass
class DimReport:
    bottleneck: float
    wasserstein: float
    dtw: float
    twed: float
    emd: float


@dataclass
class GlobalReport:
    dims: dict  # homology dimension -> DimReport
    subsample_size: int
    seed: int
    flags: list = field(default_factory=list)

    def to_dict(self):
        """JSON-ready mapping; non-finite values become ``None`` and are listed in ``flags``."""
        out = {"subsample_size": self.subsample_size, "seed": self.seed, "flags": list(self.flags)}
        for k, rep in sorted(self.dims.items()):
            out[f"dim{k}"] = {
                name: (val if val is not None and math.isfinite(val) else None) for name, val in asdict(rep).items()
            }
        return out


def _coords(obj):
    return obj.coords if hasattr(obj, "coords") else np.asarray(obj, dtype=np.float64)


def global_structure_report(x, y, subsample=512, n_grid=200, seed=0, twed_stiffness=1.0, twed_penalty=0.0):
    """
    Compare dimension-0 and dimension-1 persistence of ``x`` and its embedding ``y``.

    The same uniformly drawn subsample indexes both clouds. Every distance
    (bottleneck, Wasserstein, and DTW/TWED/EMD between Betti curves on a
    shared grid) is divided by the subsample size.
    """
    xc, yc = _coords(x), _coords(y)
    n = len(xc)
    if len(yc) != n:
        raise DimensionMismatch(f"cloud has {n} rows, embedding has {len(yc)}")
    subsample = min(int(subsample), n)
    if subsample < MIN_SUBSAMPLE:
        raise SubsampleTooSmall(f"subsample must be at least {MIN_SUBSAMPLE}, got {subsample}")
    rng = make_rng(seed)
    idx = np.sort(rng.choice(n, size=subsample, replace=False))
    dx = rips_persistence(xc[idx], max_dim=1)
    dy = rips_persistence(yc[idx], max_dim=1)

    flags = []
    dims = {}
    for k in (0, 1):
        t_max = max(default_t_max(dx, k), default_t_max(dy, k))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EmptyDiagramWarning)
            cx = betti_curve(dx, k, n_grid, t_max)
            cy = betti_curve(dy, k, n_grid, t_max)
        b = bottleneck_distance(dx, dy, k)
        w = wasserstein_distance(dx, dy, k)
        if not math.isfinite(b):
            flags.append(f"dim{k}: essential bar counts differ")
        try:
            emd = emd_rescaled(cx, cy)
        except ZeroMassCurve:
            if cx.empty and cy.empty:
                emd = 0.0
            else:
                emd = None
                flags.append(f"dim{k}: one Betti curve has zero mass, EMD undefined")
        dims[k] = DimReport(
            bottleneck=b / subsample,
            wasserstein=w / subsample,
            dtw=dtw_distance(cx, cy) / subsample,
            twed=twed_distance(cx, cy, twed_stiffness, twed_penalty) / subsample,
            emd=None if emd is None else emd / subsample,
        )
    return GlobalReport(dims, subsample, int(seed), flags)


def diagrams_for(x, y, subsample, seed):
    """Diagrams of the subsampled clouds, using the same draw as :func:`global_structure_report`."""
    xc, yc = _coords(x), _coords(y)
    rng = make_rng(seed)
    idx = np.sort(rng.choice(len(xc), size=min(int(subsample), len(xc)), replace=False))
    return rips_persistence(xc[idx]), rips_persistence(yc[idx]), idx
