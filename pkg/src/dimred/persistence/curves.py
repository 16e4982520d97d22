"""Betti curves and the DTW, TWED and rescaled EMD distances between them."""

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import EmptyDiagramWarning, InvalidParam, ZeroMassCurve
from .rips import PersistenceDiagram


@dataclass(frozen=True)
class BettiCurve:
    grid: np.ndarray
    values: np.ndarray
    dim: int
    empty: bool = False

    def __post_init__(self):
        grid = np.array(self.grid, dtype=np.float64)
        values = np.array(self.values, dtype=np.float64)
        if grid.ndim != 1 or grid.shape != values.shape or len(grid) == 0:
            raise InvalidParam("grid and values must be equal-length non-empty 1-D arrays")
        if np.any(np.diff(grid) <= 0):
            raise InvalidParam("grid must be strictly ascending")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)


def default_t_max(diagram: PersistenceDiagram, dim: int) -> float:
    bars = diagram.bars(dim)
    finite = bars[np.isfinite(bars[:, 1]), 1]
    if len(finite):
        top = finite.max()
    elif len(bars):
        top = bars[:, 0].max()
    else:
        top = 0.0
    return 1.05 * top if top > 0 else 1.0


def betti_curve(diagram: PersistenceDiagram, dim: int, n_grid: int = 200, t_max=None) -> BettiCurve:
    """Number of bars alive (birth <= t < death) on a uniform grid over [0, t_max]."""
    if n_grid < 2:
        raise InvalidParam("n_grid must be >= 2")
    if t_max is None:
        t_max = default_t_max(diagram, dim)
    if not t_max > 0:
        raise InvalidParam("t_max must be positive")
    grid = np.linspace(0.0, t_max, n_grid)
    bars = diagram.bars(dim)
    if len(bars) == 0:
        warnings.warn(EmptyDiagramWarning(f"no bars in dimension {dim}; curve is identically zero"), stacklevel=2)
        return BettiCurve(grid, np.zeros(n_grid), dim, empty=True)
    alive = (bars[None, :, 0] <= grid[:, None]) & (grid[:, None] < bars[None, :, 1])
    return BettiCurve(grid, alive.sum(axis=1), dim)


@njit(cache=True)
def _dtw(x, y):
    n, m = len(x), len(y)
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            best = min(acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1])
            acc[i, j] = abs(x[i - 1] - y[j - 1]) + best
    return acc[n, m]


def _values(curve):
    return curve.values if isinstance(curve, BettiCurve) else np.asarray(curve, dtype=np.float64)


def dtw_distance(c1, c2) -> float:
    """Dynamic time warping with |.| local cost; both endpoints are anchored."""
    x, y = _values(c1), _values(c2)
    if len(x) == 0 or len(y) == 0:
        raise InvalidParam("DTW needs non-empty curves")
    return float(_dtw(np.ascontiguousarray(x, dtype=np.float64), np.ascontiguousarray(y, dtype=np.float64)))


@njit(cache=True)
def _twed(a, ta, b, tb, nu, lam):
    n, m = len(a), len(b)
    # sequences are padded with a (t=0, v=0) sample in front
    pa = np.zeros(n + 1)
    pta = np.zeros(n + 1)
    pb = np.zeros(m + 1)
    ptb = np.zeros(m + 1)
    pa[1:] = a
    pta[1:] = ta
    pb[1:] = b
    ptb[1:] = tb
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            del_a = acc[i - 1, j] + abs(pa[i] - pa[i - 1]) + nu * abs(pta[i] - pta[i - 1]) + lam
            del_b = acc[i, j - 1] + abs(pb[j] - pb[j - 1]) + nu * abs(ptb[j] - ptb[j - 1]) + lam
            match = (
                acc[i - 1, j - 1]
                + abs(pa[i] - pb[j])
                + abs(pa[i - 1] - pb[j - 1])
                + nu * (abs(pta[i] - ptb[j]) + abs(pta[i - 1] - ptb[j - 1]))
            )
            acc[i, j] = min(del_a, del_b, match)
    return acc[n, m]


def twed_distance(c1: BettiCurve, c2: BettiCurve, stiffness: float = 1.0, penalty: float = 0.0) -> float:
    """Time Warp Edit Distance over (timestamp, value) samples.

    ``stiffness`` weighs timestamp differences, ``penalty`` is charged per deletion.
    """
    if stiffness < 0 or penalty < 0:
        raise InvalidParam("stiffness and penalty must be non-negative")
    if len(c1.values) == 0 or len(c2.values) == 0:
        raise InvalidParam("TWED needs non-empty curves")
    return float(_twed(c1.values, c1.grid, c2.values, c2.grid, float(stiffness), float(penalty)))


def _cell_widths(grid):
    if len(grid) == 1:
        return np.ones(1)
    step = np.diff(grid)
    return np.append(step, step[-1])


def curve_mass(curve: BettiCurve) -> float:
    return float(np.sum(curve.values * _cell_widths(curve.grid)))


def emd_rescaled(c_high: BettiCurve, c_low: BettiCurve) -> float:
    """
    1-D earth mover's distance between unit-mass versions of two curves,
    multiplied by ``max(tau, 1/tau)`` where ``tau = mass(c_high) / mass(c_low)``.

    Each curve is read as point masses ``value * cell_width`` at its grid
    points; the transport cost is the L1 distance between the two CDFs over
    the union grid.
    """
    m_high, m_low = curve_mass(c_high), curve_mass(c_low)
    if not (m_high > 0 and m_low > 0):
        raise ZeroMassCurve(f"curve masses must be positive, got {m_high} and {m_low}")
    tau = m_high / m_low
    p = c_high.values * _cell_widths(c_high.grid) / m_high
    q = c_low.values * _cell_widths(c_low.grid) / m_low
    union = np.union1d(c_high.grid, c_low.grid)
    cdf_p = np.concatenate([[0.0], np.cumsum(p)])[np.searchsorted(c_high.grid, union, side="right")]
    cdf_q = np.concatenate([[0.0], np.cumsum(q)])[np.searchsorted(c_low.grid, union, side="right")]
    emd = float(np.sum(np.abs(cdf_p - cdf_q)[:-1] * np.diff(union)))
    return max(tau, 1.0 / tau) * emd
