"""
Point clouds: CSV ingestion, standardization and synthetic benchmark generators.

Every generator is a pure function of its arguments and a 64-bit seed, so the
same call always returns bitwise-identical coordinates.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import EmptyDataset, InvalidParam, MissingFile, NonFiniteValue, ParseError

MAX_SEED = 2**64 - 1


def make_rng(seed: int) -> np.random.Generator:
    """Return a numpy Generator for a 64-bit unsigned seed."""
    seed = int(seed)
    if seed < 0 or seed > MAX_SEED:
        raise InvalidParam(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.default_rng(seed)


def _frozen(array, dtype):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PointCloud:
    """An n x d matrix of finite coordinates with optional integer labels."""

    coords: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[0] < 1 or coords.shape[1] < 1:
            raise EmptyDataset(f"point cloud needs n >= 1 rows and d >= 1 columns, got shape {coords.shape}")
        bad = np.argwhere(~np.isfinite(coords))
        if len(bad):
            raise NonFiniteValue(int(bad[0][0]), int(bad[0][1]))
        object.__setattr__(self, "coords", _frozen(coords, np.float64))
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (coords.shape[0],):
                raise InvalidParam(f"labels must have length {coords.shape[0]}, got shape {labels.shape}")
            if labels.size and (not np.issubdtype(labels.dtype, np.integer) or labels.min() < 0):
                raise InvalidParam("labels must be non-negative integers")
            object.__setattr__(self, "labels", _frozen(labels, np.int64))

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def subset(self, idx) -> "PointCloud":
        labels = None if self.labels is None else self.labels[idx]
        return PointCloud(self.coords[idx], labels, self.name)


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path, label_column=None, delimiter=",") -> PointCloud:
    """
    Read a point cloud from a delimited text file.

    A header row is detected when the first row holds any non-numeric cell.
    ``label_column`` names a header column (or gives a 0-based column index
    when the file has no header); that column is parsed as integers and kept
    out of the coordinates. Row and column numbers in errors are 0-based and
    count data rows only.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh, delimiter=delimiter) if row and any(c.strip() for c in row)]
    if not rows:
        raise EmptyDataset(f"{path} holds no rows")

    header = None
    if not all(_is_number(c.strip()) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise EmptyDataset(f"{path} holds a header but no data rows")

    label_idx = None
    if label_column is not None:
        if header is not None and str(label_column) in header:
            label_idx = header.index(str(label_column))
        elif str(label_column).isdigit():
            label_idx = int(label_column)
        else:
            raise InvalidParam(f"label column {label_column!r} not found in header {header}")

    width = len(rows[0])
    coords, labels = [], []
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(r, min(len(row), width), delimiter.join(row))
        values = []
        for c, cell in enumerate(row):
            cell = cell.strip()
            if c == label_idx:
                try:
                    labels.append(int(cell))
                except ValueError:
                    raise ParseError(r, c, cell) from None
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(r, c, cell) from None
            if not math.isfinite(v):
                raise NonFiniteValue(r, c)
            values.append(v)
        coords.append(values)
    if label_idx is not None and width == 1:
        raise EmptyDataset("file holds only the label column")
    return PointCloud(np.array(coords, dtype=np.float64), np.array(labels, dtype=np.int64) if labels else None, path.stem)


def save_csv(cloud: PointCloud, path, delimiter=",") -> None:
    """Write a cloud with a header row (``x0..x{d-1}`` plus ``label``) at 17 significant digits."""
    path = Path(path)
    header = [f"x{j}" for j in range(cloud.d)]
    if cloud.labels is not None:
        header.append("label")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow(header)
        for i, row in enumerate(cloud.coords):
            cells = [f"{v:.17g}" for v in row]
            if cloud.labels is not None:
                cells.append(str(int(cloud.labels[i])))
            writer.writerow(cells)


def standardize(cloud: PointCloud) -> PointCloud:
    """Center every column and scale it to unit variance; constant columns are only centered."""
    if cloud.n < 2:
        raise EmptyDataset("standardize needs at least 2 points")
    x = cloud.coords - cloud.coords.mean(axis=0)
    std = x.std(axis=0)
    scale = np.where(std > 0, std, 1.0)
    x = x / scale
    # re-center after scaling to kill the residual rounding in the mean
    x = x - x.mean(axis=0)
    return PointCloud(x, cloud.labels, cloud.name)


def generate_blobs(n_points, n_blobs, dim, blob_std=1.0, box_scale=10.0, seed=0) -> PointCloud:
    """Isotropic Gaussian clusters with centers uniform in ``[-box_scale, box_scale]^dim``.

    Points are dealt to clusters round-robin, so cluster sizes differ by at most one.
    """
    if not (n_points >= n_blobs >= 1) or dim < 1 or blob_std <= 0 or box_scale < 0:
        raise InvalidParam(
            f"need n_points >= n_blobs >= 1, dim >= 1, blob_std > 0 (got {n_points}, {n_blobs}, {dim}, {blob_std})"
        )
    rng = make_rng(seed)
    centers = rng.uniform(-box_scale, box_scale, size=(n_blobs, dim))
    labels = np.arange(n_points) % n_blobs
    coords = centers[labels] + blob_std * rng.standard_normal((n_points, dim))
    return PointCloud(coords, labels, "blobs")


def generate_disk_uniform(n_points, radius=1.0, seed=0) -> PointCloud:
    if n_points < 1 or radius <= 0:
        raise InvalidParam(f"need n_points >= 1 and radius > 0 (got {n_points}, {radius})")
    rng = make_rng(seed)
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n_points))
    theta = rng.uniform(0.0, 2.0 * np.pi, n_points)
    coords = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    return PointCloud(coords, None, "disk")


def generate_half_moons(n_points, noise_std=0.0, seed=0) -> PointCloud:
    """Two interleaving half circles; the upper one (label 0) gets the extra point when n is odd."""
    if n_points < 2 or noise_std < 0:
        raise InvalidParam(f"need n_points >= 2 and noise_std >= 0 (got {n_points}, {noise_std})")
    rng = make_rng(seed)
    n_upper = (n_points + 1) // 2
    n_lower = n_points // 2
    t_upper = np.linspace(0.0, np.pi, n_upper)
    t_lower = np.linspace(0.0, np.pi, n_lower)
    upper = np.column_stack([np.cos(t_upper), np.sin(t_upper)])
    lower = np.column_stack([1.0 - np.cos(t_lower), 0.5 - np.sin(t_lower)])
    coords = np.vstack([upper, lower])
    if noise_std > 0:
        coords = coords + noise_std * rng.standard_normal(coords.shape)
    labels = np.concatenate([np.zeros(n_upper, dtype=np.int64), np.ones(n_lower, dtype=np.int64)])
    return PointCloud(coords, labels, "moons")


GENERATORS = {
    "blobs": generate_blobs,
    "disk": generate_disk_uniform,
    "moons": generate_half_moons,
}
