"""Static SVG scatter plots of the first two embedding coordinates."""

import numpy as np

from .errors import DimensionTooLow

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5",
    "#c49c94", "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
)  # fmt: skip
UNLABELED_COLOR = "#1f77b4"
MARGIN = 0.05


def _axis_map(values, size):
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo
    if span == 0:
        span = 1.0
        lo -= 0.5
    pad = MARGIN * span
    lo -= pad
    span += 2 * pad
    return (values - lo) / span * size


def render_scatter_svg(embedding, labels=None, path=None, width=800, height=800, radius=2.0):
    """
    Write a self-contained SVG scatter plot and return its text.

    Points are coloured by label through a fixed 20-colour cycle (one colour
    when unlabelled). Both axes are fitted to the data with 5% margins. The
    output depends only on the inputs, so identical calls give identical bytes.
    """
    coords = embedding.coords if hasattr(embedding, "coords") else np.asarray(embedding, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] < 2:
        raise DimensionTooLow("a scatter plot needs at least two embedding coordinates")
    if labels is not None:
        labels = np.asarray(labels)
        if len(labels) != len(coords):
            raise DimensionTooLow("labels and embedding have different lengths")
    px = _axis_map(coords[:, 0], width)
    # SVG y grows downwards
    py = height - _axis_map(coords[:, 1], height)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    for i in range(len(coords)):
        color = UNLABELED_COLOR if labels is None else PALETTE[int(labels[i]) % len(PALETTE)]
        lines.append(f'<circle cx="{px[i]:.3f}" cy="{py[i]:.3f}" r="{radius:g}" fill="{color}"/>')
    lines.append("</svg>")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text
