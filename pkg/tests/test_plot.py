import re

import numpy as np
import pytest

from dimred.errors import DimensionTooLow
from dimred.plot import PALETTE, UNLABELED_COLOR, render_scatter_svg


def fills(svg):
    return re.findall(r'<circle [^>]*fill="(#[0-9a-f]{6})"', svg)


def test_labeled_points_get_distinct_colours():
    svg = render_scatter_svg(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 0.5]]), [0, 1, 2])
    assert fills(svg) == list(PALETTE[:3])
    assert svg.startswith('<?xml version="1.0"') and svg.rstrip().endswith("</svg>")


def test_unlabeled_single_colour():
    svg = render_scatter_svg(np.random.default_rng(0).standard_normal((10, 2)))
    assert set(fills(svg)) == {UNLABELED_COLOR} and len(fills(svg)) == 10


def test_points_inside_canvas_with_y_flipped():
    svg = render_scatter_svg(np.array([[0.0, 0.0], [1.0, 1.0]]), width=100, height=200)
    coords = [tuple(map(float, m)) for m in re.findall(r'cx="([\d.]+)" cy="([\d.]+)"', svg)]
    (x0, y0), (x1, y1) = coords
    assert x0 < x1 and y0 > y1
    assert all(0 <= x <= 100 and 0 <= y <= 200 for x, y in coords)


def test_bytes_are_deterministic(tmp_path):
    y = np.random.default_rng(1).standard_normal((50, 3))
    labels = np.arange(50) % 25
    render_scatter_svg(y, labels, tmp_path / "a.svg")
    render_scatter_svg(y, labels, tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_constant_axis_and_errors():
    svg = render_scatter_svg(np.zeros((3, 2)))
    assert "nan" not in svg
    with pytest.raises(DimensionTooLow):
        render_scatter_svg(np.zeros((3, 1)))
    with pytest.raises(DimensionTooLow):
        render_scatter_svg(np.zeros((3, 2)), [0, 1])
