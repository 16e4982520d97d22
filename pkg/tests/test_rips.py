import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import mst_edge_lengths, rips_pairs_bruteforce

from dimred.dataset import PointCloud, make_rng
from dimred.errors import InvalidDim
from dimred.persistence import PersistenceDiagram, load_diagram_csv, rips_persistence, save_diagram_csv
from dimred.persistence.rips import enclosing_radius, distance_matrix


def sorted_bars(diagram, dim):
    return sorted(map(tuple, diagram.bars(dim).tolist()))


def test_two_points():
    d = rips_persistence(np.array([[0.0, 0.0], [1.0, 0.0]]))
    assert sorted_bars(d, 0) == [(0.0, 1.0), (0.0, np.inf)]
    assert sorted_bars(d, 1) == []


def test_single_point():
    d = rips_persistence(np.array([[3.0, 4.0]]))
    assert sorted_bars(d, 0) == [(0.0, np.inf)]


def test_unit_square():
    d = rips_persistence(PointCloud([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
    bars = d.bars(1)
    assert len(bars) == 1
    assert abs(bars[0, 0] - 1.0) < 1e-12 and abs(bars[0, 1] - np.sqrt(2)) < 1e-12


def test_circle_has_one_bar_near_sqrt3():
    t = 2 * np.pi * np.arange(100) / 100
    d = rips_persistence(np.column_stack([np.cos(t), np.sin(t)]))
    bars = d.bars(1)
    pers = np.sort(bars[:, 1] - bars[:, 0])[::-1]
    assert pers[0] > 1.5
    assert abs(bars[np.argmax(bars[:, 1] - bars[:, 0]), 1] - np.sqrt(3)) < 0.05
    assert np.all(pers[1:] < 0.1)


@given(st.integers(2, 120), st.integers(1, 4), st.integers(0, 2**32))
def test_h0_deaths_equal_mst(n, d, seed):
    x = make_rng(seed).standard_normal((n, d))
    dgm = rips_persistence(x, max_dim=0)
    deaths = np.sort(dgm.finite(0)[:, 1])
    np.testing.assert_allclose(deaths, mst_edge_lengths(x), rtol=0, atol=1e-12)
    assert len(dgm.essential(0)) == 1
    assert np.all(dgm.bars(0)[:, 0] == 0)


@given(st.integers(3, 11), st.integers(1, 3), st.integers(0, 2**32), st.booleans())
def test_matches_bruteforce_boundary_reduction(n, d, seed, on_grid):
    x = make_rng(seed).standard_normal((n, d))
    if on_grid:
        x = np.round(x * 2) / 2  # many equal lengths
    got = rips_persistence(x)
    want = rips_pairs_bruteforce(x)
    for dim in (0, 1):
        g = sorted_bars(got, dim)
        w = want[dim]
        assert len(g) == len(w)
        np.testing.assert_allclose(np.array(g).reshape(-1, 2), np.array(w).reshape(-1, 2), atol=1e-12)


def test_max_filtration_caps_h1():
    sq = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    d = rips_persistence(sq, max_filtration=1.2)
    assert sorted_bars(d, 1) == [(1.0, np.inf)]
    assert len(rips_persistence(sq, max_dim=0).bars(1)) == 0


@given(st.integers(3, 40), st.floats(0.1, 10.0), st.integers(0, 2**32))
def test_scale_equivariance(n, c, seed):
    x = make_rng(seed).standard_normal((n, 2))
    a = rips_persistence(x)
    b = rips_persistence(c * x)
    for dim in (0, 1):
        np.testing.assert_allclose(np.array(sorted_bars(b, dim)).reshape(-1, 2),
                                   c * np.array(sorted_bars(a, dim)).reshape(-1, 2), rtol=1e-9, atol=0)


def test_invariants_on_random_cloud():
    x = make_rng(4).standard_normal((150, 3))
    d = rips_persistence(x)
    fin = d.points[np.isfinite(d.points[:, 1])]
    assert np.all(fin[:, 1] > fin[:, 0])
    assert np.all(d.points[:, 0] >= 0)
    assert np.all(np.isfinite(d.bars(1)[:, 1]))
    assert d.n_source_points == 150
    r = enclosing_radius(distance_matrix(x))
    assert np.all(d.bars(1)[:, 1] <= r)


def test_invalid_dim():
    with pytest.raises(InvalidDim):
        rips_persistence(np.zeros((3, 2)), max_dim=2)


def test_diagram_csv_roundtrip(tmp_path):
    d = rips_persistence(make_rng(1).standard_normal((30, 2)))
    save_diagram_csv(d, tmp_path / "d.csv")
    text = (tmp_path / "d.csv").read_text()
    assert text.startswith("birth,death,dim\n") and ",inf,0" in text
    back = load_diagram_csv(tmp_path / "d.csv")
    np.testing.assert_array_equal(back.points, d.points)


def test_diagram_accessors():
    d = PersistenceDiagram(np.array([[0, 1, 0], [0, np.inf, 0], [0.5, 0.7, 1]]), 2)
    assert len(d) == 3
    assert d.finite(0).tolist() == [[0.0, 1.0]]
    assert d.essential(0).tolist() == [[0.0, np.inf]]
    assert d.bars(1).tolist() == [[0.5, 0.7]]
