import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from dimred.dataset import (
    PointCloud,
    generate_blobs,
    generate_disk_uniform,
    generate_half_moons,
    load_csv,
    make_rng,
    save_csv,
    standardize,
)
from dimred.errors import EmptyDataset, InvalidParam, MissingFile, NonFiniteValue, ParseError


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_plain_rows(tmp_path):
    cloud = load_csv(write(tmp_path, "1,2\n3,4\n5,6\n"))
    np.testing.assert_array_equal(cloud.coords, [[1, 2], [3, 4], [5, 6]])
    assert cloud.labels is None


def test_load_with_header_and_labels(tmp_path):
    cloud = load_csv(write(tmp_path, "a,b,y\n1,2,0\n3,4,1\n5,6,0\n"), label_column="y")
    np.testing.assert_array_equal(cloud.coords, [[1, 2], [3, 4], [5, 6]])
    np.testing.assert_array_equal(cloud.labels, [0, 1, 0])


def test_label_column_by_index(tmp_path):
    cloud = load_csv(write(tmp_path, "7,1,2\n8,3,4\n"), label_column="0")
    np.testing.assert_array_equal(cloud.labels, [7, 8])
    np.testing.assert_array_equal(cloud.coords, [[1, 2], [3, 4]])


def test_nan_cell_reports_position(tmp_path):
    with pytest.raises(NonFiniteValue) as err:
        load_csv(write(tmp_path, "1,NaN\n"))
    assert (err.value.row, err.value.col) == (0, 1)


def test_unparseable_cell(tmp_path):
    with pytest.raises(ParseError) as err:
        load_csv(write(tmp_path, "1,2\n3,abc\n"))
    assert (err.value.row, err.value.col) == (1, 1)


def test_missing_and_empty(tmp_path):
    with pytest.raises(MissingFile):
        load_csv(tmp_path / "nope.csv")
    with pytest.raises(EmptyDataset):
        load_csv(write(tmp_path, ""))
    with pytest.raises(EmptyDataset):
        load_csv(write(tmp_path, "a,b\n"))


def test_semicolon_delimiter(tmp_path):
    cloud = load_csv(write(tmp_path, "1;2\n3;4\n"), delimiter=";")
    np.testing.assert_array_equal(cloud.coords, [[1, 2], [3, 4]])


@given(
    arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 4)),
           elements=st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)),
    st.booleans(),
)
def test_save_load_roundtrip(tmp_path_factory, coords, labeled):
    labels = np.arange(len(coords)) % 3 if labeled else None
    cloud = PointCloud(coords, labels)
    path = tmp_path_factory.mktemp("rt") / "c.csv"
    save_csv(cloud, path)
    back = load_csv(path, label_column="label" if labeled else None)
    np.testing.assert_allclose(back.coords, coords, rtol=1e-12, atol=1e-12)
    if labeled:
        np.testing.assert_array_equal(back.labels, labels)


def test_point_cloud_rejects_bad_input():
    with pytest.raises(NonFiniteValue):
        PointCloud(np.array([[1.0, np.inf]]))
    with pytest.raises(EmptyDataset):
        PointCloud(np.zeros((0, 2)))
    with pytest.raises(InvalidParam):
        PointCloud(np.zeros((2, 2)), labels=[0])
    with pytest.raises(InvalidParam):
        PointCloud(np.zeros((2, 2)), labels=[0, -1])


def test_point_cloud_is_read_only():
    cloud = PointCloud(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        cloud.coords[0, 0] = 1.0


def test_standardize_examples():
    np.testing.assert_array_equal(standardize(PointCloud([[1.0], [3.0]])).coords, [[-1.0], [1.0]])
    np.testing.assert_array_equal(standardize(PointCloud([[5.0], [5.0], [5.0]])).coords, [[0.0], [0.0], [0.0]])


def test_standardize_random_cloud_keeps_labels():
    x = make_rng(3).normal(5.0, 3.0, size=(100, 10))
    out = standardize(PointCloud(x, np.arange(100) % 2))
    assert np.all(np.abs(out.coords.mean(axis=0)) < 1e-9)
    np.testing.assert_allclose(out.coords.std(axis=0), 1.0)
    np.testing.assert_array_equal(out.labels, np.arange(100) % 2)


def test_standardize_needs_two_points():
    with pytest.raises(EmptyDataset):
        standardize(PointCloud([[1.0, 2.0]]))


def test_blobs_shapes_and_labels():
    cloud = generate_blobs(10000, 12, 1000, seed=0)
    assert cloud.coords.shape == (10000, 1000)
    assert set(np.unique(cloud.labels)) == set(range(12))
    counts = np.bincount(cloud.labels)
    assert counts.max() - counts.min() <= 1
    one_each = generate_blobs(12, 12, 3, seed=0)
    np.testing.assert_array_equal(np.sort(one_each.labels), np.arange(12))


def test_blobs_deterministic_and_validated():
    a = generate_blobs(100, 3, 4, seed=9)
    b = generate_blobs(100, 3, 4, seed=9)
    assert a.coords.tobytes() == b.coords.tobytes()
    with pytest.raises(InvalidParam):
        generate_blobs(2, 3, 4)
    with pytest.raises(InvalidParam):
        generate_blobs(10, 3, 4, blob_std=0.0)


def test_disk_support_and_area_law():
    cloud = generate_disk_uniform(10000, radius=1.0, seed=0)
    r = np.linalg.norm(cloud.coords, axis=1)
    assert np.all(r <= 1.0)
    assert abs(np.mean(r < 0.5) - 0.25) <= 0.02
    assert stats.kstest(r**2, "uniform").statistic < 0.05
    assert cloud.labels is None
    again = generate_disk_uniform(10000, radius=1.0, seed=0)
    assert cloud.coords.tobytes() == again.coords.tobytes()
    with pytest.raises(InvalidParam):
        generate_disk_uniform(10, radius=0.0)


def test_disk_radius_scaling():
    r = np.linalg.norm(generate_disk_uniform(5000, radius=3.0, seed=1).coords, axis=1)
    assert np.all(r <= 3.0)
    assert stats.kstest(r**2 / 9.0, "uniform").statistic < 0.05


def test_half_moons_construction():
    cloud = generate_half_moons(1001, 0.0, seed=0)
    assert np.sum(cloud.labels == 0) == 501 and np.sum(cloud.labels == 1) == 500
    np.testing.assert_allclose(cloud.coords[0], [1.0, 0.0], atol=1e-15)
    assert cloud.labels[0] == 0
    upper = cloud.coords[cloud.labels == 0]
    np.testing.assert_allclose(np.linalg.norm(upper, axis=1), 1.0)
    lower = cloud.coords[cloud.labels == 1]
    np.testing.assert_allclose(np.linalg.norm(lower - [1.0, 0.5], axis=1), 1.0)
    with pytest.raises(InvalidParam):
        generate_half_moons(1)
    with pytest.raises(InvalidParam):
        generate_half_moons(10, -0.1)


def test_seed_validation():
    with pytest.raises(InvalidParam):
        make_rng(-1)
    with pytest.raises(InvalidParam):
        make_rng(2**64)
    make_rng(2**64 - 1)
