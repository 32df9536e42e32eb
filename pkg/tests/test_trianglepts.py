"""Triangle geometry, the base-4 point sequence, and its stratification."""

import numpy as np
import pytest

from diagqmc.trianglepts import (
    REFERENCE,
    Triangle,
    approx_star_discrepancy,
    barycentric,
    cell_indices,
    from_barycentric,
    map_points,
    medial_subtriangles,
    triangle_dict,
    tvdc_point,
    tvdc_points,
)

SKEWED = Triangle((0.2, -0.3), (1.7, 0.4), (0.6, 2.1))


def _slow_descent(t, index, depth):
    """Independent reimplementation of the digit descent, for cross-checking."""
    a, b, c = (np.array(v, dtype=np.float64) for v in (t.a, t.b, t.c))
    for _ in range(depth):
        mab, mac, mbc = (a + b) / 2, (a + c) / 2, (b + c) / 2
        digit = index % 4
        index //= 4
        if digit == 0:
            a, b, c = mbc, mac, mab
        elif digit == 1:
            b, c = mab, mac
        elif digit == 2:
            a, c = mab, mbc
        else:
            a, b = mac, mbc
    return (a + b + c) / 3.0


def test_triangle_basic_properties():
    assert REFERENCE.area == 0.5
    assert REFERENCE.centroid == (pytest.approx(1 / 3), pytest.approx(1 / 3))
    assert triangle_dict(REFERENCE) == {
        "a": [0.0, 0.0],
        "b": [1.0, 0.0],
        "c": [0.0, 1.0],
    }


def test_degenerate_triangle_rejected():
    with pytest.raises(ValueError):
        Triangle((0, 0), (1, 1), (2, 2))


def test_medial_children_partition_area():
    kids = medial_subtriangles(SKEWED)
    assert len(kids) == 4
    for kid in kids:
        assert kid.area == pytest.approx(SKEWED.area / 4, rel=1e-12)


def test_index_zero_is_the_centroid():
    # the middle medial child shares its parent's centroid, so a descent of
    # all-zero digits stays put at any depth
    for depth in (1, 2, 4):
        np.testing.assert_allclose(
            tvdc_point(REFERENCE, 0, depth), [1 / 3, 1 / 3], atol=1e-15
        )


def test_first_four_points_are_child_centroids():
    pts = tvdc_points(REFERENCE, 4)
    want = np.array([[1 / 3, 1 / 3], [1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
    np.testing.assert_allclose(pts, want, atol=1e-15)


def test_sequence_matches_independent_descent():
    for t in (REFERENCE, SKEWED):
        got = tvdc_points(t, 64)
        want = np.array([_slow_descent(t, i, 3) for i in range(64)])
        np.testing.assert_array_equal(got, want)


def test_point_and_points_agree():
    pts = tvdc_points(SKEWED, 20, depth=4)
    for i in range(20):
        np.testing.assert_array_equal(pts[i], tvdc_point(SKEWED, i, 4))


def test_tvdc_validation():
    with pytest.raises(ValueError):
        tvdc_points(REFERENCE, 0)
    with pytest.raises(ValueError):
        tvdc_points(REFERENCE, 17, depth=2)
    with pytest.raises(ValueError):
        tvdc_point(REFERENCE, 4, depth=1)
    with pytest.raises(ValueError):
        tvdc_point(REFERENCE, 0, depth=0)


@pytest.mark.parametrize("t", [REFERENCE, SKEWED])
@pytest.mark.parametrize("depth", [1, 2, 3, 4, 5])
def test_full_blocks_stratify(t, depth):
    n = 4**depth
    cells = cell_indices(t, tvdc_points(t, n), depth)
    np.testing.assert_array_equal(np.sort(cells), np.arange(n))


def test_cell_indices_invert_the_descent():
    # point i must sit in cell i, not merely in some distinct cell
    cells = cell_indices(SKEWED, tvdc_points(SKEWED, 256), 4)
    np.testing.assert_array_equal(cells, np.arange(256))


def test_cell_indices_reject_outside_points():
    with pytest.raises(ValueError):
        cell_indices(REFERENCE, np.array([[2.0, 2.0]]), 2)
    with pytest.raises(ValueError):
        cell_indices(REFERENCE, np.array([[0.1, 0.1]]), 0)


def test_affine_equivariance():
    # generating on a triangle commutes with the affine map from the reference
    mapped = map_points(REFERENCE, SKEWED, tvdc_points(REFERENCE, 256))
    direct = tvdc_points(SKEWED, 256)
    np.testing.assert_allclose(mapped, direct, atol=1e-12)


def test_barycentric_round_trip():
    p = np.array([0.21, 0.37])
    w = barycentric(SKEWED, from_barycentric(SKEWED, (0.5, 0.3, 0.2)))
    assert w.wa == pytest.approx(0.5, abs=1e-12)
    assert w.wb == pytest.approx(0.3, abs=1e-12)
    np.testing.assert_allclose(
        from_barycentric(REFERENCE, barycentric(REFERENCE, p)), p, atol=1e-14
    )


def test_map_points_round_trip():
    pts = tvdc_points(REFERENCE, 32)
    back = map_points(SKEWED, REFERENCE, map_points(REFERENCE, SKEWED, pts))
    np.testing.assert_allclose(back, pts, atol=1e-13)


def test_discrepancy_improves_with_n():
    d_small = approx_star_discrepancy(tvdc_points(REFERENCE, 256), REFERENCE)
    d_big = approx_star_discrepancy(tvdc_points(REFERENCE, 4096), REFERENCE)
    assert d_big < d_small / 2


def test_discrepancy_beats_random_points():
    n = 4096
    d_tvdc = approx_star_discrepancy(tvdc_points(REFERENCE, n), REFERENCE)
    for seed in (100, 101, 102):
        u = np.random.default_rng(seed).random((n, 2))
        fold = u.sum(axis=1) > 1.0
        u[fold] = 1.0 - u[fold]
        assert d_tvdc < approx_star_discrepancy(u, REFERENCE)


def test_discrepancy_validation():
    with pytest.raises(ValueError):
        approx_star_discrepancy(np.empty((0, 2)), REFERENCE)
    with pytest.raises(ValueError):
        approx_star_discrepancy(tvdc_points(REFERENCE, 4), REFERENCE, n_test=0)
