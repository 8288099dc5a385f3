import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metricforge.embedding import (
    DistanceSpec,
    NeighborAssignment,
    PointCloud,
    default_eps,
    lift,
    pair_order,
    rank_check,
    sample_neighbors,
    scaled_form,
    verify_relations,
)
from metricforge.errors import (
    CapacityError,
    ConditioningWarning,
    DimensionError,
    DuplicatePointsError,
    EpsilonTooLargeError,
    IncompleteSpecError,
)


def random_cloud(rng, m, ell=2):
    return PointCloud(rng.uniform(0.0, 1.0, (m, ell)))


def test_lift_examples():
    np.testing.assert_array_equal(lift([1, 2], 4), [1, 2, 0, 0])
    np.testing.assert_array_equal(lift([7], 1), [7])
    np.testing.assert_array_equal(lift([0, 0], 3), [0, 0, 0])
    with pytest.raises(DimensionError):
        lift([1, 2, 3], 2)


def test_pair_order_is_lexicographic():
    assert pair_order(4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_duplicate_points_rejected():
    with pytest.raises(DuplicatePointsError):
        PointCloud([[0.0, 1.0], [0.0, 1.0], [2.0, 2.0]])


def test_incomplete_spec_names_missing_pair():
    delta = {p: 1.0 for p in pair_order(5) if p != (1, 4)}
    with pytest.raises(IncompleteSpecError, match=r"\(2,5\)"):
        DistanceSpec(5, delta)


def test_two_point_neighbors():
    cloud = PointCloud([[0.0], [10.0]])
    a = sample_neighbors(cloud, 0.1, np.random.default_rng(0))
    assert a.h == 1 and a.diff_matrix.shape == (1, 1)
    assert abs(abs(a.diff_matrix[0, 0]) - 10.0) < 0.2
    assert rank_check(a.diff_matrix)


def test_ten_points_in_the_plane_lift_to_45():
    cloud = random_cloud(np.random.default_rng(1), 10)
    a = sample_neighbors(cloud, 0.1 * cloud.min_distance(), np.random.default_rng(2))
    assert a.diff_matrix.shape == (45, 45)
    assert rank_check(a.diff_matrix)
    for (i, j), z in a.neighbors.items():
        assert np.linalg.norm(z - lift(cloud.points[i], 45)) < a.eps


def test_eps_too_large():
    cloud = random_cloud(np.random.default_rng(3), 5)
    with pytest.raises(EpsilonTooLargeError):
        sample_neighbors(cloud, 0.6 * cloud.min_distance(), np.random.default_rng(0))


def test_capacity_error_when_h_below_ell():
    cloud = PointCloud(np.eye(3)[:2] * [1, 2, 3])  # m=2 points in R^3, h=1
    with pytest.raises(CapacityError):
        sample_neighbors(cloud, 0.1, np.random.default_rng(0))


def test_default_eps():
    cloud = PointCloud([[0.0, 0.0], [3.0, 4.0], [10.0, 0.0]])
    assert default_eps(cloud) == pytest.approx(0.45 * 5.0)


def test_rank_check_examples():
    assert rank_check(np.eye(3))
    m = np.array([[1.0, 1.0, 2.0], [0.0, 0.0, 1.0], [3.0, 3.0, 0.0]])
    assert not rank_check(m)
    with pytest.raises(DimensionError):
        rank_check(np.ones((2, 3)))


def test_rank_check_monte_carlo():
    rng = np.random.default_rng(4)
    hits = sum(rank_check(rng.uniform(-1, 1, (5, 5))) for _ in range(1000))
    assert hits >= 999


def _assignment_from_columns(columns, points):
    columns = np.asarray(columns, dtype=float)
    h = columns.shape[0]
    cloud = PointCloud(points)
    pairs = pair_order(cloud.m)
    neighbors = {}
    for k, (i, j) in enumerate(pairs):
        neighbors[(i, j)] = columns[:, k]
        neighbors[(j, i)] = np.zeros(h)
    return NeighborAssignment(h, 0.1, neighbors, columns, pairs, cloud)


def test_scaled_form_orthogonal_pair():
    # points chosen only so that m=3 gives three pairs; columns are the unit vectors
    a = _assignment_from_columns(np.eye(3), [[0.0], [1.0], [3.0]])
    spec = DistanceSpec(3, {(0, 1): 2.0, (0, 2): 3.0, (1, 2): 1.0})
    sn = scaled_form(a, spec)
    np.testing.assert_allclose(sn.unscaled.matrix, np.diag([4.0, 9.0, 1.0]), atol=1e-13)
    assert sn.alpha == pytest.approx(1.0 / 9.0, rel=1e-12)
    assert sn.base.norm([1, 0, 0]) == pytest.approx(2.0 / 3.0, rel=1e-12)
    assert sn.base.norm([0, 1, 0]) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("x", [1.0, 0.7, 12.5])
def test_scaled_form_single_pair(x):
    a = _assignment_from_columns([[x]], [[0.0], [1.0]])
    sn = scaled_form(a, DistanceSpec(2, {(0, 1): 5.0}))
    assert sn.unscaled.norm([x]) == pytest.approx(5.0, rel=1e-12)
    # a 1x1 form scaled to eigenvalue 1 is the identity: the distance is |x|
    assert sn.base.norm([x]) == pytest.approx(abs(x), rel=1e-12)
    assert sn.base.norm([1.0]) == pytest.approx(1.0, rel=1e-12)


def test_ten_points_realize_uniform_targets():
    rng = np.random.default_rng(7)
    cloud = random_cloud(rng, 10)
    spec = DistanceSpec.uniform(10, rng)
    a = sample_neighbors(cloud, None, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        sn = scaled_form(a, spec)
    for i, j in a.pair_order:
        assert sn.unscaled.norm(a.difference(i, j)) == pytest.approx(spec[i, j], rel=1e-8)
        assert sn.base.norm(a.difference(i, j)) == pytest.approx(math.sqrt(sn.alpha) * spec[i, j], rel=1e-8)
    assert np.linalg.eigvalsh(sn.base.matrix)[-1] == pytest.approx(1.0, rel=1e-8)


def test_relations_with_ties_and_probes():
    rng = np.random.default_rng(8)
    cloud = random_cloud(rng, 6)
    values = [1.0, 2.0, 2.0, 3.0]
    spec = DistanceSpec.from_function(6, lambda i, j: values[(i + j) % 4])
    a = sample_neighbors(cloud, None, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        sn = scaled_form(a, spec)
    report = verify_relations(sn, a, spec, probes=1000, rng=rng)
    assert report.triples_checked == 6 * 5 * 4 // 2
    assert report.sign_violations == []
    assert report.domination_violations == 0
    assert report.max_norm_ratio <= 1 + 1e-10
    assert report.ok


@given(st.integers(3, 7), st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_scaling_contracts_property(m, seed):
    rng = np.random.default_rng(seed)
    cloud = random_cloud(rng, m)
    spec = DistanceSpec.uniform(m, rng)
    a = sample_neighbors(cloud, None, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        sn = scaled_form(a, spec)
    assert np.linalg.eigvalsh(sn.base.matrix)[-1] == pytest.approx(1.0, rel=1e-8)
    xs = rng.standard_normal((200, a.h))
    assert np.all(sn.base.norms(xs) <= (1 + 1e-10) * np.linalg.norm(xs, axis=1))
