import math
import warnings

import numpy as np
import pytest

from metricforge.axioms import check_axioms
from metricforge.embedding import DistanceSpec, PointCloud, sample_neighbors
from metricforge.errors import ConditioningWarning, NoiseMagnitudeError
from metricforge.rng import float_seed, hashed_seed, splitmix64, uniform_stream
from metricforge.semimetric import build_semimetric, make_noise_fixed, make_noise_seeded, seed_value


@pytest.fixture(autouse=True)
def _quiet_conditioning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        yield


def test_splitmix_reference_vector():
    # published outputs of splitmix64 seeded with 1234567
    out = splitmix64(1234567, 3)
    assert [int(v) for v in out] == [6457827717110365317, 3203168211198807973, 9817491932198370423]


def test_uniform_stream_range_and_determinism():
    u = uniform_stream(42, 1000)
    assert np.all((u >= 0) & (u < 1))
    assert np.array_equal(u, uniform_stream(42, 1000))


def test_seed_value_example():
    expected = 0.9 * (0.1 / math.sqrt(45)) * 2 * 7
    assert seed_value([1, 2], [3, 4], 0.1, 45) == pytest.approx(expected, rel=1e-15)
    assert seed_value([1, 2], [3, 4], 0.1, 45) == pytest.approx(0.187829, rel=5e-6)


def test_seed_value_zero_collision_and_symmetry_on_diagonal():
    assert seed_value([0.0, 5.0], [3.0, 4.0], 0.1, 45) == 0.0
    assert seed_value([0.0, 5.0], [-9.0, 1.0], 0.1, 45) == 0.0
    assert seed_value([1, 1], [1, 1], 0.1, 45) == seed_value([1, 1], [1, 1], 0.1, 45)


def test_hashed_seed_is_order_sensitive():
    assert hashed_seed([1.0, 2.0], [3.0, 4.0]) != hashed_seed([3.0, 4.0], [1.0, 2.0])
    assert float_seed(1.0) == 0x3FF0000000000000


@pytest.mark.parametrize("variant", ["hashed", "paper"])
def test_seeded_noise_bound_and_determinism(variant):
    rng = np.random.default_rng(9)
    eps = 0.1
    f = make_noise_seeded(eps, 45, 2, variant)
    for _ in range(10_000):
        x, y = rng.standard_normal(2), rng.standard_normal(2)
        v = f(x, y)
        assert np.linalg.norm(v) < eps / 6
    x, y = np.array([0.3, -1.2]), np.array([2.0, 0.5])
    assert np.array_equal(f(x, y), f(x.copy(), y.copy()))


def test_hashed_noise_is_asymmetric():
    rng = np.random.default_rng(10)
    f = make_noise_seeded(0.1, 45, 2, "hashed")
    for _ in range(10_000):
        x, y = rng.standard_normal(2), rng.standard_normal(2)
        assert not np.array_equal(f(x, y), f(y, x))


def _fixed_setup(seed=11, m=6, eps=0.1):
    rng = np.random.default_rng(seed)
    cloud = PointCloud(rng.uniform(0, 1, (m, 2)))
    assignment = sample_neighbors(cloud, eps / 6.0, rng, padding_only=True)
    return cloud, assignment


def test_fixed_table_lookup_and_zero():
    cloud, a = _fixed_setup()
    f = make_noise_fixed(a, 0.1)
    y1, y2 = cloud.points[0], cloud.points[1]
    np.testing.assert_array_equal(f(y1, y2), a.neighbors[(0, 1)][2:])
    assert not np.array_equal(f(y1, y2), f(y2, y1))
    np.testing.assert_array_equal(f(y1, np.array([5.0, 5.0])), np.zeros(a.h - 2))


def test_fixed_table_magnitude_check():
    _, a = _fixed_setup()
    with pytest.raises(NoiseMagnitudeError):
        make_noise_fixed(a, 0.01)


def _dominated_spec(cloud, rng):
    d = cloud.distances()
    return DistanceSpec.from_function(cloud.m, lambda i, j: d[i, j] * rng.uniform(0.3, 1.0))


@pytest.mark.parametrize("noise", ["fixed", "hashed", "paper"])
def test_designated_distances_unscaled(noise):
    rng = np.random.default_rng(12)
    cloud = PointCloud(rng.uniform(0, 1, (10, 2)))
    spec = _dominated_spec(cloud, rng)
    sm = build_semimetric(cloud, spec, 0.1, noise=noise, rng=rng)
    for row in sm.verification_table():
        assert row["rel_error"] <= 1e-8


def test_identity_and_exact_symmetry():
    rng = np.random.default_rng(13)
    cloud = PointCloud(rng.uniform(0, 1, (6, 2)))
    sm = build_semimetric(cloud, DistanceSpec.uniform(6, rng), 0.1, scaled=True)
    for _ in range(200):
        x, y = rng.standard_normal(2), rng.standard_normal(2)
        assert sm(x, x) == 0.0
        assert sm(x, y) == sm(y, x)
        assert sm(x, y) > 0


@pytest.mark.parametrize("noise", ["fixed", "hashed"])
def test_close_to_canonical_distance(noise):
    rng = np.random.default_rng(14)
    cloud = PointCloud(rng.uniform(0, 1, (7, 2)))
    eps = 0.1
    sm = build_semimetric(cloud, DistanceSpec.uniform(7, rng), eps, noise=noise, scaled=True, rng=rng)
    samples = list(cloud.points) + list(rng.uniform(-1, 2, (30, 2)))
    for x in samples:
        for y in samples:
            assert abs(sm(x, y) - sm.canonical(x, y)) <= eps / 3


def test_triangle_witness():
    # two tight pairs sharing a point with one far pair: d13 > d12 + d23 by design
    rng = np.random.default_rng(15)
    cloud = PointCloud([[0.0, 0.0], [1.0, 0.0], [0.5, 0.9]])
    small, large = 0.01, 1.0
    spec = DistanceSpec(3, {(0, 1): small, (0, 2): small, (1, 2): large})
    eps = 0.1
    sm = build_semimetric(cloud, spec, eps, noise="fixed", scaled=True, rng=rng)
    report = check_axioms(sm, list(cloud.points), eps)
    assert 0 < report.triangle_defect <= eps
    assert report.classification == "ε-semimetric"
