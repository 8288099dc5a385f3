import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from metricforge.axioms import EXHAUSTIVE_LIMIT, check_axioms, classify


def euclid(x, y):
    return float(np.linalg.norm(x - y))


def plus_one(x, y):
    return 0.0 if np.array_equal(x, y) else euclid(x, y) + 1.0


def far_jump(x, y):
    # +1 once pairs are farther apart than 1; breaks the triangle by at most 1
    e = euclid(x, y)
    return e + 1.0 if e > 1.0 else e


def one_sided(x, y):
    return euclid(x, y) + 0.5 * max(0.0, float(x[0] - y[0]))


def brute_force_defect(d, pts):
    worst = 0.0
    for x in pts:
        for y in pts:
            for z in pts:
                worst = max(worst, d(x, y) - d(x, z) - d(z, y))
    return worst


def test_euclidean_is_metric():
    pts = list(np.random.default_rng(0).standard_normal((20, 3)))
    r = check_axioms(euclid, pts, 0.1)
    assert r.classification == "metric"
    assert r.identity_defect == 0 and r.symmetry_defect == 0 and not r.positivity_violations


def test_plus_one_toy_is_a_metric():
    pts = list(np.random.default_rng(1).standard_normal((15, 2)))
    for eps in (0.5, 1.0, 2.0):
        r = check_axioms(plus_one, pts, eps)
        assert r.triangle_defect == 0.0 == brute_force_defect(plus_one, pts)
        assert r.classification == "metric"


def test_far_jump_toy():
    pts = list(np.random.default_rng(1).uniform(0, 2, (25, 2)))
    r = check_axioms(far_jump, pts, 1.0)
    assert r.triangle_defect == pytest.approx(brute_force_defect(far_jump, pts), abs=1e-12)
    assert 0 < r.triangle_defect <= 1.0
    assert r.classification == "ε-semimetric"
    assert check_axioms(far_jump, pts, r.triangle_defect / 2).classification == "semimetric"
    x, y, z = (pts[k] for k in r.worst_triple)
    assert far_jump(x, y) - far_jump(x, z) - far_jump(z, y) == pytest.approx(r.triangle_defect)


def test_one_sided_toy_is_quasimetric_with_witness():
    pts = list(np.random.default_rng(2).standard_normal((10, 2)))
    r = check_axioms(one_sided, pts, 0.1)
    assert r.classification in ("quasimetric", "premetric")
    i, j, dij, dji = r.asymmetry_witnesses[0]
    assert one_sided(pts[i], pts[j]) == dij != dji


def test_classification_ladder():
    assert classify(True, True, True, True, True) == "metric"
    assert classify(True, True, False, True, False) == "quasimetric"
    assert classify(True, True, False, False, False) == "premetric"
    assert classify(False, True, True, True, True) == "none"


def test_sampled_triples_beyond_exhaustive_limit():
    pts = list(np.random.default_rng(3).standard_normal((EXHAUSTIVE_LIMIT + 5, 2)))
    pts = [2 * p for p in pts]
    r = check_axioms(far_jump, pts, 1.0, n_triples=10_000, rng=np.random.default_rng(0))
    assert r.n_triples == 10_000
    assert 0 < r.triangle_defect <= 1.0


def test_too_small_sample():
    with pytest.raises(ValueError):
        check_axioms(euclid, [np.zeros(2), np.ones(2)])


@given(arrays(np.float64, (6, 2), elements=st.floats(-3, 3)))
@settings(max_examples=50, deadline=None)
def test_exhaustive_defect_matches_brute_force(points):
    pts = list(points)
    r = check_axioms(far_jump, pts, 1.0)
    assert r.triangle_defect == pytest.approx(brute_force_defect(far_jump, pts), abs=1e-9)
