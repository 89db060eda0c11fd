import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from passive_tof.geometry import (
    BistaticGeometry,
    DegenerateDenominator,
    NoIntersection,
    NonPositiveDepth,
    RangeBelowBaseline,
    baseline_distance,
    bistatic_total_path,
    correct_depth,
    correct_depth_array,
    oracle_depth_bisection,
    oracle_depth_bisection_array,
    target_from_depth,
)

REFERENCE = BistaticGeometry((0.0, 0.0, -0.10), (0.0, 0.0, 0.0))
SIDE = BistaticGeometry((0.1, 0.0, 0.0), (0.0, 0.0, 0.0))
SIDE_PATH = 0.2 + math.sqrt(0.05)

coord = st.floats(-2.0, 2.0, allow_nan=False)
points = st.tuples(coord, coord, coord)


@st.composite
def unit_vectors(draw):
    v = np.array(draw(st.tuples(coord, coord, coord)))
    norm = np.linalg.norm(v)
    assume(norm > 1e-3)
    return v / norm


def test_baseline_examples():
    assert baseline_distance((0, 0, -0.10), (0, 0, 0)) == pytest.approx(0.10, abs=1e-15)
    assert baseline_distance((1.5, -2, 3), (1.5, -2, 3)) == 0.0
    assert baseline_distance((3, 4, 0), (0, 0, 0)) == 5.0
    assert REFERENCE.baseline == pytest.approx(0.10, abs=1e-15)


def test_total_path_examples():
    assert bistatic_total_path(REFERENCE, (0, 0, 0.2)) == pytest.approx(0.50, abs=1e-15)
    assert bistatic_total_path(REFERENCE, REFERENCE.receiver) == pytest.approx(REFERENCE.baseline, abs=1e-15)
    assert bistatic_total_path(SIDE, (0, 0, 0.2)) == pytest.approx(0.4236068, abs=1e-7)


@pytest.mark.parametrize(
    "geom, n, d, expected",
    [
        (REFERENCE, (0, 0, 1), 0.50, 0.20),
        (BistaticGeometry((0.3, -0.1, 2.0), (0.3, -0.1, 2.0)), (0.6, 0.0, 0.8), 0.40, 0.20),
        (SIDE, (0, 0, 1), SIDE_PATH, 0.20),
    ],
)
def test_correct_depth_examples(geom, n, d, expected):
    assert correct_depth(geom, n, d) == pytest.approx(expected, rel=1e-12)
    assert oracle_depth_bisection(geom, n, d) == pytest.approx(expected, abs=1e-9)


def test_reference_example_by_hand():
    # (0.01 - 0.25) / (-0.20 - 1.00)
    assert correct_depth(REFERENCE, (0, 0, 1), 0.5) == pytest.approx((0.01 - 0.25) / (-0.2 - 1.0), rel=1e-15)


def test_target_from_depth():
    np.testing.assert_allclose(target_from_depth((0, 0, 0), (0, 0, 1), 0.2), (0, 0, 0.2))
    np.testing.assert_allclose(target_from_depth((1, 1, 1), (1, 0, 0), 0.5), (1.5, 1, 1))
    n = np.array([0.00175, 0.0, 0.025]) / math.hypot(0.00175, 0.025)
    np.testing.assert_allclose(target_from_depth((0, 0, 0), n, 0.2), (0.0139658, 0, 0.1995118), atol=5e-8)
    with pytest.raises(NonPositiveDepth):
        target_from_depth((0, 0, 0), (0, 0, 1), 0.0)


def test_errors():
    with pytest.raises(RangeBelowBaseline):
        correct_depth(REFERENCE, (0, 0, 1), 0.10)
    with pytest.raises(RangeBelowBaseline):
        correct_depth(REFERENCE, (0, 0, 1), 0.05)
    # ray pointing straight at the emitter: 2G - 2d = 2b - 2d -> 0 as d -> b
    with pytest.raises(DegenerateDenominator):
        correct_depth(REFERENCE, (0, 0, -1), 0.10 + 1e-12, eps_tri=1e-13, eps_den=1e-11)
    with pytest.raises(RangeBelowBaseline):
        oracle_depth_bisection(REFERENCE, (0, 0, 1), 0.09)
    with pytest.raises(ValueError):
        correct_depth(REFERENCE, (0, 0, 2), 0.5)


def test_bisection_reports_missing_bracket():
    # bypass the range check: d below baseline gives f(d) < 0
    assert np.isnan(oracle_depth_bisection_array(REFERENCE.emitter, REFERENCE.receiver, (0, 0, 1), 0.05))
    assert issubclass(NoIntersection, ValueError)


def test_array_matches_scalar():
    rng = np.random.default_rng(3)
    e, r = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
    n = rng.normal(size=(50, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    t = rng.uniform(0.1, 2, 50)
    geom = BistaticGeometry(e, r)
    d = np.array([bistatic_total_path(geom, r + ti * ni) for ti, ni in zip(t, n)])
    batch = correct_depth_array(e, r, n, d)
    for i in range(50):
        assert batch[i] == pytest.approx(correct_depth(geom, n[i], d[i]), rel=1e-14)
    bad = correct_depth_array(e, r, n[:2], np.array([0.0, np.nan]))
    assert np.all(np.isnan(bad))


@settings(max_examples=300, deadline=None)
@given(points, points, unit_vectors(), st.floats(0.01, 10.0))
def test_round_trip(e, r, n, t_true):
    geom = BistaticGeometry(e, r)
    d = bistatic_total_path(geom, target_from_depth(r, n, t_true))
    assume(d > geom.baseline * (1 + 1e-6) + 1e-9)
    g = float((np.array(e) - np.array(r)) @ n)
    assume(abs(2 * g - 2 * d) > 1e-6)
    t = correct_depth(geom, n, d)
    assert t == pytest.approx(t_true, rel=1e-9)
    # reconstructed point sits on the ellipsoid
    assert bistatic_total_path(geom, target_from_depth(r, n, t)) == pytest.approx(d, rel=1e-9)
    assert abs(oracle_depth_bisection(geom, n, d) - t) / d < 1e-9


@settings(max_examples=200, deadline=None)
@given(points, unit_vectors(), st.floats(1e-3, 20.0))
def test_monostatic_reduction(p, n, d):
    geom = BistaticGeometry(p, p)
    assert correct_depth(geom, n, d) == pytest.approx(d / 2, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(points, points, unit_vectors(), st.floats(0.05, 5.0), st.floats(0.01, 100.0))
def test_similarity_equivariance(e, r, n, t_true, s):
    geom = BistaticGeometry(e, r)
    d = bistatic_total_path(geom, target_from_depth(r, n, t_true))
    assume(d > geom.baseline * (1 + 1e-6) + 1e-9)
    scaled = BistaticGeometry(np.array(e) * s, np.array(r) * s)
    assert correct_depth(scaled, n, d * s) == pytest.approx(s * correct_depth(geom, n, d), rel=1e-12)


def _rotation(a, b, c):
    rx = np.array([[1, 0, 0], [0, math.cos(a), -math.sin(a)], [0, math.sin(a), math.cos(a)]])
    ry = np.array([[math.cos(b), 0, math.sin(b)], [0, 1, 0], [-math.sin(b), 0, math.cos(b)]])
    rz = np.array([[math.cos(c), -math.sin(c), 0], [math.sin(c), math.cos(c), 0], [0, 0, 1]])
    return rz @ ry @ rx


angles = st.floats(-math.pi, math.pi)


@settings(max_examples=200, deadline=None)
@given(points, points, unit_vectors(), st.floats(0.05, 5.0), angles, angles, angles, points)
def test_rigid_invariance(e, r, n, t_true, a, b, c, shift):
    geom = BistaticGeometry(e, r)
    d = bistatic_total_path(geom, target_from_depth(r, n, t_true))
    assume(d > geom.baseline * (1 + 1e-6) + 1e-9)
    rot = _rotation(a, b, c)
    moved = BistaticGeometry(rot @ np.array(e) + shift, rot @ np.array(r) + shift)
    n2 = rot @ n
    n2 = n2 / np.linalg.norm(n2)
    assert correct_depth(moved, n2, d) == pytest.approx(correct_depth(geom, n, d), rel=1e-10)


def test_oracle_equivalence_random_draws():
    rng = np.random.default_rng(7)
    e = rng.uniform(-1, 1, (2000, 3))
    r = rng.uniform(-1, 1, (2000, 3))
    n = rng.normal(size=(2000, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    b = np.linalg.norm(e - r, axis=1)
    # total path drawn directly, not from a target point
    d = b * (1 + 10 ** rng.uniform(-6, 1, 2000))
    g = np.sum((e - r) * n, axis=1)
    keep = np.abs(2 * g - 2 * d) > 1e-6
    fast = correct_depth_array(e[keep], r[keep], n[keep], d[keep])
    slow = oracle_depth_bisection_array(e[keep], r[keep], n[keep], d[keep])
    assert np.all(np.abs(fast - slow) / d[keep] < 1e-9)
