import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geodeck import (DepthExceeded, SurfacePoint, brute_force_distance_oracle, distance_search,
                     intrinsic_distance, random_hull, regular_tetrahedron, vertex_point)
from geodeck.development import segment_length, to_3d

SQRT5 = math.sqrt(5.0)


def _sample(surface, rng):
    f = int(rng.integers(surface.n_faces))
    return SurfacePoint(f, tuple(rng.dirichlet([1.5, 1.5, 1.5])))


def _opposite_corner(box, v):
    far = np.argmax(np.linalg.norm(box.vertices - box.vertices[v], axis=1))
    return int(far)


def test_same_face_is_euclidean(box):
    a = SurfacePoint(2, (0.6, 0.3, 0.1))
    b = SurfacePoint(2, (0.1, 0.2, 0.7))
    L, path = intrinsic_distance(box, a, b)
    assert L == pytest.approx(np.linalg.norm(to_3d(box, a) - to_3d(box, b)), abs=1e-15)
    assert len(path.segments) == 1
    assert brute_force_distance_oracle(box, a, b, k=0) == pytest.approx(L, abs=1e-15)


def test_cube_opposite_corners(box):
    w = _opposite_corner(box, 0)
    L, path = intrinsic_distance(box, vertex_point(box, 0), vertex_point(box, w))
    assert L == pytest.approx(SQRT5, abs=1e-9)
    assert sum(segment_length(box, s) for s in path.segments) == pytest.approx(SQRT5, abs=1e-12)
    assert brute_force_distance_oracle(box, vertex_point(box, 0), vertex_point(box, w), k=6) == \
        pytest.approx(SQRT5, abs=1e-9)


def test_identical_points_have_zero_distance(box):
    a = SurfacePoint(4, (0.2, 0.3, 0.5))
    L, path = intrinsic_distance(box, a, a)
    assert L == 0.0
    assert path.total_length == 0.0
    assert all(segment_length(box, s) == 0.0 for s in path.segments)


def test_tetrahedron_opposite_edge_midpoints():
    tet = regular_tetrahedron(1.0)
    F = tet.faces
    # midpoint of edge (v0, v1) and of the opposite edge (v2, v3)
    v = [int(x) for x in F[0]]
    w = [u for u in range(4) if u not in v[:2]]
    def mid(i, j):
        for f in range(tet.n_faces):
            row = list(map(int, tet.faces[f]))
            if i in row and j in row:
                b = [0.0] * 3
                b[row.index(i)] = b[row.index(j)] = 0.5
                return SurfacePoint(f, tuple(b))
    a, b = mid(v[0], v[1]), mid(*w)
    L, _ = intrinsic_distance(tet, a, b)
    assert L == pytest.approx(1.0, abs=1e-12)
    assert brute_force_distance_oracle(tet, a, b, k=6) == pytest.approx(1.0, abs=1e-12)


def test_depth_limit_is_reported(box):
    w = _opposite_corner(box, 0)
    with pytest.raises(DepthExceeded):
        distance_search(box, vertex_point(box, 0), vertex_point(box, w), depth=1)


def test_runner_up_reports_ties(box):
    # opposite corners of the cube are joined by six minimizers
    w = _opposite_corner(box, 0)
    res = distance_search(box, vertex_point(box, 0), vertex_point(box, w), tie_tol=1e-9)
    assert res.runner_up - res.length <= 1e-9


@pytest.mark.parametrize("name", ["tet", "box", "ico", "dsquare", "dhex"])
def test_agrees_with_oracle(name, request):
    surface = request.getfixturevalue(name)
    rng = np.random.default_rng(11)
    for _ in range(15):
        a, b = _sample(surface, rng), _sample(surface, rng)
        L, _ = intrinsic_distance(surface, a, b)
        assert L == pytest.approx(brute_force_distance_oracle(surface, a, b, k=8), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_metric_axioms(seed):
    s = random_hull(12, seed % 40)
    rng = np.random.default_rng(seed)
    a, b, c = (_sample(s, rng) for _ in range(3))
    ab = intrinsic_distance(s, a, b)[0]
    ba = intrinsic_distance(s, b, a)[0]
    bc = intrinsic_distance(s, b, c)[0]
    ac = intrinsic_distance(s, a, c)[0]
    assert ab == pytest.approx(ba, abs=1e-12)
    assert ac <= ab + bc + 1e-12
    # intrinsic distance dominates the chord
    assert ab >= np.linalg.norm(to_3d(s, a) - to_3d(s, b)) - 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_path_length_matches_distance(seed):
    s = random_hull(10, seed % 40)
    rng = np.random.default_rng(seed)
    a, b = _sample(s, rng), _sample(s, rng)
    L, path = intrinsic_distance(s, a, b)
    assert sum(segment_length(s, seg) for seg in path.segments) == pytest.approx(L, abs=1e-10)
    assert np.allclose(to_3d(s, path.start_point), to_3d(s, a), atol=1e-10)
    assert np.allclose(to_3d(s, path.end_point), to_3d(s, b), atol=1e-10)
