import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from geodeck import (CutError, GeodesicPath, SurfacePoint, TangentDirection,
                     build_isosceles, cut_along_closed_geodesic, disc_curvature, enclosed_region,
                     geodesic_triangle, intrinsic_distance, model_angle, model_area,
                     realize_lattice_geodesic, trace_geodesic, vertex_point)
from geodeck.isosceles import LatticeGeodesicIndex
from geodeck.regions import boundary_turning_curvature, split_along_paths


def test_model_angles():
    assert model_angle(3, 4, 5) == pytest.approx(math.pi / 2, abs=1e-15)
    assert model_angle(1, 1, 1) == pytest.approx(math.pi / 3, abs=1e-15)
    assert model_angle(1, 1, 2) == pytest.approx(math.pi, abs=1e-15)
    assert model_angle(1, 1, 0) == 0.0


def test_model_areas():
    assert model_area(3, 4, 5) == pytest.approx(6.0, abs=1e-14)
    assert model_area(1, 1, 1) == pytest.approx(math.sqrt(3) / 4, abs=1e-15)
    assert model_area(1, 1, 2) == 0.0


def test_model_rejects_impossible_sides():
    with pytest.raises(ValueError):
        model_angle(1, 1, 3)
    with pytest.raises(ValueError):
        model_area(1, 2, 4)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.01, 0.99))
def test_model_triangle_law_of_cosines(a, b, t):
    c = abs(a - b) + t * (a + b - abs(a - b))
    g = model_angle(a, b, c)
    assert 0 <= g <= math.pi
    assert a * a + b * b - 2 * a * b * math.cos(g) == pytest.approx(c * c, abs=1e-9 * (a + b) ** 2)
    assert model_area(a, b, c) == pytest.approx(0.5 * a * b * math.sin(g), abs=1e-9 * (a + b) ** 2)


def _band(surface_spec=(1, 1, 1), m=1, n=0, offset=0.5):
    spec, surface = build_isosceles(*surface_spec)
    return surface, realize_lattice_geodesic(spec, LatticeGeodesicIndex(m, n, offset), surface)


def test_cut_regular_tetrahedron_band():
    surface, path = _band()
    discs = cut_along_closed_geodesic(surface, path)
    assert len(discs) == 2
    for d in discs:
        assert d.euler_characteristic == 1
        assert disc_curvature(d) == pytest.approx(2 * math.pi, abs=1e-9)
        singular = [v for v in d.interior_vertices()
                    if abs(2 * math.pi - d.mesh.total_angle(v)) > 1e-8]
        assert len(singular) == 2
        assert d.boundary_length() == pytest.approx(2.0, abs=1e-12)
    assert sum(d.area for d in discs) == pytest.approx(surface.area, rel=1e-12)


def test_cut_doubled_square_billiard(dsquare):
    f = next(f for f in range(dsquare.n_faces)
             if np.linalg.det(np.column_stack([
                 *(dsquare.vertices[dsquare.faces[f]][1:, :2] - dsquare.vertices[dsquare.faces[f]][0, :2])
             ])) > 0)
    P = dsquare.vertices[dsquare.faces[f]][:, :2]
    c = P.mean(axis=0)
    M = np.column_stack([P[1] - P[0], P[2] - P[0]])
    l1, l2 = np.linalg.solve(M, c - P[0])
    fr = dsquare.frames[f]
    R = np.column_stack([fr[1] - fr[0], fr[2] - fr[0]]) @ np.linalg.inv(M)
    path = trace_geodesic(dsquare, SurfacePoint(f, (1 - l1 - l2, l1, l2)),
                          TangentDirection(f, R @ np.array([1.0, 0.0])), 10)
    assert path.closed and path.total_length == pytest.approx(2.0)
    discs = cut_along_closed_geodesic(dsquare, path)
    for d in discs:
        defects = [2 * math.pi - d.mesh.total_angle(v) for v in d.interior_vertices()]
        sing = [x for x in defects if abs(x) > 1e-8]
        assert sing == pytest.approx([math.pi, math.pi], abs=1e-9)
        assert disc_curvature(d) == pytest.approx(2 * math.pi, abs=1e-9)


def test_cut_rejects_open_path(tet):
    path = trace_geodesic(tet, SurfacePoint(0, (0.3, 0.3, 0.4)), TangentDirection(0, (1, 0.2)),
                          0.5, detect_closure=False)
    with pytest.raises(CutError):
        cut_along_closed_geodesic(tet, path)


def _in_face(f, *bs):
    return [SurfacePoint(f, b) for b in bs]


def test_tiny_triangle_and_complement(box):
    x, y, z = _in_face(0, (0.6, 0.2, 0.2), (0.2, 0.6, 0.2), (0.2, 0.2, 0.6))
    tri = geodesic_triangle(box, x, y, z)
    assert tri.region.area == pytest.approx(tri.model.area, rel=1e-12)
    assert tri.excess == pytest.approx(0.0, abs=1e-9)
    far = SurfacePoint(5, (1 / 3, 1 / 3, 1 / 3))
    comp = geodesic_triangle(box, x, y, z, seed=far)
    assert comp.region.area == pytest.approx(box.area - tri.model.area, rel=1e-12)


def point_at(surface, xyz):
    """Surface point at a 3D position on the mesh."""
    xyz = np.asarray(xyz, float)
    for f in range(surface.n_faces):
        P = surface.vertices[surface.faces[f]]
        A = np.vstack([P.T, np.ones(3)])
        b, *_ = np.linalg.lstsq(A, np.append(xyz, 1.0), rcond=None)
        if b.min() >= -1e-12 and np.allclose(b @ P, xyz, atol=1e-12):
            return SurfacePoint(f, tuple(np.clip(b, 0, None) / np.clip(b, 0, None).sum()))
    raise AssertionError(f"{xyz} is not on the surface")


def test_triangle_around_cube_corner(box):
    corner = box.vertices[0]
    inward = np.sign(box.vertices.mean(axis=0) - corner)
    pts = [point_at(box, corner + 0.5 * inward * np.array(m))
           for m in ([1, 1, 0], [1, 0, 1], [0, 1, 1])]
    tri = geodesic_triangle(box, *pts)
    region = tri.region
    singular = [u for u in region.interior_vertices()
                if abs(2 * math.pi - region.mesh.total_angle(u)) > 1e-8]
    assert len(singular) == 1
    assert disc_curvature(region) == pytest.approx(math.pi / 2, abs=1e-9)
    assert tri.excess == pytest.approx(disc_curvature(region), abs=1e-6)
    assert region.area >= tri.model.area


def test_face_centres_around_tetrahedron_vertex(tet):
    v = 0
    pts = [SurfacePoint(f, (1 / 3, 1 / 3, 1 / 3)) for f, _ in tet.vertex_faces[v]]
    tri = geodesic_triangle(tet, *pts)
    assert tri.excess == pytest.approx(math.pi, abs=1e-6)
    assert disc_curvature(tri.region) == pytest.approx(math.pi, abs=1e-9)


def test_degenerate_triangle(tet):
    x = SurfacePoint(0, (0.3, 0.3, 0.4))
    with pytest.raises(CutError):
        geodesic_triangle(tet, x, x, SurfacePoint(1, (0.3, 0.3, 0.4)))


def test_broken_geodesic_boundary_matches_turning(ico):
    # quadrilateral of minimizing sides; Gauss-Bonnet from the corner angles
    rng = np.random.default_rng(5)
    f = 0
    pts = [SurfacePoint(f, (0.7, 0.2, 0.1))]
    pts += [SurfacePoint(int(ico.neighbor[f, k]), (1 / 3, 1 / 3, 1 / 3)) for k in range(3)]
    sides = [intrinsic_distance(ico, pts[i], pts[(i + 1) % 4])[1] for i in range(4)]
    disc = enclosed_region(ico, sides)
    assert disc_curvature(disc) == pytest.approx(boundary_turning_curvature(disc), abs=1e-6)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_cut_pieces_partition_the_surface(seed):
    rng = np.random.default_rng(seed)
    sides = tuple(float(x) for x in rng.uniform(0.8, 1.2, 3))
    a2, b2, c2 = (x * x for x in sides)
    assume(min(b2 + c2 - a2, a2 + c2 - b2, a2 + b2 - c2) > 0.1)
    m, n = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1)][seed % 5]
    surface, path = _band(sides, m, n, offset=float(rng.uniform(0.1, 0.9)))
    discs = cut_along_closed_geodesic(surface, path)
    assert sum(d.area for d in discs) == pytest.approx(surface.area, rel=1e-9)
    for d in discs:
        assert disc_curvature(d) == pytest.approx(2 * math.pi, abs=1e-6)
        assert d.boundary_length() == pytest.approx(path.total_length, rel=1e-9)


def test_split_without_paths_returns_surface(tet):
    res = split_along_paths(tet, [])
    assert len(res.components) == 1
    assert res.components[0].area == pytest.approx(tet.area)
