"""Isosceles tetrahedra: construction, lattice spectra of simple closed
geodesics, and recovery of the face triangle from a flat surface with four
singular points.

The face triangle tiles the plane; the tetrahedron is the quotient of the
plane by the half-turns about tile vertices. Writing ``e1, e2`` for two
edges of the tile at a common corner, translations of the quotient group
form the lattice spanned by ``2*e1, 2*e2``. A straight line in the direction
of a primitive vector ``w = m*(2*e1) + n*(2*e2)`` that avoids the tile
vertices closes up on the surface after length ``|w|``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .development import (GeodesicPath, Segment, SurfacePoint, TangentDirection,
                          path_self_distance, to_frame, vertex_point)
from .regions import split_along_paths
from .shortest_path import intrinsic_distance
from .surface import PolyhedralSurface, curvature_report


class NotAcuteError(ValueError):
    pass


class ReconstructionError(ValueError):
    pass


@dataclass(frozen=True)
class IsoscelesSpec:
    a: float
    b: float
    c: float
    degenerate: bool = False

    def __post_init__(self):
        if not self.degenerate and min(self.box_squares) <= 0:
            raise NotAcuteError(f"triangle ({self.a}, {self.b}, {self.c}) is not acute")

    @property
    def box_squares(self):
        a2, b2, c2 = self.a ** 2, self.b ** 2, self.c ** 2
        return ((b2 + c2 - a2) / 2, (a2 + c2 - b2) / 2, (a2 + b2 - c2) / 2)

    @property
    def box(self):
        return tuple(math.sqrt(max(x, 0.0)) for x in self.box_squares)

    @property
    def vertices(self):
        p, q, r = self.box
        return np.array([[0, 0, 0], [p, q, 0], [p, 0, r], [0, q, r]], dtype=float)

    @property
    def tile_basis(self):
        """Edges ``e1`` (length c) and ``e2`` (length b) of the face at vertex 0."""
        cosA = (self.b ** 2 + self.c ** 2 - self.a ** 2) / (2 * self.b * self.c)
        sinA = math.sqrt(max(1 - cosA * cosA, 0.0))
        return np.array([self.c, 0.0]), np.array([self.b * cosA, self.b * sinA])

    @property
    def translation_basis(self):
        e1, e2 = self.tile_basis
        return 2 * e1, 2 * e2

    def to_dict(self):
        p, q, r = self.box
        return {"a": self.a, "b": self.b, "c": self.c, "p": p, "q": q, "r": r,
                "degenerate": self.degenerate}


@dataclass(frozen=True)
class LatticeGeodesicIndex:
    m: int
    n: int
    offset: float = 0.5

    def __post_init__(self):
        if (self.m, self.n) == (0, 0):
            raise ValueError("(m, n) must be nonzero")
        if math.gcd(self.m, self.n) != 1:
            raise ValueError(f"({self.m}, {self.n}) is not a primitive pair")
        if not 0.0 <= self.offset < 1.0:
            raise ValueError("offset must lie in [0, 1)")


def build_isosceles(a, b, c):
    """Tetrahedron with all four faces congruent to the acute triangle (a, b, c).

    Face 0 is ``(0, 1, 2)`` with ``|v0 v1| = c``, ``|v0 v2| = b``.
    """
    spec = IsoscelesSpec(float(a), float(b), float(c))
    V = spec.vertices
    centroid = V.mean(axis=0)
    faces = []
    for tri in ((0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)):
        i, j, k = tri
        n = np.cross(V[j] - V[i], V[k] - V[i])
        faces.append(tri if n @ (V[i] - centroid) > 0 else (i, k, j))
    if faces[0] != (0, 1, 2):
        raise AssertionError("face 0 must be outward as (0, 1, 2)")
    return spec, PolyhedralSurface(V, faces)


def is_isosceles(points, rtol=1e-9):
    """Whether the three opposite-edge pairs match; returns ``(flag, mismatch)``."""
    P = np.asarray(points, dtype=float).reshape(4, 3)
    vol = abs(np.linalg.det(P[1:] - P[0])) / 6
    scale = max(np.linalg.norm(P[i] - P[j]) for i in range(4) for j in range(i))
    if vol <= 1e-12 * scale ** 3:
        raise ValueError("degenerate (coplanar) tetrahedron")
    worst = 0.0
    for (i, j), (k, l) in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
        d1 = np.linalg.norm(P[i] - P[j])
        d2 = np.linalg.norm(P[k] - P[l])
        worst = max(worst, abs(d1 - d2) / max(d1, d2))
    return worst <= rtol, float(worst)


# spectrum -----------------------------------------------------------------

def lattice_length(spec, m, n):
    E1, E2 = spec.translation_basis
    return float(np.linalg.norm(m * E1 + n * E2))


def enumerate_closed_geodesics(spec, max_length):
    """Primitive lattice classes whose closed geodesics have length <= max_length.

    Each class is listed once (``n > 0``, or ``n == 0`` and ``m > 0``), sorted
    by ``(length, m, n)``.
    """
    E1, E2 = spec.translation_basis
    det = abs(E1[0] * E2[1] - E1[1] * E2[0])
    mmax = int(math.ceil(max_length * np.linalg.norm(E2) / det)) + 1
    nmax = int(math.ceil(max_length * np.linalg.norm(E1) / det)) + 1
    ms = np.arange(-mmax, mmax + 1)
    ns = np.arange(0, nmax + 1)
    M, N = np.meshgrid(ms, ns, indexing="ij")
    M, N = M.ravel(), N.ravel()
    keep = (N > 0) | ((N == 0) & (M > 0))
    keep &= np.gcd(M, N) == 1
    M, N = M[keep], N[keep]
    W = M[:, None] * E1 + N[:, None] * E2
    L = np.hypot(W[:, 0], W[:, 1])
    sel = L <= max_length
    out = sorted(zip(L[sel].tolist(), M[sel].tolist(), N[sel].tolist()))
    return [(LatticeGeodesicIndex(int(m), int(n)), float(length)) for length, m, n in out]


# realization --------------------------------------------------------------

_RETRY_SHIFT = (math.sqrt(5) - 1) / 2


def _vertex_of_class(surface, i, j):
    """Mesh vertex for the tile corner ``i*e1 + j*e2`` (face 0 = (0, 1, 2))."""
    table = {(0, 0): 0, (1, 0): 1, (0, 1): 2, (1, 1): 3}
    return table[(i % 2, j % 2)]


def _face_lookup(surface):
    return {frozenset(int(v) for v in f): idx for idx, f in enumerate(surface.faces)}


def _tile_corners(i, j, upper):
    if upper:
        return [(i + 1, j), (i + 1, j + 1), (i, j + 1)]
    return [(i, j), (i + 1, j), (i, j + 1)]


def _plane_to_face(surface, faces_by_set, corners, bary_tile):
    """Face index and barycentric coordinates (in face order) of a tile point."""
    vs = [_vertex_of_class(surface, i, j) for i, j in corners]
    f = faces_by_set[frozenset(vs)]
    order = [int(v) for v in surface.faces[f]]
    b = [0.0, 0.0, 0.0]
    for v, w in zip(vs, bary_tile):
        b[order.index(v)] = w
    b = np.clip(np.array(b), 0.0, None)
    return f, tuple(b / b.sum()), vs


def realize_lattice_geodesic(spec, index, surface=None, max_retries=8):
    """Closed geodesic of class ``index`` on the tetrahedron of ``spec``.

    The line is laid out in the tiled plane and its pieces are mapped to
    mesh faces tile by tile; no tracing on the mesh is involved.
    """
    if surface is None:
        surface = build_isosceles(spec.a, spec.b, spec.c)[1]
    e1, e2 = spec.tile_basis
    E1, E2 = spec.translation_basis
    w = index.m * E1 + index.n * E2
    Lw = float(np.linalg.norm(w))
    u = w / Lw
    nu = np.array([-u[1], u[0]])
    det = abs(e1[0] * e2[1] - e1[1] * e2[0])
    h = det / (Lw / 2)
    basis = np.column_stack([e1, e2])
    inv = np.linalg.inv(basis)
    faces_by_set = _face_lookup(surface)

    offset = index.offset
    for _ in range(max_retries + 1):
        if h * min(offset, 1 - offset) > 1e-9 and offset > 0:
            break
        offset = (offset + _RETRY_SHIFT) % 1.0
    else:
        raise ValueError("could not place the line away from tile vertices")

    base = offset * h * nu
    a0, da = inv @ base, inv @ u          # lattice coordinates along the line

    def crossings(t0, t1):
        ts = []
        for coef0, coef1 in ((a0[0], da[0]), (a0[1], da[1]), (a0[0] + a0[1], da[0] + da[1])):
            if abs(coef1) < 1e-15:
                continue
            lo, hi = sorted((coef0 + coef1 * t0, coef0 + coef1 * t1))
            for kk in range(math.floor(lo) + 1, math.ceil(hi)):
                ts.append((kk - coef0) / coef1)
        pad = 1e-12 * max(Lw, 1.0)
        return sorted(t for t in ts if t0 + pad < t < t1 - pad)

    first = crossings(0.0, Lw)
    t_start = first[0] if first else 0.0
    ts = [t_start] + crossings(t_start, t_start + Lw) + [t_start + Lw]

    segments = []
    for t_in, t_out in zip(ts[:-1], ts[1:]):
        mid = a0 + da * (0.5 * (t_in + t_out))
        i, j = math.floor(mid[0]), math.floor(mid[1])
        upper = (mid[0] - i) + (mid[1] - j) > 1
        corners = _tile_corners(i, j, upper)
        C = np.array(corners, dtype=float)

        def bary(t):
            x = a0 + da * t
            M = np.column_stack([C[1] - C[0], C[2] - C[0]])
            l1, l2 = np.linalg.solve(M, x - C[0])
            return (1 - l1 - l2, l1, l2)

        f, b_in, _ = _plane_to_face(surface, faces_by_set, corners, bary(t_in))
        f2, b_out, _ = _plane_to_face(surface, faces_by_set, corners, bary(t_out))
        segments.append(Segment(f, b_in, b_out))

    # direction in the first face's frame
    first_seg = segments[0]
    tri = surface.frames[first_seg.face]
    xy_in = np.asarray(first_seg.entry) @ tri
    xy_out = np.asarray(first_seg.exit) @ tri
    d = xy_out - xy_in
    path = GeodesicPath(segments, Lw, True,
                        TangentDirection(first_seg.face, d),
                        meta={"m": index.m, "n": index.n, "offset": offset})
    return path


def check_realization(surface, path, tol=1e-9):
    """Closure residual and self-distance of a realized closed geodesic."""
    a = path.segments[0]
    z = path.segments[-1]
    pa = np.asarray(a.entry) @ surface.vertices[surface.faces[a.face]]
    pz = np.asarray(z.exit) @ surface.vertices[surface.faces[z.face]]
    return {
        "closure_residual": float(np.linalg.norm(pa - pz)),
        "self_distance": path_self_distance(surface, path),
        "simple": path_self_distance(surface, path) > tol,
    }


# reconstruction -----------------------------------------------------------

def develop_disc(disc):
    """Planar positions of a flat disc's vertices by breadth-first unfolding.

    Returns ``(positions, max_inconsistency)``.
    """
    m = disc.mesh
    placed = {0: (np.eye(2), np.zeros(2))}
    queue = deque([0])
    while queue:
        f = queue.popleft()
        R, t = placed[f]
        for k in range(3):
            g = int(m.neighbor[f, k])
            if g < 0 or g in placed:
                continue
            Rg, tg = m.glue_rot[f, k], m.glue_trans[f, k]
            # x_f = R^T-chain: plane = R x_f + t, and x_g = Rg x_f + tg
            R2 = R @ Rg.T
            placed[g] = (R2, t - R2 @ tg)
            queue.append(g)
    pos = {}
    worst = 0.0
    for f, (R, t) in placed.items():
        for k in range(3):
            v = int(m.faces[f, k])
            x = R @ m.frames[f, k] + t
            if v in pos:
                worst = max(worst, float(np.linalg.norm(pos[v] - x)))
            else:
                pos[v] = x
    return pos, worst


def reconstruct_from_flat_surface(surface, tol=1e-6, depth=32):
    """Recover the face triangle of a flat surface with four cone points of angle pi.

    The surface is cut along minimizing geodesics from the lowest-index
    singular vertex to the other three and developed into the plane; the
    development must be a triangle with the other singular points at the
    midpoints of its sides.
    """
    rep = curvature_report(surface)
    d = rep.defects
    sing = [int(v) for v in np.nonzero(np.abs(d) > tol)[0]]
    if len(sing) != 4 or any(abs(d[v] - math.pi) > tol for v in sing):
        raise ReconstructionError(
            f"need exactly 4 singular points of curvature pi, found {len(sing)}")
    p, others = sing[0], sing[1:]
    paths = [intrinsic_distance(surface, vertex_point(surface, p), vertex_point(surface, v),
                                depth=depth)[1] for v in others]
    cut = split_along_paths(surface, paths)
    if len(cut.components) != 1:
        raise ReconstructionError("cut did not produce a single disc")
    disc = cut.components[0]
    if disc.euler_characteristic != 1:
        raise ReconstructionError("cut surface is not a disc")
    pos, worst = develop_disc(disc)
    if worst > tol:
        raise ReconstructionError(f"development is not single-valued ({worst:.2e})")
    loop = disc.boundary
    corners = [v for v in loop if abs(disc.inner_angle(v) - math.pi) > tol]
    if len(corners) != 3 or any(disc.parent_node[v] != p for v in corners):
        raise ReconstructionError("development does not form a triangle")
    P = [pos[v] for v in corners]
    sides = []
    for i in range(3):
        A, B = P[i], P[(i + 1) % 3]
        mid = 0.5 * (A + B)
        # boundary vertices strictly between the corners must lie on AB
        ia, ib = loop.index(corners[i]), loop.index(corners[(i + 1) % 3])
        between = [loop[(ia + s) % len(loop)] for s in range(1, (ib - ia) % len(loop))]
        AB = B - A
        for v in between:
            off = abs(AB[0] * (pos[v] - A)[1] - AB[1] * (pos[v] - A)[0]) / np.linalg.norm(AB)
            if off > tol:
                raise ReconstructionError("development side is not straight")
        hits = [v for v in between if disc.parent_node[v] in others
                and np.linalg.norm(pos[v] - mid) <= tol]
        if len(hits) != 1:
            raise ReconstructionError("singular point is not at a side midpoint")
        sides.append(float(np.linalg.norm(AB)) / 2)
    a, b, c = sides
    sq = IsoscelesSpec(a, b, c, degenerate=True).box_squares
    degenerate = min(sq) <= 1e-9 * max(sides) ** 2
    return IsoscelesSpec(a, b, c, degenerate=degenerate)
