"""Planar unfoldings, straight-line geodesic tracing and hinge angles.

Every face carries a planar frame (first corner at the origin, second on
the positive x-axis). Points are stored as ``(face, barycentric)`` and
directions as unit vectors in a face frame; the gluing isometries computed
by :class:`~geodeck.surface.PolyhedralSurface` move both between frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BARY_TOL = 1e-12
VERTEX_TOL = 1e-9
CLOSE_DIR_TOL = 1e-9
CLOSE_POS_TOL = 1e-9


class VertexHit(RuntimeError):
    """A traced geodesic ran into (or started at) a mesh vertex."""

    def __init__(self, msg, vertex=None, partial=None):
        super().__init__(msg)
        self.vertex = vertex
        self.partial = partial


class BoundaryHit(RuntimeError):
    """A traced geodesic reached a boundary edge of a surface with boundary."""

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


# value types --------------------------------------------------------------

@dataclass(frozen=True)
class SurfacePoint:
    face: int
    bary: tuple

    def __post_init__(self):
        b = tuple(float(x) for x in self.bary)
        if len(b) != 3 or min(b) < -BARY_TOL or abs(sum(b) - 1.0) > BARY_TOL * 10:
            raise ValueError(f"invalid barycentric coordinates {b}")
        object.__setattr__(self, "face", int(self.face))
        object.__setattr__(self, "bary", b)


@dataclass(frozen=True)
class TangentDirection:
    face: int
    vec: tuple

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=float)
        n = float(np.hypot(v[0], v[1]))
        if n == 0.0:
            raise ValueError("zero direction")
        object.__setattr__(self, "face", int(self.face))
        object.__setattr__(self, "vec", (float(v[0] / n), float(v[1] / n)))

    @property
    def array(self):
        return np.array(self.vec)

    def reversed(self):
        return TangentDirection(self.face, (-self.vec[0], -self.vec[1]))


@dataclass(frozen=True)
class PlanarIsometry:
    rot: np.ndarray
    trans: np.ndarray

    def __call__(self, xy):
        return np.asarray(xy) @ self.rot.T + self.trans

    def compose(self, other):
        """``self`` after ``other``."""
        return PlanarIsometry(self.rot @ other.rot, self.rot @ other.trans + self.trans)

    def inverse(self):
        rt = self.rot.T
        return PlanarIsometry(rt, -rt @ self.trans)

    @staticmethod
    def identity():
        return PlanarIsometry(np.eye(2), np.zeros(2))


@dataclass(frozen=True)
class Segment:
    face: int
    entry: tuple
    exit: tuple


@dataclass
class GeodesicPath:
    segments: list
    total_length: float
    closed: bool = False
    start_direction: TangentDirection | None = None
    end_direction: TangentDirection | None = None
    meta: dict = field(default_factory=dict)

    @property
    def start_point(self):
        s = self.segments[0]
        return SurfacePoint(s.face, s.entry)

    @property
    def end_point(self):
        s = self.segments[-1]
        return SurfacePoint(s.face, s.exit)

    def to_dict(self):
        return {
            "segments": [
                {"face": s.face, "entry": list(s.entry), "exit": list(s.exit)}
                for s in self.segments
            ],
            "total_length": float(self.total_length),
            "closed": bool(self.closed),
        }

    def reversed(self):
        segs = [Segment(s.face, s.exit, s.entry) for s in reversed(self.segments)]
        return GeodesicPath(
            segs, self.total_length, self.closed,
            self.end_direction.reversed() if self.end_direction else None,
            self.start_direction.reversed() if self.start_direction else None,
        )


# frames and points --------------------------------------------------------

def face_frame(surface, face):
    """Planar corner coordinates of ``face`` (copy of the cached frame)."""
    return surface.frames[face].copy()


def to_frame(surface, point):
    return np.asarray(point.bary) @ surface.frames[point.face]


def bary_in_face(surface, face, xy):
    """Barycentric coordinates of planar point ``xy`` in the frame of ``face``."""
    t = surface.frames[face]
    a = t[1] - t[0]
    b = t[2] - t[0]
    r = np.asarray(xy, dtype=float) - t[0]
    det = a[0] * b[1] - a[1] * b[0]
    l1 = (r[0] * b[1] - r[1] * b[0]) / det
    l2 = (a[0] * r[1] - a[1] * r[0]) / det
    return (1.0 - l1 - l2, l1, l2)


def point_from_frame(surface, face, xy, clamp=True):
    b = np.array(bary_in_face(surface, face, xy))
    if clamp:
        b = np.clip(b, 0.0, None)
        b /= b.sum()
    return SurfacePoint(face, tuple(b))


def to_3d(surface, point):
    return np.asarray(point.bary) @ surface.vertices[surface.faces[point.face]]


def locate(surface, point, tol=BARY_TOL):
    """Classify a point as ``("vertex", v)``, ``("edge", f, k, s)`` or ``("face", f)``.

    For edges, ``k`` is the local edge of the given face and ``s`` the
    parameter from corner ``k`` towards corner ``k + 1``.
    """
    b = point.bary
    small = [i for i in range(3) if b[i] <= tol]
    f = point.face
    if len(small) >= 2:
        k = [i for i in range(3) if i not in small][0]
        return ("vertex", int(surface.faces[f, k]))
    if len(small) == 1:
        opp = small[0]
        k = (opp + 1) % 3
        s = b[(k + 1) % 3] / (b[k] + b[(k + 1) % 3])
        return ("edge", f, k, s)
    return ("face", f)


def vertex_point(surface, v):
    f, k = surface.vertex_faces[v][0]
    b = [0.0, 0.0, 0.0]
    b[k] = 1.0
    return SurfacePoint(f, tuple(b))


def canonical_point(surface, point):
    """Re-express an edge/vertex point in its lowest-index incident face."""
    return containing_faces(surface, point)[0][1]


def containing_faces(surface, point):
    """All ``(face, SurfacePoint)`` representations of a point, face-sorted."""
    loc = locate(surface, point)
    if loc[0] == "face":
        return [(point.face, point)]
    if loc[0] == "vertex":
        v = loc[1]
        out = []
        for f, k in surface.vertex_faces[v]:
            b = [0.0, 0.0, 0.0]
            b[k] = 1.0
            out.append((f, SurfacePoint(f, tuple(b))))
        return sorted(out, key=lambda t: t[0])
    _, f, k, s = loc
    b = [0.0, 0.0, 0.0]
    b[k], b[(k + 1) % 3] = 1.0 - s, s
    out = [(f, SurfacePoint(f, tuple(b)))]
    g = int(surface.neighbor[f, k])
    if g >= 0:
        kk = int(surface.neighbor_edge[f, k])
        c = [0.0, 0.0, 0.0]
        c[kk], c[(kk + 1) % 3] = s, 1.0 - s
        out.append((g, SurfacePoint(g, tuple(c))))
    return sorted(out, key=lambda t: t[0])


def transfer_direction(surface, direction, face):
    """Express ``direction`` in the frame of an edge-adjacent (or same) face."""
    if direction.face == face:
        return direction
    f = direction.face
    for k in range(3):
        if surface.neighbor[f, k] == face:
            return TangentDirection(face, surface.glue_rot[f, k] @ direction.array)
    raise ValueError(f"faces {f} and {face} are not adjacent")


def unfold_across_edge(surface, from_face, to_face):
    """Isometry placing ``to_face`` in the frame of ``from_face``."""
    for k in range(3):
        if surface.neighbor[from_face, k] == to_face:
            glue = PlanarIsometry(surface.glue_rot[from_face, k], surface.glue_trans[from_face, k])
            return glue.inverse()
    raise ValueError(f"faces {from_face} and {to_face} are not adjacent")


# tracing ------------------------------------------------------------------

def _exit_edge(tri, O, d):
    best_t, best_k = math.inf, -1
    for k in range(3):
        a, b = tri[k], tri[(k + 1) % 3]
        e = b - a
        n = (e[1], -e[0])
        denom = n[0] * d[0] + n[1] * d[1]
        if denom <= 1e-15 * math.hypot(*e):
            continue
        t = (n[0] * (a[0] - O[0]) + n[1] * (a[1] - O[1])) / denom
        if t < best_t:
            best_t, best_k = t, k
    return max(best_t, 0.0), best_k


def _bary_exact(tri, xy, face_hint=None):
    a = tri[1] - tri[0]
    b = tri[2] - tri[0]
    r = xy - tri[0]
    det = a[0] * b[1] - a[1] * b[0]
    l1 = (r[0] * b[1] - r[1] * b[0]) / det
    l2 = (a[0] * r[1] - a[1] * r[0]) / det
    bb = np.clip(np.array([1.0 - l1 - l2, l1, l2]), 0.0, None)
    return tuple(bb / bb.sum())


def trace_geodesic(surface, start, direction, budget, detect_closure=True,
                   close_pos_tol=None, close_dir_tol=CLOSE_DIR_TOL, max_steps=10_000_000):
    """Trace the straight continuation of ``direction`` from ``start``.

    The path stops after ``budget`` length, or earlier (``closed=True``) when
    it returns to ``start`` with the starting direction.

    Raises
    ------
    VertexHit
        If the path passes within 1e-9 of a vertex (or starts at one).
    BoundaryHit
        If the path leaves through a boundary edge.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    if locate(surface, start)[0] == "vertex":
        raise VertexHit("geodesic cannot start at a vertex")
    reps = dict(containing_faces(surface, start))
    if direction.face not in reps:
        raise ValueError("direction is not based at the start point's faces")
    if close_pos_tol is None:
        close_pos_tol = CLOSE_POS_TOL * max(surface.diameter_bound(), 1.0)
    start_xy = {f: to_frame(surface, p) for f, p in reps.items()}
    start_dir = {f: transfer_direction(surface, direction, f).array for f in reps}

    f = direction.face
    O = start_xy[f]
    entry_bary = reps[f].bary
    d = direction.array
    remaining = float(budget)
    length = 0.0
    segments = []

    for _ in range(max_steps):
        tri = surface.frames[f]
        t, k = _exit_edge(tri, O, d)
        if k < 0:
            raise RuntimeError("no exit edge found")
        if detect_closure and f in start_xy:
            sd = start_dir[f]
            cross = d[0] * sd[1] - d[1] * sd[0]
            if abs(math.atan2(cross, d @ sd)) < close_dir_tol:
                r = start_xy[f] - O
                along = r @ d
                perp = abs(d[0] * r[1] - d[1] * r[0])
                if (perp < close_pos_tol and along <= t + close_pos_tol
                        and length + along > close_pos_tol and along <= remaining + close_pos_tol):
                    if along > 0:
                        segments.append(Segment(f, entry_bary, reps[f].bary))
                    length += max(along, 0.0)
                    return GeodesicPath(segments, length, True, direction,
                                        TangentDirection(f, d))
        if remaining <= t:
            end = O + remaining * d
            segments.append(Segment(f, entry_bary, _bary_exact(tri, end)))
            length += remaining
            return GeodesicPath(segments, length, False, direction, TangentDirection(f, d))

        a, b = tri[k], tri[(k + 1) % 3]
        e = b - a
        X = O + t * d
        le = math.hypot(*e)
        s = float(np.clip((X - a) @ e / (le * le), 0.0, 1.0))
        partial = GeodesicPath(segments, length, False, direction, TangentDirection(f, d))
        if s * le < VERTEX_TOL or (1.0 - s) * le < VERTEX_TOL:
            v = surface.faces[f, k] if s * le < VERTEX_TOL else surface.faces[f, (k + 1) % 3]
            raise VertexHit(f"geodesic hits vertex {int(v)}", vertex=int(v), partial=partial)
        ex = [0.0, 0.0, 0.0]
        ex[k], ex[(k + 1) % 3] = 1.0 - s, s
        if t > 0:
            segments.append(Segment(f, entry_bary, tuple(ex)))
        length += t
        remaining -= t
        g = int(surface.neighbor[f, k])
        if g < 0:
            if remaining <= close_pos_tol:
                return GeodesicPath(segments, length + remaining, False, direction,
                                    TangentDirection(f, d))
            raise BoundaryHit("geodesic reached the boundary", partial=partial)
        kk = int(surface.neighbor_edge[f, k])
        d = surface.glue_rot[f, k] @ d
        d /= math.hypot(d[0], d[1])
        tg = surface.frames[g]
        O = tg[kk] + (1.0 - s) * (tg[(kk + 1) % 3] - tg[kk])
        en = [0.0, 0.0, 0.0]
        en[kk], en[(kk + 1) % 3] = s, 1.0 - s
        entry_bary = tuple(en)
        f = g
    raise RuntimeError("step limit exceeded")


def segment_direction(surface, seg):
    """Unit direction of a segment in its face frame (None if zero-length)."""
    tri = surface.frames[seg.face]
    v = np.asarray(seg.exit) @ tri - np.asarray(seg.entry) @ tri
    n = math.hypot(v[0], v[1])
    return None if n == 0 else TangentDirection(seg.face, v / n)


def path_start_direction(surface, path):
    for s in path.segments:
        d = segment_direction(surface, s)
        if d is not None:
            return d
    return None


def path_end_direction(surface, path):
    for s in reversed(path.segments):
        d = segment_direction(surface, s)
        if d is not None:
            return d
    return None


def segment_length(surface, seg):
    tri = surface.frames[seg.face]
    v = np.asarray(seg.exit) @ tri - np.asarray(seg.entry) @ tri
    return math.hypot(v[0], v[1])


# simplicity ---------------------------------------------------------------

def _seg_distance(P0, P1, Q0, Q1):
    """Pairwise minimum distance between planar segments (vectorized)."""
    def cross(u, v):
        return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]

    def pt_seg(p, a, b):
        ab = b - a
        den = np.einsum("...i,...i", ab, ab)
        t = np.where(den > 0, np.einsum("...i,...i", p - a, ab) / np.where(den > 0, den, 1), 0)
        t = np.clip(t, 0, 1)
        return np.linalg.norm(a + t[..., None] * ab - p, axis=-1)

    r = P1 - P0
    s = Q1 - Q0
    d1 = cross(r, Q0 - P0)
    d2 = cross(r, Q1 - P0)
    d3 = cross(s, P0 - Q0)
    d4 = cross(s, P1 - Q0)
    crossing = (d1 * d2 < 0) & (d3 * d4 < 0)
    dist = np.minimum.reduce([pt_seg(P0, Q0, Q1), pt_seg(P1, Q0, Q1),
                              pt_seg(Q0, P0, P1), pt_seg(Q1, P0, P1)])
    return np.where(crossing, 0.0, dist)


def path_self_distance(surface, path):
    """Smallest separation between non-consecutive pieces of a path.

    Pieces are compared face by face in the face frames; for a closed path
    the first and last pieces are merged when they lie on the same chord.
    """
    pieces = {}
    segs = list(path.segments)
    n = len(segs)
    for i, s in enumerate(segs):
        tri = surface.frames[s.face]
        a = np.asarray(s.entry) @ tri
        b = np.asarray(s.exit) @ tri
        pieces.setdefault(s.face, []).append((i, a, b))
    best = math.inf
    for f, items in pieces.items():
        if path.closed and n > 1 and segs[0].face == segs[-1].face == f:
            first = [it for it in items if it[0] == 0][0]
            last = [it for it in items if it[0] == n - 1][0]
            merged = (0, last[1], first[2])
            items = [it for it in items if it[0] not in (0, n - 1)] + [merged]
        if len(items) < 2:
            continue
        A = np.array([it[1] for it in items])
        B = np.array([it[2] for it in items])
        idx = np.array([it[0] for it in items])
        I, J = np.triu_indices(len(items), 1)
        adjacent = (np.abs(idx[I] - idx[J]) == 1)
        dist = _seg_distance(A[I], B[I], A[J], B[J])
        dist = dist[~adjacent]
        if dist.size:
            best = min(best, float(dist.min()))
    return best


def is_simple(surface, path, tol=1e-9):
    return path_self_distance(surface, path) > tol


# hinge angles -------------------------------------------------------------

def _vertex_fan(surface, v):
    """Faces around ``v`` in counterclockwise order with angular offsets.

    Returns ``(order, offsets, total, closed)`` where ``order`` lists
    ``(face, corner)`` pairs.
    """
    star = surface.vertex_faces[v]
    corner = {f: k for f, k in star}
    start = star[0]
    # rewind clockwise to a boundary face for open fans
    f, k = start
    seen = {f}
    while True:
        g = int(surface.neighbor[f, k])  # across edge v -> v_{k+1}: clockwise neighbour
        if g < 0 or g in seen:
            break
        f, k = g, corner[g]
        seen.add(f)
    closed = surface.neighbor[f, k] >= 0
    if closed:
        f, k = start
    order, offsets = [], []
    acc = 0.0
    seen = set()
    while f not in seen:
        seen.add(f)
        order.append((f, k))
        offsets.append(acc)
        acc += surface.angles[f, k]
        g = int(surface.neighbor[f, (k + 2) % 3])
        if g < 0:
            break
        f, k = g, corner[g]
    return order, offsets, acc, bool(closed)


def _cone_coordinate(surface, v, direction):
    order, offsets, total, closed = _vertex_fan(surface, v)
    for (f, k), off in zip(order, offsets):
        if f != direction.face:
            continue
        tri = surface.frames[f]
        e = tri[(k + 1) % 3] - tri[k]
        d = direction.array
        a = math.atan2(e[0] * d[1] - e[1] * d[0], e @ d)
        return off + min(max(a, 0.0), surface.angles[f, k]), total, closed
    raise ValueError("direction's face is not incident to the vertex")


def hinge_angle(surface, at, d1, d2):
    """Angle between two directions at a point of the surface.

    At a cone point of total angle ``theta`` this is the shorter of the two
    sectors between the directions, capped at pi.
    """
    loc = locate(surface, at)
    if loc[0] == "vertex":
        v = loc[1]
        c1, total, closed = _cone_coordinate(surface, v, d1)
        c2, _, _ = _cone_coordinate(surface, v, d2)
        delta = abs(c1 - c2)
        if closed:
            delta = min(delta, total - delta)
        return min(delta, math.pi)
    faces = [f for f, _ in containing_faces(surface, at)]
    if d1.face not in faces or d2.face not in faces:
        raise ValueError("directions are not based at the given point")
    u = transfer_direction(surface, d1, faces[0]).array
    w = transfer_direction(surface, d2, faces[0]).array
    return math.atan2(abs(u[0] * w[1] - u[1] * w[0]), u @ w)
