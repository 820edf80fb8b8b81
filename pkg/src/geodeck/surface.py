"""Triangulated polyhedral surfaces, OFF ingestion and angle-defect curvature.

A :class:`PolyhedralSurface` stores vertex coordinates and outward-wound
triangles. Adjacency (half-edges, face neighbours, planar face frames and
the isometries that glue neighbouring frames) is derived once at build time;
the object is treated as immutable afterwards.

Surfaces with boundary are allowed as a data structure (they arise from
cutting), but :func:`validate` reports them as not closed.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi
MIN_FACE_AREA = 1e-12
DIHEDRAL_TOL = 1e-9
SINGULAR_THRESHOLD = 1e-8


class SurfaceError(ValueError):
    """Base class for surface construction problems."""


class OFFParseError(SurfaceError):
    pass


class TopologyError(SurfaceError):
    pass


class ConvexityError(SurfaceError):
    pass


def _frame_coords(p0, p1, p2):
    """Planar coordinates of a 3D triangle: p0 at the origin, p1 on +x."""
    u = p1 - p0
    w = p2 - p0
    lu = np.linalg.norm(u)
    e1 = u / lu
    n = np.cross(u, w)
    nn = np.linalg.norm(n)
    e2 = np.cross(n / nn, e1)
    return np.array([[0.0, 0.0], [lu, 0.0], [w @ e1, w @ e2]])


def _corner_angle(a, b, c):
    """Angle at ``a`` of the planar triangle ``a, b, c``."""
    u = b - a
    v = c - a
    return math.atan2(abs(u[0] * v[1] - u[1] * v[0]), u[0] * v[0] + u[1] * v[1])


class PolyhedralSurface:
    """Triangle mesh with half-edge adjacency.

    Parameters
    ----------
    vertices : array_like, shape (n, 3)
    faces : array_like, shape (m, 3)
        Vertex-index triples wound counterclockwise seen from outside.
    degenerate : bool
        Set for doubled flat polygons; exempts the convexity check.

    Raises
    ------
    TopologyError
        For out-of-range indices, repeated indices inside a face, or a
        directed edge used twice (non-manifold or inconsistently oriented).
    """

    def __init__(self, vertices, faces, degenerate=False):
        V = np.array(vertices, dtype=float).reshape(-1, 3)
        F = np.array(faces, dtype=np.int64).reshape(-1, 3)
        if not np.all(np.isfinite(V)):
            raise TopologyError("non-finite vertex coordinate")
        if F.size and (F.min() < 0 or F.max() >= len(V)):
            raise TopologyError("face index out of range")
        for f in F:
            if len(set(f.tolist())) != 3:
                raise TopologyError(f"face {f.tolist()} repeats a vertex")
        V.flags.writeable = False
        F.flags.writeable = False
        self.vertices = V
        self.faces = F
        self.degenerate = bool(degenerate)
        self._build()

    # construction ---------------------------------------------------------

    def _build(self):
        F = self.faces
        m = len(F)
        halfedge = {}
        for f in range(m):
            for k in range(3):
                key = (int(F[f, k]), int(F[f, (k + 1) % 3]))
                if key in halfedge:
                    raise TopologyError(
                        f"directed edge {key} used by faces {halfedge[key][0]} and {f}")
                halfedge[key] = (f, k)
        self.halfedge = halfedge

        neighbor = -np.ones((m, 3), dtype=np.int64)
        neighbor_edge = -np.ones((m, 3), dtype=np.int64)
        edge_id = -np.ones((m, 3), dtype=np.int64)
        edges = []
        for (i, j), (f, k) in halfedge.items():
            twin = halfedge.get((j, i))
            if twin is not None:
                neighbor[f, k], neighbor_edge[f, k] = twin
            if edge_id[f, k] < 0:
                edge_id[f, k] = len(edges)
                edges.append((min(i, j), max(i, j)))
                if twin is not None:
                    edge_id[twin] = edge_id[f, k]
        self.neighbor = neighbor
        self.neighbor_edge = neighbor_edge
        self.edge_id = edge_id
        self.edges = np.array(edges, dtype=np.int64).reshape(-1, 2)

        V = self.vertices
        frames = np.zeros((m, 3, 2))
        angles = np.zeros((m, 3))
        areas = np.zeros(m)
        for f in range(m):
            p = V[F[f]]
            areas[f] = 0.5 * np.linalg.norm(np.cross(p[1] - p[0], p[2] - p[0]))
            if areas[f] <= 0.0:
                continue
            fr = _frame_coords(*p)
            frames[f] = fr
            for k in range(3):
                angles[f, k] = _corner_angle(fr[k], fr[(k + 1) % 3], fr[(k + 2) % 3])
        self.frames = frames
        self.angles = angles
        self.face_areas = areas

        # glue[f, k] maps face-f frame coordinates to neighbour frame coordinates
        rot = np.zeros((m, 3, 2, 2))
        trans = np.zeros((m, 3, 2))
        for f in range(m):
            for k in range(3):
                g = neighbor[f, k]
                if g < 0 or areas[f] <= 0 or areas[g] <= 0:
                    continue
                kk = neighbor_edge[f, k]
                a0, a1 = frames[f, k], frames[f, (k + 1) % 3]
                b0, b1 = frames[g, (kk + 1) % 3], frames[g, kk]
                da = a1 - a0
                db = b1 - b0
                ang = math.atan2(db[1], db[0]) - math.atan2(da[1], da[0])
                c, s = math.cos(ang), math.sin(ang)
                R = np.array([[c, -s], [s, c]])
                rot[f, k] = R
                trans[f, k] = b0 - R @ a0
        self.glue_rot = rot
        self.glue_trans = trans

        vf = [[] for _ in range(len(V))]
        for f in range(m):
            for k in range(3):
                vf[F[f, k]].append((f, k))
        self.vertex_faces = vf

    # basic queries --------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def area(self):
        return float(self.face_areas.sum())

    def boundary_halfedges(self):
        """Directed edges with no twin, as ``(face, local_edge)`` pairs."""
        fs, ks = np.nonzero(self.neighbor < 0)
        return list(zip(fs.tolist(), ks.tolist()))

    def is_closed(self):
        return bool(np.all(self.neighbor >= 0))

    def boundary_vertices(self):
        out = set()
        for f, k in self.boundary_halfedges():
            out.add(int(self.faces[f, k]))
            out.add(int(self.faces[f, (k + 1) % 3]))
        return out

    def diameter_bound(self):
        """Extrinsic bounding-box diagonal; a scale for tolerances."""
        if not len(self.vertices):
            return 0.0
        return float(np.linalg.norm(np.ptp(self.vertices, axis=0)))

    def total_angle(self, v):
        return float(sum(self.angles[f, k] for f, k in self.vertex_faces[v]))

    def to_off(self):
        """Serialize as OFF text; ``repr`` keeps floats round-trip exact."""
        buf = io.StringIO()
        buf.write("OFF\n")
        buf.write(f"{self.n_vertices} {self.n_faces} {self.n_edges}\n")
        for x, y, z in self.vertices.tolist():
            buf.write(f"{x!r} {y!r} {z!r}\n")
        for a, b, c in self.faces.tolist():
            buf.write(f"3 {a} {b} {c}\n")
        return buf.getvalue()

    def __repr__(self):
        return (f"PolyhedralSurface(V={self.n_vertices}, F={self.n_faces}, "
                f"E={self.n_edges}, degenerate={self.degenerate})")


# OFF ----------------------------------------------------------------------

def _off_tokens(text):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line.split()


def _coplanar(points, rtol=1e-12):
    """Whether all points lie on one plane (doubled polygons are stored this way)."""
    P = np.asarray(points, dtype=float)
    if len(P) < 4:
        return True
    sv = np.linalg.svd(P - P.mean(axis=0), compute_uv=False)
    return bool(sv[-1] <= rtol * max(sv[0], 1e-300))


def load_off(text, validate_surface=True):
    """Parse OFF text into a :class:`PolyhedralSurface`.

    Polygons with more than three sides are fan-triangulated from their
    first vertex. A surface whose vertices are coplanar is read as a doubled
    polygon (two flat sheets glued along the rim). With ``validate_surface`` the result must pass
    :func:`validate`; convexity violations raise :class:`ConvexityError`,
    every other violation :class:`TopologyError`.
    """
    if hasattr(text, "read"):
        text = text.read()
    lines = list(_off_tokens(text))
    if not lines:
        raise OFFParseError("empty input")
    head = lines[0]
    if head[0] != "OFF":
        raise OFFParseError(f"expected 'OFF' header, got {head[0]!r}")
    rest = head[1:]
    pos = 1
    if not rest:
        if len(lines) < 2:
            raise OFFParseError("missing count line")
        rest = lines[1]
        pos = 2
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except (IndexError, ValueError) as exc:
        raise OFFParseError("malformed count line") from exc
    if nv < 0 or nf < 0 or len(lines) < pos + nv + nf:
        raise OFFParseError("counts do not match the body")
    try:
        verts = [[float(t) for t in lines[pos + i][:3]] for i in range(nv)]
    except ValueError as exc:
        raise OFFParseError("malformed vertex line") from exc
    if any(len(v) != 3 for v in verts):
        raise OFFParseError("vertex line needs three coordinates")
    tris = []
    for i in range(nf):
        toks = lines[pos + nv + i]
        try:
            k = int(toks[0])
            idx = [int(t) for t in toks[1:1 + k]]
        except (IndexError, ValueError) as exc:
            raise OFFParseError("malformed face line") from exc
        if k < 3 or len(idx) != k:
            raise OFFParseError(f"face line {i} has a bad vertex count")
        if min(idx) < 0 or max(idx) >= nv:
            raise TopologyError(f"face {i} references a missing vertex")
        for j in range(1, k - 1):
            tris.append((idx[0], idx[j], idx[j + 1]))
    surface = PolyhedralSurface(verts, tris, degenerate=_coplanar(verts))
    if validate_surface:
        problems = validate(surface)
        if problems:
            kind = ConvexityError if all("convex" in p for p in problems) else TopologyError
            raise kind("; ".join(problems))
    return surface


# validation ---------------------------------------------------------------

def _components(surface):
    m = surface.n_faces
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for f in range(m):
        for g in surface.neighbor[f]:
            if g >= 0:
                parent[find(f)] = find(int(g))
    return len({find(f) for f in range(m)})


def dihedral_angles(surface):
    """Interior dihedral angle per undirected interior edge (dict by edge id).

    Values above pi mark reflex (non-convex) edges.
    """
    V, F = surface.vertices, surface.faces
    out = {}
    for f in range(surface.n_faces):
        for k in range(3):
            g = int(surface.neighbor[f, k])
            e = int(surface.edge_id[f, k])
            if g < 0 or e in out:
                continue
            i, j = F[f, k], F[f, (k + 1) % 3]
            l_opp = F[g, (surface.neighbor_edge[f, k] + 2) % 3]
            nf = np.cross(V[j] - V[i], V[F[f, (k + 2) % 3]] - V[i])
            ng = np.cross(V[i] - V[j], V[l_opp] - V[j])
            nf /= np.linalg.norm(nf)
            ng /= np.linalg.norm(ng)
            bend = math.atan2(np.linalg.norm(np.cross(nf, ng)), nf @ ng)
            side = nf @ (V[l_opp] - V[i])
            out[e] = math.pi + bend if side > 0 else math.pi - bend
    return out


def validate(surface):
    """List violated invariants; an empty list means the surface is valid."""
    problems = []
    if surface.n_faces == 0:
        return ["no faces"]
    if not surface.is_closed():
        problems.append("not closed: boundary edges present")
    if _components(surface) > 1:
        problems.append("not connected")
    used = np.zeros(surface.n_vertices, dtype=bool)
    used[surface.faces.ravel()] = True
    if not used.all():
        problems.append("isolated vertices")
    small = np.nonzero(surface.face_areas <= MIN_FACE_AREA)[0]
    if len(small):
        problems.append(f"degenerate faces: {small.tolist()[:10]}")
    # every vertex star must be a single disc (fan) on a closed manifold
    for v in range(surface.n_vertices):
        star = surface.vertex_faces[v]
        if not star:
            continue
        f0, k0 = star[0]
        f, k, count = f0, k0, 0
        while True:
            count += 1
            # next face counterclockwise around v: across edge (k+2) of f
            g = surface.neighbor[f, (k + 2) % 3]
            if g < 0:
                break
            f = int(g)
            k = [kk for kk in range(3) if surface.faces[f, kk] == v][0]
            if f == f0 or count > len(star):
                break
        if surface.is_closed() and count != len(star):
            problems.append(f"non-manifold vertex {v}")
            break
    if not problems and not surface.degenerate:
        V, F = surface.vertices, surface.faces
        vol = np.einsum("ij,ij->i", V[F[:, 0]], np.cross(V[F[:, 1]], V[F[:, 2]])).sum() / 6
        if vol <= 0:
            problems.append("orientation: faces are not wound outward")
        reflex = [e for e, a in dihedral_angles(surface).items() if a > math.pi + DIHEDRAL_TOL]
        if reflex:
            problems.append(f"non-convex: {len(reflex)} reflex edges, e.g. {reflex[:5]}")
    return problems


# curvature ----------------------------------------------------------------

@dataclass
class CurvatureReport:
    defects: np.ndarray
    total: float
    singular_vertices: list = field(default_factory=list)

    def to_dict(self):
        return {
            "defects": [float(d) for d in self.defects],
            "total": float(self.total),
            "singular_vertices": list(self.singular_vertices),
        }


def vertex_defect(surface, v):
    """Angle defect 2*pi minus the total face angle at vertex ``v``."""
    if not 0 <= v < surface.n_vertices:
        raise IndexError(f"vertex {v} out of range")
    return TWO_PI - surface.total_angle(v)


def vertex_defects(surface):
    total = np.zeros(surface.n_vertices)
    np.add.at(total, surface.faces.ravel(), surface.angles.ravel())
    return TWO_PI - total


def curvature_report(surface, threshold=SINGULAR_THRESHOLD):
    d = vertex_defects(surface)
    return CurvatureReport(
        defects=d,
        total=float(math.fsum(d)),
        singular_vertices=[int(i) for i in np.nonzero(d > threshold)[0]],
    )


# constructions ------------------------------------------------------------

def double_polygon(points):
    """Two-sided surface of a planar convex polygon (counterclockwise).

    The top copy is fanned from vertex 0 and the bottom copy from vertex 1,
    so no diagonal is shared and every edge has exactly two faces.
    """
    P = np.asarray(points, dtype=float)
    n = len(P)
    if n < 3:
        raise SurfaceError("polygon needs at least three vertices")
    for i in range(n):
        a, b, c = P[i], P[(i + 1) % n], P[(i + 2) % n]
        cr = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if cr <= 1e-12:
            raise SurfaceError("polygon must be strictly convex and counterclockwise")
    winding = sum(
        math.atan2(
            (P[(i + 1) % n][0] - P[i][0]) * (P[(i + 2) % n][1] - P[(i + 1) % n][1])
            - (P[(i + 1) % n][1] - P[i][1]) * (P[(i + 2) % n][0] - P[(i + 1) % n][0]),
            (P[(i + 1) % n] - P[i]) @ (P[(i + 2) % n] - P[(i + 1) % n]))
        for i in range(n))
    if abs(winding - TWO_PI) > 1e-9:
        raise SurfaceError("polygon is self-intersecting")
    V = np.column_stack([P, np.zeros(n)])
    top = [(0, i, i + 1) for i in range(1, n - 1)]
    bottom = [(1, (1 + i + 1) % n, (1 + i) % n) for i in range(1, n - 1)]
    return PolyhedralSurface(V, top + bottom, degenerate=True)


def regular_tetrahedron(edge=1.0):
    s = edge / math.sqrt(8.0)
    V = s * np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    return convex_hull_surface(V)


def cube(edge=1.0):
    V = edge * np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
    tris = [t for a, b, c, d in quads for t in ((a, b, c), (a, c, d))]
    return PolyhedralSurface(V, tris)


def regular_icosahedron(edge=1.0):
    g = (1 + math.sqrt(5)) / 2
    V = []
    for a in (-1, 1):
        for b in (-g, g):
            V += [(0, a, b), (a, b, 0), (b, 0, a)]
    return convex_hull_surface(np.array(V) * edge / 2)


def convex_hull_surface(points):
    """Outward-wound surface of the convex hull of a generic point set."""
    from scipy.spatial import ConvexHull

    P = np.asarray(points, dtype=float)
    hull = ConvexHull(P)
    used = np.unique(hull.simplices)
    remap = {int(v): i for i, v in enumerate(used)}
    faces = []
    for simplex, eq in zip(hull.simplices, hull.equations):
        a, b, c = (int(v) for v in simplex)
        n = np.cross(P[b] - P[a], P[c] - P[a])
        if n @ eq[:3] < 0:
            b, c = c, b
        faces.append((remap[a], remap[b], remap[c]))
    return PolyhedralSurface(P[used], faces)


def random_hull(n_points, seed):
    """Hull of ``n_points`` uniform points on the unit sphere."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n_points, 3))
    X /= np.linalg.norm(X, axis=1)[:, None]
    return convex_hull_surface(X)
