"""Model triangles, cutting surfaces along geodesics, and enclosed regions.

Cutting works face by face: every path node (edge crossing, corner, vertex)
becomes a vertex, each original face is re-triangulated with the path
pieces as constraints, and the resulting triangles are flood-filled without
crossing path pieces. Vertices on the cut are duplicated per side, so each
component becomes a mesh with boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import triangle as tr

from .development import (GeodesicPath, SurfacePoint, containing_faces, locate,
                           path_self_distance, to_frame)
from .shortest_path import intrinsic_distance
from .surface import TWO_PI, PolyhedralSurface

SLACK = 1e-12
NODE_MERGE_TOL = 1e-10


class CutError(ValueError):
    pass


# model triangle -----------------------------------------------------------

def _check_sides(a, b, c):
    if a <= 0 or b <= 0:
        raise ValueError("sides a and b must be positive")
    if c < 0 or c > a + b + SLACK or c < abs(a - b) - SLACK:
        raise ValueError(f"triangle inequality violated by ({a}, {b}, {c})")


def model_angle(a, b, c):
    """Angle between sides ``a`` and ``b`` of the planar triangle with third side ``c``."""
    _check_sides(a, b, c)
    s = 0.5 * (a + b + c)
    num = max((s - a) * (s - b), 0.0)
    den = max(s * (s - c), 0.0)
    return 2.0 * math.atan2(math.sqrt(num), math.sqrt(den))


def model_area(a, b, c):
    """Heron area in the numerically stable sorted form."""
    _check_sides(a, b, c)
    x, y, z = sorted((a, b, c), reverse=True)
    prod = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z))
    return 0.25 * math.sqrt(max(prod, 0.0))


@dataclass
class ModelTriangle:
    a: float
    b: float
    c: float

    @property
    def angles(self):
        """Angles opposite ``a``, ``b`` and ``c``."""
        return (model_angle(self.b, self.c, self.a),
                model_angle(self.c, self.a, self.b),
                model_angle(self.a, self.b, self.c))

    @property
    def area(self):
        return model_area(self.a, self.b, self.c)


# discs --------------------------------------------------------------------

@dataclass
class DiscSurface:
    """A component of a cut surface.

    ``mesh`` is a triangle mesh with boundary; ``parent_face[i]`` is the face
    of the parent containing triangle ``i`` and ``parent_node[v]`` the node id
    (see :class:`CutResult`) of local vertex ``v``.
    """

    mesh: PolyhedralSurface
    boundary: list
    parent_face: np.ndarray
    parent_node: np.ndarray
    parent_xy: np.ndarray            # (F, 3, 2) corner coordinates in the parent face frame
    node_defect: dict = field(default_factory=dict)

    @property
    def area(self):
        return float(self.mesh.face_areas.sum())

    @property
    def euler_characteristic(self):
        return self.mesh.n_vertices - self.mesh.n_edges + self.mesh.n_faces

    def interior_vertices(self):
        bnd = self.mesh.boundary_vertices()
        return [v for v in range(self.mesh.n_vertices) if v not in bnd]

    def inner_angle(self, v):
        return self.mesh.total_angle(v)

    def boundary_length(self):
        V = self.mesh.vertices
        loop = self.boundary
        return float(sum(np.linalg.norm(V[loop[i]] - V[loop[(i + 1) % len(loop)]])
                         for i in range(len(loop))))

    def sidecar(self):
        return {
            "boundary": [int(v) for v in self.boundary],
            "parent_face": [int(f) for f in self.parent_face],
            "parent_node": [int(n) for n in self.parent_node],
        }

    def to_off(self):
        return self.mesh.to_off()

    def sidecar_json(self):
        return json.dumps(self.sidecar())


def disc_curvature(disc):
    """Sum of the angle defects of the disc's interior vertices."""
    m = disc.mesh
    return float(math.fsum(TWO_PI - m.total_angle(v) for v in disc.interior_vertices()))


def boundary_turning_curvature(disc):
    """Curvature predicted from the boundary: 2*pi + sum of (inner angle - pi)."""
    return float(2 * math.pi + math.fsum(disc.inner_angle(v) - math.pi
                                         for v in disc.mesh.boundary_vertices()))


# splitting ----------------------------------------------------------------

@dataclass
class _Node:
    kind: str            # "vertex", "edge" or "face"
    key: int             # vertex id, edge id or face id
    reps: dict           # face -> planar coordinates in that face's frame
    xyz: np.ndarray
    param: float = 0.0   # position along canonical edge direction


@dataclass
class CutResult:
    components: list
    nodes: list


class _Splitter:
    def __init__(self, surface):
        self.s = surface
        self.nodes = []
        for v in range(surface.n_vertices):
            reps = {f: surface.frames[f, k] for f, k in surface.vertex_faces[v]}
            self.nodes.append(_Node("vertex", v, reps, surface.vertices[v]))
        self.by_edge = {}
        self.by_face = {}
        self.cuts = {}       # face -> list of (node_a, node_b)

    def node_for(self, point):
        s = self.s
        loc = locate(s, point, tol=1e-11)
        if loc[0] == "vertex":
            return loc[1]
        reps = {f: to_frame(s, p) for f, p in containing_faces(s, point)}
        xyz = np.asarray(point.bary) @ s.vertices[s.faces[point.face]]
        if loc[0] == "edge":
            _, f, k, t = loc
            e = int(s.edge_id[f, k])
            a = int(s.faces[f, k])
            b = int(s.faces[f, (k + 1) % 3])
            param = t if a < b else 1.0 - t
            length = float(np.linalg.norm(s.vertices[a] - s.vertices[b]))
            for n in self.by_edge.get(e, []):
                if abs(self.nodes[n].param - param) * length < NODE_MERGE_TOL:
                    return n
            self.nodes.append(_Node("edge", e, reps, xyz, param))
            self.by_edge.setdefault(e, []).append(len(self.nodes) - 1)
            return len(self.nodes) - 1
        f = loc[1]
        xy = reps[f]
        for n in self.by_face.get(f, []):
            if np.linalg.norm(self.nodes[n].reps[f] - xy) < NODE_MERGE_TOL:
                return n
        self.nodes.append(_Node("face", f, reps, xyz))
        self.by_face.setdefault(f, []).append(len(self.nodes) - 1)
        return len(self.nodes) - 1

    def add_path(self, path):
        for seg in path.segments:
            a = self.node_for(SurfacePoint(seg.face, seg.entry))
            b = self.node_for(SurfacePoint(seg.face, seg.exit))
            if a == b:
                continue
            f = seg.face
            # the segment's face must carry both endpoints
            self.cuts.setdefault(f, []).append((a, b))

    def face_nodes(self, f):
        s = self.s
        out = [int(v) for v in s.faces[f]]
        for k in range(3):
            out += self.by_edge.get(int(s.edge_id[f, k]), [])
        out += self.by_face.get(f, [])
        return out

    def run(self):
        s = self.s
        tris, tri_face, tri_xy = [], [], []
        cut_pairs = set()
        for f in range(s.n_faces):
            tri_f = s.frames[f]
            if f not in self.cuts and not any(
                    self.by_edge.get(int(s.edge_id[f, k])) for k in range(3)):
                tris.append([int(v) for v in s.faces[f]])
                tri_face.append(f)
                tri_xy.append(tri_f.copy())
                continue
            ids = self.face_nodes(f)
            local = {n: i for i, n in enumerate(ids)}
            pts = np.array([self.nodes[n].reps[f] for n in ids])
            segs = []
            for k in range(3):
                a, b = int(s.faces[f, k]), int(s.faces[f, (k + 1) % 3])
                on_edge = self.by_edge.get(int(s.edge_id[f, k]), [])
                flip = a > b
                chain = sorted(on_edge, key=lambda n: self.nodes[n].param, reverse=flip)
                seq = [a] + chain + [b]
                segs += [(local[seq[i]], local[seq[i + 1]]) for i in range(len(seq) - 1)]
            path_segs = []
            for a, b in self.cuts.get(f, []):
                segs.append((local[a], local[b]))
                path_segs.append((pts[local[a]], pts[local[b]]))
            out = tr.triangulate({"vertices": pts, "segments": np.array(segs)}, "pQ")
            if len(out["vertices"]) != len(pts):
                raise CutError(f"path pieces intersect inside face {f}")
            area = 0.0
            for t in out["triangles"]:
                P = pts[t]
                cr = (P[1, 0] - P[0, 0]) * (P[2, 1] - P[0, 1]) - (P[1, 1] - P[0, 1]) * (P[2, 0] - P[0, 0])
                if cr < 0:
                    t = t[[0, 2, 1]]
                    P = pts[t]
                area += 0.5 * abs(cr)
                tris.append([ids[i] for i in t])
                tri_face.append(f)
                tri_xy.append(P.copy())
                for i in range(3):
                    p, q = P[i], P[(i + 1) % 3]
                    if any(_on_segment(p, q, A, B) for A, B in path_segs):
                        u, w = ids[t[i]], ids[t[(i + 1) % 3]]
                        cut_pairs.add((min(u, w), max(u, w)))
            if abs(area - s.face_areas[f]) > 1e-9 * max(s.face_areas[f], 1e-300) + 1e-15:
                raise CutError(f"re-triangulation of face {f} lost area")
        # cuts lying along original edges
        for f, pairs in self.cuts.items():
            for a, b in pairs:
                cut_pairs.add((min(a, b), max(a, b)))
        return self._components(np.array(tris), np.array(tri_face), np.array(tri_xy), cut_pairs)

    def _components(self, tris, tri_face, tri_xy, cut_pairs):
        # edge -> incident triangles
        edge_tris = {}
        for t, (a, b, c) in enumerate(tris):
            for u, w in ((a, b), (b, c), (c, a)):
                edge_tris.setdefault((min(u, w), max(u, w)), []).append(t)
        parent = list(range(len(tris)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e, ts in edge_tris.items():
            if len(ts) == 2 and e not in cut_pairs:
                parent[find(ts[0])] = find(ts[1])
        # split vertices into wedges separated by cut edges
        vert_tris = {}
        for t, tri_ in enumerate(tris):
            for v in tri_:
                vert_tris.setdefault(int(v), []).append(t)
        wedge = {}
        for v, ts in vert_tris.items():
            wp = {t: t for t in ts}

            def wfind(x):
                while wp[x] != x:
                    wp[x] = wp[wp[x]]
                    x = wp[x]
                return x

            for t in ts:
                for u in tris[t]:
                    u = int(u)
                    if u == v:
                        continue
                    e = (min(u, v), max(u, v))
                    if e in cut_pairs:
                        continue
                    for t2 in edge_tris.get(e, []):
                        if t2 in wp:
                            wp[wfind(t)] = wfind(t2)
            for t in ts:
                wedge[(v, t)] = wfind(t)
        comps = {}
        for t in range(len(tris)):
            comps.setdefault(find(t), []).append(t)
        discs = []
        for ts in sorted(comps.values(), key=lambda x: x[0]):
            discs.append(self._make_disc(ts, tris, tri_face, tri_xy, wedge))
        return CutResult(discs, self.nodes)

    def _make_disc(self, ts, tris, tri_face, tri_xy, wedge):
        vid = {}
        verts, pnode, faces = [], [], []
        for t in ts:
            row = []
            for v in tris[t]:
                v = int(v)
                key = (v, wedge[(v, t)])
                if key not in vid:
                    vid[key] = len(verts)
                    verts.append(self.nodes[v].xyz)
                    pnode.append(v)
                row.append(vid[key])
            faces.append(row)
        mesh = PolyhedralSurface(np.array(verts), faces, degenerate=self.s.degenerate)
        # replace frames by the exact parent-frame coordinates
        mesh = _with_parent_frames(mesh, tri_xy[ts])
        loop = boundary_loop(mesh)
        return DiscSurface(mesh, loop, tri_face[ts], np.array(pnode), tri_xy[ts])


def _with_parent_frames(mesh, xy):
    """Recompute frames, angles and gluings from parent-frame coordinates.

    Thin pieces of a long cut lose accuracy when rebuilt from 3D positions,
    so the exact planar coordinates of the parent face are used instead.
    """
    from .surface import _corner_angle

    m = mesh.n_faces
    frames = np.zeros((m, 3, 2))
    angles = np.zeros((m, 3))
    areas = np.zeros(m)
    for f in range(m):
        P = xy[f]
        e = P[1] - P[0]
        L = math.hypot(*e)
        c, s_ = e[0] / L, e[1] / L
        R = np.array([[c, s_], [-s_, c]])
        fr = (P - P[0]) @ R.T
        fr[0] = 0.0
        fr[1, 1] = 0.0
        frames[f] = fr
        areas[f] = 0.5 * abs(fr[1, 0] * fr[2, 1])
        for k in range(3):
            angles[f, k] = _corner_angle(fr[k], fr[(k + 1) % 3], fr[(k + 2) % 3])
    rot = np.zeros((m, 3, 2, 2))
    trans = np.zeros((m, 3, 2))
    for f in range(m):
        for k in range(3):
            g = mesh.neighbor[f, k]
            if g < 0 or areas[f] <= 0 or areas[g] <= 0:
                continue
            kk = mesh.neighbor_edge[f, k]
            a0, a1 = frames[f, k], frames[f, (k + 1) % 3]
            b0, b1 = frames[g, (kk + 1) % 3], frames[g, kk]
            ang = math.atan2(*(b1 - b0)[::-1]) - math.atan2(*(a1 - a0)[::-1])
            c, s_ = math.cos(ang), math.sin(ang)
            R = np.array([[c, -s_], [s_, c]])
            rot[f, k] = R
            trans[f, k] = 0.5 * ((b0 - R @ a0) + (b1 - R @ a1))
    mesh.frames, mesh.angles, mesh.face_areas = frames, angles, areas
    mesh.glue_rot, mesh.glue_trans = rot, trans
    return mesh


def _on_segment(p, q, A, B, tol=1e-10):
    AB = B - A
    L2 = AB @ AB
    if L2 == 0:
        return False
    for X in (p, q):
        t = (X - A) @ AB / L2
        if t < -tol or t > 1 + tol:
            return False
        if abs(AB[0] * (X - A)[1] - AB[1] * (X - A)[0]) / math.sqrt(L2) > tol:
            return False
    return True


def boundary_loop(mesh):
    """Boundary vertices in order (the longest loop if there are several)."""
    nxt = {}
    for f, k in mesh.boundary_halfedges():
        nxt[int(mesh.faces[f, k])] = int(mesh.faces[f, (k + 1) % 3])
    loops, seen = [], set()
    for v0 in sorted(nxt):
        if v0 in seen:
            continue
        loop, v = [], v0
        while v not in seen:
            seen.add(v)
            loop.append(v)
            v = nxt[v]
        loops.append(loop)
    return max(loops, key=len) if loops else []


def split_along_paths(surface, paths):
    """Cut ``surface`` along the given paths; returns a :class:`CutResult`."""
    sp = _Splitter(surface)
    for p in paths:
        sp.add_path(p)
    return sp.run()


# operations ---------------------------------------------------------------

def cut_along_closed_geodesic(surface, path):
    """Split a surface along a closed simple geodesic into two discs."""
    if not path.closed:
        raise CutError("path is not closed")
    if path_self_distance(surface, path) <= 1e-9:
        raise CutError("path intersects itself")
    res = split_along_paths(surface, [path])
    if len(res.components) != 2:
        raise CutError(f"cut produced {len(res.components)} components, expected 2")
    return tuple(res.components)


def _concat_loop(paths):
    segs = [s for p in paths for s in p.segments]
    return GeodesicPath(segs, sum(p.total_length for p in paths), True)


def _locate_seed(disc, surface, seed):
    for f, p in containing_faces(surface, seed):
        xy = to_frame(surface, p)
        for i in np.nonzero(disc.parent_face == f)[0]:
            P = disc.parent_xy[i]
            d = [(P[(k + 1) % 3][0] - P[k][0]) * (xy[1] - P[k][1])
                 - (P[(k + 1) % 3][1] - P[k][1]) * (xy[0] - P[k][0]) for k in range(3)]
            if min(d) >= -1e-12:
                return True
    return False


def enclosed_region(surface, paths, seed=None):
    """Disc bounded by the closed chain ``paths`` (consecutive paths share endpoints).

    ``seed`` picks the side containing that point; by default the smaller
    area side is returned.
    """
    paths = _check_loop(surface, paths)
    return _enclosed(surface, paths, seed)[0]


def _check_loop(surface, paths):
    paths = [p for p in paths if p.segments]
    if not paths:
        raise CutError("empty boundary")
    loop = _concat_loop(paths)
    first = containing_faces(surface, loop.start_point)
    last = containing_faces(surface, loop.end_point)
    p0 = np.asarray(first[0][1].bary) @ surface.vertices[surface.faces[first[0][0]]]
    p1 = np.asarray(last[0][1].bary) @ surface.vertices[surface.faces[last[0][0]]]
    if np.linalg.norm(p0 - p1) > 1e-9 or {f for f, _ in first}.isdisjoint({f for f, _ in last}):
        raise CutError("boundary is not closed")
    if path_self_distance(surface, loop) <= 1e-9:
        raise CutError("boundary intersects itself")
    return paths


def _enclosed(surface, paths, seed):
    sp = _Splitter(surface)
    for p in paths:
        sp.add_path(p)
    comps = sp.run().components
    if len(comps) != 2:
        raise CutError(f"boundary splits the surface into {len(comps)} parts")
    if seed is not None:
        for c in comps:
            if _locate_seed(c, surface, seed):
                return c, sp
        raise CutError("seed point not found in either component")
    return min(comps, key=lambda c: c.area), sp


@dataclass
class GeodesicTriangle:
    vertices: tuple
    sides: tuple            # paths x->y, y->z, z->x
    lengths: tuple          # |xy|, |yz|, |zx|
    region: DiscSurface
    corner_angles: tuple    # inner angles of the region at x, y, z

    @property
    def excess(self):
        return sum(self.corner_angles) - math.pi

    @property
    def model(self):
        return ModelTriangle(*self.lengths)


def geodesic_triangle(surface, x, y, z, seed=None, depth=32):
    """Triangle with minimizing sides and the enclosed disc (smaller side by default)."""
    pts = (x, y, z)
    sides = []
    lengths = []
    for i in range(3):
        a, b = pts[i], pts[(i + 1) % 3]
        L, path = intrinsic_distance(surface, a, b, depth=depth)
        if L <= 1e-12:
            raise CutError("triangle vertices must be pairwise distinct")
        sides.append(path)
        lengths.append(L)
    region, sp = _enclosed(surface, _check_loop(surface, sides), seed)
    bnd = set(region.boundary)
    corners = []
    for p in pts:
        nid = sp.node_for(p)
        vs = [v for v in range(region.mesh.n_vertices) if region.parent_node[v] == nid]
        corners.append(sum(region.inner_angle(v) for v in vs if v in bnd))
    return GeodesicTriangle(pts, tuple(sides), tuple(lengths), region, tuple(corners))
