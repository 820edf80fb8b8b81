"""Property checkers and experiment drivers.

Every checker draws its samples from ``numpy.random.default_rng([seed, i])``
for sample ``i``, so a report depends only on ``(surface, n, seed)`` and a
failing sample can be replayed from its index alone.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .development import (BoundaryHit, GeodesicPath, Segment, SurfacePoint, TangentDirection,
                          VertexHit, hinge_angle, locate, path_start_direction,
                          segment_direction, segment_length, trace_geodesic, vertex_point)
from .regions import CutError, geodesic_triangle, model_angle, model_area
from .shortest_path import DepthExceeded, distance_search
from .surface import (curvature_report, double_polygon, random_hull, regular_icosahedron,
                      regular_tetrahedron, cube)

COMPARISON_TOL = 1e-7
SUPPLEMENTARY_TOL = 1e-6
FIRST_VARIATION_TOL = 1e-3
FIRST_VARIATION_STEP = 1e-5
TIE_TOL = 1e-6
AREA_TOL = 1e-7


@dataclass
class CheckReport:
    check: str
    params: dict
    seed: int
    attempted: int
    valid: int
    worst_margin: float
    failures: list
    tolerances: dict
    skipped: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.failures

    def to_dict(self):
        return {
            "check": self.check,
            "params": dict(self.params),
            "seed": self.seed,
            "samples": {"attempted": self.attempted, "valid": self.valid,
                        "skipped": dict(self.skipped)},
            "worst_margin": self.worst_margin,
            "failures": list(self.failures),
            "tolerances": dict(self.tolerances),
        }


def thread_count(threads=None):
    if threads is None:
        threads = int(os.environ.get("GEODECK_THREADS", "1") or 1)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def _map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


def _summarize(name, params, seed, outcomes, tol, tolerances, skip_keys=()):
    """Fold per-sample ``(status, margin, detail)`` tuples into a report."""
    worst = math.inf
    failures = []
    skipped = {k: 0 for k in skip_keys}
    valid = 0
    for i, (status, margin, detail) in enumerate(outcomes):
        if status != "ok":
            skipped[status] = skipped.get(status, 0) + 1
            continue
        valid += 1
        worst = min(worst, margin)
        if margin < -tol:
            failures.append({"sample": i, "margin": margin, **detail})
    return CheckReport(name, params, seed, len(outcomes), valid,
                       worst if valid else math.nan, failures, tolerances, skipped)


# sampling -----------------------------------------------------------------

def random_face_point(surface, rng):
    w = surface.face_areas / surface.face_areas.sum()
    f = int(rng.choice(surface.n_faces, p=w))
    r1, r2 = rng.random(2)
    s = math.sqrt(r1)
    return SurfacePoint(f, (1 - s, s * (1 - r2), s * r2))


def random_point(surface, rng, singular_rate=0.0):
    """Uniform point by area; with probability ``singular_rate`` a singular vertex."""
    if singular_rate > 0 and rng.random() < singular_rate:
        sing = curvature_report(surface).singular_vertices
        if len(sing):
            return vertex_point(surface, int(sing[rng.integers(len(sing))]))
    return random_face_point(surface, rng)


def random_direction(point, rng):
    a = rng.uniform(0, 2 * math.pi)
    return TangentDirection(point.face, (math.cos(a), math.sin(a)))


def point_along(surface, path, s):
    """Point at arclength ``s`` along ``path`` and the forward direction there."""
    acc = 0.0
    for seg in path.segments:
        ell = segment_length(surface, seg)
        if ell > 0 and acc + ell >= s:
            lam = min(max((s - acc) / ell, 0.0), 1.0)
            b = (1 - lam) * np.asarray(seg.entry) + lam * np.asarray(seg.exit)
            b = np.clip(b, 0.0, None)
            return SurfacePoint(seg.face, tuple(b / b.sum())), segment_direction(surface, seg)
        acc += ell
    seg = path.segments[-1]
    return SurfacePoint(seg.face, seg.exit), segment_direction(surface, seg)


def _scale(surface):
    return math.sqrt(surface.area)


# comparison ---------------------------------------------------------------

def comparison_margins(surface, x, y, z, depth=32):
    """Hinge angle minus model angle at each corner of the triangle ``xyz``."""
    pts = (x, y, z)
    L = {}
    P = {}
    for i in range(3):
        for j in range(3):
            if i < j:
                res = distance_search(surface, pts[i], pts[j], depth=depth)
                L[i, j] = L[j, i] = res.length
                P[i, j] = res.path
                P[j, i] = res.path.reversed()
    lengths = (L[0, 1], L[1, 2], L[0, 2])
    if min(lengths) < 1e-9 * _scale(surface):
        return None, lengths
    margins = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        hinge = hinge_angle(surface, pts[i], path_start_direction(surface, P[i, j]),
                            path_start_direction(surface, P[i, k]))
        margins.append(hinge - model_angle(L[i, j], L[i, k], L[j, k]))
    return margins, lengths


def _comparison_sample(surface, seed, i):
    rng = np.random.default_rng([seed, i])
    pts = [random_point(surface, rng, singular_rate=0.2) for _ in range(3)]
    try:
        margins, lengths = comparison_margins(surface, *pts)
    except DepthExceeded:
        return ("depth", 0.0, {})
    if margins is None:
        return ("degenerate", 0.0, {})
    return ("ok", min(margins), {})


def check_comparison(surface, n, seed=0, tol=COMPARISON_TOL, threads=None):
    """Hinge angles of random triangles dominate the model angles."""
    outcomes = _map(partial(_comparison_sample, surface, seed), range(n), thread_count(threads))
    return _summarize("comparison", {"n": n}, seed, outcomes, tol, {"angle": tol},
                      ("depth", "degenerate"))


# supplementary ------------------------------------------------------------

def supplementary_deviation(surface, p, forward, z, depth=32):
    """``angle(p; back, z) + angle(p; forward, z) - pi``."""
    res = distance_search(surface, p, z, depth=depth)
    dz = path_start_direction(surface, res.path)
    a1 = hinge_angle(surface, p, forward.reversed(), dz)
    a2 = hinge_angle(surface, p, forward, dz)
    return a1 + a2 - math.pi


def _supplementary_sample(surface, seed, i):
    rng = np.random.default_rng([seed, i])
    start = random_face_point(surface, rng)
    budget = rng.uniform(0.2, 1.0) * _scale(surface)
    try:
        path = trace_geodesic(surface, start, random_direction(start, rng), budget,
                              detect_closure=False)
    except VertexHit:
        return ("vertex", 0.0, {})
    if rng.random() < 0.5 and len(path.segments) > 1:
        seg = path.segments[int(rng.integers(len(path.segments) - 1))]
        p, fwd = SurfacePoint(seg.face, seg.exit), segment_direction(surface, seg)
    else:
        p, fwd = point_along(surface, path, rng.uniform(0.1, 0.9) * path.total_length)
    z = random_face_point(surface, rng)
    try:
        dev = supplementary_deviation(surface, p, fwd, z)
    except DepthExceeded:
        return ("depth", 0.0, {})
    except ValueError:
        return ("degenerate", 0.0, {})
    return ("ok", -abs(dev), {})


def check_supplementary(surface, n, seed=0, tol=SUPPLEMENTARY_TOL, threads=None):
    """Angles to a third point from both sides of a geodesic sum to pi."""
    outcomes = _map(partial(_supplementary_sample, surface, seed), range(n), thread_count(threads))
    return _summarize("supplementary", {"n": n}, seed, outcomes, tol, {"angle": tol},
                      ("vertex", "depth", "degenerate"))


# first variation ----------------------------------------------------------

def _signature(res):
    return tuple(s.face for s in res.path.segments)


def first_variation_error(surface, p, path, t, h=FIRST_VARIATION_STEP, tie_tol=TIE_TOL):
    """Central difference of ``|p - gamma(t)|`` against ``-cos(phi+)``.

    Returns ``None`` when the minimizing geodesic ``[gamma(t) p]`` is not
    unique or changes combinatorics inside the difference stencil.
    """
    g0, fwd = point_along(surface, path, t)
    gm, _ = point_along(surface, path, t - h)
    gp, _ = point_along(surface, path, t + h)
    r0 = distance_search(surface, g0, p, tie_tol=tie_tol)
    if r0.runner_up - r0.length <= tie_tol:
        return None
    rm = distance_search(surface, gm, p)
    rp = distance_search(surface, gp, p)
    if _signature(rm) != _signature(rp):
        return None
    deriv = (rp.length - rm.length) / (2 * h)
    d = path_start_direction(surface, r0.path)
    phi = hinge_angle(surface, g0, fwd, d)
    return abs(deriv + math.cos(phi))


def _first_variation_sample(surface, seed, i):
    rng = np.random.default_rng([seed, i])
    p = random_face_point(surface, rng)
    start = random_face_point(surface, rng)
    budget = rng.uniform(0.2, 1.0) * _scale(surface)
    try:
        path = trace_geodesic(surface, start, random_direction(start, rng), budget,
                              detect_closure=False)
    except VertexHit:
        return ("vertex", 0.0, {})
    t = rng.uniform(0.1, 0.9) * path.total_length
    g0, _ = point_along(surface, path, t)
    if locate(surface, g0, tol=1e-6)[0] == "vertex":
        return ("vertex", 0.0, {})
    try:
        err = first_variation_error(surface, p, path, t)
    except DepthExceeded:
        return ("depth", 0.0, {})
    if err is None:
        return ("nonsmooth", 0.0, {})
    return ("ok", -err, {})


def check_first_variation(surface, n, seed=0, tol=FIRST_VARIATION_TOL, threads=None):
    """Derivative of distance along a geodesic equals ``-cos`` of the angle."""
    outcomes = _map(partial(_first_variation_sample, surface, seed), range(n),
                    thread_count(threads))
    rep = _summarize("first_variation", {"n": n, "step": FIRST_VARIATION_STEP}, seed,
                     outcomes, tol, {"derivative": tol, "tie": TIE_TOL},
                     ("vertex", "depth", "nonsmooth"))
    return rep


# area ---------------------------------------------------------------------

def _local_point(surface, x, rng, lo=0.05, hi=0.6):
    d = random_direction(x, rng)
    path = trace_geodesic(surface, x, d, rng.uniform(lo, hi) * _scale(surface),
                          detect_closure=False)
    return path.end_point


def _area_sample(surface, seed, i):
    rng = np.random.default_rng([seed, i])
    x = random_face_point(surface, rng)
    try:
        y = _local_point(surface, x, rng)
        z = _local_point(surface, x, rng)
        tri = geodesic_triangle(surface, x, y, z)
    except (VertexHit, BoundaryHit):
        return ("vertex", 0.0, {})
    except DepthExceeded:
        return ("depth", 0.0, {})
    except (CutError, ValueError):
        return ("no_disc", 0.0, {})
    a, b, c = tri.lengths
    if min(a, b, c) < 1e-9 * _scale(surface):
        return ("degenerate", 0.0, {})
    try:
        model = model_area(a, b, c)
    except ValueError:
        return ("degenerate", 0.0, {})
    margin = (tri.region.area - model) / max(1.0, model)
    return ("ok", margin, {"area": tri.region.area, "model_area": model})


def check_area_comparison(surface, n, seed=0, tol=AREA_TOL, threads=None):
    """Geodesic triangles enclose at least the area of their model triangle."""
    outcomes = _map(partial(_area_sample, surface, seed), range(n), thread_count(threads))
    return _summarize("area_comparison", {"n": n}, seed, outcomes, tol, {"area_relative": tol},
                      ("vertex", "depth", "no_disc", "degenerate"))


# corpus -------------------------------------------------------------------

def regular_polygon(k):
    a = 2 * np.pi * np.arange(k) / k
    return np.column_stack([np.cos(a), np.sin(a)])


def mesh_corpus(n_hulls=10, hull_points=50):
    """Named convex surfaces used by the property checks."""
    out = [
        ("regular_tetrahedron", regular_tetrahedron()),
        ("cube", cube()),
        ("regular_icosahedron", regular_icosahedron()),
        ("doubled_square", double_polygon([[0, 0], [1, 0], [1, 1], [0, 1]])),
        ("doubled_hexagon", double_polygon(regular_polygon(6))),
    ]
    out += [(f"hull_{s}", random_hull(hull_points, s)) for s in range(n_hulls)]
    return out


# disc metric --------------------------------------------------------------

def _face_placements(mesh):
    """Breadth-first placement ``plane = R @ frame + t`` of every face."""
    from collections import deque
    placed = {0: (np.eye(2), np.zeros(2))}
    queue = deque([0])
    while queue:
        f = queue.popleft()
        R, t = placed[f]
        for k in range(3):
            g = int(mesh.neighbor[f, k])
            if g < 0 or g in placed:
                continue
            R2 = R @ mesh.glue_rot[f, k].T
            placed[g] = (R2, t - R2 @ mesh.glue_trans[f, k])
            queue.append(g)
    return placed


class StripMetric:
    """Intrinsic distance on a flat disc with two cone points of angle pi.

    Such a disc is a strip modulo the half-turns about its two cone points,
    so the distance is the smallest planar distance to an orbit image.
    """

    def __init__(self, disc, tol=1e-7):
        mesh = disc.mesh
        self.placed = _face_placements(mesh)
        defects = {v: 2 * math.pi - mesh.total_angle(v) for v in disc.interior_vertices()}
        cones = [v for v, d in defects.items() if abs(d) > 1e-8]
        if len(cones) != 2 or any(abs(defects[v] - math.pi) > 1e-6 for v in cones):
            raise ValueError("disc does not have exactly two cone points of angle pi")
        self.cones = cones
        C = []
        for v in cones:
            f, k = mesh.vertex_faces[v][0]
            R, t = self.placed[f]
            C.append(R @ mesh.frames[f, k] + t)
        self.C1, self.C2 = C
        self.T = 2 * (self.C2 - self.C1)
        u = (self.C2 - self.C1) / np.linalg.norm(self.C2 - self.C1)
        normal = np.array([-u[1], u[0]])
        offs = []
        for f, (R, t) in self.placed.items():
            offs.extend(((R @ mesh.frames[f].T).T + t - self.C1) @ normal)
        offs = np.abs(np.array(offs))
        self.half_width = float(offs.max())
        bnd = []
        for v in disc.boundary:
            f, k = mesh.vertex_faces[v][0]
            R, t = self.placed[f]
            bnd.append(abs((R @ mesh.frames[f, k] + t - self.C1) @ normal))
        scale = max(np.linalg.norm(self.T), 1.0)
        if np.ptp(bnd) > tol * scale:
            raise ValueError("disc is not a folded strip")

    def develop(self, face, xy):
        R, t = self.placed[face]
        return np.asarray(xy) @ R.T + t

    def images(self, Y):
        """Orbit images of planar points ``Y`` nearest to the strip origin."""
        Y = np.atleast_2d(Y)
        return Y, 2 * self.C1 - Y

    def distance(self, X, Y):
        """Pairwise distances, shape ``(len(X), len(Y))``."""
        X = np.atleast_2d(X)[:, None, :]
        best = np.full((X.shape[0], np.atleast_2d(Y).shape[0]), np.inf)
        TT = self.T @ self.T
        for img in self.images(Y):
            D = X - img[None, :, :]
            k0 = np.round(-(D @ self.T) / TT)
            for dk in (-1, 0, 1):
                W = D + (k0 + dk)[..., None] * self.T
                best = np.minimum(best, np.hypot(W[..., 0], W[..., 1]))
        return best

    def nearest_image(self, X, Y):
        """Image of ``Y`` closest to ``X`` (single points)."""
        X = np.asarray(X)
        TT = self.T @ self.T
        cands = []
        for img in self.images(Y):
            img = img[0]
            k0 = round(float(-((X - img) @ self.T) / TT))
            cands += [img + (k0 + dk) * self.T for dk in (-1, 0, 1)]
        return min(cands, key=lambda c: float(np.linalg.norm(X - c)))


class BoundaryCurve:
    """Arclength parametrization of a disc boundary in developed coordinates."""

    def __init__(self, disc, metric):
        mesh = disc.mesh
        loop = list(disc.boundary)
        self.pieces = []
        acc = 0.0
        for a, b in zip(loop, loop[1:] + loop[:1]):
            f, k = mesh.halfedge.get((a, b), (None, None))
            if f is None:
                f, k = mesh.halfedge[(b, a)]
                pa, pb = mesh.frames[f, (k + 1) % 3], mesh.frames[f, k]
            else:
                pa, pb = mesh.frames[f, k], mesh.frames[f, (k + 1) % 3]
            A, B = metric.develop(f, pa), metric.develop(f, pb)
            ell = float(np.linalg.norm(B - A))
            self.pieces.append((acc, ell, A, B, mesh.vertices[a], mesh.vertices[b]))
            acc += ell
        self.length = acc
        self._starts = np.array([p[0] for p in self.pieces])

    def _piece(self, s):
        s = s % self.length
        i = int(np.searchsorted(self._starts, s, side="right") - 1)
        return self.pieces[max(i, 0)], s

    def point(self, s):
        (s0, ell, A, B, _, _), s = self._piece(s)
        lam = 0.0 if ell == 0 else (s - s0) / ell
        return A + lam * (B - A)

    def point3d(self, s):
        (s0, ell, _, _, a3, b3), s = self._piece(s)
        lam = 0.0 if ell == 0 else (s - s0) / ell
        return a3 + lam * (b3 - a3)

    def tangent(self, s):
        (_, ell, A, B, _, _), _ = self._piece(s)
        return (B - A) / ell

    def points(self, ss):
        return np.array([self.point(s) for s in ss])


@dataclass
class LuneReport:
    disc_id: int
    epsilon: float
    p: float
    q: float
    x: float
    y: float
    pq_distance: float
    boundary_length: float
    xy_distance: float
    px_distance: float
    py_distance: float
    qx_distance: float
    qy_distance: float
    lune_curvature: float
    corner_angles: tuple
    model_angle_p: float
    delta: float
    parent_area: float
    area_ratio: float
    refinement_tol: float
    degenerate_lune: bool
    flags: dict

    def to_dict(self):
        return {
            "disc_id": self.disc_id,
            "epsilon": self.epsilon,
            "points": {"p": self.p, "q": self.q, "x": self.x, "y": self.y},
            "distances": {"pq": self.pq_distance, "xy": self.xy_distance,
                          "px": self.px_distance, "py": self.py_distance,
                          "qx": self.qx_distance, "qy": self.qy_distance},
            "boundary_length": self.boundary_length,
            "lune_curvature": self.lune_curvature,
            "corner_angles": list(self.corner_angles),
            "model_angle_p": self.model_angle_p,
            "delta": self.delta,
            "parent_area": self.parent_area,
            "area_ratio": self.area_ratio,
            "refinement_tol": self.refinement_tol,
            "degenerate_lune": self.degenerate_lune,
            "flags": dict(self.flags),
        }


def _refine_pair(curve, metric, sp, sq, step, tol):
    """Coordinate-wise local maximization of ``|gamma(sp) - gamma(sq)|``."""
    d = lambda a, b: float(metric.distance(curve.point(a), curve.point(b))[0, 0])
    best = d(sp, sq)
    while step > tol:
        improved = False
        for which in (0, 1):
            for sgn in (-1, 1):
                a, b = (sp + sgn * step, sq) if which == 0 else (sp, sq + sgn * step)
                v = d(a, b)
                if v > best:
                    best, sp, sq, improved = v, a % curve.length, b % curve.length, True
        if not improved:
            step /= 2
    return sp, sq, best


def _first_at_distance(curve, metric, sp, direction, eps, limit, samples=2000):
    """Smallest arclength offset along ``direction`` at which ``|p - .| = eps``."""
    P = curve.point(sp)
    ts = np.linspace(0, limit, samples)
    D = metric.distance(P, curve.points(sp + direction * ts))[0]
    hit = np.nonzero(D >= eps)[0]
    if not len(hit):
        raise ValueError("no boundary point at the requested distance")
    lo, hi = ts[hit[0] - 1], ts[hit[0]]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if metric.distance(P, curve.point(sp + direction * mid))[0, 0] >= eps:
            hi = mid
        else:
            lo = mid
    return hi


def _equalize(curve, metric, sq, s_fixed, s_move, s_p):
    """Slide ``s_move`` toward ``s_p`` until it is as far from ``q`` as ``s_fixed``."""
    Q = curve.point(sq)
    target = metric.distance(Q, curve.point(s_fixed))[0, 0]
    f = lambda s: metric.distance(Q, curve.point(s))[0, 0] - target
    ts = np.linspace(0.0, 1.0, 257)
    vals = [f(s_move + t * (s_p - s_move)) for t in ts]
    hit = next((i for i, v in enumerate(vals) if v >= 0), None)
    if hit is None:
        raise ValueError("could not equalize the distances to q")
    if hit == 0:
        return s_move
    lo, hi = ts[hit - 1], ts[hit]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if f(s_move + mid * (s_p - s_move)) >= 0:
            hi = mid
        else:
            lo = mid
    return s_move + hi * (s_p - s_move)


def _angle(u, v):
    return math.atan2(abs(u[0] * v[1] - u[1] * v[0]), float(u @ v))


def lune_experiment(disc, epsilon, parent_area, disc_id=0, spacing=1e-3):
    """Cut off the end of a disc near its farthest boundary pair and measure it."""
    metric = StripMetric(disc)
    curve = BoundaryCurve(disc, metric)
    Lb = curve.length
    if not 0 < epsilon < Lb / 4:
        raise ValueError(f"epsilon must lie in (0, {Lb / 4}) for this disc")
    n = max(int(math.ceil(1 / spacing)), 16)
    ss = np.arange(n) * (Lb / n)
    P = curve.points(ss)
    D = metric.distance(P, P)
    i, j = np.unravel_index(int(np.argmax(D)), D.shape)
    if D[i, j] <= 0:
        raise ValueError("degenerate farthest pair")
    tol = 1e-6 * float(D[i, j])
    sp, sq, pq = _refine_pair(curve, metric, ss[i], ss[j], Lb / n, tol)
    # p splits the boundary into the arcs toward q in both directions
    fwd = (sq - sp) % Lb
    sx = sp + _first_at_distance(curve, metric, sp, +1, epsilon, fwd)
    sy = sp - _first_at_distance(curve, metric, sp, -1, epsilon, Lb - fwd)
    dist = lambda a, b: float(metric.distance(curve.point(a), curve.point(b))[0, 0])
    qx, qy = dist(sq, sx), dist(sq, sy)
    if qx > qy:
        sy = _equalize(curve, metric, sq, sx, sy, sp)
    elif qy > qx:
        sx = _equalize(curve, metric, sq, sy, sx, sp)
    X, Y = curve.point(sx), curve.point(sy)
    Ystar = metric.nearest_image(X, Y[None, :])
    Xstar = metric.nearest_image(Y, X[None, :])
    xy = float(np.linalg.norm(X - Ystar))
    px, py = dist(sp, sx), dist(sp, sy)
    qx, qy = dist(sq, sx), dist(sq, sy)
    # corner angles of the lune between the chord and the arcs back to p
    alpha = _angle(Ystar - X, -curve.tangent(sx - 1e-12))
    beta = _angle(Xstar - Y, curve.tangent(sy + 1e-12))
    kappa = alpha + beta
    degenerate = min(alpha, beta) < 1e-9
    mp = model_angle(px, py, xy) if xy > 0 else 0.0
    delta = epsilon * math.sin(epsilon)
    try:
        tri_area = model_area(qx, qy, xy)
    except ValueError:
        tri_area = 0.0
    ratio = tri_area / (xy * qx) if xy * qx > 0 else math.nan
    flags = {
        "asterism": bool(pq >= Lb / 8),
        "xy_bound": bool(xy <= 100 * parent_area / Lb),
        "lune_bound": bool(kappa >= math.pi - mp - 1e-6),
        "xy_below_delta": bool(xy < delta),
    }
    return LuneReport(disc_id, float(epsilon), float(sp), float(sq), float(sx % Lb),
                      float(sy % Lb), float(pq), float(Lb), xy, px, py, qx, qy, float(kappa),
                      (float(alpha), float(beta)), float(mp), float(delta), float(parent_area),
                      float(ratio), float(tol), bool(degenerate), flags)


# long geodesic search -----------------------------------------------------

@dataclass
class SearchResult:
    method: str
    target_length: float
    budget: float
    traced: int
    candidates: int
    found: list              # (length, path) pairs of simple closed geodesics
    best: GeodesicPath | None

    @property
    def best_length(self):
        return self.best.total_length if self.best is not None else 0.0

    def to_dict(self):
        return {
            "method": self.method,
            "target_length": self.target_length,
            "budget": self.budget,
            "traced": self.traced,
            "candidates": self.candidates,
            "found": len(self.found),
            "best_length": self.best_length,
            "lengths": sorted({round(L, 9) for L, _ in self.found}),
        }


def _isosceles_spec(surface):
    from .isosceles import IsoscelesSpec, is_isosceles
    if surface.n_vertices != 4 or surface.n_faces != 4:
        return None
    try:
        flag, _ = is_isosceles(surface.vertices)
    except ValueError:
        return None
    if not flag:
        return None
    V = surface.vertices
    d = lambda i, j: float(np.linalg.norm(V[i] - V[j]))
    try:
        return IsoscelesSpec(d(1, 2), d(0, 2), d(0, 1))
    except ValueError:
        return None


def _exit_edge(surface, seg):
    return (int(np.argmin(seg.exit)) + 1) % 3


def _holonomy_candidates(surface, path, tol=1e-9):
    """Translations of the start face frame along ``path`` with trivial rotation."""
    f0 = path.segments[0].face
    R, t = np.eye(2), np.zeros(2)
    out = []
    for a, b in zip(path.segments[:-1], path.segments[1:]):
        k = _exit_edge(surface, a)
        if int(surface.neighbor[a.face, k]) != b.face:
            ks = [kk for kk in range(3) if int(surface.neighbor[a.face, kk]) == b.face]
            if not ks:
                break
            k = ks[0]
        Rg, tg = surface.glue_rot[a.face, k], surface.glue_trans[a.face, k]
        R, t = Rg @ R, Rg @ t + tg
        if b.face == f0 and abs(R[0, 1]) < tol and R[0, 0] > 0:
            out.append(-t.copy())
    return out


def long_geodesic_search(surface, target_length, grid=64, seed=0, budget_factor=2.0):
    """Look for long simple closed geodesics.

    On an isosceles tetrahedron the closed geodesics are enumerated exactly.
    Elsewhere ``grid`` start points times ``grid`` directions are traced for
    ``budget_factor * target_length``. Every return to the start face whose
    holonomy is a pure translation proposes a closed direction, which is
    traced again and kept if it closes up and is simple.
    """
    from .development import is_simple
    spec = _isosceles_spec(surface)
    if spec is not None:
        from .isosceles import enumerate_closed_geodesics, realize_lattice_geodesic
        found = []
        spectrum = enumerate_closed_geodesics(spec, budget_factor * target_length)
        for idx, L in spectrum[::-1]:
            path = realize_lattice_geodesic(spec, idx, surface)
            if is_simple(surface, path):
                found.append((L, path))
                break
        best = found[0][1] if found else None
        return SearchResult("lattice", float(target_length), float(budget_factor * target_length),
                            0, len(spectrum), found, best)
    budget = budget_factor * target_length
    rng = np.random.default_rng(seed)
    starts = [random_face_point(surface, rng) for _ in range(grid)]
    angles = 2 * math.pi * (np.arange(grid) + rng.random()) / grid
    found = []
    seen = set()
    traced = candidates = 0
    for start in starts:
        for a in angles:
            d = TangentDirection(start.face, (math.cos(a), math.sin(a)))
            try:
                path = trace_geodesic(surface, start, d, budget)
            except (VertexHit, BoundaryHit) as exc:
                path = getattr(exc, "partial", None)
                if path is None or not path.segments:
                    continue
            traced += 1
            if path.closed:
                cands = [None]
            else:
                cands = _holonomy_candidates(surface, path)
            for w in cands:
                if w is not None:
                    L = float(np.linalg.norm(w))
                    if L <= 1e-9 or L > budget:
                        continue
                    key = (start.face, round(L, 6), round(math.atan2(w[1], w[0]), 6))
                    if key in seen:
                        continue
                    seen.add(key)
                    candidates += 1
                    try:
                        cpath = trace_geodesic(surface, start, TangentDirection(start.face, w / L),
                                               L * (1 + 1e-9) + 1e-9)
                    except (VertexHit, BoundaryHit):
                        continue
                else:
                    cpath = path
                if cpath.closed and is_simple(surface, cpath):
                    found.append((float(cpath.total_length), cpath))
    found.sort(key=lambda item: item[0])
    best = found[-1][1] if found else None
    return SearchResult("sweep", float(target_length), float(budget), traced, candidates,
                        found, best)
