"""Intrinsic distances by best-first search over unfolded edge sequences.

A search state is an edge sequence together with the planar image of the
source in the frame of the last face and the window (sub-interval of the
last crossed edge) through which straight lines from the source image still
pass every crossed edge. States are expanded in order of the distance from
the source image to the window, an admissible lower bound, so the first
target candidate popped is optimal among sequences up to the depth limit.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .development import (GeodesicPath, Segment, containing_faces, locate,
                          segment_length, to_frame)

EPS = 1e-12


class DepthExceeded(RuntimeError):
    """The depth limit cut off candidates that could still be shorter."""


@dataclass
class _State:
    face: int
    S: tuple
    window: tuple | None        # ((x, y), (x, y)) on the entry edge, or None at a seed
    entry: int                  # local entry edge of ``face``; -1 at a seed
    used: frozenset
    depth: int
    parent: "_State | None"
    via: int                    # local edge of the parent face crossed to get here


@dataclass
class DistanceResult:
    length: float
    path: GeodesicPath
    runner_up: float            # best length of a different edge sequence (inf if none)
    expanded: int


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _interval(c0, c1, lo, hi):
    """Restrict [lo, hi] to s with c0 + s*c1 >= 0."""
    if abs(c1) < 1e-300:
        return (lo, hi) if c0 >= -EPS else (1.0, 0.0)
    r = -c0 / c1
    if c1 > 0:
        return max(lo, r), hi
    return lo, min(hi, r)


def _pt_seg_dist(px, py, ax, ay, bx, by):
    ex, ey = bx - ax, by - ay
    den = ex * ex + ey * ey
    t = 0.0 if den == 0 else max(0.0, min(1.0, ((px - ax) * ex + (py - ay) * ey) / den))
    return math.hypot(ax + t * ex - px, ay + t * ey - py)


def _in_wedge(S, window, X, slack):
    (ax, ay), (bx, by) = window
    ux, uy = ax - S[0], ay - S[1]
    wx, wy = bx - S[0], by - S[1]
    if _cross(ux, uy, wx, wy) < 0:
        ux, uy, wx, wy = wx, wy, ux, uy
    xx, xy = X[0] - S[0], X[1] - S[1]
    nu, nw = math.hypot(ux, uy), math.hypot(wx, wy)
    if nu == 0 or nw == 0:
        return True
    if xx * (ux / nu + wx / nw) + xy * (uy / nu + wy / nw) <= 0:
        return False
    return _cross(ux, uy, xx, xy) >= -slack and _cross(xx, xy, wx, wy) >= -slack


def _reconstruct(surface, state, T):
    """Turn the winning state chain into path segments (source to target)."""
    chain = []
    node = state
    while node is not None:
        chain.append(node)
        node = node.parent
    chain.reverse()
    # line endpoints in the frame of the last face, mapped backwards
    S, Tp = np.array(state.S), np.array(T)
    crossings = [None] * len(chain)
    lines = [None] * len(chain)
    for idx in range(len(chain) - 1, -1, -1):
        node = chain[idx]
        lines[idx] = (S, Tp)
        if node.parent is None:
            break
        tri = surface.frames[node.face]
        kk = node.entry
        a, b = tri[kk], tri[(kk + 1) % 3]
        d = Tp - S
        e = b - a
        den = d[0] * e[1] - d[1] * e[0]
        if abs(den) < 1e-300:
            s = 0.5
        else:
            s = ((a[0] - S[0]) * d[1] - (a[1] - S[1]) * d[0]) / den
        crossings[idx] = min(max(s, 0.0), 1.0)
        # inverse glue into parent frame
        pf, pk = node.parent.face, node.via
        R, t = surface.glue_rot[pf, pk], surface.glue_trans[pf, pk]
        S = R.T @ (S - t)
        Tp = R.T @ (Tp - t)
    segments = []
    for idx, node in enumerate(chain):
        tri = surface.frames[node.face]
        if idx == 0:
            entry = _bary(tri, np.array(node.S))
        else:
            kk = node.entry
            s = crossings[idx]
            b = [0.0, 0.0, 0.0]
            b[kk], b[(kk + 1) % 3] = 1.0 - s, s
            entry = tuple(b)
        if idx + 1 < len(chain):
            nxt = chain[idx + 1]
            k = nxt.via
            # the parent's edge k is the child's edge nxt.entry traversed in reverse
            s = crossings[idx + 1]
            b = [0.0, 0.0, 0.0]
            b[k], b[(k + 1) % 3] = s, 1.0 - s
            exit_ = tuple(b)
        else:
            exit_ = _bary(tri, np.array(T))
        segments.append(Segment(node.face, entry, exit_))
    # pieces that only touch a vertex carry no direction
    tiny = 1e-12 * max(surface.diameter_bound(), 1.0)
    kept = [s for s in segments if segment_length(surface, s) > tiny]
    return kept or segments[:1]


def _bary(tri, xy):
    a = tri[1] - tri[0]
    b = tri[2] - tri[0]
    r = xy - tri[0]
    det = a[0] * b[1] - a[1] * b[0]
    l1 = (r[0] * b[1] - r[1] * b[0]) / det
    l2 = (a[0] * r[1] - a[1] * r[0]) / det
    bb = np.clip(np.array([1.0 - l1 - l2, l1, l2]), 0.0, None)
    return tuple(bb / bb.sum())


def distance_search(surface, a, b, depth=32, tie_tol=0.0):
    """Full search result; ``runner_up`` is only meaningful within ``tie_tol``.

    Raises
    ------
    DepthExceeded
        If a candidate cut off at the depth limit could beat the result.
    """
    if depth < 1:
        raise ValueError("depth limit must be at least 1")
    scale = max(surface.diameter_bound(), 1.0)
    slack = 1e-12 * scale * scale
    loc_a, loc_b = locate(surface, a), locate(surface, b)
    pa, pb = _position(surface, a), _position(surface, b)
    if np.linalg.norm(pa - pb) == 0.0 and _same_point(loc_a, loc_b, surface, a, b):
        return DistanceResult(0.0, GeodesicPath([], 0.0), math.inf, 0)

    targets = {f: tuple(to_frame(surface, p)) for f, p in containing_faces(surface, b)}
    counter = itertools.count()
    heap = []
    for f, p in containing_faces(surface, a):
        st = _State(f, tuple(to_frame(surface, p)), None, -1, frozenset(), 0, None, -1)
        heapq.heappush(heap, (0.0, next(counter), 0, st))

    best = math.inf
    best_state = None
    best_T = None
    runner_up = math.inf
    cutoff = math.inf
    expanded = 0
    while heap:
        lb, _, kind, st = heapq.heappop(heap)
        if lb > best + tie_tol:
            break
        if kind == 1:
            if best_state is None:
                best, best_state, best_T = lb, st, st.S_target
            elif st.signature != best_state.signature and runner_up == math.inf:
                runner_up = lb
            continue
        expanded += 1
        f = st.face
        S = st.S
        tri = surface.frames[f]
        T = targets.get(f)
        if T is not None and (st.window is None or _in_wedge(S, st.window, T, slack)):
            L = math.hypot(T[0] - S[0], T[1] - S[1])
            fin = _State(f, S, st.window, st.entry, st.used, st.depth, st.parent, st.via)
            fin.S_target = T
            fin.signature = (st.used, f)
            heapq.heappush(heap, (L, next(counter), 1, fin))
        for k in range(3):
            if k == st.entry:
                continue
            g = int(surface.neighbor[f, k])
            if g < 0:
                continue
            e = int(surface.edge_id[f, k])
            if e in st.used:
                continue
            P, Q = tri[k], tri[(k + 1) % 3]
            ex, ey = Q[0] - P[0], Q[1] - P[1]
            if st.window is None:
                if _pt_seg_dist(S[0], S[1], P[0], P[1], Q[0], Q[1]) < 1e-12 * scale:
                    continue
                lo, hi = 0.0, 1.0
            else:
                (ax, ay), (bx, by) = st.window
                ux, uy = ax - S[0], ay - S[1]
                wx, wy = bx - S[0], by - S[1]
                if _cross(ux, uy, wx, wy) < 0:
                    ux, uy, wx, wy = wx, wy, ux, uy
                px, py = P[0] - S[0], P[1] - S[1]
                lo, hi = _interval(_cross(ux, uy, px, py), _cross(ux, uy, ex, ey), 0.0, 1.0)
                lo, hi = _interval(_cross(px, py, wx, wy), _cross(ex, ey, wx, wy), lo, hi)
                if (hi - lo) * math.hypot(ex, ey) <= 1e-13 * scale:
                    continue
            wa = (P[0] + lo * ex, P[1] + lo * ey)
            wb = (P[0] + hi * ex, P[1] + hi * ey)
            child_lb = _pt_seg_dist(S[0], S[1], wa[0], wa[1], wb[0], wb[1])
            if child_lb > best + tie_tol:
                continue
            if st.depth + 1 > depth:
                cutoff = min(cutoff, child_lb)
                continue
            # move everything into the neighbour's frame
            R, t = surface.glue_rot[f, k], surface.glue_trans[f, k]
            Sg = (R[0, 0] * S[0] + R[0, 1] * S[1] + t[0], R[1, 0] * S[0] + R[1, 1] * S[1] + t[1])
            wag = (R[0, 0] * wa[0] + R[0, 1] * wa[1] + t[0], R[1, 0] * wa[0] + R[1, 1] * wa[1] + t[1])
            wbg = (R[0, 0] * wb[0] + R[0, 1] * wb[1] + t[0], R[1, 0] * wb[0] + R[1, 1] * wb[1] + t[1])
            child = _State(g, Sg, (wag, wbg), int(surface.neighbor_edge[f, k]),
                           st.used | {e}, st.depth + 1, st, k)
            heapq.heappush(heap, (child_lb, next(counter), 0, child))

    if best_state is None:
        raise DepthExceeded("no feasible edge sequence within the depth limit")
    if cutoff < best - 1e-12:
        raise DepthExceeded(f"depth limit {depth} cut off a candidate with bound {cutoff} < {best}")
    segs = _reconstruct(surface, best_state, best_T)
    path = GeodesicPath(segs, best, False)
    return DistanceResult(best, path, runner_up, expanded)


def _position(surface, p):
    return np.asarray(p.bary) @ surface.vertices[surface.faces[p.face]]


def _same_point(la, lb, surface, a, b):
    if la[0] == "vertex" or lb[0] == "vertex":
        return la == lb
    return True


def intrinsic_distance(surface, a, b, depth=32):
    """Length of a minimizing geodesic from ``a`` to ``b`` and the path itself."""
    res = distance_search(surface, a, b, depth=depth)
    return res.length, res.path


# exhaustive oracle ----------------------------------------------------------

def _place_third(pi, pj, lik, ljk, away):
    """Planar point at distances lik, ljk from pi, pj, on the side opposite ``away``."""
    d = pj - pi
    L = math.hypot(*d)
    x = (lik * lik - ljk * ljk + L * L) / (2 * L)
    y = math.sqrt(max(lik * lik - x * x, 0.0))
    ex = d / L
    ey = np.array([-ex[1], ex[0]])
    c1 = pi + x * ex + y * ey
    c2 = pi + x * ex - y * ey
    w = away - pi
    side = d[0] * w[1] - d[1] * w[0]
    return c2 if side > 0 else c1


def _segments_cross(S, T, P, Q, tol):
    d = T - S
    e = Q - P
    den = d[0] * e[1] - d[1] * e[0]
    if abs(den) < 1e-300:
        return False
    w = P - S
    t = (w[0] * e[1] - w[1] * e[0]) / den
    u = (w[0] * d[1] - w[1] * d[0]) / den
    return -tol <= t <= 1 + tol and -tol <= u <= 1 + tol


def brute_force_distance_oracle(surface, a, b, k=8):
    """Minimum straight-line length over every simple edge sequence of length <= k.

    Unfoldings are rebuilt from 3D edge lengths, independently of the cached
    face frames; intended for small meshes only.
    """
    V, F = surface.vertices, surface.faces

    def lengths(i, j):
        return float(np.linalg.norm(V[i] - V[j]))

    def faces_with(p):
        pos = _position(surface, p)
        out = []
        for f in range(len(F)):
            A, B, C = V[F[f]]
            M = np.column_stack([B - A, C - A])
            sol, *_ = np.linalg.lstsq(M, pos - A, rcond=None)
            bb = np.array([1 - sol.sum(), sol[0], sol[1]])
            resid = np.linalg.norm(M @ sol - (pos - A))
            if bb.min() >= -1e-12 and resid < 1e-9:
                out.append((f, bb))
        return out

    srcs = faces_with(a)
    dsts = dict(faces_with(b))
    if surface.degenerate:
        # the two sheets of a doubled polygon coincide in space
        srcs = [(f, np.array(p.bary)) for f, p in containing_faces(surface, a)]
        dsts = {f: np.array(p.bary) for f, p in containing_faces(surface, b)}
    best = math.inf

    def edge_key(i, j):
        return (min(i, j), max(i, j))

    for f0, ba in srcs:
        i0, j0, k0 = (int(x) for x in F[f0])
        p = {i0: np.zeros(2), j0: np.array([lengths(i0, j0), 0.0])}
        l02, l12 = lengths(i0, k0), lengths(j0, k0)
        x = (l02 ** 2 - l12 ** 2 + lengths(i0, j0) ** 2) / (2 * lengths(i0, j0))
        p[k0] = np.array([x, math.sqrt(max(l02 ** 2 - x * x, 0.0))])
        S = ba[0] * p[i0] + ba[1] * p[j0] + ba[2] * p[k0]
        stack = [(f0, p, (), ())]
        while stack:
            f, pos, used, crossed = stack.pop()
            if f in dsts:
                bb = dsts[f]
                T = sum(bb[m] * pos[int(F[f, m])] for m in range(3))
                if all(_segments_cross(S, T, P, Q, 1e-12) for P, Q in crossed):
                    best = min(best, float(np.linalg.norm(T - S)))
            if len(used) >= k:
                continue
            for m in range(3):
                vi, vj = int(F[f, m]), int(F[f, (m + 1) % 3])
                key = edge_key(vi, vj)
                if key in used:
                    continue
                g = surface.halfedge.get((vj, vi))
                if g is None:
                    continue
                g = g[0]
                vk = [int(v) for v in F[g] if v not in (vi, vj)][0]
                vo = [int(v) for v in F[f] if v not in (vi, vj)][0]
                npos = {vi: pos[vi], vj: pos[vj]}
                npos[vk] = _place_third(pos[vi], pos[vj], lengths(vi, vk), lengths(vj, vk), pos[vo])
                stack.append((g, npos, used + (key,), crossed + ((pos[vi], pos[vj]),)))
    return best
