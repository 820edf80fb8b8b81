"""End-to-end acceptance criteria, one test each.

Every test records a PASS/FAIL line (shown in the terminal summary) before
asserting, so the table is complete even when something fails.
"""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_acute
from geodeck import (SurfacePoint, brute_force_distance_oracle, build_isosceles,
                     check_area_comparison, check_comparison, check_first_variation,
                     check_supplementary, convex_hull_surface, cut_along_closed_geodesic,
                     disc_curvature, enumerate_closed_geodesics, intrinsic_distance, is_isosceles,
                     long_geodesic_search, lune_experiment, mesh_corpus, realize_lattice_geodesic,
                     reconstruct_from_flat_surface, vertex_defects, vertex_point)
from geodeck.harness import random_point
from geodeck.isosceles import check_realization


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def corpus():
    return mesh_corpus()


def _run_check(corpus, fn, per_mesh, seed):
    return [fn(s, per_mesh, seed=seed + i) for i, (_, s) in enumerate(corpus)]


def test_01_gauss_bonnet(corpus):
    worst = max(abs(math.fsum(vertex_defects(s)) - 4 * math.pi) / (4 * math.pi)
                for _, s in corpus)
    record(1, len(corpus) == 15 and worst <= 1e-9,
           f"{len(corpus)} meshes, worst relative error {worst:.2e}")


def test_02_isosceles_construction():
    rng = np.random.default_rng(20)
    worst_mismatch = worst_defect = 0.0
    for _ in range(20):
        spec, surface = build_isosceles(*random_acute(rng))
        ok, mismatch = is_isosceles(surface.vertices)
        assert ok
        worst_mismatch = max(worst_mismatch, mismatch)
        worst_defect = max(worst_defect, float(np.max(np.abs(vertex_defects(surface) - math.pi))))
    record(2, worst_mismatch < 1e-12 and worst_defect <= 1e-9,
           f"mismatch {worst_mismatch:.2e}, defect error {worst_defect:.2e}")


def test_03_long_simple_closed_geodesic():
    t0 = time.perf_counter()
    spec, surface = build_isosceles(0.9, 1.0, 1.1)
    idx, length = next(x for x in enumerate_closed_geodesics(spec, 110) if x[1] >= 100)
    path = realize_lattice_geodesic(spec, idx, surface)
    rep = check_realization(surface, path)
    elapsed = time.perf_counter() - t0
    ok = (path.total_length >= 100 and rep["closure_residual"] <= 1e-8 and rep["simple"]
          and elapsed < 30)
    record(3, ok, f"class ({idx.m},{idx.n}) length {path.total_length:.4f}, "
                  f"closure {rep['closure_residual']:.1e}, simple {rep['simple']}, "
                  f"{elapsed:.2f}s")


def test_04_closed_geodesic_cuts():
    cases = [((1.0, 1.0, 1.0), 0), ((1.0, 1.0, 1.0), 3),
             ((0.9, 1.0, 1.1), 1), ((0.9, 1.0, 1.1), 6),
             ((0.8, 1.0, 1.15), 4)]
    worst_k = worst_a = 0.0
    for sides, rank in cases:
        spec, surface = build_isosceles(*sides)
        idx, _ = enumerate_closed_geodesics(spec, 12)[rank]
        discs = cut_along_closed_geodesic(surface, realize_lattice_geodesic(spec, idx, surface))
        assert len(discs) == 2
        worst_k = max(worst_k, *(abs(disc_curvature(d) - 2 * math.pi) for d in discs))
        worst_a = max(worst_a, abs(sum(d.area for d in discs) - surface.area) / surface.area)
    record(4, worst_k <= 1e-6 and worst_a <= 1e-9,
           f"5 geodesics on 3 shapes, curvature error {worst_k:.1e}, area error {worst_a:.1e}")


def test_05_comparison(corpus):
    reports = _run_check(corpus, check_comparison, 70, 500)
    valid = sum(r.valid for r in reports)
    worst = min(r.worst_margin for r in reports if r.worst_margin is not None)
    record(5, valid >= 1000 and worst >= -1e-7, f"{valid} hinges, worst margin {worst:.2e}")


def test_06_supplementary_and_first_variation(corpus):
    sup = _run_check(corpus, check_supplementary, 36, 600)
    fv = _run_check(corpus, check_first_variation, 36, 700)
    n_sup = sum(r.valid for r in sup)
    worst_sup = -min(r.worst_margin for r in sup if r.worst_margin is not None)
    attempted = sum(r.attempted for r in fv)
    smooth = sum(r.valid for r in fv)
    worst_fv = -min(r.worst_margin for r in fv if r.worst_margin is not None)
    ok = (n_sup >= 500 and worst_sup <= 1e-6 and attempted >= 500
          and smooth >= 0.8 * attempted and worst_fv <= 1e-3
          and not any(r.failures for r in sup + fv))
    record(6, ok, f"supplementary {n_sup} samples, deviation {worst_sup:.1e}; "
                  f"first variation {smooth}/{attempted} smooth, deviation {worst_fv:.1e}")


def test_07_area_comparison(corpus):
    reports = _run_check(corpus, check_area_comparison, 16, 800)
    valid = sum(r.valid for r in reports)
    worst = min(r.worst_margin for r in reports if r.worst_margin is not None)
    record(7, valid >= 200 and worst >= -1e-7, f"{valid} triangles, worst margin {worst:.2e}")


def test_08_oracle_equivalence(corpus):
    small = [(name, s) for name, s in corpus if len(s.faces) <= 20]
    worst = 0.0
    for i, (_, s) in enumerate(small):
        rng = np.random.default_rng([8, i])
        for _ in range(100):
            a, b = random_point(s, rng), random_point(s, rng)
            fast, _ = intrinsic_distance(s, a, b)
            worst = max(worst, abs(fast - brute_force_distance_oracle(s, a, b, 8)))
    box = dict(corpus)["cube"]
    lo = int(np.argmin(box.vertices.sum(axis=1)))
    hi = int(np.argmax(box.vertices.sum(axis=1)))
    side = float(np.linalg.norm(box.vertices[box.edges[0][0]] - box.vertices[box.edges[0][1]]))
    diag, _ = intrinsic_distance(box, vertex_point(box, lo), vertex_point(box, hi))
    err = abs(diag / side - math.sqrt(5))
    record(8, worst <= 1e-9 and err <= 1e-9,
           f"{len(small)} meshes x 100 pairs, worst gap {worst:.1e}; cube diagonal error {err:.1e}")


def test_09_lune_pipeline():
    spec, surface = build_isosceles(0.9, 1.0, 1.1)
    long_ones = [x for x in enumerate_closed_geodesics(spec, 60) if x[1] >= 50][:2]
    results = []
    for idx, _ in long_ones:
        discs = cut_along_closed_geodesic(surface, realize_lattice_geodesic(spec, idx, surface))
        results += [lune_experiment(d, 0.1, surface.area, disc_id=k) for k, d in enumerate(discs)]
    ok = True
    worst_gap = math.inf
    for r in results:
        gap = r.lune_curvature - (math.pi - r.model_angle_p)
        worst_gap = min(worst_gap, gap)
        ok &= gap >= -1e-6
        ok &= r.pq_distance >= r.boundary_length / 8
        ok &= r.xy_distance <= 100 * surface.area / r.boundary_length
    record(9, ok and len(results) == 4,
           f"{len(results)} discs, worst curvature slack {worst_gap:.3f}, asterism and |x-y| bound hold")


def test_10_reconstruction_round_trip():
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(10):
        sides = random_acute(rng)
        spec = reconstruct_from_flat_surface(build_isosceles(*sides)[1])
        worst = max(worst, float(np.max(np.abs(np.sort([spec.a, spec.b, spec.c])
                                                - np.sort(sides)))))
    record(10, worst <= 1e-8, f"10 triples, worst side error {worst:.1e}")


def test_11_negative_control():
    corner = convex_hull_surface([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
    res = long_geodesic_search(corner, 20, 64, seed=0)
    record(11, res.best is None or res.best_length <= 20,
           f"{res.traced} traces, {res.candidates} candidates, found {len(res.found)}")
