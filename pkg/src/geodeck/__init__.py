"""Intrinsic geometry of convex polyhedral surfaces."""

from .surface import (ConvexityError, CurvatureReport, OFFParseError, PolyhedralSurface,
                      SurfaceError, TopologyError, convex_hull_surface, cube, curvature_report,
                      double_polygon, load_off, random_hull, regular_icosahedron,
                      regular_tetrahedron, validate, vertex_defects)
from .development import (BoundaryHit, GeodesicPath, Segment, SurfacePoint, TangentDirection,
                          VertexHit, hinge_angle, is_simple, path_self_distance,
                          trace_geodesic, vertex_point)
from .shortest_path import (DepthExceeded, brute_force_distance_oracle, distance_search,
                            intrinsic_distance)
from .regions import (CutError, DiscSurface, GeodesicTriangle, ModelTriangle,
                      cut_along_closed_geodesic, disc_curvature, enclosed_region,
                      geodesic_triangle, model_angle, model_area, split_along_paths)
from .isosceles import (IsoscelesSpec, LatticeGeodesicIndex, NotAcuteError,
                        ReconstructionError, build_isosceles, enumerate_closed_geodesics,
                        is_isosceles, realize_lattice_geodesic, reconstruct_from_flat_surface)
from .harness import (CheckReport, LuneReport, SearchResult, check_area_comparison,
                      check_comparison, check_first_variation, check_supplementary,
                      long_geodesic_search, lune_experiment, mesh_corpus)

__version__ = "0.1.0"
