"""Street-canyon geometry from a constrained triangulation.

Building corners are triangulated with walls and green-area boundaries
as fixed edges. Triangles crossed by a road line and containing at
least one building corner are directed canyons; triangles with a corner
but no road are undirected (courtyard-like); triangles without building
corners are not canyons. Triangles falling inside building footprints
are removed, as are slivers below the area tolerance, since a
near-degenerate min-side would blow up the width formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .cdt import Triangulation, constrained_delaunay
from .classify import BuildingFeature
from .errors import DegenerateGeometry
from .geometry import (
    MIN_TRIANGLE_AREA,
    Polygon,
    Polyline,
    SpatialIndex,
    clip_area,
    clip_ring_area,
    point_in_polygon,
    segment_intersects_triangle,
    triangle_area,
    triangle_centroid,
    triangle_sides,
)

WALL_TAG = "wall"
GREEN_TAG = "green"


class CanyonKind(Enum):
    DIRECTED = "directed"
    UNDIRECTED = "undirected"
    NON_CANYON = "non_canyon"


class BuildingRole(Enum):
    DIRECTED_ONLY = "directed"
    BOTH = "both"
    UNDIRECTED_ONLY = "undirected"


@dataclass
class CanyonTriangle:
    indices: tuple[int, int, int]
    vertices: np.ndarray  # (3, 2)
    kind: CanyonKind
    width: float | None
    area: float
    centroid: tuple[float, float]
    has_building_corner: bool
    crossed_by_road: bool

    def bbox(self):
        xmin, ymin = self.vertices.min(axis=0)
        xmax, ymax = self.vertices.max(axis=0)
        return float(xmin), float(ymin), float(xmax), float(ymax)


def triangle_width(a, b, c) -> float:
    """Altitude onto the shortest side: 2*area / min side length.

    Equals the largest of the three altitudes; the local canyon width.
    """
    area = triangle_area(a, b, c)
    if area < MIN_TRIANGLE_AREA:
        raise DegenerateGeometry("triangle too thin for a meaningful width")
    return 2.0 * area / min(triangle_sides(a, b, c))


@dataclass
class CanyonSet:
    """Classified triangulation plus per-building role labels."""

    points: np.ndarray
    triangles: list[CanyonTriangle]
    wall_edges: set[frozenset]
    buildings: list[BuildingFeature]
    building_roles: list[BuildingRole | None]  # None: forms no canyon
    triangulation: Triangulation
    _tri_index: SpatialIndex = field(default=None, repr=False)
    _bld_index: SpatialIndex = field(default=None, repr=False)

    def __post_init__(self):
        if self._tri_index is None:
            self._tri_index = SpatialIndex([t.bbox() for t in self.triangles])
        if self._bld_index is None:
            self._bld_index = SpatialIndex([b.footprint.bbox() for b in self.buildings])

    def triangles_in(self, rect) -> list[CanyonTriangle]:
        return [self.triangles[i] for i in self._tri_index.query(rect)]

    def buildings_in(self, rect) -> list[int]:
        return self._bld_index.query(rect)


def _collect_rings(polys: list[Polygon]):
    for poly in polys:
        for ring in poly.rings():
            yield ring


def build_canyon_triangulation(buildings: list[BuildingFeature],
                               green_polygons: list[Polygon],
                               roads: list[Polyline]) -> CanyonSet:
    """Triangulate building corners with walls and green edges fixed,
    then classify every triangle."""
    points: list[tuple[float, float]] = []
    constraints: list[tuple[int, int]] = []
    tags: list[str] = []
    building_flag: list[bool] = []
    building_corner_ranges: list[tuple[int, int]] = []

    for b in buildings:
        start = len(points)
        for ring in b.footprint.rings():
            first = len(points)
            n = len(ring)
            for v in ring:
                points.append((float(v[0]), float(v[1])))
                building_flag.append(True)
            for k in range(n):
                constraints.append((first + k, first + (k + 1) % n))
                tags.append(WALL_TAG)
        building_corner_ranges.append((start, len(points)))

    for ring in _collect_rings(green_polygons):
        first = len(points)
        n = len(ring)
        for v in ring:
            points.append((float(v[0]), float(v[1])))
            building_flag.append(False)
        for k in range(n):
            constraints.append((first + k, first + (k + 1) % n))
            tags.append(GREEN_TAG)

    tri = constrained_delaunay(points, constraints, tags=tags)

    n_out = len(tri.points)
    is_building_corner = np.zeros(n_out, dtype=bool)
    for i, flag in enumerate(building_flag):
        if flag:
            is_building_corner[tri.vertex_map[i]] = True
    # points introduced by pre-noding sit on the segments that created
    # them; where a wall was involved, they lie on a building wall
    for idx, created_by in tri.synthetic_tags.items():
        if WALL_TAG in created_by:
            is_building_corner[idx] = True

    wall_edges = {e for e, t in tri.constrained_edges.items() if WALL_TAG in t}

    bld_index = SpatialIndex([b.footprint.bbox() for b in buildings])
    road_segments = []
    for line in roads:
        road_segments.extend(line.segments())
    seg_index = SpatialIndex([(min(a[0], b[0]), min(a[1], b[1]),
                               max(a[0], b[0]), max(a[1], b[1]))
                              for a, b in road_segments])

    triangles: list[CanyonTriangle] = []
    for t in tri.triangles:
        verts = tri.points[list(t)]
        a, b, c = (tuple(verts[0]), tuple(verts[1]), tuple(verts[2]))
        area = triangle_area(a, b, c)
        if area < MIN_TRIANGLE_AREA:
            continue
        cen = triangle_centroid(a, b, c)
        inside_building = False
        for bi in bld_index.query((cen[0], cen[1], cen[0], cen[1])):
            if point_in_polygon(cen, buildings[bi].footprint):
                inside_building = True
                break
        if inside_building:
            continue
        has_corner = bool(is_building_corner[list(t)].any())
        crossed = False
        if has_corner:
            bbox = (float(verts[:, 0].min()), float(verts[:, 1].min()),
                    float(verts[:, 0].max()), float(verts[:, 1].max()))
            for si in seg_index.query(bbox):
                p, q = road_segments[si]
                if segment_intersects_triangle(p, q, (a, b, c)):
                    crossed = True
                    break
        if has_corner and crossed:
            kind = CanyonKind.DIRECTED
        elif has_corner:
            kind = CanyonKind.UNDIRECTED
        else:
            kind = CanyonKind.NON_CANYON
        width = 2.0 * area / min(triangle_sides(a, b, c)) if has_corner else None
        triangles.append(CanyonTriangle(indices=t, vertices=verts, kind=kind,
                                        width=width, area=area, centroid=cen,
                                        has_building_corner=has_corner,
                                        crossed_by_road=crossed))

    roles = _building_roles(buildings, triangles, tri, building_corner_ranges)
    return CanyonSet(points=tri.points, triangles=triangles, wall_edges=wall_edges,
                     buildings=buildings, building_roles=roles, triangulation=tri)


def _building_roles(buildings, triangles, tri: Triangulation,
                    corner_ranges) -> list[BuildingRole | None]:
    """Label each building by the canyon kinds its corners participate in.

    Touching is vertex sharing: corners are the triangulation's own
    vertices, so sharing a vertex is the natural adjacency.
    """
    directed_verts: set[int] = set()
    undirected_verts: set[int] = set()
    for t in triangles:
        if t.kind is CanyonKind.DIRECTED:
            directed_verts.update(t.indices)
        elif t.kind is CanyonKind.UNDIRECTED:
            undirected_verts.update(t.indices)
    roles: list[BuildingRole | None] = []
    for lo, hi in corner_ranges:
        corner_ids = {tri.vertex_map[i] for i in range(lo, hi)}
        d = bool(corner_ids & directed_verts)
        u = bool(corner_ids & undirected_verts)
        if d and u:
            roles.append(BuildingRole.BOTH)
        elif d:
            roles.append(BuildingRole.DIRECTED_ONLY)
        elif u:
            roles.append(BuildingRole.UNDIRECTED_ONLY)
        else:
            roles.append(None)
    return roles


# ---------------------------------------------------------------------------
# Per-cell statistics
# ---------------------------------------------------------------------------

@dataclass
class CanyonCellStats:
    MDC_WIDTH: float | None = None
    MDC_AREA: float = 0.0
    MDC_RATIO: float | None = None
    MUC_WIDTH: float | None = None
    MUC_AREA: float = 0.0
    MUC_RATIO: float | None = None


def _in_rect(p, rect) -> bool:
    return rect[0] <= p[0] < rect[2] and rect[1] <= p[1] < rect[3]


def cell_canyon_stats(cell_rect, canyons: CanyonSet) -> CanyonCellStats:
    """Widths averaged over centroid-assigned triangles (so every triangle
    counts exactly once); areas from exact rectangle clipping (so area
    totals partition across cells)."""
    stats = CanyonCellStats()
    widths = {CanyonKind.DIRECTED: [], CanyonKind.UNDIRECTED: []}
    areas = {CanyonKind.DIRECTED: 0.0, CanyonKind.UNDIRECTED: 0.0}
    for t in canyons.triangles_in(cell_rect):
        if t.kind is CanyonKind.NON_CANYON:
            continue
        if _in_rect(t.centroid, cell_rect):
            widths[t.kind].append(t.width)
        areas[t.kind] += clip_ring_area(t.vertices, cell_rect)
    stats.MDC_AREA = areas[CanyonKind.DIRECTED]
    stats.MUC_AREA = areas[CanyonKind.UNDIRECTED]
    if widths[CanyonKind.DIRECTED]:
        stats.MDC_WIDTH = sum(widths[CanyonKind.DIRECTED]) / len(widths[CanyonKind.DIRECTED])
    if widths[CanyonKind.UNDIRECTED]:
        stats.MUC_WIDTH = sum(widths[CanyonKind.UNDIRECTED]) / len(widths[CanyonKind.UNDIRECTED])
    total = stats.MDC_AREA + stats.MUC_AREA
    if total > 0.0:
        stats.MDC_RATIO = stats.MDC_AREA / total
        stats.MUC_RATIO = stats.MUC_AREA / total
    return stats


def weighted_building_height(canyons: CanyonSet, cell_rect) -> float | None:
    """Mean building height weighted by footprint area clipped to the cell."""
    num = 0.0
    den = 0.0
    for bi in canyons.buildings_in(cell_rect):
        b = canyons.buildings[bi]
        s = clip_area(b.footprint, cell_rect)
        num += s * b.height
        den += s
    if den <= 0.0:
        return None
    return num / den


def building_role_ratios(canyons: CanyonSet, cell_rect) -> tuple[float | None, float | None, float | None]:
    """(directed-only, both-kinds, undirected-only) building area fractions.

    Buildings that form no canyon are excluded from both numerator and
    denominator; all three are undefined when the cell holds no
    canyon-forming building area.
    """
    acc = {BuildingRole.DIRECTED_ONLY: 0.0, BuildingRole.BOTH: 0.0,
           BuildingRole.UNDIRECTED_ONLY: 0.0}
    for bi in canyons.buildings_in(cell_rect):
        role = canyons.building_roles[bi]
        if role is None:
            continue
        s = clip_area(canyons.buildings[bi].footprint, cell_rect)
        acc[role] += s
    total = sum(acc.values())
    if total <= 0.0:
        return None, None, None
    return (acc[BuildingRole.DIRECTED_ONLY] / total,
            acc[BuildingRole.BOTH] / total,
            acc[BuildingRole.UNDIRECTED_ONLY] / total)


def frontal_index(canyons: CanyonSet, cell_rect) -> float | None:
    """Wall length over gap length along the outer boundary of the cell's
    directed canyons (centroid-assigned).

    No gaps (fully enclosed) is the undefined sentinel; no walls gives 0;
    no directed canyons at all is undefined.
    """
    chosen = [t for t in canyons.triangles_in(cell_rect)
              if t.kind is CanyonKind.DIRECTED and _in_rect(t.centroid, cell_rect)]
    if not chosen:
        return None
    edge_count: dict[frozenset, int] = {}
    for t in chosen:
        i, j, k = t.indices
        for e in (frozenset((i, j)), frozenset((j, k)), frozenset((k, i))):
            edge_count[e] = edge_count.get(e, 0) + 1
    wall_len = 0.0
    gap_len = 0.0
    for e, cnt in edge_count.items():
        if cnt != 1:
            continue
        u, v = tuple(e)
        length = math.hypot(canyons.points[u][0] - canyons.points[v][0],
                            canyons.points[u][1] - canyons.points[v][1])
        if e in canyons.wall_edges:
            wall_len += length
        else:
            gap_len += length
    if gap_len == 0.0:
        return None
    return wall_len / gap_len
