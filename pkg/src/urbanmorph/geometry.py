"""Planar geometry primitives and predicates.

All coordinates are projected meters. Polygons are stored as a
counter-clockwise exterior ring plus clockwise hole rings, rings open
(no repeated closing vertex). Everything here is pure and side-effect
free; the clipper targets axis-aligned rectangles only, which is all
the grid overlay ever needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometry

# Vertex dedup / constraint endpoint matching tolerance, meters.
SNAP_TOL = 1e-6
# Triangles thinner than this are slivers and excluded from statistics, m^2.
MIN_TRIANGLE_AREA = 1e-4


Point = tuple[float, float]
Rect = tuple[float, float, float, float]  # xmin, ymin, xmax, ymax


def ring_signed_area(coords) -> float:
    """Shoelace signed area; positive for counter-clockwise rings."""
    a = np.asarray(coords, dtype=float)
    x, y = a[:, 0], a[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _clean_ring(coords) -> np.ndarray:
    """Drop the closing duplicate and consecutive repeated vertices."""
    a = np.asarray(coords, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2:
        raise DegenerateGeometry("ring must be an (N, 2) coordinate sequence")
    if len(a) > 1 and np.allclose(a[0], a[-1], atol=SNAP_TOL, rtol=0.0):
        a = a[:-1]
    keep = [0]
    for i in range(1, len(a)):
        if abs(a[i, 0] - a[keep[-1], 0]) > SNAP_TOL or abs(a[i, 1] - a[keep[-1], 1]) > SNAP_TOL:
            keep.append(i)
    a = a[keep]
    if len(a) >= 2 and abs(a[0, 0] - a[-1, 0]) <= SNAP_TOL and abs(a[0, 1] - a[-1, 1]) <= SNAP_TOL:
        a = a[:-1]
    return a


@dataclass
class Polygon:
    """Simple polygon with optional holes.

    The exterior is normalized counter-clockwise and holes clockwise on
    construction. Rings must have at least 3 distinct vertices and
    nonzero area.
    """

    exterior: np.ndarray
    holes: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        ext = _clean_ring(self.exterior)
        if len(ext) < 3:
            raise DegenerateGeometry("exterior ring has fewer than 3 distinct vertices")
        a = ring_signed_area(ext)
        if a == 0.0:
            raise DegenerateGeometry("exterior ring has zero area (collinear vertices)")
        self.exterior = ext if a > 0 else ext[::-1].copy()
        norm_holes = []
        for h in self.holes:
            hr = _clean_ring(h)
            if len(hr) < 3:
                raise DegenerateGeometry("hole ring has fewer than 3 distinct vertices")
            ha = ring_signed_area(hr)
            if ha == 0.0:
                raise DegenerateGeometry("hole ring has zero area")
            norm_holes.append(hr if ha < 0 else hr[::-1].copy())
        self.holes = norm_holes

    @property
    def area(self) -> float:
        return polygon_area(self)

    def bbox(self) -> Rect:
        xmin, ymin = self.exterior.min(axis=0)
        xmax, ymax = self.exterior.max(axis=0)
        return float(xmin), float(ymin), float(xmax), float(ymax)

    def rings(self):
        yield self.exterior
        yield from self.holes


@dataclass
class Polyline:
    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        keep = [0]
        for i in range(1, len(v)):
            if v[i, 0] != v[keep[-1], 0] or v[i, 1] != v[keep[-1], 1]:
                keep.append(i)
        v = v[keep]
        if len(v) < 2:
            raise DegenerateGeometry("polyline needs at least 2 distinct vertices")
        self.vertices = v

    @property
    def length(self) -> float:
        d = np.diff(self.vertices, axis=0)
        return float(np.sum(np.hypot(d[:, 0], d[:, 1])))

    def bbox(self) -> Rect:
        xmin, ymin = self.vertices.min(axis=0)
        xmax, ymax = self.vertices.max(axis=0)
        return float(xmin), float(ymin), float(xmax), float(ymax)

    def segments(self):
        v = self.vertices
        for i in range(len(v) - 1):
            yield (float(v[i, 0]), float(v[i, 1])), (float(v[i + 1, 0]), float(v[i + 1, 1]))


def polygon_area(poly: Polygon) -> float:
    """Exterior shoelace area minus hole areas; strictly positive."""
    a = ring_signed_area(poly.exterior)
    for h in poly.holes:
        a += ring_signed_area(h)  # holes are clockwise: negative contribution
    if a <= 0.0:
        raise DegenerateGeometry("polygon area is not strictly positive")
    return a


def orient(a, b, c) -> float:
    """Twice the signed area of triangle abc; >0 when c is left of a->b."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def point_on_segment(p, a, b, tol: float = SNAP_TOL) -> bool:
    """True when p lies on the closed segment ab within tol (perpendicular distance)."""
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(px - ax, py - ay) <= tol
    t = ((px - ax) * dx + (py - ay) * dy) / L2
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    qx, qy = ax + t * dx, ay + t * dy
    return math.hypot(px - qx, py - qy) <= tol


def point_in_ring(p, ring) -> bool:
    """Even-odd test against one ring; boundary points count as inside."""
    x, y = p
    n = len(ring)
    inside = False
    for i in range(n):
        ax, ay = ring[i]
        bx, by = ring[(i + 1) % n]
        if point_on_segment(p, (ax, ay), (bx, by)):
            return True
        if (ay > y) != (by > y):
            xi = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < xi:
                inside = not inside
    return inside


def point_in_polygon(p, poly: Polygon) -> bool:
    """Even-odd containment; any boundary (exterior or hole ring) counts as inside."""
    x, y = p
    xmin, ymin, xmax, ymax = poly.bbox()
    if x < xmin - SNAP_TOL or x > xmax + SNAP_TOL or y < ymin - SNAP_TOL or y > ymax + SNAP_TOL:
        return False
    for ring in poly.rings():
        for i in range(len(ring)):
            a = (ring[i][0], ring[i][1])
            b = (ring[(i + 1) % len(ring)][0], ring[(i + 1) % len(ring)][1])
            if point_on_segment(p, a, b):
                return True
    crossings = 0
    for ring in poly.rings():
        n = len(ring)
        for i in range(n):
            ax, ay = ring[i]
            bx, by = ring[(i + 1) % n]
            if (ay > y) != (by > y):
                xi = ax + (y - ay) * (bx - ax) / (by - ay)
                if x < xi:
                    crossings += 1
    return crossings % 2 == 1


def segments_intersect(p1, p2, q1, q2) -> bool:
    """Closed-segment intersection test, collinear overlaps included."""
    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _within_bbox(p1, q1, q2):
        return True
    if d2 == 0 and _within_bbox(p2, q1, q2):
        return True
    if d3 == 0 and _within_bbox(q1, p1, p2):
        return True
    if d4 == 0 and _within_bbox(q2, p1, p2):
        return True
    return False


def _within_bbox(p, a, b) -> bool:
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def point_in_triangle(p, a, b, c) -> bool:
    """Boundary-inclusive containment in triangle abc (any orientation)."""
    d1 = orient(a, b, p)
    d2 = orient(b, c, p)
    d3 = orient(c, a, p)
    has_neg = (d1 < 0) or (d2 < 0) or (d3 < 0)
    has_pos = (d1 > 0) or (d2 > 0) or (d3 > 0)
    return not (has_neg and has_pos)


def segment_intersects_triangle(seg_a, seg_b, tri) -> bool:
    """True iff the segment touches the triangle's interior or boundary."""
    a, b, c = tri
    if point_in_triangle(seg_a, a, b, c) or point_in_triangle(seg_b, a, b, c):
        return True
    for e0, e1 in ((a, b), (b, c), (c, a)):
        if segments_intersect(seg_a, seg_b, e0, e1):
            return True
    return False


# ---------------------------------------------------------------------------
# Triangle measures
# ---------------------------------------------------------------------------

def triangle_area(a, b, c) -> float:
    return abs(orient(a, b, c)) / 2.0


def triangle_sides(a, b, c) -> tuple[float, float, float]:
    return (math.hypot(b[0] - c[0], b[1] - c[1]),
            math.hypot(a[0] - c[0], a[1] - c[1]),
            math.hypot(a[0] - b[0], a[1] - b[1]))


def triangle_centroid(a, b, c) -> Point:
    return ((a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0)


# ---------------------------------------------------------------------------
# Rectangle clipping
#
# A polygon is cut against the four half-planes of the rectangle in a
# fixed order.  Each cut re-stitches the surviving boundary chains along
# the cut line, so concave subjects split into genuinely separate simple
# pieces instead of acquiring zero-width bridges.
# ---------------------------------------------------------------------------

def _cut_ring(ring: list[Point], axis: int, c: float, keep_greater: bool) -> list[list[Point]]:
    """Cut one simple ring by an axis-parallel line, keep one side.

    Returns simple rings (original orientation preserved). Vertices
    exactly on the line belong to the kept side.
    """
    n = len(ring)
    sides = []
    for v in ring:
        d = v[axis] - c
        if d == 0.0:
            sides.append(0)
        else:
            sides.append(1 if (d > 0.0) == keep_greater else -1)

    if all(s >= 0 for s in sides):
        return [ring]
    if all(s <= 0 for s in sides):
        return []

    # Augment with crossing points so every vertex is classifiable.
    aug: list[tuple[Point, int]] = []
    for i in range(n):
        a, sa = ring[i], sides[i]
        b, sb = ring[(i + 1) % n], sides[(i + 1) % n]
        aug.append((a, sa))
        if sa * sb < 0:
            t = (c - a[axis]) / (b[axis] - a[axis])
            if axis == 0:
                p = (c, a[1] + t * (b[1] - a[1]))
            else:
                p = (a[0] + t * (b[0] - a[0]), c)
            aug.append((p, 0))

    # Rotate so the walk starts strictly on the discarded side.
    start = next(i for i, (_, s) in enumerate(aug) if s < 0)
    aug = aug[start:] + aug[:start]

    # Maximal kept runs; runs entirely on the line are zero-area slivers.
    chains: list[list[Point]] = []
    current: list[tuple[Point, int]] = []
    for v, s in aug:
        if s >= 0:
            current.append((v, s))
        else:
            if current and any(cs > 0 for _, cs in current):
                chains.append([p for p, _ in current])
            current = []
    if current and any(cs > 0 for _, cs in current):
        chains.append([p for p, _ in current])
    if not chains:
        return []

    other = 1 - axis
    ascending = (axis == 1) == keep_greater
    events = []  # (coord along line, kind, chain index); kind 0=exit, 1=entry
    for ci, ch in enumerate(chains):
        events.append((ch[0][other], 1, ci))
        events.append((ch[-1][other], 0, ci))
    events.sort(key=lambda e: (e[0] if ascending else -e[0], e[1], e[2]))

    next_chain = {}
    pending_exit = None
    for coord, kind, ci in events:
        if kind == 0:
            if pending_exit is not None:
                raise DegenerateGeometry("self-intersecting ring in rectangle cut")
            pending_exit = ci
        else:
            if pending_exit is None:
                raise DegenerateGeometry("self-intersecting ring in rectangle cut")
            next_chain[pending_exit] = ci
            pending_exit = None
    if pending_exit is not None:
        raise DegenerateGeometry("unmatched boundary chain in rectangle cut")

    pieces = []
    visited = set()
    for ci in range(len(chains)):
        if ci in visited:
            continue
        piece: list[Point] = []
        cur = ci
        while cur not in visited:
            visited.add(cur)
            piece.extend(chains[cur])
            cur = next_chain[cur]
        pieces.append(piece)

    out = []
    for piece in pieces:
        cleaned: list[Point] = []
        for p in piece:
            if not cleaned or p != cleaned[-1]:
                cleaned.append(p)
        while len(cleaned) > 1 and cleaned[0] == cleaned[-1]:
            cleaned.pop()
        if len(cleaned) >= 3 and abs(ring_signed_area(cleaned)) > 1e-9:
            out.append(cleaned)
    return out


def _clip_ring_to_rect(ring: list[Point], rect: Rect) -> list[list[Point]]:
    xmin, ymin, xmax, ymax = rect
    pieces = [ring]
    for axis, c, keep_greater in ((0, xmin, True), (0, xmax, False),
                                  (1, ymin, True), (1, ymax, False)):
        nxt = []
        for r in pieces:
            nxt.extend(_cut_ring(r, axis, c, keep_greater))
        pieces = nxt
        if not pieces:
            return []
    return pieces


def _interior_point(ring: list[Point]) -> Point:
    """A point strictly inside a simple ring (widest scanline interval)."""
    ys = [p[1] for p in ring]
    y = (min(ys) + max(ys)) / 2.0
    xs = []
    n = len(ring)
    for i in range(n):
        ax, ay = ring[i]
        bx, by = ring[(i + 1) % n]
        if (ay > y) != (by > y):
            xs.append(ax + (y - ay) * (bx - ax) / (by - ay))
    xs.sort()
    best, width = None, -1.0
    for k in range(0, len(xs) - 1, 2):
        w = xs[k + 1] - xs[k]
        if w > width:
            width = w
            best = ((xs[k] + xs[k + 1]) / 2.0, y)
    if best is None:  # degenerate sliver; fall back to vertex mean
        return (sum(p[0] for p in ring) / n, sum(p[1] for p in ring) / n)
    return best


def clip_polygon_to_rect(poly: Polygon, rect: Rect) -> list[Polygon]:
    """Intersect a polygon with an axis-aligned rectangle.

    Returns a list of simple polygons covering poly ∩ rect; holes are
    clipped alongside and reattached to the exterior piece containing
    them. Disjoint inputs yield an empty list.
    """
    xmin, ymin, xmax, ymax = rect
    if xmax <= xmin or ymax <= ymin:
        raise DegenerateGeometry("clip rectangle must have positive extent")
    bx0, by0, bx1, by1 = poly.bbox()
    if bx1 < xmin or bx0 > xmax or by1 < ymin or by0 > ymax:
        return []

    ext_pieces = _clip_ring_to_rect([tuple(p) for p in poly.exterior], rect)
    if not ext_pieces:
        return []
    hole_pieces: list[list[Point]] = []
    for h in poly.holes:
        hole_pieces.extend(_clip_ring_to_rect([tuple(p) for p in h[::-1]], rect))

    results = [(piece, []) for piece in ext_pieces]
    for hp in hole_pieces:
        probe = _interior_point(hp)
        target = None
        for piece, holes in results:
            if point_in_ring(probe, piece):
                target = holes
                break
        if target is None:  # touching-degenerate: attach to largest piece
            target = max(results, key=lambda r: abs(ring_signed_area(r[0])))[1]
        target.append(hp)

    out = []
    for piece, holes in results:
        out.append(Polygon(np.asarray(piece, dtype=float),
                           [np.asarray(h, dtype=float) for h in holes]))
    return out


def clip_area(poly: Polygon, rect: Rect) -> float:
    """Area of poly ∩ rect (sum over clipped pieces)."""
    return sum(p.area for p in clip_polygon_to_rect(poly, rect))


def clip_ring_area(ring: np.ndarray, rect: Rect) -> float:
    """Area of a bare CCW ring intersected with rect (no Polygon wrapping)."""
    pieces = _clip_ring_to_rect([tuple(p) for p in ring], rect)
    return sum(abs(ring_signed_area(p)) for p in pieces)


class SpatialIndex:
    """Uniform-grid index over bounding boxes.

    query(rect) returns a superset of the ids whose boxes intersect the
    rectangle; exact geometry tests remain the caller's job.
    """

    def __init__(self, bboxes: list[Rect], target_per_bin: float = 4.0):
        self._boxes = list(bboxes)
        if not self._boxes:
            self._empty = True
            return
        self._empty = False
        xs0 = min(b[0] for b in self._boxes)
        ys0 = min(b[1] for b in self._boxes)
        xs1 = max(b[2] for b in self._boxes)
        ys1 = max(b[3] for b in self._boxes)
        n = len(self._boxes)
        span = max(xs1 - xs0, ys1 - ys0, 1e-9)
        nbins = max(1, int(math.sqrt(n / target_per_bin)))
        self._x0, self._y0 = xs0, ys0
        self._step = span / nbins
        self._bins: dict[tuple[int, int], list[int]] = {}
        for i, (x0, y0, x1, y1) in enumerate(self._boxes):
            for kx in range(self._bin(x0), self._bin(x1) + 1):
                for ky in range(self._bin(y0, True), self._bin(y1, True) + 1):
                    self._bins.setdefault((kx, ky), []).append(i)

    def _bin(self, v: float, is_y: bool = False) -> int:
        o = self._y0 if is_y else self._x0
        return int((v - o) / self._step)

    def query(self, rect: Rect) -> list[int]:
        if self._empty:
            return []
        x0, y0, x1, y1 = rect
        seen = set()
        out = []
        for kx in range(self._bin(x0), self._bin(x1) + 1):
            for ky in range(self._bin(y0, True), self._bin(y1, True) + 1):
                for i in self._bins.get((kx, ky), ()):
                    if i in seen:
                        continue
                    seen.add(i)
                    bx0, by0, bx1, by1 = self._boxes[i]
                    if bx1 >= x0 and bx0 <= x1 and by1 >= y0 and by0 <= y1:
                        out.append(i)
        out.sort()
        return out

    def __len__(self) -> int:
        return 0 if self._empty else len(self._boxes)
