"""Constrained Delaunay triangulation.

Incremental Bowyer-Watson with a single symbolic "ghost" vertex closing
the hull (ghost triangles stand in for the unbounded face, so hull
updates are ordinary cavity operations), followed by constraint-edge
enforcement (crossed triangles removed, both cavities re-triangulated
against the Delaunay criterion) and a restricted flip pass.

Input segments that cross each other, or vertices that fall on a
segment's interior, are pre-noded: intersection points are inserted and
segments split, because real building layers contain shared walls and
digitization noise. Pre-noding can be disabled, in which case such
inputs raise :class:`CrossingConstraints`.

Coordinates are translated to the scene center internally so the
predicates stay well conditioned for projected coordinates in the 1e5+
meter range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CrossingConstraints, DegenerateGeometry
from .geometry import SNAP_TOL, SpatialIndex, orient

GHOST = -1


@dataclass
class Triangulation:
    """Result of :func:`constrained_delaunay`.

    triangles are CCW index triples into ``points``. ``vertex_map`` maps
    every input point index to its (possibly merged) output vertex.
    ``synthetic_tags`` lists vertices created by pre-noding together
    with the tags of the segments that produced them.
    """

    points: np.ndarray
    triangles: list[tuple[int, int, int]]
    constrained_edges: dict[frozenset, set] = field(default_factory=dict)
    vertex_map: list[int] = field(default_factory=list)
    synthetic_tags: dict[int, set] = field(default_factory=dict)

    def edges(self) -> set[frozenset]:
        out = set()
        for a, b, c in self.triangles:
            out.add(frozenset((a, b)))
            out.add(frozenset((b, c)))
            out.add(frozenset((c, a)))
        return out

    def is_constrained(self, u: int, v: int) -> bool:
        return frozenset((u, v)) in self.constrained_edges


def _in_circle(pa, pb, pc, pd) -> float:
    """Positive when pd is strictly inside the circumcircle of CCW (pa, pb, pc)."""
    adx, ady = pa[0] - pd[0], pa[1] - pd[1]
    bdx, bdy = pb[0] - pd[0], pb[1] - pd[1]
    cdx, cdy = pc[0] - pd[0], pc[1] - pd[1]
    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    return (adx * (bdy * cd - cdy * bd)
            - ady * (bdx * cd - cdx * bd)
            + ad * (bdx * cdy - cdx * bdy))


def _canon(a: int, b: int, c: int) -> tuple[int, int, int]:
    if a <= b and a <= c:
        return (a, b, c)
    if b <= a and b <= c:
        return (b, c, a)
    return (c, a, b)


class _Builder:
    """Mesh state for one triangulation run.

    Coordinates are stored translated to the scene center. The hull is
    closed by ghost triangles (v, u, GHOST), one per hull edge (u, v)
    with the mesh on the left of u->v.
    """

    def __init__(self, pts: list[tuple[float, float]]):
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        self.cx = (min(xs) + max(xs)) / 2.0
        self.cy = (min(ys) + max(ys)) / 2.0
        self.n = len(pts)
        self.coords: dict[int, tuple[float, float]] = {
            i: (x - self.cx, y - self.cy) for i, (x, y) in enumerate(pts)}
        self.tris: set[tuple[int, int, int]] = set()
        self.edge2tris: dict[frozenset, list] = {}
        self.vert2tris: dict[int, set] = {}
        self.constrained: dict[frozenset, set] = {}
        self._last: tuple[int, int, int] | None = None

    def build(self) -> bool:
        """Bootstrap from the first non-collinear triple, insert the rest.

        Returns False when all points are collinear (no triangulation).
        """
        seed3 = None
        for k in range(2, self.n):
            o = orient(self.coords[0], self.coords[1], self.coords[k])
            if o != 0.0:
                seed3 = (0, 1, k) if o > 0.0 else (1, 0, k)
                break
        if seed3 is None:
            return False
        a, b, c = seed3
        self._add_tri(a, b, c)
        self._add_tri(b, a, GHOST)
        self._add_tri(c, b, GHOST)
        self._add_tri(a, c, GHOST)
        self._last = _canon(a, b, c)
        used = set(seed3)
        for i in range(self.n):
            if i not in used:
                self.insert_point(i)
        return True

    # -- mesh bookkeeping ---------------------------------------------------

    def _add_tri(self, a: int, b: int, c: int):
        t = _canon(a, b, c)
        self.tris.add(t)
        for e in (frozenset((a, b)), frozenset((b, c)), frozenset((c, a))):
            self.edge2tris.setdefault(e, []).append(t)
        for v in t:
            self.vert2tris.setdefault(v, set()).add(t)

    def _remove_tri(self, t: tuple[int, int, int]):
        self.tris.discard(t)
        a, b, c = t
        for e in (frozenset((a, b)), frozenset((b, c)), frozenset((c, a))):
            lst = self.edge2tris.get(e)
            if lst is not None:
                if t in lst:
                    lst.remove(t)
                if not lst:
                    del self.edge2tris[e]
        for v in t:
            s = self.vert2tris.get(v)
            if s is not None:
                s.discard(t)

    def _neighbor(self, t, u: int, v: int):
        for other in self.edge2tris.get(frozenset((u, v)), ()):
            if other != t:
                return other
        return None

    # -- predicates with ghost handling --------------------------------------

    def _circ_contains(self, t: tuple[int, int, int], p: tuple[float, float]) -> bool:
        """Conflict test: p inside circumcircle, or beyond the hull edge of a ghost."""
        if GHOST in t:
            k = t.index(GHOST)
            u, v = t[(k + 1) % 3], t[(k + 2) % 3]
            o = orient(self.coords[u], self.coords[v], p)
            if o > 0.0:
                return True
            if o == 0.0:
                pu, pv = self.coords[u], self.coords[v]
                return (min(pu[0], pv[0]) <= p[0] <= max(pu[0], pv[0])
                        and min(pu[1], pv[1]) <= p[1] <= max(pu[1], pv[1])
                        and p != pu and p != pv)
            return False
        return _in_circle(self.coords[t[0]], self.coords[t[1]], self.coords[t[2]], p) > 0.0


    # -- point insertion ------------------------------------------------------

    def _locate(self, p: tuple[float, float]):
        """Walk to a real triangle containing p, or to the ghost triangle of a
        hull edge that p lies beyond."""
        t = self._last if self._last in self.tris else next(t for t in self.tris if GHOST not in t)
        for _ in range(4 * len(self.tris) + 16):
            if GHOST in t:
                return t
            a, b, c = t
            moved = False
            for u, v in ((a, b), (b, c), (c, a)):
                if orient(self.coords[u], self.coords[v], p) < 0.0:
                    nxt = self._neighbor(t, u, v)
                    if nxt is not None:
                        t = nxt
                        moved = True
                        break
            if not moved:
                return t
        for t in sorted(self.tris):  # fallback for degenerate walk cycles
            if GHOST in t:
                if self._circ_contains(t, p):
                    return t
                continue
            a, b, c = t
            if (orient(self.coords[a], self.coords[b], p) >= 0.0
                    and orient(self.coords[b], self.coords[c], p) >= 0.0
                    and orient(self.coords[c], self.coords[a], p) >= 0.0):
                return t
        raise DegenerateGeometry("point location failed")

    def insert_point(self, idx: int):
        p = self.coords[idx]
        seed = self._locate(p)
        cavity = {seed}
        stack = [seed]
        while stack:
            t = stack.pop()
            a, b, c = t
            for u, v in ((a, b), (b, c), (c, a)):
                n = self._neighbor(t, u, v)
                if n is not None and n not in cavity and self._circ_contains(n, p):
                    cavity.add(n)
                    stack.append(n)
        boundary = []
        for t in cavity:
            a, b, c = t
            for u, v in ((a, b), (b, c), (c, a)):
                n = self._neighbor(t, u, v)
                if n is None or n not in cavity:
                    boundary.append((u, v))
        for t in list(cavity):
            self._remove_tri(t)
        for u, v in boundary:
            self._add_tri(u, v, idx)
        for u, v in boundary:  # keep the walk anchored at a real triangle
            if u != GHOST and v != GHOST:
                self._last = _canon(u, v, idx)
                break

    # -- constraint enforcement -----------------------------------------------

    def insert_constraint(self, u: int, v: int, tags: set):
        if u == v:
            return
        key = frozenset((u, v))
        if key in self.edge2tris:
            self.constrained.setdefault(key, set()).update(tags)
            return
        pu, pv = self.coords[u], self.coords[v]

        start = None
        for t in sorted(self.vert2tris.get(u, ())):
            if GHOST in t:
                continue
            rest = [w for w in t if w != u]
            a, b = rest
            # order (u, a, b) CCW
            if orient(pu, self.coords[a], self.coords[b]) < 0.0:
                a, b = b, a
            oa = orient(pu, self.coords[a], pv)
            ob = orient(pu, self.coords[b], pv)
            if oa == 0.0 and self._between(u, a, v):
                self.insert_constraint(u, a, tags)
                self.insert_constraint(a, v, tags)
                return
            if ob == 0.0 and self._between(u, b, v):
                self.insert_constraint(u, b, tags)
                self.insert_constraint(b, v, tags)
                return
            if oa > 0.0 and ob < 0.0:
                start = (t, a, b)
                break
        if start is None:
            raise DegenerateGeometry(f"no triangle at vertex {u} faces constraint target {v}")

        t, a, b = start
        # a is right of u->v, b is left
        lower, upper = [a], [b]
        crossed = [t]
        right_end, left_end = a, b
        while True:
            n = self._neighbor(crossed[-1], right_end, left_end)
            if n is None:
                raise DegenerateGeometry("constraint walk left the triangulation")
            w = next(x for x in n if x != right_end and x != left_end)
            crossed.append(n)
            if w == v:
                break
            s = orient(pu, pv, self.coords[w])
            if s == 0.0 and self._between(u, w, v):
                # hit a vertex on the segment; split and restart
                self.insert_constraint(u, w, tags)
                self.insert_constraint(w, v, tags)
                return
            if s > 0.0:
                upper.append(w)
                left_end = w
            else:
                lower.append(w)
                right_end = w

        for t in crossed:
            self._remove_tri(t)
        self._retriangulate(u, v, upper, left_side=True)
        self._retriangulate(u, v, lower, left_side=False)
        self.constrained.setdefault(key, set()).update(tags)

    def _between(self, u: int, w: int, v: int) -> bool:
        pu, pw, pv = self.coords[u], self.coords[w], self.coords[v]
        return (min(pu[0], pv[0]) - SNAP_TOL <= pw[0] <= max(pu[0], pv[0]) + SNAP_TOL
                and min(pu[1], pv[1]) - SNAP_TOL <= pw[1] <= max(pu[1], pv[1]) + SNAP_TOL
                and w != u and w != v)

    def _retriangulate(self, a: int, b: int, chain: list[int], left_side: bool):
        """Fill one side of edge (a, b) with Delaunay triangles over chain."""
        if not chain:
            return
        ci = 0
        for i in range(1, len(chain)):
            tri = ((a, b, chain[ci]) if left_side else (a, chain[ci], b))
            if self._circ_contains_real(tri, chain[i]):
                ci = i
        c = chain[ci]
        if left_side:
            self._add_tri(a, b, c)
        else:
            self._add_tri(a, c, b)
        self._retriangulate(a, c, chain[:ci], left_side)
        self._retriangulate(c, b, chain[ci + 1:], left_side)

    def _circ_contains_real(self, t, w: int) -> bool:
        return _in_circle(self.coords[t[0]], self.coords[t[1]], self.coords[t[2]],
                          self.coords[w]) > 0.0

    # -- final legalization -----------------------------------------------------

    def legalize(self, max_rounds: int = 50):
        for _ in range(max_rounds):
            flipped = 0
            for e in list(self.edge2tris.keys()):
                if e not in self.edge2tris or e in self.constrained:
                    continue
                pair = self.edge2tris[e]
                if len(pair) != 2:
                    continue
                t1, t2 = pair
                if GHOST in t1 or GHOST in t2:
                    continue
                u, v = tuple(e)
                w1 = next(x for x in t1 if x not in e)
                w2 = next(x for x in t2 if x not in e)
                # make (u, v, w1) the CCW version
                if orient(self.coords[u], self.coords[v], self.coords[w1]) < 0.0:
                    u, v = v, u
                det = _in_circle(self.coords[u], self.coords[v], self.coords[w1],
                                 self.coords[w2])
                scale = max(abs(self.coords[x][0]) + abs(self.coords[x][1])
                            for x in (u, v, w1, w2)) + 1.0
                if det <= 1e-12 * scale ** 4:
                    continue
                if (orient(self.coords[u], self.coords[w2], self.coords[w1]) <= 0.0
                        or orient(self.coords[w2], self.coords[v], self.coords[w1]) <= 0.0):
                    continue
                self._remove_tri(t1)
                self._remove_tri(t2)
                self._add_tri(u, w2, w1)
                self._add_tri(w2, v, w1)
                flipped += 1
            if flipped == 0:
                return
        raise DegenerateGeometry("edge legalization did not converge")

    def result(self) -> tuple[np.ndarray, list, dict]:
        pts = np.array([[self.coords[i][0] + self.cx, self.coords[i][1] + self.cy]
                        for i in range(self.n)], dtype=float)
        tris = sorted(t for t in self.tris if GHOST not in t)
        return pts, tris, self.constrained


# ---------------------------------------------------------------------------
# Input conditioning
# ---------------------------------------------------------------------------

def _snap_points(points) -> tuple[list[tuple[float, float]], list[int]]:
    decimals = max(0, int(round(-math.log10(SNAP_TOL))))
    seen: dict[tuple[float, float], int] = {}
    out: list[tuple[float, float]] = []
    vmap: list[int] = []
    for p in points:
        key = (round(float(p[0]), decimals), round(float(p[1]), decimals))
        idx = seen.get(key)
        if idx is None:
            idx = len(out)
            seen[key] = idx
            out.append((float(p[0]), float(p[1])))
        vmap.append(idx)
    return out, vmap


def _seg_intersection(p1, p2, q1, q2):
    """Interior crossing point of two segments, or None.

    Collinear configurations return None (handled by the on-segment
    vertex pass instead).
    """
    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != d2 and d3 != d4:
        t = d3 / (d3 - d4)
        x = q1[0] + t * (q2[0] - q1[0])
        y = q1[1] + t * (q2[1] - q1[1])
        return (x, y)
    return None


def _prenode(pts: list[tuple[float, float]],
             segments: dict[frozenset, set],
             allowed: bool) -> tuple[list, dict, dict]:
    """Split constraint segments at crossings and at on-segment vertices."""
    synthetic: dict[int, set] = {}
    pt_keys = {(round(x, 6), round(y, 6)): i for i, (x, y) in enumerate(pts)}

    def add_point(x: float, y: float, tags: set) -> int:
        key = (round(x, 6), round(y, 6))
        idx = pt_keys.get(key)
        if idx is None:
            idx = len(pts)
            pts.append((x, y))
            pt_keys[key] = idx
            synthetic[idx] = set(tags)
        elif idx in synthetic:
            synthetic[idx].update(tags)
        return idx

    for _round in range(30):
        changed = False

        # vertices sitting on a segment's interior split that segment
        seg_list = list(segments.items())
        boxes = []
        for e, _tags in seg_list:
            u, v = tuple(e)
            (x1, y1), (x2, y2) = pts[u], pts[v]
            boxes.append((min(x1, x2) - SNAP_TOL, min(y1, y2) - SNAP_TOL,
                          max(x1, x2) + SNAP_TOL, max(y1, y2) + SNAP_TOL))
        pt_boxes = [(x, y, x, y) for (x, y) in pts]
        pt_index = SpatialIndex(pt_boxes)

        for si, (e, tags) in enumerate(seg_list):
            if e not in segments:
                continue
            u, v = tuple(e)
            pu, pv = pts[u], pts[v]
            hits = []
            for pi in pt_index.query(boxes[si]):
                if pi in e:
                    continue
                p = pts[pi]
                if _point_strictly_on(p, pu, pv):
                    hits.append(pi)
            if hits:
                if not allowed:
                    raise CrossingConstraints(
                        f"vertex {hits[0]} lies on constraint {tuple(e)} and pre-noding is off")
                hits.sort(key=lambda i: (pts[i][0] - pu[0]) ** 2 + (pts[i][1] - pu[1]) ** 2)
                del segments[e]
                prev = u
                for h in hits:
                    nk = frozenset((prev, h))
                    if len(nk) == 2:
                        segments.setdefault(nk, set()).update(tags)
                    prev = h
                nk = frozenset((prev, v))
                if len(nk) == 2:
                    segments.setdefault(nk, set()).update(tags)
                changed = True

        if changed:
            continue

        # proper interior crossings create a new shared vertex
        seg_list = list(segments.items())
        boxes = []
        for e, _tags in seg_list:
            u, v = tuple(e)
            (x1, y1), (x2, y2) = pts[u], pts[v]
            boxes.append((min(x1, x2), min(y1, y2), max(x1, x2), max(y1, y2)))
        index = SpatialIndex(boxes)
        for si, (e1, tags1) in enumerate(seg_list):
            if e1 not in segments:
                continue
            for sj in index.query(boxes[si]):
                if sj <= si:
                    continue
                e2, tags2 = seg_list[sj]
                if e2 not in segments or e1 not in segments:
                    continue
                if e1 & e2:
                    continue
                u1, v1 = tuple(e1)
                u2, v2 = tuple(e2)
                x = _seg_intersection(pts[u1], pts[v1], pts[u2], pts[v2])
                if x is None:
                    continue
                if not allowed:
                    raise CrossingConstraints(
                        f"constraints {tuple(e1)} and {tuple(e2)} cross at {x}")
                w = add_point(x[0], x[1], tags1 | tags2)
                for (e, tags, a, b) in ((e1, tags1, u1, v1), (e2, tags2, u2, v2)):
                    if w == a or w == b:
                        continue
                    del segments[e]
                    segments.setdefault(frozenset((a, w)), set()).update(tags)
                    segments.setdefault(frozenset((w, b)), set()).update(tags)
                changed = True
                break
        if not changed:
            return pts, segments, synthetic
    raise DegenerateGeometry("constraint pre-noding did not converge")


def _point_strictly_on(p, a, b) -> bool:
    if (math.hypot(p[0] - a[0], p[1] - a[1]) <= SNAP_TOL
            or math.hypot(p[0] - b[0], p[1] - b[1]) <= SNAP_TOL):
        return False
    dx, dy = b[0] - a[0], b[1] - a[1]
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return False
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L2
    if t <= 0.0 or t >= 1.0:
        return False
    qx, qy = a[0] + t * dx, a[1] + t * dy
    return math.hypot(p[0] - qx, p[1] - qy) <= SNAP_TOL


def constrained_delaunay(points, constraints=(), tags=None, prenode: bool = True) -> Triangulation:
    """Triangulate ``points`` with the given segments forced as edges.

    points: (N, 2) array-like of planar coordinates.
    constraints: iterable of (i, j) index pairs into ``points``.
    tags: optional per-constraint labels carried onto output edges.
    prenode: split crossing/overlapping constraints instead of raising.

    The triangulation covers the convex hull; every constraint appears
    as a union of output edges; non-constrained edges are locally
    Delaunay.
    """
    pts_raw = [(float(p[0]), float(p[1])) for p in np.asarray(points, dtype=float)]
    if len(pts_raw) < 3:
        return Triangulation(points=np.asarray(pts_raw, dtype=float), triangles=[],
                             vertex_map=list(range(len(pts_raw))))
    pts, vmap = _snap_points(pts_raw)

    constraints = list(constraints)
    if tags is None:
        tags = [None] * len(constraints)
    segs: dict[frozenset, set] = {}
    for (i, j), tag in zip(constraints, tags):
        u, v = vmap[i], vmap[j]
        if u == v:
            continue
        segs.setdefault(frozenset((u, v)), set()).add(tag)

    synthetic: dict[int, set] = {}
    if segs:
        pts, segs, synthetic = _prenode(pts, segs, allowed=prenode)

    if len(pts) < 3:
        return Triangulation(points=np.asarray(pts, dtype=float), triangles=[],
                             vertex_map=vmap, synthetic_tags=synthetic)

    b = _Builder(pts)
    if not b.build():  # all points collinear
        return Triangulation(points=np.asarray(pts, dtype=float), triangles=[],
                             vertex_map=vmap, synthetic_tags=synthetic)
    for e in sorted(segs.keys(), key=lambda e: tuple(sorted(e))):
        b.insert_constraint(*sorted(e), segs[e])
    b.legalize()

    out_pts, out_tris, constrained = b.result()
    return Triangulation(points=out_pts, triangles=out_tris,
                         constrained_edges=constrained, vertex_map=vmap,
                         synthetic_tags=synthetic)
