"""Exact integer axis-parallel geometry: points, segments, open rectangles,
simple rectilinear polygons, and the predicates the rest of the toolkit
relies on.

All arithmetic is integral.  Where a midpoint or half-unit probe is needed
(edge-side classification, point-in-polygon for cell centers) coordinates
are doubled internally so every test stays in the integers.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence


class GeometryError(ValueError):
    """Malformed geometric input."""


class CutError(GeometryError):
    """A cut that leaves the polygon, crosses itself, or fails to separate."""


@dataclass(frozen=True, order=True)
class Point:
    x: int
    y: int

    def __iter__(self) -> Iterator[int]:
        return iter((self.x, self.y))


@dataclass(frozen=True)
class Segment:
    """Axis-parallel closed segment; may be a single point where the caller
    explicitly allows it (degenerate fences)."""

    a: Point
    b: Point

    def __post_init__(self) -> None:
        if self.a.x != self.b.x and self.a.y != self.b.y:
            raise GeometryError(f"segment not axis-parallel: {self.a}-{self.b}")

    @property
    def horizontal(self) -> bool:
        return self.a.y == self.b.y and self.a.x != self.b.x

    @property
    def vertical(self) -> bool:
        return self.a.x == self.b.x and self.a.y != self.b.y

    @property
    def degenerate(self) -> bool:
        return self.a == self.b

    @property
    def length(self) -> int:
        return abs(self.a.x - self.b.x) + abs(self.a.y - self.b.y)

    def canonical(self) -> "Segment":
        lo, hi = sorted((self.a, self.b))
        return Segment(lo, hi)

    def contains_point(self, p: Point) -> bool:
        lo, hi = sorted((self.a, self.b))
        if self.a.x == self.b.x:
            return p.x == self.a.x and lo.y <= p.y <= hi.y
        return p.y == self.a.y and lo.x <= p.x <= hi.x

    def interior_contains(self, p: Point) -> bool:
        return self.contains_point(p) and p != self.a and p != self.b


@dataclass(frozen=True)
class Rect:
    """Open axis-parallel rectangle {(x,y) | xl<x<xr, yb<y<yt}."""

    xl: int
    yb: int
    xr: int
    yt: int

    def __post_init__(self) -> None:
        if not (self.xl < self.xr and self.yb < self.yt):
            raise GeometryError(f"degenerate rectangle {self!r}")

    def corner(self, name: str) -> Point:
        return {
            "TL": Point(self.xl, self.yt),
            "TR": Point(self.xr, self.yt),
            "BL": Point(self.xl, self.yb),
            "BR": Point(self.xr, self.yb),
        }[name]

    @property
    def top_edge(self) -> Segment:
        return Segment(Point(self.xl, self.yt), Point(self.xr, self.yt))

    @property
    def bottom_edge(self) -> Segment:
        return Segment(Point(self.xl, self.yb), Point(self.xr, self.yb))

    @property
    def left_edge(self) -> Segment:
        return Segment(Point(self.xl, self.yb), Point(self.xl, self.yt))

    @property
    def right_edge(self) -> Segment:
        return Segment(Point(self.xr, self.yb), Point(self.xr, self.yt))

    def contains_open(self, p: Point) -> bool:
        return self.xl < p.x < self.xr and self.yb < p.y < self.yt

    def area(self) -> int:
        return (self.xr - self.xl) * (self.yt - self.yb)


def rects_intersect(a: Rect, b: Rect) -> bool:
    """True iff the open interiors share a point (boundary contact is not
    an intersection)."""
    return (
        max(a.xl, b.xl) < min(a.xr, b.xr) and max(a.yb, b.yb) < min(a.yt, b.yt)
    )


def segment_intersects_rect(s: Segment, r: Rect) -> bool:
    """True iff s contains a point strictly inside r.

    A segment running along r's boundary (e.g. covering its whole top edge)
    does not intersect r: the rectangle is an open set.
    """
    lo, hi = sorted((s.a, s.b))
    if s.a.x == s.b.x:  # vertical or degenerate
        if not (r.xl < s.a.x < r.xr):
            return False
        return lo.y < r.yt and hi.y > r.yb
    if not (r.yb < s.a.y < r.yt):
        return False
    return lo.x < r.xr and hi.x > r.xl


def edge_distance(k: int, i: int, j: int) -> int:
    """Cyclic distance min(j-i, k-j+i) between edge indices of a k-edge
    polygon."""
    if not (0 <= i < k and 0 <= j < k):
        raise IndexError(f"edge index out of range: i={i}, j={j}, k={k}")
    if i > j:
        i, j = j, i
    return min(j - i, k - j + i)


def _signed_area2(vertices: Sequence[Point]) -> int:
    total = 0
    n = len(vertices)
    for idx in range(n):
        p, q = vertices[idx], vertices[(idx + 1) % n]
        total += p.x * q.y - q.x * p.y
    return total


def _merge_collinear(vertices: list[Point]) -> list[Point]:
    out = list(vertices)
    changed = True
    while changed and len(out) > 2:
        changed = False
        n = len(out)
        for idx in range(n):
            p, q, r = out[(idx - 1) % n], out[idx], out[(idx + 1) % n]
            if (p.x == q.x == r.x) or (p.y == q.y == r.y) or p == q:
                del out[idx]
                changed = True
                break
    return out


class RectPolygon:
    """Simple rectilinear polygon, canonicalized: clockwise vertex order
    starting at the lexicographically smallest vertex, collinear edges
    merged.

    Non-simple vertex loops (pinched components produced by degenerate
    cuts) are representable but flagged via ``is_simple``; only simple
    polygons may be used as partition/DP cells.
    """

    __slots__ = ("vertices", "is_simple", "_hash", "_grid", "_vclass", "_rows")

    def __init__(self, vertices: Iterable[Point]):
        vs = _merge_collinear(list(vertices))
        if len(vs) < 4:
            raise GeometryError(f"too few vertices for a rectilinear polygon: {vs}")
        for p, q in zip(vs, vs[1:] + vs[:1]):
            if p.x != q.x and p.y != q.y:
                raise GeometryError(f"edge {p}-{q} not axis-parallel")
        if _signed_area2(vs) == 0:
            raise GeometryError("zero-area vertex loop")
        if _signed_area2(vs) > 0:  # counter-clockwise in y-up coordinates
            vs.reverse()
        start = min(range(len(vs)), key=lambda i: (vs[i].x, vs[i].y))
        vs = vs[start:] + vs[:start]
        self.vertices: tuple[Point, ...] = tuple(vs)
        self.is_simple = self._check_simple()
        self._hash = hash(self.vertices)
        self._grid = None
        self._vclass = None
        self._rows = None

    # -- identity ---------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RectPolygon) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"RectPolygon({[(p.x, p.y) for p in self.vertices]})"

    # -- basic structure --------------------------------------------------

    @classmethod
    def from_rect(cls, r: Rect) -> "RectPolygon":
        return cls(
            [Point(r.xl, r.yb), Point(r.xl, r.yt), Point(r.xr, r.yt), Point(r.xr, r.yb)]
        )

    def edges(self) -> list[Segment]:
        vs = self.vertices
        return [Segment(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))]

    @property
    def num_edges(self) -> int:
        return len(self.vertices)

    def area2(self) -> int:
        return abs(_signed_area2(self.vertices))

    def bbox(self) -> tuple[int, int, int, int]:
        xs = [p.x for p in self.vertices]
        ys = [p.y for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def _check_simple(self) -> bool:
        vs = self.vertices
        if len(set(vs)) != len(vs):
            return False
        segs = self.edges()
        n = len(segs)
        for i in range(n):
            for j in range(i + 1, n):
                adjacent = j == i + 1 or (i == 0 and j == n - 1)
                if _segments_touch(segs[i], segs[j], allow_shared_endpoint=adjacent):
                    return False
        return True

    # -- exact point membership -------------------------------------------

    def contains_doubled(self, X: int, Y: int) -> bool:
        """Closed membership for a point given in doubled coordinates."""
        if self.on_boundary_doubled(X, Y):
            return True
        parity = 0
        vs = self.vertices
        for i in range(len(vs)):
            p, q = vs[i], vs[(i + 1) % len(vs)]
            if p.x != q.x:
                continue
            y1, y2 = sorted((2 * p.y, 2 * q.y))
            if y1 <= Y < y2 and 2 * p.x > X:
                parity ^= 1
        return parity == 1

    def on_boundary_doubled(self, X: int, Y: int) -> bool:
        vs = self.vertices
        for i in range(len(vs)):
            p, q = vs[i], vs[(i + 1) % len(vs)]
            if p.x == q.x:
                y1, y2 = sorted((2 * p.y, 2 * q.y))
                if X == 2 * p.x and y1 <= Y <= y2:
                    return True
            else:
                x1, x2 = sorted((2 * p.x, 2 * q.x))
                if Y == 2 * p.y and x1 <= X <= x2:
                    return True
        return False

    def contains_point(self, p: Point) -> bool:
        return self.contains_doubled(2 * p.x, 2 * p.y)

    def contains_segment(self, s: Segment) -> bool:
        """Closed containment of an axis-parallel segment with integer ends."""
        if not self.contains_point(s.a) or not self.contains_point(s.b):
            return False
        # Membership can only change where the segment crosses a grid line
        # of the polygon, so checking midpoints of the induced pieces is exact.
        if s.a.x == s.b.x:
            coords = sorted({v.y for v in self.vertices})
            lo, hi = sorted((s.a.y, s.b.y))
            cuts = [lo] + [c for c in coords if lo < c < hi] + [hi]
            return all(
                self.contains_doubled(2 * s.a.x, cuts[i] + cuts[i + 1])
                for i in range(len(cuts) - 1)
            )
        coords = sorted({v.x for v in self.vertices})
        lo, hi = sorted((s.a.x, s.b.x))
        cuts = [lo] + [c for c in coords if lo < c < hi] + [hi]
        return all(
            self.contains_doubled(cuts[i] + cuts[i + 1], 2 * s.a.y)
            for i in range(len(cuts) - 1)
        )

    def contains_rect(self, r: Rect) -> bool:
        """True iff the open rectangle lies inside the closed polygon."""
        if not self.contains_doubled(r.xl + r.xr, r.yb + r.yt):
            return False
        return not any(_edge_crosses_rect(e, r) for e in self.edges())

    # -- refined grid ------------------------------------------------------

    def grid(self) -> tuple[list[int], list[int], list[list[bool]]]:
        """Refined grid (vertex coordinates) and per-cell inside flags.

        inside[i][j] is the cell [xs[i],xs[i+1]] x [ys[j],ys[j+1]].
        """
        if self._grid is None:
            xs = sorted({p.x for p in self.vertices})
            ys = sorted({p.y for p in self.vertices})
            inside = [
                [
                    self.contains_doubled(xs[i] + xs[i + 1], ys[j] + ys[j + 1])
                    and not self.on_boundary_doubled(xs[i] + xs[i + 1], ys[j] + ys[j + 1])
                    for j in range(len(ys) - 1)
                ]
                for i in range(len(xs) - 1)
            ]
            self._grid = (xs, ys, inside)
        return self._grid

    def row_intervals(self) -> list[list[tuple[int, int]]]:
        """Maximal inside x-intervals per grid row, as (xlo, xhi) pairs."""
        if self._rows is not None:
            return self._rows
        xs, ys, inside = self.grid()
        rows = []
        for j in range(len(ys) - 1):
            ivals: list[tuple[int, int]] = []
            i = 0
            while i < len(xs) - 1:
                if inside[i][j]:
                    i0 = i
                    while i < len(xs) - 1 and inside[i][j]:
                        i += 1
                    ivals.append((xs[i0], xs[i]))
                else:
                    i += 1
            rows.append(ivals)
        self._rows = rows
        return rows

    def horizontal_section(self, y: int) -> list[tuple[int, int]]:
        """Maximal x-intervals of the closed polygon on the line {y}."""
        xs, ys, _ = self.grid()
        rows = self.row_intervals()
        ivals: list[tuple[int, int]] = []
        j = bisect_left(ys, y)
        if j < len(ys) and ys[j] == y:
            if j > 0:
                ivals += rows[j - 1]
            if j < len(rows):
                ivals += rows[j]
            for e in self.edges():
                if e.horizontal and e.a.y == y:
                    x1, x2 = sorted((e.a.x, e.b.x))
                    ivals.append((x1, x2))
        else:
            if 0 < j < len(ys):
                ivals += rows[j - 1]
        return _merge_intervals(ivals)

    def vertical_section(self, x: int) -> list[tuple[int, int]]:
        xs, ys, _ = self.grid()
        rows = self.row_intervals()
        cols: list[tuple[int, int]] = []
        i = bisect_left(xs, x)
        if i < len(xs) and xs[i] == x:
            for col in (i - 1, i):
                if 0 <= col < len(xs) - 1:
                    for j in range(len(ys) - 1):
                        if self.grid()[2][col][j]:
                            cols.append((ys[j], ys[j + 1]))
            for e in self.edges():
                if e.vertical and e.a.x == x:
                    y1, y2 = sorted((e.a.y, e.b.y))
                    cols.append((y1, y2))
        else:
            if 0 < i < len(xs):
                col = i - 1
                for j in range(len(ys) - 1):
                    if self.grid()[2][col][j]:
                        cols.append((ys[j], ys[j + 1]))
        return _merge_intervals(cols)

    def horizontal_reach(self, p: Point) -> tuple[int, int]:
        """The maximal x-interval containing p on p's horizontal line."""
        for lo, hi in self.horizontal_section(p.y):
            if lo <= p.x <= hi:
                return lo, hi
        raise GeometryError(f"{p} not in polygon")

    def vertical_reach(self, p: Point) -> tuple[int, int]:
        for lo, hi in self.vertical_section(p.x):
            if lo <= p.y <= hi:
                return lo, hi
        raise GeometryError(f"{p} not in polygon")

    # -- edge classification ----------------------------------------------

    def vertical_edge_sides(self) -> dict[int, str]:
        """Map edge index -> 'left' | 'right' for every vertical edge.

        An edge is left-vertical iff the polygon lies immediately to its
        right: a half-unit probe right of the edge interior is inside.
        """
        if self._vclass is None:
            out = {}
            vs = self.vertices
            for i in range(len(vs)):
                p, q = vs[i], vs[(i + 1) % len(vs)]
                if p.x != q.x:
                    continue
                ymid2 = p.y + q.y  # doubled midpoint height
                inside_right = self.contains_doubled(2 * p.x + 1, ymid2)
                out[i] = "left" if inside_right else "right"
            self._vclass = out
        return self._vclass

    def horizontal_edge_sides(self) -> dict[int, str]:
        """Map edge index -> 'bottom' | 'top'.  A bottom edge has the polygon
        above it, a top edge below it."""
        out = {}
        vs = self.vertices
        for i in range(len(vs)):
            p, q = vs[i], vs[(i + 1) % len(vs)]
            if p.y != q.y:
                continue
            xmid2 = p.x + q.x
            inside_above = self.contains_doubled(xmid2, 2 * p.y + 1)
            out[i] = "bottom" if inside_above else "top"
        return out

    def transform(self, f) -> "RectPolygon":
        return RectPolygon([f(p) for p in self.vertices])


def classify_vertical_edges(p: RectPolygon) -> dict[Segment, str]:
    """Per-edge left/right classification keyed by canonical segment."""
    sides = p.vertical_edge_sides()
    es = p.edges()
    return {es[i].canonical(): side for i, side in sides.items()}


def _merge_intervals(ivals: list[tuple[int, int]]) -> list[tuple[int, int]]:
    if not ivals:
        return []
    ivals = sorted(ivals)
    out = [ivals[0]]
    for lo, hi in ivals[1:]:
        if lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def _edge_crosses_rect(e: Segment, r: Rect) -> bool:
    return segment_intersects_rect(e, r)


def _segments_touch(s: Segment, t: Segment, allow_shared_endpoint: bool) -> bool:
    """True if two boundary edges touch in a way that violates simplicity."""
    sl, sh = sorted((s.a, s.b))
    tl, th = sorted((t.a, t.b))
    sv, tv = s.a.x == s.b.x, t.a.x == t.b.x
    if sv == tv:
        if sv:
            if sl.x != tl.x:
                return False
            lo, hi = max(sl.y, tl.y), min(sh.y, th.y)
        else:
            if sl.y != tl.y:
                return False
            lo, hi = max(sl.x, tl.x), min(sh.x, th.x)
        if lo > hi:
            return False
        if lo == hi and allow_shared_endpoint:
            return False
        return True
    if tv:
        s, t = t, s
        sl, sh = sorted((s.a, s.b))
        tl, th = sorted((t.a, t.b))
    # s vertical, t horizontal
    if not (tl.x <= sl.x <= th.x and sl.y <= tl.y <= sh.y):
        return False
    crossing = Point(sl.x, tl.y)
    if allow_shared_endpoint and crossing in (s.a, s.b) and crossing in (t.a, t.b):
        return False
    return True


def is_horizontally_convex(p: RectPolygon) -> bool:
    """Every horizontal chord between two polygon points stays inside.

    Decided exactly on the refined grid: each open row must hold one inside
    interval, and on each grid line the closed section must be connected.
    """
    rows = p.row_intervals()
    for ivals in rows:
        if len(ivals) > 1:
            return False
    _, ys, _ = p.grid()
    for y in ys:
        if len(p.horizontal_section(y)) > 1:
            return False
    return True


def is_vertically_convex(p: RectPolygon) -> bool:
    return is_horizontally_convex(p.transform(lambda q: Point(q.y, q.x)))


@dataclass(frozen=True)
class Cut:
    """A set of axis-parallel segments cutting a polygon.

    shape is 'path' for a boundary-to-boundary chain, 'tree' for two chains
    sharing a prefix (the two-armed cuts of the line-partitioning step).
    """

    segments: tuple[Segment, ...]
    shape: str = "path"

    def __post_init__(self) -> None:
        if self.shape not in ("path", "tree"):
            raise GeometryError(f"unknown cut shape {self.shape!r}")

    def nondegenerate(self) -> list[Segment]:
        return [s for s in self.segments if not s.degenerate]


def polyline_to_segments(points: Sequence[Point]) -> list[Segment]:
    """Maximal segments of an axis-parallel polyline, dropping zero-length
    steps and merging collinear runs."""
    pts = [points[0]]
    for p in points[1:]:
        if p != pts[-1]:
            pts.append(p)
    if len(pts) < 2:
        return []
    segs: list[Segment] = []
    run_start = pts[0]
    for i in range(1, len(pts)):
        prev, cur = pts[i - 1], pts[i]
        if prev.x != cur.x and prev.y != cur.y:
            raise GeometryError("polyline step not axis-parallel")
        if i == len(pts) - 1:
            segs.append(Segment(run_start, cur))
        else:
            nxt = pts[i + 1]
            straight = (run_start.x == cur.x == nxt.x) or (
                run_start.y == cur.y == nxt.y
            )
            if not straight:
                segs.append(Segment(run_start, cur))
                run_start = cur
    return segs


def splice_simple(points: Sequence[Point]) -> list[Point]:
    """Remove loops from a polyline that revisits vertices, keeping a simple
    walk from the first to the last point."""
    out: list[Point] = []
    index: dict[Point, int] = {}
    for p in points:
        if p in index:
            del_from = index[p] + 1
            for q in out[del_from:]:
                index.pop(q, None)
            out = out[:del_from]
        else:
            out.append(p)
            index[p] = len(out) - 1
    return out


class _Splitter:
    """Refined-grid flood fill computing the connected components of a
    polygon minus a set of cut segments."""

    def __init__(self, poly: RectPolygon, segments: Sequence[Segment]):
        self.poly = poly
        self.segments = [s.canonical() for s in segments]
        for s in self.segments:
            if not poly.contains_segment(s):
                raise CutError(f"cut segment {s} leaves the polygon")
        self._check_no_proper_crossing()
        xs = {p.x for p in poly.vertices}
        ys = {p.y for p in poly.vertices}
        for s in self.segments:
            xs.update((s.a.x, s.b.x))
            ys.update((s.a.y, s.b.y))
        self.xs = sorted(xs)
        self.ys = sorted(ys)

    def _check_no_proper_crossing(self) -> None:
        segs = [s for s in self.segments if not s.degenerate]
        for i in range(len(segs)):
            for j in range(i + 1, len(segs)):
                s, t = segs[i], segs[j]
                if s.vertical == t.vertical:
                    continue
                v, h = (s, t) if s.vertical else (t, s)
                x1, x2 = sorted((h.a.x, h.b.x))
                y1, y2 = sorted((v.a.y, v.b.y))
                if x1 < v.a.x < x2 and y1 < h.a.y < y2:
                    raise CutError(f"cut segments cross: {s} x {t}")

    def _inside_cell(self, i: int, j: int) -> bool:
        return self.poly.contains_doubled(
            self.xs[i] + self.xs[i + 1], self.ys[j] + self.ys[j + 1]
        ) and not self.poly.on_boundary_doubled(
            self.xs[i] + self.xs[i + 1], self.ys[j] + self.ys[j + 1]
        )

    def _blocked(self, vertical: bool, c: int, lo: int, hi: int) -> bool:
        """Is the unit grid wall (a full cell side) covered by a cut segment
        or by the polygon boundary?"""
        for s in self.segments:
            if vertical and s.vertical and s.a.x == c:
                y1, y2 = sorted((s.a.y, s.b.y))
                if y1 <= lo and hi <= y2:
                    return True
            if not vertical and s.horizontal and s.a.y == c:
                x1, x2 = sorted((s.a.x, s.b.x))
                if x1 <= lo and hi <= x2:
                    return True
        for e in self.poly.edges():
            if vertical and e.vertical and e.a.x == c:
                y1, y2 = sorted((e.a.y, e.b.y))
                if y1 <= lo and hi <= y2:
                    return True
            if not vertical and e.horizontal and e.a.y == c:
                x1, x2 = sorted((e.a.x, e.b.x))
                if x1 <= lo and hi <= x2:
                    return True
        return False

    def components(self) -> list[dict]:
        xs, ys = self.xs, self.ys
        ni, nj = len(xs) - 1, len(ys) - 1
        inside = [[self._inside_cell(i, j) for j in range(nj)] for i in range(ni)]
        comp = [[-1] * nj for _ in range(ni)]
        comps: list[list[tuple[int, int]]] = []
        for i0 in range(ni):
            for j0 in range(nj):
                if not inside[i0][j0] or comp[i0][j0] != -1:
                    continue
                cid = len(comps)
                stack = [(i0, j0)]
                comp[i0][j0] = cid
                cells = []
                while stack:
                    i, j = stack.pop()
                    cells.append((i, j))
                    if i + 1 < ni and inside[i + 1][j] and comp[i + 1][j] == -1:
                        if not self._blocked(True, xs[i + 1], ys[j], ys[j + 1]):
                            comp[i + 1][j] = cid
                            stack.append((i + 1, j))
                    if i > 0 and inside[i - 1][j] and comp[i - 1][j] == -1:
                        if not self._blocked(True, xs[i], ys[j], ys[j + 1]):
                            comp[i - 1][j] = cid
                            stack.append((i - 1, j))
                    if j + 1 < nj and inside[i][j + 1] and comp[i][j + 1] == -1:
                        if not self._blocked(False, ys[j + 1], xs[i], xs[i + 1]):
                            comp[i][j + 1] = cid
                            stack.append((i, j + 1))
                    if j > 0 and inside[i][j - 1] and comp[i][j - 1] == -1:
                        if not self._blocked(False, ys[j], xs[i], xs[i + 1]):
                            comp[i][j - 1] = cid
                            stack.append((i, j - 1))
                comps.append(cells)
        return [
            {"cells": cells, "polygon": self._trace(cells)} for cells in comps
        ]

    def _trace(self, cells: list[tuple[int, int]]) -> RectPolygon:
        """Trace the boundary loop of a cell set (interior kept on the right,
        giving clockwise order); pinched components come out non-simple."""
        xs, ys = self.xs, self.ys
        cellset = set(cells)
        # Directed unit boundary edges, keyed by start vertex.
        outgoing: dict[Point, list[Point]] = {}

        def add(a: Point, b: Point) -> None:
            outgoing.setdefault(a, []).append(b)

        for (i, j) in cells:
            x1, x2, y1, y2 = xs[i], xs[i + 1], ys[j], ys[j + 1]
            if (i - 1, j) not in cellset or self._blocked(True, x1, y1, y2):
                add(Point(x1, y1), Point(x1, y2))
            if (i + 1, j) not in cellset or self._blocked(True, x2, y1, y2):
                add(Point(x2, y2), Point(x2, y1))
            if (i, j - 1) not in cellset or self._blocked(False, y1, x1, x2):
                add(Point(x2, y1), Point(x1, y1))
            if (i, j + 1) not in cellset or self._blocked(False, y2, x1, x2):
                add(Point(x1, y2), Point(x2, y2))

        start = min(outgoing)
        loop = [start]
        prev_dir: Optional[tuple[int, int]] = None
        cur = start
        # Rightmost-turn-first keeps the traced face consistent at pinches;
        # reversal last so slit tips (non-separating cut ends) can U-turn.
        turn_order = {
            (0, 1): [(1, 0), (0, 1), (-1, 0), (0, -1)],
            (1, 0): [(0, -1), (1, 0), (0, 1), (-1, 0)],
            (0, -1): [(-1, 0), (0, -1), (1, 0), (0, 1)],
            (-1, 0): [(0, 1), (-1, 0), (0, -1), (1, 0)],
        }
        total = sum(len(v) for v in outgoing.values())
        steps = 0
        while True:
            cands = outgoing.get(cur, [])
            if not cands:
                raise GeometryError("boundary trace dead end")
            if prev_dir is None or len(cands) == 1:
                nxt = sorted(cands)[0]
            else:
                nxt = None
                for d in turn_order[prev_dir]:
                    for c in sorted(cands):
                        dx = (c.x > cur.x) - (c.x < cur.x)
                        dy = (c.y > cur.y) - (c.y < cur.y)
                        if (dx, dy) == d:
                            nxt = c
                            break
                    if nxt is not None:
                        break
                if nxt is None:
                    nxt = sorted(cands)[0]
            cands.remove(nxt)
            if not cands:
                del outgoing[cur]
            prev_dir = ((nxt.x > cur.x) - (nxt.x < cur.x), (nxt.y > cur.y) - (nxt.y < cur.y))
            cur = nxt
            steps += 1
            if cur == start:
                break
            loop.append(cur)
            if steps > total + 1:
                raise GeometryError("boundary trace failed to close")
        if outgoing:
            # Leftover edges mean a second loop: a hole, impossible for
            # acyclic cuts of a simple polygon.
            raise GeometryError("component boundary is not a single loop")
        return RectPolygon(loop)


def split_polygon(p: RectPolygon, c: Cut) -> list[RectPolygon]:
    """Connected components of p minus the cut, canonicalized.

    Raises CutError when the cut does not separate (single component).
    Components with pinch points are returned with is_simple == False.
    """
    comps = split_components(p, c)
    if len(comps) < 2:
        raise CutError("cut does not separate the polygon")
    return [comp["polygon"] for comp in comps]


def split_components(p: RectPolygon, c: Cut) -> list[dict]:
    """Like split_polygon but non-raising and with cell data per component."""
    segs = c.nondegenerate()
    splitter = _Splitter(p, segs)
    comps = splitter.components()
    for comp in comps:
        comp["splitter"] = splitter
    return comps


def component_contains_rect(comp: dict, r: Rect) -> bool:
    """Does a split component hold this rectangle?

    Valid only when no cut segment intersects the rectangle's interior:
    then every grid cell overlapping the interior lies in one component,
    so membership of the cell at the rect's bottom-left corner decides.
    """
    splitter: _Splitter = comp["splitter"]
    xs, ys = splitter.xs, splitter.ys
    i = bisect_right(xs, r.xl) - 1
    j = bisect_right(ys, r.yb) - 1
    return (i, j) in set(comp["cells"])
