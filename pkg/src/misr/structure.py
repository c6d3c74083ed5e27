"""Structure on an optimal solution: maximal extension, nesting and
niceness labels, corridor visibility ("sees"), and fence/protection
machinery for single-segment fences and for chains of up to tau segments.

Fence conventions (all exact, all integral):
  * a line fence is one horizontal segment from an integral point on a
    vertical polygon edge to a rectangle feature (left-edge interior or a
    far corner), crossing no rectangle contained in the polygon;
  * a tau-fence is an x-monotone chain of at most tau axis-parallel
    segments anchored anywhere on a vertical polygon edge, crossing no
    rectangle contained in the polygon; no feature endpoint is required.
Anchors and bends are restricted to integral points; every obstacle has
integral coordinates, so chains can always be deformed onto the integer
grid without increasing their segment count.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .geom_core import (
    Point,
    Rect,
    RectPolygon,
    Segment,
    rects_intersect,
)
from .instance import Instance, Solution, validate_solution

CORNERS = ("TL", "BL", "TR", "BR")


class StructureError(ValueError):
    pass


@dataclass(frozen=True)
class MaximalSet:
    """Pairwise-disjoint rectangles, each grown to a fixpoint in all four
    directions; origin maps each grown rect back to its input index."""

    rects: tuple[Rect, ...]
    origin: tuple[int, ...]
    side: int

    def bounding(self) -> Rect:
        return Rect(0, 0, self.side, self.side)


def _y_overlap(a: Rect, b: Rect) -> bool:
    return max(a.yb, b.yb) < min(a.yt, b.yt)


def _x_overlap(a: Rect, b: Rect) -> bool:
    return max(a.xl, b.xl) < min(a.xr, b.xr)


def maximal_extension(opt: Solution, inst: Instance) -> MaximalSet:
    """Grow each chosen rectangle until every coordinate is blocked by
    another rectangle of the set or by the bounding square.

    Rectangles are processed in ascending index order; within one
    rectangle the growth cycle is left, right, bottom, top, repeated to a
    fixpoint.  Any processing order yields a valid maximal set; fixing
    one keeps fixtures reproducible.
    """
    validate_solution(inst, Solution(tuple(sorted(opt.chosen))))
    side = inst.side
    order = sorted(opt.chosen)
    grown: list[Rect] = [inst.rects[i] for i in order]

    for idx in range(len(grown)):
        r = grown[idx]
        others = [grown[k] for k in range(len(grown)) if k != idx]
        changed = True
        while changed:
            changed = False
            limit = max([0] + [o.xr for o in others if o.xr <= r.xl and _y_overlap(o, r)])
            if limit < r.xl:
                r, changed = Rect(limit, r.yb, r.xr, r.yt), True
            limit = min([side] + [o.xl for o in others if o.xl >= r.xr and _y_overlap(o, r)])
            if limit > r.xr:
                r, changed = Rect(r.xl, r.yb, limit, r.yt), True
            limit = max([0] + [o.yt for o in others if o.yt <= r.yb and _x_overlap(o, r)])
            if limit < r.yb:
                r, changed = Rect(r.xl, limit, r.xr, r.yt), True
            limit = min([side] + [o.yb for o in others if o.yb >= r.yt and _x_overlap(o, r)])
            if limit > r.yt:
                r, changed = Rect(r.xl, r.yb, r.xr, limit), True
        grown[idx] = r

    m = MaximalSet(tuple(grown), tuple(order), side)
    assert_maximal(m)
    return m


def assert_maximal(m: MaximalSet) -> None:
    """A unit of growth in any direction must hit another rect of the set
    or leave the bounding square."""
    for i, r in enumerate(m.rects):
        for j in range(i + 1, len(m.rects)):
            if rects_intersect(r, m.rects[j]):
                raise StructureError(f"extended rects {i},{j} overlap")
    for i, r in enumerate(m.rects):
        grown = {
            "left": Rect(r.xl - 1, r.yb, r.xr, r.yt) if r.xl > 0 else None,
            "right": Rect(r.xl, r.yb, r.xr + 1, r.yt) if r.xr < m.side else None,
            "bottom": Rect(r.xl, r.yb - 1, r.xr, r.yt) if r.yb > 0 else None,
            "top": Rect(r.xl, r.yb, r.xr, r.yt + 1) if r.yt < m.side else None,
        }
        for direction, bigger in grown.items():
            if bigger is None:
                continue
            if not any(
                rects_intersect(bigger, o) for k, o in enumerate(m.rects) if k != i
            ):
                raise StructureError(f"rect {i} could still grow {direction}")


# -- nesting ----------------------------------------------------------------


@dataclass(frozen=True)
class NestingLabel:
    horizontally_nested: frozenset[int]
    vertically_nested: frozenset[int]

    def label(self, i: int) -> str:
        if i in self.horizontally_nested:
            return "horizontally_nested"
        if i in self.vertically_nested:
            return "vertically_nested"
        return "neither"


def _seg_in_interior(lo: int, hi: int, olo: int, ohi: int) -> bool:
    return olo < lo and hi < ohi


def classify_nesting(m: MaximalSet) -> NestingLabel:
    """Vertical nesting: top or bottom edge inside the interior of a facing
    edge of another rect or of S; horizontal nesting likewise for left and
    right edges.  No rect may carry both labels."""
    hset, vset = set(), set()
    side = m.side
    for i, r in enumerate(m.rects):
        v = h = False
        for j, o in enumerate(m.rects):
            if i == j:
                continue
            if (r.yt == o.yb or r.yb == o.yt) and _seg_in_interior(r.xl, r.xr, o.xl, o.xr):
                v = True
            if (r.xr == o.xl or r.xl == o.xr) and _seg_in_interior(r.yb, r.yt, o.yb, o.yt):
                h = True
        if (r.yt == side or r.yb == 0) and _seg_in_interior(r.xl, r.xr, 0, side):
            v = True
        if (r.xr == side or r.xl == 0) and _seg_in_interior(r.yb, r.yt, 0, side):
            h = True
        if h and v:
            raise StructureError(f"rect {i} is both horizontally and vertically nested")
        if h:
            hset.add(i)
        if v:
            vset.add(i)
    return NestingLabel(frozenset(hset), frozenset(vset))


# -- seeing -----------------------------------------------------------------


def _sees_right_base(rects: Sequence[Rect], i: int, j: int, corner: str) -> bool:
    """Does rects[i] see the given left corner (TL or BL) of rects[j] on its
    right?

    The corridor h runs from a point p on i's right edge to the corner; h
    must cross no rectangle interior, p must not be i's opposite-edge
    right corner, and h must not contain the top (for TL) / bottom (for
    BL) edge of any other rectangle.
    """
    if i == j:
        raise StructureError("a rectangle does not see itself")
    r, rp = rects[i], rects[j]
    if corner == "TL":
        y = rp.yt
        excluded_p_y = r.yb  # p may not be the bottom-right corner of r
    else:
        y = rp.yb
        excluded_p_y = r.yt
    if rp.xl < r.xr:
        return False
    if not (r.yb <= y <= r.yt) or y == excluded_p_y:
        return False
    x1, x2 = r.xr, rp.xl
    for k, o in enumerate(rects):
        if o.yb < y < o.yt and x1 < o.xr and x2 > o.xl:
            return False
        edge_y = o.yt if corner == "TL" else o.yb
        if k != j and edge_y == y and x1 <= o.xl and o.xr <= x2:
            return False
    return True


def _mirror_x(rects: Sequence[Rect]) -> list[Rect]:
    return [Rect(-r.xr, r.yb, -r.xl, r.yt) for r in rects]


def _mirror_y(rects: Sequence[Rect]) -> list[Rect]:
    return [Rect(r.xl, -r.yt, r.xr, -r.yb) for r in rects]


def _anti_transpose(rects: Sequence[Rect]) -> list[Rect]:
    # (x, y) -> (-y, -x): "right of" becomes "below", BL corners become TR.
    return [Rect(-r.yt, -r.xr, -r.yb, -r.xl) for r in rects]


_SEE_DISPATCH: dict[tuple[str, str], tuple[Optional[Callable], str]] = {
    ("right", "TL"): (None, "TL"),
    ("right", "BL"): (None, "BL"),
    ("left", "TR"): (_mirror_x, "TL"),
    ("left", "BR"): (_mirror_x, "BL"),
    ("bottom", "TR"): (_anti_transpose, "BL"),
    ("bottom", "TL"): (_anti_transpose, "TL"),
    ("top", "BR"): (lambda rs: _anti_transpose(_mirror_x(_mirror_y(rs))), "BL"),
    ("top", "BL"): (lambda rs: _anti_transpose(_mirror_x(_mirror_y(rs))), "TL"),
}


def sees(rects: Sequence[Rect], i: int, j: int, corner: str, side: str) -> bool:
    """Corridor visibility from rects[i] to the named corner of rects[j].

    Valid (side, corner) pairs: TL/BL on the right, TR/BR on the left,
    TR/TL below, BR/BL above; the seven non-base combinations are the
    reflections of the right/TL case.
    """
    key = (side, corner)
    if key not in _SEE_DISPATCH:
        raise StructureError(f"invalid corner/side combination {key}")
    transform, base_corner = _SEE_DISPATCH[key]
    rs = list(rects) if transform is None else transform(rects)
    return _sees_right_base(rs, i, j, base_corner)


def seen_corners_on_side(
    rects: Sequence[Rect], i: int, side: str, candidates: Iterable[int]
) -> list[tuple[Point, int, str]]:
    """All corners rects[i] sees on the given horizontal side, restricted
    to candidate owners, in scan order (corner y descending, corner x
    ascending, owner index ascending)."""
    if side == "right":
        corners = ("TL", "BL")
    elif side == "left":
        corners = ("TR", "BR")
    else:
        raise StructureError("seen_corners_on_side handles left/right only")
    out = []
    for j in candidates:
        if j == i:
            continue
        for c in corners:
            if sees(rects, i, j, c, side):
                out.append((rects[j].corner(c), j, c))
    out.sort(key=lambda t: (-t[0].y, t[0].x, t[1]))
    return out


# -- niceness ----------------------------------------------------------------


@dataclass(frozen=True)
class NiceLabel:
    horizontally_nice: frozenset[int]
    vertically_nice: frozenset[int]


def classify_nice(m: MaximalSet) -> NiceLabel:
    """Horizontally nice: sees a BL corner to the right, or bottom edge on
    the boundary of S.  Vertically nice: sees a TR corner below, or right
    edge on the boundary of S.  Every rect must earn at least one flag."""
    hset, vset = set(), set()
    n = len(m.rects)
    for i, r in enumerate(m.rects):
        if r.yb == 0 or any(
            j != i and sees(m.rects, i, j, "BL", "right") for j in range(n)
        ):
            hset.add(i)
        if r.xr == m.side or any(
            j != i and sees(m.rects, i, j, "TR", "bottom") for j in range(n)
        ):
            vset.add(i)
        if i not in hset and i not in vset:
            raise StructureError(
                f"rect {i} is neither horizontally nor vertically nice"
            )
    return NiceLabel(frozenset(hset), frozenset(vset))


def check_niceness_observation(m: MaximalSet) -> None:
    """The rightward ray from each top-right corner either reveals a first
    blocking rect satisfying the seeing / coordinate alternative, or the
    rect's right edge lies on the boundary of S."""
    for i, r in enumerate(m.rects):
        y = r.yt
        best = None
        for j, o in enumerate(m.rects):
            if j == i:
                continue
            hit = (o.yb < y < o.yt and o.xr > r.xr) or (o.yt == y and o.xl >= r.xr)
            if not hit:
                continue
            key = max(o.xl, r.xr)
            if best is None or (key, j) < best:
                best = (key, j)
        if best is None:
            if r.xr != m.side:
                raise StructureError(
                    f"rect {i}: clear rightward ray but right edge not on S"
                )
            continue
        j = best[1]
        o = m.rects[j]
        ok = sees(m.rects, i, j, "BL", "right") or (
            r.yt <= o.yt and o.yb < r.yb and r.xr == o.xl
        )
        if not ok:
            raise StructureError(f"rect {i}: niceness observation fails at rect {j}")


# -- line fences (single horizontal segments) --------------------------------


@dataclass(frozen=True)
class Fence:
    """An x-monotone chain anchored on a vertical polygon edge.  Line
    fences carry a single segment (possibly a degenerate point)."""

    anchor: Point
    chain: tuple[Segment, ...]
    side: str  # 'from_left_edge' | 'from_right_edge'

    @property
    def endpoint(self) -> Point:
        return self.chain[-1].b if self.chain else self.anchor

    def points(self) -> list[Point]:
        pts = [self.anchor]
        for s in self.chain:
            pts.append(s.b)
        return pts


def _fence_features_rightward(
    rects_in: Sequence[tuple[int, Rect]], y: int, x_from: int, x_to: int
) -> list[tuple[int, str, int]]:
    """Rect features on the rightward ray at height y within [x_from,x_to],
    ordered by x: (x, kind, rect id).  kind 'block' is the interior of a
    left edge; the ray cannot continue past it."""
    feats = []
    for rid, r in rects_in:
        if r.yb < y < r.yt and x_from <= r.xl <= x_to:
            feats.append((r.xl, "block", rid))
        if (y == r.yt or y == r.yb) and x_from <= r.xr <= x_to:
            feats.append((r.xr, "corner", rid))
    feats.sort()
    return feats


def line_fences_from_point(
    poly: RectPolygon,
    rects_in: Sequence[tuple[int, Rect]],
    p: Point,
    side: str,
) -> list[Fence]:
    """Line fences emerging from one anchor point, nearest feature first."""
    if side == "left":
        lo, hi = poly.horizontal_reach(p)
        feats = _fence_features_rightward(rects_in, p.y, p.x, hi)
        out = []
        for x, kind, _rid in feats:
            if x < p.x:
                continue
            out.append(Fence(p, (Segment(p, Point(x, p.y)),), "from_left_edge"))
            if kind == "block":
                break
        return out
    mirrored = [(rid, Rect(-r.xr, r.yb, -r.xl, r.yt)) for rid, r in rects_in]
    mpoly = poly.transform(lambda q: Point(-q.x, q.y))
    mp = Point(-p.x, p.y)
    out = []
    for f in line_fences_from_point(mpoly, mirrored, mp, "left"):
        end = f.endpoint
        out.append(
            Fence(p, (Segment(p, Point(-end.x, end.y)),), "from_right_edge")
        )
    return out


def enumerate_line_fences(
    poly: RectPolygon, rects_in: Sequence[tuple[int, Rect]]
) -> list[Fence]:
    """All line fences, one per (integral anchor point, reachable feature)
    pair over every vertical edge; degenerate point fences included."""
    fences: list[Fence] = []
    sides = poly.vertical_edge_sides()
    edges = poly.edges()
    for idx in sorted(sides):
        e = edges[idx]
        y1, y2 = sorted((e.a.y, e.b.y))
        for y in range(y1, y2 + 1):
            fences.extend(
                line_fences_from_point(poly, rects_in, Point(e.a.x, y), sides[idx])
            )
    return fences


def _ray_clear_of_rects(
    rects_in: Sequence[tuple[int, Rect]], y: int, x1: int, x2: int
) -> bool:
    return not any(
        r.yb < y < r.yt and x1 < r.xr and x2 > r.xl for _rid, r in rects_in
    )


def protecting_fences(
    poly: RectPolygon, rects_in: Sequence[tuple[int, Rect]], r: Rect
) -> list[Fence]:
    """Line fences containing the top or bottom edge of r.

    Only the fence ending at the covered edge's far corner needs testing:
    if any covering fence exists, that one does.  Deterministic order:
    top before bottom, left anchors before right, then anchor position.
    """
    out: list[Fence] = []
    sides = poly.vertical_edge_sides()
    edges = poly.edges()
    for y in (r.yt, r.yb):
        for side_name in ("left", "right"):
            found = []
            for idx, side in sides.items():
                if side != side_name:
                    continue
                e = edges[idx]
                ey1, ey2 = sorted((e.a.y, e.b.y))
                if not ey1 <= y <= ey2:
                    continue
                xe = e.a.x
                target_x = r.xr if side_name == "left" else r.xl
                if (side_name == "left" and xe > r.xl) or (
                    side_name == "right" and xe < r.xr
                ):
                    continue
                p = Point(xe, y)
                seg = Segment(p, Point(target_x, y))
                x1, x2 = sorted((xe, target_x))
                if not poly.contains_segment(seg):
                    continue
                if not _ray_clear_of_rects(rects_in, y, x1, x2):
                    continue
                found.append(Fence(p, (seg,), f"from_{side_name}_edge"))
            found.sort(key=lambda f: (f.anchor.y, f.anchor.x))
            out.extend(found)
    return out


def is_protected(
    r: Rect, poly: RectPolygon, rects_in: Sequence[tuple[int, Rect]]
) -> bool:
    """Line-fence protection: some fence contains r's top or bottom edge."""
    return bool(protecting_fences(poly, rects_in, r))


# -- tau-fences: budgeted x-monotone chain search -----------------------------

_H = 0  # horizontal
_VU = 1  # vertical, moving up
_VD = 2  # vertical, moving down
_START = 3

_DIRS = ((1, 0, _H), (-1, 0, _H), (0, 1, _VU), (0, -1, _VD))


class FenceEngine:
    """Reachability of x-monotone chains of at most tau axis-parallel
    segments inside a polygon, avoiding the given rect interiors.

    The search graph is the integer grid of the polygon's bounding box; a
    chain state is (grid point, current orientation, committed horizontal
    direction).  Turning costs one segment, continuing straight nothing.
    """

    def __init__(
        self, poly: RectPolygon, rects_in: Sequence[tuple[int, Rect]], tau: int
    ):
        self.poly = poly
        self.rects = [r for _rid, r in rects_in]
        self.tau = tau
        x0, y0, x1, y1 = poly.bbox()
        self.x0, self.y0 = x0, y0
        self.nx = x1 - x0 + 1
        self.ny = y1 - y0 + 1
        self._hstep: Optional[list[list[bool]]] = None
        self._vstep: Optional[list[list[bool]]] = None
        self._cache: dict = {}
        self._lock = threading.Lock()

    def _steps(self) -> tuple[list[list[bool]], list[list[bool]]]:
        """hstep[i][j]: the unit step (x0+i,y0+j)->(x0+i+1,y0+j) stays in
        the closed polygon and crosses no rect interior; vstep likewise."""
        if self._hstep is None:
            poly, rects = self.poly, self.rects
            x0, y0 = self.x0, self.y0
            hstep = [[False] * self.ny for _ in range(max(self.nx - 1, 1))]
            for j in range(self.ny):
                y = y0 + j
                blocked = [(r.xl, r.xr) for r in rects if r.yb < y < r.yt]
                for lo, hi in poly.horizontal_section(y):
                    for x in range(lo, hi):
                        if any(bl <= x and x + 1 <= bh for bl, bh in blocked):
                            continue
                        hstep[x - x0][j] = True
            vstep = [[False] * max(self.ny - 1, 1) for _ in range(self.nx)]
            for i in range(self.nx):
                x = x0 + i
                blocked = [(r.yb, r.yt) for r in rects if r.xl < x < r.xr]
                for lo, hi in poly.vertical_section(x):
                    for y in range(lo, hi):
                        if any(bl <= y and y + 1 <= bh for bl, bh in blocked):
                            continue
                        vstep[i][y - y0] = True
            self._hstep, self._vstep = hstep, vstep
        return self._hstep, self._vstep

    def _bfs(self, seeds: list[tuple[int, int, int, int, int]]) -> dict:
        """0/1-BFS over chain states from (dist, ix, iy, orient, hdir)
        seeds; hdir 0 uncommitted, 1 rightward, 2 leftward."""
        hstep, vstep = self._steps()
        INF = self.tau + 1
        dist = [
            [[[INF] * 3 for _ in range(4)] for _ in range(self.ny)]
            for _ in range(self.nx)
        ]
        parent: dict[tuple, tuple] = {}
        dq: deque = deque()
        for d, ix, iy, o, h in seeds:
            if not (0 <= ix < self.nx and 0 <= iy < self.ny):
                continue
            if d <= self.tau and d < dist[ix][iy][o][h]:
                dist[ix][iy][o][h] = d
                dq.append((d, ix, iy, o, h))
        while dq:
            d, ix, iy, o, h = dq.popleft()
            if d > dist[ix][iy][o][h]:
                continue
            for dx, dy, no in _DIRS:
                nix, niy = ix + dx, iy + dy
                if not (0 <= nix < self.nx and 0 <= niy < self.ny):
                    continue
                if dx == 1 and not hstep[ix][iy]:
                    continue
                if dx == -1 and not hstep[ix - 1][iy]:
                    continue
                if dy == 1 and not vstep[ix][iy]:
                    continue
                if dy == -1 and not vstep[ix][iy - 1]:
                    continue
                if no == _H:
                    nh = 1 if dx == 1 else 2
                    if h != 0 and h != nh:
                        continue  # one horizontal direction per chain
                else:
                    nh = h
                    if (o == _VU and no == _VD) or (o == _VD and no == _VU):
                        continue  # no doubling back
                nd = d if no == o else d + 1
                if nd > self.tau:
                    continue
                if nd < dist[nix][niy][no][nh]:
                    dist[nix][niy][no][nh] = nd
                    parent[(nix, niy, no, nh)] = (ix, iy, o, h)
                    if nd == d:
                        dq.appendleft((nd, nix, niy, no, nh))
                    else:
                        dq.append((nd, nix, niy, no, nh))
        return {"dist": dist, "parent": parent}

    def reach(self, sources: Iterable[Point]) -> dict:
        """Chains emanating from any of the given anchor points."""
        key = ("pts", tuple(sorted(set(sources))))
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        seeds = [(0, p.x - self.x0, p.y - self.y0, _START, 0) for p in key[1]]
        result = self._bfs(seeds)
        result["sources"] = key[1]
        with self._lock:
            self._cache[key] = result
        return result

    def reach_run(self, y: int, x1: int, x2: int, rightward: bool) -> Optional[dict]:
        """Reversed reachability for chains whose final segment traverses
        the run [x1,x2]x{y} (rightward: left-to-right in chain order).

        A chain containing the run can be truncated so the run is its
        suffix, so seeding the reversed walk just past the run is complete.
        Returns None when the run itself is not walkable.
        """
        if x1 > x2:
            x1, x2 = x2, x1
        key = ("run", y, x1, x2, rightward)
        with self._lock:
            if key in self._cache:
                cached = self._cache[key]
                return None if cached == "none" else cached
        hstep, _ = self._steps()
        iy = y - self.y0
        ok = 0 <= iy < self.ny and all(
            0 <= i < len(hstep) and hstep[i][iy]
            for i in range(x1 - self.x0, x2 - self.x0)
        )
        if not ok:
            with self._lock:
                self._cache[key] = "none"
            return None
        if rightward:
            seeds = [(1, x1 - self.x0, iy, _H, 2)]  # reversed walk goes left
        else:
            seeds = [(1, x2 - self.x0, iy, _H, 1)]
        result = self._bfs(seeds)
        with self._lock:
            self._cache[key] = result
        return result

    # queries ----------------------------------------------------------------

    def edge_points(self, edge: Segment) -> list[Point]:
        y1, y2 = sorted((edge.a.y, edge.b.y))
        return [Point(edge.a.x, y) for y in range(y1, y2 + 1)]

    def best_dist(self, table: dict, p: Point) -> int:
        ix, iy = p.x - self.x0, p.y - self.y0
        if not (0 <= ix < self.nx and 0 <= iy < self.ny):
            return self.tau + 1
        return min(min(row) for row in table["dist"][ix][iy])

    def covers(self, table: dict, p: Point) -> bool:
        return self.best_dist(table, p) <= self.tau

    def covers_interior(self, table: dict, p: Point) -> bool:
        """Some chain passes strictly through p: it arrives at p and can be
        extended by one more unit step within budget."""
        ix, iy = p.x - self.x0, p.y - self.y0
        if not (0 <= ix < self.nx and 0 <= iy < self.ny):
            return False
        hstep, vstep = self._steps()
        dist = table["dist"][ix][iy]
        for o in range(4):
            if o == _START:
                continue  # arrival as a bare source is an endpoint
            for h in range(3):
                d = dist[o][h]
                if d > self.tau:
                    continue
                for dx, dy, no in _DIRS:
                    if dx == 1 and not (ix < self.nx - 1 and hstep[ix][iy]):
                        continue
                    if dx == -1 and not (ix > 0 and hstep[ix - 1][iy]):
                        continue
                    if dy == 1 and not (iy < self.ny - 1 and vstep[ix][iy]):
                        continue
                    if dy == -1 and not (iy > 0 and vstep[ix][iy - 1]):
                        continue
                    if no == _H:
                        nh = 1 if dx == 1 else 2
                        if h != 0 and h != nh:
                            continue
                    if (o == _VU and no == _VD) or (o == _VD and no == _VU):
                        continue
                    if (d if no == o else d + 1) <= self.tau:
                        return True
        return False

    def chain_to(self, table: dict, p: Point) -> list[Point]:
        """One optimal chain from a seed to p, as a point walk."""
        ix, iy = p.x - self.x0, p.y - self.y0
        best = None
        for o in range(4):
            for h in range(3):
                d = table["dist"][ix][iy][o][h]
                if best is None or d < best[0]:
                    best = (d, o, h)
        if best is None or best[0] > self.tau:
            raise StructureError(f"no chain reaches {p}")
        state = (ix, iy, best[1], best[2])
        walk = [Point(ix + self.x0, iy + self.y0)]
        while state in table["parent"]:
            state = table["parent"][state]
            walk.append(Point(state[0] + self.x0, state[1] + self.y0))
        return list(reversed(walk))


_ENGINE_CACHE: dict = {}
_ENGINE_LOCK = threading.Lock()


def tau_engine(
    poly: RectPolygon, rects_in: Sequence[tuple[int, Rect]], tau: int
) -> FenceEngine:
    key = (poly, tuple(sorted(rects_in)), tau)
    with _ENGINE_LOCK:
        eng = _ENGINE_CACHE.get(key)
        if eng is None:
            eng = FenceEngine(poly, rects_in, tau)
            _ENGINE_CACHE[key] = eng
            if len(_ENGINE_CACHE) > 256:
                _ENGINE_CACHE.clear()
                _ENGINE_CACHE[key] = eng
        return eng


def _edges_reaching_run(
    eng: FenceEngine, y: int, x1: int, x2: int
) -> set[int]:
    """Vertical edges of the polygon anchoring some chain that contains the
    horizontal run [x1,x2]x{y}."""
    tables = [eng.reach_run(y, x1, x2, rightward=True),
              eng.reach_run(y, x1, x2, rightward=False)]
    sides = eng.poly.vertical_edge_sides()
    edges = eng.poly.edges()
    out: set[int] = set()
    for idx in sides:
        for p in eng.edge_points(edges[idx]):
            if any(t is not None and eng.covers(t, p) for t in tables):
                out.add(idx)
                break
    return out


def is_tau_protected(
    r: Rect, poly: RectPolygon, rects_in: Sequence[tuple[int, Rect]], tau: int
) -> bool:
    """tau-protection: one vertical polygon edge anchors two chains of at
    most tau segments containing r's top and bottom edges respectively."""
    eng = tau_engine(poly, rects_in, tau)
    top = _edges_reaching_run(eng, r.yt, r.xl, r.xr)
    if not top:
        return False
    bottom = _edges_reaching_run(eng, r.yb, r.xl, r.xr)
    return bool(top & bottom)
