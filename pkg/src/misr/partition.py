"""Constructive cut machinery and the recursive partitioning driver.

Three regimes share the driver:
  six      line cuts on horizontally convex polygons with at most 26 edges
           (at most 8 segments, 2-3 components);
  three    chain cuts with tau = 7 on general simple polygons with at most
           228 edges (at most 2 tau + 1 segments, exactly 2 components);
  two_eps  the same machinery with tau = 4/eps + 3.

Every guaranteed postcondition is asserted at run time; a violation
raises ConstructionError, which always indicates a bug rather than an
input condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .geom_core import (
    Cut,
    CutError,
    GeometryError,
    Point,
    Rect,
    RectPolygon,
    Segment,
    component_contains_rect,
    edge_distance,
    is_horizontally_convex,
    polyline_to_segments,
    segment_intersects_rect,
    splice_simple,
    split_components,
)
from .structure import (
    FenceEngine,
    MaximalSet,
    classify_nesting,
    classify_nice,
    is_protected,
    is_tau_protected,
    line_fences_from_point,
    enumerate_line_fences,
    protecting_fences,
    seen_corners_on_side,
    tau_engine,
)

RectsIn = Sequence[tuple[int, Rect]]


class ConstructionError(RuntimeError):
    """A construction step with a guaranteed outcome failed: bug signal."""


@dataclass
class CutResult:
    cut: Cut
    ell: Optional[Segment]
    intersected: tuple[int, ...]
    components: list[RectPolygon]
    assignment: dict[int, int]  # rect id -> component index
    case: str = ""


def _merge_segments(segs: Sequence[Segment]) -> list[Segment]:
    """Union of axis-parallel segments as maximal merged segments."""
    groups: dict[tuple[str, int], list[tuple[int, int]]] = {}
    points = []
    for s in segs:
        if s.degenerate:
            points.append(s)
            continue
        if s.vertical:
            key = ("v", s.a.x)
            lo, hi = sorted((s.a.y, s.b.y))
        else:
            key = ("h", s.a.y)
            lo, hi = sorted((s.a.x, s.b.x))
        groups.setdefault(key, []).append((lo, hi))
    out: list[Segment] = []
    for (kind, c), ivals in sorted(groups.items()):
        ivals.sort()
        cur_lo, cur_hi = ivals[0]
        for lo, hi in ivals[1:]:
            if lo <= cur_hi:
                cur_hi = max(cur_hi, hi)
            else:
                out.append(_make_seg(kind, c, cur_lo, cur_hi))
                cur_lo, cur_hi = lo, hi
        out.append(_make_seg(kind, c, cur_lo, cur_hi))
    return out


def _make_seg(kind: str, c: int, lo: int, hi: int) -> Segment:
    if kind == "v":
        return Segment(Point(c, lo), Point(c, hi))
    return Segment(Point(lo, c), Point(hi, c))


def _segment_hits(
    segs: Sequence[Segment], rects: RectsIn
) -> dict[int, list[Segment]]:
    hits: dict[int, list[Segment]] = {}
    for rid, r in rects:
        for s in segs:
            if segment_intersects_rect(s, r):
                hits.setdefault(rid, []).append(s)
    return hits


def _finalize(
    poly: RectPolygon,
    segments: list[Segment],
    rects: RectsIn,
    max_segments: int,
    max_edges: int,
    expect_components: Optional[tuple[int, int]],
    case: str,
    require_hconvex: bool = False,
    protected_check: Optional[Callable[[Rect], bool]] = None,
) -> CutResult:
    """Split by the cut, repair degenerate outcomes, and assert the
    partitioning postconditions."""
    merged = _merge_segments(segments)
    comps = split_components(poly, Cut(tuple(merged)))
    lo, hi = expect_components if expect_components else (2, 2)
    bad = len(comps) < 2 or len(comps) > hi or any(
        not c["polygon"].is_simple for c in comps
    ) or any(c["polygon"].num_edges > max_edges for c in comps)
    if bad:
        merged = repair_nonsimple(poly, merged, max_edges)
        comps = split_components(poly, Cut(tuple(merged)))
        case = case + "+repair"
    polys = [c["polygon"] for c in comps]
    if not (lo <= len(comps) <= hi):
        raise ConstructionError(
            f"{case}: expected {lo}..{hi} components, got {len(comps)}"
        )
    if any(not p.is_simple for p in polys):
        raise ConstructionError(f"{case}: non-simple component survived repair")
    if any(p.num_edges > max_edges for p in polys):
        raise ConstructionError(
            f"{case}: component exceeds {max_edges} edges"
        )
    if require_hconvex and any(not is_horizontally_convex(p) for p in polys):
        raise ConstructionError(f"{case}: component not horizontally convex")
    if len(merged) > max_segments:
        raise ConstructionError(
            f"{case}: cut has {len(merged)} segments > {max_segments}"
        )
    hits = _segment_hits(merged, rects)
    hit_segs = {s for segs in hits.values() for s in segs}
    ell: Optional[Segment] = None
    if hit_segs:
        if len(hit_segs) > 1 or not next(iter(hit_segs)).vertical:
            raise ConstructionError(
                f"{case}: rectangles intersected by more than one cut "
                f"segment or by a horizontal segment"
            )
        ell = next(iter(hit_segs))
    intersected = tuple(sorted(hits))
    if protected_check is not None:
        for rid, r in rects:
            if rid in hits and protected_check(r):
                raise ConstructionError(
                    f"{case}: protected rectangle {rid} intersected"
                )
    assignment: dict[int, int] = {}
    for rid, r in rects:
        if rid in hits:
            continue
        homes = [i for i, c in enumerate(comps) if component_contains_rect(c, r)]
        if len(homes) != 1:
            raise ConstructionError(
                f"{case}: rect {rid} lies in {len(homes)} components"
            )
        assignment[rid] = homes[0]
    shape = "tree" if len(comps) == 3 else "path"
    return CutResult(
        Cut(tuple(merged), shape), ell, intersected, polys, assignment, case
    )


# -- repair of boundary-touching cuts -----------------------------------------


def repair_nonsimple(
    poly: RectPolygon, segments: list[Segment], max_edges: int
) -> list[Segment]:
    """Choose a subpath of the cut whose interior stays inside the polygon
    and whose endpoints land on boundary edges far enough apart that both
    resulting components stay within the edge budget.

    The candidate rule (contained original segments <= d(e,e')-1) follows
    the counting argument that guarantees such a subpath exists; every
    candidate is verified concretely before being accepted.
    """
    edges = poly.edges()
    k = len(edges)

    # Refine cut segments at boundary contacts and mutual endpoints.
    def refine(s: Segment) -> list[Segment]:
        pts = {s.a, s.b}
        lo, hi = sorted((s.a, s.b))
        for e in edges:
            if s.vertical == e.vertical and not s.degenerate and not e.degenerate:
                if s.vertical and e.vertical and e.a.x == s.a.x:
                    y1, y2 = sorted((e.a.y, e.b.y))
                    for y in (y1, y2):
                        if lo.y <= y <= hi.y:
                            pts.add(Point(s.a.x, y))
                elif s.horizontal and e.horizontal and e.a.y == s.a.y:
                    x1, x2 = sorted((e.a.x, e.b.x))
                    for x in (x1, x2):
                        if lo.x <= x <= hi.x:
                            pts.add(Point(x, s.a.y))
            else:
                cross = _cross_point(s, e)
                if cross is not None:
                    pts.add(cross)
        for t in segments:
            if t is s:
                continue
            for p in (t.a, t.b):
                if s.contains_point(p):
                    pts.add(p)
        if s.vertical:
            ordered = sorted(pts, key=lambda p: p.y)
        else:
            ordered = sorted(pts, key=lambda p: p.x)
        return [
            Segment(ordered[i], ordered[i + 1]) for i in range(len(ordered) - 1)
        ]

    def on_boundary(s: Segment) -> bool:
        mx, my = s.a.x + s.b.x, s.a.y + s.b.y
        return poly.on_boundary_doubled(mx, my)

    pieces: list[Segment] = []
    piece_owner: list[int] = []
    for si, s in enumerate(segments):
        for piece in refine(s):
            if not on_boundary(piece):
                pieces.append(piece)
                piece_owner.append(si)

    # Graph on piece endpoints.
    adj: dict[Point, list[int]] = {}
    for pi, piece in enumerate(pieces):
        adj.setdefault(piece.a, []).append(pi)
        adj.setdefault(piece.b, []).append(pi)

    def is_boundary_node(p: Point) -> bool:
        return poly.on_boundary_doubled(2 * p.x, 2 * p.y)

    boundary_nodes = [p for p in adj if is_boundary_node(p)]
    candidates: list[list[int]] = []
    seen_paths: set[tuple[int, ...]] = set()
    for start in sorted(boundary_nodes):
        stack: list[tuple[Point, list[int]]] = [(start, [])]
        while stack:
            node, path = stack.pop()
            if path and is_boundary_node(node):
                key = tuple(sorted(path))
                if key not in seen_paths:
                    seen_paths.add(key)
                    candidates.append(path)
                continue
            for pi in adj[node]:
                if path and pi == path[-1]:
                    continue
                if pi in path:
                    continue
                piece = pieces[pi]
                nxt = piece.b if piece.a == node else piece.a
                stack.append((nxt, path + [pi]))

    def cand_key(path: list[int]) -> tuple:
        owners = sorted({piece_owner[pi] for pi in path})
        return (owners[0], len(path), tuple(sorted(path)))

    candidates.sort(key=cand_key)

    def endpoint_edges(p: Point) -> list[int]:
        out = []
        for i, e in enumerate(edges):
            if e.contains_point(p):
                out.append(i)
        return out

    def contained_original_count(path: list[int]) -> int:
        count = 0
        path_pieces = [pieces[pi] for pi in path]
        for s in segments:
            covered = _covered_by(s, path_pieces)
            if covered:
                count += 1
        return count

    verified_fallback: Optional[list[Segment]] = None
    for path in candidates:
        segs = _merge_segments([pieces[pi] for pi in path])
        try:
            comps = split_components(poly, Cut(tuple(segs)))
        except (CutError, GeometryError):
            continue
        ok = (
            len(comps) == 2
            and all(c["polygon"].is_simple for c in comps)
            and all(c["polygon"].num_edges <= max_edges for c in comps)
        )
        if not ok:
            continue
        ends = [p for p in (_path_ends(pieces, path)) if p is not None]
        rule_ok = False
        if len(ends) == 2:
            best_d = 0
            for ei in endpoint_edges(ends[0]):
                for ej in endpoint_edges(ends[1]):
                    best_d = max(best_d, edge_distance(k, min(ei, ej), max(ei, ej)))
            rule_ok = contained_original_count(path) <= best_d - 1
        if rule_ok:
            return segs
        if verified_fallback is None:
            verified_fallback = segs
    if verified_fallback is not None:
        return verified_fallback
    raise ConstructionError("no repairable subpath found")


def _path_ends(pieces: list[Segment], path: list[int]) -> list[Optional[Point]]:
    counts: dict[Point, int] = {}
    for pi in path:
        for p in (pieces[pi].a, pieces[pi].b):
            counts[p] = counts.get(p, 0) + 1
    ends = sorted(p for p, c in counts.items() if c == 1)
    return ends if len(ends) == 2 else [None]


def _covered_by(s: Segment, pieces: list[Segment]) -> bool:
    """Is segment s entirely covered by the given collinear pieces?"""
    if s.degenerate:
        return any(p.contains_point(s.a) for p in pieces)
    lo, hi = sorted((s.a, s.b))
    ivals = []
    for p in pieces:
        if p.vertical != s.vertical or p.degenerate:
            continue
        if s.vertical and p.a.x == s.a.x:
            y1, y2 = sorted((p.a.y, p.b.y))
            ivals.append((y1, y2))
        elif s.horizontal and p.a.y == s.a.y:
            x1, x2 = sorted((p.a.x, p.b.x))
            ivals.append((x1, x2))
    ivals.sort()
    want_lo = lo.y if s.vertical else lo.x
    want_hi = hi.y if s.vertical else hi.x
    cur = want_lo
    for a, b in ivals:
        if a > cur:
            break
        cur = max(cur, b)
    return cur >= want_hi


def _cross_point(v: Segment, h: Segment) -> Optional[Point]:
    if v.degenerate or h.degenerate or v.vertical == h.vertical:
        return None
    if h.vertical:
        v, h = h, v
    x = v.a.x
    y = h.a.y
    y1, y2 = sorted((v.a.y, v.b.y))
    x1, x2 = sorted((h.a.x, h.b.x))
    if x1 <= x <= x2 and y1 <= y <= y2:
        return Point(x, y)
    return None


# -- k/3 vertical chord --------------------------------------------------------


@dataclass(frozen=True)
class Chord:
    x: int
    ylo: int
    yhi: int
    e_bottom: int  # edge index carrying the bottom endpoint
    e_top: int


def _horizontal_edge_at(poly: RectPolygon, p: Point) -> int:
    for i, e in enumerate(poly.edges()):
        if e.horizontal and e.contains_point(p):
            return i
    raise ConstructionError(f"no horizontal edge contains {p}")


def _vertical_edge_endpoint_at(poly: RectPolygon, p: Point) -> Optional[int]:
    for i, e in enumerate(poly.edges()):
        if e.vertical and (e.a == p or e.b == p):
            return i
    return None


def chord_distance(poly: RectPolygon, c: Chord) -> int:
    return edge_distance(
        poly.num_edges, min(c.e_bottom, c.e_top), max(c.e_bottom, c.e_top)
    )


def _make_chord(poly: RectPolygon, x: int, ylo: int, yhi: int) -> Chord:
    return Chord(
        x,
        ylo,
        yhi,
        _horizontal_edge_at(poly, Point(x, ylo)),
        _horizontal_edge_at(poly, Point(x, yhi)),
    )


def all_chords(poly: RectPolygon) -> list[Chord]:
    """Every vertical segment between two boundary touch points on the same
    section, at integral x (the exhaustive oracle for the k/3 bound)."""
    x0, _, x1, _ = poly.bbox()
    out = []
    for x in range(x0, x1 + 1):
        touches = _boundary_touches_vertical(poly, x)
        for lo, hi in poly.vertical_section(x):
            ys = sorted(
                {y for t1, t2 in touches for y in (t1, t2) if lo <= y <= hi}
            )
            for a in range(len(ys)):
                for b in range(a + 1, len(ys)):
                    out.append(_make_chord(poly, x, ys[a], ys[b]))
    return out


def _boundary_touches_vertical(poly: RectPolygon, x: int) -> list[tuple[int, int]]:
    """Maximal y-intervals (possibly degenerate) of boundary points on the
    vertical line at x."""
    touches = []
    for e in poly.edges():
        if e.vertical and e.a.x == x:
            y1, y2 = sorted((e.a.y, e.b.y))
            touches.append((y1, y2))
        elif e.horizontal:
            ex1, ex2 = sorted((e.a.x, e.b.x))
            if ex1 <= x <= ex2:
                touches.append((e.a.y, e.a.y))
    touches.sort()
    merged = []
    for lo, hi in touches:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def vertical_spanning_segment(poly: RectPolygon) -> tuple[Segment, Chord]:
    """A vertical segment inside the polygon whose endpoint edges are at
    cyclic edge distance at least k/3, found by iterative improvement
    over six mutually exclusive configurations; the distance strictly
    increases every iteration.
    """
    k = poly.num_edges
    v0 = poly.vertices[0]
    lo, hi = poly.vertical_reach(v0)
    chord = _make_chord(poly, v0.x, lo, hi)
    guard = 0
    while 3 * chord_distance(poly, chord) < k:
        improved = _improve_chord(poly, chord)
        if chord_distance(poly, improved) <= chord_distance(poly, chord):
            raise ConstructionError("chord improvement failed to increase d")
        chord = improved
        guard += 1
        if guard > 3 * k:
            raise ConstructionError("chord improvement did not converge")
    seg = Segment(Point(chord.x, chord.ylo), Point(chord.x, chord.yhi))
    return seg, chord


def _chain_between(k: int, from_edge: int, to_edge: int) -> list[int]:
    """Edge indices strictly between two edges in cyclic (stored) order."""
    out = []
    i = (from_edge + 1) % k
    while i != to_edge:
        out.append(i)
        i = (i + 1) % k
    return out


def _improve_chord(poly: RectPolygon, chord: Chord, depth: int = 0) -> Chord:
    """One strict improvement step of the chord's endpoint-edge distance."""
    if depth > 4:
        raise ConstructionError("chord improvement mirror recursion diverged")
    k = poly.num_edges
    L = _chain_between(k, chord.e_bottom, chord.e_top)
    R = _chain_between(k, chord.e_top, chord.e_bottom)
    if len(R) < len(L):
        mp = poly.transform(lambda q: Point(-q.x, q.y))
        mc = _make_chord(mp, -chord.x, chord.ylo, chord.yhi)
        res = _improve_chord(mp, mc, depth + 1)
        return _make_chord(poly, -res.x, res.ylo, res.yhi)

    hsides = poly.horizontal_edge_sides()
    edges = poly.edges()
    p_b = Point(chord.x, chord.ylo)
    p_t = Point(chord.x, chord.yhi)
    e_t, e_b = edges[chord.e_top], edges[chord.e_bottom]

    def mirror_y() -> Chord:
        mp = poly.transform(lambda q: Point(q.x, -q.y))
        mc = _make_chord(mp, chord.x, -chord.yhi, -chord.ylo)
        res = _improve_chord(mp, mc, depth + 1)
        return _make_chord(poly, res.x, -res.yhi, -res.ylo)

    # case 1 / 1': an endpoint edge faces away from the chord.
    if hsides[chord.e_top] == "bottom":
        return _improve_case1(poly, chord, p_b, p_t, e_t)
    if hsides[chord.e_bottom] == "top":
        return mirror_y()

    ex1, ex2 = sorted((e_t.a.x, e_t.b.x))
    q_t = Point(ex2, e_t.a.y)
    bx1, bx2 = sorted((e_b.a.x, e_b.b.x))
    q_b = Point(bx2, e_b.a.y)

    # case 2 / 2': the chord already ends at a right endpoint.
    if p_t == q_t:
        return _improve_case2(poly, chord, p_b, p_t)
    if p_b == q_b:
        return mirror_y()

    if q_t.x > q_b.x:
        return mirror_y()

    # cases 3 / 4: slide toward q_t through the rectangular window W.
    W = Rect(chord.x, chord.ylo, q_t.x, chord.yhi)
    hits = []
    for i in R:
        e = edges[i]
        if not e.horizontal:
            continue
        hx1, hx2 = sorted((e.a.x, e.b.x))
        if hx1 <= W.xr and hx2 >= W.xl and W.yb <= e.a.y <= W.yt:
            hits.append((Point(hx1, e.a.y), i))
    if not hits:
        # case 3: shift the chord to q_t's x and fall through to case 2.
        shifted = Segment(Point(q_t.x, chord.ylo), q_t)
        if not poly.contains_segment(shifted):
            raise ConstructionError("case 3: window right side leaves polygon")
        new = _make_chord(poly, q_t.x, chord.ylo, q_t.y)
        if new.e_bottom != chord.e_bottom or new.e_top != chord.e_top:
            raise ConstructionError("case 3: shifted chord changed edges")
        return _improve_case2(poly, new, Point(q_t.x, chord.ylo), q_t)
    # case 4
    for left_pt, i in hits:
        if not (W.xl <= left_pt.x <= W.xr and W.yb <= left_pt.y <= W.yt):
            raise ConstructionError("case 4: R-edge crosses W without endpoint")
    q, e_q = min(hits, key=lambda h: (h[0].x, h[0].y, h[1]))
    d = chord_distance(poly, chord)
    d_be = edge_distance(k, min(chord.e_bottom, e_q), max(chord.e_bottom, e_q))
    d_et = edge_distance(k, min(e_q, chord.e_top), max(e_q, chord.e_top))
    if d_be > d:
        seg = Segment(Point(q.x, chord.ylo), q)
        if not poly.contains_segment(seg):
            raise ConstructionError("case 4: lower replacement leaves polygon")
        return _make_chord(poly, q.x, chord.ylo, q.y)
    if d_et > d:
        seg = Segment(q, Point(q.x, chord.yhi))
        if not poly.contains_segment(seg):
            raise ConstructionError("case 4: upper replacement leaves polygon")
        return _make_chord(poly, q.x, q.y, chord.yhi)
    raise ConstructionError("case 4: no replacement increases d")


def _improve_case1(
    poly: RectPolygon, chord: Chord, p_b: Point, p_t: Point, e_t: Segment
) -> Chord:
    k = poly.num_edges
    ex1, ex2 = sorted((e_t.a.x, e_t.b.x))
    if p_t.x == ex1:  # left endpoint: a vertical edge hangs down inside the chord
        vi = _vertical_edge_endpoint_at(poly, p_t)
        if vi is None:
            raise ConstructionError("case 1a: no vertical edge at p_t")
        e_v = poly.edges()[vi]
        q = e_v.a if e_v.b == p_t else e_v.b
        if not (p_b.y < q.y < p_t.y):
            raise ConstructionError("case 1a: hanging edge not inside the chord")
        return _make_chord(poly, chord.x, p_b.y, q.y)
    # right endpoint: jump to the next boundary touch above (the touch
    # interval containing p_t may itself continue upward along an edge).
    touches = _boundary_touches_vertical(poly, chord.x)
    qy = None
    for lo, hi in touches:
        if lo <= p_t.y <= hi and hi > p_t.y:
            qy = hi
            break
    if qy is None:
        cand = sorted(lo for lo, _hi in touches if lo > p_t.y)
        if not cand:
            raise ConstructionError("case 1b: no boundary point above p_t")
        qy = cand[0]
    if not poly.contains_segment(Segment(p_t, Point(chord.x, qy))):
        raise ConstructionError("case 1b: segment above p_t leaves polygon")
    q = Point(chord.x, qy)
    e_q = _horizontal_edge_at(poly, q)
    d = chord_distance(poly, chord)
    d_et = edge_distance(k, min(chord.e_top, e_q), max(chord.e_top, e_q))
    d_be = edge_distance(k, min(chord.e_bottom, e_q), max(chord.e_bottom, e_q))
    if d_et > d:
        return _make_chord(poly, chord.x, p_t.y, qy)
    if d_be > d:
        return _make_chord(poly, chord.x, p_b.y, qy)
    raise ConstructionError("case 1b: no replacement increases d")


def _improve_case2(poly: RectPolygon, chord: Chord, p_b: Point, p_t: Point) -> Chord:
    vi = _vertical_edge_endpoint_at(poly, p_t)
    if vi is None:
        raise ConstructionError("case 2: no vertical edge at p_t")
    e_v = poly.edges()[vi]
    q = e_v.a if e_v.b == p_t else e_v.b
    lo, hi = sorted((p_b.y, q.y))
    if not poly.contains_segment(Segment(Point(chord.x, lo), Point(chord.x, hi))):
        raise ConstructionError("case 2: replacement chord leaves polygon")
    return _make_chord(poly, chord.x, lo, hi)


# -- the line-partitioning cut (factor-6 regime) -------------------------------


def _mirror_cutresult(res: CutResult, mx: Callable[[Point], Point]) -> CutResult:
    def mseg(s: Segment) -> Segment:
        return Segment(mx(s.a), mx(s.b)).canonical()

    return CutResult(
        Cut(tuple(mseg(s) for s in res.cut.segments), res.cut.shape),
        mseg(res.ell) if res.ell else None,
        res.intersected,
        [p.transform(mx) for p in res.components],
        dict(res.assignment),
        res.case + "+mirrored",
    )


def line_partition_cut(poly: RectPolygon, rects: RectsIn) -> CutResult:
    """Cut a horizontally convex polygon (at most 26 edges, at least two
    rects) with at most 8 segments so that 2-3 horizontally convex
    components remain, only one vertical segment meets any rectangle, and
    no line-fence-protected rectangle is met.
    """
    if len(rects) < 2:
        raise ConstructionError("line_partition_cut needs at least two rects")
    if not is_horizontally_convex(poly):
        raise ConstructionError("polygon is not horizontally convex")
    sides = poly.vertical_edge_sides()
    left_idx = [i for i, s in sides.items() if s == "left"]
    right_idx = [i for i, s in sides.items() if s == "right"]
    if len(left_idx) < len(right_idx):
        mirror = lambda q: Point(-q.x, q.y)
        mres = line_partition_cut(
            poly.transform(mirror),
            [(rid, Rect(-r.xr, r.yb, -r.xl, r.yt)) for rid, r in rects],
        )
        return _mirror_cutresult(mres, mirror)

    edges = poly.edges()
    lefts = sorted(left_idx, key=lambda i: -max(edges[i].a.y, edges[i].b.y))
    s = len(lefts)
    em = lefts[s // 3 : (2 * s + 2) // 3]  # middle third, 1-based floor/ceil

    candidates = []
    for i in em:
        e = edges[i]
        y1, y2 = sorted((e.a.y, e.b.y))
        for y in range(y1, y2 + 1):
            p = Point(e.a.x, y)
            fs = line_fences_from_point(poly, rects, p, "left")
            if fs:
                f = fs[-1]  # furthest feature: rightmost endpoint from p
                candidates.append((f.endpoint, p))
    if not candidates:
        return _guillotine_cut(poly, rects)
    candidates.sort(key=lambda t: (-t[0].x, t[1].y, t[1].x))
    p_prime, p_anchor = candidates[0]

    fences = enumerate_line_fences(poly, rects)
    protected = {
        rid: protecting_fences(poly, rects, r) for rid, r in rects
    }
    prot_ids = {rid for rid, fs in protected.items() if fs}

    def ray_stop(start: Point, down: bool) -> tuple[Point, list[Point]]:
        """First stopping event of the vertical ray from start; returns the
        stop point and the tail walk from it to the polygon boundary."""
        ylo, yhi = poly.vertical_reach(start)
        bound = ylo if down else yhi
        events: list[tuple[int, int, tuple]] = []  # (y, priority, data)
        for rid, r in rects:
            if rid not in prot_ids or not (r.xl < start.x < r.xr):
                continue
            ey = r.yt if down else r.yb
            within = (bound <= ey <= start.y) if down else (start.y <= ey <= bound)
            if within:
                events.append((ey, 1, ("rect", rid, r)))
        for f in fences:
            seg = f.chain[0]
            if seg.degenerate:
                continue
            fx1, fx2 = sorted((seg.a.x, seg.b.x))
            fy = seg.a.y
            if not (fx1 < start.x < fx2):
                continue
            within = (bound <= fy <= start.y) if down else (start.y <= fy <= bound)
            if within:
                events.append((fy, 0, ("fence", f)))
        if not events:
            return Point(start.x, bound), []
        if down:
            events.sort(key=lambda t: (-t[0], t[1], _event_order(t[2])))
        else:
            events.sort(key=lambda t: (t[0], t[1], _event_order(t[2])))
        y, _prio, data = events[0]
        qp = Point(start.x, y)
        if data[0] == "fence":
            f = data[1]
            return qp, [f.anchor]
        _kind, rid, r = data
        pf = protected[rid][0]
        covered_y = pf.chain[0].a.y
        if covered_y == (r.yt if down else r.yb):
            # the protecting fence runs along the very edge the ray hit
            return qp, [pf.anchor]
        if pf.side == "from_left_edge":
            walk = [
                Point(r.xl, y),
                Point(r.xl, covered_y),
                pf.anchor,
            ]
        else:
            walk = [
                Point(r.xr, y),
                Point(r.xr, covered_y),
                pf.anchor,
            ]
        return qp, walk

    qb, tail_b = ray_stop(p_prime, down=True)
    qt, tail_t = ray_stop(p_prime, down=False)

    path_b = splice_simple([p_anchor, p_prime, qb] + tail_b)
    path_t = splice_simple([p_anchor, p_prime, qt] + tail_t)
    segs = polyline_to_segments(path_b) + polyline_to_segments(path_t)
    merged = _merge_segments(segs)

    comps = split_components(poly, Cut(tuple(merged)))
    if len(comps) < 2:
        return _degenerate_line_cut(poly, rects, p_anchor, p_prime)
    return _finalize(
        poly,
        merged,
        rects,
        max_segments=8,
        max_edges=26,
        expect_components=(2, 3),
        case="line",
        require_hconvex=True,
        protected_check=lambda r: bool(protecting_fences(poly, rects, r)),
    )


def _event_order(data: tuple) -> tuple:
    if data[0] == "fence":
        f = data[1]
        return (0, f.anchor.y, f.anchor.x)
    return (1, data[1])


def _guillotine_cut(poly: RectPolygon, rects: RectsIn) -> CutResult:
    """A single straight chord splitting the polygon without meeting any
    rectangle; used when no middle-third fence exists."""
    x0, y0, x1, y1 = poly.bbox()
    for y in range(y0 + 1, y1):
        for lo, hi in poly.horizontal_section(y):
            seg = Segment(Point(lo, y), Point(hi, y))
            if any(segment_intersects_rect(seg, r) for _rid, r in rects):
                continue
            try:
                return _finalize(
                    poly, [seg], rects, 8, 26, (2, 3), "guillotine", True
                )
            except (ConstructionError, CutError):
                continue
    for x in range(x0 + 1, x1):
        for lo, hi in poly.vertical_section(x):
            seg = Segment(Point(x, lo), Point(x, hi))
            if any(segment_intersects_rect(seg, r) for _rid, r in rects):
                continue
            try:
                return _finalize(
                    poly, [seg], rects, 8, 26, (2, 3), "guillotine", True
                )
            except (ConstructionError, CutError):
                continue
    raise ConstructionError("no fence anchored on the middle third and no guillotine")


def _degenerate_line_cut(
    poly: RectPolygon, rects: RectsIn, p_anchor: Point, p_prime: Point
) -> CutResult:
    """The alternate cut around the corner rectangle when the main line cut
    lies entirely on the boundary; only possible for polygons with at most
    8 edges.
    """
    if poly.num_edges > 8:
        raise ConstructionError(
            "degenerate line cut on a polygon with more than 8 edges"
        )
    y = p_anchor.y
    top_rect = None
    for rid, r in rects:
        if r.corner("TR") == p_prime:
            top_rect = ("top", r)
        if r.corner("BR") == p_prime:
            top_rect = top_rect or ("bottom", r)
    if top_rect is None:
        raise ConstructionError("degenerate case: p' is not a rect corner")
    kind, r = top_rect
    if kind == "top":
        walk = [p_anchor, Point(r.xl, y), Point(r.xl, r.yb), Point(r.xr, r.yb)]
    else:
        walk = [p_anchor, Point(r.xl, y), Point(r.xl, r.yt), Point(r.xr, r.yt)]
    segs = polyline_to_segments(splice_simple(walk))
    return _finalize(
        poly, segs, rects, 8, 26, (2, 3), "line-degenerate", True
    )


# -- the general partitioning cut (tau-fence regimes) --------------------------


def general_partition_cut(
    poly: RectPolygon,
    rects: RectsIn,
    tau: int,
    ell0: Optional[Chord] = None,
    _depth: int = 0,
) -> CutResult:
    """Cut a simple polygon with at most 30 tau + 18 edges into exactly two
    simple components with at most 2 tau + 1 segments, such that only one
    vertical segment meets rectangles and no tau-protected rectangle is
    met."""
    if len(rects) < 2:
        raise ConstructionError("general_partition_cut needs at least two rects")
    if not poly.is_simple:
        raise ConstructionError("polygon is not simple")
    k = poly.num_edges
    cap = 30 * tau + 18
    if k > cap:
        raise ConstructionError(f"polygon exceeds {cap} edges")
    budget = 2 * tau + 1

    if k <= 15 * budget - 1:
        return _case0_cut(poly, rects, tau)

    eng = tau_engine(poly, rects, tau)
    if ell0 is None:
        _seg, chord = vertical_spanning_segment(poly)
    else:
        chord = ell0
    d0 = chord_distance(poly, chord)
    if 3 * d0 < k:
        raise ConstructionError("spanning chord below the k/3 bound")

    edges = poly.edges()
    sides = poly.vertical_edge_sides()
    L = _chain_between(k, chord.e_bottom, chord.e_top)
    R = _chain_between(k, chord.e_top, chord.e_bottom)
    if len(L) < 5 * budget or len(R) < 5 * budget:
        raise ConstructionError("boundary chains shorter than 5(2tau+1)")

    def split3(chain: list[int]) -> tuple[list[int], list[int], list[int]]:
        # middle group exactly 2 tau + 1 edges, remainder split evenly over
        # the outer groups (clockwise-first outer gets the ceiling).
        rem = len(chain) - 5 * budget
        a = 2 * budget + (rem + 1) // 2
        return chain[:a], chain[a : a + budget], chain[a + budget :]

    LB, LM, LT = split3(L)
    RT, RM, RB = split3(R)

    def group_table(group: list[int]):
        pts = []
        for i in group:
            if i in sides:
                pts.extend(eng.edge_points(edges[i]))
        return eng.reach(pts) if pts else None

    tables = {
        name: group_table(g)
        for name, g in (("LB", LB), ("LM", LM), ("LT", LT),
                        ("RT", RT), ("RM", RM), ("RB", RB))
    }
    group_edges = {"LB": LB, "LM": LM, "LT": LT, "RT": RT, "RM": RM, "RB": RB}

    def covered(name: str, p: Point) -> bool:
        t = tables[name]
        return t is not None and eng.covers(t, p)

    def covered_interior(name: str, p: Point) -> bool:
        t = tables[name]
        return t is not None and eng.covers_interior(t, p)

    ys = range(chord.ylo, chord.yhi + 1)
    pts = [Point(chord.x, y) for y in ys]
    plist = [p for p in pts if any(covered(g, p) for g in tables)]
    if not plist:
        raise ConstructionError("no fence-covered point on the spanning chord")
    if not (covered("LB", plist[0]) and covered("RB", plist[0])):
        raise ConstructionError("chord foot not covered from both bottom groups")
    if not (covered("LT", plist[-1]) and covered("RT", plist[-1])):
        raise ConstructionError("chord head not covered from both top groups")

    lm_hit = any(covered("LM", p) for p in plist)
    rm_hit = any(covered("RM", p) for p in plist)

    if not lm_hit and not rm_hit:
        res = _general_case1(poly, rects, tau, eng, tables, plist)
    else:
        if not lm_hit:
            if _depth >= 2:
                raise ConstructionError("mirror recursion diverged")
            mirror = lambda q: Point(-q.x, q.y)
            mpoly = poly.transform(mirror)
            mrects = [(rid, Rect(-r.xr, r.yb, -r.xl, r.yt)) for rid, r in rects]
            mchord = _make_chord(mpoly, -chord.x, chord.ylo, chord.yhi)
            mres = general_partition_cut(mpoly, mrects, tau, mchord, _depth + 1)
            return _mirror_cutresult(mres, mirror)
        res = _general_case2(
            poly, rects, tau, eng, tables, group_edges, chord, plist
        )
    return res


def _protected_check_tau(poly, rects, tau):
    return lambda r: is_tau_protected(r, poly, rects, tau)


def _case0_cut(poly: RectPolygon, rects: RectsIn, tau: int) -> CutResult:
    """Wrap the rectangle with the leftmost left side with two leftward
    rays and its right edge; intersects nothing and adds at most four
    edges per component."""
    rid, r = min(rects, key=lambda t: (t[1].xl, t[1].yb, t[0]))
    top_lo, _ = poly.horizontal_reach(Point(r.xr, r.yt))
    bot_lo, _ = poly.horizontal_reach(Point(r.xr, r.yb))
    walk = [
        Point(top_lo, r.yt),
        Point(r.xr, r.yt),
        Point(r.xr, r.yb),
        Point(bot_lo, r.yb),
    ]
    segs = polyline_to_segments(splice_simple(walk))
    hits = _segment_hits(segs, rects)
    if hits:
        raise ConstructionError("case 0 cut intersects a rectangle")
    return _finalize(
        poly,
        segs,
        rects,
        max_segments=2 * tau + 1,
        max_edges=30 * tau + 18,
        expect_components=(2, 2),
        case="general-0",
        protected_check=None,
    )


def _general_case1(poly, rects, tau, eng: FenceEngine, tables, plist) -> CutResult:
    def b_cover(p):
        return (tables["LB"] and eng.covers(tables["LB"], p)) or (
            tables["RB"] and eng.covers(tables["RB"], p)
        )

    def t_cover(p):
        return (tables["LT"] and eng.covers(tables["LT"], p)) or (
            tables["RT"] and eng.covers(tables["RT"], p)
        )

    def chain_from(names, p):
        for name in names:
            t = tables[name]
            if t is not None and eng.covers(t, p):
                return eng.chain_to(t, p)
        raise ConstructionError("no covering chain found")

    for p in plist:
        if b_cover(p) and t_cover(p):
            walk = chain_from(("LB", "RB"), p) + list(
                reversed(chain_from(("LT", "RT"), p))
            )[1:]
            segs = polyline_to_segments(splice_simple(walk))
            return _finalize(
                poly, segs, rects, 2 * tau + 1, 30 * tau + 18, (2, 2),
                "general-1a",
                protected_check=_protected_check_tau(poly, rects, tau),
            )
    for a, b in zip(plist, plist[1:]):
        if b_cover(a) and t_cover(b):
            walk = (
                chain_from(("LB", "RB"), a)
                + [b]
                + list(reversed(chain_from(("LT", "RT"), b)))[1:]
            )
            segs = polyline_to_segments(splice_simple(walk))
            return _finalize(
                poly, segs, rects, 2 * tau + 1, 30 * tau + 18, (2, 2),
                "general-1b",
                protected_check=_protected_check_tau(poly, rects, tau),
            )
    raise ConstructionError("case 1: no bottom-to-top transition on the chord")


def _general_case2(
    poly, rects, tau, eng: FenceEngine, tables, group_edges, chord: Chord, plist
) -> CutResult:
    k = poly.num_edges
    budget = 2 * tau + 1
    cap = 30 * tau + 18
    # f: the LM-anchored chain with the rightmost endpoint.
    t_lm = tables["LM"]
    if t_lm is None:
        raise ConstructionError("case 2 without LM anchors")
    best = None
    for ix in range(eng.nx):
        for iy in range(eng.ny):
            d = min(min(row) for row in t_lm["dist"][ix][iy])
            if d <= tau:
                cand = Point(ix + eng.x0, iy + eng.y0)
                key = (-cand.x, cand.y)
                if best is None or key < best[0]:
                    best = (key, cand)
    if best is None:
        raise ConstructionError("case 2: LM reaches nothing")
    p = best[1]
    f_chain = eng.chain_to(t_lm, p)

    def scan(start: Point, up: bool):
        ylo, yhi = poly.vertical_reach(start)
        ys = range(start.y, yhi + 1) if up else range(start.y, ylo - 1, -1)
        for y in ys:
            z = Point(start.x, y)
            grps = [g for g in tables if covered_interior_any(g, z)]
            if grps:
                return z, grps, False
        z = Point(start.x, yhi if up else ylo)
        vi = _vertical_edge_endpoint_at(poly, z)
        if vi is None:
            for i, e in enumerate(poly.edges()):
                if e.vertical and e.contains_point(z):
                    vi = i
                    break
        if vi is not None:
            grp = _group_of_edge(group_edges, vi)
            if grp:
                return z, [grp], True
        return None, [], False

    def covered_interior_any(name, z):
        t = tables[name]
        return t is not None and eng.covers_interior(t, z)

    q, q_groups, q_vertex = scan(p, up=True)
    qh, qh_groups, qh_vertex = scan(p, up=False)

    def chain_or_point(name, z, vertex):
        if vertex:
            return [z]
        return eng.chain_to(tables[name], z)

    right = ("RT", "RM", "RB")
    finalize = lambda walk, case: _finalize(
        poly,
        polyline_to_segments(splice_simple(walk)),
        rects,
        budget,
        cap,
        (2, 2),
        case,
        protected_check=_protected_check_tau(poly, rects, tau),
    )

    for name in right:
        if q is not None and name in q_groups:
            walk = f_chain + [q] + list(reversed(chain_or_point(name, q, q_vertex)))[1:]
            return finalize(walk, "general-2a")
    for name in right:
        if qh is not None and name in qh_groups:
            walk = f_chain + [qh] + list(reversed(chain_or_point(name, qh, qh_vertex)))[1:]
            return finalize(walk, "general-2a'")

    if q is None or qh is None:
        raise ConstructionError("case 2b: missing ray stop")
    if "LM" in q_groups or "LM" in qh_groups:
        raise ConstructionError("case 2b: stop anchored on LM contradicts f's choice")

    if "LT" in q_groups and "LB" in qh_groups:
        walk = (
            chain_or_point("LT", q, q_vertex)
            + [qh]
            + list(reversed(chain_or_point("LB", qh, qh_vertex)))[1:]
        )
        return finalize(walk, "general-2bi")
    if "LB" in q_groups and "LT" in qh_groups:
        g_chain = chain_or_point("LB", q, q_vertex)
        gh_chain = chain_or_point("LT", qh, qh_vertex)
        walk = _join_at_intersection(g_chain, gh_chain)
        return finalize(walk, "general-2bi'")

    if "LT" in q_groups and "LT" in qh_groups:
        side = "LT"
        down = True
    elif "LB" in q_groups and "LB" in qh_groups:
        side = "LB"
        down = False
    else:
        raise ConstructionError(f"case 2b: unclassifiable stops {q_groups}/{qh_groups}")
    return _general_case2bii(
        poly, rects, tau, eng, tables, group_edges, p, f_chain, side, down, finalize
    )


def _group_of_edge(group_edges: dict[str, list[int]], idx: int) -> Optional[str]:
    for name, g in group_edges.items():
        if idx in g:
            return name
    return None


def _join_at_intersection(chain_a: list[Point], chain_b: list[Point]) -> list[Point]:
    """Walk chain_a from its anchor until the first point shared with
    chain_b, then follow chain_b back to its anchor."""
    bset = {p: i for i, p in enumerate(chain_b)}
    for i, pt in enumerate(chain_a):
        if pt in bset:
            return chain_a[: i + 1] + list(reversed(chain_b[: bset[pt]]))
    raise ConstructionError("chains do not intersect")


def _general_case2bii(
    poly, rects, tau, eng, tables, group_edges, p, f_chain, side, down, finalize
):
    """Both ray stops anchor on the same outer-left group: walk the ray to
    the boundary, find the lowest/highest stop anchored outside the group,
    and cut between the group fence and that outside fence."""
    ylo, yhi = poly.vertical_reach(p)
    ys = range(p.y, ylo - 1, -1) if down else range(p.y, yhi + 1)
    complement = [g for g in tables if g not in (side, "LM")]
    stops = []
    for y in ys:
        z = Point(p.x, y)
        grps = [
            g
            for g in tables
            if tables[g] is not None and eng.covers_interior(tables[g], z)
        ]
        if grps:
            stops.append((z, grps))
    if not stops:
        raise ConstructionError("case 2bii: no interior-covered stop on the ray")
    idx_star = None
    for i, (z, grps) in enumerate(stops):
        if side in grps:
            idx_star = i
    if idx_star is None:
        raise ConstructionError("case 2bii: no stop anchored on the group")
    z_star, grps_star = stops[idx_star]
    gpp_at = None
    if any(g in complement for g in grps_star):
        gpp_at = (z_star, next(g for g in complement if g in grps_star))
    elif idx_star + 1 < len(stops):
        z2, grps2 = stops[idx_star + 1]
        cands = [g for g in complement if g in grps2]
        if cands:
            gpp_at = (z2, cands[0])
    if gpp_at is None:
        raise ConstructionError("case 2bii: no complement-anchored stop adjacent")

    g_chain = eng.chain_to(tables[side], z_star)
    anchor = g_chain[0]
    anchor_edge = None
    for i in group_edges[side]:
        e = poly.edges()[i]
        if e.vertical and e.contains_point(anchor):
            anchor_edge = i
            break
    if anchor_edge is None:
        raise ConstructionError("case 2bii: group chain anchor not on a group edge")
    group = group_edges[side]
    half = len(group) // 2
    # The half adjacent to LM: LT starts right after LM (clockwise), LB ends
    # right before it.
    if side == "LT":
        inner = set(group[:half])
    else:
        inner = set(group[-half:])
    if anchor_edge in inner:
        z2, gname = gpp_at
        gpp_chain = eng.chain_to(tables[gname], z2)
        walk = g_chain + ([z2] if z2 != z_star else []) + list(reversed(gpp_chain))[1:]
        return finalize(walk, "general-2biiA")
    walk = _join_at_intersection(f_chain, g_chain)
    return finalize(walk, "general-2biiB")


# -- recursive partitioning driver ---------------------------------------------


def anti_transpose_rect(r: Rect, side: int) -> Rect:
    """Reflection across the anti-diagonal of S: maps vertically nice to
    horizontally nice and vertically nested to horizontally nested."""
    return Rect(side - r.yt, side - r.xr, side - r.yb, side - r.xl)


@dataclass
class PartitionNode:
    id: int
    polygon: RectPolygon
    parent: Optional[int]
    children: list[int] = field(default_factory=list)
    cut: Optional[Cut] = None
    ell: Optional[Segment] = None
    intersected: tuple[int, ...] = ()
    assigned: Optional[int] = None
    case: str = ""


@dataclass
class TraceEntry:
    node: int
    polygon: RectPolygon
    rect_ids: tuple[int, ...]
    ell: Optional[Segment]
    intersected: tuple[int, ...]


@dataclass
class PartitionRun:
    regime: str
    tau: Optional[int]
    eps: Optional[Fraction]
    transposed: bool
    side: int
    work_rects: tuple[Rect, ...]
    origin: tuple[int, ...]
    nodes: list[PartitionNode]
    trace: list[TraceEntry]
    tracked: frozenset[int]
    flags: list[str] = field(default_factory=list)

    @property
    def k_budget(self) -> int:
        if self.regime == "six":
            return 26
        return 30 * self.tau + 18

    def saved_original_indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.origin[i] for i in self.tracked))


REGIMES = ("six", "three", "two_eps")


def regime_tau(regime: str, eps: Optional[Fraction], tau: Optional[int]) -> Optional[int]:
    if regime == "six":
        return None
    if tau is not None:
        return tau
    if regime == "three":
        return 7
    if regime == "two_eps":
        if eps is None:
            raise ConstructionError("two_eps regime requires eps")
        inv = 1 / Fraction(eps)
        if inv.denominator != 1:
            raise ConstructionError("two_eps requires 1/eps integral")
        return int(4 * inv) + 3
    raise ConstructionError(f"unknown regime {regime!r}")


def recursive_partition(
    m: MaximalSet,
    regime: str,
    eps: Optional[Fraction] = None,
    tau: Optional[int] = None,
    check: bool = True,
) -> PartitionRun:
    """Run the regime's recursive partitioning over the maximal set.

    Orientation is normalized first by an anti-diagonal transpose of the
    whole configuration (at most half horizontally nested for six/three,
    at least half horizontally nice for two_eps); all further work happens
    in the normalized frame.
    """
    if regime not in REGIMES:
        raise ConstructionError(f"unknown regime {regime!r}")
    n = len(m.rects)
    side = m.side
    transposed = False
    if regime in ("six", "three"):
        lab = classify_nesting(m)
        if 2 * len(lab.horizontally_nested) > n:
            transposed = True
    else:
        nice = classify_nice(m)
        if 2 * len(nice.horizontally_nice) < n:
            transposed = True
    work = tuple(
        anti_transpose_rect(r, side) if transposed else r for r in m.rects
    )
    wm = MaximalSet(work, m.origin, side)
    if regime in ("six", "three"):
        labels = classify_nesting(wm)
        if 2 * len(labels.horizontally_nested) > n:
            raise ConstructionError("normalization failed: too many nested")
        h_nested = labels.horizontally_nested
    else:
        nice = classify_nice(wm)
        if 2 * len(nice.horizontally_nice) < n:
            raise ConstructionError("normalization failed: too few nice")
        h_nested = classify_nesting(wm).horizontally_nested

    the_tau = regime_tau(regime, eps, tau)
    if regime == "six":
        cutter = lambda poly, rin: line_partition_cut(poly, rin)
        prot = lambda r, poly, rin: is_protected(r, poly, rin)
    else:
        cutter = lambda poly, rin: general_partition_cut(poly, rin, the_tau)
        prot = lambda r, poly, rin: is_tau_protected(r, poly, rin, the_tau)

    root_poly = RectPolygon.from_rect(Rect(0, 0, side, side))
    nodes = [PartitionNode(0, root_poly, None)]
    trace: list[TraceEntry] = []
    tracked: set[int] = set()
    flags: list[str] = []
    stack = [0]
    while stack:
        v = stack.pop()
        poly = nodes[v].polygon
        ids = [i for i in range(n) if poly.contains_rect(work[i])]
        if not ids:
            continue
        if len(ids) == 1:
            nodes[v].assigned = ids[0]
            tracked.add(ids[0])
            continue
        rects_in = [(i, work[i]) for i in ids]
        if check:
            _check_visibility_guarantee(work, poly, rects_in, h_nested)
        protected_before = (
            {i: prot(work[i], poly, rects_in) for i in ids} if check else {}
        )
        res = cutter(poly, rects_in)
        trace.append(TraceEntry(v, poly, tuple(ids), res.ell, res.intersected))
        nodes[v].cut = res.cut
        nodes[v].ell = res.ell
        nodes[v].intersected = res.intersected
        nodes[v].case = res.case
        order = sorted(range(len(res.components)), key=lambda c: res.components[c].vertices)
        comp_to_child = {}
        for c in order:
            child = PartitionNode(len(nodes), res.components[c], v)
            if child.polygon.area2() >= poly.area2():
                raise ConstructionError("child polygon did not shrink")
            nodes[v].children.append(child.id)
            comp_to_child[c] = child.id
            nodes.append(child)
            stack.append(child.id)
        if check:
            for i in ids:
                if i in res.intersected or not protected_before[i]:
                    continue
                child_poly = res.components[res.assignment[i]]
                child_rects = [
                    (j, work[j])
                    for j in ids
                    if j not in res.intersected
                    and res.assignment[j] == res.assignment[i]
                ]
                if not prot(work[i], child_poly, child_rects):
                    raise ConstructionError(
                        f"protection of rect {i} not persistent in child"
                    )
    leftover = set(range(n)) - tracked
    for t in trace:
        leftover -= set(t.intersected)
    if leftover:
        raise ConstructionError(f"rects neither tracked nor intersected: {leftover}")
    return PartitionRun(
        regime,
        the_tau,
        Fraction(eps) if eps is not None else None,
        transposed,
        side,
        work,
        m.origin,
        nodes,
        trace,
        frozenset(tracked),
        flags,
    )


def _check_visibility_guarantee(
    work: tuple[Rect, ...],
    poly: RectPolygon,
    rects_in: RectsIn,
    h_nested: frozenset[int],
) -> None:
    """Every rect that is neither line-fence-protected nor horizontally
    nested must see a corner of another contained rect on each side."""
    ids = [rid for rid, _ in rects_in]
    for rid, r in rects_in:
        if rid in h_nested or is_protected(r, poly, rects_in):
            continue
        for side_name in ("left", "right"):
            if not seen_corners_on_side(work, rid, side_name, ids):
                raise ConstructionError(
                    f"rect {rid} neither protected nor nested sees no corner "
                    f"on its {side_name}"
                )


# -- validation -----------------------------------------------------------------


def polygon_meets_rect_interior(poly: RectPolygon, r: Rect) -> bool:
    """Does the closed polygon contain any interior point of the rect?"""
    if poly.contains_doubled(r.xl + r.xr, r.yb + r.yt):
        return True
    xs = sorted({p.x for p in poly.vertices if r.xl < p.x < r.xr} | {r.xl, r.xr})
    ys = sorted({p.y for p in poly.vertices if r.yb < p.y < r.yt} | {r.yb, r.yt})
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            if poly.contains_doubled(xs[i] + xs[i + 1], ys[j] + ys[j + 1]):
                return True
    return False


def validate_partition(run: PartitionRun, k: Optional[int] = None) -> list[dict]:
    """Check every defining clause of a k-recursive partition plus the
    regime extras; returns a report of named checks."""
    k = k if k is not None else run.k_budget
    report = []
    nodes = run.nodes

    ok = all(p.polygon.is_simple and p.polygon.num_edges <= k for p in nodes)
    report.append(
        {"name": "polygons_in_class", "ok": ok, "detail": f"k={k}"}
    )

    root_ok = nodes[0].polygon == RectPolygon.from_rect(
        Rect(0, 0, run.side, run.side)
    )
    report.append({"name": "root_is_square", "ok": root_ok, "detail": ""})

    tile_ok, tile_detail = True, ""
    for node in nodes:
        if not node.children:
            continue
        if len(node.children) > 3:
            tile_ok, tile_detail = False, f"node {node.id} has >3 children"
            break
        kids = [nodes[c].polygon for c in node.children]
        if sum(p.area2() for p in kids) != node.polygon.area2():
            tile_ok, tile_detail = False, f"node {node.id} area mismatch"
            break
        xs = sorted({p.x for kp in kids for p in kp.vertices})
        ys = sorted({p.y for kp in kids for p in kp.vertices})
        for i in range(len(xs) - 1):
            for j in range(len(ys) - 1):
                X, Y = xs[i] + xs[i + 1], ys[j] + ys[j + 1]
                inside_parent = node.polygon.contains_doubled(
                    X, Y
                ) and not node.polygon.on_boundary_doubled(X, Y)
                owners = sum(
                    1
                    for kp in kids
                    if kp.contains_doubled(X, Y) and not kp.on_boundary_doubled(X, Y)
                )
                if inside_parent != (owners == 1) or owners > 1:
                    tile_ok = False
                    tile_detail = f"node {node.id} cell ({xs[i]},{ys[j]}) owners={owners}"
                    break
            if not tile_ok:
                break
        if not tile_ok:
            break
    report.append({"name": "children_tile_parent", "ok": tile_ok, "detail": tile_detail})

    leaves = [node for node in nodes if not node.children]
    leaf_ok = True
    leaf_detail = ""
    for node in leaves:
        inside = [
            i
            for i in run.tracked
            if node.polygon.contains_rect(run.work_rects[i])
        ]
        if len(inside) > 1:
            leaf_ok, leaf_detail = False, f"leaf {node.id} holds {inside}"
            break
    report.append({"name": "leaf_holds_at_most_one", "ok": leaf_ok, "detail": leaf_detail})

    unique_ok, unique_detail = True, ""
    for i in run.tracked:
        r = run.work_rects[i]
        homes = [node.id for node in leaves if node.polygon.contains_rect(r)]
        meets = [
            node.id
            for node in leaves
            if polygon_meets_rect_interior(node.polygon, r)
        ]
        if len(homes) != 1 or meets != homes:
            unique_ok = False
            unique_detail = f"rect {i}: homes={homes} meets={meets}"
            break
    report.append({"name": "tracked_in_unique_leaf", "ok": unique_ok, "detail": unique_detail})

    horiz_ok, horiz_detail = True, ""
    for node in nodes:
        for e in node.polygon.edges():
            if not e.horizontal:
                continue
            for i, r in enumerate(run.work_rects):
                if segment_intersects_rect(e, r):
                    horiz_ok = False
                    horiz_detail = f"node {node.id} horizontal edge hits rect {i}"
                    break
            if not horiz_ok:
                break
        if not horiz_ok:
            break
    report.append(
        {"name": "horizontal_edges_miss_rects", "ok": horiz_ok, "detail": horiz_detail}
    )

    budget = 8 if run.regime == "six" else 2 * run.tau + 1
    cut_ok = all(
        node.cut is None or len(node.cut.segments) <= budget for node in nodes
    )
    report.append(
        {"name": "cut_segment_budget", "ok": cut_ok, "detail": f"budget={budget}"}
    )
    return report


def run_to_json(run: PartitionRun) -> dict:
    def seg(s: Optional[Segment]):
        return None if s is None else [[s.a.x, s.a.y], [s.b.x, s.b.y]]

    return {
        "regime": run.regime,
        "tau": run.tau,
        "eps": str(run.eps) if run.eps is not None else None,
        "transposed": run.transposed,
        "side": run.side,
        "work_rects": [[r.xl, r.yb, r.xr, r.yt] for r in run.work_rects],
        "origin": list(run.origin),
        "tracked": sorted(run.tracked),
        "nodes": [
            {
                "id": node.id,
                "polygon": [[p.x, p.y] for p in node.polygon.vertices],
                "parent": node.parent,
                "children": list(node.children),
                "cut": None
                if node.cut is None
                else {
                    "shape": node.cut.shape,
                    "segments": [seg(s) for s in node.cut.segments],
                },
                "ell": seg(node.ell),
                "intersected": list(node.intersected),
                "assigned": node.assigned,
                "case": node.case,
            }
            for node in run.nodes
        ],
    }
