"""Independent oracles and generators for the test suite.

Everything here is deliberately separate from the library's own
algorithms: brute-force enumeration, chord scans, and blob/notch polygon
builders used to cross-check the constructive machinery.
"""

from __future__ import annotations

import random
from itertools import combinations

from misr.geom_core import (
    Point,
    Rect,
    RectPolygon,
    rects_intersect,
)
from misr.instance import Instance


# -- brute force MIS -------------------------------------------------------------


def brute_force_mis(inst: Instance) -> tuple[int, tuple[int, ...]]:
    """Exhaustive maximum independent set; lexicographically smallest among
    the maximum ones."""
    n = inst.n
    best = (0, ())
    for size in range(n, 0, -1):
        found = None
        for combo in combinations(range(n), size):
            ok = all(
                not rects_intersect(inst.rects[a], inst.rects[b])
                for a, b in combinations(combo, 2)
            )
            if ok:
                found = combo
                break
        if found is not None:
            best = (size, found)
            break
    return best


# -- brute force horizontal convexity ----------------------------------------------


def brute_force_hconvex(poly: RectPolygon) -> bool:
    """Check every horizontal chord on the doubled grid: if two sampled
    points lie inside at the same height, everything between must too."""
    x0, y0, x1, y1 = poly.bbox()
    for Y in range(2 * y0, 2 * y1 + 1):
        row = [
            X for X in range(2 * x0, 2 * x1 + 1) if poly.contains_doubled(X, Y)
        ]
        if row and row[-1] - row[0] + 1 != len(row):
            return False
    return True


# -- polygon generators --------------------------------------------------------------


def blob_polygon(rng: random.Random, grid: int = 8, cells: int = 14) -> RectPolygon:
    """Random simple rectilinear polygon: a connected, hole-free union of
    unit cells traced into a vertex loop."""
    start = (rng.randrange(grid), rng.randrange(grid))
    blob = {start}
    while len(blob) < cells:
        base = rng.choice(sorted(blob))
        dx, dy = rng.choice(((1, 0), (-1, 0), (0, 1), (0, -1)))
        c = (base[0] + dx, base[1] + dy)
        if 0 <= c[0] < grid and 0 <= c[1] < grid:
            blob.add(c)
    # fill holes: cells not reachable from outside the bounding box
    outside = set()
    stack = [(-1, -1)]
    while stack:
        c = stack.pop()
        if c in outside or c in blob:
            continue
        if not (-1 <= c[0] <= grid and -1 <= c[1] <= grid):
            continue
        outside.add(c)
        stack.extend(
            (c[0] + dx, c[1] + dy)
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
        )
    for x in range(grid):
        for y in range(grid):
            if (x, y) not in blob and (x, y) not in outside:
                blob.add((x, y))
    return cells_to_polygon(blob)


def cells_to_polygon(blob: set[tuple[int, int]]) -> RectPolygon:
    """Trace the outer boundary of a connected hole-free cell set."""
    edges: dict[Point, list[Point]] = {}

    def add(a: Point, b: Point) -> None:
        edges.setdefault(a, []).append(b)

    for (x, y) in blob:
        if (x - 1, y) not in blob:
            add(Point(x, y), Point(x, y + 1))
        if (x + 1, y) not in blob:
            add(Point(x + 1, y + 1), Point(x + 1, y))
        if (x, y - 1) not in blob:
            add(Point(x + 1, y), Point(x, y))
        if (x, y + 1) not in blob:
            add(Point(x, y + 1), Point(x + 1, y + 1))
    start = min(edges)
    loop = [start]
    cur = start
    prev_dir = None
    turn_order = {
        (0, 1): [(1, 0), (0, 1), (-1, 0), (0, -1)],
        (1, 0): [(0, -1), (1, 0), (0, 1), (-1, 0)],
        (0, -1): [(-1, 0), (0, -1), (1, 0), (0, 1)],
        (-1, 0): [(0, 1), (-1, 0), (0, -1), (1, 0)],
    }
    while True:
        cands = edges.get(cur, [])
        if not cands:
            raise ValueError("open boundary")
        if prev_dir is None or len(cands) == 1:
            nxt = sorted(cands)[0]
        else:
            nxt = None
            for d in turn_order[prev_dir]:
                for c in sorted(cands):
                    step = ((c.x > cur.x) - (c.x < cur.x), (c.y > cur.y) - (c.y < cur.y))
                    if step == d:
                        nxt = c
                        break
                if nxt:
                    break
        cands.remove(nxt)
        if not cands:
            del edges[cur]
        prev_dir = ((nxt.x > cur.x) - (nxt.x < cur.x), (nxt.y > cur.y) - (nxt.y < cur.y))
        cur = nxt
        if cur == start:
            break
        loop.append(cur)
    if edges:
        raise ValueError("cell set traced into multiple loops (pinched blob)")
    return RectPolygon(loop)


def notched_polygon(
    rng: random.Random,
    k: int,
    width: int = 30,
    height: int = 20,
    h_convex_only: bool = False,
) -> RectPolygon:
    """A polygon with exactly k edges: a rectangle with unit notches cut
    into its sides (each notch adds 4 edges, a corner notch adds 2).

    With h_convex_only, notches go only into the left and right sides,
    preserving horizontal convexity.
    """
    if k < 4 or k % 2:
        raise ValueError("k must be even and at least 4")
    quads, rem = divmod(k - 4, 4)
    corner = rem // 2  # 0 or 1
    sides = ["left", "right"] if h_convex_only else ["left", "right", "bottom", "top"]
    positions: dict[str, list[int]] = {s: [] for s in sides}
    spans = {"left": height, "right": height, "bottom": width, "top": width}
    needed = quads
    attempts = 0
    while needed > 0:
        attempts += 1
        if attempts > 10000:
            raise ValueError("could not place notches")
        s = rng.choice(sides)
        pos = rng.randrange(2, spans[s] - 3)
        if all(abs(pos - p) >= 3 for p in positions[s]):
            positions[s].append(pos)
            needed -= 1
    blob = {(x, y) for x in range(width) for y in range(height)}
    for s, poss in positions.items():
        for pos in poss:
            if s == "left":
                blob.discard((0, pos))
            elif s == "right":
                blob.discard((width - 1, pos))
            elif s == "bottom":
                blob.discard((pos, 0))
            else:
                blob.discard((pos, height - 1))
    if corner:
        blob.discard((0, 0))
    poly = cells_to_polygon(blob)
    if poly.num_edges != k:
        raise ValueError(f"got {poly.num_edges} edges, wanted {k}")
    return poly


def fill_with_maximal_rects(
    rng: random.Random, poly: RectPolygon, count: int, tries: int = 400
) -> list[Rect]:
    """Disjoint rects inside the polygon, each grown to a fixpoint against
    the polygon boundary and the other rects (left, right, bottom, top)."""
    x0, y0, x1, y1 = poly.bbox()
    rects: list[Rect] = []

    def fits(r: Rect) -> bool:
        return poly.contains_rect(r) and not any(
            rects_intersect(r, o) for o in rects
        )

    for _ in range(tries):
        if len(rects) >= count:
            break
        x = rng.randrange(x0, x1)
        y = rng.randrange(y0, y1)
        seed = Rect(x, y, x + 1, y + 1)
        if not fits(seed):
            continue
        rects.append(_grow_in_polygon(poly, rects, seed))
    return rects


def _grow_in_polygon(poly: RectPolygon, others: list[Rect], r: Rect) -> Rect:
    changed = True
    while changed:
        changed = False
        for direction in ("left", "right", "bottom", "top"):
            while True:
                if direction == "left":
                    cand = Rect(r.xl - 1, r.yb, r.xr, r.yt)
                elif direction == "right":
                    cand = Rect(r.xl, r.yb, r.xr + 1, r.yt)
                elif direction == "bottom":
                    cand = Rect(r.xl, r.yb - 1, r.xr, r.yt)
                else:
                    cand = Rect(r.xl, r.yb, r.xr, r.yt + 1)
                if poly.contains_rect(cand) and not any(
                    rects_intersect(cand, o) for o in others
                ):
                    r = cand
                    changed = True
                else:
                    break
    return r


# -- exhaustive cut-language value (tiny instances) -----------------------------------


def naive_dp_value(inst: Instance, k: int, budget: int) -> int:
    """Value-only recursion over the same declared cut language, without
    the solver's tie-breaking, pruning, or early exits; cross-checks that
    those optimizations never change the computed value."""
    from misr.dp_solver import (
        _CellGeometry,
        _enumerate_walks,
        canon_loop,
        containment_prune,
        surgery,
    )
    from misr.geom_core import Point as P

    pruned = containment_prune(inst.rects)
    rects = [(i, inst.rects[i]) for i in pruned]
    gxs = sorted({c for _i, r in rects for c in (r.xl, r.xr)} | {0, inst.side})
    gys = sorted({c for _i, r in rects for c in (r.yb, r.yt)} | {0, inst.side})
    root = canon_loop([(0, 0), (0, inst.side), (inst.side, inst.side), (inst.side, 0)])
    memo: dict = {}

    def solve(loop) -> int:
        if loop in memo:
            return memo[loop]
        poly = RectPolygon([P(x, y) for x, y in loop])
        inside = [i for i, r in rects if poly.contains_rect(r)]
        if len(inside) <= 1:
            memo[loop] = len(inside)
            return len(inside)
        xs = [x for x in gxs if min(p[0] for p in loop) <= x <= max(p[0] for p in loop)]
        ys = [y for y in gys if min(p[1] for p in loop) <= y <= max(p[1] for p in loop)]
        geom = _CellGeometry(loop, xs, ys)
        best = 1
        b = 1 if k == 4 else budget
        for walk in _enumerate_walks(geom, b):
            try:
                parts = surgery(loop, walk)
            except Exception:
                continue
            if any(len(p) > k for p in parts):
                continue
            best = max(best, sum(solve(p) for p in parts))
        memo[loop] = best
        return best

    return solve(root)
