"""Instance model: bit-exact preprocessing, deterministic generators,
JSON serialization, and the branch-and-bound optimum oracle that grounds
every certification run.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field
from typing import Optional

from .geom_core import GeometryError, Rect, rects_intersect

DEFAULT_ORACLE_CAP = 16
ORACLE_CAP_ENV = "MISR_ORACLE_CAP"
COORD_LIMIT = 2**62  # raw inputs must stay well inside 64-bit signed range


class InstanceError(ValueError):
    """Malformed instance or solution."""


class OracleCapError(InstanceError):
    """exact_mis called beyond its configured size cap."""


@dataclass(frozen=True)
class Instance:
    rects: tuple[Rect, ...]
    side: int  # bounding square S = [0, side]^2 (side = 2n-1 after preprocessing)

    @property
    def n(self) -> int:
        return len(self.rects)

    def bounding(self) -> Rect:
        return Rect(0, 0, self.side, self.side)


@dataclass(frozen=True)
class Solution:
    chosen: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.chosen)


def validate_solution(inst: Instance, sol: Solution) -> None:
    ids = sorted(sol.chosen)
    if len(set(ids)) != len(ids):
        raise InstanceError("solution repeats an index")
    for i in ids:
        if not 0 <= i < inst.n:
            raise InstanceError(f"solution index {i} out of range")
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            if rects_intersect(inst.rects[ids[a]], inst.rects[ids[b]]):
                raise InstanceError(
                    f"solution rectangles {ids[a]} and {ids[b]} overlap"
                )


def preprocess(rects: list[Rect]) -> Instance:
    """Order-preserving compression of x- and y-coordinates onto
    {0, ..., 2n-1}; the intersection graph is unchanged."""
    n = len(rects)
    if n == 0:
        raise InstanceError("empty instance")
    for r in rects:
        for c in (r.xl, r.xr, r.yb, r.yt):
            if abs(c) >= COORD_LIMIT:
                raise InstanceError(f"coordinate overflow: {c}")
    xs = sorted({c for r in rects for c in (r.xl, r.xr)})
    ys = sorted({c for r in rects for c in (r.yb, r.yt)})
    xr = {c: i for i, c in enumerate(xs)}
    yr = {c: i for i, c in enumerate(ys)}
    out = tuple(Rect(xr[r.xl], yr[r.yb], xr[r.xr], yr[r.yt]) for r in rects)
    return Instance(out, side=2 * n - 1)


def intersection_matrix(rects: tuple[Rect, ...]) -> list[list[bool]]:
    n = len(rects)
    return [
        [i != j and rects_intersect(rects[i], rects[j]) for j in range(n)]
        for i in range(n)
    ]


def _oracle_cap(cap: Optional[int]) -> int:
    if cap is not None:
        return cap
    env = os.environ.get(ORACLE_CAP_ENV)
    return int(env) if env else DEFAULT_ORACLE_CAP


def exact_mis(inst: Instance, cap: Optional[int] = None) -> Solution:
    """Maximum independent set by branch and bound on the intersection
    graph (greedy lower bound, clique-cover upper bound); among maximum
    sets the lexicographically smallest index set is returned.
    """
    n = inst.n
    if n > _oracle_cap(cap):
        raise OracleCapError(f"oracle cap exceeded: n={n}")
    adj = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rects_intersect(inst.rects[i], inst.rects[j]):
                adj[i].add(j)
                adj[j].add(i)

    def greedy(cand: list[int]) -> list[int]:
        picked = []
        banned: set[int] = set()
        for v in sorted(cand, key=lambda v: (len(adj[v] & set(cand)), v)):
            if v not in banned:
                picked.append(v)
                banned |= adj[v]
        return picked

    def clique_cover_bound(cand: list[int]) -> int:
        remaining = set(cand)
        cliques = 0
        while remaining:
            v = min(remaining, key=lambda u: (len(remaining - adj[u] - {u}), u))
            clique = {v}
            for u in sorted(remaining - {v}):
                if all(u in adj[w] for w in clique):
                    clique.add(u)
            remaining -= clique
            cliques += 1
        return cliques

    best: list[int] = sorted(greedy(list(range(n))))

    def search(cand: list[int], chosen: list[int]) -> None:
        nonlocal best
        if not cand:
            if len(chosen) > len(best) or (
                len(chosen) == len(best) and chosen < best
            ):
                best = list(chosen)
            return
        # Strict bound only: ties must stay reachable so the lexicographic
        # rule is exact.
        if len(chosen) + clique_cover_bound(cand) < len(best):
            return
        v = cand[0]
        search([u for u in cand[1:] if u not in adj[v]], chosen + [v])
        search(cand[1:], chosen)

    search(list(range(n)), [])
    sol = Solution(tuple(sorted(best)))
    validate_solution(inst, sol)
    return sol


GENERATOR_KINDS = ("uniform_random", "nested_grid", "windmill", "stacked_strips")

# Interlocking pinwheel: four pairwise-disjoint arms, every axis-parallel
# chord of the bounding square cuts one of them, plus a center rectangle
# overlapping all four arms.  Optimum is the four arms.
_WINDMILL_CELL = [
    Rect(0, 3, 3, 4),  # top arm
    Rect(3, 2, 4, 5),  # right arm
    Rect(2, 1, 5, 2),  # bottom arm
    Rect(1, 0, 2, 3),  # left arm
    Rect(1, 1, 4, 4),  # hub, overlaps all arms
]
_WINDMILL_SPAN = 5


def generate(kind: str, n: int, seed: int) -> Instance:
    """Deterministic instance families; output is always preprocessed."""
    if n < 1:
        raise InstanceError("n must be >= 1")
    if kind == "uniform_random":
        rng = random.Random(("uniform_random", n, seed).__repr__())
        span = 2 * n
        rects = []
        for _ in range(n):
            x1, x2 = sorted(rng.sample(range(span + 1), 2))
            y1, y2 = sorted(rng.sample(range(span + 1), 2))
            rects.append(Rect(x1, y1, x2, y2))
        return preprocess(rects)
    if kind == "nested_grid":
        rng = random.Random(("nested_grid", n, seed).__repr__())
        span = 4 * n
        rects = []
        for i in range(n):
            if i % 2 == 0:  # wide, flat; tends to nest tall neighbors
                w = rng.randrange(span // 2, span)
                h = rng.randrange(1, 3)
            else:  # tall, narrow
                w = rng.randrange(1, 3)
                h = rng.randrange(span // 2, span)
            x = rng.randrange(0, span - w + 1)
            y = rng.randrange(0, span - h + 1)
            rects.append(Rect(x, y, x + w, y + h))
        return preprocess(rects)
    if kind == "windmill":
        rects = []
        copies = (n + len(_WINDMILL_CELL) - 1) // len(_WINDMILL_CELL)
        for c in range(copies):
            dx = c * (_WINDMILL_SPAN + 1)
            for r in _WINDMILL_CELL:
                rects.append(Rect(r.xl + dx, r.yb, r.xr + dx, r.yt))
        return preprocess(rects[:n])
    if kind == "stacked_strips":
        rects = [Rect(0, 2 * i, 2 * n, 2 * i + 1) for i in range(n)]
        return preprocess(rects)
    raise InstanceError(f"unknown generator kind {kind!r}")


# -- JSON interchange -------------------------------------------------------

_RECT_FIELDS = ("xl", "yb", "xr", "yt")


def instance_to_json(inst: Instance) -> dict:
    return {
        "n": inst.n,
        "rects": [
            {"xl": r.xl, "yb": r.yb, "xr": r.xr, "yt": r.yt} for r in inst.rects
        ],
    }


def instance_from_json(doc: dict) -> Instance:
    if not isinstance(doc, dict) or "rects" not in doc:
        raise InstanceError("instance document missing 'rects'")
    rects = []
    for entry in doc["rects"]:
        if not isinstance(entry, dict) or any(f not in entry for f in _RECT_FIELDS):
            raise InstanceError(f"malformed rect entry: {entry!r}")
        vals = [entry[f] for f in _RECT_FIELDS]
        if any(not isinstance(v, int) or isinstance(v, bool) for v in vals):
            raise InstanceError(f"non-integer rect fields: {entry!r}")
        if any(abs(v) >= COORD_LIMIT for v in vals):
            raise InstanceError(f"coordinate overflow: {entry!r}")
        try:
            rects.append(Rect(*vals))
        except GeometryError as exc:
            raise InstanceError(str(exc)) from None
    if "n" in doc and doc["n"] != len(rects):
        raise InstanceError("declared n does not match rect count")
    if not rects:
        raise InstanceError("empty instance")
    inst = Instance(tuple(rects), side=2 * len(rects) - 1)
    for r in rects:
        if not (0 <= r.xl and r.xr <= inst.side and 0 <= r.yb and r.yt <= inst.side):
            return preprocess(list(rects))
    return inst


def solution_to_json(sol: Solution) -> dict:
    return {"chosen": sorted(sol.chosen), "size": sol.size}


def solution_from_json(doc: dict, inst: Optional[Instance] = None) -> Solution:
    if not isinstance(doc, dict) or "chosen" not in doc:
        raise InstanceError("solution document missing 'chosen'")
    chosen = doc["chosen"]
    if not isinstance(chosen, list) or any(
        not isinstance(i, int) or isinstance(i, bool) for i in chosen
    ):
        raise InstanceError("malformed 'chosen' list")
    if "size" in doc and doc["size"] != len(chosen):
        raise InstanceError("declared size does not match chosen count")
    sol = Solution(tuple(sorted(chosen)))
    if inst is not None:
        validate_solution(inst, sol)
    return sol


def write_json(path: str, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_json(path: str) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"malformed JSON: {exc}") from None
