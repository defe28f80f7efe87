"""
Oracles
Unconstrained reference implementations: Delaunay/Voronoi through the
in-memory engine, a brute-force Delaunay guard, the monotone-chain hull,
stack-based nearest smaller neighbours and brute-force conflict sets. They
ignore the workspace model and exist to define ground truth for tests,
calibration and `cwgeom.py verify`.
"""

import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import List, Sequence, Set, Tuple

import numpy as np

from tools.core_geometry import (
    Circumcenter,
    CollinearSites,
    KPoint,
    Point,
    circumcenter,
    incircle_perturbed,
    orient,
)
from tools.delaunay import DelaunayEngine
from tools.sampler import Rng

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]

_K_BY_ID = {k.site_id: k for k in KPoint}


@dataclass
class OracleDiagram:
    """
    Delaunay triangulation of S with its dual Voronoi vertices

    Attributes:
        triangles: Counterclockwise index triples
        centers: Exact circumcenter of each triangle, same order
        edges: Delaunay edges as ascending index pairs
        hull: Clockwise hull cycle from the leftmost point, boundary points included
    """

    triangles: List[Tuple[int, int, int]]
    centers: List[Circumcenter]
    edges: Set[Edge]
    hull: List[int]

    def vertex_multiset(self) -> Counter:
        """(a, b, c, cx, cy) keys with ascending sites, as the vertex sink records them."""
        return Counter((*sorted(tri), center.cx, center.cy)
                       for tri, center in zip(self.triangles, self.centers))


def _require_general(points: Sequence[Point]) -> None:
    if len(points) < 3:
        raise CollinearSites(f"need at least 3 points, got {len(points)}")
    a, b = points[0], points[1]
    if all(orient(a, b, p) == 0 for p in points[2:]):
        raise CollinearSites("all points are collinear")


def oracle_delaunay(points: Sequence[Point]) -> OracleDiagram:
    """
    Exact Delaunay triangulation under the shared cocircular tie rule

    Raises:
        CollinearSites: fewer than 3 points or all collinear
    """
    _require_general(points)
    engine = DelaunayEngine.build(enumerate(points), Rng(0))
    triangles = [engine.triangle_ids(t) for t in engine.finite_triangles()]
    centers = [circumcenter(points[a], points[b], points[c]) for a, b, c in triangles]
    return OracleDiagram(triangles, centers, set(engine.edges()),
                         convex_hull_indices(points, keep_collinear=True))


def brute_force_delaunay(points: Sequence[Point]) -> Set[Tuple[int, int, int]]:
    """All triples whose perturbed circumcircle is empty; O(n^4), small n only."""
    found = set()
    for i, j, k in itertools.combinations(range(len(points)), 3):
        turn = orient(points[i], points[j], points[k])
        if turn == 0:
            continue
        a, b = (j, k) if turn > 0 else (k, j)
        if all(incircle_perturbed(points[i], points[a], points[b], points[l], (i, a, b, l)) <= 0
               for l in range(len(points)) if l not in (i, j, k)):
            found.add((i, j, k))
    return found


def convex_hull_indices(points: Sequence[Point], keep_collinear: bool = False) -> List[int]:
    """
    Monotone-chain hull, clockwise from the lexicographically smallest point

    All-collinear input gives its two extreme points.
    """
    order = sorted(range(len(points)), key=lambda i: points[i])
    if len(order) < 3:
        return order
    if all(orient(points[order[0]], points[order[-1]], points[i]) == 0 for i in order):
        return [order[0], order[-1]]

    def chain(indices):
        hull: List[int] = []
        for i in indices:
            while len(hull) >= 2:
                turn = orient(points[hull[-2]], points[hull[-1]], points[i])
                if turn > 0 or (turn == 0 and not keep_collinear):
                    hull.pop()
                else:
                    break
            hull.append(i)
        return hull

    upper = chain(order)
    lower = chain(reversed(order))
    return upper[:-1] + lower[:-1]


def hull_edges_oracle(points: Sequence[Point], keep_collinear: bool = True) -> List[Edge]:
    cycle = convex_hull_indices(points, keep_collinear)
    if len(cycle) == 2:
        return [(cycle[0], cycle[1]), (cycle[1], cycle[0])]
    return [(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))]


def hull_size(points: Sequence[Point], keep_collinear: bool = True) -> int:
    return len(convex_hull_indices(points, keep_collinear))


def expected_edge_count(points: Sequence[Point]) -> int:
    """3n - 3 - h for a triangulation, h counting every boundary point."""
    return 3 * len(points) - 3 - hull_size(points)


def oracle_nsr_nsl(heights: Sequence) -> Tuple[Set[Edge], Set[Edge]]:
    """
    Nearest strictly smaller neighbours by the linear stack pass

    Returns:
        (NSR pairs (i, j) with j the nearest smaller to the right of i,
         NSL pairs (j, i) with j the nearest smaller to the left of i), 1-based
    """
    if not heights:
        raise ValueError("heights must be nonempty")
    nsr: Set[Edge] = set()
    stack: List[int] = []
    for j, h in enumerate(heights):
        while stack and heights[stack[-1]] > h:
            nsr.add((stack.pop() + 1, j + 1))
        stack.append(j)
    nsl: Set[Edge] = set()
    stack = []
    for j in range(len(heights) - 1, -1, -1):
        h = heights[j]
        while stack and heights[stack[-1]] > h:
            nsl.add((j + 1, stack.pop() + 1))
        stack.append(j)
    return nsr, nsl


def _site(points: Sequence[Point], site_id: int):
    return _K_BY_ID[site_id] if site_id < 0 else points[site_id]


def oracle_conflicts(points: Sequence[Point], sites: Tuple[int, int, int]) -> Tuple[List[int], int]:
    """
    Brute-force conflict list of the vertex defined by three site ids

    Negative ids stand for the corners of K. Membership is the strict
    perturbed incircle test used by the constrained counters.

    Returns:
        (B_v as ascending indices, b_v)
    """
    a, b, c = sites
    pa, pb, pc = (_site(points, i) for i in sites)
    if orient(pa, pb, pc) < 0:
        b, c, pb, pc = c, b, pc, pb
    members = [l for l, p in enumerate(points)
               if l not in sites and incircle_perturbed(pa, pb, pc, p, (a, b, c, l)) > 0]
    return members, len(members)


def segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool:
    """
    True when segments ab and cd share a point other than a common endpoint
    """
    shared = {a, b} & {c, d}
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 == o2 == 0:
        # collinear: overlap beyond a shared endpoint
        lo1, hi1 = sorted((a, b))
        lo2, hi2 = sorted((c, d))
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        return lo < hi or (lo == hi and lo not in shared)
    if shared:
        return False
    return o1 * o2 <= 0 and o3 * o4 <= 0


@dataclass
class TriangulationCheck:
    """Outcome of validate_triangulation; `ok` when every list is empty."""

    edge_count: int
    expected_count: int
    bad_edges: List[Edge] = field(default_factory=list)
    duplicates: List[Edge] = field(default_factory=list)
    crossings: List[Tuple[Edge, Edge]] = field(default_factory=list)
    missing_hull_edges: List[Edge] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.edge_count == self.expected_count and not self.bad_edges
                and not self.duplicates and not self.crossings
                and not self.missing_hull_edges)


def validate_triangulation(points: Sequence[Point], edges: Sequence[Edge]) -> TriangulationCheck:
    """
    Check that an edge list triangulates the point set

    Counts 3n-3-h, looks for duplicates and out-of-range pairs, tests all
    pairs of edges whose bounding boxes meet for crossings, and checks that
    every hull edge (split at boundary points) is present.
    """
    n = len(points)
    seen: Set[Edge] = set()
    check = TriangulationCheck(len(edges), expected_edge_count(points))
    for i, j in edges:
        key = (min(i, j), max(i, j))
        if not (0 <= i < n and 0 <= j < n) or i == j:
            check.bad_edges.append((i, j))
        elif key in seen:
            check.duplicates.append(key)
        else:
            seen.add(key)
    unique = sorted(seen)
    if unique:
        ends = np.array([(points[i][0], points[i][1], points[j][0], points[j][1])
                         for i, j in unique], dtype=np.int64)
        xlo = np.minimum(ends[:, 0], ends[:, 2])
        xhi = np.maximum(ends[:, 0], ends[:, 2])
        ylo = np.minimum(ends[:, 1], ends[:, 3])
        yhi = np.maximum(ends[:, 1], ends[:, 3])
        for k, (i, j) in enumerate(unique):
            meets = ((xlo[k + 1:] <= xhi[k]) & (xhi[k + 1:] >= xlo[k])
                     & (ylo[k + 1:] <= yhi[k]) & (yhi[k + 1:] >= ylo[k]))
            for m in np.nonzero(meets)[0]:
                u, v = unique[k + 1 + int(m)]
                if segments_cross(points[i], points[j], points[u], points[v]):
                    check.crossings.append(((i, j), (u, v)))
    for p, q in hull_edges_oracle(points):
        if (min(p, q), max(p, q)) not in seen:
            check.missing_hull_edges.append((p, q))
    if not check.ok:
        logger.debug("triangulation check failed: %s", check)
    return check
