"""
Incremental Delaunay Engine
In-memory Delaunay triangulation of a site set plus the three symbolic
corners of K, built by Bowyer-Watson insertion in random order. Dead
triangles keep a pointer to the fan that replaced them, and this history
DAG answers point location in expected O(log m) steps. Cocircular ties are
broken by the perturbation rule of core_geometry.incircle_perturbed.
"""

import logging
from collections import deque
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from tools.core_geometry import (
    KPoint,
    SitePoint,
    homogeneous_circumcenter,
    incircle,
    incircle_perturbed,
    orient,
)
from tools.workspace_harness import (
    INDEX_WORDS,
    POINT_WORDS,
    DegenerateInput,
    UnmeteredBudget,
    WorkspaceBudget,
)

logger = logging.getLogger(__name__)

# three vertices, three neighbours, fan pointer, alive flag
TRIANGLE_WORDS = 8 * INDEX_WORDS
SITE_WORDS = POINT_WORDS + 2 * INDEX_WORDS

# slots of the K corners; counterclockwise order is K1, K3, K2
K_SLOTS = (0, 1, 2)


class DelaunayEngine:
    """
    Delaunay triangulation of K plus inserted sites

    Args:
        budget: Charged with sites, triangles and history
        reject_degenerate: Raise DegenerateInput on an exactly cocircular
            quadruple of finite sites instead of breaking the tie
    """

    def __init__(self, budget: Optional[WorkspaceBudget] = None,
                 reject_degenerate: bool = False):
        self.budget = budget if budget is not None else UnmeteredBudget()
        self.reject_degenerate = reject_degenerate
        self.points: List[SitePoint] = [KPoint.K1, KPoint.K2, KPoint.K3]
        self.ids: List[int] = [KPoint.K1.site_id, KPoint.K2.site_id, KPoint.K3.site_id]
        self.slot_of: Dict[int, int] = {sid: slot for slot, sid in enumerate(self.ids)}
        self.verts: List[Tuple[int, int, int]] = []
        self.nbrs: List[List[Optional[int]]] = []
        self.alive: List[bool] = []
        self.fan_of: List[Optional[int]] = []
        self.fans: List[List[int]] = []
        self.vertex_tri: List[Optional[int]] = [None, None, None]
        self._grant = self.budget.alloc(3 * SITE_WORDS, "delaunay sites")
        self._new_triangle((0, 2, 1), [None, None, None])

    # -- construction ----------------------------------------------------

    @classmethod
    def build(cls, sites: Iterable[Tuple[int, SitePoint]], rng=None,
              budget: Optional[WorkspaceBudget] = None,
              reject_degenerate: bool = False) -> "DelaunayEngine":
        """Insert (site id, point) pairs, shuffled with `rng` when given."""
        engine = cls(budget, reject_degenerate)
        items = list(sites)
        if rng is not None and len(items) > 1:
            order = rng.generator.permutation(len(items))
            items = [items[int(i)] for i in order]
        for site_id, point in items:
            engine.insert(site_id, point)
        return engine

    def _new_triangle(self, verts: Tuple[int, int, int], nbrs: List[Optional[int]]) -> int:
        t = len(self.verts)
        self.verts.append(verts)
        self.nbrs.append(nbrs)
        self.alive.append(True)
        self.fan_of.append(None)
        self._grant.grow(TRIANGLE_WORDS)
        for v in verts:
            self.vertex_tri[v] = t
        return t

    def insert(self, site_id: int, point: SitePoint) -> int:
        """Add a finite site; returns its slot."""
        if site_id in self.slot_of:
            raise ValueError(f"site {site_id} inserted twice")
        slot = len(self.points)
        self.points.append(point)
        self.ids.append(site_id)
        self.slot_of[site_id] = slot
        self.vertex_tri.append(None)
        self._grant.grow(SITE_WORDS)

        start = self.locate_leaf(point)
        cavity = self._flood(start, slot)
        cavity_set = set(cavity)

        # boundary edges (a, b) counterclockwise, with the outside neighbour
        boundary = []
        for t in cavity:
            a, b, c = self.verts[t]
            for i, (u, v) in enumerate(((b, c), (c, a), (a, b))):
                n = self.nbrs[t][i]
                if n is None or n not in cavity_set:
                    boundary.append((u, v, n))

        fan_index = len(self.fans)
        fan: List[int] = []
        edge_owner: Dict[Tuple[int, int], int] = {}
        for u, v, outside in boundary:
            t = self._new_triangle((u, v, slot), [None, None, outside])
            fan.append(t)
            if outside is not None:
                self._replace_neighbor(outside, u, v, t)
            edge_owner[(v, slot)] = t
            edge_owner[(slot, u)] = t
        for t in fan:
            u, v, _ = self.verts[t]
            # neighbour opposite u shares edge (v, slot); opposite v shares (slot, u)
            self.nbrs[t][0] = edge_owner[(slot, v)]
            self.nbrs[t][1] = edge_owner[(u, slot)]
        for t in cavity:
            self.alive[t] = False
            self.fan_of[t] = fan_index
        self.fans.append(fan)
        self._grant.grow(INDEX_WORDS * len(fan))
        for t in fan:
            for w in self.verts[t]:
                self.vertex_tri[w] = t
        return slot

    def _replace_neighbor(self, t: int, u: int, v: int, new: int) -> None:
        a, b, c = self.verts[t]
        for i, (x, y) in enumerate(((b, c), (c, a), (a, b))):
            if {x, y} == {u, v}:
                self.nbrs[t][i] = new
                return
        raise RuntimeError("neighbour edge not found")

    def _flood(self, start: int, slot: int) -> List[int]:
        if not self.slot_in_circle(start, slot):
            raise RuntimeError("containing triangle is not in conflict")
        seen = {start}
        queue = deque([start])
        cavity = []
        while queue:
            t = queue.popleft()
            cavity.append(t)
            for n in self.nbrs[t]:
                if n is not None and n not in seen:
                    seen.add(n)
                    if self.slot_in_circle(n, slot):
                        queue.append(n)
        return cavity

    # -- predicates ------------------------------------------------------

    def triangle_points(self, t: int) -> Tuple[SitePoint, SitePoint, SitePoint]:
        a, b, c = self.verts[t]
        return self.points[a], self.points[b], self.points[c]

    def triangle_ids(self, t: int) -> Tuple[int, int, int]:
        a, b, c = self.verts[t]
        return self.ids[a], self.ids[b], self.ids[c]

    def in_circle(self, t: int, point: SitePoint, site_id: int) -> bool:
        """Strict conflict of a point with the circumcircle of triangle t."""
        a, b, c = self.verts[t]
        ids = (self.ids[a], self.ids[b], self.ids[c], site_id)
        if site_id in ids[:3]:
            return False
        pa, pb, pc = self.points[a], self.points[b], self.points[c]
        if self.reject_degenerate and all(sid >= 0 for sid in ids):
            if incircle(pa, pb, pc, point) == 0:
                raise DegenerateInput(f"cocircular sites {sorted(ids)}")
        return incircle_perturbed(pa, pb, pc, point, ids) > 0

    def slot_in_circle(self, t: int, slot: int) -> bool:
        return self.in_circle(t, self.points[slot], self.ids[slot])

    def contains(self, t: int, point: SitePoint) -> bool:
        pa, pb, pc = self.triangle_points(t)
        return (orient(pa, pb, point) >= 0 and orient(pb, pc, point) >= 0
                and orient(pc, pa, point) >= 0)

    # -- queries ---------------------------------------------------------

    def locate_leaf(self, point: SitePoint) -> int:
        """An alive triangle containing the point, found through the history."""
        t = 0
        while not self.alive[t]:
            for child in self.fans[self.fan_of[t]]:
                if self.contains(child, point):
                    t = child
                    break
            else:
                raise RuntimeError(f"history walk lost {point}")
        return t

    def conflicts(self, point: SitePoint, site_id: int) -> List[int]:
        """Alive triangles whose circumcircle strictly contains the point."""
        start = self.locate_leaf(point)
        if not self.in_circle(start, point, site_id):
            start = next((n for n in self.nbrs[start]
                          if n is not None and self.in_circle(n, point, site_id)), None)
            if start is None:
                return []
        seen = {start}
        queue = deque([start])
        found = []
        while queue:
            t = queue.popleft()
            found.append(t)
            for n in self.nbrs[t]:
                if n is not None and n not in seen:
                    seen.add(n)
                    if self.in_circle(n, point, site_id):
                        queue.append(n)
        return found

    def triangles(self) -> Iterator[int]:
        return (t for t in range(len(self.verts)) if self.alive[t])

    def is_finite(self, t: int) -> bool:
        return all(v >= 3 for v in self.verts[t])

    def finite_triangles(self) -> Iterator[int]:
        return (t for t in self.triangles() if self.is_finite(t))

    def incident(self, slot: int) -> List[int]:
        """Alive triangles around a finite site, counterclockwise."""
        start = self.vertex_tri[slot]
        if start is None or not self.alive[start]:
            raise RuntimeError(f"no triangle recorded for slot {slot}")
        ring = []
        t = start
        while True:
            ring.append(t)
            i = self.verts[t].index(slot)
            t = self.nbrs[t][(i + 1) % 3]
            if t is None:
                raise RuntimeError("incident walk reached the outer boundary")
            if t == start:
                return ring

    def circumcenter(self, t: int):
        """Homogeneous (X, Y, W) center of triangle t; KPoly entries when K is involved."""
        return homogeneous_circumcenter(*self.triangle_points(t))

    def site_slots(self) -> range:
        return range(3, len(self.points))

    def edges(self) -> Iterator[Tuple[int, int]]:
        """Finite edges as ascending site-id pairs, each once."""
        for t in self.triangles():
            ids = self.triangle_ids(t)
            for i in range(3):
                a, b = ids[i], ids[(i + 1) % 3]
                if a < 0 or b < 0:
                    continue
                n = self.nbrs[t][(i + 2) % 3]
                if n is None or t < n or not self.alive[n]:
                    yield (a, b) if a < b else (b, a)

    def release(self) -> None:
        self._grant.release()
