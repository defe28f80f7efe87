"""
Constrained-Workspace Voronoi Diagram
Randomized s-workspace computation of the Voronoi vertices of a read-only
point set by two levels of random sampling.

1. A sample R of s sites is drawn and VD(R + K) is built, K being the
   symbolic far triangle. Every input point counts the sample vertices
   whose conflict circle contains it; the sample is redrawn until the
   conflict mass and the excess stay under their thresholds.
2. Vertices with large excess get secondary samples R_v, amplified over a
   few rounds until each R_v is good.
3. On R_2 = R + all R_v, each triangle of the triangulated bounded cells
   gets its conflict set, and the Voronoi vertices of S inside the
   triangle are those of the small diagram of that conflict set.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from tools.core_geometry import (
    Circumcenter,
    Point,
    circumcenter,
    homogeneous_circumcenter,
    incircle,
    orient,
    orient_homogeneous,
    squared_distance,
)
from tools.cw_hull import HullCursor
from tools.delaunay import DelaunayEngine
from tools.sampler import Rng, SampleSpec, TooManySamples, sample_distinct, sample_many
from tools.workspace_harness import (
    INDEX_WORDS,
    POINT_WORDS,
    CwGeomError,
    DegenerateInput,
    OutputSink,
    ReadOnlyArray,
    RetryLimitExceeded,
    WorkspaceBudget,
)
from utils.config import RunConfig
from utils.helpers import ceil_div

logger = logging.getLogger(__name__)

# site triple, counter, excess, status
VERTEX_WORDS = 3 * INDEX_WORDS + 4 * INDEX_WORDS
# id, site, three corners, conflict size
CELL_WORDS = 6 * INDEX_WORDS
ITEM_WORDS = INDEX_WORDS + POINT_WORDS

UNVERIFIED = "unverified"
GOOD = "good"
BAD = "bad"

EMIT_VERTICES = "vertices"
EMIT_DELAUNAY = "delaunay"


class RoundCapExceeded(RetryLimitExceeded):
    """Good-vertex amplification did not finish within the round cap."""


class ConflictSetOverflow(CwGeomError):
    """A triangle's conflict set outgrew its bound; the run restarts."""


class OutsideBoundedCells(CwGeomError):
    """A query point fell outside every bounded cell."""


@dataclass
class VoronoiVertex:
    """
    Vertex of a sample diagram: a Delaunay triangle of the sample plus K

    Attributes:
        triangle: Triangle id in the sample's Delaunay engine
        sites: Defining site ids (negative for K corners)
        b: Conflict counter
        excess: b * s / n, exact
        sample: Input indices of R_v once chosen
    """

    triangle: int
    sites: Tuple[int, int, int]
    b: int = 0
    excess: Fraction = Fraction(0)
    sample: Optional[List[int]] = None
    status: str = UNVERIFIED

    @property
    def finite(self) -> bool:
        return all(site >= 0 for site in self.sites)


@dataclass
class TriangleCell:
    """Fan triangle of the bounded cell of `site`; corners are Voronoi vertices."""

    id: int
    site: int
    corners: Tuple[int, int, int]
    centers: Tuple[Any, Any, Any]
    conflict_size: int = 0


@dataclass
class VoronoiStats:
    """Counters of one Voronoi run, used by the audit and calibration."""

    attempts: int = 0
    restarts_mass: int = 0
    restarts_excess: int = 0
    restarts_samples: int = 0
    restarts_rounds: int = 0
    restarts_overflow: int = 0
    rounds: int = 0
    conflict_mass: int = 0
    excess_mass: float = 0.0
    sample_size: int = 0
    max_conflict_set: int = 0
    total_conflict_set: int = 0
    vertices_emitted: int = 0
    edges_emitted: int = 0

    @property
    def restarts(self) -> int:
        return (self.restarts_mass + self.restarts_excess + self.restarts_samples
                + self.restarts_rounds + self.restarts_overflow)


def _homogeneous(x) -> Tuple[int, int, int]:
    if isinstance(x, Circumcenter):
        cx, cy = x.cx, x.cy
        return (cx.numerator * cy.denominator, cy.numerator * cx.denominator,
                cx.denominator * cy.denominator)
    return x[0], x[1], 1


def excess_term(excess: Fraction) -> float:
    """t log2 t for t >= 2, else 0."""
    if excess < 2:
        return 0.0
    t = float(excess)
    return t * math.log2(t)


class SampleDiagram:
    """
    VD(sample + K) with its bounded cells cut into fan triangles

    Args:
        engine: Delaunay triangulation of the sample plus K
        n: Input size
        s: Workspace parameter
        budget: Charged with vertex records and cells
    """

    def __init__(self, engine: DelaunayEngine, n: int, s: int, budget: WorkspaceBudget):
        self.engine = engine
        self.n = n
        self.s = s
        self.budget = budget
        self.vertices: Dict[int, VoronoiVertex] = {}
        self.cells: List[TriangleCell] = []
        self.cells_of_site: Dict[int, List[int]] = {}
        self.cells_of_vertex: Dict[int, List[int]] = {}
        self._centers: Dict[int, Any] = {}
        self._grant = budget.alloc(INDEX_WORDS, "sample diagram")
        for t in engine.triangles():
            self.vertices[t] = VoronoiVertex(t, engine.triangle_ids(t))
        self._grant.grow(VERTEX_WORDS * len(self.vertices))
        self._build_cells()

    @classmethod
    def build(cls, items: Sequence[Tuple[int, Point]], n: int, s: int,
              budget: WorkspaceBudget, rng: Optional[Rng] = None,
              reject_degenerate: bool = False) -> "SampleDiagram":
        engine = DelaunayEngine.build(items, rng, budget, reject_degenerate)
        return cls(engine, n, s, budget)

    def center(self, t: int):
        if t not in self._centers:
            self._centers[t] = homogeneous_circumcenter(*self.engine.triangle_points(t))
        return self._centers[t]

    def _build_cells(self) -> None:
        engine = self.engine
        for slot in engine.site_slots():
            ring = engine.incident(slot)
            site = engine.ids[slot]
            root = ring[0]
            for j in range(1, len(ring) - 1):
                corners = (root, ring[j], ring[j + 1])
                centers = tuple(self.center(t) for t in corners)
                if orient_homogeneous(*centers) <= 0:
                    continue
                cell = TriangleCell(len(self.cells), site, corners, centers)
                self.cells.append(cell)
                self.cells_of_site.setdefault(site, []).append(cell.id)
                for t in corners:
                    self.cells_of_vertex.setdefault(t, []).append(cell.id)
        self._grant.grow(CELL_WORDS * len(self.cells))

    # -- location --------------------------------------------------------

    def _neighbors(self, slot: int) -> Set[int]:
        found = set()
        for t in self.engine.incident(slot):
            for v in self.engine.verts[t]:
                if v != slot and v >= 3:
                    found.add(v)
        return found

    def nearest_sites(self, x, start_slot: Optional[int] = None) -> List[int]:
        """Slots of all sample sites nearest to x (greedy walk, then ties)."""
        engine = self.engine
        if start_slot is None:
            leaf = engine.locate_leaf(Point(*x) if not isinstance(x, Circumcenter) else x)
            start_slot = next(v for v in engine.verts[leaf] if v >= 3)
        current = start_slot
        best = squared_distance(engine.points[current], x)
        improved = True
        while improved:
            improved = False
            for nb in self._neighbors(current):
                d = squared_distance(engine.points[nb], x)
                if d < best:
                    current, best, improved = nb, d, True
                    break
        nearest = {current}
        frontier = [current]
        while frontier:
            slot = frontier.pop()
            for nb in self._neighbors(slot):
                if nb not in nearest and squared_distance(engine.points[nb], x) == best:
                    nearest.add(nb)
                    frontier.append(nb)
        return sorted(nearest)

    def cell_contains(self, cell: TriangleCell, h) -> bool:
        a, b, c = cell.centers
        return (orient_homogeneous(a, b, h) >= 0 and orient_homogeneous(b, c, h) >= 0
                and orient_homogeneous(c, a, h) >= 0)

    def locate(self, x, hint_site: Optional[int] = None) -> TriangleCell:
        """
        Fan triangle containing x; on shared boundaries the smallest id wins

        Args:
            x: Point or Circumcenter
            hint_site: Site id to start the nearest-site walk from

        Raises:
            OutsideBoundedCells: no bounded cell contains x
        """
        start = self.engine.slot_of[hint_site] if hint_site is not None else None
        h = _homogeneous(x)
        best = None
        for slot in self.nearest_sites(x, start):
            for cid in self.cells_of_site.get(self.engine.ids[slot], ()):
                if (best is None or cid < best) and self.cell_contains(self.cells[cid], h):
                    best = cid
        if best is None:
            raise OutsideBoundedCells(f"{x} is outside every bounded cell")
        return self.cells[best]

    # -- conflicts -------------------------------------------------------

    def _closed_conflict(self, t: int, point: Point) -> bool:
        pa, pb, pc = self.engine.triangle_points(t)
        return incircle(pa, pb, pc, point) >= 0

    def conflict_vertices(self, point: Point, index: int, closed: bool = False) -> List[int]:
        """
        Vertices whose conflict circle contains the point

        Starts at a conflicting corner of the located cell and floods along
        diagram edges. `closed` also admits points on the circle.
        """
        engine = self.engine
        if closed:
            def test(t):
                return self._closed_conflict(t, point)
        else:
            def test(t):
                return engine.in_circle(t, point, index)
        cell = self.locate(point)
        seeds = [t for t in cell.corners if test(t)]
        if not seeds:
            # a point off the sample conflicts with some corner of its cell
            if index in engine.slot_of and not closed:
                return []
            raise OutsideBoundedCells(f"no corner of cell {cell.id} conflicts with {point}")
        seen = set(seeds)
        stack = list(seeds)
        found = []
        while stack:
            t = stack.pop()
            found.append(t)
            for nb in engine.nbrs[t]:
                if nb is not None and nb not in seen:
                    seen.add(nb)
                    if test(nb):
                        stack.append(nb)
        return found

    def conflict_cells(self, point: Point, index: int) -> Set[int]:
        """Cells whose conflict set holds the point (closed corner circles)."""
        cells = set()
        for t in self.conflict_vertices(point, index, closed=True):
            cells.update(self.cells_of_vertex.get(t, ()))
        return cells

    def charge(self, words: int) -> None:
        self._grant.grow(words)

    def release(self) -> None:
        self._grant.release()
        self.engine.release()


# -- phase 1 ---------------------------------------------------------------

def _fetch(array: ReadOnlyArray, positions: Iterable[int]) -> List[Tuple[int, Point]]:
    return [(pos, array[pos]) for pos in sorted(positions)]


def count_conflicts(diagram: SampleDiagram, array: ReadOnlyArray,
                    mass_limit: Optional[float] = None) -> bool:
    """
    One scan filling every vertex counter b_v

    Returns:
        False as soon as the total passes `mass_limit`
    """
    total = 0
    vertices = diagram.vertices
    for pos in range(len(array)):
        point = array[pos]
        for t in diagram.conflict_vertices(point, pos):
            vertices[t].b += 1
            total += 1
        if mass_limit is not None and total > mass_limit:
            return False
    n, s = diagram.n, diagram.s
    for v in vertices.values():
        v.excess = Fraction(v.b * s, n)
    return True


def measure_first_phase(array: ReadOnlyArray, s: int, rng: Rng,
                        budget: WorkspaceBudget) -> Tuple[int, float]:
    """Conflict mass and excess of one sample, without thresholds (calibration)."""
    n = len(array)
    picks = sample_distinct(n, min(s, n), rng, budget)
    diagram = SampleDiagram.build(_fetch(array, (i - 1 for i in picks)), n, s, budget, rng)
    try:
        count_conflicts(diagram, array)
        mass = sum(v.b for v in diagram.vertices.values())
        excess = sum(excess_term(v.excess) for v in diagram.vertices.values())
        return mass, excess
    finally:
        diagram.release()


def _check_restarts(stats: VoronoiStats, config: RunConfig, error=RetryLimitExceeded) -> None:
    if stats.restarts > config.max_restarts:
        raise error(f"gave up after {stats.restarts} restarts")


def first_phase_sample(array: ReadOnlyArray, s: int, config: RunConfig, rng: Rng,
                       budget: WorkspaceBudget, stats: Optional[VoronoiStats] = None,
                       reject_degenerate: bool = False) -> SampleDiagram:
    """
    Sample R, build VD(R + K) and count conflicts until both thresholds hold

    Raises:
        RetryLimitExceeded: more than config.max_restarts restarts
    """
    stats = stats if stats is not None else VoronoiStats()
    n = len(array)
    mass_limit = config.c_m * n
    excess_limit = config.c_t * s
    while True:
        stats.attempts += 1
        picks = sample_distinct(n, min(s, n), rng, budget)
        diagram = SampleDiagram.build(_fetch(array, (i - 1 for i in picks)), n, s, budget,
                                      rng, reject_degenerate)
        if not count_conflicts(diagram, array, mass_limit):
            logger.debug("conflict mass above %s, restarting", mass_limit)
            diagram.release()
            stats.restarts_mass += 1
            _check_restarts(stats, config)
            continue
        excess = sum(excess_term(v.excess) for v in diagram.vertices.values())
        if excess > excess_limit:
            logger.debug("excess %.1f above %s, restarting", excess, excess_limit)
            diagram.release()
            stats.restarts_excess += 1
            _check_restarts(stats, config)
            continue
        stats.conflict_mass = sum(v.b for v in diagram.vertices.values())
        stats.excess_mass = excess
        return diagram


# -- phase 2 ---------------------------------------------------------------

@dataclass
class _PendingVertex:
    vertex: VoronoiVertex
    count: int
    ranks: List[List[int]] = field(default_factory=list)
    sets: List[List[Tuple[int, Point]]] = field(default_factory=list)
    seen: int = 0

    @property
    def complete(self) -> bool:
        return self.count >= self.vertex.b


def _materialize(diagram: SampleDiagram, array: ReadOnlyArray,
                 pending: Dict[int, _PendingVertex]) -> None:
    """One scan turning the drawn ranks into points of B_v, in scan order."""
    cursors = {}
    for t, entry in pending.items():
        entry.seen = 0
        entry.sets = [[] for _ in entry.ranks]
        cursors[t] = [0] * len(entry.ranks)
    for pos in range(len(array)):
        point = array[pos]
        for t in diagram.conflict_vertices(point, pos):
            entry = pending.get(t)
            if entry is None:
                continue
            entry.seen += 1
            for j, ranks in enumerate(entry.ranks):
                c = cursors[t][j]
                if c < len(ranks) and ranks[c] == entry.seen:
                    entry.sets[j].append((pos, point))
                    cursors[t][j] = c + 1


def _choose_good_sets(diagram: SampleDiagram, array: ReadOnlyArray,
                      pending: Dict[int, _PendingVertex], budget: WorkspaceBudget,
                      rng: Rng, reject_degenerate: bool) -> Dict[int, int]:
    """
    One scan checking every candidate R_v at once

    A set is good when each vertex of VD(R_v) has fewer than n/s points
    of B_v in its conflict circle.

    Returns:
        Vertex -> index of its first good set, for the vertices that have one
    """
    n, s = diagram.n, diagram.s
    engines: Dict[Tuple[int, int], DelaunayEngine] = {}
    counters: Dict[Tuple[int, int], Dict[int, int]] = {}
    chosen: Dict[int, int] = {}
    grant = budget.alloc(INDEX_WORDS, "goodness counters")
    try:
        for t, entry in pending.items():
            if entry.complete:
                chosen[t] = 0
                continue
            for j, items in enumerate(entry.sets):
                engines[(t, j)] = DelaunayEngine.build(items, rng, budget, reject_degenerate)
                counters[(t, j)] = {}
        for pos in range(len(array)):
            point = array[pos]
            for t in diagram.conflict_vertices(point, pos):
                entry = pending.get(t)
                if entry is None or t in chosen:
                    continue
                for j in range(len(entry.sets)):
                    engine = engines[(t, j)]
                    counts = counters[(t, j)]
                    for tri in engine.conflicts(point, pos):
                        if engine.is_finite(tri):
                            if tri not in counts:
                                grant.grow(INDEX_WORDS)
                            counts[tri] = counts.get(tri, 0) + 1
        for (t, j), counts in counters.items():
            if t not in chosen and all(c * s < n for c in counts.values()):
                chosen[t] = j
    finally:
        for engine in engines.values():
            engine.release()
        grant.release()
    return chosen


def _next_set_count(current: int, limit: int) -> int:
    if current >= limit.bit_length():
        return limit
    return min(current << current, limit)


def second_phase_sample(diagram: SampleDiagram, array: ReadOnlyArray, config: RunConfig,
                        rng: Rng, budget: WorkspaceBudget,
                        stats: Optional[VoronoiStats] = None,
                        reject_degenerate: bool = False) -> int:
    """
    Give every vertex with excess t_v >= 2 a good sample R_v

    Round i draws a_i independent candidate sets per bad vertex, a_1 = 1 and
    a_{i+1} = a_i * 2^a_i, shrunk to what fits in sample_c * s words. After
    round_cap rounds the remaining vertices take R_v = B_v when
    b_v <= conflict_c * s.

    Returns:
        The number of amplification rounds used

    Raises:
        RoundCapExceeded: a vertex is still bad and too heavy for the fallback
        TooManySamples: the first-round samples alone do not fit
    """
    n, s = diagram.n, diagram.s
    pending: Dict[int, _PendingVertex] = {}
    for v in diagram.vertices.values():
        if v.excess < 2:
            v.status = GOOD
            continue
        t = float(v.excess)
        count = min(math.ceil(config.alpha * t * math.log2(t)), v.b)
        pending[v.triangle] = _PendingVertex(v, count)

    limit = max(1, int(config.sample_c * s))
    per_vertex = 1
    rounds = 0
    while pending and rounds < config.round_cap:
        rounds += 1
        total = sum(entry.count for entry in pending.values())
        per_vertex = max(1, min(per_vertex, limit // max(total, 1)))
        specs = []
        for t, entry in pending.items():
            copies = 1 if entry.complete else per_vertex
            specs.extend(SampleSpec((t, j), entry.vertex.b, entry.count) for j in range(copies))
        drawn = sample_many(specs, rng, limit, budget)
        for t, entry in pending.items():
            copies = 1 if entry.complete else per_vertex
            entry.ranks = [sorted(drawn[(t, j)]) for j in range(copies)]
        with budget.alloc(ITEM_WORDS * max(1, sum(len(r) for r in drawn.values())),
                          "candidate samples"):
            _materialize(diagram, array, pending)
            chosen = _choose_good_sets(diagram, array, pending, budget, rng, reject_degenerate)
        for t, j in chosen.items():
            entry = pending.pop(t)
            _accept(diagram, entry.vertex, entry.sets[j])
        logger.debug("round %d: %d sets per vertex, %d vertices still bad",
                     rounds, per_vertex, len(pending))
        per_vertex = _next_set_count(per_vertex, limit)

    if stats is not None:
        stats.rounds = rounds
    if not pending:
        return rounds
    heavy = [e for e in pending.values() if e.vertex.b > config.conflict_c * s]
    if heavy:
        for entry in pending.values():
            entry.vertex.status = BAD
        raise RoundCapExceeded(f"{len(pending)} vertices still bad after {rounds} rounds")
    for entry in pending.values():
        entry.ranks = [list(range(1, entry.vertex.b + 1))]
    words = ITEM_WORDS * max(1, sum(e.vertex.b for e in pending.values()))
    with budget.alloc(words, "fallback samples"):
        _materialize(diagram, array, pending)
        for entry in pending.values():
            _accept(diagram, entry.vertex, entry.sets[0])
    logger.debug("fallback R_v = B_v for %d vertices", len(pending))
    return rounds


def _accept(diagram: SampleDiagram, vertex: VoronoiVertex, items) -> None:
    vertex.sample = [pos for pos, _ in items]
    vertex.status = GOOD
    diagram.charge(INDEX_WORDS * len(vertex.sample))


# -- phase 3 ---------------------------------------------------------------

# sum of |B_triangle| over the cells of R_2, as a multiple of n
TOTAL_CONFLICT_C = 64


def conflict_bound(config: RunConfig, n: int, s: int) -> float:
    return config.conflict_c * max(1.0, n / s)


def assemble_r2(diagram: SampleDiagram, array: ReadOnlyArray, config: RunConfig,
                rng: Rng, budget: WorkspaceBudget, stats: Optional[VoronoiStats] = None,
                reject_degenerate: bool = False) -> SampleDiagram:
    """
    Build the diagram of R_2 = R + all R_v and size every conflict set B_triangle

    The first-phase diagram is released. B_triangle is the owning site
    plus every point inside the closed conflict circle of a corner.

    Raises:
        ConflictSetOverflow: some |B_triangle| exceeds conflict_c * n / s
    """
    n, s = diagram.n, diagram.s
    positions = {diagram.engine.ids[slot] for slot in diagram.engine.site_slots()}
    for v in diagram.vertices.values():
        positions.update(v.sample or ())
    diagram.release()
    with budget.alloc(ITEM_WORDS * len(positions), "R_2 sites"):
        r2 = SampleDiagram.build(_fetch(array, positions), n, s, budget, rng,
                                 reject_degenerate)
    for pos in range(len(array)):
        for cid in r2.conflict_cells(array[pos], pos):
            r2.cells[cid].conflict_size += 1
    sizes = [cell.conflict_size for cell in r2.cells]
    biggest = max(sizes, default=0)
    total = sum(sizes)
    if stats is not None:
        stats.sample_size = len(positions)
        stats.max_conflict_set = biggest
        stats.total_conflict_set = total
    if total > TOTAL_CONFLICT_C * n:
        logger.warning("conflict sets of R_2 hold %d points, above %d * n", total,
                       TOTAL_CONFLICT_C)
    bound = conflict_bound(config, n, s)
    if biggest > bound:
        r2.release()
        raise ConflictSetOverflow(f"conflict set of {biggest} points, bound {bound:.1f}")
    logger.debug("R_2 has %d sites and %d triangles, largest conflict set %d",
                 len(positions), len(r2.cells), biggest)
    return r2


def _batches(cells: Sequence[TriangleCell], capacity: float) -> Iterator[List[TriangleCell]]:
    batch: List[TriangleCell] = []
    size = 0
    for cell in cells:
        if batch and size + cell.conflict_size > capacity:
            yield batch
            batch, size = [], 0
        batch.append(cell)
        size += cell.conflict_size
    if batch:
        yield batch


def _emit_cell(r2: SampleDiagram, cell: TriangleCell, items, sink: OutputSink,
               budget: WorkspaceBudget, rng: Rng, mode: str, reject_degenerate: bool,
               stats: VoronoiStats) -> None:
    local = DelaunayEngine.build(items, rng, budget, reject_degenerate)
    try:
        for t in local.finite_triangles():
            center = circumcenter(*local.triangle_points(t))
            if not r2.cell_contains(cell, _homogeneous(center)):
                continue
            # on shared boundaries the smallest containing triangle emits
            if r2.locate(center, hint_site=cell.site).id != cell.id:
                continue
            sites = local.triangle_ids(t)
            stats.vertices_emitted += 1
            if mode == EMIT_VERTICES:
                sink.vertex(sites, center)
            else:
                for i in range(3):
                    u, v = sites[i], sites[(i + 1) % 3]
                    if u < v:
                        sink.edge(u, v, tag="D")
                        stats.edges_emitted += 1
    finally:
        local.release()


def emit_vertices(r2: SampleDiagram, array: ReadOnlyArray, sink: OutputSink,
                  config: RunConfig, rng: Rng, budget: WorkspaceBudget,
                  mode: str = EMIT_VERTICES, reject_degenerate: bool = False,
                  stats: Optional[VoronoiStats] = None) -> VoronoiStats:
    """
    Emit each Voronoi vertex of S exactly once

    Triangles are processed in batches whose conflict sets fill about
    conflict_c * s words; one scan per batch collects the sets. In Delaunay
    mode a triangle emits, instead of its center, its edges (i, j), i < j,
    that have it on their left, and the convex hull supplies the rest.
    """
    stats = stats if stats is not None else VoronoiStats()
    s = r2.s
    capacity = max(config.conflict_c * s, 1)
    for batch in _batches(r2.cells, capacity):
        members: Dict[int, List[Tuple[int, Point]]] = {cell.id: [] for cell in batch}
        words = ITEM_WORDS * max(1, sum(cell.conflict_size for cell in batch))
        with budget.alloc(words, "conflict sets"):
            for pos in range(len(array)):
                point = array[pos]
                for cid in r2.conflict_cells(point, pos):
                    if cid in members:
                        members[cid].append((pos, point))
            for cell in batch:
                _emit_cell(r2, cell, members[cell.id], sink, budget, rng, mode,
                           reject_degenerate, stats)
    if mode == EMIT_DELAUNAY:
        for p, q in HullCursor(array, s, budget, keep_collinear=True):
            if p < q:
                sink.edge(p, q, tag="D")
                stats.edges_emitted += 1
    return stats


# -- driver ----------------------------------------------------------------

def check_general_input(array: ReadOnlyArray) -> None:
    """
    Raises:
        DegenerateInput: fewer than three points, or all points collinear
    """
    n = len(array)
    if n < 3:
        raise DegenerateInput(f"need at least 3 points, got {n}")
    a, b = array[0], array[1]
    for pos in range(2, n):
        if orient(a, b, array[pos]) != 0:
            return
    raise DegenerateInput("all points are collinear")


def voronoi_budget_words(config: RunConfig, n: int, s: int) -> int:
    return config.budget_c_voronoi * (s + ceil_div(n, s))


def compute_voronoi(array: ReadOnlyArray, s: int, sink: OutputSink, config: RunConfig,
                    rng: Rng, budget: WorkspaceBudget, mode: str = EMIT_VERTICES,
                    reject_degenerate: bool = False) -> VoronoiStats:
    """
    Voronoi vertices (or Delaunay edges) of S in O(s + n/s) words

    Args:
        array: Read-only input in general position
        s: Workspace parameter
        sink: Receives `V` lines, or `D` lines in Delaunay mode
        config: Thresholds and constants
        rng: Random stream; the seed reproduces the run
        budget: Workspace meter
        mode: EMIT_VERTICES or EMIT_DELAUNAY

    Returns:
        Run counters

    Raises:
        DegenerateInput: fewer than three points or all collinear
        RetryLimitExceeded: more restarts than config.max_restarts
    """
    if mode not in (EMIT_VERTICES, EMIT_DELAUNAY):
        raise ValueError(f"unknown emit mode: {mode}")
    if s < 1:
        raise ValueError("s must be at least 1")
    check_general_input(array)
    stats = VoronoiStats()
    while True:
        diagram = first_phase_sample(array, s, config, rng, budget, stats, reject_degenerate)
        try:
            second_phase_sample(diagram, array, config, rng, budget, stats, reject_degenerate)
        except RoundCapExceeded:
            diagram.release()
            stats.restarts_rounds += 1
            _check_restarts(stats, config, RoundCapExceeded)
            continue
        except TooManySamples:
            diagram.release()
            stats.restarts_samples += 1
            _check_restarts(stats, config)
            continue
        try:
            r2 = assemble_r2(diagram, array, config, rng, budget, stats, reject_degenerate)
        except ConflictSetOverflow:
            stats.restarts_overflow += 1
            _check_restarts(stats, config)
            continue
        break
    try:
        emit_vertices(r2, array, sink, config, rng, budget, mode, reject_degenerate, stats)
    finally:
        r2.release()
    logger.info("voronoi: %d vertices, %d restarts, %d rounds",
                stats.vertices_emitted, stats.restarts, stats.rounds)
    return stats
