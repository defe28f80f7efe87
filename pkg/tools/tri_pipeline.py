"""
Triangulation Pipeline
Triangulates a point set under the s-workspace model. The x-monotone chain
through all points splits the convex hull into mountains whose bases are
the long hull edges. The hull cursor is paused on every long edge while the
mountain below (or above) it is triangulated. On sorted input the mountain
is an array slice; on general input it is simulated by constrained heaps.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from tools.core_geometry import Point
from tools.cw_heap import (
    ASCENDING,
    DESCENDING,
    CwHeap,
    IntervalAlive,
    ThresholdAlive,
    precedes,
)
from tools.cw_hull import CHAIN_ENTRY_WORDS, HullCursor, NotSorted
from tools.mountain_tri import (
    ArrayStream,
    Item,
    ListStream,
    Mountain,
    RoundAccess,
    RoundLayout,
    SortedStream,
    triangulate_mountain,
)
from tools.workspace_harness import (
    INDEX_WORDS,
    POINT_WORDS,
    DegenerateInput,
    OutputSink,
    ReadOnlyArray,
    WorkspaceBudget,
)

logger = logging.getLogger(__name__)

SHORT = "short"
LONG = "long"


@dataclass(frozen=True)
class PartitionFace:
    """A hull edge p-q and the k points after p up to q in x-order."""

    p: int
    q: int
    k: int
    side: str

    @property
    def kind(self) -> str:
        return SHORT if self.k == 1 else LONG


@dataclass
class TriangulationSummary:
    edges: int = 0
    hull_edges: int = 0
    mountains: int = 0
    faces: List[PartitionFace] = field(default_factory=list)


def _opposite(order: str) -> str:
    return DESCENDING if order == ASCENDING else ASCENDING


class HeapRoundAccess(RoundAccess):
    """Forward, reread and reverse cursors of one round; see second_scan_source."""

    def __init__(self, stream: "HeapStream"):
        self.stream = stream
        budget = stream.budget
        self.forward_heap = stream.base.clone_state()
        self.reread_heap = stream.base.clone_state()
        self.alive = IntervalAlive(budget, _opposite(stream.order))
        self.reverse_heap = CwHeap(stream.array, stream.s, budget,
                                   order=_opposite(stream.order), alive=self.alive,
                                   build=False)
        self.forward_ordinal = 0
        self.reread_ordinal = 0
        self.anchors: Dict[int, Point] = {}
        self._grant = budget.alloc(2 * INDEX_WORDS, "heap stream cursors")

    def _pull(self, heap: CwHeap, ordinal: int) -> Item:
        if ordinal == 0 and self.stream.head is not None:
            return self.stream.head
        pos = heap.extract_min()
        return pos, self.stream.array[pos]

    def next_forward(self) -> Item:
        item = self._pull(self.forward_heap, self.forward_ordinal)
        self.forward_ordinal += 1
        return item

    def activate(self, sub: int, start: int, stop: int) -> None:
        while self.reread_ordinal < start:
            self._pull(self.reread_heap, self.reread_ordinal)
            self.reread_ordinal += 1
        anchor = None
        while self.reread_ordinal < stop:
            pos, point = self._pull(self.reread_heap, self.reread_ordinal)
            self.reread_ordinal += 1
            if self.reread_ordinal == stop:
                break
            if anchor is None:
                self.alive.add_interval(point, point)
                anchor = point
            else:
                self.alive.grow_interval(anchor, point)
            self.reverse_heap.insert(pos)
        if anchor is not None:
            self.anchors[sub] = anchor
            self._grant.grow(POINT_WORDS)

    def next_reverse(self, sub: int) -> Optional[Item]:
        anchor = self.anchors.get(sub)
        if anchor is None:
            return None
        pos = self.reverse_heap.peek()
        if pos is None:
            return None
        point = self.stream.array[pos]
        if precedes(point, anchor, self.stream.order):
            return None
        self.reverse_heap.extract_min()
        return pos, point

    def deactivate(self, sub: int) -> None:
        if self.anchors.pop(sub, None) is not None:
            self._grant.grow(-POINT_WORDS)

    def end_block(self) -> None:
        self.reverse_heap.clear()
        self.alive.clear()
        self._grant.grow(-POINT_WORDS * len(self.anchors))
        self.anchors.clear()

    def close(self) -> None:
        self.forward_heap.release()
        self.reread_heap.release()
        self.reverse_heap.release()
        self._grant.release()


class HeapStream(SortedStream):
    """
    Mountain vertices served by a constrained heap

    Args:
        array: Read-only input
        s: Workspace parameter
        budget: Charged with every heap copy
        base: Heap whose extraction sequence is the stream (after `head`); never mutated
        size: Number of vertices, head included
        head: Vertex held in a register that precedes the heap's elements
        first, last: Base endpoints in stream order
        owns_base: Release `base` when the stream is released
    """

    def __init__(self, array: ReadOnlyArray, s: int, budget: WorkspaceBudget, base: CwHeap,
                 size: int, head: Optional[Item], first: Item, last: Item,
                 owns_base: bool = False):
        self.array = array
        self.s = s
        self.budget = budget
        self.base = base
        self.size = size
        self.head = head
        self.first = first
        self.last = last
        self.order = base.order
        self.descending = base.order == DESCENDING
        self.owns_base = owns_base

    def open_round(self, layout: RoundLayout) -> RoundAccess:
        return second_scan_source(self, layout)

    def reversed(self) -> "HeapStream":
        order = _opposite(self.order)
        base = CwHeap(self.array, self.s, self.budget, order=order,
                      alive=ThresholdAlive(order, lo=self.last[1], hi=self.first[1]))
        return HeapStream(self.array, self.s, self.budget, base, self.size, None,
                          self.last, self.first, owns_base=True)

    def release(self) -> None:
        if self.owns_base:
            self.base.release()


class _SidePass:
    """Walk of one hull side: H1 counts the points under an edge, H2 serves them."""

    def __init__(self, array: ReadOnlyArray, s: int, budget: WorkspaceBudget,
                 sink: OutputSink, order: str, emit_chain: bool,
                 summary: TriangulationSummary, record_faces: bool):
        self.array = array
        self.s = s
        self.budget = budget
        self.sink = sink
        self.order = order
        self.emit_chain = emit_chain
        self.summary = summary
        self.record_faces = record_faces
        self.side = "upper" if order == ASCENDING else "lower"
        self.h1 = CwHeap(array, s, budget, order=order)
        self.h2 = CwHeap(array, s, budget, order=order)
        start = self.h1.extract_min()
        self.h2.extract_min()
        self.p: Item = (start, array[start])

    def process(self, p: int, q: int) -> None:
        if p != self.p[0]:
            raise RuntimeError(f"hull edge {p}-{q} does not start at the current vertex")
        k = 0
        while True:
            k += 1
            if self.h1.extract_min() == q:
                break
        if self.record_faces:
            self.summary.faces.append(PartitionFace(p, q, k, self.side))
        q_item = (q, self.array[q])
        if k == 1:
            self._advance(1)
        elif k <= self.s:
            with self.budget.alloc(CHAIN_ENTRY_WORDS * (k + 1), "in-memory mountain"):
                items = [self.p] + self._advance(k, collect=True)
                self._base_edge(p, q)
                stream = ListStream(items, self.budget, self.s,
                                    descending=self.order == DESCENDING)
                self._mountain(Mountain(stream, self.p, q_item))
        else:
            self._base_edge(p, q)
            stream = HeapStream(self.array, max(2, self.s), self.budget, self.h2, k + 1,
                                self.p, self.p, q_item)
            self._mountain(Mountain(stream, self.p, q_item))
            self._advance(k)
        self.p = q_item

    def _base_edge(self, p: int, q: int) -> None:
        self.sink.edge(p, q)
        self.summary.edges += 1

    def _mountain(self, mountain: Mountain) -> None:
        self.summary.mountains += 1
        self.summary.edges += triangulate_mountain(mountain, max(2, self.s), self.sink,
                                                   self.budget, boundary=False)

    def _advance(self, count: int, collect: bool = False) -> List[Item]:
        items = []
        previous = self.p[0]
        for _ in range(count):
            pos = self.h2.extract_min()
            if self.emit_chain:
                self.sink.edge(previous, pos)
                self.summary.edges += 1
            previous = pos
            if collect:
                items.append((pos, self.array[pos]))
        return items

    def close(self) -> None:
        self.h1.release()
        self.h2.release()


def _open_cursor(array: ReadOnlyArray, s: int, budget: WorkspaceBudget,
                 sorted_input: bool) -> HullCursor:
    if len(array) < 3:
        raise DegenerateInput(f"need at least 3 points, got {len(array)}")
    return HullCursor(array, s, budget, sorted_input=sorted_input, keep_collinear=True)


def triangulate_general(array: ReadOnlyArray, s: int, sink: OutputSink,
                        budget: WorkspaceBudget,
                        record_faces: bool = False) -> TriangulationSummary:
    """
    Triangulate points in arbitrary order

    Args:
        array: Distinct input points
        s: Workspace parameter
        sink: Receives one "E i j" line per edge
        budget: Word meter of the run
        record_faces: Keep the partition faces in the summary (test instrumentation)

    Returns:
        TriangulationSummary with the number of emitted edges

    Raises:
        DegenerateInput: fewer than 3 points, or all points collinear
    """
    cursor = _open_cursor(array, s, budget, sorted_input=False)
    summary = TriangulationSummary()
    edge = cursor.next_hull_edge()
    if cursor.degenerate:
        raise DegenerateInput("all points are collinear")
    side_pass: Optional[_SidePass] = None
    side = None
    try:
        while edge is not None:
            if cursor.phase != side:
                if side_pass is not None:
                    side_pass.close()
                side = cursor.phase
                order = ASCENDING if side == "upper" else DESCENDING
                side_pass = _SidePass(array, s, budget, sink, order, side == "upper",
                                      summary, record_faces)
                logger.debug("%s side of the hull starts at %d", side, edge[0])
            summary.hull_edges += 1
            side_pass.process(*edge)
            edge = cursor.next_hull_edge()
    finally:
        if side_pass is not None:
            side_pass.close()
    logger.debug("general triangulation: %d edges, %d hull edges, %d mountains",
                 summary.edges, summary.hull_edges, summary.mountains)
    return summary


def triangulate_sorted(array: ReadOnlyArray, s: int, sink: OutputSink,
                       budget: WorkspaceBudget,
                       record_faces: bool = False) -> TriangulationSummary:
    """
    Triangulate points given in strictly increasing (x, y) order

    Raises:
        NotSorted: the order is violated (found while walking)
        DegenerateInput: fewer than 3 points, or all points collinear
    """
    cursor = _open_cursor(array, s, budget, sorted_input=True)
    summary = TriangulationSummary()
    edge = cursor.next_hull_edge()
    if cursor.degenerate:
        raise DegenerateInput("all points are collinear")
    mountain_s = max(2, s)
    while edge is not None:
        p, q = edge
        summary.hull_edges += 1
        upper = cursor.phase == "upper"
        k = q - p if upper else p - q
        if k <= 0:
            raise NotSorted(f"hull edge {p}-{q} runs against the x-order")
        if record_faces:
            summary.faces.append(PartitionFace(p, q, k, cursor.phase))
        if upper:
            previous = array[p]
            for i in range(p, q):
                current = array[i + 1]
                if current <= previous:
                    raise NotSorted(f"position {i + 1} breaks the x-order")
                sink.edge(i, i + 1)
                summary.edges += 1
                previous = current
        if k >= 2:
            sink.edge(p, q)
            summary.edges += 1
            lo, hi = (p, q) if upper else (q, p)
            stream = ArrayStream(array, lo, hi + 1, budget, mountain_s, descending=not upper)
            mountain = Mountain(stream, (p, array[p]), (q, array[q]))
            summary.mountains += 1
            summary.edges += triangulate_mountain(mountain, mountain_s, sink, budget,
                                                  boundary=False)
        edge = cursor.next_hull_edge()
    logger.debug("sorted triangulation: %d edges, %d hull edges, %d mountains",
                 summary.edges, summary.hull_edges, summary.mountains)
    return summary


def second_scan_source(stream: HeapStream, layout: RoundLayout) -> HeapRoundAccess:
    """
    Cursors of one round over a heap-backed stream

    Forward reads come from a clone of the stream heap; activated sub-blocks
    are reread from a second clone and served back in reverse order by the
    interval-alive heap, whose top is the rightmost unread vertex of the
    most recently activated sub-block.
    """
    if layout.size > stream.size:
        raise ValueError(f"round over {layout.size} vertices on a stream of {stream.size}")
    return HeapRoundAccess(stream)
