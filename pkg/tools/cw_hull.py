"""
Constrained-Workspace Convex Hull
Reports convex hull edges clockwise from the leftmost point using O(s)
words. The upper hull is walked left to right in batches: the next s points
after the current hull vertex come out of a constrained heap, their upper
chain is checked against every point further right in one scan, the valid
prefix is reported and, where the chain fails, a bridge to the steepest
point beyond the batch is found with a second scan. The lower hull is the
same walk in descending order. The cursor is a generator, so callers may
pause between edges.
"""

import bisect
import logging
from typing import Iterator, List, Optional, Tuple

from tools.core_geometry import Point, orient
from tools.cw_heap import ASCENDING, DESCENDING, CwHeap, ThresholdAlive, precedes
from tools.workspace_harness import (
    INDEX_WORDS,
    POINT_WORDS,
    CwGeomError,
    DegenerateInput,
    ReadOnlyArray,
    WorkspaceBudget,
)

logger = logging.getLogger(__name__)

CHAIN_ENTRY_WORDS = INDEX_WORDS + POINT_WORDS
HULL_REGISTER_WORDS = 12 * INDEX_WORDS

Edge = Tuple[int, int]


class NotSorted(CwGeomError):
    """Input promised to be x-sorted is not."""


class HullCursor:
    """
    Pausable clockwise hull traversal

    Args:
        array: Read-only input points
        s: Workspace parameter
        budget: Charged with the window, chain and heaps
        sorted_input: The array is sorted in (x, y) order; use slices instead of heaps
        keep_collinear: Report points on hull edges as hull vertices

    Attributes:
        phase: 'upper', 'lower' or 'done'
        degenerate: All points are collinear; only the two extreme edges are reported
    """

    def __init__(self, array: ReadOnlyArray, s: int, budget: WorkspaceBudget,
                 sorted_input: bool = False, keep_collinear: bool = False):
        if len(array) == 0:
            raise ValueError("hull of an empty array")
        self.array = array
        self.s = max(1, s)
        self.budget = budget
        self.sorted_input = sorted_input
        self.keep_collinear = keep_collinear
        self.phase = "upper"
        self.degenerate = False
        self.leftmost: Optional[int] = None
        self.rightmost: Optional[int] = None
        self._grant = budget.alloc(
            HULL_REGISTER_WORDS + 2 * CHAIN_ENTRY_WORDS * (self.s + 1), "hull window")
        self._edges = self._walk()

    # -- public surface --------------------------------------------------

    def next_hull_edge(self) -> Optional[Edge]:
        """Next clockwise edge (p, q) as array indices, or None when done."""
        edge = next(self._edges, None)
        if edge is None:
            self.phase = "done"
            self._grant.release()
        return edge

    def __iter__(self) -> Iterator[Edge]:
        while True:
            edge = self.next_hull_edge()
            if edge is None:
                return
            yield edge

    # -- traversal -------------------------------------------------------

    def _walk(self) -> Iterator[Edge]:
        n = len(self.array)
        self._find_extremes()
        if n == 1:
            return
        if self.degenerate:
            logger.debug("all %d points collinear", n)
            yield self.leftmost, self.rightmost
            yield self.rightmost, self.leftmost
            return
        self.phase = "upper"
        yield from self._chain_pass(self.leftmost, self.rightmost, ASCENDING)
        self.phase = "lower"
        yield from self._chain_pass(self.rightmost, self.leftmost, DESCENDING)

    def _find_extremes(self) -> None:
        array = self.array
        n = len(array)
        if self.sorted_input:
            lo, hi = 0, n - 1
            lo_point, hi_point = array[0], array[n - 1]
        else:
            lo = hi = 0
            lo_point = hi_point = array[0]
            for i in range(1, n):
                p = array[i]
                if p < lo_point:
                    lo, lo_point = i, p
                if p > hi_point:
                    hi, hi_point = i, p
        self.leftmost, self.rightmost = lo, hi
        if n <= 2:
            self.degenerate = n == 2
            return
        previous = None
        for i in range(n):
            p = array[i]
            if self.sorted_input:
                if previous is not None and p <= previous:
                    raise NotSorted(f"position {i} breaks the x-order")
                previous = p
            if orient(lo_point, hi_point, p) != 0:
                self.degenerate = False
                return
        self.degenerate = True

    def _after(self, a: Point, b: Point, order: str) -> bool:
        return precedes(a, b, order)

    def _next_batch(self, c: int, c_point: Point, order: str) -> List[Tuple[int, Point]]:
        """The s points following c in the pass order."""
        array = self.array
        if self.sorted_input:
            step = 1 if order == ASCENDING else -1
            batch = []
            pos = c + step
            previous = c_point
            while 0 <= pos < len(array) and len(batch) < self.s:
                p = array[pos]
                if not precedes(previous, p, order):
                    raise NotSorted(f"position {pos} breaks the x-order")
                batch.append((pos, p))
                previous = p
                pos += step
            return batch
        heap = CwHeap(array, self.s, self.budget, order=order,
                      alive=ThresholdAlive(order, after=c_point))
        try:
            batch = []
            while len(batch) < self.s and not heap.is_empty():
                pos = heap.extract_min()
                batch.append((pos, array[pos]))
            return batch
        finally:
            heap.release()

    def _beyond(self, last: int, last_point: Point, order: str) -> Iterator[Tuple[int, Point]]:
        """Every point after `last` in the pass order, one scan."""
        array = self.array
        if self.sorted_input:
            step = 1 if order == ASCENDING else -1
            pos = last + step
            previous = last_point
            while 0 <= pos < len(array):
                p = array[pos]
                if not precedes(previous, p, order):
                    raise NotSorted(f"position {pos} breaks the x-order")
                yield pos, p
                previous = p
                pos += step
            return
        for pos in range(len(array)):
            p = array[pos]
            if precedes(last_point, p, order):
                yield pos, p

    def _chain(self, c: Tuple[int, Point], batch) -> List[Tuple[int, Point]]:
        chain = [c]
        for item in batch:
            p = item[1]
            while len(chain) >= 2:
                turn = orient(chain[-2][1], chain[-1][1], p)
                if turn > 0 or (turn == 0 and not self.keep_collinear):
                    chain.pop()
                else:
                    break
            chain.append(item)
        return chain

    def _valid_edges(self, chain, o: Point) -> int:
        """Number of leading chain edges with o on their outer-hull side."""
        keep = self.keep_collinear

        def invalid(i: int) -> bool:
            turn = orient(chain[i][1], chain[i + 1][1], o)
            return turn > 0 or (turn == 0 and not keep)

        return bisect.bisect_left(range(len(chain) - 1), True, key=invalid)

    def _steepest(self, anchor: Point, candidates) -> Tuple[int, Point]:
        best = None
        for pos, p in candidates:
            if best is None:
                best = (pos, p)
                continue
            turn = orient(anchor, best[1], p)
            if turn > 0:
                best = (pos, p)
            elif turn == 0:
                # farther wins unless collinear points are kept
                farther = _dist2(anchor, p) > _dist2(anchor, best[1])
                if farther != self.keep_collinear:
                    best = (pos, p)
        return best

    def _chain_pass(self, start: int, stop: int, order: str) -> Iterator[Edge]:
        array = self.array
        c = (start, array[start])
        while c[0] != stop:
            batch = self._next_batch(c[0], c[1], order)
            if not batch:
                return
            chain = self._chain(c, batch)
            valid = len(chain) - 1
            last_pos, last_point = batch[-1]
            for _, o in self._beyond(last_pos, last_point, order):
                if valid == 0:
                    break
                valid = min(valid, self._valid_edges(chain, o))
            for i in range(valid):
                yield chain[i][0], chain[i + 1][0]
            if valid == len(chain) - 1:
                c = chain[-1]
                continue
            anchor = chain[valid]
            bridge = self._steepest(anchor[1], self._beyond(last_pos, last_point, order))
            yield anchor[0], bridge[0]
            c = bridge
        logger.debug("%s hull pass finished", order)


def _dist2(a: Point, b: Point) -> int:
    return (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2


def hull_cursor(array: ReadOnlyArray, s: int, budget: WorkspaceBudget,
                keep_collinear: bool = False) -> HullCursor:
    return HullCursor(array, s, budget, sorted_input=False, keep_collinear=keep_collinear)


def hull_sorted(array: ReadOnlyArray, s: int, budget: WorkspaceBudget,
                keep_collinear: bool = False) -> HullCursor:
    """Cursor over an x-sorted array; order violations raise NotSorted when met."""
    return HullCursor(array, s, budget, sorted_input=True, keep_collinear=keep_collinear)


def hull_edges(array: ReadOnlyArray, s: int, budget: WorkspaceBudget,
               keep_collinear: bool = False, raise_degenerate: bool = False) -> List[Edge]:
    """Whole clockwise hull edge cycle; optional DegenerateInput on collinear input."""
    cursor = hull_cursor(array, s, budget, keep_collinear)
    edges = list(cursor)
    if raise_degenerate and cursor.degenerate:
        raise DegenerateInput("all points are collinear")
    return edges
