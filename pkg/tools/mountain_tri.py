"""
Mountain Triangulation
Triangulates a monotone mountain by computing its nearest-smaller-right
(NSR) and nearest-smaller-left (NSL) pairs over vertex heights, in rounds of
blocks and sub-blocks so that only O(s) words are live. Vertices arrive
through a SortedStream, so an array slice, an in-memory list or a pair of
constrained heaps can feed the same code.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from tools.core_geometry import Point, orient_value
from tools.workspace_harness import (
    INDEX_WORDS,
    POINT_WORDS,
    CwGeomError,
    OutputSink,
    ReadOnlyArray,
    WorkspaceBudget,
)

logger = logging.getLogger(__name__)

# sub-block, ordinal, height, tie ordinal, index, point
STACK_ENTRY_WORDS = 5 * INDEX_WORDS + POINT_WORDS
ROUND_REGISTER_WORDS = 8 * INDEX_WORDS

Item = Tuple[int, Point]


class NotAMountain(CwGeomError):
    """Stream is not x-monotone, or a vertex is not strictly above the base."""


@dataclass(frozen=True)
class RoundLayout:
    """
    Block geometry of one round over a stream of `size` vertices.

    Blocks have size `block` = s^(R-i), sub-blocks size `sub` = s^(R-i-1),
    so every block of round i+1 is exactly a sub-block of round i. The last
    block and sub-block may be short.
    """

    round: int
    size: int
    block: int
    sub: int

    def block_of(self, ordinal: int) -> int:
        return ordinal // self.block

    def sub_of(self, ordinal: int) -> int:
        return ordinal // self.sub

    def sub_range(self, sub: int) -> Tuple[int, int]:
        start = sub * self.sub
        return start, min(start + self.sub, self.size)

    def is_block_start(self, ordinal: int) -> bool:
        return ordinal % self.block == 0

    def is_last_sub_of_block(self, sub: int) -> bool:
        start, stop = self.sub_range(sub)
        return stop == self.size or stop % self.block == 0


def round_layouts(k: int, s: int) -> List[RoundLayout]:
    """Rounds for k vertices; the last round has sub-blocks of size 1."""
    if s < 2:
        raise ValueError("mountain rounds need s >= 2")
    rounds = 0
    span = 1
    while span < k:
        span *= s
        rounds += 1
    layouts = []
    for i in range(rounds):
        block = s ** (rounds - i)
        layouts.append(RoundLayout(i, k, block, block // s))
    return layouts


class RoundAccess:
    """
    Cursors of one round.

    next_forward() returns the vertices in stream order. After
    activate(sub, start, stop) the sub-block [start, stop) has been read
    completely and its last vertex is on the caller's stack; next_reverse(sub)
    then serves ordinals stop-2, stop-3, ..., start and None after that.
    """

    def next_forward(self) -> Item:
        raise NotImplementedError

    def activate(self, sub: int, start: int, stop: int) -> None:
        raise NotImplementedError

    def next_reverse(self, sub: int) -> Optional[Item]:
        raise NotImplementedError

    def deactivate(self, sub: int) -> None:
        pass

    def end_block(self) -> None:
        pass

    def close(self) -> None:
        pass


class SortedStream:
    """Vertices of a mountain in x-order (descending when `descending`)."""

    size: int
    descending: bool = False

    def open_round(self, layout: RoundLayout) -> RoundAccess:
        raise NotImplementedError

    def reversed(self) -> "SortedStream":
        raise NotImplementedError

    def release(self) -> None:
        pass


class _IndexedAccess(RoundAccess):
    """Round access for streams with random access by ordinal."""

    def __init__(self, stream: "IndexedStream", budget: WorkspaceBudget, s: int):
        self.stream = stream
        self.forward = 0
        # one reverse cursor per active sub-block, at most s of them
        self.cursors = {}
        self._grant = budget.alloc(INDEX_WORDS, "stream cursors")

    def next_forward(self) -> Item:
        item = self.stream.item(self.forward)
        self.forward += 1
        return item

    def activate(self, sub: int, start: int, stop: int) -> None:
        self.cursors[sub] = (start, stop - 1)
        self._grant.grow(2 * INDEX_WORDS)

    def next_reverse(self, sub: int) -> Optional[Item]:
        start, cursor = self.cursors[sub]
        if cursor <= start:
            return None
        cursor -= 1
        self.cursors[sub] = (start, cursor)
        return self.stream.item(cursor)

    def deactivate(self, sub: int) -> None:
        if self.cursors.pop(sub, None) is not None:
            self._grant.grow(-2 * INDEX_WORDS)

    def close(self) -> None:
        self._grant.release()


class IndexedStream(SortedStream):
    def __init__(self, budget: WorkspaceBudget, s: int):
        self.budget = budget
        self.s = s

    def item(self, ordinal: int) -> Item:
        raise NotImplementedError

    def open_round(self, layout: RoundLayout) -> RoundAccess:
        return _IndexedAccess(self, self.budget, self.s)


class ArrayStream(IndexedStream):
    """Positions [lo, hi) of an x-sorted ReadOnlyArray."""

    def __init__(self, array: ReadOnlyArray, lo: int, hi: int, budget: WorkspaceBudget,
                 s: int, descending: bool = False):
        super().__init__(budget, s)
        self.array = array
        self.lo = lo
        self.hi = hi
        self.size = hi - lo
        self.descending = descending

    def item(self, ordinal: int) -> Item:
        pos = self.hi - 1 - ordinal if self.descending else self.lo + ordinal
        return pos, self.array[pos]

    def reversed(self) -> "ArrayStream":
        return ArrayStream(self.array, self.lo, self.hi, self.budget, self.s,
                           not self.descending)


class ListStream(IndexedStream):
    """
    In-memory (index, point) items in stream order, already charged by the
    caller. `descending` states the x-direction of that order.
    """

    def __init__(self, items: Sequence[Item], budget: WorkspaceBudget, s: int,
                 descending: bool = False, flipped: bool = False):
        super().__init__(budget, s)
        self.items = items
        self.size = len(items)
        self.descending = descending
        self.flipped = flipped

    def item(self, ordinal: int) -> Item:
        if self.flipped:
            return self.items[self.size - 1 - ordinal]
        return self.items[ordinal]

    def reversed(self) -> "ListStream":
        return ListStream(self.items, self.budget, self.s, not self.descending,
                          not self.flipped)


class HeightKeys:
    """
    Height of a vertex over the base, as an exact doubled area made positive,
    paired with its ordinal in ascending x-order to break ties. Base
    endpoints get height 0.
    """

    def __init__(self, first: Point, last: Point, size: int, reverse: bool):
        self.first = first
        self.last = last
        self.size = size
        self.reverse = reverse
        self.sigma = 0

    def key(self, point: Point, ordinal: int) -> Tuple[int, int]:
        tie = self.size - 1 - ordinal if self.reverse else ordinal
        if tie == 0 or tie == self.size - 1:
            return 0, tie
        area = orient_value(self.first, self.last, point)
        if area == 0:
            raise NotAMountain(f"vertex {point} lies on the base line")
        sign = 1 if area > 0 else -1
        if not self.sigma:
            self.sigma = sign
        elif sign != self.sigma:
            raise NotAMountain(f"vertex {point} lies on the wrong side of the base")
        return area * sign, tie


@dataclass
class Mountain:
    """
    Monotone mountain with base first-last

    Attributes:
        stream: Vertices in x-order, base endpoints included
        first: First vertex of the stream (index, point)
        last: Last vertex of the stream (index, point)
    """

    stream: SortedStream
    first: Item
    last: Item

    @property
    def size(self) -> int:
        return self.stream.size


class _StackEntry:
    __slots__ = ("sub", "ordinal", "key", "index", "point")

    def __init__(self, sub, ordinal, key, index, point):
        self.sub = sub
        self.ordinal = ordinal
        self.key = key
        self.index = index
        self.point = point


def nsr_round(layout: RoundLayout, access: RoundAccess, heights: HeightKeys,
              emit: Callable[[int, int, int, int], None], budget: WorkspaceBudget,
              descending: bool = False) -> int:
    """
    Emit the NSR pairs of one round whose endpoints lie in different
    sub-blocks of the same block

    Args:
        layout: Block geometry of the round
        access: Cursors opened for this round
        heights: Key function of the stream
        emit: Called with (ordinal, index) of the left and the right vertex
        budget: Charged with the stack
        descending: The stream runs right to left (checked for monotonicity)

    Returns:
        Number of pairs emitted
    """
    stack: List[_StackEntry] = []
    grant = budget.alloc(ROUND_REGISTER_WORDS, "nsr round")
    emitted = 0
    previous = None
    try:
        for ordinal in range(layout.size):
            if layout.is_block_start(ordinal) and stack:
                for entry in stack:
                    access.deactivate(entry.sub)
                grant.grow(-STACK_ENTRY_WORDS * len(stack))
                stack.clear()
                access.end_block()
            index, point = access.next_forward()
            if previous is not None and (point <= previous if not descending else point >= previous):
                raise NotAMountain(f"stream not monotone at {point}")
            previous = point
            key = heights.key(point, ordinal)
            while stack and stack[-1].key > key:
                top = stack[-1]
                emit(top.ordinal, top.index, ordinal, index)
                emitted += 1
                while True:
                    item = access.next_reverse(top.sub)
                    if item is None:
                        stack.pop()
                        access.deactivate(top.sub)
                        grant.grow(-STACK_ENTRY_WORDS)
                        break
                    top.ordinal -= 1
                    step_key = heights.key(item[1], top.ordinal)
                    if step_key < top.key:
                        top.key = step_key
                        top.index, top.point = item
                        break
            sub = layout.sub_of(ordinal)
            start, stop = layout.sub_range(sub)
            if ordinal == stop - 1 and not layout.is_last_sub_of_block(sub):
                grant.grow(STACK_ENTRY_WORDS)
                access.activate(sub, start, stop)
                stack.append(_StackEntry(sub, ordinal, key, index, point))
    finally:
        for entry in stack:
            access.deactivate(entry.sub)
        grant.release()
    return emitted


def triangulate_mountain(mountain: Mountain, s: int, sink: OutputSink,
                         budget: WorkspaceBudget, boundary: bool = True) -> int:
    """
    Emit the NSR and NSL pairs of a mountain, which together with the
    polygon edges triangulate it

    Args:
        mountain: Vertices and base
        s: Workspace parameter, at least 2
        sink: Receives "E i j" lines
        budget: Charged with stacks and cursors
        boundary: Also emit polygon edges (chain edges and the base)

    Returns:
        Number of edges emitted
    """
    k = mountain.size
    if k < 2:
        return 0
    s = max(2, s)
    first_point = mountain.first[1]
    last_point = mountain.last[1]
    emitted = 0

    def emit(ordinal_a: int, index_a: int, ordinal_b: int, index_b: int) -> None:
        nonlocal emitted
        if not boundary:
            gap = abs(ordinal_a - ordinal_b)
            if gap == 1 or gap == k - 1:
                return
        sink.edge(index_a, index_b)
        emitted += 1

    primary = mountain.stream
    for stream in (primary, primary.reversed()):
        heights = HeightKeys(first_point, last_point, k, reverse=stream.descending)
        for layout in round_layouts(k, s):
            access = stream.open_round(layout)
            try:
                nsr_round(layout, access, heights, emit, budget, stream.descending)
            finally:
                access.close()
        if stream is not primary:
            stream.release()
        logger.debug("mountain of %d vertices: %s pass done", k,
                     "NSR" if stream is primary else "NSL")
    return emitted


def mountain_from_array(array: ReadOnlyArray, lo: int, hi: int, budget: WorkspaceBudget,
                        s: int) -> Mountain:
    """Mountain over positions [lo, hi) of an x-sorted array."""
    stream = ArrayStream(array, lo, hi, budget, s)
    return Mountain(stream, (lo, array[lo]), (hi - 1, array[hi - 1]))
