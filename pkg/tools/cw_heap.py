"""
Constrained-Workspace Heap
Priority queue over a region of a read-only array that stores no elements.
The region is cut into about s*log(n) buckets; a complete binary tree over
the buckets keeps, per node, only a packed (bucket, quantile) code naming
where the minimum alive element below the node sits. Minima are recovered
by rescanning that quantile of the input. Which elements belong to the heap
is decided by a pluggable alive predicate.
"""

import bisect
import logging
from typing import Any, Callable, List, Optional, Tuple

from tools.workspace_harness import (
    INDEX_WORDS,
    POINT_WORDS,
    CwGeomError,
    ReadOnlyArray,
    WorkspaceBudget,
)
from utils.helpers import ceil_div, ceil_log2

logger = logging.getLogger(__name__)

ASCENDING = "ascending"
DESCENDING = "descending"

# min_ref, region bounds, bucket size, bucket count, leaf offset
HEAP_REGISTER_WORDS = 6 * INDEX_WORDS


class Empty(CwGeomError):
    """extract_min on a heap without alive elements."""


def precedes(a, b, order: str) -> bool:
    """True if key a comes strictly before key b in the heap order."""
    return a < b if order == ASCENDING else a > b


def _bits(count: int) -> int:
    return (count - 1).bit_length() if count > 1 else 0


class AlivePredicate:
    """
    Membership test of a heap: element key -> alive.

    `retire` is called by the heap on every extracted key. `cost` is the
    declared cost D(n) of one test.
    """

    cost = 1

    def is_alive(self, key) -> bool:
        raise NotImplementedError

    def retire(self, key) -> None:
        raise NotImplementedError

    def copy(self, budget: WorkspaceBudget) -> "AlivePredicate":
        raise NotImplementedError

    def release(self) -> None:
        pass


class ThresholdAlive(AlivePredicate):
    """
    Alive iff the key lies strictly after the last extracted key and within
    the optional inclusive bounds [lo, hi], all in heap order.
    """

    def __init__(self, order: str = ASCENDING, after=None, lo=None, hi=None):
        self.order = order
        self.after = after
        self.lo = lo
        self.hi = hi

    def is_alive(self, key) -> bool:
        order = self.order
        if self.after is not None and not precedes(self.after, key, order):
            return False
        if self.lo is not None and precedes(key, self.lo, order):
            return False
        if self.hi is not None and precedes(self.hi, key, order):
            return False
        return True

    def retire(self, key) -> None:
        self.after = key

    def copy(self, budget: WorkspaceBudget) -> "ThresholdAlive":
        return ThresholdAlive(self.order, self.after, self.lo, self.hi)


class IntervalAlive(AlivePredicate):
    """
    Alive iff the key lies in one of a set of disjoint key intervals.

    Intervals are kept sorted by their low end, so a test is one binary
    search. Each interval costs two points of workspace. With a heap order
    set, a retired key is the smallest alive key in that order, so its
    interval is cut at the key and dropped once the key was its last end;
    the interval count never exceeds the number of add_interval calls.
    Without an order, retiring splits the interval around the key.
    """

    WORDS_PER_INTERVAL = 2 * POINT_WORDS

    def __init__(self, budget: WorkspaceBudget, order: Optional[str] = None):
        self.budget = budget
        self.order = order
        self._los: List[Any] = []
        # (lo, hi, lo_open, hi_open), parallel to _los
        self._intervals: List[Tuple[Any, Any, bool, bool]] = []
        self._grant = None

    @property
    def cost(self) -> int:
        return max(1, ceil_log2(len(self._intervals) + 1))

    def __len__(self) -> int:
        return len(self._intervals)

    def _resize(self) -> None:
        words = len(self._intervals) * self.WORDS_PER_INTERVAL
        if self._grant is None:
            if words:
                self._grant = self.budget.alloc(words, "alive intervals")
        else:
            self._grant.resize(words)

    def _find(self, key) -> int:
        i = bisect.bisect_right(self._los, key) - 1
        if i < 0:
            return -1
        lo, hi, lo_open, hi_open = self._intervals[i]
        if lo_open and key == lo:
            return -1
        if key > hi or (hi_open and key == hi):
            return -1
        return i

    def is_alive(self, key) -> bool:
        return self._find(key) >= 0

    def add_interval(self, lo, hi) -> None:
        """Make every key in [lo, hi] alive; the interval must not overlap others."""
        if hi < lo:
            raise ValueError("empty interval")
        i = bisect.bisect_right(self._los, lo)
        if i > 0 and self._intervals[i - 1][1] >= lo:
            raise ValueError("overlapping alive interval")
        if i < len(self._intervals) and self._intervals[i][0] <= hi:
            raise ValueError("overlapping alive interval")
        self._los.insert(i, lo)
        self._intervals.insert(i, (lo, hi, False, False))
        self._resize()

    def grow_interval(self, anchor, key) -> None:
        """Extend the closed interval holding `anchor` so that it covers `key`."""
        i = self._find(anchor)
        if i < 0:
            raise ValueError("anchor is not alive")
        lo, hi, lo_open, hi_open = self._intervals[i]
        if key < lo:
            if i > 0 and self._intervals[i - 1][1] >= key:
                raise ValueError("overlapping alive interval")
            lo, lo_open = key, False
        elif key > hi:
            if i + 1 < len(self._intervals) and self._intervals[i + 1][0] <= key:
                raise ValueError("overlapping alive interval")
            hi, hi_open = key, False
        self._los[i] = lo
        self._intervals[i] = (lo, hi, lo_open, hi_open)

    def remove_interval_containing(self, key) -> bool:
        i = self._find(key)
        if i < 0:
            return False
        del self._los[i]
        del self._intervals[i]
        self._resize()
        return True

    def clear(self) -> None:
        self._los.clear()
        self._intervals.clear()
        self._resize()

    def retire(self, key) -> None:
        i = self._find(key)
        if i < 0:
            return
        lo, hi, lo_open, hi_open = self._intervals[i]
        pieces = []
        if lo != key and self.order != ASCENDING:
            pieces.append((lo, key, lo_open, True))
        if hi != key and self.order != DESCENDING:
            pieces.append((key, hi, True, hi_open))
        self._intervals[i:i + 1] = pieces
        self._los[i:i + 1] = [p[0] for p in pieces]
        self._resize()

    def copy(self, budget: WorkspaceBudget) -> "IntervalAlive":
        twin = IntervalAlive(budget, self.order)
        twin._los = list(self._los)
        twin._intervals = list(self._intervals)
        twin._resize()
        return twin

    def release(self) -> None:
        if self._grant is not None:
            self._grant.release()


class CwHeap:
    """
    Heap over positions [start, stop) of a ReadOnlyArray

    Args:
        array: Read-only input
        s: Workspace parameter
        budget: Meter charged with the info codes and registers
        start, stop: Region of the array (defaults to all of it)
        order: ASCENDING extracts minima, DESCENDING extracts maxima
        alive: Membership predicate (defaults to a ThresholdAlive)
        key: Maps an array element to its key (defaults to the element)
        build: Fill the tree from the alive elements right away
    """

    def __init__(self, array: ReadOnlyArray, s: int, budget: WorkspaceBudget, *,
                 start: int = 0, stop: Optional[int] = None, order: str = ASCENDING,
                 alive: Optional[AlivePredicate] = None,
                 key: Optional[Callable[[Any], Any]] = None, build: bool = True):
        if order not in (ASCENDING, DESCENDING):
            raise ValueError(f"unknown order {order}")
        stop = len(array) if stop is None else stop
        if not 0 <= start < stop <= len(array):
            raise ValueError("heap region must be a nonempty slice of the array")
        self.array = array
        self.s = max(1, s)
        self.budget = budget
        self.start = start
        self.stop = stop
        self.order = order
        self.alive = alive if alive is not None else ThresholdAlive(order)
        self.key = key if key is not None else (lambda p: p)
        self.alive_checks = 0

        m = stop - start
        log_n = ceil_log2(max(len(array), 2))
        self.bucket_size = max(1, ceil_div(m, self.s * log_n))
        self.bucket_count = ceil_div(m, self.bucket_size)
        leaves = 1
        while leaves < self.bucket_count:
            leaves *= 2
        self.leaves = leaves
        self.log_n = log_n
        # 0 = no alive element below; else 1 + bucket * quantiles + quantile
        self.info: List[int] = [0] * (2 * leaves)
        self.min_ref: Optional[int] = None

        self._grant = budget.alloc(self.words, "cw_heap")
        if build:
            self._build()

    @classmethod
    def build(cls, array: ReadOnlyArray, s: int, budget: WorkspaceBudget, **kwargs) -> "CwHeap":
        return cls(array, s, budget, build=True, **kwargs)

    # -- geometry of the tree -------------------------------------------

    def _height(self, node: int) -> int:
        return self.leaves.bit_length() - node.bit_length()

    def _quantiles(self, height: int) -> int:
        return min(1 << height, self.bucket_size)

    def _quantile_size(self, height: int) -> int:
        return ceil_div(self.bucket_size, self._quantiles(height))

    def _bucket_of(self, pos: int) -> int:
        return (pos - self.start) // self.bucket_size

    def _real_buckets_below(self, node: int) -> int:
        h = self._height(node)
        first = (node << h) - self.leaves
        return max(0, min(first + (1 << h), self.bucket_count) - first)

    @property
    def info_bits(self) -> int:
        """Bits needed by the per-node codes of all nodes over real buckets."""
        total = 0
        for node in range(1, self.leaves):
            under = self._real_buckets_below(node)
            if not under:
                continue
            h = self._height(node)
            total += min(_bits(under) + _bits(self._quantiles(h)), self.log_n)
        return total

    @property
    def words(self) -> int:
        return ceil_div(self.info_bits, self.log_n) + HEAP_REGISTER_WORDS

    # -- scanning -------------------------------------------------------

    def _scan(self, lo: int, hi: int) -> Optional[Tuple[Any, int]]:
        """Best alive (key, position) in positions [lo, hi)."""
        best = None
        best_pos = -1
        order = self.order
        alive = self.alive
        for pos in range(lo, min(hi, self.stop)):
            k = self.key(self.array[pos])
            self.alive_checks += 1
            if not alive.is_alive(k):
                continue
            if best is None or precedes(k, best, order):
                best = k
                best_pos = pos
        return None if best is None else (best, best_pos)

    def _recover(self, node: int) -> Optional[Tuple[Any, int]]:
        """Minimum alive (key, position) below node, by rescanning its quantile."""
        h = self._height(node)
        if h == 0:
            bucket = node - self.leaves
            if bucket >= self.bucket_count:
                return None
            lo = self.start + bucket * self.bucket_size
            return self._scan(lo, lo + self.bucket_size)
        code = self.info[node]
        if not code:
            return None
        nq = self._quantiles(h)
        bucket, q = divmod(code - 1, nq)
        qsize = self._quantile_size(h)
        lo = self.start + bucket * self.bucket_size + q * qsize
        return self._scan(lo, min(lo + qsize, self.start + (bucket + 1) * self.bucket_size))

    def _code(self, node: int, pos: int) -> int:
        h = self._height(node)
        bucket = self._bucket_of(pos)
        offset = pos - self.start - bucket * self.bucket_size
        return 1 + bucket * self._quantiles(h) + offset // self._quantile_size(h)

    def _recompute(self, node: int) -> Optional[Tuple[Any, int]]:
        left = self._recover(2 * node)
        right = self._recover(2 * node + 1)
        if left is None or (right is not None and precedes(right[0], left[0], self.order)):
            best = right
        else:
            best = left
        self.info[node] = 0 if best is None else self._code(node, best[1])
        return best

    def _build(self) -> None:
        best = None
        if self.leaves == 1:
            best = self._recover(1)
        for node in range(self.leaves - 1, 0, -1):
            best = self._recompute(node)
        self.min_ref = None if best is None else best[1]

    # -- operations -----------------------------------------------------

    def is_empty(self) -> bool:
        return self.min_ref is None

    def peek(self) -> Optional[int]:
        """Position of the current minimum, or None."""
        return self.min_ref

    def extract_min(self) -> int:
        """
        Remove and return the position of the minimum alive element
        (the maximum for a DESCENDING heap).

        Raises:
            Empty: no alive element left
        """
        pos = self.min_ref
        if pos is None:
            raise Empty("heap is empty")
        self.alive.retire(self.key(self.array[pos]))
        node = (self.leaves + self._bucket_of(pos)) // 2
        best = None
        if self.leaves == 1:
            best = self._recover(1)
        while node >= 1:
            best = self._recompute(node)
            node //= 2
        self.min_ref = None if best is None else best[1]
        return pos

    def insert(self, pos: int) -> None:
        """
        Register a position whose element the alive predicate already accepts

        Walks the leaf-to-root path and stops at the first node whose
        minimum precedes the new key.
        """
        if not self.start <= pos < self.stop:
            raise IndexError("position outside the heap region")
        k = self.key(self.array[pos])
        node = (self.leaves + self._bucket_of(pos)) // 2
        while node >= 1:
            current = self._recover(node) if node < self.leaves else None
            if current is not None and precedes(current[0], k, self.order):
                return
            self.info[node] = self._code(node, pos)
            node //= 2
        if self.leaves == 1:
            current = self._recover(1)
            self.min_ref = None if current is None else current[1]
        else:
            self.min_ref = pos

    def clear(self) -> None:
        """Forget every element; the alive predicate is the caller's to reset."""
        for node in range(len(self.info)):
            self.info[node] = 0
        self.min_ref = None

    def clone_state(self, budget: Optional[WorkspaceBudget] = None) -> "CwHeap":
        """Independent copy of the O(s) words of state."""
        budget = budget or self.budget
        twin = CwHeap.__new__(CwHeap)
        twin.__dict__.update(self.__dict__)
        twin.info = list(self.info)
        twin.alive = self.alive.copy(budget)
        twin.alive_checks = 0
        twin.budget = budget
        twin._grant = budget.alloc(self.words, "cw_heap clone")
        return twin

    def release(self) -> None:
        self._grant.release()
        self.alive.release()

    def __enter__(self) -> "CwHeap":
        return self

    def __exit__(self, *exc) -> None:
        self.release()

    def drain(self) -> List[int]:
        """Extract everything; used by tests and small callers."""
        out = []
        while not self.is_empty():
            out.append(self.extract_min())
        return out
