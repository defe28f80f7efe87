"""
Workspace Harness
The s-workspace computation model: a read-only input array whose element
accesses are counted, a metered budget of mutable words, and write-only
output sinks. Every algorithm module routes its mutable containers through
a WorkspaceBudget so that the O(s) contract is checked, not assumed.
"""

import csv
import hashlib
import io
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Iterable, List, Optional, Sequence, TextIO, Tuple

logger = logging.getLogger(__name__)


# Word costs of the values the algorithms keep in workspace
INDEX_WORDS = 1
POINT_WORDS = 2
RATIONAL_POINT_WORDS = 4

AUDIT_CSV_COLUMNS = ["n", "s", "peak_words", "input_reads", "emits", "wall_ms"]


class CwGeomError(Exception):
    """Base class of every error raised by the library; carries a CLI exit code."""

    exit_code = 1


class InputFormatError(CwGeomError):
    """Malformed input file (reported with its 1-based line number)."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(CwGeomError):
    """Invalid configuration file or value."""


class BudgetExceeded(CwGeomError):
    """An algorithm asked for more mutable words than its O(s) contract allows."""

    exit_code = 2

    def __init__(self, requested: int, limit: int, what: str = ""):
        self.requested = requested
        self.limit = limit
        self.what = what
        label = f" for {what}" if what else ""
        super().__init__(
            f"workspace budget exceeded{label}: {requested} words requested, limit {limit}"
        )


class DegenerateInput(CwGeomError):
    """Input in a configuration the requested algorithm cannot handle."""

    exit_code = 3


class RetryLimitExceeded(CwGeomError):
    """Randomized phase failed more often than the configured restart limit."""

    exit_code = 4


class ReadOnlyArray:
    """
    Immutable random-access input with an access counter.

    Every element access through indexing increments `read_count` by one.
    Iteration goes through indexing as well, so scans are counted.
    """

    __slots__ = ("_points", "read_count")

    def __init__(self, points: Iterable[Any]):
        self._points: Tuple[Any, ...] = tuple(points)
        self.read_count = 0

    def __len__(self) -> int:
        return len(self._points)

    def __getitem__(self, index: int) -> Any:
        if index < 0:
            raise IndexError("negative indices are not part of the model")
        value = self._points[index]
        self.read_count += 1
        return value

    def __iter__(self):
        for i in range(len(self._points)):
            yield self[i]

    def __setitem__(self, index, value):
        raise TypeError("ReadOnlyArray does not support item assignment")

    def digest(self) -> str:
        """Content hash, used to check that no run modified the input."""
        h = hashlib.sha256()
        for p in self._points:
            h.update(repr(p).encode("utf-8"))
            h.update(b";")
        return h.hexdigest()

    def uncounted(self) -> Tuple[Any, ...]:
        """Raw tuple for oracles and test harnesses, which live outside the model."""
        return self._points


class Grant:
    """A block of words held against a WorkspaceBudget."""

    __slots__ = ("budget", "words", "what")

    def __init__(self, budget: "WorkspaceBudget", words: int, what: str):
        self.budget = budget
        self.words = words
        self.what = what

    def grow(self, delta: int) -> None:
        """Change the size of the grant by `delta` words (negative shrinks)."""
        if delta > 0:
            self.budget._charge(delta, self.what)
        elif delta < 0:
            delta = max(delta, -self.words)
            self.budget._refund(-delta)
        self.words += delta

    def resize(self, words: int) -> None:
        self.grow(words - self.words)

    def release(self) -> None:
        if self.words:
            self.budget._refund(self.words)
            self.words = 0

    def __enter__(self) -> "Grant":
        return self

    def __exit__(self, *exc) -> None:
        self.release()


class WorkspaceBudget:
    """
    Meter for the O(s) mutable words of a run.

    Args:
        limit_words: Hard limit, usually c * s for the algorithm's constant c
    """

    def __init__(self, limit_words: int):
        if limit_words <= 0:
            raise ValueError("limit_words must be positive")
        self.limit_words = int(limit_words)
        self.current_words = 0
        self.peak_words = 0

    def alloc(self, words: int, what: str = "") -> Grant:
        """Reserve `words` words; raises BudgetExceeded past the limit."""
        if words <= 0:
            raise ValueError("alloc needs a positive word count")
        self._charge(words, what)
        return Grant(self, words, what)

    def _charge(self, words: int, what: str) -> None:
        wanted = self.current_words + words
        if wanted > self.limit_words:
            logger.debug("budget exceeded by %s: %d > %d", what, wanted, self.limit_words)
            raise BudgetExceeded(wanted, self.limit_words, what)
        self.current_words = wanted
        if wanted > self.peak_words:
            self.peak_words = wanted

    def _refund(self, words: int) -> None:
        self.current_words -= words
        if self.current_words < 0:
            self.current_words = 0


class UnmeteredBudget(WorkspaceBudget):
    """Budget without a limit, for oracles and calibration code."""

    def __init__(self):
        super().__init__(1 << 62)


class OutputSink:
    """
    Write-only output tape.

    Lines go to `stream` when given; with `collect=True` the parsed records
    are also kept in `records` for tests (outside the budget, the algorithm
    never reads them back).
    """

    def __init__(self, kind: str = "edge", stream: Optional[TextIO] = None,
                 collect: bool = False):
        if kind not in ("edge", "vertex"):
            raise ValueError(f"unknown sink kind: {kind}")
        self.kind = kind
        self.stream = stream
        self.collect = collect
        self.records: List[Tuple] = []
        self.emitted_count = 0

    def edge(self, i: int, j: int, tag: str = "E", ordered: bool = True) -> None:
        """Emit an edge line; `ordered` puts the smaller index first."""
        if ordered and i > j:
            i, j = j, i
        self._write((tag, i, j), f"{tag} {i} {j}")

    def vertex(self, sites: Sequence[int], center) -> None:
        """Emit a Voronoi vertex: ascending site indices and exact rational center."""
        a, b, c = sorted(sites)
        cx, cy = center.cx, center.cy
        line = (f"V {a} {b} {c} {cx.numerator}/{cx.denominator} "
                f"{cy.numerator}/{cy.denominator}")
        self._write(("V", a, b, c, cx, cy), line)

    def _write(self, record: Tuple, line: str) -> None:
        self.emitted_count += 1
        if self.stream is not None:
            self.stream.write(line + "\n")
        if self.collect:
            self.records.append(record)

    def edge_set(self, tag: str = "E") -> set:
        return {(r[1], r[2]) for r in self.records if r[0] == tag}


@dataclass(frozen=True)
class AuditReport:
    """One audit record; serializes as a single CSV row."""

    n: int
    s: int
    peak_words: int
    input_reads: int
    emits: int
    wall_ms: float = field(compare=False)

    def to_csv_row(self) -> str:
        buffer = io.StringIO()
        csv.writer(buffer, lineterminator="").writerow(
            [self.n, self.s, self.peak_words, self.input_reads, self.emits,
             f"{self.wall_ms:.3f}"]
        )
        return buffer.getvalue()

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "s": self.s,
            "peak_words": self.peak_words,
            "input_reads": self.input_reads,
            "emits": self.emits,
            "wall_ms": self.wall_ms,
        }


class WorkspaceRun:
    """
    Bundles the three parts of the model for one algorithm run and times it.

    Args:
        array: Read-only input
        s: Workspace parameter
        limit_words: Budget limit in words
        sink: Output sink
    """

    def __init__(self, array: ReadOnlyArray, s: int, limit_words: int, sink: OutputSink):
        self.array = array
        self.s = s
        self.budget = WorkspaceBudget(limit_words)
        self.sink = sink
        self._reads_at_start = array.read_count
        self._started: Optional[float] = None
        self._elapsed_ms: Optional[float] = None

    def __enter__(self) -> "WorkspaceRun":
        self._reads_at_start = self.array.read_count
        self._started = time.perf_counter()
        return self

    def __exit__(self, *exc) -> None:
        self._elapsed_ms = (time.perf_counter() - self._started) * 1000.0

    @property
    def finished(self) -> bool:
        return self._elapsed_ms is not None


def audit_report(run: WorkspaceRun) -> AuditReport:
    """
    Build the audit record of a finished run

    Args:
        run: A WorkspaceRun whose context has exited

    Returns:
        Immutable AuditReport
    """
    if not run.finished:
        raise ValueError("audit_report needs a finished run")
    return AuditReport(
        n=len(run.array),
        s=run.s,
        peak_words=run.budget.peak_words,
        input_reads=run.array.read_count - run._reads_at_start,
        emits=run.sink.emitted_count,
        wall_ms=run._elapsed_ms,
    )


def format_audit_for_display(report: AuditReport, seed: Optional[int] = None) -> str:
    """Human-readable audit line for stderr."""
    text = (f"audit: n={report.n} s={report.s} peak_words={report.peak_words} "
            f"input_reads={report.input_reads} emits={report.emits} "
            f"wall_ms={report.wall_ms:.1f}")
    if seed is not None:
        text += f" seed={seed}"
    return text
