"""
Tests for the s-workspace model: counted input, metered budget, output sinks
"""

import io
from fractions import Fraction

import pytest

from tools.core_geometry import Circumcenter, Point
from tools.workspace_harness import (
    AUDIT_CSV_COLUMNS,
    BudgetExceeded,
    DegenerateInput,
    InputFormatError,
    OutputSink,
    ReadOnlyArray,
    RetryLimitExceeded,
    UnmeteredBudget,
    WorkspaceBudget,
    WorkspaceRun,
    audit_report,
    format_audit_for_display,
)


def test_read_count_grows_by_one_per_access():
    array = ReadOnlyArray([Point(0, 0), Point(1, 2), Point(3, 4)])
    assert array.read_count == 0
    array[1]
    array[1]
    assert array.read_count == 2
    list(array)
    assert array.read_count == 5


def test_array_rejects_mutation_and_negative_index():
    array = ReadOnlyArray([Point(0, 0)])
    with pytest.raises(TypeError):
        array[0] = Point(1, 1)
    with pytest.raises(IndexError):
        array[-1]


def test_digest_does_not_count_reads_and_is_stable():
    array = ReadOnlyArray([Point(0, 0), Point(5, 5)])
    first = array.digest()
    assert array.read_count == 0
    assert first == ReadOnlyArray([Point(0, 0), Point(5, 5)]).digest()
    assert first != ReadOnlyArray([Point(5, 5), Point(0, 0)]).digest()


def test_budget_fills_exactly_to_the_limit():
    budget = WorkspaceBudget(100)
    budget.alloc(40)
    budget.alloc(60)
    assert budget.peak_words == 100


def test_budget_rejects_overdraft():
    budget = WorkspaceBudget(100)
    with pytest.raises(BudgetExceeded) as info:
        budget.alloc(101, "stack")
    assert info.value.requested == 101
    assert info.value.limit == 100
    assert info.value.exit_code == 2


def test_grant_release_and_peak():
    budget = WorkspaceBudget(50)
    with budget.alloc(30):
        assert budget.current_words == 30
    assert budget.current_words == 0
    grant = budget.alloc(10)
    grant.grow(15)
    grant.grow(-20)
    assert budget.current_words == 5
    grant.release()
    assert budget.current_words == 0
    assert budget.peak_words == 30


def test_alloc_needs_positive_words():
    with pytest.raises(ValueError):
        WorkspaceBudget(10).alloc(0)


def test_unmetered_budget_never_overflows():
    budget = UnmeteredBudget()
    budget.alloc(1 << 40)
    assert budget.peak_words == 1 << 40


def test_error_exit_codes():
    assert InputFormatError("bad", 7).exit_code == 1
    assert "line 7" in str(InputFormatError("bad", 7))
    assert DegenerateInput("x").exit_code == 3
    assert RetryLimitExceeded("x").exit_code == 4


def test_edge_sink_writes_ordered_lines():
    stream = io.StringIO()
    sink = OutputSink("edge", stream, collect=True)
    sink.edge(5, 2)
    sink.edge(7, 3, tag="H", ordered=False)
    assert stream.getvalue() == "E 2 5\nH 7 3\n"
    assert sink.emitted_count == 2
    assert sink.edge_set() == {(2, 5)}


def test_vertex_sink_writes_exact_rationals():
    stream = io.StringIO()
    sink = OutputSink("vertex", stream)
    sink.vertex((9, 1, 4), Circumcenter(Fraction(1), Fraction(12, 5)))
    assert stream.getvalue() == "V 1 4 9 1/1 12/5\n"
    assert sink.records == []


def test_audit_report_of_a_run():
    array = ReadOnlyArray([Point(i, i * i) for i in range(10)])
    sink = OutputSink("edge")
    with WorkspaceRun(array, 4, 100, sink) as run:
        for i in range(len(array)):
            array[i]
        with run.budget.alloc(12):
            sink.edge(0, 1)
    report = audit_report(run)
    assert (report.n, report.s, report.peak_words, report.input_reads, report.emits) == (10, 4, 12, 10, 1)
    row = report.to_csv_row().split(",")
    assert len(row) == len(AUDIT_CSV_COLUMNS)
    assert row[:5] == ["10", "4", "12", "10", "1"]
    assert set(report.as_dict()) == set(AUDIT_CSV_COLUMNS)


def test_audit_report_needs_finished_run():
    run = WorkspaceRun(ReadOnlyArray([Point(0, 0)]), 1, 10, OutputSink())
    with pytest.raises(ValueError):
        audit_report(run)


def test_audit_display_line_carries_seed():
    array = ReadOnlyArray([Point(0, 0)])
    with WorkspaceRun(array, 1, 10, OutputSink()) as run:
        pass
    line = format_audit_for_display(audit_report(run), seed=42)
    assert line.startswith("audit: n=1 s=1")
    assert line.endswith("seed=42")
