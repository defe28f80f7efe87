"""
Tests for mountain triangulation by nearest-smaller-neighbour rounds
"""

import itertools
from collections import Counter

import numpy as np
import pytest

from tools.core_geometry import Point, orient_value
from tools.mountain_tri import (
    ArrayStream,
    ListStream,
    Mountain,
    NotAMountain,
    mountain_from_array,
    nsr_round,
    round_layouts,
    triangulate_mountain,
)
from tools.oracles import oracle_nsr_nsl, segments_cross
from tools.workspace_harness import OutputSink, ReadOnlyArray, UnmeteredBudget, WorkspaceBudget


class _FixedHeights:
    """Heights given per ordinal, ties broken by ordinal."""

    def __init__(self, heights):
        self.heights = heights

    def key(self, point, ordinal):
        return self.heights[ordinal], ordinal


class _CountingStream(ListStream):
    def __init__(self, items, budget, s):
        super().__init__(items, budget, s)
        self.reads = Counter()

    def item(self, ordinal):
        self.reads[ordinal] += 1
        return super().item(ordinal)


def _nsr_pairs(heights, s, stream=None):
    k = len(heights)
    budget = UnmeteredBudget()
    if stream is None:
        stream = ListStream([(i, Point(i, 0)) for i in range(k)], budget, s)
    pairs = set()

    def emit(ordinal_a, index_a, ordinal_b, index_b):
        pair = (ordinal_a + 1, ordinal_b + 1)
        assert pair not in pairs
        pairs.add(pair)

    for layout in round_layouts(k, s):
        access = stream.open_round(layout)
        nsr_round(layout, access, _FixedHeights(heights), emit, budget)
        access.close()
    return pairs


def test_round_layouts_are_aligned():
    layouts = round_layouts(10, 3)
    assert [(l.block, l.sub) for l in layouts] == [(27, 9), (9, 3), (3, 1)]
    assert round_layouts(1, 2) == []
    with pytest.raises(ValueError):
        round_layouts(5, 1)


def test_nsr_example():
    heights = (5, 3, 4, 1, 2)
    nsr, nsl = oracle_nsr_nsl(heights)
    assert nsr == {(1, 2), (2, 4), (3, 4)}
    assert nsl == {(2, 3), (4, 5)}
    for s in (2, 3, 5, 8):
        assert _nsr_pairs(heights, s) == nsr


def test_decreasing_heights_give_consecutive_pairs():
    heights = (6, 5, 4, 3, 2, 1)
    assert _nsr_pairs(heights, 2) == {(i, i + 1) for i in range(1, 6)}
    assert oracle_nsr_nsl(heights)[1] == set()


def test_increasing_heights_give_nothing():
    assert _nsr_pairs((1, 2, 3, 4, 5, 6, 7), 3) == set()


def test_all_permutations_of_seven_heights():
    for heights in itertools.permutations(range(7)):
        assert _nsr_pairs(heights, 2) == oracle_nsr_nsl(heights)[0]


def test_single_round_when_k_at_most_s():
    heights = (4, 1, 3, 2)
    layouts = round_layouts(len(heights), 8)
    assert len(layouts) == 1
    assert _nsr_pairs(heights, 8) == oracle_nsr_nsl(heights)[0]


def test_each_sub_block_is_reread_once_per_round():
    rng = np.random.default_rng(1)
    heights = tuple(int(h) for h in rng.permutation(200))
    s = 4
    stream = _CountingStream([(i, Point(i, 0)) for i in range(200)], UnmeteredBudget(), s)
    assert _nsr_pairs(heights, s, stream) == oracle_nsr_nsl(heights)[0]
    rounds = len(round_layouts(200, s))
    assert max(stream.reads.values()) <= 2 * rounds


def _random_mountain(k, rng, above=True):
    xs = np.sort(rng.choice(np.arange(-5000, 5000), size=k, replace=False))
    ys = rng.integers(1, 3000, size=k)
    points = [Point(int(x), 0) if i in (0, k - 1) else Point(int(x), int(y) if above else -int(y))
              for i, (x, y) in enumerate(zip(xs, ys))]
    return points


def _expected_edges(points):
    k = len(points)
    first, last = points[0], points[-1]
    keys = [(0 if i in (0, k - 1) else abs(orient_value(first, last, p)), i)
            for i, p in enumerate(points)]
    nsr, nsl = oracle_nsr_nsl(keys)
    return {(min(a, b) - 1, max(a, b) - 1) for a, b in nsr | nsl}


def _assert_triangulates(points, edges):
    k = len(points)
    assert len(edges) == 2 * k - 3
    edge_list = sorted(edges)
    for (a, b), (c, d) in itertools.combinations(edge_list, 2):
        assert not segments_cross(points[a], points[b], points[c], points[d])


@pytest.mark.parametrize("s", [2, 3, 8, 16])
def test_random_mountains_match_the_oracle(s):
    rng = np.random.default_rng(s)
    for k in (3, 4, 17, 64, 130):
        for above in (True, False):
            points = _random_mountain(k, rng, above)
            sink = OutputSink("edge", collect=True)
            budget = WorkspaceBudget(96 * s)
            count = triangulate_mountain(mountain_from_array(ReadOnlyArray(points), 0, k, budget, s),
                                         s, sink, budget)
            edges = sink.edge_set()
            assert count == len(sink.records) == len(edges)
            assert edges == _expected_edges(points)
            _assert_triangulates(points, edges)


@pytest.mark.slow
def test_large_mountains_match_the_oracle():
    rng = np.random.default_rng(77)
    for s in (2, 3, 8, 16):
        points = _random_mountain(512, rng)
        sink = OutputSink("edge", collect=True)
        budget = WorkspaceBudget(96 * s)
        triangulate_mountain(mountain_from_array(ReadOnlyArray(points), 0, 512, budget, s),
                             s, sink, budget)
        assert sink.edge_set() == _expected_edges(points)


def test_triangle_mountain_emits_polygon_edges_only():
    points = [Point(0, 0), Point(1, 5), Point(2, 0)]
    sink = OutputSink("edge", collect=True)
    budget = UnmeteredBudget()
    triangulate_mountain(mountain_from_array(ReadOnlyArray(points), 0, 3, budget, 2), 2, sink, budget)
    assert sink.edge_set() == {(0, 1), (1, 2), (0, 2)}
    inner = OutputSink("edge", collect=True)
    triangulate_mountain(mountain_from_array(ReadOnlyArray(points), 0, 3, budget, 2), 2, inner,
                         budget, boundary=False)
    assert inner.records == []


def test_diagonals_only_without_boundary():
    rng = np.random.default_rng(5)
    points = _random_mountain(40, rng)
    sink = OutputSink("edge", collect=True)
    budget = UnmeteredBudget()
    triangulate_mountain(mountain_from_array(ReadOnlyArray(points), 0, 40, budget, 3), 3, sink,
                         budget, boundary=False)
    polygon = {(i, i + 1) for i in range(39)} | {(0, 39)}
    assert sink.edge_set() == _expected_edges(points) - polygon
    assert len(sink.records) == 40 - 3


def test_descending_stream_gives_the_same_edges():
    rng = np.random.default_rng(6)
    points = _random_mountain(50, rng)
    array = ReadOnlyArray(points)
    budget = UnmeteredBudget()
    sink = OutputSink("edge", collect=True)
    stream = ArrayStream(array, 0, 50, budget, 4, descending=True)
    triangulate_mountain(Mountain(stream, (49, points[49]), (0, points[0])), 4, sink, budget)
    assert sink.edge_set() == _expected_edges(points)


def test_vertex_on_the_base_line_is_rejected():
    points = [Point(0, 0), Point(1, 3), Point(2, 0), Point(3, 0)]
    budget = UnmeteredBudget()
    with pytest.raises(NotAMountain):
        triangulate_mountain(mountain_from_array(ReadOnlyArray(points), 0, 4, budget, 2), 2,
                             OutputSink(), budget)


def test_vertices_on_both_sides_are_rejected():
    points = [Point(0, 0), Point(1, 3), Point(2, -3), Point(3, 0)]
    budget = UnmeteredBudget()
    with pytest.raises(NotAMountain):
        triangulate_mountain(mountain_from_array(ReadOnlyArray(points), 0, 4, budget, 2), 2,
                             OutputSink(), budget)


def test_non_monotone_stream_is_rejected():
    points = [Point(0, 0), Point(2, 3), Point(1, 4), Point(3, 0)]
    budget = UnmeteredBudget()
    with pytest.raises(NotAMountain):
        triangulate_mountain(mountain_from_array(ReadOnlyArray(points), 0, 4, budget, 2), 2,
                             OutputSink(), budget)
