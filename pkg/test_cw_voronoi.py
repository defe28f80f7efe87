"""
Tests for the sampled Voronoi pipeline
"""

import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from tools.core_geometry import Point, circumcenter, incircle, squared_distance
from tools.cw_voronoi import (
    EMIT_DELAUNAY,
    EMIT_VERTICES,
    GOOD,
    TOTAL_CONFLICT_C,
    ConflictSetOverflow,
    RoundCapExceeded,
    SampleDiagram,
    _homogeneous,
    assemble_r2,
    compute_voronoi,
    conflict_bound,
    count_conflicts,
    excess_term,
    first_phase_sample,
    second_phase_sample,
    voronoi_budget_words,
)
from tools.oracles import oracle_conflicts, oracle_delaunay
from tools.sampler import Rng, TooManySamples
from tools.workspace_harness import (
    DegenerateInput,
    OutputSink,
    ReadOnlyArray,
    RetryLimitExceeded,
    UnmeteredBudget,
    WorkspaceBudget,
)
from utils.config import RunConfig
from utils.helpers import random_points

CONFIG = RunConfig()
CIRCLE_OF_RADIUS_5 = [Point(5, 0), Point(4, 3), Point(3, 4), Point(0, 5), Point(-3, 4),
                      Point(-4, 3), Point(-5, 0), Point(-4, -3), Point(-3, -4), Point(0, -5),
                      Point(3, -4), Point(4, -3)]


def _voronoi(points, s, seed=1, mode=EMIT_VERTICES, config=CONFIG, reject_degenerate=False):
    array = ReadOnlyArray(points)
    sink = OutputSink("vertex" if mode == EMIT_VERTICES else "edge", collect=True)
    budget = WorkspaceBudget(voronoi_budget_words(config, len(points), s))
    stats = compute_voronoi(array, s, sink, config, Rng(seed), budget, mode,
                            reject_degenerate)
    return sink, stats, budget


def _vertex_records(sink):
    return Counter(r[1:] for r in sink.records if r[0] == "V")


def test_square_has_two_coincident_vertices():
    square = [Point(0, 0), Point(2, 0), Point(2, 2), Point(0, 2)]
    sink, stats, _ = _voronoi(square, 2)
    assert _vertex_records(sink) == oracle_delaunay(square).vertex_multiset()
    assert stats.vertices_emitted == 2


@pytest.mark.parametrize("s", [2, 4, 8, 16])
def test_vertices_match_the_oracle(s):
    rng = np.random.default_rng(200 + s)
    for n in (3, 12, 90):
        points = random_points(n, rng, bound=1 << 14)
        sink, stats, budget = _voronoi(points, s, seed=s)
        expected = oracle_delaunay(points).vertex_multiset()
        assert _vertex_records(sink) == expected
        assert stats.vertices_emitted == sum(expected.values())
        assert stats.restarts <= CONFIG.max_restarts
        assert budget.current_words == 0


@pytest.mark.slow
def test_larger_inputs_match_the_oracle():
    rng = np.random.default_rng(7)
    for n, s in ((400, 8), (600, 24)):
        points = random_points(n, rng)
        sink, _, _ = _voronoi(points, s, seed=n)
        assert _vertex_records(sink) == oracle_delaunay(points).vertex_multiset()


@pytest.mark.parametrize("s", [3, 10])
def test_delaunay_mode_matches_the_oracle_edges(s):
    points = random_points(70, np.random.default_rng(s), bound=1 << 12)
    sink, stats, _ = _voronoi(points, s, mode=EMIT_DELAUNAY)
    assert all(r[0] == "D" for r in sink.records)
    edges = sink.edge_set("D")
    assert len(edges) == len(sink.records) == stats.edges_emitted
    assert edges == oracle_delaunay(points).edges


def test_grid_ties_match_the_oracle():
    grid = [Point(x, y) for x in range(5) for y in range(5)]
    sink, _, _ = _voronoi(grid, 4, seed=3)
    assert _vertex_records(sink) == oracle_delaunay(grid).vertex_multiset()
    edges, _, _ = _voronoi(grid, 4, seed=3, mode=EMIT_DELAUNAY)
    assert edges.edge_set("D") == oracle_delaunay(grid).edges


def test_cocircular_points_share_one_center():
    sink, _, _ = _voronoi(CIRCLE_OF_RADIUS_5, 3)
    records = _vertex_records(sink)
    assert records == oracle_delaunay(CIRCLE_OF_RADIUS_5).vertex_multiset()
    assert sum(records.values()) == len(CIRCLE_OF_RADIUS_5) - 2
    assert {(r[3], r[4]) for r in records} == {(0, 0)}


def test_reject_degenerate_stops_on_cocircular_sites():
    with pytest.raises(DegenerateInput):
        _voronoi(CIRCLE_OF_RADIUS_5, 3, reject_degenerate=True)
    points = random_points(40, np.random.default_rng(4))
    sink, _, _ = _voronoi(points, 4, reject_degenerate=True)
    assert _vertex_records(sink) == oracle_delaunay(points).vertex_multiset()


def test_same_seed_same_output():
    points = random_points(80, np.random.default_rng(5))
    first, first_stats, _ = _voronoi(points, 5, seed=42)
    second, second_stats, _ = _voronoi(points, 5, seed=42)
    assert first.records == second.records
    assert first_stats == second_stats


def test_different_seeds_same_vertex_set():
    points = random_points(80, np.random.default_rng(6))
    first, _, _ = _voronoi(points, 5, seed=1)
    second, _, _ = _voronoi(points, 5, seed=2)
    assert _vertex_records(first) == _vertex_records(second)


@pytest.mark.parametrize("s", [30, 64])
def test_workspace_at_least_n(s):
    points = random_points(30, np.random.default_rng(s))
    sink, stats, _ = _voronoi(points, s)
    assert _vertex_records(sink) == oracle_delaunay(points).vertex_multiset()
    assert stats.sample_size == 30
    assert stats.restarts == 0


def test_collinear_and_tiny_inputs_are_rejected():
    with pytest.raises(DegenerateInput):
        _voronoi([Point(i, 3 * i) for i in range(6)], 2)
    with pytest.raises(DegenerateInput):
        _voronoi([Point(0, 0), Point(1, 0)], 2)
    with pytest.raises(ValueError):
        _voronoi(random_points(5, np.random.default_rng(0)), 2, mode="edges")


def test_peak_words_within_the_budget():
    points = random_points(150, np.random.default_rng(8))
    _, stats, budget = _voronoi(points, 6)
    assert 0 < budget.peak_words <= voronoi_budget_words(CONFIG, 150, 6)
    assert stats.max_conflict_set <= conflict_bound(CONFIG, 150, 6)


def test_total_conflict_size_is_linear_in_n():
    points = random_points(300, np.random.default_rng(17))
    for s in (6, 300):
        _, stats, _ = _voronoi(points, s)
        assert 0 < stats.total_conflict_set <= TOTAL_CONFLICT_C * len(points)


def test_restart_limit_is_enforced():
    strict = CONFIG.replace(c_m=1, c_t=1, max_restarts=2)
    points = random_points(200, np.random.default_rng(9))
    with pytest.raises(RetryLimitExceeded):
        _voronoi(points, 2, config=strict)


def test_excess_term():
    assert excess_term(0) == 0.0
    assert excess_term(1) == 0.0
    assert excess_term(2) == 2.0
    assert excess_term(8) == 24.0


# -- phases ----------------------------------------------------------------

def _sample_diagram(points, step, s):
    items = [(i, points[i]) for i in range(0, len(points), step)]
    return SampleDiagram.build(items, len(points), s, UnmeteredBudget(), Rng(0))


def test_conflict_counters_match_brute_force():
    points = random_points(120, np.random.default_rng(10), bound=1 << 10)
    diagram = _sample_diagram(points, 10, 12)
    assert count_conflicts(diagram, ReadOnlyArray(points))
    for v in diagram.vertices.values():
        assert v.b == oracle_conflicts(points, v.sites)[1]
    assert not count_conflicts(_sample_diagram(points, 10, 12), ReadOnlyArray(points),
                               mass_limit=1)


def test_locate_finds_the_cell_of_the_nearest_site():
    points = random_points(100, np.random.default_rng(11))
    diagram = _sample_diagram(points, 7, 14)
    sites = [points[i] for i in range(0, 100, 7)]
    for q in random_points(60, np.random.default_rng(12)):
        cell = diagram.locate(q)
        owner = points[cell.site]
        nearest = min((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 for p in sites)
        assert (owner[0] - q[0]) ** 2 + (owner[1] - q[1]) ** 2 == nearest


def test_center_of_a_cell_corner_is_located_by_the_smallest_cell():
    points = random_points(60, np.random.default_rng(13))
    diagram = _sample_diagram(points, 3, 20)
    for t in diagram.engine.finite_triangles():
        center = circumcenter(*diagram.engine.triangle_points(t))
        owners = [c.id for c in diagram.cells if diagram.cell_contains(c, _homogeneous(center))]
        assert diagram.locate(center).id == min(owners)


def _point_in_cell(cell, rng):
    weights = [int(w) for w in rng.integers(1, 100, size=3)]
    total = sum(weights)
    x = sum(Fraction(w * cx, cw * total) for w, (cx, _, cw) in zip(weights, cell.centers))
    y = sum(Fraction(w * cy, cw * total) for w, (_, cy, cw) in zip(weights, cell.centers))
    return x, y


def _point_in_disc(center, radius2, rng):
    bound = math.isqrt(math.floor(radius2))
    while True:
        dx = Fraction(int(rng.integers(-64 * bound, 64 * bound + 1)), 64)
        dy = Fraction(int(rng.integers(-64 * bound, 64 * bound + 1)), 64)
        if dx * dx + dy * dy < radius2:
            return center[0] + dx, center[1] + dy


def test_empty_discs_in_a_cell_are_covered_by_its_corner_circles():
    points = random_points(200, np.random.default_rng(18), bound=1 << 12)
    diagram = _sample_diagram(points, 8, 25)
    engine = diagram.engine
    sites = [engine.points[slot] for slot in engine.site_slots()]
    inner = [cell for cell in diagram.cells
             if all(diagram.vertices[t].finite for t in cell.corners)]
    assert inner
    rng = np.random.default_rng(19)
    checked = 0
    while checked < 1000:
        cell = inner[int(rng.integers(len(inner)))]
        x = _point_in_cell(cell, rng)
        radius2 = min(squared_distance(site, x) for site in sites)
        assert radius2 == squared_distance(points[cell.site], x)
        if radius2 < 1:
            continue
        p = _point_in_disc(x, radius2, rng)
        assert any(incircle(*engine.triangle_points(t), p) > 0 for t in cell.corners)
        checked += 1


def test_conflict_vertices_are_connected_and_complete():
    points = random_points(90, np.random.default_rng(20), bound=1 << 10)
    diagram = _sample_diagram(points, 5, 18)
    engine = diagram.engine
    triangles = list(engine.triangles())
    for index, p in enumerate(points):
        if index in engine.slot_of:
            assert diagram.conflict_vertices(p, index) == []
            continue
        expected = {t for t in triangles if engine.in_circle(t, p, index)}
        found = diagram.conflict_vertices(p, index)
        assert len(found) == len(set(found))
        assert set(found) == expected
        start = next(iter(expected))
        reached = {start}
        stack = [start]
        while stack:
            for nb in engine.nbrs[stack.pop()]:
                if nb in expected and nb not in reached:
                    reached.add(nb)
                    stack.append(nb)
        assert reached == expected


def _two_phases(array, s, rng, budget):
    for _ in range(CONFIG.max_restarts):
        diagram = first_phase_sample(array, s, CONFIG, rng, budget)
        try:
            return diagram, second_phase_sample(diagram, array, CONFIG, rng, budget)
        except (RoundCapExceeded, TooManySamples):
            diagram.release()
    raise AssertionError("no usable sample")


def test_second_phase_picks_samples_inside_the_conflict_sets():
    points = random_points(300, np.random.default_rng(14))
    array = ReadOnlyArray(points)
    diagram, rounds = _two_phases(array, 20, Rng(14), UnmeteredBudget())
    assert 0 <= rounds <= CONFIG.round_cap
    heavy = [v for v in diagram.vertices.values() if v.excess >= 2]
    assert heavy
    for v in diagram.vertices.values():
        assert v.status == GOOD
    for v in heavy:
        members = set(oracle_conflicts(points, v.sites)[0])
        assert v.sample and set(v.sample) <= members


def test_assembled_cells_respect_the_bound():
    points = random_points(200, np.random.default_rng(15))
    array = ReadOnlyArray(points)
    budget = UnmeteredBudget()
    rng = Rng(15)
    diagram, _ = _two_phases(array, 5, rng, budget)
    sample = {diagram.engine.ids[slot] for slot in diagram.engine.site_slots()}
    r2 = assemble_r2(diagram, array, CONFIG, rng, budget)
    assert sample <= {r2.engine.ids[slot] for slot in r2.engine.site_slots()}
    assert all(0 < cell.conflict_size <= conflict_bound(CONFIG, 200, 5) for cell in r2.cells)
    r2.release()


def test_tight_conflict_bound_overflows():
    points = random_points(200, np.random.default_rng(16))
    array = ReadOnlyArray(points)
    budget = UnmeteredBudget()
    rng = Rng(16)
    diagram, _ = _two_phases(array, 5, rng, budget)
    tight = CONFIG.replace(conflict_c=0.001)
    with pytest.raises(ConflictSetOverflow):
        assemble_r2(diagram, array, tight, rng, budget)
