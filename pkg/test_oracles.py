"""
Tests for the reference oracles used by verify and calibration
"""

from fractions import Fraction

import numpy as np
import pytest

from tools.core_geometry import CollinearSites, Point
from tools.oracles import (
    convex_hull_indices,
    expected_edge_count,
    hull_edges_oracle,
    oracle_conflicts,
    oracle_delaunay,
    oracle_nsr_nsl,
    segments_cross,
    validate_triangulation,
)
from utils.helpers import random_points

SQUARE = [Point(0, 0), Point(2, 0), Point(2, 2), Point(0, 2)]


def test_square_diagram():
    diagram = oracle_delaunay(SQUARE)
    assert diagram.edges == {(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)}
    assert diagram.hull == [0, 3, 2, 1]
    assert diagram.vertex_multiset() == {
        (0, 1, 2, Fraction(1), Fraction(1)): 1,
        (0, 2, 3, Fraction(1), Fraction(1)): 1,
    }


def test_triangle_vertex():
    diagram = oracle_delaunay([Point(0, 0), Point(4, 0), Point(0, 2)])
    assert list(diagram.vertex_multiset()) == [(0, 1, 2, Fraction(2), Fraction(1))]


def test_collinear_input_has_no_diagram():
    with pytest.raises(CollinearSites):
        oracle_delaunay([Point(0, 0), Point(1, 1), Point(2, 2)])
    with pytest.raises(CollinearSites):
        oracle_delaunay([Point(0, 0), Point(1, 1)])


def test_hull_indices_start_at_the_lexicographic_minimum():
    points = [Point(3, 3), Point(0, 0), Point(3, 0), Point(0, 3), Point(1, 0)]
    assert convex_hull_indices(points) == [1, 3, 0, 2]
    assert convex_hull_indices(points, keep_collinear=True) == [1, 3, 0, 2, 4]
    assert hull_edges_oracle([Point(0, 0), Point(5, 5)]) == [(0, 1), (1, 0)]
    assert convex_hull_indices([Point(2, 2), Point(0, 0), Point(1, 1)]) == [1, 0]


def test_expected_edge_count():
    points = [Point(0, 0), Point(0, 2), Point(2, 2), Point(2, 0), Point(1, 1)]
    assert expected_edge_count(points) == 8


def test_nsr_nsl_with_ties():
    nsr, nsl = oracle_nsr_nsl([2, 2, 1])
    assert nsr == {(1, 3), (2, 3)}
    assert nsl == set()
    with pytest.raises(ValueError):
        oracle_nsr_nsl([])


def test_conflicts_of_a_small_circle():
    points = [Point(0, 0), Point(2, 0), Point(0, 2), Point(1, 1), Point(5, 5), Point(2, 2)]
    members, b = oracle_conflicts(points, (0, 1, 2))
    # (2, 2) is cocircular; the tie rule puts it inside
    assert members == [3, 5]
    assert b == 2
    members, _ = oracle_conflicts(points, (2, 1, 0))
    assert members == [3, 5]


def test_conflicts_with_k_corners():
    points = random_points(30, np.random.default_rng(1))
    members, b = oracle_conflicts(points, (-3, -2, -1))
    assert b == 30 and members == list(range(30))


def test_segments_cross():
    a, b, c, d = Point(0, 0), Point(2, 2), Point(0, 2), Point(2, 0)
    assert segments_cross(a, b, c, d)
    assert not segments_cross(a, b, a, d)
    assert segments_cross(a, Point(4, 0), Point(1, 0), Point(3, 0))
    assert not segments_cross(a, Point(1, 0), Point(1, 0), Point(3, 0))
    assert segments_cross(a, b, Point(1, 1), Point(1, 5))


def test_validate_finds_each_kind_of_error():
    points = [Point(0, 0), Point(0, 2), Point(2, 2), Point(2, 0), Point(1, 1)]
    good = [(0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (1, 4), (2, 4), (3, 4)]
    assert validate_triangulation(points, good).ok
    missing = validate_triangulation(points, good[1:])
    assert not missing.ok and missing.missing_hull_edges
    crossing = validate_triangulation(points, good[:4] + [(0, 2), (1, 3), (0, 4), (1, 4)])
    assert crossing.crossings
    duplicated = validate_triangulation(points, good + [(4, 3)])
    assert duplicated.duplicates == [(3, 4)]
    bad = validate_triangulation(points, good[:-1] + [(3, 3)])
    assert bad.bad_edges == [(3, 3)]
