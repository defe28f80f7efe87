"""
Helper Functions
Input parsing, integer logarithms and random instance generation shared by
the orchestrator, the benchmarks and the tests.
"""

from typing import Iterable, List, Optional, Sequence

import numpy as np

from tools.core_geometry import COORD_LIMIT, Point, in_coordinate_range
from tools.workspace_harness import InputFormatError


def ceil_log2(n: int) -> int:
    """Smallest b with 2^b >= n; at least 1."""
    if n <= 2:
        return 1
    return (n - 1).bit_length()


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def parse_points(lines: Iterable[str]) -> List[Point]:
    """
    Parse the points file format

    Args:
        lines: Text lines, one point "x y" per line; '#' lines are comments

    Returns:
        List of Points in file order

    Raises:
        InputFormatError: malformed line, coordinate out of range or duplicate point
    """
    points: List[Point] = []
    seen = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputFormatError(f"expected two integers, got {line!r}", lineno)
        try:
            x, y = int(parts[0]), int(parts[1])
        except ValueError:
            raise InputFormatError(f"not an integer pair: {line!r}", lineno)
        if not in_coordinate_range(x, y):
            raise InputFormatError(f"coordinate outside +-2^26: {line!r}", lineno)
        p = Point(x, y)
        if p in seen:
            raise InputFormatError(f"duplicate point {x} {y} (first on line {seen[p]})", lineno)
        seen[p] = lineno
        points.append(p)
    return points


def read_points_file(path: str) -> List[Point]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return parse_points(handle)
    except OSError as e:
        raise InputFormatError(f"cannot read {path}: {e.strerror}")


def write_points_file(path: str, points: Sequence[Point], comment: Optional[str] = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        if comment:
            handle.write(f"# {comment}\n")
        for p in points:
            handle.write(f"{p.x} {p.y}\n")


def random_points(n: int, rng: np.random.Generator, bound: int = 1 << 20) -> List[Point]:
    """n distinct uniform integer points in [-bound, bound]^2."""
    if bound > COORD_LIMIT:
        raise ValueError("bound exceeds the coordinate limit")
    seen = set()
    points: List[Point] = []
    while len(points) < n:
        xs = rng.integers(-bound, bound + 1, size=2 * (n - len(points)))
        for x, y in zip(xs[0::2], xs[1::2]):
            p = Point(int(x), int(y))
            if p not in seen:
                seen.add(p)
                points.append(p)
                if len(points) == n:
                    break
    return points


def random_convex_points(n: int, rng: np.random.Generator, half_width: int = 1 << 12) -> List[Point]:
    """
    n points in strictly convex position

    Points lie on the two arcs y = x^2 and y = 2w^2 + 1 - x^2, |x| <= w,
    which bound a strictly convex region.
    """
    if n > 2 * half_width + 1:
        raise ValueError("not enough distinct x values for n points")
    xs = rng.choice(np.arange(-half_width, half_width + 1), size=n, replace=False)
    top = 2 * half_width * half_width + 1
    points = []
    for i, x in enumerate(int(v) for v in xs):
        points.append(Point(x, x * x) if i % 2 == 0 else Point(x, top - x * x))
    return points
