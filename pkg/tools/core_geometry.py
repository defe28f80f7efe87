"""
Core Geometry
Exact planar predicates over integer points and the three symbolic points
of the far-away triangle K = {(-k,-k), (-k,k), (k,0)}. Predicates involving
K are evaluated in the limit k -> infinity: the determinant is built as a
polynomial in k and its sign is the sign of the leading nonzero coefficient.
"""

from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Tuple, Union

from tools.workspace_harness import DegenerateInput

# |x|, |y| <= 2^26 keeps orient within ~80 bits and incircle within ~110 bits
COORD_LIMIT = 1 << 26


class CollinearSites(DegenerateInput):
    """Three sites with no circumcircle."""


class Point(NamedTuple):
    """Exact integer point; tuple order gives the (x, y) lexicographic key."""

    x: int
    y: int


class KPoint(Enum):
    """Symbolic corners of the bounding triangle K."""

    K1 = -3
    K2 = -2
    K3 = -1

    @property
    def site_id(self) -> int:
        return self.value


SitePoint = Union[Point, KPoint]


class Circumcenter(NamedTuple):
    cx: Fraction
    cy: Fraction


def in_coordinate_range(x: int, y: int) -> bool:
    return -COORD_LIMIT <= x <= COORD_LIMIT and -COORD_LIMIT <= y <= COORD_LIMIT


class KPoly:
    """Integer polynomial in k, coefficients stored lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = list(coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coeffs = tuple(coeffs)

    @staticmethod
    def lift(v) -> "KPoly":
        return v if isinstance(v, KPoly) else KPoly((v,))

    def __add__(self, other):
        o = KPoly.lift(other).coeffs
        a = self.coeffs
        n = max(len(a), len(o))
        return KPoly((a[i] if i < len(a) else 0) + (o[i] if i < len(o) else 0)
                     for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return KPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-KPoly.lift(other))

    def __rsub__(self, other):
        return KPoly.lift(other) + (-self)

    def __mul__(self, other):
        o = KPoly.lift(other).coeffs
        a = self.coeffs
        if not a or not o:
            return KPoly(())
        out = [0] * (len(a) + len(o) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(o):
                    out[i + j] += ca * cb
        return KPoly(out)

    __rmul__ = __mul__

    def sign(self) -> int:
        """Sign as k -> infinity."""
        if not self.coeffs:
            return 0
        return 1 if self.coeffs[-1] > 0 else -1

    def __repr__(self) -> str:
        return f"KPoly{self.coeffs}"


_KAPPA = KPoly((0, 1))
_K_COORDS = {
    KPoint.K1: (-_KAPPA, -_KAPPA),
    KPoint.K2: (-_KAPPA, _KAPPA),
    KPoint.K3: (_KAPPA, KPoly(())),
}
# infinitesimal secondary displacement of each corner, breaks orient ties
_K_OFFSETS = {
    KPoint.K1: (0, -1),
    KPoint.K2: (0, 1),
    KPoint.K3: (0, 1),
}


def _sgn(v) -> int:
    if isinstance(v, KPoly):
        return v.sign()
    return (v > 0) - (v < 0)


def _coords(p: SitePoint):
    if isinstance(p, KPoint):
        return _K_COORDS[p]
    return p


def orient_value(a: SitePoint, b: SitePoint, c: SitePoint):
    """Twice the signed area of abc (an int, or a KPoly when K is involved)."""
    ax, ay = _coords(a)
    bx, by = _coords(b)
    cx, cy = _coords(c)
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def orient(a: SitePoint, b: SitePoint, c: SitePoint) -> int:
    """+1 if abc turns counterclockwise, -1 clockwise, 0 collinear."""
    if type(a) is Point and type(b) is Point and type(c) is Point:
        d = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (d > 0) - (d < 0)
    sign = _sgn(orient_value(a, b, c))
    if sign:
        return sign
    # one K corner collinear with two finite points: nudge it along its offset
    for first, second, third in ((a, b, c), (b, c, a), (c, a, b)):
        if isinstance(first, KPoint):
            ux, uy = _K_OFFSETS[first]
            bx, by = _coords(second)
            cx, cy = _coords(third)
            return _sgn(ux * (by - cy) - uy * (bx - cx))
    return 0


def incircle(a: SitePoint, b: SitePoint, c: SitePoint, d: SitePoint) -> int:
    """
    Position of d against the circle through counterclockwise a, b, c

    Returns:
        +1 strictly inside, 0 on the circle, -1 outside
    """
    ax, ay = _coords(a)
    bx, by = _coords(b)
    cx, cy = _coords(c)
    dx, dy = _coords(d)
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = (alift * (bdx * cdy - cdx * bdy)
           + blift * (cdx * ady - adx * cdy)
           + clift * (adx * bdy - bdx * ady))
    return _sgn(det)


def circumcenter(a: Point, b: Point, c: Point) -> Circumcenter:
    """
    Exact circumcenter of three finite points

    Raises:
        CollinearSites: a, b, c are collinear
    """
    X, Y, W = homogeneous_circumcenter(a, b, c)
    if W == 0:
        raise CollinearSites(f"collinear sites {a}, {b}, {c}")
    return Circumcenter(Fraction(X, W), Fraction(Y, W))


def homogeneous_circumcenter(a: SitePoint, b: SitePoint, c: SitePoint):
    """Circumcenter as (X, Y, W) with center (X/W, Y/W); W = 2 * orient determinant."""
    ax, ay = _coords(a)
    bx, by = _coords(b)
    cx, cy = _coords(c)
    la = ax * ax + ay * ay
    lb = bx * bx + by * by
    lc = cx * cx + cy * cy
    w = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    x = la * (by - cy) + lb * (cy - ay) + lc * (ay - by)
    y = la * (cx - bx) + lb * (ax - cx) + lc * (bx - ax)
    return x, y, w


def homogeneous_point(p: SitePoint) -> Tuple:
    x, y = _coords(p)
    return x, y, 1


def orient_homogeneous(p, q, r) -> int:
    """orient() for points given as (X, Y, W) triples with W != 0."""
    xp, yp, wp = p
    xq, yq, wq = q
    xr, yr, wr = r
    det = (xp * (yq * wr - wq * yr)
           - yp * (xq * wr - wq * xr)
           + wp * (xq * yr - yq * xr))
    return _sgn(det) * _sgn(wp) * _sgn(wq) * _sgn(wr)


def squared_distance(a: Point, b) -> Fraction:
    """Squared distance between a finite point and a point or Circumcenter."""
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return dx * dx + dy * dy


def site_id_of(p: SitePoint, index: int) -> int:
    return p.site_id if isinstance(p, KPoint) else index


def incircle_perturbed(a: SitePoint, b: SitePoint, c: SitePoint, d: SitePoint,
                       ids: Tuple[int, int, int, int]) -> int:
    """
    incircle() that never returns 0

    Cocircular ties are broken by lowering each lifted point by an
    infinitesimal that shrinks with its id, so the smallest id decides
    first. The K corners carry the smallest ids. Any tie left unresolved
    counts as outside.

    Args:
        a, b, c: counterclockwise triangle
        d: query site
        ids: site ids of a, b, c, d
    """
    det = incircle(a, b, c, d)
    if det:
        return det
    coefficients = (
        lambda: orient(d, c, b),
        lambda: orient(d, a, c),
        lambda: orient(d, b, a),
        lambda: orient(a, b, c),
    )
    for slot in sorted(range(4), key=lambda i: ids[i]):
        sign = coefficients[slot]()
        if sign:
            return sign
    return -1
