"""
cwgeom Utilities Package
Contains run configuration, input parsing and instance generators
"""

from .config import RunConfig
from .helpers import (
    ceil_div,
    ceil_log2,
    parse_points,
    random_convex_points,
    random_points,
    read_points_file,
    write_points_file
)

__all__ = [
    'RunConfig',
    'ceil_div',
    'ceil_log2',
    'parse_points',
    'random_convex_points',
    'random_points',
    'read_points_file',
    'write_points_file'
]
