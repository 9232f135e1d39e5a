"""Lebedev quadrature grids on the unit sphere.

The node sets are generated from the embedded octahedral-symmetry
parameters in ``_lebedev_rules`` (the published Lebedev-Laikov values).
Weights are stored pre-multiplied by 4*pi so that ``sum(weights) = 4*pi``
and ``sum_n w_n f(s_n)`` approximates the surface integral of ``f``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._lebedev_rules import _RULES
from .errors import ConfigurationError

SUPPORTED_SIZES = tuple(sorted(_RULES))

# Algebraic order of exactness per rule size (Lebedev-Laikov sequence).
ALGEBRAIC_ORDER = {
    6: 3, 14: 5, 26: 7, 38: 9, 50: 11, 74: 13, 86: 15, 110: 17,
    146: 19, 170: 21, 194: 23, 230: 25, 266: 27, 302: 29, 350: 31,
    434: 35, 590: 41, 770: 47,
}


@dataclass(frozen=True)
class LebedevGrid:
    """A spherical quadrature rule: unit directions and positive weights."""

    n_points: int
    directions: np.ndarray  # (n_points, 3), unit vectors
    weights: np.ndarray     # (n_points,), sums to 4*pi
    order: int              # algebraic order of exactness

    def __post_init__(self):
        self.directions.setflags(write=False)
        self.weights.setflags(write=False)


def _gen_oh(code, a, b, v):
    """Expand one octahedral-symmetry generator record into points.

    ``code`` selects the point class: 0 vertices (6), 1 edge midpoints
    (12), 2 face centers (8), 3 (a,a,b)-type (24), 4 (a,b,0)-type (24),
    5 (a,b,c)-type (48).
    """
    if code == 0:
        a = 1.0
        pts = [(a, 0, 0), (-a, 0, 0), (0, a, 0), (0, -a, 0), (0, 0, a), (0, 0, -a)]
    elif code == 1:
        a = np.sqrt(0.5)
        pts = [(0, s1 * a, s2 * a) for s1 in (1, -1) for s2 in (1, -1)]
        pts += [(s1 * a, 0, s2 * a) for s1 in (1, -1) for s2 in (1, -1)]
        pts += [(s1 * a, s2 * a, 0) for s1 in (1, -1) for s2 in (1, -1)]
    elif code == 2:
        a = np.sqrt(1.0 / 3.0)
        pts = [(s1 * a, s2 * a, s3 * a)
               for s1 in (1, -1) for s2 in (1, -1) for s3 in (1, -1)]
    elif code == 3:
        b = np.sqrt(1.0 - 2.0 * a * a)
        pts = []
        for (x, y, z) in ((a, a, b), (a, b, a), (b, a, a)):
            pts += [(s1 * x, s2 * y, s3 * z)
                    for s3 in (1, -1) for s1 in (1, -1) for s2 in (1, -1)]
    elif code == 4:
        b = np.sqrt(1.0 - a * a)
        pts = []
        for (x, y) in ((a, b), (b, a)):
            pts += [(s1 * x, s2 * y, 0) for s1 in (1, -1) for s2 in (1, -1)]
        for (x, z) in ((a, b), (b, a)):
            pts += [(s1 * x, 0, s2 * z) for s1 in (1, -1) for s2 in (1, -1)]
        for (y, z) in ((a, b), (b, a)):
            pts += [(0, s1 * y, s2 * z) for s1 in (1, -1) for s2 in (1, -1)]
    elif code == 5:
        c = np.sqrt(1.0 - a * a - b * b)
        pts = []
        for (x, y, z) in ((a, b, c), (a, c, b), (b, a, c),
                          (b, c, a), (c, a, b), (c, b, a)):
            pts += [(s1 * x, s2 * y, s3 * z)
                    for s3 in (1, -1) for s1 in (1, -1) for s2 in (1, -1)]
    else:  # pragma: no cover - table is fixed
        raise ValueError(f"unknown generator code {code}")
    pts = np.asarray(pts, dtype=np.float64)
    return pts, np.full(len(pts), v, dtype=np.float64)


@lru_cache(maxsize=None)
def lebedev(n_points):
    """Return the Lebedev grid with ``n_points`` nodes.

    Raises
    ------
    ConfigurationError
        If ``n_points`` is not one of the supported rule sizes.
    """
    if n_points not in _RULES:
        raise ConfigurationError(
            f"unsupported Lebedev grid size {n_points}; "
            f"supported sizes: {list(SUPPORTED_SIZES)}"
        )
    dirs = []
    wts = []
    for code, a, b, v in _RULES[n_points]:
        p, w = _gen_oh(code, a, b, v)
        dirs.append(p)
        wts.append(w)
    directions = np.vstack(dirs)
    weights = np.concatenate(wts) * (4.0 * np.pi)
    if directions.shape[0] != n_points:  # pragma: no cover - table is fixed
        raise AssertionError("generator table inconsistent")
    return LebedevGrid(n_points, directions, weights, ALGEBRAIC_ORDER[n_points])
