"""Pair classification and truncation of elements to interaction balls.

The assembly loops never intersect two elements directly. They truncate the
inner element against the interaction neighborhood of a single outer
quadrature point, retriangulate the overlap, and integrate over the pieces.
This module exposes that machinery on numpy arrays for tests and user code;
the hot loops use the scalar routines in _geom_scalar without going through
these wrappers.
"""

import enum

import numpy as np

from . import _geom_scalar as _gs
from .errors import ConfigurationError

BALL_KINDS = ("nocaps", "approxcaps", "infinity")
# numeric codes used by the engines
BALL_IDS = {"nocaps": 0, "approxcaps": 1, "infinity": 2}


class PairClass(enum.Enum):
    """Contact type of two elements, by number of shared vertex ids."""

    DISJOINT = 0
    VERTEX_TOUCHING = 1
    EDGE_TOUCHING = 2
    IDENTICAL = 3


def classify_pair(mesh, k, l):
    """Classify the contact of elements k and l of a mesh."""
    conn_k = mesh.elements[k]
    conn_l = mesh.elements[l]
    shared = len(set(int(v) for v in conn_k) & set(int(v) for v in conn_l))
    return PairClass(shared)


def polygon_area(poly):
    """Signed shoelace area of a polygon given as an (n, 2) array."""
    poly = np.asarray(poly, dtype=float)
    if poly.shape[0] < 3:
        return 0.0
    x = poly[:, 0]
    y = poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def clip_triangle_ball(vertices, center, delta, ball="nocaps"):
    """Truncate a convex CCW polygon to the ball around center.

    ball selects the neighborhood shape: "nocaps" is the straight-chord
    polygon inscribed in the euclidean disk of radius delta, "approxcaps"
    additionally places one boundary point behind each chord, "infinity"
    is the axis-aligned square of half width delta. Returns an (n, 2)
    vertex array; n == 0 when the overlap is empty or has no area.
    """
    if ball not in BALL_KINDS:
        raise ConfigurationError(f"ball must be one of {BALL_KINDS}, got {ball!r}")
    if delta <= 0.0:
        raise ConfigurationError("delta must be positive")
    pts = np.ascontiguousarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ConfigurationError("vertices must be an (m, 2) array with m >= 3")
    if polygon_area(pts) <= 0.0:
        raise ConfigurationError("polygon must be counterclockwise with positive area")
    m = pts.shape[0]
    cx = float(center[0])
    cy = float(center[1])
    cap = 3 * m + 8
    if ball == "infinity":
        buf = np.empty((cap, 2))
        out = np.empty((cap, 2))
        n = _gs.clip_square(pts, m, cx, cy, float(delta), buf, out)
        return out[:n].copy()
    out = np.empty((cap, 3))
    n = _gs.clip_circle(pts, m, cx, cy, float(delta), out)
    if ball == "nocaps":
        if n < 3:
            return np.zeros((0, 2))
        return out[:n, :2].copy()
    out2 = np.empty((2 * cap, 2))
    n2 = _gs.insert_caps(pts, m, out, n, cx, cy, float(delta), out2)
    if n2 < 3:
        return np.zeros((0, 2))
    return out2[:n2].copy()


def intersect_nocaps(triangle, center, delta):
    """Chord polygon of a triangle and the euclidean delta-ball of center.

    The polygon is the convex hull of the triangle vertices inside the
    closed ball and the edge-circle crossing points, which understates the
    true overlap by the circular caps behind each chord.
    """
    return clip_triangle_ball(triangle, center, delta, ball="nocaps")


def intersect_approxcaps(triangle, center, delta):
    """Like intersect_nocaps but with one arc midpoint added per cap."""
    return clip_triangle_ball(triangle, center, delta, ball="approxcaps")


def intersect_infinity(triangle, center, delta):
    """Exact clip of a triangle against the square of half width delta."""
    return clip_triangle_ball(triangle, center, delta, ball="infinity")


def fan_triangulate(poly, drop_below=0.0):
    """Split a convex polygon into a triangle fan anchored at vertex 0.

    Triangles with signed area <= drop_below are dropped, which with the
    default also removes degenerate slivers produced by clipping. Returns
    a (t, 3, 2) array.
    """
    poly = np.asarray(poly, dtype=float)
    n = poly.shape[0]
    if n < 3:
        return np.zeros((0, 3, 2))
    tris = []
    for i in range(1, n - 1):
        a = poly[0]
        b = poly[i]
        c = poly[i + 1]
        area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
        if area > drop_below:
            tris.append((a, b, c))
    if not tris:
        return np.zeros((0, 3, 2))
    return np.array(tris)
