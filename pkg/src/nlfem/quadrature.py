"""Quadrature rules and the integration-path dispatch.

Three ingredients live here. Plain triangle and interval rules drive the
regular (non-touching) pair integrals. Tensorized rules with a built-in
variable transform handle pairs of elements that share a vertex, an edge, or
coincide; these remove the weak singularity along x = y analytically, so the
integrand seen by the quadrature points is smooth. Finally, the path
selector decides per pair class and kernel exponent which treatment runs.
"""

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError
from .geometry import PairClass

TRIANGLE_RULES = ("7point",)
WEAK_SINGULAR_MODES = ("avoid", "transform")


class Path(enum.Enum):
    """How a pair of elements is integrated."""

    STANDARD = "standard"
    AVOID_DIAGONAL = "avoid-diagonal"
    REGULARIZING = "regularizing"


@dataclass(frozen=True)
class QuadratureConfig:
    """Quadrature choices for assembly.

    outer and inner name the triangle rule used for the outer element and
    the retriangulated inner pieces. gauss_points_1d sets the per-axis order
    of both the interval rule and the tensorized singular rules.
    weak_singular picks the treatment for touching pairs with exponent in
    (-1, 0]: "avoid" skips the diagonal, "transform" uses the singular rules.
    """

    outer: str = "7point"
    inner: str = "7point"
    gauss_points_1d: int = 5
    weak_singular: str = "avoid"

    def __post_init__(self):
        if self.outer not in TRIANGLE_RULES:
            raise ConfigurationError(f"unknown triangle rule {self.outer!r}")
        if self.inner not in TRIANGLE_RULES:
            raise ConfigurationError(f"unknown triangle rule {self.inner!r}")
        if not isinstance(self.gauss_points_1d, int) or self.gauss_points_1d < 2:
            raise ConfigurationError("gauss_points_1d must be an integer >= 2")
        if self.weak_singular not in WEAK_SINGULAR_MODES:
            raise ConfigurationError(
                f"weak_singular must be one of {WEAK_SINGULAR_MODES}, got {self.weak_singular!r}"
            )

    @property
    def outer_rule(self):
        return triangle_rule(self.outer)

    @property
    def inner_rule(self):
        return triangle_rule(self.inner)


def dispatch(s, pair_class, weak_singular="avoid"):
    """Pick the integration path for one element pair.

    Disjoint pairs always take the standard path. Touching pairs switch on
    the kernel exponent s: bounded kernels (s <= -1) need nothing special,
    integrable singularities in (-1, 0] default to skipping the diagonal
    (override via weak_singular="transform"), and weak singularities in
    (0, 1) require the transformed rules. Exponents >= 1 are outside the
    validity range of the bilinear form.
    """
    if s >= 1.0:
        raise ConfigurationError(f"kernel exponent s={s} is not below 1")
    if pair_class is PairClass.DISJOINT:
        return Path.STANDARD
    if s <= -1.0:
        return Path.STANDARD
    if s <= 0.0:
        if weak_singular == "transform":
            return Path.REGULARIZING
        return Path.AVOID_DIAGONAL
    return Path.REGULARIZING


def rule_7point():
    """Degree-3 rule on the reference triangle (0,0), (1,0), (0,1).

    Barycenter, corners, and edge midpoints; weights sum to the reference
    area 1/2.
    """
    pts = np.array(
        [
            [1.0 / 3.0, 1.0 / 3.0],
            [0.0, 0.0],
            [1.0, 0.0],
            [0.0, 1.0],
            [0.5, 0.0],
            [0.5, 0.5],
            [0.0, 0.5],
        ]
    )
    w = np.array([27.0, 3.0, 3.0, 3.0, 8.0, 8.0, 8.0]) / 120.0
    pts.setflags(write=False)
    w.setflags(write=False)
    return pts, w


def triangle_rule(name):
    if name == "7point":
        return rule_7point()
    raise ConfigurationError(f"unknown triangle rule {name!r}")


def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on (0, 1)."""
    if n < 1:
        raise ConfigurationError("gauss_legendre needs n >= 1")
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (t + 1.0), 0.5 * w


def _hats(p):
    """Evaluate the three reference hat functions at points p (N, 2)."""
    h = np.empty((p.shape[0], 3))
    h[:, 0] = 1.0 - p[:, 0] - p[:, 1]
    h[:, 1] = p[:, 0]
    h[:, 2] = p[:, 1]
    return h


class TensorizedSingularRule:
    """Point pairs and weights integrating over two reference triangles.

    xs and ys are (N, 2) points in the reference triangle, w the (N,)
    weights including all transform Jacobians; summing w f(xs, ys) over the
    rule approximates the double integral of f over the product of the two
    reference triangles. hx and hy carry the hat function values at xs and
    ys so callers avoid re-evaluating them per pair.
    """

    __slots__ = ("kind", "xs", "ys", "w", "hx", "hy")

    def __init__(self, kind, xs, ys, w):
        self.kind = kind
        self.xs = xs
        self.ys = ys
        self.w = w
        self.hx = _hats(xs)
        self.hy = _hats(ys)
        for a in (self.xs, self.ys, self.w, self.hx, self.hy):
            a.setflags(write=False)


def _identical_maps(g, gw):
    n = g.size
    xi, e1, t1, t2 = np.meshgrid(g, g, g, g, indexing="ij")
    wxi, we1, wt1, wt2 = np.meshgrid(gw, gw, gw, gw, indexing="ij")
    base_w = (wxi * we1 * wt1 * wt2 * xi * (1.0 - xi) ** 2 * t1).ravel()
    xt0 = (t1 * (1.0 - t2)).ravel()
    xt1 = (t1 * t2).ravel()
    xi = xi.ravel()
    e1 = e1.ravel()
    xs = np.empty((6 * n**4, 2))
    ys = np.empty((6 * n**4, 2))
    w = np.empty(6 * n**4)
    m = n**4
    # three difference directions, each with its mirrored copy
    for i in range(3):
        if i == 0:
            ox0 = np.zeros_like(xi)
            ox1 = np.zeros_like(xi)
            dz0 = 1.0 - e1
            dz1 = e1
        elif i == 1:
            ox0 = xi * e1
            ox1 = np.zeros_like(xi)
            dz0 = -e1
            dz1 = np.ones_like(xi)
        else:
            ox0 = xi
            ox1 = np.zeros_like(xi)
            dz0 = -np.ones_like(xi)
            dz1 = 1.0 - e1
        x0 = ox0 + (1.0 - xi) * xt0
        x1 = ox1 + (1.0 - xi) * xt1
        y0 = x0 + xi * dz0
        y1 = x1 + xi * dz1
        a = 2 * i * m
        b = a + m
        xs[a:b, 0] = x0
        xs[a:b, 1] = x1
        ys[a:b, 0] = y0
        ys[a:b, 1] = y1
        w[a:b] = base_w
        # swapped copy
        xs[b : b + m, 0] = y0
        xs[b : b + m, 1] = y1
        ys[b : b + m, 0] = x0
        ys[b : b + m, 1] = x1
        w[b : b + m] = base_w
    return xs, ys, w


def _edge_maps(g, gw):
    n = g.size
    xi, h1, h2, h3 = np.meshgrid(g, g, g, g, indexing="ij")
    w4 = np.meshgrid(gw, gw, gw, gw, indexing="ij")
    wall = (w4[0] * w4[1] * w4[2] * w4[3]).ravel()
    xi = xi.ravel()
    h1 = h1.ravel()
    h2 = h2.ravel()
    h3 = h3.ravel()
    m = n**4
    xs = np.empty((6 * m, 2))
    ys = np.empty((6 * m, 2))
    w = np.empty(6 * m)
    shift = (1.0 - xi) * h3
    for i in range(3):
        if i == 0:
            x0 = shift
            x1 = xi * h1 * (1.0 - h2)
            y0 = shift + xi * (1.0 - h1)
            y1 = xi * h1
            ww = wall * xi**2 * h1 * (1.0 - xi)
        elif i == 1:
            x0 = shift
            x1 = xi * (h1 + (1.0 - h1) * h2)
            y0 = shift + xi * (1.0 - h1)
            y1 = xi * h1
            ww = wall * xi**2 * (1.0 - h1) * (1.0 - xi)
        else:
            x0 = shift
            x1 = xi + 0.0 * h1
            y0 = shift + xi * (1.0 - h1) * h2
            y1 = xi * h1
            ww = wall * xi**2 * (1.0 - h1) * (1.0 - xi)
        a = 2 * i * m
        b = a + m
        xs[a:b, 0] = x0
        xs[a:b, 1] = x1
        ys[a:b, 0] = y0
        ys[a:b, 1] = y1
        w[a:b] = ww
        xs[b : b + m, 0] = y0
        xs[b : b + m, 1] = y1
        ys[b : b + m, 0] = x0
        ys[b : b + m, 1] = x1
        w[b : b + m] = ww
    return xs, ys, w


def _vertex_maps(g, gw):
    n = g.size
    xi, h1, h2, h3 = np.meshgrid(g, g, g, g, indexing="ij")
    w4 = np.meshgrid(gw, gw, gw, gw, indexing="ij")
    wall = (w4[0] * w4[1] * w4[2] * w4[3]).ravel()
    xi = xi.ravel()
    h1 = h1.ravel()
    h2 = h2.ravel()
    h3 = h3.ravel()
    m = n**4
    xs = np.empty((2 * m, 2))
    ys = np.empty((2 * m, 2))
    w = np.empty(2 * m)
    x0 = xi * (1.0 - h1)
    x1 = xi * h1
    y0 = xi * h2 * (1.0 - h3)
    y1 = xi * h2 * h3
    ww = wall * xi**3 * h2
    xs[:m, 0] = x0
    xs[:m, 1] = x1
    ys[:m, 0] = y0
    ys[:m, 1] = y1
    w[:m] = ww
    xs[m:, 0] = y0
    xs[m:, 1] = y1
    ys[m:, 0] = x0
    ys[m:, 1] = x1
    w[m:] = ww
    return xs, ys, w


@lru_cache(maxsize=None)
def singular_rule(kind, n_1d):
    """Build the tensorized rule for one touching-pair class.

    kind is "identical", "edge", or "vertex". n_1d is the Gauss order per
    tensor axis, so the rule has 6 n^4 points for identical and edge pairs
    and 2 n^4 for vertex pairs. The weights of each family sum to 1/4, the
    product measure of two reference triangles.
    """
    if n_1d < 2:
        raise ConfigurationError("singular rules need at least 2 Gauss points per axis")
    g, gw = gauss_legendre(n_1d)
    if kind == "identical":
        xs, ys, w = _identical_maps(g, gw)
    elif kind == "edge":
        xs, ys, w = _edge_maps(g, gw)
    elif kind == "vertex":
        xs, ys, w = _vertex_maps(g, gw)
    else:
        raise ConfigurationError(f"unknown singular rule kind {kind!r}")
    return TensorizedSingularRule(kind, xs, ys, w)
