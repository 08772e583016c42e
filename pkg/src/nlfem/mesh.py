"""Labeled triangulations of the compact base domain.

A mesh covers the solution domain together with its surrounding volume
constraint layer. Element labels separate the two regions; inactive elements
are carried for graph connectivity only and never integrated. Meshes are
value objects: all arrays are frozen after construction and safe to share
across threads.
"""

import enum
import math

import numpy as np

from .errors import ConfigurationError, MeshFormatError


class Label(enum.IntEnum):
    INACTIVE = 0
    DOMAIN = 1
    DIRICHLET = 2


_VALID_LABELS = frozenset(int(v) for v in Label)


def _signed_areas(vertices, elements):
    p = vertices[elements]
    return 0.5 * (
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    )


class Mesh:
    """Triangulation with per-element region labels.

    vertices is (V, 2) float, elements (K, 3) vertex indices in
    counterclockwise order, labels (K,) values of Label. h is the maximum
    element diameter and is measured from the data; passing it in merely
    cross-checks. delta records the interaction horizon the mesh was built
    for (informational; assembly takes the horizon from the kernel).
    """

    __slots__ = ("vertices", "elements", "labels", "h", "delta", "parse_report")

    def __init__(self, vertices, elements, labels, delta=0.0, h=None, parse_report=None):
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        elements = np.ascontiguousarray(elements, dtype=np.int64)
        labels = np.ascontiguousarray(labels, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise ConfigurationError("vertices must be (V, 2)")
        if elements.ndim != 2 or elements.shape[1] != 3:
            raise ConfigurationError("elements must be (K, 3)")
        if labels.shape != (elements.shape[0],):
            raise ConfigurationError("labels must be (K,)")
        if not np.all(np.isfinite(vertices)):
            raise ConfigurationError("vertex coordinates must be finite")
        if elements.size:
            if elements.min() < 0 or elements.max() >= vertices.shape[0]:
                raise ConfigurationError("element vertex index out of range")
        for lab in np.unique(labels):
            if int(lab) not in _VALID_LABELS:
                raise ConfigurationError(f"unknown element label {int(lab)}")
        if elements.size:
            e = np.sort(elements, axis=1)
            if np.any(e[:, 0] == e[:, 1]) or np.any(e[:, 1] == e[:, 2]):
                raise ConfigurationError("element with repeated vertex")
            areas = _signed_areas(vertices, elements)
            if np.any(areas <= 0.0):
                k = int(np.argmax(areas <= 0.0))
                raise ConfigurationError(
                    f"element {k} has non-positive area; orient counterclockwise"
                )
        measured = self._max_diameter(vertices, elements)
        if h is not None and measured > 0.0 and abs(h - measured) > 1e-12 * measured:
            raise ConfigurationError(
                f"declared h={h} does not match measured diameter {measured}"
            )
        vertices.setflags(write=False)
        elements.setflags(write=False)
        labels.setflags(write=False)
        self.vertices = vertices
        self.elements = elements
        self.labels = labels
        self.h = measured
        self.delta = float(delta)
        self.parse_report = parse_report

    @staticmethod
    def _max_diameter(vertices, elements):
        if elements.size == 0:
            return 0.0
        p = vertices[elements]
        d = 0.0
        for a, b in ((0, 1), (1, 2), (2, 0)):
            e = p[:, a] - p[:, b]
            d = max(d, float(np.max(np.hypot(e[:, 0], e[:, 1]))))
        return d

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    def element_coords(self, k):
        """Vertex coordinates of element k as a (3, 2) array."""
        return self.vertices[self.elements[k]]

    def areas(self):
        """Signed areas of all elements (positive by the CCW invariant)."""
        return _signed_areas(self.vertices, self.elements)


class AdjacencyGraph:
    """Per-element neighbor lists in compressed form.

    Two elements are adjacent when their closures share at least one
    vertex. Neighbor ids are sorted ascending and exclude the element
    itself; the relation is symmetric by construction.
    """

    __slots__ = ("ptr", "idx")

    def __init__(self, ptr, idx):
        self.ptr = np.ascontiguousarray(ptr, dtype=np.int64)
        self.idx = np.ascontiguousarray(idx, dtype=np.int64)
        self.ptr.setflags(write=False)
        self.idx.setflags(write=False)

    @property
    def n_elements(self):
        return self.ptr.shape[0] - 1

    def neighbors(self, k):
        return self.idx[self.ptr[k] : self.ptr[k + 1]]


def build_adjacency_graph(mesh):
    """Vertex-sharing neighbor lists via the vertex-to-element inverse map."""
    K = mesh.n_elements
    V = mesh.n_vertices
    conn = mesh.elements
    # invert: for each vertex, the elements touching it
    counts = np.bincount(conn.ravel(), minlength=V)
    vptr = np.zeros(V + 1, dtype=np.int64)
    np.cumsum(counts, out=vptr[1:])
    vidx = np.empty(3 * K, dtype=np.int64)
    fill = vptr[:-1].copy()
    for k in range(K):
        for c in range(3):
            v = conn[k, c]
            vidx[fill[v]] = k
            fill[v] += 1
    ptr = np.zeros(K + 1, dtype=np.int64)
    chunks = []
    for k in range(K):
        parts = [vidx[vptr[v] : vptr[v + 1]] for v in conn[k]]
        nb = np.unique(np.concatenate(parts))
        nb = nb[nb != k]
        chunks.append(nb)
        ptr[k + 1] = ptr[k] + nb.size
    idx = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    return AdjacencyGraph(ptr, idx)


def generate_structured_mesh(half_width, delta, n_div):
    """Uniform triangulation of the padded square domain.

    The solution domain is the open square (0, half_width)^2; the mesh
    covers [-delta, half_width+delta]^2 on a grid of spacing
    g = half_width/n_div, every cell split into two triangles along the
    bottom-left to top-right diagonal. Cells inside the solution domain
    are labeled Domain, the surrounding layer Dirichlet. delta must be an
    integer multiple of g so the layer is tiled exactly; delta=0 produces
    an all-Domain mesh.
    """
    if not isinstance(n_div, (int, np.integer)) or n_div < 2:
        raise ConfigurationError("n_div must be an integer >= 2")
    if half_width <= 0.0:
        raise ConfigurationError("half_width must be positive")
    if delta < 0.0:
        raise ConfigurationError("delta must be nonnegative")
    g = half_width / n_div
    m = int(round(delta / g))
    if abs(delta - m * g) > 1e-12 * max(delta, g):
        raise ConfigurationError(
            f"delta={delta} is not an integer multiple of the grid spacing {g}"
        )
    N = n_div + 2 * m
    coords = (np.arange(N + 1, dtype=np.float64) - m) * g
    xx, yy = np.meshgrid(coords, coords, indexing="xy")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def node(i, j):
        return j * (N + 1) + i

    elements = np.empty((2 * N * N, 3), dtype=np.int64)
    labels = np.empty(2 * N * N, dtype=np.int64)
    t = 0
    for j in range(N):
        for i in range(N):
            p00 = node(i, j)
            p10 = node(i + 1, j)
            p01 = node(i, j + 1)
            p11 = node(i + 1, j + 1)
            if m <= i < m + n_div and m <= j < m + n_div:
                lab = Label.DOMAIN
            else:
                lab = Label.DIRICHLET
            elements[t] = (p00, p10, p11)
            labels[t] = lab
            elements[t + 1] = (p00, p11, p01)
            labels[t + 1] = lab
            t += 2
    return Mesh(vertices, elements, labels, delta=delta)


def perturb(mesh, amplitude=0.2, seed=0):
    """Randomly displace interior vertices, keeping the mesh valid.

    Vertices on the outer boundary (edges owned by a single element) stay
    fixed. Displacements are uniform in a disk of radius amplitude times
    the shortest mesh edge; the amplitude is halved until every element
    keeps positive area. Labels and connectivity are unchanged. Useful for
    exercising code paths that structured grids leave symmetric.
    """
    edges = {}
    conn = mesh.elements
    for k in range(mesh.n_elements):
        for a, b in ((0, 1), (1, 2), (2, 0)):
            key = (min(conn[k, a], conn[k, b]), max(conn[k, a], conn[k, b]))
            edges[key] = edges.get(key, 0) + 1
    fixed = np.zeros(mesh.n_vertices, dtype=bool)
    emin = math.inf
    for (va, vb), cnt in edges.items():
        if cnt == 1:
            fixed[va] = True
            fixed[vb] = True
        d = mesh.vertices[va] - mesh.vertices[vb]
        emin = min(emin, math.hypot(d[0], d[1]))
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * math.pi, mesh.n_vertices)
    rad = np.sqrt(rng.uniform(0.0, 1.0, mesh.n_vertices))
    disp = np.column_stack([rad * np.cos(theta), rad * np.sin(theta)])
    disp[fixed] = 0.0
    a = amplitude * emin
    for _ in range(20):
        moved = mesh.vertices + a * disp
        if np.all(_signed_areas(moved, conn) > 0.0):
            return Mesh(moved, conn, mesh.labels, delta=mesh.delta)
        a *= 0.5
    raise ConfigurationError("could not perturb mesh without inverting elements")


def write_mesh(mesh, path):
    """Write a mesh in the line-oriented text format."""
    with open(path, "w") as fh:
        fh.write(f"nlmesh 1 {mesh.n_vertices} {mesh.n_elements}\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]!r} {v[1]!r}\n")
        for e, lab in zip(mesh.elements, mesh.labels):
            fh.write(f"{e[0]} {e[1]} {e[2]} {lab}\n")


def read_mesh(path, delta=0.0):
    """Read a mesh written by write_mesh.

    Lines may carry '#' comments. Clockwise triangles are accepted and
    reoriented; their element indices land in parse_report["reoriented"].
    Malformed content raises MeshFormatError naming the offending line.
    """
    content = []
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if text:
                content.append((ln, text))
    if not content:
        raise MeshFormatError("line 1: empty mesh file")
    ln, text = content[0]
    parts = text.split()
    if len(parts) != 4 or parts[0] != "nlmesh" or parts[1] != "1":
        raise MeshFormatError(f"line {ln}: expected header 'nlmesh 1 <n_vertices> <n_elements>'")
    try:
        nv = int(parts[2])
        ne = int(parts[3])
    except ValueError:
        raise MeshFormatError(f"line {ln}: header counts must be integers") from None
    if nv < 0 or ne < 0:
        raise MeshFormatError(f"line {ln}: header counts must be nonnegative")
    if len(content) != 1 + nv + ne:
        if len(content) < 1 + nv + ne:
            raise MeshFormatError(
                f"line {content[-1][0]}: unexpected end of file, "
                f"need {nv} vertex and {ne} element lines"
            )
        ln_extra = content[1 + nv + ne][0]
        raise MeshFormatError(f"line {ln_extra}: unexpected extra content")
    vertices = np.empty((nv, 2), dtype=np.float64)
    for r in range(nv):
        ln, text = content[1 + r]
        parts = text.split()
        if len(parts) != 2:
            raise MeshFormatError(f"line {ln}: expected '<x> <y>'")
        try:
            vertices[r, 0] = float(parts[0])
            vertices[r, 1] = float(parts[1])
        except ValueError:
            raise MeshFormatError(f"line {ln}: invalid vertex coordinate") from None
        if not np.all(np.isfinite(vertices[r])):
            raise MeshFormatError(f"line {ln}: vertex coordinate not finite")
    elements = np.empty((ne, 3), dtype=np.int64)
    labels = np.empty(ne, dtype=np.int64)
    reoriented = []
    for r in range(ne):
        ln, text = content[1 + nv + r]
        parts = text.split()
        if len(parts) != 4:
            raise MeshFormatError(f"line {ln}: expected '<i> <j> <k> <label>'")
        try:
            i, j, k, lab = (int(p) for p in parts)
        except ValueError:
            raise MeshFormatError(f"line {ln}: element entries must be integers") from None
        for v in (i, j, k):
            if v < 0 or v >= nv:
                raise MeshFormatError(f"line {ln}: vertex index {v} out of range")
        if i == j or j == k or i == k:
            raise MeshFormatError(f"line {ln}: repeated vertex in element")
        if lab not in _VALID_LABELS:
            raise MeshFormatError(f"line {ln}: unknown label {lab}")
        p0, p1, p2 = vertices[i], vertices[j], vertices[k]
        area = 0.5 * (
            (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0])
        )
        if area < 0.0:
            j, k = k, j
            reoriented.append(r)
        elif area == 0.0:
            raise MeshFormatError(f"line {ln}: triangle has non-positive area")
        elements[r] = (i, j, k)
        labels[r] = lab
    report = {"reoriented": reoriented}
    return Mesh(vertices, elements, labels, delta=delta, parse_report=report)
