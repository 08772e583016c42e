"""Global assembly of nonlocal stiffness matrices, load vectors, and mass
matrices.

The stiffness matrix is assembled by traversing, for every outer element,
its interaction neighborhood (breadth-first over the adjacency graph, or
exhaustively for cross-checking) and accumulating per-pair local blocks as
triplets. Triplets are merged in a canonical order, which makes the result
independent of thread count and of the traversal that produced them,
bit for bit.

Built-in kernels run through the compiled engine; kernels carrying a user
callable run through the interpreted twin with identical semantics.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import _engine, _pyengine
from ._pyengine import _pair_frames, _union_tables
from .errors import ConfigurationError, MeshFormatError, NumericalError
from .geometry import BALL_IDS, PairClass, clip_triangle_ball, fan_triangulate
from .kernels import KernelSpec
from .mesh import Label, Mesh
from .quadrature import Path, QuadratureConfig, dispatch, singular_rule

_CHUNK = 64

# jac2 (= twice the subtriangle area) below this h-relative factor is noise
# from nearly collinear clip output and is dropped before quadrature
_DROP_REL = 2e-14
# point pairs closer than this h-relative distance are skipped on the
# diagonal-avoiding path
_SKIP_REL = 1e-13


@dataclass(frozen=True)
class AnsatzSpace:
    """Piecewise-linear ansatz space on a labeled mesh.

    kind is "cg" (vertex-shared dofs) or "dg" (element-private dofs), n the
    number of output components. dof_map holds the scalar global base of
    each element-local basis function; the dof of component c is
    n * base + c. free_mask marks unconstrained dofs: for "cg" a node is
    free iff it touches a Domain element and no Dirichlet element, for "dg"
    iff its host element is Domain.
    """

    kind: str
    n: int
    dof_map: np.ndarray
    dof_count: int
    free_mask: np.ndarray


def build_ansatz(mesh, kind="cg", n=1):
    """Build the CG or DG ansatz space of n components over the mesh."""
    kind = str(kind).lower()
    if kind not in ("cg", "dg"):
        raise ConfigurationError(f"unknown ansatz kind {kind!r}, expected 'cg' or 'dg'")
    if n not in (1, 2):
        raise ConfigurationError(f"ansatz output dimension must be 1 or 2, got {n}")
    K = mesh.n_elements
    if kind == "cg":
        nbase = mesh.n_vertices
        dof_map = mesh.elements.astype(np.int64)
        base_free = np.zeros(nbase, dtype=bool)
        base_free[np.unique(mesh.elements[mesh.labels == Label.DOMAIN])] = True
        base_free[np.unique(mesh.elements[mesh.labels == Label.DIRICHLET])] = False
    else:
        nbase = 3 * K
        dof_map = np.arange(3 * K, dtype=np.int64).reshape(K, 3)
        base_free = np.repeat(mesh.labels == Label.DOMAIN, 3)
    free_mask = np.repeat(base_free, n)
    return AnsatzSpace(kind=kind, n=n, dof_map=dof_map,
                       dof_count=n * nbase, free_mask=free_mask)


@dataclass(frozen=True)
class SparseSystem:
    """Assembled stiffness matrix over all dofs plus the free-dof mask."""

    matrix: sparse.csr_matrix
    free_mask: np.ndarray

    @property
    def row_ptr(self):
        return self.matrix.indptr

    @property
    def col_idx(self):
        return self.matrix.indices

    @property
    def values(self):
        return self.matrix.data

    def split(self):
        """Free-by-free and free-by-constrained column blocks."""
        free = np.flatnonzero(self.free_mask)
        cons = np.flatnonzero(~self.free_mask)
        rows = self.matrix[free]
        return rows[:, free], rows[:, cons]


@dataclass(frozen=True)
class LocalStiffness:
    """Dense local block with the global dofs its rows and columns hit.

    Row/column dofs may repeat for CG touching pairs on the standard
    paths, where the block is laid out per element side.
    """

    block: np.ndarray
    rows: np.ndarray
    cols: np.ndarray


def _quad_arrays(quad):
    op, ow = quad.outer_rule
    ip, iw = quad.inner_rule
    oh = np.column_stack([1.0 - op[:, 0] - op[:, 1], op[:, 0], op[:, 1]])
    return op, ow, oh, ip, iw


def _element_bounds(mesh):
    coords = mesh.vertices[mesh.elements]
    centers = coords.mean(axis=1)
    radii = np.sqrt(((coords - centers[:, None, :]) ** 2).sum(axis=2)).max(axis=1)
    return np.ascontiguousarray(centers), radii


def _merge_triplets(buffers, J, K):
    """Canonical triplet reduction into one CSR matrix.

    Per buffer, entries are ordered by (row, column, visited element) with
    ties kept in emission order, then summed; buffer partials are
    concatenated in buffer order and summed the same way. Every stage is a
    stable sort plus a left-to-right reduction, so the result depends only
    on the triplet content of each buffer, not on thread scheduling or on
    which traversal produced the triplets.
    """
    keys = []
    vals = []
    for rows, cols, lks, vv in buffers:
        if rows.size == 0:
            continue
        key_rc = rows * J + cols
        order = np.argsort(key_rc * K + lks, kind="stable")
        krc = key_rc[order]
        sv = vv[order]
        starts = np.flatnonzero(np.r_[True, krc[1:] != krc[:-1]])
        keys.append(krc[starts])
        vals.append(np.add.reduceat(sv, starts))
    if not keys:
        return sparse.csr_matrix((J, J))
    allk = np.concatenate(keys)
    allv = np.concatenate(vals)
    order = np.argsort(allk, kind="stable")
    ks = allk[order]
    vs = allv[order]
    starts = np.flatnonzero(np.r_[True, ks[1:] != ks[:-1]])
    uk = ks[starts]
    sums = np.add.reduceat(vs, starts)
    rows = uk // J
    counts = np.bincount(rows, minlength=J)
    indptr = np.zeros(J + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return sparse.csr_matrix((sums, uk % J, indptr), shape=(J, J))


def merge_buffers(buffers, ansatz, n_elements):
    """Merge per-worker triplet buffers into a SparseSystem.

    buffers is a sequence of (rows, cols, visited_keys, values) tuples in
    partition order; the reduction is deterministic regardless of how many
    workers produced them.
    """
    matrix = _merge_triplets(buffers, ansatz.dof_count, n_elements)
    return SparseSystem(matrix=matrix, free_mask=ansatz.free_mask.copy())


def _touch_path(kernel, ansatz, quad):
    path = dispatch(kernel.s, PairClass.IDENTICAL, quad.weak_singular)
    if ansatz.kind == "dg" and kernel.s > 0.5:
        raise ConfigurationError(
            "the transformed singular rule needs a continuous ansatz for s > 0.5; "
            f"got a DG ansatz with s = {kernel.s}")
    return {Path.STANDARD: 0, Path.AVOID_DIAGONAL: 1, Path.REGULARIZING: 2}[path]


def _writable(arr, dtype):
    return np.array(arr, dtype=dtype, order="C", copy=True)


def bfs_assemble(mesh, adjacency, kernel, ansatz, quad=None, n_threads=1,
                 rows="all", traversal="bfs"):
    """Assemble the full stiffness matrix over all dofs.

    rows="all" assembles every non-Inactive outer element so the complete
    matrix (and its symmetry) is available; rows="domain" restricts outer
    elements to Domain labels, which leaves all rows of free dofs intact at
    roughly the cost of the interior. traversal="brute" replaces the
    breadth-first neighborhood walk by an exhaustive scan over all element
    pairs; the result is bitwise identical when the adjacency graph
    connects each interaction neighborhood.
    """
    if quad is None:
        quad = QuadratureConfig()
    if not isinstance(kernel, KernelSpec):
        raise ConfigurationError("kernel must be a KernelSpec")
    if kernel.n != ansatz.n:
        raise ConfigurationError(
            f"kernel has {kernel.n} output component(s) but the ansatz has {ansatz.n}")
    if rows not in ("all", "domain"):
        raise ConfigurationError(f"rows must be 'all' or 'domain', got {rows!r}")
    if traversal not in ("bfs", "brute"):
        raise ConfigurationError(f"traversal must be 'bfs' or 'brute', got {traversal!r}")
    if not isinstance(n_threads, int) or n_threads < 1:
        raise ConfigurationError(f"n_threads must be a positive integer, got {n_threads!r}")
    if adjacency.n_elements != mesh.n_elements:
        raise ConfigurationError("adjacency graph does not match the mesh")
    path_touch = _touch_path(kernel, ansatz, quad)

    K = mesh.n_elements
    nc = ansatz.n
    centers, radii = _element_bounds(mesh)
    if rows == "domain":
        outer = mesh.labels == Label.DOMAIN
    else:
        outer = mesh.labels != Label.INACTIVE
    op, ow, oh, ip, iw = _quad_arrays(quad)
    rules = {kind: singular_rule(kind, quad.gauss_points_1d)
             for kind in ("identical", "edge", "vertex")}
    h = mesh.h
    rskip2 = (_SKIP_REL * h) ** 2
    drop2 = _DROP_REL * h * h
    ball_id = BALL_IDS[kernel.ball]
    brute = 1 if traversal == "brute" else 0

    spans = [(k0, min(k0 + _CHUNK, K)) for k0 in range(0, K, _CHUNK)]
    if kernel.builtin_id >= 0:
        # one writable, C-contiguous signature keeps a single compiled
        # specialization alive across calls
        args = (_writable(mesh.vertices, np.float64), _writable(mesh.elements, np.int64),
                _writable(mesh.labels, np.int64), _writable(adjacency.ptr, np.int64),
                _writable(adjacency.idx, np.int64), _writable(centers, np.float64),
                _writable(radii, np.float64), _writable(outer, np.int64),
                nc, 1 if ansatz.kind == "dg" else 0, kernel.builtin_id,
                float(kernel.s), float(kernel.scale), float(kernel.delta),
                ball_id, path_touch, rskip2, drop2,
                _writable(ansatz.dof_map, np.int64),
                _writable(op, np.float64), _writable(ow, np.float64),
                _writable(oh, np.float64), _writable(ip, np.float64),
                _writable(iw, np.float64))
        sargs = ()
        for kind in ("identical", "edge", "vertex"):
            r = rules[kind]
            sargs = sargs + tuple(_writable(a, np.float64)
                                  for a in (r.xs, r.ys, r.w, r.hx, r.hy))

        def worker(span):
            return _engine._chunk(span[0], span[1], brute, *args, *sargs)
    else:
        pyargs = (mesh.vertices, mesh.elements, mesh.labels.astype(np.int64),
                  adjacency.ptr, adjacency.idx, centers, radii,
                  outer.astype(np.int64), nc, 1 if ansatz.kind == "dg" else 0,
                  kernel.value, kernel.symmetric, float(kernel.delta), ball_id,
                  path_touch, rskip2, drop2, ansatz.dof_map,
                  op, ow, oh, ip, iw, rules)

        def worker(span):
            return _pyengine.chunk(span[0], span[1], brute, *pyargs)

    if n_threads == 1:
        results = [worker(span) for span in spans]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as ex:
            results = list(ex.map(worker, spans))

    for (k0, k1), res in zip(spans, results):
        if res[5]:
            raise NumericalError(
                f"nonfinite local contribution for element pair ({res[6]}, {res[7]})")

    if traversal == "bfs":
        visited = np.concatenate([res[4] for res in results])
        _check_connectivity(centers, radii, mesh.labels, outer, kernel.delta, visited)

    buffers = [(res[0], res[1], res[2], res[3]) for res in results]
    matrix = _merge_triplets(buffers, ansatz.dof_count, K)
    return SparseSystem(matrix=matrix, free_mask=ansatz.free_mask.copy())


def _check_connectivity(centers, radii, labels, outer, delta, visited):
    """Warn when a traversal provably missed interacting elements.

    Two elements whose center distance plus circumradii is at most delta
    interact over their full pair domain, so each root must have evaluated
    at least that many pairs; fewer means the adjacency graph does not
    connect the root to part of its interaction neighborhood.
    """
    K = centers.shape[0]
    active = labels != Label.INACTIVE
    short = np.zeros(K, dtype=bool)
    block = max(1, int(2 ** 22 // max(K, 1)))
    for b0 in range(0, K, block):
        b1 = min(b0 + block, K)
        sub = np.flatnonzero(outer[b0:b1]) + b0
        if sub.size == 0:
            continue
        d = np.sqrt(((centers[sub, None, :] - centers[None, :, :]) ** 2).sum(axis=2))
        must = (d + radii[sub, None] + radii[None, :] <= delta) & active[None, :]
        short[sub] = must.sum(axis=1) > visited[sub]
    if np.any(short):
        warnings.warn(
            f"traversal reached fewer elements than the interaction horizon requires "
            f"for {int(short.sum())} outer element(s); the adjacency graph appears "
            f"disconnected across an interaction neighborhood, so the assembled matrix "
            f"is missing contributions", RuntimeWarning, stacklevel=3)


def local_contribution(k, l, kernel, ansatz, quad, geometry):
    """Local stiffness block of the ordered element pair (k, l).

    Reference implementation kept independent of the chunked engines: it
    integrates all four terms of the pair ordered as (outer, inner) =
    (k, l), with the inner element retriangulated against the interaction
    ball of each outer quadrature point. Touching pairs under the
    transformed path are evaluated over the full pair domain in the union
    basis (one ordered pair's worth, i.e. half the unordered total for
    k != l). Rows and columns list the affected global dofs; entries may
    repeat for CG touching pairs on the standard paths.
    """
    mesh = geometry
    if quad is None:
        quad = QuadratureConfig()
    if kernel.n != ansatz.n:
        raise ConfigurationError(
            f"kernel has {kernel.n} output component(s) but the ansatz has {ansatz.n}")
    path_touch = _touch_path(kernel, ansatz, quad)
    K = mesh.n_elements
    if not (0 <= k < K and 0 <= l < K):
        raise ConfigurationError(f"element pair ({k}, {l}) out of range for {K} elements")
    nc = ansatz.n
    value = kernel.value
    delta = kernel.delta
    elements = mesh.elements
    labels = mesh.labels
    shared = [(a, b) for a in range(3) for b in range(3)
              if elements[k, a] == elements[l, b]]
    touching = (k == l) or len(shared) > 0
    lab_k = int(labels[k])
    lab_l = int(labels[l])
    coords_k = mesh.element_coords(k)
    coords_l = mesh.element_coords(l)

    if touching and path_touch == 2:
        permk, perml = _pair_frames(elements, k, l, shared)
        is_dg = 1 if ansatz.kind == "dg" else 0
        mk, ml, ubase = _union_tables(len(shared), is_dg, k, l, permk, perml,
                                      ansatz.dof_map)
        U = len(ubase)
        rule = singular_rule(
            "identical" if k == l else ("edge" if len(shared) == 2 else "vertex"),
            quad.gauss_points_1d)
        Tk = coords_k[list(permk)]
        Tl = coords_l[list(perml)]
        jtot = abs(np.cross(Tk[1] - Tk[0], Tk[2] - Tk[0])) * abs(np.cross(Tl[1] - Tl[0], Tl[2] - Tl[0]))
        block = np.zeros((U * nc, U * nc))
        for i in range(rule.w.shape[0]):
            x = Tk[0] + (Tk[1] - Tk[0]) * rule.xs[i, 0] + (Tk[2] - Tk[0]) * rule.xs[i, 1]
            y = Tl[0] + (Tl[1] - Tl[0]) * rule.ys[i, 0] + (Tl[2] - Tl[0]) * rule.ys[i, 1]
            if (x[0] - y[0]) ** 2 + (x[1] - y[1]) ** 2 <= 0.0:
                continue
            P = np.asarray(value(x, y, lab_k, lab_l), dtype=float).reshape(nc, nc)
            Q = P if kernel.symmetric else np.asarray(
                value(y, x, lab_l, lab_k), dtype=float).reshape(nc, nc)
            phx = np.array([rule.hx[i, mk[m]] if mk[m] >= 0 else 0.0 for m in range(U)])
            phy = np.array([rule.hy[i, ml[m]] if ml[m] >= 0 else 0.0 for m in range(U)])
            tm = phx - phy
            wi = rule.w[i]
            for m in range(U):
                for mp in range(U):
                    for c in range(nc):
                        for d in range(nc):
                            block[m * nc + c, mp * nc + d] += \
                                wi * tm[m] * (P[c, d] * phx[mp] - Q[c, d] * phy[mp])
        block *= jtot
        dofs = np.array([nc * ubase[m] + c for m in range(U) for c in range(nc)],
                        dtype=np.int64)
        if not np.all(np.isfinite(block)):
            raise NumericalError(f"nonfinite local contribution for element pair ({k}, {l})")
        return LocalStiffness(block=block, rows=dofs, cols=dofs.copy())

    op, ow, oh, ip, iw = _quad_arrays(quad)
    rskip2 = (_SKIP_REL * mesh.h) ** 2 if (touching and path_touch == 1) else 0.0
    drop = 0.5 * _DROP_REL * mesh.h * mesh.h
    half = 3 * nc
    block = np.zeros((2 * half, 2 * half))
    o = coords_l[0]
    e1 = coords_l[1] - coords_l[0]
    e2 = coords_l[2] - coords_l[0]
    idet = 1.0 / float(np.cross(e1, e2))
    twoA = float(np.cross(coords_k[1] - coords_k[0], coords_k[2] - coords_k[0]))
    for p in range(op.shape[0]):
        x = coords_k[0] + (coords_k[1] - coords_k[0]) * op[p, 0] \
            + (coords_k[2] - coords_k[0]) * op[p, 1]
        poly = clip_triangle_ball(coords_l, x, delta, ball=kernel.ball)
        tris = fan_triangulate(poly, drop_below=drop)
        if tris.shape[0] == 0:
            continue
        W = ow[p] * twoA
        for tri in tris:
            jac2 = float(np.cross(tri[1] - tri[0], tri[2] - tri[0]))
            for q in range(ip.shape[0]):
                y = tri[0] + (tri[1] - tri[0]) * ip[q, 0] + (tri[2] - tri[0]) * ip[q, 1]
                r2 = (x[0] - y[0]) ** 2 + (x[1] - y[1]) ** 2
                if rskip2 > 0.0 and r2 < rskip2:
                    continue
                P = np.asarray(value(x, y, lab_k, lab_l), dtype=float).reshape(nc, nc)
                Q = P if kernel.symmetric else np.asarray(
                    value(y, x, lab_l, lab_k), dtype=float).reshape(nc, nc)
                wq = iw[q] * jac2
                u = y - o
                xi1 = (u[0] * e2[1] - u[1] * e2[0]) * idet
                xi2 = (e1[0] * u[1] - e1[1] * u[0]) * idet
                hy = (1.0 - xi1 - xi2, xi1, xi2)
                hx = oh[p]
                for a in range(3):
                    for c in range(nc):
                        for b in range(3):
                            for d in range(nc):
                                block[a * nc + c, b * nc + d] += W * wq * hx[a] * hx[b] * P[c, d]
                                block[a * nc + c, half + b * nc + d] -= W * wq * hx[a] * hy[b] * Q[c, d]
                                block[half + a * nc + c, b * nc + d] -= W * wq * hy[a] * hx[b] * P[c, d]
                                block[half + a * nc + c, half + b * nc + d] += W * wq * hy[a] * hy[b] * Q[c, d]
    dofs = np.array(
        [nc * ansatz.dof_map[k, a] + c for a in range(3) for c in range(nc)]
        + [nc * ansatz.dof_map[l, a] + c for a in range(3) for c in range(nc)],
        dtype=np.int64)
    if not np.all(np.isfinite(block)):
        raise NumericalError(f"nonfinite local contribution for element pair ({k}, {l})")
    return LocalStiffness(block=block, rows=dofs, cols=dofs.copy())


def assemble_load(mesh, ansatz, f, quad=None):
    """Load vector over all dofs: b_i = sum_k integral of phi_i . f on E_k.

    f is called once on a stacked array of quadrature points of shape
    (N, 2) and must return (N,) for one component or (N, 2) for two. Only
    the free entries enter a Dirichlet solve; the full vector is returned
    so Neumann-type uses stay possible.
    """
    if quad is None:
        quad = QuadratureConfig()
    op, ow, oh, ip, iw = _quad_arrays(quad)
    nc = ansatz.n
    active = np.flatnonzero(mesh.labels != Label.INACTIVE)
    coords = mesh.vertices[mesh.elements[active]]
    e1 = coords[:, 1] - coords[:, 0]
    e2 = coords[:, 2] - coords[:, 0]
    twoA = np.cross(e1, e2)
    pts = (coords[:, None, 0, :] + e1[:, None, :] * op[None, :, 0, None]
           + e2[:, None, :] * op[None, :, 1, None])
    fx = np.asarray(f(pts.reshape(-1, 2)), dtype=float)
    if fx.shape != (pts.shape[0] * pts.shape[1],) + ((nc,) if nc > 1 else ()):
        raise ConfigurationError(
            f"f returned shape {fx.shape}, expected ({pts.shape[0] * pts.shape[1]}"
            + (f", {nc})" if nc > 1 else ",)"))
    fx = fx.reshape(len(active), op.shape[0], nc)
    contrib = np.einsum("p,pa,mpc->mac", ow, oh, fx) * twoA[:, None, None]
    b = np.zeros(ansatz.dof_count)
    idx = (nc * ansatz.dof_map[active][:, :, None]
           + np.arange(nc, dtype=np.int64)[None, None, :])
    np.add.at(b, idx.ravel(), contrib.ravel())
    return b


def assemble_mass(mesh, ansatz):
    """Mass matrix over all dofs from the exact linear-element formula."""
    nc = ansatz.n
    active = np.flatnonzero(mesh.labels != Label.INACTIVE)
    area = mesh.areas()[active]
    base = (np.ones((3, 3)) + np.eye(3)) / 12.0
    blocks = area[:, None, None] * base[None, :, :]
    dk = ansatz.dof_map[active]
    rows = np.repeat(dk, 3, axis=1)
    cols = np.tile(dk, (1, 3))
    J = ansatz.dof_count
    parts = []
    for c in range(nc):
        parts.append(sparse.coo_matrix(
            (blocks.ravel(), (nc * rows.ravel() + c, nc * cols.ravel() + c)),
            shape=(J, J)))
    m = parts[0]
    for part in parts[1:]:
        m = m + part
    m = m.tocsr()
    m.sum_duplicates()
    m.sort_indices()
    return m


def write_nlcsr(path, system):
    """Write a sparse matrix (or SparseSystem) as nlcsr text."""
    matrix = system.matrix if isinstance(system, SparseSystem) else system.tocsr()
    rows, cols = matrix.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"nlcsr 1 {rows} {cols} {matrix.nnz}\n")
        fh.write(" ".join(str(int(v)) for v in matrix.indptr) + "\n")
        fh.write(" ".join(str(int(v)) for v in matrix.indices) + "\n")
        fh.write(" ".join(repr(float(v)) for v in matrix.data) + "\n")


def read_nlcsr(path):
    """Read an nlcsr text file back into a CSR matrix."""
    with open(path, "r", encoding="ascii") as fh:
        raw = fh.readlines()
    lines = []
    for i, line in enumerate(raw):
        body = line.split("#", 1)[0].strip()
        if body:
            lines.append((i + 1, body))
    if not lines:
        raise MeshFormatError(f"{path}: empty file")
    ln, header = lines[0]
    parts = header.split()
    if len(parts) != 5 or parts[0] != "nlcsr":
        raise MeshFormatError(f"{path}:{ln}: expected header 'nlcsr 1 <rows> <cols> <nnz>'")
    if parts[1] != "1":
        raise MeshFormatError(f"{path}:{ln}: unsupported nlcsr version {parts[1]!r}")
    try:
        rows, cols, nnz = (int(p) for p in parts[2:])
    except ValueError:
        raise MeshFormatError(f"{path}:{ln}: header counts must be integers") from None
    if rows < 0 or cols < 0 or nnz < 0:
        raise MeshFormatError(f"{path}:{ln}: header counts must be nonnegative")
    if len(lines) != 4:
        raise MeshFormatError(f"{path}: expected exactly 3 data lines after the header")

    def ints(entry, count, what):
        ln, body = entry
        parts = body.split()
        if len(parts) != count:
            raise MeshFormatError(f"{path}:{ln}: expected {count} {what} entries, got {len(parts)}")
        try:
            return np.array([int(p) for p in parts], dtype=np.int64)
        except ValueError:
            raise MeshFormatError(f"{path}:{ln}: {what} entries must be integers") from None

    indptr = ints(lines[1], rows + 1, "row pointer")
    indices = ints(lines[2], nnz, "column index")
    ln, body = lines[3]
    parts = body.split()
    if len(parts) != nnz:
        raise MeshFormatError(f"{path}:{ln}: expected {nnz} value entries, got {len(parts)}")
    try:
        data = np.array([float(p) for p in parts])
    except ValueError:
        raise MeshFormatError(f"{path}:{ln}: value entries must be numbers") from None
    if indptr[0] != 0 or indptr[-1] != nnz or np.any(np.diff(indptr) < 0):
        raise MeshFormatError(f"{path}: row pointer is not a valid monotone offset array")
    if nnz > 0 and (indices.min() < 0 or indices.max() >= cols):
        raise MeshFormatError(f"{path}: column index out of range")
    return sparse.csr_matrix((data, indices, indptr), shape=(rows, cols))
