"""Compiled assembly engine for the built-in kernels.

One chunk of outer elements is processed per call: breadth-first (or brute
force) traversal of each root's interaction neighborhood, per-pair local
contributions, and triplet emission. All built-in kernels are symmetric, so
the kernel matrix is evaluated once per point pair and reused for both
orientations; the interpreted twin in _pyengine handles user kernels,
including nonsymmetric ones, with the same traversal and emission contract.

Row locality: a visit (k, l) only ever emits rows belonging to the root k.
It integrates the outer-on-k half of the ordered pair (k, l) and the
inner-on-k half of the ordered pair (l, k); the visit (l, k) made from root
l supplies the remaining two terms. Touching pairs on the transformed
(singular) path are the exception: the pair block is computed in one piece
by the root with the smaller element index.
"""

import math

import numpy as np
from numba import njit

from . import _geom_scalar

_clip_circle = njit(cache=True, nogil=True)(_geom_scalar.clip_circle)
_insert_caps = njit(cache=True, nogil=True)(_geom_scalar.insert_caps)
_clip_square = njit(cache=True, nogil=True)(_geom_scalar.clip_square)


@njit(cache=True, nogil=True)
def _kernel_mat(kid, s, cst, d0, d1, r2, P):
    """Evaluate one built-in kernel matrix at offset (d0, d1), |..|^2 = r2."""
    if kid == 0:
        P[0, 0] = cst * r2 ** (-1.0 - s)
    elif kid == 1:
        f = cst / (r2 * math.sqrt(r2))
        v01 = f * d0 * d1
        P[0, 0] = f * d0 * d0
        P[0, 1] = v01
        P[1, 0] = v01
        P[1, 1] = f * d1 * d1
    else:
        P[0, 0] = cst


@njit(cache=True, nogil=True)
def _sweep(mode, TA, TB, nc, kid, s, cst, delta, ball_id, rskip2, drop2, full,
           op, ow, oh, ip, iw,
           P, S0, Sy, Syy, B, hbuf, poly, pbase, pcap, psqb, psqo):
    """One outer-on-TA, inner-on-TB truncated sweep, accumulated into B.

    mode 0 emits the outer-test terms (rows on the outer element), mode 1
    the inner-test terms (rows on the inner element), mode 2 all four terms
    of an identical pair. Column half 0 of B is the root element's basis,
    half 1 the neighbor's. Returns 1 if any outer point saw a nonempty
    truncated inner region.
    """
    twoA = (TA[1, 0] - TA[0, 0]) * (TA[2, 1] - TA[0, 1]) - (TA[1, 1] - TA[0, 1]) * (TA[2, 0] - TA[0, 0])
    o0 = TB[0, 0]
    o1 = TB[0, 1]
    e1x = TB[1, 0] - o0
    e1y = TB[1, 1] - o1
    e2x = TB[2, 0] - o0
    e2y = TB[2, 1] - o1
    idet = 1.0 / (e1x * e2y - e1y * e2x)
    nonzero = 0
    for p in range(op.shape[0]):
        x0 = TA[0, 0] + (TA[1, 0] - TA[0, 0]) * op[p, 0] + (TA[2, 0] - TA[0, 0]) * op[p, 1]
        x1 = TA[0, 1] + (TA[1, 1] - TA[0, 1]) * op[p, 0] + (TA[2, 1] - TA[0, 1]) * op[p, 1]
        if full == 1:
            nv = 3
            for i in range(3):
                poly[i, 0] = TB[i, 0]
                poly[i, 1] = TB[i, 1]
        elif ball_id == 2:
            nv = _clip_square(TB, 3, x0, x1, delta, psqb, psqo)
            for i in range(nv):
                poly[i, 0] = psqo[i, 0]
                poly[i, 1] = psqo[i, 1]
        else:
            nb = _clip_circle(TB, 3, x0, x1, delta, pbase)
            if ball_id == 0:
                nv = nb
                for i in range(nv):
                    poly[i, 0] = pbase[i, 0]
                    poly[i, 1] = pbase[i, 1]
            else:
                nv = _insert_caps(TB, 3, pbase, nb, x0, x1, delta, pcap)
                for i in range(nv):
                    poly[i, 0] = pcap[i, 0]
                    poly[i, 1] = pcap[i, 1]
        if nv < 3:
            continue
        nonzero = 1
        W = ow[p] * twoA
        for c in range(nc):
            for d in range(nc):
                S0[c, d] = 0.0
                for a in range(3):
                    Sy[a, c, d] = 0.0
                    for b in range(3):
                        Syy[a, b, c, d] = 0.0
        for t in range(1, nv - 1):
            q0x = poly[0, 0]
            q0y = poly[0, 1]
            ax = poly[t, 0] - q0x
            ay = poly[t, 1] - q0y
            bx = poly[t + 1, 0] - q0x
            by = poly[t + 1, 1] - q0y
            jac2 = ax * by - ay * bx
            if jac2 <= drop2:
                continue
            for q in range(ip.shape[0]):
                y0 = q0x + ax * ip[q, 0] + bx * ip[q, 1]
                y1 = q0y + ay * ip[q, 0] + by * ip[q, 1]
                d0 = x0 - y0
                d1 = x1 - y1
                r2 = d0 * d0 + d1 * d1
                if rskip2 > 0.0 and r2 < rskip2:
                    continue
                _kernel_mat(kid, s, cst, d0, d1, r2, P)
                wq = iw[q] * jac2
                u0 = y0 - o0
                u1 = y1 - o1
                xi1 = (u0 * e2y - u1 * e2x) * idet
                xi2 = (e1x * u1 - e1y * u0) * idet
                hbuf[0] = 1.0 - xi1 - xi2
                hbuf[1] = xi1
                hbuf[2] = xi2
                if mode == 0:
                    for c in range(nc):
                        for d in range(nc):
                            t0 = wq * P[c, d]
                            S0[c, d] += t0
                            for b in range(3):
                                Sy[b, c, d] += t0 * hbuf[b]
                elif mode == 1:
                    for c in range(nc):
                        for d in range(nc):
                            t0 = wq * P[c, d]
                            for a in range(3):
                                Sy[a, c, d] += t0 * hbuf[a]
                                for b in range(3):
                                    Syy[a, b, c, d] += t0 * (hbuf[a] * hbuf[b])
                else:
                    for c in range(nc):
                        for d in range(nc):
                            t0 = wq * P[c, d]
                            S0[c, d] += t0
                            for a in range(3):
                                Sy[a, c, d] += t0 * hbuf[a]
                                for b in range(3):
                                    Syy[a, b, c, d] += t0 * (hbuf[a] * hbuf[b])
        half = 3 * nc
        if mode == 0:
            for a in range(3):
                for c in range(nc):
                    r = a * nc + c
                    for b in range(3):
                        cf1 = W * (oh[p, a] * oh[p, b])
                        cf2 = W * oh[p, a]
                        for d in range(nc):
                            B[r, b * nc + d] += cf1 * S0[c, d]
                            B[r, half + b * nc + d] -= cf2 * Sy[b, c, d]
        elif mode == 1:
            for a in range(3):
                for c in range(nc):
                    r = a * nc + c
                    for b in range(3):
                        cf2 = W * oh[p, b]
                        for d in range(nc):
                            B[r, half + b * nc + d] -= cf2 * Sy[a, c, d]
                            B[r, b * nc + d] += W * Syy[a, b, c, d]
        else:
            for a in range(3):
                for c in range(nc):
                    r = a * nc + c
                    for b in range(3):
                        cf1 = W * (oh[p, a] * oh[p, b])
                        cf2 = W * oh[p, a]
                        cf3 = W * oh[p, b]
                        for d in range(nc):
                            B[r, b * nc + d] += cf1 * S0[c, d] + W * Syy[a, b, c, d]
                            B[r, half + b * nc + d] -= cf2 * Sy[b, c, d] + cf3 * Sy[a, c, d]
    return nonzero


@njit(cache=True, nogil=True)
def _visit_pair(k, l, vertices, elements, centers, radii, outer_mask,
                nc, is_dg, kid, s, cst, delta, ball_id, path_touch, rskip2, drop2, prer,
                dof_map,
                op, ow, oh, ip, iw,
                id_xs, id_ys, id_w, id_hx, id_hy,
                ed_xs, ed_ys, ed_w, ed_hx, ed_hy,
                vx_xs, vx_ys, vx_w, vx_hx, vx_hy,
                TA, TB, P, S0, Sy, Syy, B, Bu, tmbuf, hbuf,
                poly, pbase, pcap, psqb, psqo,
                ubase, permk, perml, mk, ml,
                stage_r, stage_c, stage_v):
    """Local contributions of one traversal visit, staged as triplets.

    Returns (number of staged triplets, nonzero flag for enqueueing,
    nonfinite-value flag).
    """
    # shared vertices decide the pair class
    ns = 0
    a0 = a1 = b0 = b1 = -1
    for a in range(3):
        ga = elements[k, a]
        for b in range(3):
            if ga == elements[l, b]:
                if ns == 0:
                    a0 = a
                    b0 = b
                elif ns == 1:
                    a1 = a
                    b1 = b
                ns += 1
    touching = (k == l) or (ns > 0)
    dx = centers[k, 0] - centers[l, 0]
    dy = centers[k, 1] - centers[l, 1]
    dist = math.sqrt(dx * dx + dy * dy)
    if not touching:
        if dist - radii[k] - radii[l] > prer:
            return 0, 0, 0
    full = 0
    if dist + radii[k] + radii[l] <= delta:
        full = 1

    if touching and path_touch == 2:
        # transformed rule over the full pair domain; the smaller root owns
        # the pair when both ends are traversal roots
        if l != k and outer_mask[l] == 1 and l < k:
            return 0, 1, 0
        if k == l:
            U = 3
            for m in range(3):
                permk[m] = m
                perml[m] = m
                mk[m] = m
                ml[m] = m
                ubase[m] = dof_map[k, m]
            xs, ys, w, hxa, hya = id_xs, id_ys, id_w, id_hx, id_hy
        else:
            if ns == 2:
                # order the shared edge by global id so both frames agree
                if elements[k, a0] > elements[k, a1]:
                    t = a0
                    a0 = a1
                    a1 = t
                    t = b0
                    b0 = b1
                    b1 = t
                permk[0] = a0
                permk[1] = a1
                permk[2] = 3 - a0 - a1
                perml[0] = b0
                perml[1] = b1
                perml[2] = 3 - b0 - b1
                U = 4
                if is_dg == 0:
                    mk[0] = 0
                    mk[1] = 1
                    mk[2] = 2
                    mk[3] = -1
                    ml[0] = 0
                    ml[1] = 1
                    ml[2] = -1
                    ml[3] = 2
                    ubase[0] = dof_map[k, permk[0]]
                    ubase[1] = dof_map[k, permk[1]]
                    ubase[2] = dof_map[k, permk[2]]
                    ubase[3] = dof_map[l, perml[2]]
                xs, ys, w, hxa, hya = ed_xs, ed_ys, ed_w, ed_hx, ed_hy
            else:
                permk[0] = a0
                permk[1] = (a0 + 1) % 3
                permk[2] = (a0 + 2) % 3
                perml[0] = b0
                perml[1] = (b0 + 1) % 3
                perml[2] = (b0 + 2) % 3
                U = 5
                if is_dg == 0:
                    mk[0] = 0
                    mk[1] = 1
                    mk[2] = 2
                    mk[3] = -1
                    mk[4] = -1
                    ml[0] = 0
                    ml[1] = -1
                    ml[2] = -1
                    ml[3] = 1
                    ml[4] = 2
                    ubase[0] = dof_map[k, permk[0]]
                    ubase[1] = dof_map[k, permk[1]]
                    ubase[2] = dof_map[k, permk[2]]
                    ubase[3] = dof_map[l, perml[1]]
                    ubase[4] = dof_map[l, perml[2]]
                xs, ys, w, hxa, hya = vx_xs, vx_ys, vx_w, vx_hx, vx_hy
            if is_dg == 1:
                U = 6
                for m in range(3):
                    mk[m] = m
                    mk[3 + m] = -1
                    ml[m] = -1
                    ml[3 + m] = m
                    ubase[m] = dof_map[k, permk[m]]
                    ubase[3 + m] = dof_map[l, perml[m]]
        for m in range(3):
            TA[m, 0] = vertices[elements[k, permk[m]], 0]
            TA[m, 1] = vertices[elements[k, permk[m]], 1]
            TB[m, 0] = vertices[elements[l, perml[m]], 0]
            TB[m, 1] = vertices[elements[l, perml[m]], 1]
        crossk = (TA[1, 0] - TA[0, 0]) * (TA[2, 1] - TA[0, 1]) - (TA[1, 1] - TA[0, 1]) * (TA[2, 0] - TA[0, 0])
        crossl = (TB[1, 0] - TB[0, 0]) * (TB[2, 1] - TB[0, 1]) - (TB[1, 1] - TB[0, 1]) * (TB[2, 0] - TB[0, 0])
        scale = abs(crossk) * abs(crossl)
        if l != k:
            scale *= 2.0
        un = U * nc
        for i in range(un):
            for j in range(un):
                Bu[i, j] = 0.0
        e1kx = TA[1, 0] - TA[0, 0]
        e1ky = TA[1, 1] - TA[0, 1]
        e2kx = TA[2, 0] - TA[0, 0]
        e2ky = TA[2, 1] - TA[0, 1]
        e1lx = TB[1, 0] - TB[0, 0]
        e1ly = TB[1, 1] - TB[0, 1]
        e2lx = TB[2, 0] - TB[0, 0]
        e2ly = TB[2, 1] - TB[0, 1]
        for i in range(xs.shape[0]):
            x0 = TA[0, 0] + e1kx * xs[i, 0] + e2kx * xs[i, 1]
            x1 = TA[0, 1] + e1ky * xs[i, 0] + e2ky * xs[i, 1]
            y0 = TB[0, 0] + e1lx * ys[i, 0] + e2lx * ys[i, 1]
            y1 = TB[0, 1] + e1ly * ys[i, 0] + e2ly * ys[i, 1]
            d0 = x0 - y0
            d1 = x1 - y1
            r2 = d0 * d0 + d1 * d1
            if r2 <= 0.0:
                continue
            _kernel_mat(kid, s, cst, d0, d1, r2, P)
            for m in range(U):
                phix = 0.0
                phiy = 0.0
                if mk[m] >= 0:
                    phix = hxa[i, mk[m]]
                if ml[m] >= 0:
                    phiy = hya[i, ml[m]]
                tmbuf[m] = phix - phiy
            wi = w[i]
            for m in range(U):
                for mp in range(U):
                    cf = wi * (tmbuf[m] * tmbuf[mp])
                    for c in range(nc):
                        for d in range(nc):
                            Bu[m * nc + c, mp * nc + d] += cf * P[c, d]
        nst = 0
        err = 0
        for m in range(U):
            for c in range(nc):
                gr = nc * ubase[m] + c
                for mp in range(U):
                    for d in range(nc):
                        v = Bu[m * nc + c, mp * nc + d] * scale
                        if v != 0.0:
                            if not math.isfinite(v):
                                err = 1
                            stage_r[nst] = gr
                            stage_c[nst] = nc * ubase[mp] + d
                            stage_v[nst] = v
                            nst += 1
        return nst, 1, err

    # standard or diagonal-skipping path: two truncated sweeps
    for i in range(3):
        TA[i, 0] = vertices[elements[k, i], 0]
        TA[i, 1] = vertices[elements[k, i], 1]
        TB[i, 0] = vertices[elements[l, i], 0]
        TB[i, 1] = vertices[elements[l, i], 1]
    rs2 = 0.0
    if touching and path_touch == 1:
        rs2 = rskip2
    half = 3 * nc
    for i in range(half):
        for j in range(2 * half):
            B[i, j] = 0.0
    if k == l:
        nonzero = _sweep(2, TA, TB, nc, kid, s, cst, delta, ball_id, rs2, drop2, full,
                         op, ow, oh, ip, iw, P, S0, Sy, Syy, B, hbuf,
                         poly, pbase, pcap, psqb, psqo)
    else:
        nz0 = _sweep(0, TA, TB, nc, kid, s, cst, delta, ball_id, rs2, drop2, full,
                     op, ow, oh, ip, iw, P, S0, Sy, Syy, B, hbuf,
                     poly, pbase, pcap, psqb, psqo)
        nz1 = _sweep(1, TB, TA, nc, kid, s, cst, delta, ball_id, rs2, drop2, full,
                     op, ow, oh, ip, iw, P, S0, Sy, Syy, B, hbuf,
                     poly, pbase, pcap, psqb, psqo)
        nonzero = 1 if (nz0 == 1 or nz1 == 1) else 0
    if nonzero == 0:
        return 0, 0, 0
    nst = 0
    err = 0
    for a in range(3):
        for c in range(nc):
            gr = nc * dof_map[k, a] + c
            br = a * nc + c
            for b in range(3):
                for d in range(nc):
                    v = B[br, b * nc + d]
                    if v != 0.0:
                        if not math.isfinite(v):
                            err = 1
                        stage_r[nst] = gr
                        stage_c[nst] = nc * dof_map[k, b] + d
                        stage_v[nst] = v
                        nst += 1
                    v = B[br, half + b * nc + d]
                    if v != 0.0:
                        if not math.isfinite(v):
                            err = 1
                        stage_r[nst] = gr
                        stage_c[nst] = nc * dof_map[l, b] + d
                        stage_v[nst] = v
                        nst += 1
    return nst, nonzero, err


@njit(cache=True, nogil=True)
def _chunk(k0, k1, brute, vertices, elements, labels, adj_ptr, adj_idx,
           centers, radii, outer_mask,
           nc, is_dg, kid, s, cst, delta, ball_id, path_touch, rskip2, drop2,
           dof_map,
           op, ow, oh, ip, iw,
           id_xs, id_ys, id_w, id_hx, id_hy,
           ed_xs, ed_ys, ed_w, ed_hx, ed_hy,
           vx_xs, vx_ys, vx_w, vx_hx, vx_hy):
    """Assemble the triplets of all roots in [k0, k1).

    Returns (rows, cols, neighbor keys, values, per-root count of evaluated
    pairs that provably interact, error flag, error pair). The neighbor key
    records the visited element so the merge can order duplicate entries
    deterministically.
    """
    K = elements.shape[0]
    prer = delta * math.sqrt(2.0) if ball_id == 2 else delta
    TA = np.empty((3, 2))
    TB = np.empty((3, 2))
    P = np.empty((2, 2))
    S0 = np.empty((2, 2))
    Sy = np.empty((3, 2, 2))
    Syy = np.empty((3, 3, 2, 2))
    B = np.empty((6, 12))
    Bu = np.empty((12, 12))
    tmbuf = np.empty(6)
    hbuf = np.empty(3)
    poly = np.empty((40, 2))
    pbase = np.empty((40, 3))
    pcap = np.empty((40, 2))
    psqb = np.empty((40, 2))
    psqo = np.empty((40, 2))
    ubase = np.empty(6, dtype=np.int64)
    permk = np.empty(3, dtype=np.int64)
    perml = np.empty(3, dtype=np.int64)
    mk = np.empty(6, dtype=np.int64)
    ml = np.empty(6, dtype=np.int64)
    stage_r = np.empty(256, dtype=np.int64)
    stage_c = np.empty(256, dtype=np.int64)
    stage_v = np.empty(256)
    stamp = np.full(K, -1, dtype=np.int64)
    queue = np.empty(K, dtype=np.int64)

    cap = 16384
    rows = np.empty(cap, dtype=np.int64)
    cols = np.empty(cap, dtype=np.int64)
    lks = np.empty(cap, dtype=np.int64)
    vals = np.empty(cap)
    nt = 0
    vis = np.zeros(k1 - k0, dtype=np.int64)
    err = 0
    ek = np.int64(-1)
    el = np.int64(-1)

    for k in range(k0, k1):
        if outer_mask[k] == 0:
            continue
        if brute == 1:
            for l in range(K):
                if labels[l] == 0:
                    continue
                nst, nz, ef = _visit_pair(
                    k, l, vertices, elements, centers, radii, outer_mask,
                    nc, is_dg, kid, s, cst, delta, ball_id, path_touch, rskip2, drop2, prer,
                    dof_map, op, ow, oh, ip, iw,
                    id_xs, id_ys, id_w, id_hx, id_hy,
                    ed_xs, ed_ys, ed_w, ed_hx, ed_hy,
                    vx_xs, vx_ys, vx_w, vx_hx, vx_hy,
                    TA, TB, P, S0, Sy, Syy, B, Bu, tmbuf, hbuf,
                    poly, pbase, pcap, psqb, psqo,
                    ubase, permk, perml, mk, ml,
                    stage_r, stage_c, stage_v)
                if ef == 1 and err == 0:
                    err = 1
                    ek = k
                    el = l
                dx = centers[k, 0] - centers[l, 0]
                dy = centers[k, 1] - centers[l, 1]
                if math.sqrt(dx * dx + dy * dy) + radii[k] + radii[l] <= delta:
                    vis[k - k0] += 1
                if nst > 0:
                    while nt + nst > cap:
                        cap = 2 * cap
                        nrows = np.empty(cap, dtype=np.int64)
                        ncols = np.empty(cap, dtype=np.int64)
                        nlks = np.empty(cap, dtype=np.int64)
                        nvals = np.empty(cap)
                        nrows[:nt] = rows[:nt]
                        ncols[:nt] = cols[:nt]
                        nlks[:nt] = lks[:nt]
                        nvals[:nt] = vals[:nt]
                        rows = nrows
                        cols = ncols
                        lks = nlks
                        vals = nvals
                    for i in range(nst):
                        rows[nt] = stage_r[i]
                        cols[nt] = stage_c[i]
                        lks[nt] = l
                        vals[nt] = stage_v[i]
                        nt += 1
        else:
            stamp[k] = k
            queue[0] = k
            qn = 1
            qi = 0
            while qi < qn:
                e = queue[qi]
                qi += 1
                if e == k:
                    lset_lo = 0
                    lset_hi = 1
                else:
                    lset_lo = 0
                    lset_hi = 0
                # visit the root pair itself once, then neighbors of e
                for step in range(lset_lo, lset_hi + adj_ptr[e + 1] - adj_ptr[e]):
                    if step < lset_hi:
                        l = e
                    else:
                        l = adj_idx[adj_ptr[e] + step - lset_hi]
                        if stamp[l] == k:
                            continue
                        stamp[l] = k
                        if labels[l] == 0:
                            queue[qn] = l
                            qn += 1
                            continue
                    nst, nz, ef = _visit_pair(
                        k, l, vertices, elements, centers, radii, outer_mask,
                        nc, is_dg, kid, s, cst, delta, ball_id, path_touch, rskip2, drop2, prer,
                        dof_map, op, ow, oh, ip, iw,
                        id_xs, id_ys, id_w, id_hx, id_hy,
                        ed_xs, ed_ys, ed_w, ed_hx, ed_hy,
                        vx_xs, vx_ys, vx_w, vx_hx, vx_hy,
                        TA, TB, P, S0, Sy, Syy, B, Bu, tmbuf, hbuf,
                        poly, pbase, pcap, psqb, psqo,
                        ubase, permk, perml, mk, ml,
                        stage_r, stage_c, stage_v)
                    if ef == 1 and err == 0:
                        err = 1
                        ek = k
                        el = l
                    dx = centers[k, 0] - centers[l, 0]
                    dy = centers[k, 1] - centers[l, 1]
                    if math.sqrt(dx * dx + dy * dy) + radii[k] + radii[l] <= delta:
                        vis[k - k0] += 1
                    if nz == 1 and l != k:
                        queue[qn] = l
                        qn += 1
                    if nst > 0:
                        while nt + nst > cap:
                            cap = 2 * cap
                            nrows = np.empty(cap, dtype=np.int64)
                            ncols = np.empty(cap, dtype=np.int64)
                            nlks = np.empty(cap, dtype=np.int64)
                            nvals = np.empty(cap)
                            nrows[:nt] = rows[:nt]
                            ncols[:nt] = cols[:nt]
                            nlks[:nt] = lks[:nt]
                            nvals[:nt] = vals[:nt]
                            rows = nrows
                            cols = ncols
                            lks = nlks
                            vals = nvals
                        for i in range(nst):
                            rows[nt] = stage_r[i]
                            cols[nt] = stage_c[i]
                            lks[nt] = l
                            vals[nt] = stage_v[i]
                            nt += 1
    return rows[:nt], cols[:nt], lks[:nt], vals[:nt], vis, err, ek, el
