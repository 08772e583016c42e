"""Interpreted assembly engine for user-supplied kernels.

Mirrors the traversal, truncation, and emission contract of the compiled
engine in _engine, but evaluates the kernel through a Python callable and
therefore also supports nonsymmetric kernels: gamma(x, y) and gamma(y, x)
are computed separately wherever the compiled engine reuses a single
symmetric evaluation. Element labels are forwarded to the callable.
"""

import math

import numpy as np

from ._geom_scalar import clip_circle, clip_square, insert_caps


class _Workspace:
    """Scratch buffers shared by all visits of one chunk."""

    def __init__(self, n_elements):
        self.TA = np.empty((3, 2))
        self.TB = np.empty((3, 2))
        self.S0 = np.empty((2, 2))
        self.SyP = np.empty((3, 2, 2))
        self.SyQ = np.empty((3, 2, 2))
        self.Syy = np.empty((3, 3, 2, 2))
        self.B = np.empty((6, 12))
        self.Bu = np.empty((12, 12))
        self.poly = np.empty((40, 2))
        self.pbase = np.empty((40, 3))
        self.pcap = np.empty((40, 2))
        self.psqb = np.empty((40, 2))
        self.psqo = np.empty((40, 2))
        self.stamp = np.full(n_elements, -1, dtype=np.int64)
        self.queue = np.empty(n_elements, dtype=np.int64)


def _pq(value, x0, x1, y0, y1, lx, ly, nc, symmetric):
    x = np.array((x0, x1))
    y = np.array((y0, y1))
    P = np.asarray(value(x, y, lx, ly), dtype=float).reshape(nc, nc)
    if symmetric:
        return P, P
    Q = np.asarray(value(y, x, ly, lx), dtype=float).reshape(nc, nc)
    return P, Q


def _sweep(mode, TA, TB, lab_out, lab_in, nc, value, symmetric, delta, ball_id,
           rskip2, drop2, full, op, ow, oh, ip, iw, ws):
    """One truncated outer-on-TA, inner-on-TB sweep accumulated into ws.B.

    Same emission layout as the compiled engine: column half 0 belongs to
    the root element, half 1 to the neighbor; mode 0 emits outer-test rows,
    mode 1 inner-test rows, mode 2 all four terms of an identical pair.
    """
    B = ws.B
    S0 = ws.S0
    SyP = ws.SyP
    SyQ = ws.SyQ
    Syy = ws.Syy
    poly = ws.poly
    twoA = (TA[1, 0] - TA[0, 0]) * (TA[2, 1] - TA[0, 1]) - (TA[1, 1] - TA[0, 1]) * (TA[2, 0] - TA[0, 0])
    o0 = TB[0, 0]
    o1 = TB[0, 1]
    e1x = TB[1, 0] - o0
    e1y = TB[1, 1] - o1
    e2x = TB[2, 0] - o0
    e2y = TB[2, 1] - o1
    idet = 1.0 / (e1x * e2y - e1y * e2x)
    hbuf = np.empty(3)
    nonzero = 0
    for p in range(op.shape[0]):
        x0 = TA[0, 0] + (TA[1, 0] - TA[0, 0]) * op[p, 0] + (TA[2, 0] - TA[0, 0]) * op[p, 1]
        x1 = TA[0, 1] + (TA[1, 1] - TA[0, 1]) * op[p, 0] + (TA[2, 1] - TA[0, 1]) * op[p, 1]
        if full == 1:
            nv = 3
            poly[:3] = TB
        elif ball_id == 2:
            nv = clip_square(TB, 3, x0, x1, delta, ws.psqb, ws.psqo)
            poly[:nv] = ws.psqo[:nv]
        else:
            nb = clip_circle(TB, 3, x0, x1, delta, ws.pbase)
            if ball_id == 0:
                nv = nb
                poly[:nv] = ws.pbase[:nv, :2]
            else:
                nv = insert_caps(TB, 3, ws.pbase, nb, x0, x1, delta, ws.pcap)
                poly[:nv] = ws.pcap[:nv]
        if nv < 3:
            continue
        nonzero = 1
        W = ow[p] * twoA
        S0[:] = 0.0
        SyP[:] = 0.0
        SyQ[:] = 0.0
        Syy[:] = 0.0
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
                P, Q = _pq(value, x0, x1, y0, y1, lab_out, lab_in, nc, symmetric)
                wq = iw[q] * jac2
                u0 = y0 - o0
                u1 = y1 - o1
                xi1 = (u0 * e2y - u1 * e2x) * idet
                xi2 = (e1x * u1 - e1y * u0) * idet
                hbuf[0] = 1.0 - xi1 - xi2
                hbuf[1] = xi1
                hbuf[2] = xi2
                for c in range(nc):
                    for d in range(nc):
                        tp = wq * P[c, d]
                        tq = wq * Q[c, d]
                        if mode != 1:
                            S0[c, d] += tp
                        for a in range(3):
                            if mode != 1:
                                SyQ[a, c, d] += tq * hbuf[a]
                            if mode != 0:
                                SyP[a, c, d] += tp * hbuf[a]
                                for b in range(3):
                                    Syy[a, b, c, d] += tq * (hbuf[a] * hbuf[b])
        half = 3 * nc
        for a in range(3):
            for c in range(nc):
                r = a * nc + c
                for b in range(3):
                    for d in range(nc):
                        if mode == 0:
                            B[r, b * nc + d] += (W * (oh[p, a] * oh[p, b])) * S0[c, d]
                            B[r, half + b * nc + d] -= (W * oh[p, a]) * SyQ[b, c, d]
                        elif mode == 1:
                            B[r, half + b * nc + d] -= (W * oh[p, b]) * SyP[a, c, d]
                            B[r, b * nc + d] += W * Syy[a, b, c, d]
                        else:
                            B[r, b * nc + d] += (W * (oh[p, a] * oh[p, b])) * S0[c, d] + W * Syy[a, b, c, d]
                            B[r, half + b * nc + d] -= (W * oh[p, a]) * SyQ[b, c, d] + (W * oh[p, b]) * SyP[a, c, d]
    return nonzero


def _pair_frames(elements, k, l, shared):
    """Frame permutations of a touching pair.

    The shared edge is ordered by global vertex id on both sides; a shared
    vertex leads both frames, followed by the stored cyclic order.
    """
    if k == l:
        return (0, 1, 2), (0, 1, 2)
    if len(shared) == 2:
        (a0, b0), (a1, b1) = shared
        if elements[k, a0] > elements[k, a1]:
            a0, a1 = a1, a0
            b0, b1 = b1, b0
        return (a0, a1, 3 - a0 - a1), (b0, b1, 3 - b0 - b1)
    (a0, b0), = shared
    return (a0, (a0 + 1) % 3, (a0 + 2) % 3), (b0, (b0 + 1) % 3, (b0 + 2) % 3)


def _union_tables(ns, is_dg, k, l, permk, perml, dof_map):
    """Union-basis slot tables: frame-hat index per side and global base."""
    if k == l:
        mk = (0, 1, 2)
        ml = (0, 1, 2)
        ubase = [dof_map[k, m] for m in range(3)]
    elif is_dg:
        mk = (0, 1, 2, -1, -1, -1)
        ml = (-1, -1, -1, 0, 1, 2)
        ubase = [dof_map[k, permk[m]] for m in range(3)] + [dof_map[l, perml[m]] for m in range(3)]
    elif ns == 2:
        mk = (0, 1, 2, -1)
        ml = (0, 1, -1, 2)
        ubase = [dof_map[k, permk[0]], dof_map[k, permk[1]], dof_map[k, permk[2]], dof_map[l, perml[2]]]
    else:
        mk = (0, 1, 2, -1, -1)
        ml = (0, -1, -1, 1, 2)
        ubase = [dof_map[k, permk[0]], dof_map[k, permk[1]], dof_map[k, permk[2]],
                 dof_map[l, perml[1]], dof_map[l, perml[2]]]
    return mk, ml, ubase


def _visit(k, l, vertices, elements, labels, centers, radii, outer_mask,
           nc, is_dg, value, symmetric, delta, ball_id, path_touch, rskip2, drop2, prer,
           dof_map, op, ow, oh, ip, iw, rules, ws, out_r, out_c, out_l, out_v):
    """One traversal visit; appends triplets. Returns (nonzero, err)."""
    shared = [(a, b) for a in range(3) for b in range(3)
              if elements[k, a] == elements[l, b]]
    ns = len(shared)
    touching = (k == l) or ns > 0
    dx = centers[k, 0] - centers[l, 0]
    dy = centers[k, 1] - centers[l, 1]
    dist = math.sqrt(dx * dx + dy * dy)
    if not touching and dist - radii[k] - radii[l] > prer:
        return 0, 0
    full = 1 if dist + radii[k] + radii[l] <= delta else 0

    if touching and path_touch == 2:
        if l != k and outer_mask[l] == 1 and l < k:
            return 1, 0
        if k == l:
            rule = rules["identical"]
        elif ns == 2:
            rule = rules["edge"]
        else:
            rule = rules["vertex"]
        permk, perml = _pair_frames(elements, k, l, shared)
        mk, ml, ubase = _union_tables(ns, is_dg, k, l, permk, perml, dof_map)
        U = len(ubase)
        TA = ws.TA
        TB = ws.TB
        for m in range(3):
            TA[m] = vertices[elements[k, permk[m]]]
            TB[m] = vertices[elements[l, perml[m]]]
        crossk = (TA[1, 0] - TA[0, 0]) * (TA[2, 1] - TA[0, 1]) - (TA[1, 1] - TA[0, 1]) * (TA[2, 0] - TA[0, 0])
        crossl = (TB[1, 0] - TB[0, 0]) * (TB[2, 1] - TB[0, 1]) - (TB[1, 1] - TB[0, 1]) * (TB[2, 0] - TB[0, 0])
        scale = abs(crossk) * abs(crossl)
        if l != k:
            scale *= 2.0
        Bu = ws.Bu
        Bu[:U * nc, :U * nc] = 0.0
        xs, ys, w, hx, hy = rule.xs, rule.ys, rule.w, rule.hx, rule.hy
        tm = np.empty(U)
        phx = np.empty(U)
        phy = np.empty(U)
        lk = int(labels[k])
        ll = int(labels[l])
        for i in range(xs.shape[0]):
            x0 = TA[0, 0] + (TA[1, 0] - TA[0, 0]) * xs[i, 0] + (TA[2, 0] - TA[0, 0]) * xs[i, 1]
            x1 = TA[0, 1] + (TA[1, 1] - TA[0, 1]) * xs[i, 0] + (TA[2, 1] - TA[0, 1]) * xs[i, 1]
            y0 = TB[0, 0] + (TB[1, 0] - TB[0, 0]) * ys[i, 0] + (TB[2, 0] - TB[0, 0]) * ys[i, 1]
            y1 = TB[0, 1] + (TB[1, 1] - TB[0, 1]) * ys[i, 0] + (TB[2, 1] - TB[0, 1]) * ys[i, 1]
            d0 = x0 - y0
            d1 = x1 - y1
            if d0 * d0 + d1 * d1 <= 0.0:
                continue
            P, Q = _pq(value, x0, x1, y0, y1, lk, ll, nc, symmetric)
            for m in range(U):
                phx[m] = hx[i, mk[m]] if mk[m] >= 0 else 0.0
                phy[m] = hy[i, ml[m]] if ml[m] >= 0 else 0.0
                tm[m] = phx[m] - phy[m]
            wi = w[i]
            for m in range(U):
                for mp in range(U):
                    for c in range(nc):
                        for d in range(nc):
                            if symmetric:
                                Bu[m * nc + c, mp * nc + d] += (wi * (tm[m] * tm[mp])) * P[c, d]
                            else:
                                Bu[m * nc + c, mp * nc + d] += wi * tm[m] * (P[c, d] * phx[mp] - Q[c, d] * phy[mp])
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
                            out_r.append(gr)
                            out_c.append(nc * ubase[mp] + d)
                            out_l.append(l)
                            out_v.append(v)
        return 1, err

    TA = ws.TA
    TB = ws.TB
    for i in range(3):
        TA[i] = vertices[elements[k, i]]
        TB[i] = vertices[elements[l, i]]
    rs2 = rskip2 if (touching and path_touch == 1) else 0.0
    B = ws.B
    half = 3 * nc
    B[:half, :2 * half] = 0.0
    lk = int(labels[k])
    ll = int(labels[l])
    if k == l:
        nonzero = _sweep(2, TA, TB, lk, ll, nc, value, symmetric, delta, ball_id,
                         rs2, drop2, full, op, ow, oh, ip, iw, ws)
    else:
        nz0 = _sweep(0, TA, TB, lk, ll, nc, value, symmetric, delta, ball_id,
                     rs2, drop2, full, op, ow, oh, ip, iw, ws)
        nz1 = _sweep(1, TB, TA, ll, lk, nc, value, symmetric, delta, ball_id,
                     rs2, drop2, full, op, ow, oh, ip, iw, ws)
        nonzero = 1 if (nz0 or nz1) else 0
    if not nonzero:
        return 0, 0
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
                        out_r.append(gr)
                        out_c.append(nc * dof_map[k, b] + d)
                        out_l.append(l)
                        out_v.append(v)
                    v = B[br, half + b * nc + d]
                    if v != 0.0:
                        if not math.isfinite(v):
                            err = 1
                        out_r.append(gr)
                        out_c.append(nc * dof_map[l, b] + d)
                        out_l.append(l)
                        out_v.append(v)
    return nonzero, err


def chunk(k0, k1, brute, vertices, elements, labels, adj_ptr, adj_idx,
          centers, radii, outer_mask, nc, is_dg, value, symmetric,
          delta, ball_id, path_touch, rskip2, drop2, dof_map,
          op, ow, oh, ip, iw, rules):
    """Interpreted counterpart of the compiled chunk driver.

    Same return contract: (rows, cols, neighbor keys, values, per-root
    counts of evaluated pairs that provably interact, error flag, error
    pair).
    """
    K = elements.shape[0]
    prer = delta * math.sqrt(2.0) if ball_id == 2 else delta
    ws = _Workspace(K)
    out_r = []
    out_c = []
    out_l = []
    out_v = []
    vis = np.zeros(k1 - k0, dtype=np.int64)
    err = 0
    ek = -1
    el = -1

    def visit_and_log(k, l):
        nonlocal err, ek, el
        nz, ef = _visit(k, l, vertices, elements, labels, centers, radii, outer_mask,
                        nc, is_dg, value, symmetric, delta, ball_id, path_touch,
                        rskip2, drop2, prer, dof_map, op, ow, oh, ip, iw, rules, ws,
                        out_r, out_c, out_l, out_v)
        if ef and not err:
            err = 1
            ek = k
            el = l
        dx = centers[k, 0] - centers[l, 0]
        dy = centers[k, 1] - centers[l, 1]
        if math.sqrt(dx * dx + dy * dy) + radii[k] + radii[l] <= delta:
            vis[k - k0] += 1
        return nz

    for k in range(k0, k1):
        if outer_mask[k] == 0:
            continue
        if brute:
            for l in range(K):
                if labels[l] == 0:
                    continue
                visit_and_log(k, l)
        else:
            stamp = ws.stamp
            queue = ws.queue
            stamp[k] = k
            queue[0] = k
            qn = 1
            qi = 0
            visit_and_log(k, k)
            while qi < qn:
                e = queue[qi]
                qi += 1
                for ii in range(adj_ptr[e], adj_ptr[e + 1]):
                    l = adj_idx[ii]
                    if stamp[l] == k:
                        continue
                    stamp[l] = k
                    if labels[l] == 0:
                        queue[qn] = l
                        qn += 1
                        continue
                    nz = visit_and_log(k, l)
                    if nz:
                        queue[qn] = l
                        qn += 1
    return (np.array(out_r, dtype=np.int64), np.array(out_c, dtype=np.int64),
            np.array(out_l, dtype=np.int64), np.array(out_v, dtype=float),
            vis, err, ek, el)
