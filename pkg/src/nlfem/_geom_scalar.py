"""Scalar clipping kernels shared by the compiled and interpreted engines.

Everything in this module is written in the numba-compilable subset: plain
loops, caller-provided output buffers, no python containers. The compiled
engine wraps these functions with njit unchanged, the interpreted engine and
the public geometry API call them directly, so both sides run the exact same
floating point operations.
"""

import math

# Relative tolerance that widens the closed ball so that boundary ties count
# as inside. Crossing points are computed against the same widened radius to
# keep the inside flags and the root bracketing consistent.
BALL_TIE_REL = 1e-12

# Consecutive polygon vertices closer than this (relative to delta) collapse.
DEDUP_REL = 1e-13

# Chords shorter than this (relative to delta) get no cap vertex.
CHORD_SKIP_REL = 1e-10

# Relative tolerance for the cap midpoint membership test.
CAP_MEMBER_REL = 1e-12


def clip_circle(pts, m, cx, cy, delta, out):
    """Clip a convex CCW polygon against the closed disk around (cx, cy).

    pts holds m vertices. Rows of out receive (x, y, flag) where flag is 1.0
    for circle crossing points and 0.0 for retained polygon vertices. Returns
    the number of rows written. Fewer than 3 rows means the overlap is empty
    or degenerate; the caller decides whether a cap pass can still rescue it.
    """
    rad = delta * (1.0 + BALL_TIE_REL)
    r2 = rad * rad
    dtol = DEDUP_REL * delta
    n = 0
    for i in range(m):
        ax = pts[i, 0]
        ay = pts[i, 1]
        j = i + 1
        if j == m:
            j = 0
        bx = pts[j, 0]
        by = pts[j, 1]
        dax = ax - cx
        day = ay - cy
        qa = dax * dax + day * day - r2
        dbx = bx - cx
        dby = by - cy
        qb = dbx * dbx + dby * dby - r2
        if qa <= 0.0:
            if n == 0 or abs(out[n - 1, 0] - ax) > dtol or abs(out[n - 1, 1] - ay) > dtol:
                out[n, 0] = ax
                out[n, 1] = ay
                out[n, 2] = 0.0
                n += 1
        ex = bx - ax
        ey = by - ay
        aa = ex * ex + ey * ey
        if aa <= 0.0:
            continue
        if qa <= 0.0 and qb <= 0.0:
            # both endpoints inside a convex set, segment cannot leave it
            continue
        bb = 2.0 * (ex * dax + ey * day)
        disc = bb * bb - 4.0 * aa * qa
        if disc <= 0.0:
            continue
        sq = math.sqrt(disc)
        t1 = (-bb - sq) / (2.0 * aa)
        t2 = (-bb + sq) / (2.0 * aa)
        if qa <= 0.0:
            # leaving the disk: the exit root is the larger one
            if 0.0 < t2 < 1.0:
                px = ax + t2 * ex
                py = ay + t2 * ey
                if n == 0 or abs(out[n - 1, 0] - px) > dtol or abs(out[n - 1, 1] - py) > dtol:
                    out[n, 0] = px
                    out[n, 1] = py
                    out[n, 2] = 1.0
                    n += 1
        elif qb <= 0.0:
            # entering the disk: the entry root is the smaller one
            if 0.0 < t1 < 1.0:
                px = ax + t1 * ex
                py = ay + t1 * ey
                if n == 0 or abs(out[n - 1, 0] - px) > dtol or abs(out[n - 1, 1] - py) > dtol:
                    out[n, 0] = px
                    out[n, 1] = py
                    out[n, 2] = 1.0
                    n += 1
        else:
            # outside to outside, the segment may dip through the disk
            if 0.0 < t1 and t2 < 1.0 and t1 < t2:
                px = ax + t1 * ex
                py = ay + t1 * ey
                if n == 0 or abs(out[n - 1, 0] - px) > dtol or abs(out[n - 1, 1] - py) > dtol:
                    out[n, 0] = px
                    out[n, 1] = py
                    out[n, 2] = 1.0
                    n += 1
                px = ax + t2 * ex
                py = ay + t2 * ey
                if abs(out[n - 1, 0] - px) > dtol or abs(out[n - 1, 1] - py) > dtol:
                    out[n, 0] = px
                    out[n, 1] = py
                    out[n, 2] = 1.0
                    n += 1
    # collapse a duplicated wrap-around vertex
    if n >= 2:
        if abs(out[0, 0] - out[n - 1, 0]) <= dtol and abs(out[0, 1] - out[n - 1, 1]) <= dtol:
            n -= 1
    return n


def insert_caps(pts, m, base, nb, cx, cy, delta, out):
    """Insert one arc midpoint behind every chord that cuts off a cap.

    base holds nb rows (x, y, crossing flag) produced by clip_circle. A cap
    exists between consecutive crossing points whose outward arc midpoint
    still lies inside the original polygon pts (m vertices). The augmented
    polygon is written to out (x, y rows); returns the new count.
    """
    rad = delta * (1.0 + BALL_TIE_REL)
    if nb < 2:
        for i in range(nb):
            out[i, 0] = base[i, 0]
            out[i, 1] = base[i, 1]
        return nb
    # membership tolerance scales with the polygon edge lengths
    href = 0.0
    for i in range(m):
        j = i + 1
        if j == m:
            j = 0
        ex = pts[j, 0] - pts[i, 0]
        ey = pts[j, 1] - pts[i, 1]
        el = math.sqrt(ex * ex + ey * ey)
        if el > href:
            href = el
    n = 0
    for i in range(nb):
        j = i + 1
        if j == nb:
            j = 0
        out[n, 0] = base[i, 0]
        out[n, 1] = base[i, 1]
        n += 1
        if base[i, 2] == 0.0 or base[j, 2] == 0.0:
            continue
        chx = base[j, 0] - base[i, 0]
        chy = base[j, 1] - base[i, 1]
        chord = math.sqrt(chx * chx + chy * chy)
        if chord < CHORD_SKIP_REL * delta:
            continue
        mx = 0.5 * (base[i, 0] + base[j, 0]) - cx
        my = 0.5 * (base[i, 1] + base[j, 1]) - cy
        nd = math.sqrt(mx * mx + my * my)
        if nd < 1e-14 * delta:
            continue
        capx = cx + rad * mx / nd
        capy = cy + rad * my / nd
        inside = True
        for e in range(m):
            f = e + 1
            if f == m:
                f = 0
            ex = pts[f, 0] - pts[e, 0]
            ey = pts[f, 1] - pts[e, 1]
            el = math.sqrt(ex * ex + ey * ey)
            cr = ex * (capy - pts[e, 1]) - ey * (capx - pts[e, 0])
            if cr < -CAP_MEMBER_REL * href * el:
                inside = False
                break
        if inside:
            out[n, 0] = capx
            out[n, 1] = capy
            n += 1
    return n


def clip_square(pts, m, cx, cy, delta, buf, out):
    """Clip a convex CCW polygon against the axis box of half width delta.

    Sutherland-Hodgman over the four half planes. buf and out are ping-pong
    buffers of shape (cap, 2); the result lands in out. Returns the count,
    zero when fewer than three vertices survive.
    """
    lo0 = cx - delta
    hi0 = cx + delta
    lo1 = cy - delta
    hi1 = cy + delta
    n = m
    for i in range(m):
        buf[i, 0] = pts[i, 0]
        buf[i, 1] = pts[i, 1]
    for plane in range(4):
        if plane == 0:
            axis = 0
            bound = lo0
            keep_ge = True
        elif plane == 1:
            axis = 0
            bound = hi0
            keep_ge = False
        elif plane == 2:
            axis = 1
            bound = lo1
            keep_ge = True
        else:
            axis = 1
            bound = hi1
            keep_ge = False
        nn = 0
        for i in range(n):
            j = i + 1
            if j == n:
                j = 0
            c0 = buf[i, 0]
            c1 = buf[i, 1]
            d0 = buf[j, 0]
            d1 = buf[j, 1]
            if axis == 0:
                cv = c0
                dv = d0
            else:
                cv = c1
                dv = d1
            if keep_ge:
                cin = cv >= bound
                din = dv >= bound
            else:
                cin = cv <= bound
                din = dv <= bound
            if cin:
                out[nn, 0] = c0
                out[nn, 1] = c1
                nn += 1
            if cin != din:
                t = (bound - cv) / (dv - cv)
                out[nn, 0] = c0 + t * (d0 - c0)
                out[nn, 1] = c1 + t * (d1 - c1)
                nn += 1
        n = nn
        for i in range(n):
            buf[i, 0] = out[i, 0]
            buf[i, 1] = out[i, 1]
        if n == 0:
            break
    # drop near-duplicate consecutive vertices
    dtol = DEDUP_REL * delta
    nn = 0
    for i in range(n):
        if nn > 0 and abs(buf[i, 0] - out[nn - 1, 0]) <= dtol and abs(buf[i, 1] - out[nn - 1, 1]) <= dtol:
            continue
        out[nn, 0] = buf[i, 0]
        out[nn, 1] = buf[i, 1]
        nn += 1
    if nn >= 2:
        if abs(out[0, 0] - out[nn - 1, 0]) <= dtol and abs(out[0, 1] - out[nn - 1, 1]) <= dtol:
            nn -= 1
    if nn < 3:
        return 0
    return nn
