"""Compiled inner loops of the constructive heuristic.

Everything here works on flat integer arrays. Centroids are kept doubled
(``2x + w``) so wirelength sums stay integral until the final halving.

Table tuple ``tabs`` layout (see ``decoder.kernel_tables``)::

    0 dist      1 net_ptr  2 net_mem  3 net_cost  4 rn_ptr  5 rn_idx
    6 prox_i    7 prox_j   8 prox_c   9 rp_ptr   10 rp_idx
    11 ie_side 12 ie_cost 13 ie_ptr  14 ie_mem
    15 bx      16 by      17 bw      18 bh      19 brestr
    20 wts = [w_area, w_conn, w_prox, w_inter, aspect_lo, aspect_hi]

State tuple ``st``::

    0 rx  1 ry  2 rw  3 rh  4 placed
    5 nb (E, 4) doubled centroid box [minx, maxx, miny, maxy]   6 ncnt
    7 box int64[2] = W, H       8 acc float64[2] = conn2, prox2
    9 ox 10 oy 11 ow 12 oh 13 oid   14 nobs int64[1]
    15 meta int64[3] = amax, max obstacle width, max obstacle height
    16-20 obstacles (x, y, w, h, id) sorted by y; 21-25 the same sorted by x

Work tuple ``wk``: 0 stamp(E) 1 tbox(E,4) 2 tcnt(E) 3 touched(E) 4 gen int64[1]
5 buf int64[*] 6 upos int64[n] (member slot of a rect inside the moving unit, or -1)
"""

import numpy as np
from numba import njit

BIG = 1 << 60
PENALTY = 2.5


@njit(cache=True)
def slide_phase(axis, px, py, mid, mdx, mdy, mw, mh, nm, lb, st, drows,
                bx, by, bw, bh, brestr, cnt):
    """Move a unit along one axis with the other coordinate fixed.

    Obstacles colliding in the fixed coordinate are split by centroid into a
    lower and an upper set; the unit lands at the largest lower bound if that
    does not exceed the smallest upper bound. Returns ``(ok, coordinate)``.

    Only the band of obstacles that can collide is scanned. The obstacle
    copies sorted by the fixed coordinate keep that band contiguous, and the
    select-only loop body lets LLVM vectorize it.
    """
    nobs = st[14][0]
    meta = st[15]
    amax = meta[0]
    if axis == 0:
        sa = st[16]  # moving coordinate
        sb = st[17]  # fixed coordinate (sort key)
        ea = st[18]
        eb = st[19]
        ext_max = meta[2]
    else:
        sa = st[22]
        sb = st[21]
        ea = st[24]
        eb = st[23]
        ext_max = meta[1]
    lo = lb
    hi = BIG
    nb = bx.shape[0]
    scanned = 0
    for k in range(nm):
        if axis == 0:
            d = mdx[k]
            ma = px + d
            mb = py + mdy[k]
            wa = mw[k]
            wb = mh[k]
        else:
            d = mdy[k]
            ma = py + d
            mb = px + mdx[k]
            wa = mh[k]
            wb = mw[k]
        t0 = 0
        t_hi = nobs
        key = mb - amax - ext_max + 1
        while t0 < t_hi:
            m = (t0 + t_hi) >> 1
            if sb[m] < key:
                t0 = m + 1
            else:
                t_hi = m
        t1 = t0
        t_hi = nobs
        key = mb + wb + amax
        while t1 < t_hi:
            m = (t1 + t_hi) >> 1
            if sb[m] < key:
                t1 = m + 1
            else:
                t_hi = m
        scanned += t1 - t0
        c2 = 2 * ma + wa
        mbw = mb + wb
        for t in range(t0, t1):
            a = drows[axis, k, t]
            coll = (mbw + a > sb[t]) & (sb[t] + eb[t] + a > mb)
            cen = 2 * sa[t] + ea[t]
            low = coll & (cen <= c2)
            high = coll & (cen > c2)
            vl = sa[t] + ea[t] + a - d
            vr = sa[t] - wa - a - d
            lo = max(lo, vl if low else -BIG)
            hi = min(hi, vr if high else BIG)
        for b in range(nb):
            if axis == 0:
                ba, bb, bea, beb = bx[b], by[b], bw[b], bh[b]
            else:
                ba, bb, bea, beb = by[b], bx[b], bh[b], bw[b]
            if brestr[b, mid[k]] and mbw > bb and bb + beb > mb:
                if 2 * ba + bea <= c2:
                    v = ba + bea - d
                    if v > lo:
                        lo = v
                else:
                    v = ba - wa - d
                    if v < hi:
                        hi = v
    cnt[0] += scanned + nm * nb
    return lo <= hi, lo


@njit(cache=True)
def _sorted_insert(sx, sy, sw, sh, sid, n, by_y, x, y, w, h, rid):
    key = y if by_y else x
    keys = sy if by_y else sx
    t = n
    while t > 0 and keys[t - 1] > key:
        sx[t] = sx[t - 1]
        sy[t] = sy[t - 1]
        sw[t] = sw[t - 1]
        sh[t] = sh[t - 1]
        sid[t] = sid[t - 1]
        t -= 1
    sx[t] = x
    sy[t] = y
    sw[t] = w
    sh[t] = h
    sid[t] = rid


@njit(cache=True)
def fill_drows(drows, mid, nm, st, dist):
    """Distance rows of the moving members against both sorted obstacle copies."""
    nobs = st[14][0]
    yid = st[20]
    xid = st[25]
    for k in range(nm):
        c = mid[k]
        for t in range(nobs):
            drows[0, k, t] = dist[c, yid[t]]
            drows[1, k, t] = dist[c, xid[t]]


@njit(cache=True)
def rect_clear(x, y, w, h, rid, ox, oy, ow, oh, oid, nobs, dist):
    """True when the rectangle keeps its minimum distance to every obstacle."""
    for j in range(nobs):
        a = dist[rid, oid[j]]
        if not (x + w + a <= ox[j] or y + h + a <= oy[j]
                or ox[j] + ow[j] + a <= x or oy[j] + oh[j] + a <= y):
            return False
    return True


@njit(cache=True)
def _conn_delta(mx, my, mw, mh, mid, nm, st, tabs, wk, commit):
    net_cost = tabs[3]
    rn_ptr = tabs[4]
    rn_idx = tabs[5]
    nb = st[5]
    ncnt = st[6]
    stamp = wk[0]
    tbox = wk[1]
    tcnt = wk[2]
    touched = wk[3]
    gen = wk[4]
    gen[0] += 1
    g = gen[0]
    nt = 0
    for k in range(nm):
        c = mid[k]
        cx = 2 * mx[k] + mw[k]
        cy = 2 * my[k] + mh[k]
        for q in range(rn_ptr[c], rn_ptr[c + 1]):
            e = rn_idx[q]
            if stamp[e] != g:
                stamp[e] = g
                touched[nt] = e
                nt += 1
                tcnt[e] = ncnt[e]
                if ncnt[e] > 0:
                    for t in range(4):
                        tbox[e, t] = nb[e, t]
                else:
                    tbox[e, 0] = cx
                    tbox[e, 1] = cx
                    tbox[e, 2] = cy
                    tbox[e, 3] = cy
            if cx < tbox[e, 0]:
                tbox[e, 0] = cx
            if cx > tbox[e, 1]:
                tbox[e, 1] = cx
            if cy < tbox[e, 2]:
                tbox[e, 2] = cy
            if cy > tbox[e, 3]:
                tbox[e, 3] = cy
            tcnt[e] += 1
    d2 = 0.0
    for q in range(nt):
        e = touched[q]
        new = 0
        if tcnt[e] >= 2:
            new = tbox[e, 1] - tbox[e, 0] + tbox[e, 3] - tbox[e, 2]
        old = 0
        if ncnt[e] >= 2:
            old = nb[e, 1] - nb[e, 0] + nb[e, 3] - nb[e, 2]
        d2 += net_cost[e] * (new - old)
        if commit:
            for t in range(4):
                nb[e, t] = tbox[e, t]
            ncnt[e] = tcnt[e]
    return d2


@njit(cache=True)
def _prox_delta(mx, my, mw, mh, mid, nm, st, tabs, wk):
    rx = st[0]
    ry = st[1]
    rw = st[2]
    rh = st[3]
    placed = st[4]
    prox_i = tabs[6]
    prox_j = tabs[7]
    prox_c = tabs[8]
    rp_ptr = tabs[9]
    rp_idx = tabs[10]
    upos = wk[6]
    d2 = 0.0
    for k in range(nm):
        c = mid[k]
        cx = 2 * mx[k] + mw[k]
        cy = 2 * my[k] + mh[k]
        for q in range(rp_ptr[c], rp_ptr[c + 1]):
            pp = rp_idx[q]
            o = prox_j[pp] if prox_i[pp] == c else prox_i[pp]
            if placed[o]:
                ocx = 2 * rx[o] + rw[o]
                ocy = 2 * ry[o] + rh[o]
            elif upos[o] > k:
                s = upos[o]
                ocx = 2 * mx[s] + mw[s]
                ocy = 2 * my[s] + mh[s]
            else:
                continue
            d2 += prox_c[pp] * (abs(cx - ocx) + abs(cy - ocy))
    return d2


@njit(cache=True)
def _inter_total(mx, my, mw, mh, mid, nm, W, H, st, tabs, wk):
    rx = st[0]
    ry = st[1]
    rw = st[2]
    rh = st[3]
    placed = st[4]
    ie_side = tabs[11]
    ie_cost = tabs[12]
    ie_ptr = tabs[13]
    ie_mem = tabs[14]
    buf = wk[5]
    upos = wk[6]
    total = 0.0
    w2 = 2 * W
    h2 = 2 * H
    for e in range(ie_side.shape[0]):
        side = ie_side[e]
        cnt = 0
        depth = 0
        for q in range(ie_ptr[e], ie_ptr[e + 1]):
            c = ie_mem[q]
            if placed[c]:
                cx = 2 * rx[c] + rw[c]
                cy = 2 * ry[c] + rh[c]
            elif upos[c] >= 0:
                s = upos[c]
                cx = 2 * mx[s] + mw[s]
                cy = 2 * my[s] + mh[s]
            else:
                continue
            if side == 0:
                depth += cx
                buf[cnt] = cy
            elif side == 1:
                depth += w2 - cx
                buf[cnt] = cy
            elif side == 2:
                depth += cy
                buf[cnt] = cx
            else:
                depth += h2 - cy
                buf[cnt] = cx
            cnt += 1
        if cnt == 0:
            continue
        for q in range(1, cnt):
            v = buf[q]
            r = q
            while r > 0 and buf[r - 1] > v:
                buf[r] = buf[r - 1]
                r -= 1
            buf[r] = v
        t = buf[(cnt - 1) // 2]
        ext = h2 if side <= 1 else w2
        if t < 0:
            t = 0
        if t > ext:
            t = ext
        s = depth
        for q in range(cnt):
            s += abs(buf[q] - t)
        total += ie_cost[e] * s
    return total


@njit(cache=True)
def evaluate(mx, my, mw, mh, mid, nm, axis2, complete, st, tabs, wk, cnt):
    """Criterion of the current partial placement plus the given members.

    ``axis2 >= 0`` selects the symmetric sub-canvas width ``2 * right - axis2``.
    """
    wts = tabs[20]
    box = st[7]
    acc = st[8]
    W = box[0]
    H = box[1]
    for k in range(nm):
        if mx[k] + mw[k] > W:
            W = mx[k] + mw[k]
        if my[k] + mh[k] > H:
            H = my[k] + mh[k]
    Weff = W
    if axis2 >= 0:
        Weff = 2 * W - axis2
    # unconditional calls keep numba's refcount pruning effective; helpers
    # are cheap when their tables are empty
    conn2 = _conn_delta(mx, my, mw, mh, mid, nm, st, tabs, wk, False)
    prox2 = _prox_delta(mx, my, mw, mh, mid, nm, st, tabs, wk)
    inter2 = _inter_total(mx, my, mw, mh, mid, nm, W, H, st, tabs, wk)
    val = wts[0] * (Weff + H)
    val += wts[1] * (acc[0] + conn2) / 2.0
    val += wts[2] * (acc[1] + prox2) / 2.0
    val += wts[3] * inter2 / 2.0
    if complete and Weff > 0:
        big = Weff if Weff > H else H
        small = H if Weff > H else Weff
        ratio = small / big
        if ratio < wts[4] or ratio > wts[5]:
            val *= PENALTY
    cnt[1] += 1
    return val


@njit(cache=True)
def commit(mx, my, mw, mh, mid, nm, st, tabs, wk):
    rx = st[0]
    ry = st[1]
    rw = st[2]
    rh = st[3]
    placed = st[4]
    box = st[7]
    acc = st[8]
    ox = st[9]
    oy = st[10]
    ow = st[11]
    oh = st[12]
    oid = st[13]
    nobs = st[14]
    wts = tabs[20]
    if wts[1] != 0.0:
        acc[0] += _conn_delta(mx, my, mw, mh, mid, nm, st, tabs, wk, True)
    if wts[2] != 0.0:
        acc[1] += _prox_delta(mx, my, mw, mh, mid, nm, st, tabs, wk)
    for k in range(nm):
        c = mid[k]
        rx[c] = mx[k]
        ry[c] = my[k]
        rw[c] = mw[k]
        rh[c] = mh[k]
        placed[c] = True
        j = nobs[0]
        ox[j] = mx[k]
        oy[j] = my[k]
        ow[j] = mw[k]
        oh[j] = mh[k]
        oid[j] = c
        _sorted_insert(st[16], st[17], st[18], st[19], st[20], j, True,
                       mx[k], my[k], mw[k], mh[k], c)
        _sorted_insert(st[21], st[22], st[23], st[24], st[25], j, False,
                       mx[k], my[k], mw[k], mh[k], c)
        nobs[0] = j + 1
        meta = st[15]
        if mw[k] > meta[1]:
            meta[1] = mw[k]
        if mh[k] > meta[2]:
            meta[2] = mh[k]
        if mx[k] + mw[k] > box[0]:
            box[0] = mx[k] + mw[k]
        if my[k] + mh[k] > box[1]:
            box[1] = my[k] + mh[k]


@njit(cache=True)
def _amax(dist):
    amax = 0
    for i in range(dist.shape[0]):
        for j in range(dist.shape[1]):
            if dist[i, j] > amax:
                amax = dist[i, j]
    return amax


@njit(cache=True)
def make_state(n, n_nets, cap):
    return (
        np.zeros(n, np.int64), np.zeros(n, np.int64),
        np.zeros(n, np.int64), np.zeros(n, np.int64),
        np.zeros(n, np.bool_),
        np.zeros((n_nets, 4), np.int64), np.zeros(n_nets, np.int64),
        np.zeros(2, np.int64), np.zeros(2, np.float64),
        np.zeros(cap, np.int64), np.zeros(cap, np.int64),
        np.zeros(cap, np.int64), np.zeros(cap, np.int64),
        np.zeros(cap, np.int64), np.zeros(1, np.int64),
        np.zeros(3, np.int64),
        np.zeros(cap, np.int64), np.zeros(cap, np.int64), np.zeros(cap, np.int64),
        np.zeros(cap, np.int64), np.zeros(cap, np.int64),
        np.zeros(cap, np.int64), np.zeros(cap, np.int64), np.zeros(cap, np.int64),
        np.zeros(cap, np.int64), np.zeros(cap, np.int64),
    )


@njit(cache=True)
def make_work(n, n_nets, buf_len):
    return (
        np.zeros(n_nets, np.int64), np.zeros((n_nets, 4), np.int64),
        np.zeros(n_nets, np.int64), np.zeros(n_nets, np.int64),
        np.zeros(1, np.int64), np.zeros(buf_len + 1, np.int64),
        np.full(n, -1, np.int64),
    )


@njit(cache=True)
def _add_point(ptx, pty, ptg, ptd, npt, x, y, g, d):
    if x < 0:
        x = 0
    if y < 0:
        y = 0
    for q in range(npt):
        if ptx[q] == x and pty[q] == y:
            return npt
    ptx[npt] = x
    pty[npt] = y
    ptg[npt] = g
    ptd[npt] = d
    return npt + 1


@njit(cache=True)
def _drop(xq, yq, ox, oy, ow, oh, nobs, bx, by, bw, bh):
    """Top of the nearest obstacle straight below ``(xq, yq)``."""
    best = 0
    for j in range(nobs):
        if ox[j] <= xq < ox[j] + ow[j] and oy[j] + oh[j] <= yq and oy[j] + oh[j] > best:
            best = oy[j] + oh[j]
    for b in range(bx.shape[0]):
        if bx[b] <= xq < bx[b] + bw[b] and by[b] + bh[b] <= yq and by[b] + bh[b] > best:
            best = by[b] + bh[b]
    return best


@njit(cache=True)
def _scan_left(xq, yq, ox, oy, ow, oh, nobs, bx, by, bw, bh):
    """Right edge of the nearest obstacle straight left of ``(xq, yq)``."""
    best = 0
    for j in range(nobs):
        if oy[j] <= yq < oy[j] + oh[j] and ox[j] + ow[j] <= xq and ox[j] + ow[j] > best:
            best = ox[j] + ow[j]
    for b in range(bx.shape[0]):
        if by[b] <= yq < by[b] + bh[b] and bx[b] + bw[b] <= xq and bx[b] + bw[b] > best:
            best = bx[b] + bw[b]
    return best


@njit(cache=True)
def _better(val, x, y, bval, bx_, by_):
    if val < bval:
        return True
    if val == bval:
        if y < by_:
            return True
        if y == by_ and x < bx_:
            return True
    return False


@njit(cache=True)
def decode_units(u_ptr, u_mem, u_dx, u_dy, u_w, u_h, u_W, u_H, u_xfirst, u_tie,
                 keys, pm, tabs, cnt):
    """Place units one by one (lowest effective key first).

    Returns per-unit positions and a status flag (0 ok, 1 no feasible point).
    """
    dist = tabs[0]
    net_ptr = tabs[1]
    net_mem = tabs[2]
    rn_ptr = tabs[4]
    rn_idx = tabs[5]
    bx = tabs[15]
    by = tabs[16]
    bw = tabs[17]
    bh = tabs[18]
    brestr = tabs[19]
    n = keys.shape[0]
    U = u_ptr.shape[0] - 1
    E = net_ptr.shape[0] - 1
    B = bx.shape[0]
    ie_ptr = tabs[13]
    maxie = 0
    for e in range(ie_ptr.shape[0] - 1):
        if ie_ptr[e + 1] - ie_ptr[e] > maxie:
            maxie = ie_ptr[e + 1] - ie_ptr[e]
    st = make_state(n, E, n + 1)
    wk = make_work(n, E, maxie)
    ox = st[9]
    oy = st[10]
    ow = st[11]
    oh = st[12]
    oid = st[13]
    nobs = st[14]
    box = st[7]
    upos = wk[6]

    # pairwise unit distance used to shift points off their generating unit
    owner = np.empty(n, np.int64)
    for u in range(U):
        for q in range(u_ptr[u], u_ptr[u + 1]):
            owner[u_mem[q]] = u
    amax = _amax(dist)
    st[15][0] = amax

    cap = 10 * n + 4 * B + 16
    ptx = np.zeros(cap, np.int64)
    pty = np.zeros(cap, np.int64)
    ptg = np.zeros(cap, np.int64)
    ptd = np.zeros(cap, np.int64)
    npt = _add_point(ptx, pty, ptg, ptd, 0, 0, 0, -1, 0)
    for b in range(B):
        npt = _add_point(ptx, pty, ptg, ptd, npt, bx[b], by[b], -1, 0)
        npt = _add_point(ptx, pty, ptg, ptd, npt, bx[b] + bw[b], by[b], -1, 0)
        npt = _add_point(ptx, pty, ptg, ptd, npt, bx[b], by[b] + bh[b], -1, 0)
        npt = _add_point(ptx, pty, ptg, ptd, npt, bx[b] + bw[b], by[b] + bh[b], -1, 0)

    done = np.zeros(U, np.bool_)
    ux = np.zeros(U, np.int64)
    uy = np.zeros(U, np.int64)
    mmax = 1
    for u in range(U):
        if u_ptr[u + 1] - u_ptr[u] > mmax:
            mmax = u_ptr[u + 1] - u_ptr[u]
    drows = np.zeros((2, mmax, n + 1), np.int64)
    mx = np.zeros(mmax, np.int64)
    my = np.zeros(mmax, np.int64)
    mark = np.zeros(n, np.int64)
    ushift = np.zeros(U, np.int64)

    for step in range(U):
        # next unit: lowest effective key, ties by smallest member index
        best_u = -1
        best_key = np.inf
        for u in range(U):
            if done[u]:
                continue
            kmin = np.inf
            for q in range(u_ptr[u], u_ptr[u + 1]):
                if keys[u_mem[q]] < kmin:
                    kmin = keys[u_mem[q]]
            if best_u < 0 or kmin < best_key or (kmin == best_key and u_tie[u] < u_tie[best_u]):
                best_u = u
                best_key = kmin
        u = best_u
        s0 = u_ptr[u]
        nm = u_ptr[u + 1] - s0
        mid = u_mem[s0:s0 + nm]
        mdx = u_dx[s0:s0 + nm]
        mdy = u_dy[s0:s0 + nm]
        mw = u_w[s0:s0 + nm]
        mh = u_h[s0:s0 + nm]
        for k in range(nm):
            upos[mid[k]] = k
        fill_drows(drows, mid, nm, st, dist)
        # shift amount toward every already placed unit
        for v in range(U):
            ushift[v] = 0
        yid = st[20]
        for t in range(nobs[0]):
            v = owner[yid[t]]
            for k in range(nm):
                if drows[0, k, t] > ushift[v]:
                    ushift[v] = drows[0, k, t]
        first = 0 if u_xfirst[u] else 1
        second = 1 - first
        complete = step == U - 1

        found = False
        bval = np.inf
        bxx = 0
        byy = 0
        attempt = 0
        while True:
            for p in range(npt):
                sx = ptx[p]
                sy = pty[p]
                g = ptg[p]
                if g >= 0 and ushift[g] > 0:
                    if first == 0:
                        sx += ushift[g]
                    else:
                        sy += ushift[g]
                ok, c1 = slide_phase(first, sx, sy, mid, mdx, mdy, mw, mh, nm, 0,
                                     st, drows, bx, by, bw, bh, brestr, cnt)
                if not ok:
                    continue
                if first == 0:
                    sx = c1
                else:
                    sy = c1
                for k in range(nm):
                    mx[k] = sx + mdx[k]
                    my[k] = sy + mdy[k]
                val = evaluate(mx, my, mw, mh, mid, nm, -1, complete, st, tabs, wk, cnt)
                if not found or _better(val, sx, sy, bval, bxx, byy):
                    found = True
                    bval = val
                    bxx = sx
                    byy = sy
                tx = sx
                ty = sy
                ok, c2 = slide_phase(second, sx, sy, mid, mdx, mdy, mw, mh, nm, 0,
                                     st, drows, bx, by, bw, bh, brestr, cnt)
                if not ok:
                    continue
                if second == 0:
                    sx = c2
                else:
                    sy = c2
                if sx == tx and sy == ty:
                    continue
                for k in range(nm):
                    mx[k] = sx + mdx[k]
                    my[k] = sy + mdy[k]
                val = evaluate(mx, my, mw, mh, mid, nm, -1, complete, st, tabs, wk, cnt)
                if _better(val, sx, sy, bval, bxx, byy):
                    bval = val
                    bxx = sx
                    byy = sy
            if found:
                break
            attempt += 1
            if attempt == 1:
                npt = _add_point(ptx, pty, ptg, ptd, npt, 0, box[1], -1, 0)
                npt = _add_point(ptx, pty, ptg, ptd, npt, box[0], 0, -1, 0)
            elif attempt == 2:
                top = box[1]
                right = box[0]
                for b in range(B):
                    if by[b] + bh[b] > top:
                        top = by[b] + bh[b]
                    if bx[b] + bw[b] > right:
                        right = bx[b] + bw[b]
                npt = _add_point(ptx, pty, ptg, ptd, npt, 0, top + amax, -1, 0)
                npt = _add_point(ptx, pty, ptg, ptd, npt, right + amax, 0, -1, 0)
            else:
                return ux, uy, 1

        for k in range(nm):
            mx[k] = bxx + mdx[k]
            my[k] = byy + mdy[k]
        commit(mx, my, mw, mh, mid, nm, st, tabs, wk)
        for k in range(nm):
            upos[mid[k]] = -1
        done[u] = True
        ux[u] = bxx
        uy[u] = byy
        UW = u_W[u]
        UH = u_H[u]
        npt = _add_point(ptx, pty, ptg, ptd, npt, bxx + UW, byy, u, 1)
        npt = _add_point(ptx, pty, ptg, ptd, npt, bxx, byy + UH, u, 2)
        npt = _add_point(ptx, pty, ptg, ptd, npt, bxx + UW, byy + UH, u, 1)
        yd = _drop(bxx + UW, byy, ox, oy, ow, oh, nobs[0], bx, by, bw, bh)
        if yd < byy:
            npt = _add_point(ptx, pty, ptg, ptd, npt, bxx + UW, yd, u, 1)
        xl = _scan_left(bxx, byy + UH, ox, oy, ow, oh, nobs[0], bx, by, bw, bh)
        if xl < bxx:
            npt = _add_point(ptx, pty, ptg, ptd, npt, xl, byy + UH, u, 2)

        if pm < 1.0:
            # every unplaced net neighbour of the unit gets its key scaled once
            for k in range(nm):
                mark[mid[k]] = step + 1
            for k in range(nm):
                c = mid[k]
                for q in range(rn_ptr[c], rn_ptr[c + 1]):
                    e = rn_idx[q]
                    for r in range(net_ptr[e], net_ptr[e + 1]):
                        o = net_mem[r]
                        if mark[o] != step + 1 and not done[owner[o]]:
                            mark[o] = step + 1
                            keys[o] *= pm
    return ux, uy, 0


@njit(cache=True)
def place_group(kind, first, partner, gw, gh, order, xfirst, axis2, tabs, cnt):
    """Sub-placement of one symmetry group about a vertical axis at ``axis2 / 2``.

    ``kind[s]`` is 0 for a pair (``first`` right of the axis, ``partner``
    mirrored) and 1 for a self-symmetric member. Dimensions are per sub-unit.
    Returns local member coordinates indexed like the inputs (partner
    coordinates in the second pair of arrays) and a status flag.
    """
    dist = tabs[0]
    net_ptr = tabs[1]
    n = dist.shape[0]
    E = net_ptr.shape[0] - 1
    S = kind.shape[0]
    nomask = np.zeros((0, n), np.bool_)
    noblk = np.zeros(0, np.int64)
    st = make_state(n, E, 2 * S + 1)
    wk = make_work(n, E, 0)
    ox = st[9]
    oy = st[10]
    ow = st[11]
    oh = st[12]
    oid = st[13]
    nobs = st[14]
    box = st[7]
    upos = wk[6]

    amax = 0
    for s in range(S):
        for t in range(S):
            for a in (dist[first[s], first[t]], dist[first[s], partner[t]],
                      dist[partner[s], first[t]], dist[partner[s], partner[t]]):
                if a > amax:
                    amax = a
    st[15][0] = amax

    cap = 10 * S + 16
    ptx = np.zeros(cap, np.int64)
    pty = np.zeros(cap, np.int64)
    ptg = np.zeros(cap, np.int64)
    ptd = np.zeros(cap, np.int64)
    half = (axis2 + 1) // 2
    npt = _add_point(ptx, pty, ptg, ptd, 0, half, 0, -1, 0)

    fx = np.zeros(S, np.int64)
    fy = np.zeros(S, np.int64)
    drows = np.zeros((2, 1, 2 * S + 1), np.int64)
    zero1 = np.zeros(1, np.int64)
    mid = np.zeros(2, np.int64)
    mx = np.zeros(2, np.int64)
    my = np.zeros(2, np.int64)
    mw = np.zeros(2, np.int64)
    mh = np.zeros(2, np.int64)

    for step in range(S):
        s = order[step]
        w = gw[s]
        h = gh[s]
        c = first[s]
        mid[0] = c
        mw[0] = w
        mh[0] = h
        nm = 1
        if kind[s] == 0:
            mid[1] = partner[s]
            mw[1] = w
            mh[1] = h
            nm = 2
            upos[partner[s]] = 1
        upos[c] = 0
        mid1 = mid[:1]
        fill_drows(drows, mid1, 1, st, dist)
        complete = False
        found = False
        bval = np.inf
        bxx = 0
        byy = 0
        attempt = 0
        lbx = 0
        if kind[s] == 0:
            a = dist[c, partner[s]]
            lbx = (axis2 + a + 1) // 2
        else:
            lbx = (axis2 - w) // 2
        while True:
            for p in range(npt):
                sx = ptx[p]
                sy = pty[p]
                g = ptg[p]
                if kind[s] == 0 and 2 * sx < axis2:
                    continue
                first_axis = 0 if xfirst[s] else 1
                if g >= 0:
                    sh = dist[c, g]
                    if sh > 0:
                        if first_axis == 0 and kind[s] == 0:
                            sx += sh
                        else:
                            sy += sh
                if kind[s] == 1:
                    sx = lbx
                    ok, c1 = slide_phase(1, sx, sy, mid1, zero1, zero1, mw, mh, 1, 0,
                                         st, drows, noblk, noblk, noblk, noblk, nomask, cnt)
                    if not ok:
                        continue
                    mx[0] = sx
                    my[0] = c1
                    val = evaluate(mx, my, mw, mh, mid, 1, axis2, complete, st, tabs, wk, cnt)
                    if not found or _better(val, sx, c1, bval, bxx, byy):
                        found = True
                        bval = val
                        bxx = sx
                        byy = c1
                    continue
                if sx < lbx:
                    sx = lbx
                for phase in range(2):
                    ax = first_axis if phase == 0 else 1 - first_axis
                    ok, cc = slide_phase(ax, sx, sy, mid1, zero1, zero1, mw, mh, 1,
                                         lbx if ax == 0 else 0,
                                         st, drows, noblk, noblk, noblk, noblk, nomask, cnt)
                    if not ok:
                        break
                    if ax == 0:
                        sx = cc
                    else:
                        sy = cc
                    px_ = axis2 - sx - w
                    if not rect_clear(px_, sy, w, h, partner[s], ox, oy, ow, oh, oid,
                                      nobs[0], dist):
                        continue
                    mx[0] = sx
                    my[0] = sy
                    mx[1] = px_
                    my[1] = sy
                    val = evaluate(mx, my, mw, mh, mid, 2, axis2, complete, st, tabs, wk, cnt)
                    if not found or _better(val, sx, sy, bval, bxx, byy):
                        found = True
                        bval = val
                        bxx = sx
                        byy = sy
            if found:
                break
            attempt += 1
            if attempt == 1:
                npt = _add_point(ptx, pty, ptg, ptd, npt, half, box[1], -1, 0)
                npt = _add_point(ptx, pty, ptg, ptd, npt, box[0], 0, -1, 0)
            else:
                # clear of every member by construction
                bxx = lbx if lbx > half or kind[s] == 1 else half
                byy = box[1] + amax
                break
        mx[0] = bxx
        my[0] = byy
        if kind[s] == 0:
            mx[1] = axis2 - bxx - w
            my[1] = byy
        commit(mx, my, mw, mh, mid, nm, st, tabs, wk)
        for k in range(nm):
            upos[mid[k]] = -1
        fx[s] = bxx
        fy[s] = byy
        # new anchor points come from the member right of (or on) the axis
        npt = _add_point(ptx, pty, ptg, ptd, npt, bxx + w, byy, c, 1)
        npt = _add_point(ptx, pty, ptg, ptd, npt, bxx, byy + h, c, 2)
        npt = _add_point(ptx, pty, ptg, ptd, npt, bxx + w, byy + h, c, 1)
        yd = _drop(bxx + w, byy, ox, oy, ow, oh, nobs[0], noblk, noblk, noblk, noblk)
        if yd < byy:
            npt = _add_point(ptx, pty, ptg, ptd, npt, bxx + w, yd, c, 1)
        xl = _scan_left(bxx, byy + h, ox, oy, ow, oh, nobs[0], noblk, noblk, noblk, noblk)
        if xl < bxx and 2 * xl >= axis2:
            npt = _add_point(ptx, pty, ptg, ptd, npt, xl, byy + h, c, 2)
    return fx, fy, 0


@njit(cache=True)
def build_state(rx_in, ry_in, rw_in, rh_in, placed_in, tabs):
    """State for a fixed partial placement (used by the layout local search)."""
    net_ptr = tabs[1]
    n = rx_in.shape[0]
    E = net_ptr.shape[0] - 1
    ie_ptr = tabs[13]
    maxie = 0
    for e in range(ie_ptr.shape[0] - 1):
        if ie_ptr[e + 1] - ie_ptr[e] > maxie:
            maxie = ie_ptr[e + 1] - ie_ptr[e]
    st = make_state(n, E, n + 1)
    wk = make_work(n, E, maxie)
    st[15][0] = _amax(tabs[0])
    one = np.zeros(1, np.int64)
    mx = np.zeros(1, np.int64)
    my = np.zeros(1, np.int64)
    mw = np.zeros(1, np.int64)
    mh = np.zeros(1, np.int64)
    for c in range(n):
        if placed_in[c]:
            one[0] = c
            mx[0] = rx_in[c]
            my[0] = ry_in[c]
            mw[0] = rw_in[c]
            mh[0] = rh_in[c]
            commit(mx, my, mw, mh, one, 1, st, tabs, wk)
    return st, wk


@njit(cache=True)
def best_relocation(mid, mdx, mdy, vw, vh, ptx, pty, ptg, ptd, npt, st, wk, tabs, cnt):
    """Best position for a unit over every point, variant row and slide order.

    ``vw``/``vh`` have one row per variant choice and one column per member.
    Returns ``(value, x, y, variant_row)``; value is inf when nothing fits.
    """
    dist = tabs[0]
    bx = tabs[15]
    by = tabs[16]
    bw = tabs[17]
    bh = tabs[18]
    brestr = tabs[19]
    ox = st[9]
    oy = st[10]
    ow = st[11]
    oh = st[12]
    oid = st[13]
    nobs = st[14]
    upos = wk[6]
    nm = mid.shape[0]
    nv = vw.shape[0]
    drows = np.zeros((2, nm, nobs[0] + 1), np.int64)
    fill_drows(drows, mid, nm, st, dist)
    for k in range(nm):
        upos[mid[k]] = k
    mx = np.zeros(nm, np.int64)
    my = np.zeros(nm, np.int64)
    bval = np.inf
    bxx = 0
    byy = 0
    bvar = -1
    for v in range(nv):
        mw = vw[v]
        mh = vh[v]
        for first in range(2):
            for p in range(npt):
                sx = ptx[p]
                sy = pty[p]
                g = ptg[p]
                if g >= 0:
                    sh = 0
                    for k in range(nm):
                        if dist[mid[k], g] > sh:
                            sh = dist[mid[k], g]
                    if first == 0:
                        sx += sh
                    else:
                        sy += sh
                for phase in range(2):
                    ax = first if phase == 0 else 1 - first
                    ok, cc = slide_phase(ax, sx, sy, mid, mdx, mdy, mw, mh, nm, 0,
                                         st, drows, bx, by, bw, bh, brestr, cnt)
                    if not ok:
                        break
                    if ax == 0:
                        sx = cc
                    else:
                        sy = cc
                    for k in range(nm):
                        mx[k] = sx + mdx[k]
                        my[k] = sy + mdy[k]
                    val = evaluate(mx, my, mw, mh, mid, nm, -1, True, st, tabs, wk, cnt)
                    if val < bval or (val == bval and (sy < byy or (sy == byy and sx < bxx))):
                        bval = val
                        bxx = sx
                        byy = sy
                        bvar = v
    for k in range(nm):
        upos[mid[k]] = -1
    return bval, bxx, byy, bvar


@njit(cache=True)
def evaluate_at(mid, mx, my, mw, mh, st, wk, tabs, cnt):
    nm = mid.shape[0]
    upos = wk[6]
    for k in range(nm):
        upos[mid[k]] = k
    val = evaluate(mx, my, mw, mh, mid, nm, -1, True, st, tabs, wk, cnt)
    for k in range(nm):
        upos[mid[k]] = -1
    return val


@njit(cache=True)
def final_terms(x, y, w, h, tabs):
    """Bounding box and doubled raw criterion terms of a complete placement.

    Sums run in table order so results match the pure-Python evaluator bit
    for bit.
    """
    net_ptr = tabs[1]
    net_mem = tabs[2]
    net_cost = tabs[3]
    prox_i = tabs[6]
    prox_j = tabs[7]
    prox_c = tabs[8]
    ie_side = tabs[11]
    ie_cost = tabs[12]
    ie_ptr = tabs[13]
    ie_mem = tabs[14]
    n = x.shape[0]
    W = 0
    H = 0
    for c in range(n):
        if x[c] + w[c] > W:
            W = x[c] + w[c]
        if y[c] + h[c] > H:
            H = y[c] + h[c]
    conn2 = 0.0
    for e in range(net_cost.shape[0]):
        if net_ptr[e + 1] == net_ptr[e]:
            continue
        c = net_mem[net_ptr[e]]
        x0 = x1 = 2 * x[c] + w[c]
        y0 = y1 = 2 * y[c] + h[c]
        for q in range(net_ptr[e] + 1, net_ptr[e + 1]):
            c = net_mem[q]
            cx = 2 * x[c] + w[c]
            cy = 2 * y[c] + h[c]
            x0 = min(x0, cx)
            x1 = max(x1, cx)
            y0 = min(y0, cy)
            y1 = max(y1, cy)
        conn2 += net_cost[e] * (x1 - x0 + y1 - y0)
    prox2 = 0.0
    for q in range(prox_c.shape[0]):
        i = prox_i[q]
        j = prox_j[q]
        d2 = abs(2 * x[i] + w[i] - 2 * x[j] - w[j]) + abs(2 * y[i] + h[i] - 2 * y[j] - h[j])
        prox2 += prox_c[q] * d2
    inter2 = 0.0
    buf = np.empty(n, np.int64)
    w2 = 2 * W
    h2 = 2 * H
    for e in range(ie_side.shape[0]):
        side = ie_side[e]
        cnt = 0
        depth = 0
        for q in range(ie_ptr[e], ie_ptr[e + 1]):
            c = ie_mem[q]
            cx = 2 * x[c] + w[c]
            cy = 2 * y[c] + h[c]
            if side == 0:
                depth += cx
                buf[cnt] = cy
            elif side == 1:
                depth += w2 - cx
                buf[cnt] = cy
            elif side == 2:
                depth += cy
                buf[cnt] = cx
            else:
                depth += h2 - cy
                buf[cnt] = cx
            cnt += 1
        if cnt == 0:
            continue
        vals = np.sort(buf[:cnt])
        t = min(max(vals[(cnt - 1) // 2], 0), h2 if side <= 1 else w2)
        s = depth
        for q in range(cnt):
            s += abs(vals[q] - t)
        inter2 += ie_cost[e] * s
    return W, H, conn2, prox2, inter2
