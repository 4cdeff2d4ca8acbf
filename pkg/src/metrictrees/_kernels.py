"""Compiled inner loops for the combinatorial scans.

Each kernel writes one result per input row and performs no reduction, so
callers can split rows across threads and combine results in row order
without any scheduling dependence. The pure-Python routes in
``hyperbolicity`` and ``lens`` implement the same rules independently and
the test-suite cross-checks the two.
"""

import numpy as np
from numba import njit

TIE_EPS = 1e-12


@njit(cache=True, nogil=True)
def _oriented_time(T, i, j, cnt, rev, q):
    if rev:
        return T[i, j, cnt - 1] - T[i, j, cnt - 1 - q]
    return T[i, j, q]


@njit(cache=True, nogil=True)
def _oriented_point(P, i, j, cnt, rev, q):
    if rev:
        return P[i, j, cnt - 1 - q]
    return P[i, j, q]


@njit(cache=True, nogil=True)
def eval_oriented(P, T, i, j, cnt, rev, t):
    """Nearest vertex of the (possibly reversed) i->j path at time t."""
    L = T[i, j, cnt - 1]
    eps = TIE_EPS * max(1.0, abs(L))
    best = np.inf
    for q in range(cnt):
        g = abs(_oriented_time(T, i, j, cnt, rev, q) - t)
        if g < best:
            best = g
    for q in range(cnt):
        if abs(_oriented_time(T, i, j, cnt, rev, q) - t) <= best + eps:
            return _oriented_point(P, i, j, cnt, rev, q)
    return _oriented_point(P, i, j, cnt, rev, cnt - 1)


@njit(cache=True, nogil=True)
def thinness_kernel(D, P, T, C, tris, win, out_delta, out_k, out_t):
    """Thinness of each triangle ``tris[q] = (x1, x2, x3)`` with x1 < x2 < x3.

    Edges are the canonical paths ``P[x_k, x_l]`` for k < l; the edge leaving
    a later vertex is the reversal of the stored one.
    """
    for q in range(tris.shape[0]):
        v0 = tris[q, 0]
        v1 = tris[q, 1]
        v2 = tris[q, 2]
        vs = (v0, v1, v2)
        d01 = D[v0, v1]
        d02 = D[v0, v2]
        d12 = D[v1, v2]
        a = (max(0.0, 0.5 * (d01 + d02 - d12)),
             max(0.0, 0.5 * (d01 + d12 - d02)),
             max(0.0, 0.5 * (d02 + d12 - d01)))
        best = -1.0
        bk = -1
        bt = 0.0
        for k in range(3):
            if k == 0:
                l, m = 1, 2
            elif k == 1:
                l, m = 0, 2
            else:
                l, m = 0, 1
            ak = a[k]
            # edge A: k -> l, edge B: k -> m
            if k < l:
                ai, aj, arev = vs[k], vs[l], False
            else:
                ai, aj, arev = vs[l], vs[k], True
            if k < m:
                bi, bj, brev = vs[k], vs[m], False
            else:
                bi, bj, brev = vs[m], vs[k], True
            acnt = C[ai, aj]
            bcnt = C[bi, bj]
            for src in range(2):
                if src == 0:
                    si, sj, scnt, srev = ai, aj, acnt, arev
                else:
                    si, sj, scnt, srev = bi, bj, bcnt, brev
                for qq in range(scnt):
                    t = _oriented_time(T, si, sj, scnt, srev, qq)
                    if t > ak + win:
                        break
                    pa = eval_oriented(P, T, ai, aj, acnt, arev, t)
                    pb = eval_oriented(P, T, bi, bj, bcnt, brev, t)
                    dd = D[pa, pb]
                    if dd > best or (dd == best and (k < bk or (k == bk and t < bt))):
                        best = dd
                        bk = k
                        bt = t
        out_delta[q] = best
        out_k[q] = bk
        out_t[q] = bt


@njit(cache=True, nogil=True)
def inner_outer_kernel(D, masks, tau, z_in, nu, z_out, rad):
    """Best inscribed and best enclosing ball of each member mask."""
    n = D.shape[0]
    for q in range(masks.shape[0]):
        bR = np.inf
        bz = -1
        for z in range(n):
            mx = 0.0
            for p in range(n):
                if masks[q, p] and D[z, p] > mx:
                    mx = D[z, p]
            if mx < bR:
                bR = mx
                bz = z
        z_out[q] = bz
        rad[q] = bR

        bn = -1.0
        bzi = -1
        for z in range(n):
            if not masks[q, z]:
                continue
            rout = np.inf
            for p in range(n):
                if not masks[q, p] and D[z, p] < rout:
                    rout = D[z, p]
            v = -1.0
            for p in range(n):
                dp = D[z, p]
                if dp + tau < rout and dp > v:
                    v = dp
            if v > bn:
                bn = v
                bzi = z
        z_in[q] = bzi
        nu[q] = bn


@njit(cache=True, nogil=True)
def witness_kernel(D, P, T, C, xs, ys, rs, ss, tau, z_out, nu_out, inner_out, outer_out):
    """Constructive inscribed-ball witness for each ball pair B(x,r), B(y,s)."""
    n = D.shape[0]
    for q in range(xs.shape[0]):
        x = xs[q]
        y = ys[q]
        r = rs[q]
        s = ss[q]
        if r < s:
            x, y = y, x
            r, s = s, r
        d = D[x, y]
        if r - s > d:
            z = y
            nu = s
        else:
            t = min(max(0.5 * (r - s + d), 0.0), d)
            z = eval_oriented(P, T, x, y, C[x, y], False, t)
            nu = max(0.0, 0.5 * (r + s - d))
        inner = 0.0
        outer = 0.0
        for w in range(n):
            if D[z, w] <= nu + tau:
                e = max(D[x, w] - r, D[y, w] - s)
                if e > inner:
                    inner = e
            if D[x, w] <= r + tau and D[y, w] <= s + tau:
                e = D[z, w] - nu
                if e > outer:
                    outer = e
        z_out[q] = z
        nu_out[q] = nu
        inner_out[q] = inner
        outer_out[q] = outer
