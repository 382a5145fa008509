# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: flooding BP on edge arrays and per-edge cycle BFS."""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh, atanh

ctypedef cnp.int64_t i64

cdef double CLIP = 30.0
cdef double GUARD = 1e-12


def bp_run(const i64[::1] chk_ptr, const i64[::1] edge_var,
           const i64[::1] var_ptr, const i64[::1] var_edge,
           const double[::1] llr, double[::1] v2c, double[::1] c2v,
           double[::1] post, cnp.uint8_t[::1] hard, i64[::1] trace,
           i64[::1] check_ops, int n_iter, bint early_stop):
    """Run up to ``n_iter`` flooding iterations in place; return iterations used.

    ``v2c`` holds the variable-to-check messages going into the next check
    update and is left ready for another call.
    """
    cdef Py_ssize_t M = chk_ptr.shape[0] - 1
    cdef Py_ssize_t N = var_ptr.shape[0] - 1
    cdef Py_ssize_t c, v, k, s, e, d, it, maxd = 0
    cdef double acc, x, m, tot
    cdef i64 w
    cdef unsigned char par
    for c in range(M):
        if chk_ptr[c + 1] - chk_ptr[c] > maxd:
            maxd = chk_ptr[c + 1] - chk_ptr[c]
    cdef double[::1] tk = np.empty(maxd + 1)
    cdef double[::1] pre = np.empty(maxd + 1)
    for it in range(n_iter):
        for c in range(M):
            s = chk_ptr[c]
            e = chk_ptr[c + 1]
            d = e - s
            acc = 1.0
            for k in range(d):
                tk[k] = tanh(0.5 * v2c[s + k])
                pre[k] = acc
                acc = acc * tk[k]
            if d > check_ops[c]:
                check_ops[c] = d
            acc = 1.0
            for k in range(d - 1, -1, -1):
                x = pre[k] * acc
                acc = acc * tk[k]
                if x > 1.0 - GUARD:
                    x = 1.0 - GUARD
                elif x < -1.0 + GUARD:
                    x = -1.0 + GUARD
                m = 2.0 * atanh(x)
                if m > CLIP:
                    m = CLIP
                elif m < -CLIP:
                    m = -CLIP
                c2v[s + k] = m
        for v in range(N):
            tot = llr[v]
            for k in range(var_ptr[v], var_ptr[v + 1]):
                tot = tot + c2v[var_edge[k]]
            post[v] = tot
            hard[v] = 1 if tot < 0 else 0
            for k in range(var_ptr[v], var_ptr[v + 1]):
                m = tot - c2v[var_edge[k]]
                if m > CLIP:
                    m = CLIP
                elif m < -CLIP:
                    m = -CLIP
                v2c[var_edge[k]] = m
        w = 0
        for c in range(M):
            par = 0
            for k in range(chk_ptr[c], chk_ptr[c + 1]):
                par ^= hard[edge_var[k]]
            w += par
        trace[it] = w
        if early_stop and w == 0:
            return it + 1
    return n_iter


def edge_girth(const i64[::1] chk_ptr, const i64[::1] chk_var,
               const i64[::1] var_ptr, const i64[::1] var_chk,
               const i64[::1] qc, const i64[::1] qv, int cap,
               i64[::1] out_len, double[::1] out_cnt):
    """Shortest cycle through each query edge ``(qc[t], qv[t])``.

    Writes the cycle length (0 when none of length <= cap) and the number of
    such shortest cycles through the edge.
    """
    cdef Py_ssize_t M = chk_ptr.shape[0] - 1
    cdef Py_ssize_t N = var_ptr.shape[0] - 1
    cdef Py_ssize_t n_nodes = M + N
    cdef i64[::1] dist = np.full(n_nodes, -1, dtype=np.int64)
    cdef double[::1] cnt = np.zeros(n_nodes)
    cdef i64[::1] queue = np.empty(n_nodes, dtype=np.int64)
    cdef Py_ssize_t t, head, tail, k, u, y, target, src, c0, i
    cdef i64 du
    for t in range(qc.shape[0]):
        c0 = qc[t]
        src = qv[t]
        target = N + c0
        dist[src] = 0
        cnt[src] = 1.0
        queue[0] = src
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            if du >= cap - 1:
                break
            if dist[target] != -1 and du >= dist[target]:
                break
            if u < N:
                for k in range(var_ptr[u], var_ptr[u + 1]):
                    y = N + var_chk[k]
                    if u == src and y == target:
                        continue
                    if dist[y] == -1:
                        dist[y] = du + 1
                        cnt[y] = cnt[u]
                        queue[tail] = y
                        tail += 1
                    elif dist[y] == du + 1:
                        cnt[y] += cnt[u]
            else:
                for k in range(chk_ptr[u - N], chk_ptr[u - N + 1]):
                    y = chk_var[k]
                    if u == target and y == src:
                        continue
                    if dist[y] == -1:
                        dist[y] = du + 1
                        cnt[y] = cnt[u]
                        queue[tail] = y
                        tail += 1
                    elif dist[y] == du + 1:
                        cnt[y] += cnt[u]
        if dist[target] != -1:
            out_len[t] = dist[target] + 1
            out_cnt[t] = cnt[target]
        else:
            out_len[t] = 0
            out_cnt[t] = 0.0
        for i in range(tail):
            dist[queue[i]] = -1
            cnt[queue[i]] = 0.0
