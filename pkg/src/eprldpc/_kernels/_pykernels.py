"""Pure-Python/numpy versions of the compiled kernels (same signatures)."""

from __future__ import annotations

from collections import deque

import numpy as np

CLIP = 30.0
GUARD = 1e-12


def bp_run(chk_ptr, edge_var, var_ptr, var_edge, llr, v2c, c2v, post, hard, trace,
           check_ops, n_iter, early_stop):
    M = len(chk_ptr) - 1
    N = len(var_ptr) - 1
    deg_c = np.diff(chk_ptr)
    check_ids = np.repeat(np.arange(M), deg_c)
    var_ids = np.repeat(np.arange(N), np.diff(var_ptr))
    # position of each edge inside its check row, for the exclusive products
    local = np.arange(len(edge_var)) - chk_ptr[check_ids]
    maxd = int(deg_c.max()) if M else 0
    np.maximum(check_ops, deg_c, out=check_ops)
    for it in range(n_iter):
        t = np.ones((M, maxd + 1))
        t[check_ids, local] = np.tanh(0.5 * v2c)
        # exclusive product via prefix and suffix cumulative products
        pre = np.ones((M, maxd + 1))
        pre[:, 1:] = np.cumprod(t[:, :-1], axis=1)
        suf = np.ones((M, maxd + 1))
        suf[:, :-1] = np.cumprod(t[:, :0:-1], axis=1)[:, ::-1]
        x = pre[check_ids, local] * suf[check_ids, local]
        np.clip(x, -1.0 + GUARD, 1.0 - GUARD, out=x)
        c2v[:] = np.clip(2.0 * np.arctanh(x), -CLIP, CLIP)
        tot = np.asarray(llr, dtype=float).copy()
        np.add.at(tot, var_ids, c2v[var_edge])
        post[:] = tot
        hard[:] = tot < 0
        v2c[var_edge] = np.clip(tot[var_ids] - c2v[var_edge], -CLIP, CLIP)
        syn = np.zeros(M, dtype=np.int64)
        np.add.at(syn, check_ids, hard[edge_var])
        w = int(np.count_nonzero(syn & 1))
        trace[it] = w
        if early_stop and w == 0:
            return it + 1
    return n_iter


def edge_girth(chk_ptr, chk_var, var_ptr, var_chk, qc, qv, cap, out_len, out_cnt):
    N = len(var_ptr) - 1
    vadj = [var_chk[var_ptr[v]:var_ptr[v + 1]].tolist() for v in range(N)]
    cadj = [chk_var[chk_ptr[c]:chk_ptr[c + 1]].tolist() for c in range(len(chk_ptr) - 1)]
    for t in range(len(qc)):
        c0, src = int(qc[t]), int(qv[t])
        target = N + c0
        dist = {src: 0}
        cnt = {src: 1.0}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            du = dist[u]
            if du >= cap - 1:
                break
            if target in dist and du >= dist[target]:
                break
            if u < N:
                nbrs = (N + x for x in vadj[u])
            else:
                nbrs = iter(cadj[u - N])
            for y in nbrs:
                if (u == src and y == target) or (u == target and y == src):
                    continue
                dy = dist.get(y)
                if dy is None:
                    dist[y] = du + 1
                    cnt[y] = cnt[u]
                    queue.append(y)
                elif dy == du + 1:
                    cnt[y] += cnt[u]
        if target in dist:
            out_len[t] = dist[target] + 1
            out_cnt[t] = cnt[target]
        else:
            out_len[t] = 0
            out_cnt[t] = 0.0
