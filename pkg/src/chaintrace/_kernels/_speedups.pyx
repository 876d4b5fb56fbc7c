# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels.  Semantics are defined by _pure.py; the two
backends must return bit-identical arrays for any input."""
import numpy as np


cdef inline object _i32(object x):
    return np.ascontiguousarray(x, dtype=np.int32)


def taint_bfs(out_indptr, out_aids, spent_indptr, spent_txs, sources, n_addr, max_d):
    cdef int[::1] oi = _i32(out_indptr)
    cdef int[::1] oa = _i32(out_aids)
    cdef int[::1] si = _i32(spent_indptr)
    cdef int[::1] st = _i32(spent_txs)
    cdef int[::1] src = _i32(sources)
    cdef Py_ssize_t n_tx = oi.shape[0] - 1
    cdef int cap = <int> max_d
    cdef int na = <int> n_addr

    tx_depth_arr = np.full(n_tx, -1, dtype=np.int32)
    addr_dist_arr = np.full(na, -1, dtype=np.int32)
    queue_arr = np.empty(max(n_tx, 1), dtype=np.int32)
    cdef int[::1] tx_depth = tx_depth_arr
    cdef int[::1] addr_dist = addr_dist_arr
    cdef int[::1] queue = queue_arr

    cdef Py_ssize_t head = 0, tail = 0
    cdef Py_ssize_t i, k, j
    cdef int u, a, v, d
    for i in range(src.shape[0]):
        u = src[i]
        if tx_depth[u] == -1:
            tx_depth[u] = 0
            queue[tail] = u
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        d = tx_depth[u]
        for k in range(oi[u], oi[u + 1]):
            a = oa[k]
            if addr_dist[a] != -1:
                continue
            addr_dist[a] = d
            if d < cap:
                for j in range(si[a], si[a + 1]):
                    v = st[j]
                    if tx_depth[v] == -1:
                        tx_depth[v] = d + 1
                        queue[tail] = v
                        tail += 1
    return tx_depth_arr, addr_dist_arr


def hop_bfs(in_indptr, in_aids, out_indptr, out_aids, spent_indptr, spent_txs,
            prod_indptr, prod_txs, seeds, hops):
    cdef int[::1] ii = _i32(in_indptr)
    cdef int[::1] ia = _i32(in_aids)
    cdef int[::1] oi = _i32(out_indptr)
    cdef int[::1] oa = _i32(out_aids)
    cdef int[::1] si = _i32(spent_indptr)
    cdef int[::1] st = _i32(spent_txs)
    cdef int[::1] pi = _i32(prod_indptr)
    cdef int[::1] pt = _i32(prod_txs)
    cdef int[::1] sd = _i32(seeds)
    cdef Py_ssize_t n_tx = ii.shape[0] - 1
    cdef Py_ssize_t n_addr = si.shape[0] - 1
    cdef int max_hops = <int> hops

    addr_hop_arr = np.full(n_addr, -1, dtype=np.int32)
    cdef int[::1] addr_hop = addr_hop_arr
    tx_seen_arr = np.zeros(max(n_tx, 1), dtype=np.uint8)
    cdef unsigned char[::1] tx_seen = tx_seen_arr
    cur_arr = np.empty(max(n_addr, 1), dtype=np.int32)
    nxt_arr = np.empty(max(n_addr, 1), dtype=np.int32)
    touched_arr = np.empty(max(n_tx, 1), dtype=np.int32)
    cdef int[::1] cur = cur_arr
    cdef int[::1] nxt = nxt_arr
    cdef int[::1] touched = touched_arr

    cdef Py_ssize_t n_cur = 0, n_nxt, n_touched
    cdef Py_ssize_t i, j, k
    cdef int a, t, level
    for i in range(sd.shape[0]):
        a = sd[i]
        if addr_hop[a] == -1:
            addr_hop[a] = 0
            cur[n_cur] = a
            n_cur += 1
    for level in range(1, max_hops + 1):
        if n_cur == 0:
            break
        n_touched = 0
        for i in range(n_cur):
            a = cur[i]
            for j in range(si[a], si[a + 1]):
                t = st[j]
                if not tx_seen[t]:
                    tx_seen[t] = 1
                    touched[n_touched] = t
                    n_touched += 1
            for j in range(pi[a], pi[a + 1]):
                t = pt[j]
                if not tx_seen[t]:
                    tx_seen[t] = 1
                    touched[n_touched] = t
                    n_touched += 1
        n_nxt = 0
        for i in range(n_touched):
            t = touched[i]
            for k in range(ii[t], ii[t + 1]):
                a = ia[k]
                if addr_hop[a] == -1:
                    addr_hop[a] = level
                    nxt[n_nxt] = a
                    n_nxt += 1
            for k in range(oi[t], oi[t + 1]):
                a = oa[k]
                if addr_hop[a] == -1:
                    addr_hop[a] = level
                    nxt[n_nxt] = a
                    n_nxt += 1
        cur_arr, nxt_arr = nxt_arr, cur_arr
        cur = cur_arr
        nxt = nxt_arr
        n_cur = n_nxt
    return addr_hop_arr


def cospend_union(in_indptr, in_aids, n_addr):
    cdef int[::1] ii = _i32(in_indptr)
    cdef int[::1] ia = _i32(in_aids)
    cdef Py_ssize_t n_tx = ii.shape[0] - 1
    cdef int na = <int> n_addr

    parent_arr = np.arange(na, dtype=np.int32)
    cdef int[::1] parent = parent_arr
    cdef Py_ssize_t t, k
    cdef int base, r, x, lo, hi

    for t in range(n_tx):
        lo = ii[t]
        hi = ii[t + 1]
        if hi - lo < 2:
            continue
        x = ia[lo]
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        base = x
        for k in range(lo + 1, hi):
            x = ia[k]
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            r = x
            if r == base:
                continue
            if r < base:
                parent[base] = r
                base = r
            else:
                parent[r] = base
    roots_arr = np.empty(na, dtype=np.int32)
    cdef int[::1] roots = roots_arr
    for k in range(na):
        x = <int> k
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        roots[k] = x
    return roots_arr
