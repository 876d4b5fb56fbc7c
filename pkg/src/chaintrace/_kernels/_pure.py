"""Pure-Python graph kernels; reference semantics for the compiled backend.

All functions take the CSR adjacency arrays built by chaintrace.graph and
return numpy int32 arrays.  The compiled backend in _speedups.pyx must
produce bit-identical results.
"""
from __future__ import annotations

import numpy as np


def taint_bfs(out_indptr, out_aids, spent_indptr, spent_txs, sources, n_addr, max_d):
    """Breadth-first search over the transaction linkage relation.

    Transactions in ``sources`` sit at depth 0; a transaction at depth d+1
    spends from an address paid by some depth-d transaction.  Returns
    (tx_depth, addr_dist) with -1 for unreached entries; an address's
    distance is the depth of its shallowest paying transaction, capped at
    ``max_d``.
    """
    n_tx = len(out_indptr) - 1
    oi = out_indptr.tolist()
    oa = out_aids.tolist()
    si = spent_indptr.tolist()
    st = spent_txs.tolist()
    tx_depth = [-1] * n_tx
    addr_dist = [-1] * n_addr
    frontier = []
    for s in np.asarray(sources).tolist():
        if tx_depth[s] == -1:
            tx_depth[s] = 0
            frontier.append(s)
    depth = 0
    while frontier and depth <= max_d:
        nxt = []
        for u in frontier:
            for k in range(oi[u], oi[u + 1]):
                a = oa[k]
                if addr_dist[a] != -1:
                    continue
                addr_dist[a] = depth
                if depth < max_d:
                    for j in range(si[a], si[a + 1]):
                        v = st[j]
                        if tx_depth[v] == -1:
                            tx_depth[v] = depth + 1
                            nxt.append(v)
        frontier = nxt
        depth += 1
    return (
        np.asarray(tx_depth, dtype=np.int32),
        np.asarray(addr_dist, dtype=np.int32),
    )


def hop_bfs(
    in_indptr,
    in_aids,
    out_indptr,
    out_aids,
    spent_indptr,
    spent_txs,
    prod_indptr,
    prod_txs,
    seeds,
    hops,
):
    """Address-to-address BFS where one hop traverses one transaction.

    Seed addresses are at hop 0.  Each level first gathers the unvisited
    transactions touching the frontier (as spender or producer), then all
    addresses touching those transactions.  Returns per-address hop count,
    -1 when unreached within ``hops``.
    """
    n_tx = len(in_indptr) - 1
    n_addr = len(spent_indptr) - 1
    ii = in_indptr.tolist()
    ia = in_aids.tolist()
    oi = out_indptr.tolist()
    oa = out_aids.tolist()
    si = spent_indptr.tolist()
    st = spent_txs.tolist()
    pi = prod_indptr.tolist()
    pt = prod_txs.tolist()
    addr_hop = [-1] * n_addr
    tx_seen = bytearray(n_tx)
    frontier = []
    for a in np.asarray(seeds).tolist():
        if addr_hop[a] == -1:
            addr_hop[a] = 0
            frontier.append(a)
    for level in range(1, hops + 1):
        if not frontier:
            break
        touched = []
        for a in frontier:
            for j in range(si[a], si[a + 1]):
                t = st[j]
                if not tx_seen[t]:
                    tx_seen[t] = 1
                    touched.append(t)
            for j in range(pi[a], pi[a + 1]):
                t = pt[j]
                if not tx_seen[t]:
                    tx_seen[t] = 1
                    touched.append(t)
        nxt = []
        for t in touched:
            for k in range(ii[t], ii[t + 1]):
                a = ia[k]
                if addr_hop[a] == -1:
                    addr_hop[a] = level
                    nxt.append(a)
            for k in range(oi[t], oi[t + 1]):
                a = oa[k]
                if addr_hop[a] == -1:
                    addr_hop[a] = level
                    nxt.append(a)
        frontier = nxt
    return np.asarray(addr_hop, dtype=np.int32)


def cospend_union(in_indptr, in_aids, n_addr):
    """Union-find closure over co-spent input addresses.

    Addresses appearing together in any transaction's input set share a
    component.  The returned root labels are canonical (smallest address
    id in the component), so the result is independent of transaction
    iteration order.
    """
    n_tx = len(in_indptr) - 1
    ii = in_indptr.tolist()
    ia = in_aids.tolist()
    parent = list(range(n_addr))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t in range(n_tx):
        lo, hi = ii[t], ii[t + 1]
        if hi - lo < 2:
            continue
        base = find(ia[lo])
        for k in range(lo + 1, hi):
            r = find(ia[k])
            if r == base:
                continue
            if r < base:
                parent[base] = r
                base = r
            else:
                parent[r] = base
    roots = [find(a) for a in range(n_addr)]
    return np.asarray(roots, dtype=np.int32)
