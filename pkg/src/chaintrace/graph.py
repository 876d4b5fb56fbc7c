"""Windowed transaction/address graph and the path, clustering, and
neighborhood queries built on it.

The graph is bipartite: transactions link to the addresses they pay
(outputs) and the addresses they draw from (inputs, resolved through
outpoints).  Two consecutive transactions are linked when the later one
spends from an address the earlier one paid; that relation drives the
taint-distance search.  Adjacency is stored as CSR integer arrays so the
hot traversals run in the compiled kernel when available.

A graph is immutable after build; every query is pure and safe to call
concurrently.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from . import _kernels
from .ingest import BlackAddressSet
from .model import Ledger, Transaction

AddressSeeds = Union[BlackAddressSet, Iterable[str]]


@dataclass(frozen=True)
class ResolvedInput:
    """One spent outpoint with its resolved address and value."""

    address: str
    value: int
    src_txid: str
    src_index: int


@dataclass(frozen=True)
class TxGraph:
    window: tuple[int, int]
    txs: tuple[Transaction, ...]
    txid_to_idx: dict[str, int]
    addresses: list[str]  # address id -> string
    addr_ids: dict[str, int]
    resolved_inputs: tuple[tuple[ResolvedInput, ...], ...]  # aligned with txs
    spender_of: dict[tuple[str, int], int]  # outpoint -> spending tx index
    in_indptr: np.ndarray = field(repr=False)
    in_aids: np.ndarray = field(repr=False)
    out_indptr: np.ndarray = field(repr=False)
    out_aids: np.ndarray = field(repr=False)
    spent_indptr: np.ndarray = field(repr=False)
    spent_txs: np.ndarray = field(repr=False)
    prod_indptr: np.ndarray = field(repr=False)
    prod_txs: np.ndarray = field(repr=False)

    @property
    def n_tx(self) -> int:
        return len(self.txs)

    @property
    def n_addresses(self) -> int:
        return len(self.addresses)


def _csr(groups: list[list[int]], dtype=np.int32) -> tuple[np.ndarray, np.ndarray]:
    indptr = np.zeros(len(groups) + 1, dtype=dtype)
    for i, g in enumerate(groups):
        indptr[i + 1] = indptr[i] + len(g)
    data = np.empty(int(indptr[-1]), dtype=dtype)
    pos = 0
    for g in groups:
        data[pos : pos + len(g)] = g
        pos += len(g)
    return indptr, data


def build_graph(ledger: Ledger, window: tuple[int, int] | None = None) -> TxGraph:
    """Materialize the bipartite graph for a sub-window of a ledger.

    Inputs are resolved through the full ledger, so a window transaction
    may draw from an output created before the window; the address still
    becomes part of the window's address universe.
    """
    if window is None:
        window = ledger.window
    if window[0] < ledger.window[0] or window[1] > ledger.window[1]:
        raise ValueError("window must lie within the ledger window")
    txs = ledger.slice(window)

    addr_ids: dict[str, int] = {}
    addresses: list[str] = []

    def intern(addr: str) -> int:
        aid = addr_ids.get(addr)
        if aid is None:
            aid = len(addresses)
            addr_ids[addr] = aid
            addresses.append(addr)
        return aid

    txid_to_idx = {tx.txid: i for i, tx in enumerate(txs)}
    resolved: list[tuple[ResolvedInput, ...]] = []
    in_groups: list[list[int]] = []
    out_groups: list[list[int]] = []
    spender_of: dict[tuple[str, int], int] = {}
    for i, tx in enumerate(txs):
        ins = []
        in_aid_set: dict[int, None] = {}
        for op in tx.inputs:
            out = ledger.resolve(op)
            ins.append(ResolvedInput(out.address, out.value, op.txid, op.index))
            in_aid_set[intern(out.address)] = None
            spender_of[(op.txid, op.index)] = i
        resolved.append(tuple(ins))
        in_groups.append(list(in_aid_set))
        out_aid_set: dict[int, None] = {}
        for out in tx.outputs:
            out_aid_set[intern(out.address)] = None
        out_groups.append(list(out_aid_set))

    spent_groups: list[list[int]] = [[] for _ in addresses]
    prod_groups: list[list[int]] = [[] for _ in addresses]
    for i in range(len(txs)):
        for aid in in_groups[i]:
            spent_groups[aid].append(i)
        for aid in out_groups[i]:
            prod_groups[aid].append(i)

    in_indptr, in_aids = _csr(in_groups)
    out_indptr, out_aids = _csr(out_groups)
    spent_indptr, spent_txs = _csr(spent_groups)
    prod_indptr, prod_txs = _csr(prod_groups)
    return TxGraph(
        window=window,
        txs=txs,
        txid_to_idx=txid_to_idx,
        addresses=addresses,
        addr_ids=addr_ids,
        resolved_inputs=tuple(resolved),
        spender_of=spender_of,
        in_indptr=in_indptr,
        in_aids=in_aids,
        out_indptr=out_indptr,
        out_aids=out_aids,
        spent_indptr=spent_indptr,
        spent_txs=spent_txs,
        prod_indptr=prod_indptr,
        prod_txs=prod_txs,
    )


def _seed_addresses(seeds: AddressSeeds) -> frozenset[str]:
    if isinstance(seeds, BlackAddressSet):
        return seeds.addresses
    return frozenset(seeds)


def taint_distance(graph: TxGraph, black: AddressSeeds, max_d: int) -> dict[str, int]:
    """Minimum transaction-path length from black addresses.

    A path starts at a window transaction paying a black address (depth 0)
    and steps to any transaction spending from an address the previous one
    paid.  An address's distance is the depth of the shallowest
    transaction paying it; black addresses present in the window are
    reported at distance 0.  Addresses farther than ``max_d`` (or
    unreachable) are omitted.
    """
    if max_d < 0:
        raise ValueError("max_d must be >= 0")
    black_set = _seed_addresses(black)
    black_aids = [graph.addr_ids[a] for a in black_set if a in graph.addr_ids]
    sources: list[int] = []
    for aid in black_aids:
        lo, hi = graph.prod_indptr[aid], graph.prod_indptr[aid + 1]
        sources.extend(graph.prod_txs[lo:hi].tolist())
    src = np.asarray(sorted(set(sources)), dtype=np.int32)
    _, addr_dist = _kernels.taint_bfs(
        graph.out_indptr,
        graph.out_aids,
        graph.spent_indptr,
        graph.spent_txs,
        src,
        graph.n_addresses,
        max_d,
    )
    dist = addr_dist.tolist()
    for aid in black_aids:
        dist[aid] = 0
    return {graph.addresses[aid]: d for aid, d in enumerate(dist) if 0 <= d <= max_d}


def reach_counts(graph: TxGraph, black: AddressSeeds, max_d: int) -> dict[int, int]:
    """Histogram of taint distances: how many addresses sit at each
    distance 1..max_d (the black set itself, distance 0, is excluded).
    Distances with no addresses are omitted.
    """
    distances = taint_distance(graph, black, max_d)
    counts = Counter(d for d in distances.values() if d >= 1)
    return {d: counts[d] for d in sorted(counts)}


# An amount is "round" at or above this granularity (0.001 BTC); the change
# heuristic only trusts oddly specific values.
ROUND_GRANULARITY_SAT = 100_000


def _change_merges(graph: TxGraph) -> list[tuple[int, int]]:
    """(input aid, change aid) pairs under the optional change rule.

    An output is deemed the change when its address appears for the first
    time in the window at that transaction (never as an earlier input or
    output) and its amount is not a round multiple of 0.001 BTC; the rule
    fires only when exactly one output of a multi-output spend qualifies.
    This heuristic is error-prone by nature, which is why it stays off by
    default.
    """
    first_seen: dict[int, int] = {}
    for idx in range(graph.n_tx):
        for rin in graph.resolved_inputs[idx]:
            first_seen.setdefault(graph.addr_ids[rin.address], -1)  # funded pre-window
        for out in graph.txs[idx].outputs:
            first_seen.setdefault(graph.addr_ids[out.address], idx)
    pairs: list[tuple[int, int]] = []
    for idx, tx in enumerate(graph.txs):
        if tx.is_coinbase or len(tx.outputs) < 2:
            continue
        qualifying = []
        for out in tx.outputs:
            aid = graph.addr_ids[out.address]
            if first_seen[aid] == idx and out.value % ROUND_GRANULARITY_SAT != 0:
                qualifying.append(aid)
        distinct = set(qualifying)
        if len(qualifying) == 1 and len(distinct) == 1:
            pairs.append((graph.addr_ids[graph.resolved_inputs[idx][0].address], qualifying[0]))
    return pairs


def cluster_multi_input(graph: TxGraph, change_heuristic: bool = False) -> list[set[str]]:
    """Partition window addresses by the multi-input heuristic.

    Addresses co-appearing in any transaction's input set are merged; the
    closure over all transactions yields the partition.  With
    ``change_heuristic`` the fresh-address/non-round change rule
    additionally links one output per spend back to the spender (see
    :func:`_change_merges`; off by default because it misfires easily).
    Clusters are ordered by their smallest member so the output is
    deterministic.
    """
    roots = _kernels.cospend_union(graph.in_indptr, graph.in_aids, graph.n_addresses)
    labels = roots.tolist()
    if change_heuristic:
        parent: dict[int, int] = {}

        def find(x: int) -> int:
            while parent.get(x, x) != x:
                parent[x] = parent.get(parent[x], parent[x])
                x = parent[x]
            return x

        for a, b in _change_merges(graph):
            ra, rb = find(labels[a]), find(labels[b])
            if ra != rb:
                lo, hi = min(ra, rb), max(ra, rb)
                parent[hi] = lo
        labels = [find(r) for r in labels]
    clusters: dict[int, set[str]] = {}
    for aid, root in enumerate(labels):
        clusters.setdefault(root, set()).add(graph.addresses[aid])
    return sorted(clusters.values(), key=min)


def addresses_within(graph: TxGraph, seeds: AddressSeeds, hops: int) -> set[str]:
    """The window addresses within ``hops`` address-to-address hops of the
    seed set (seeds included at hop 0; seeds outside the window ignored)."""
    if hops < 0:
        raise ValueError("hops must be >= 0")
    seed_aids = np.asarray(
        sorted(graph.addr_ids[a] for a in _seed_addresses(seeds) if a in graph.addr_ids),
        dtype=np.int32,
    )
    if seed_aids.size == 0:
        return set()
    addr_hop = _kernels.hop_bfs(
        graph.in_indptr,
        graph.in_aids,
        graph.out_indptr,
        graph.out_aids,
        graph.spent_indptr,
        graph.spent_txs,
        graph.prod_indptr,
        graph.prod_txs,
        seed_aids,
        hops,
    )
    return {graph.addresses[aid] for aid in np.flatnonzero(addr_hop >= 0).tolist()}


def neighborhood_fraction(graph: TxGraph, seeds: AddressSeeds, hops: int) -> float:
    """Fraction of window addresses within ``hops`` address-to-address
    hops of the seed set, where one hop traverses one transaction (in
    either direction).  Seeds outside the window are ignored.
    """
    if hops < 0:
        raise ValueError("hops must be >= 0")
    if graph.n_addresses == 0:
        return 0.0
    seed_aids = np.asarray(
        sorted(graph.addr_ids[a] for a in _seed_addresses(seeds) if a in graph.addr_ids),
        dtype=np.int32,
    )
    if seed_aids.size == 0:
        return 0.0
    addr_hop = _kernels.hop_bfs(
        graph.in_indptr,
        graph.in_aids,
        graph.out_indptr,
        graph.out_aids,
        graph.spent_indptr,
        graph.spent_txs,
        graph.prod_indptr,
        graph.prod_txs,
        seed_aids,
        hops,
    )
    reached = int((addr_hop >= 0).sum())
    return reached / graph.n_addresses
