from __future__ import annotations

import random

import numpy as np
import pytest

from chaintrace._kernels import BACKEND, load_backend
from chaintrace.graph import build_graph

from .conftest import ledger_addresses, random_test_ledger

pure = load_backend("pure")
try:
    native = load_backend("native")
except ImportError:
    native = None

needs_native = pytest.mark.skipif(native is None, reason="compiled kernels not built")


def graph_arrays(seed: int, n: int):
    ledger = random_test_ledger(seed, n)
    graph = build_graph(ledger)
    rng = random.Random(seed)
    addrs = ledger_addresses(ledger)
    seeds = sorted(graph.addr_ids[a] for a in rng.sample(addrs, min(4, len(addrs))))
    sources = sorted(rng.sample(range(graph.n_tx), min(3, graph.n_tx)))
    return graph, np.asarray(seeds, dtype=np.int32), np.asarray(sources, dtype=np.int32)


def test_backend_is_reported():
    assert BACKEND in ("native", "pure")


@needs_native
@pytest.mark.parametrize("seed", range(12))
def test_taint_bfs_backends_identical(seed):
    graph, _, sources = graph_arrays(seed, 120)
    for max_d in (0, 1, 3, 10):
        args = (graph.out_indptr, graph.out_aids, graph.spent_indptr, graph.spent_txs,
                sources, graph.n_addresses, max_d)
        td_p, ad_p = pure.taint_bfs(*args)
        td_n, ad_n = native.taint_bfs(*args)
        np.testing.assert_array_equal(td_p, td_n)
        np.testing.assert_array_equal(ad_p, ad_n)


@needs_native
@pytest.mark.parametrize("seed", range(12))
def test_hop_bfs_backends_identical(seed):
    graph, seeds, _ = graph_arrays(seed, 120)
    for hops in (0, 1, 2, 5):
        args = (graph.in_indptr, graph.in_aids, graph.out_indptr, graph.out_aids,
                graph.spent_indptr, graph.spent_txs, graph.prod_indptr, graph.prod_txs,
                seeds, hops)
        np.testing.assert_array_equal(pure.hop_bfs(*args), native.hop_bfs(*args))


@needs_native
@pytest.mark.parametrize("seed", range(12))
def test_cospend_union_backends_identical(seed):
    graph, _, _ = graph_arrays(seed, 150)
    a = pure.cospend_union(graph.in_indptr, graph.in_aids, graph.n_addresses)
    b = native.cospend_union(graph.in_indptr, graph.in_aids, graph.n_addresses)
    np.testing.assert_array_equal(a, b)


def test_union_roots_are_component_minima():
    graph, _, _ = graph_arrays(3, 150)
    roots = pure.cospend_union(graph.in_indptr, graph.in_aids, graph.n_addresses)
    components: dict[int, list[int]] = {}
    for aid, root in enumerate(roots.tolist()):
        components.setdefault(root, []).append(aid)
    for root, members in components.items():
        assert root == min(members)


def test_empty_graph_kernels():
    indptr = np.zeros(1, dtype=np.int32)
    empty = np.zeros(0, dtype=np.int32)
    td, ad = pure.taint_bfs(indptr, empty, indptr, empty, empty, 0, 3)
    assert td.size == 0 and ad.size == 0
    hops = pure.hop_bfs(indptr, empty, indptr, empty, indptr, empty, indptr, empty, empty, 2)
    assert hops.size == 0
