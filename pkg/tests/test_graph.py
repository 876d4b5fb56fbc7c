from __future__ import annotations

import random
import time

import pytest

from chaintrace.graph import (
    addresses_within,
    build_graph,
    cluster_multi_input,
    neighborhood_fraction,
    reach_counts,
    taint_distance,
)
from chaintrace.model import validate_ledger
from chaintrace.synthgen import GenParams, gen_background, inject_dusting, inject_mixing_rounds

from .conftest import hex_txid, ledger_addresses, random_test_ledger, tx
from .oracles import taint_distance_oracle


class TestTaintDistance:
    def test_chain_distance_one(self, two_hop_ledger):
        graph = build_graph(two_hop_ledger)
        d = taint_distance(graph, {"black"}, 3)
        assert d["black"] == 0
        assert d["a"] == 1 and d["a2"] == 1
        assert d["b"] == 2

    def test_star_six_at_distance_one(self, star_ledger):
        graph = build_graph(star_ledger)
        d = taint_distance(graph, {"black"}, 3)
        assert d["black"] == 0
        assert sum(1 for v in d.values() if v == 1) == 6

    def test_max_d_omits_farther_addresses(self, two_hop_ledger):
        graph = build_graph(two_hop_ledger)
        d = taint_distance(graph, {"black"}, 1)
        assert "b" not in d and d["a"] == 1

    def test_black_address_never_paid_in_window_still_distance_zero(self):
        cb = tx(hex_txid("tb:cb"), 10, [], [("black", 50)])
        spend = tx(hex_txid("tb:sp"), 20, [(cb.txid, 0)], [("c", 49)])
        ledger = validate_ledger([cb, spend], (0, 100))
        graph = build_graph(ledger, (15, 100))  # cb outside the sub-window
        d = taint_distance(graph, {"black"}, 2)
        # "black" is only an input address here: present at distance 0, but
        # no window transaction pays it, so nothing is reachable from it.
        assert d == {"black": 0}

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_exhaustive_path_oracle(self, seed):
        ledger = random_test_ledger(seed, 100)
        black = set(random.Random(seed).sample(ledger_addresses(ledger), 3))
        graph = build_graph(ledger)
        got = taint_distance(graph, black, 4)
        want = taint_distance_oracle(ledger, ledger.window, black, 4)
        assert got == want


class TestReachCounts:
    def test_star_counts(self, star_ledger):
        graph = build_graph(star_ledger)
        assert reach_counts(graph, {"black"}, 3) == {1: 6}

    def test_cumulative_monotone_and_bounded(self):
        ledger = random_test_ledger(42, 150)
        black = set(random.Random(1).sample(ledger_addresses(ledger), 4))
        graph = build_graph(ledger)
        counts = reach_counts(graph, black, 6)
        cumulative = 0
        previous = 0
        for d in range(1, 7):
            cumulative += counts.get(d, 0)
            assert cumulative >= previous
            previous = cumulative
        assert cumulative <= graph.n_addresses

    def test_mixing_widens_second_hop(self):
        ledger, _ = gen_background(GenParams(seed=5, n_background_tx=400, window=(0, 10_000_000)))
        ledger, label = inject_mixing_rounds(ledger, participants=20, rounds=2, denomination=5_000_000, seed=9)
        graph = build_graph(ledger)
        participants = sorted(label.addresses)[:1]
        counts = reach_counts(graph, participants, 2)
        assert counts.get(2, 0) >= counts.get(1, 0)


class TestClustering:
    def test_cospent_inputs_merge(self):
        cb = tx(hex_txid("cl:cb"), 10, [], [("a1", 10), ("a2", 20)])
        spend = tx(hex_txid("cl:sp"), 20, [(cb.txid, 0), (cb.txid, 1)], [("b", 29)])
        ledger = validate_ledger([cb, spend], (0, 100))
        clusters = cluster_multi_input(build_graph(ledger))
        assert {"a1", "a2"} in clusters
        assert {"b"} in clusters

    def test_partition_covers_all_addresses_once(self):
        ledger = random_test_ledger(3, 200)
        graph = build_graph(ledger)
        clusters = cluster_multi_input(graph)
        flat = [a for c in clusters for a in c]
        assert len(flat) == len(set(flat)) == graph.n_addresses

    def test_refines_into_wallet_ground_truth(self):
        ledger, labels = gen_background(GenParams(seed=8, n_background_tx=1_500, window=(0, 10_000_000)))
        owner = {}
        for wid, addrs in labels.wallets.items():
            for a in addrs:
                owner[a] = wid
        clusters = cluster_multi_input(build_graph(ledger))
        for cluster in clusters:
            owners = {owner[a] for a in cluster}
            assert len(owners) == 1

    def test_ideal_wallet_recovers_exact_partition(self):
        # Every wallet co-spends all its addresses once: clustering must
        # reproduce the wallet partition exactly.
        cb1 = tx(hex_txid("iw:cb1"), 5, [], [("w1a", 10), ("w1b", 10), ("w2a", 10), ("w2b", 10)])
        s1 = tx(hex_txid("iw:s1"), 10, [(cb1.txid, 0), (cb1.txid, 1)], [("w2c", 19)])
        s2 = tx(hex_txid("iw:s2"), 20, [(cb1.txid, 2), (cb1.txid, 3)], [("w1c", 19)])
        ledger = validate_ledger([cb1, s1, s2], (0, 100))
        clusters = cluster_multi_input(build_graph(ledger))
        assert {"w1a", "w1b"} in clusters and {"w2a", "w2b"} in clusters

    def test_change_heuristic_merges_single_fresh_nonround_output(self):
        cb = tx(hex_txid("ch:cb"), 10, [], [("payer", 10_000_000)])
        # payment output is round, change output is fresh and oddly specific
        spend = tx(
            hex_txid("ch:sp"), 20, [(cb.txid, 0)],
            [("shop", 1_000_000), ("change", 8_999_123)],
        )
        ledger = validate_ledger([cb, spend], (0, 100))
        graph = build_graph(ledger)
        plain = cluster_multi_input(graph)
        assert {"payer"} in plain and {"change"} in plain
        merged = cluster_multi_input(graph, change_heuristic=True)
        assert {"payer", "change"} in merged
        assert {"shop"} in merged

    def test_change_heuristic_skips_ambiguous_and_reused(self):
        cb = tx(hex_txid("ca:cb"), 10, [], [("payer", 10_000_000)])
        # both outputs fresh and non-round: ambiguous, no merge
        spend = tx(
            hex_txid("ca:sp"), 20, [(cb.txid, 0)],
            [("o1", 4_123_457), ("o2", 5_876_443)],
        )
        ledger = validate_ledger([cb, spend], (0, 100))
        clusters = cluster_multi_input(build_graph(ledger), change_heuristic=True)
        assert {"o1"} in clusters and {"o2"} in clusters

    def test_dusting_merges_victim_addresses(self):
        ledger, labels = gen_background(GenParams(seed=21, n_background_tx=800, window=(0, 10_000_000)))
        merged = None
        for wid in sorted(labels.wallets):
            try:
                ledger2, label = inject_dusting(ledger, labels, wid, 546, seed=4)
            except ValueError:
                continue
            merged = (ledger2, label)
            break
        assert merged is not None
        ledger2, label = merged
        a1, a2 = label.params["spent_address"], label.params["active_address"]
        clusters = cluster_multi_input(build_graph(ledger2))
        home = next(c for c in clusters if a1 in c)
        assert a2 in home


class TestNeighborhood:
    def test_all_seeds_is_one(self, star_ledger):
        graph = build_graph(star_ledger)
        assert neighborhood_fraction(graph, graph.addresses, 0) == 1.0
        assert neighborhood_fraction(graph, graph.addresses, 3) == 1.0

    def test_zero_hops_counts_seed_overlap(self, star_ledger):
        graph = build_graph(star_ledger)
        frac = neighborhood_fraction(graph, {"black", "not-present"}, 0)
        assert frac == 1 / graph.n_addresses

    def test_one_hop_traverses_one_transaction(self, two_hop_ledger):
        graph = build_graph(two_hop_ledger)
        within = addresses_within(graph, {"black"}, 1)
        assert within == {"black", "a", "a2"}
        assert addresses_within(graph, {"black"}, 2) == {"black", "a", "a2", "b"}

    def test_mixing_web_beats_random_address(self):
        wins = 0
        for seed in range(10):
            ledger, _ = gen_background(GenParams(seed=seed, n_background_tx=600, window=(0, 10_000_000)))
            ledger, label = inject_mixing_rounds(ledger, 20, 2, 5_000_000, seed=seed + 100)
            graph = build_graph(ledger)
            participants = [a for a in label.addresses]
            rng = random.Random(seed)
            background = [a for a in graph.addresses if a not in label.addresses]
            probe = rng.choice(background)
            if neighborhood_fraction(graph, participants, 2) > neighborhood_fraction(graph, [probe], 2):
                wins += 1
        assert wins >= 9


class TestBuild:
    def test_empty_window_empty_graph(self, star_ledger):
        graph = build_graph(star_ledger, (500, 600))
        assert graph.n_tx == 0 and graph.n_addresses == 0
        assert neighborhood_fraction(graph, {"black"}, 2) == 0.0

    def test_window_must_be_inside_ledger(self, star_ledger):
        with pytest.raises(ValueError):
            build_graph(star_ledger, (0, 2_000))

    def test_resolved_input_addresses_match_referenced_outputs(self):
        ledger = random_test_ledger(13, 120)
        graph = build_graph(ledger)
        for idx, t in enumerate(graph.txs):
            for rin, op in zip(graph.resolved_inputs[idx], t.inputs):
                assert ledger.resolve(op).address == rin.address

    def test_ten_thousand_tx_build_under_a_second(self):
        ledger, _ = gen_background(GenParams(seed=2, n_background_tx=10_000, window=(0, 10_000_000)))
        start = time.monotonic()
        graph = build_graph(ledger)
        elapsed = time.monotonic() - start
        assert graph.n_tx == 10_000
        assert elapsed < 1.0
