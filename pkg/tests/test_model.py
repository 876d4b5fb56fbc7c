from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaintrace.model import (
    DANGLING_INPUT,
    DOUBLE_SPEND,
    DUPLICATE_TXID,
    NEGATIVE_FEE,
    OUT_OF_WINDOW,
    PrecisionError,
    ValidationError,
    btc_str_from_sat,
    chainlet_of,
    ledger_stats,
    sat_from_btc_str,
    unspent_outputs,
    validate_ledger,
)

from .conftest import hex_txid, random_test_ledger, tx


class TestAmounts:
    def test_btc_string_conversion_exact(self):
        assert sat_from_btc_str("0.067459") == 6_745_900
        assert sat_from_btc_str("1") == 100_000_000
        assert sat_from_btc_str("2.00000001") == 200_000_001
        assert sat_from_btc_str("0") == 0

    def test_more_than_8_decimals_rejected(self):
        with pytest.raises(PrecisionError):
            sat_from_btc_str("0.000000001")

    @pytest.mark.parametrize("bad", ["1e5", "-1", "1,0", "", ".", "0x10", "1.2.3"])
    def test_malformed_rejected(self, bad):
        with pytest.raises(ValueError):
            sat_from_btc_str(bad)

    @given(st.integers(min_value=0, max_value=10**16))
    def test_format_parse_round_trip(self, sats):
        assert sat_from_btc_str(btc_str_from_sat(sats)) == sats


class TestChainletOf:
    def test_direct_counts(self):
        t = tx(hex_txid("c1"), 1, [(hex_txid("p"), 0)], [("a", 1), ("b", 2)])
        assert chainlet_of(t, 6) == (1, 2)

    def test_clamping(self):
        ins = [(hex_txid(f"p{i}"), 0) for i in range(9)]
        t = tx(hex_txid("c2"), 1, ins, [("a", 1), ("b", 1), ("c", 1)])
        assert chainlet_of(t, 6) == (6, 3)

    def test_boundary(self):
        ins = [(hex_txid(f"q{i}"), 0) for i in range(6)]
        outs = [(f"a{i}", 1) for i in range(6)]
        assert chainlet_of(tx(hex_txid("c3"), 1, ins, outs), 6) == (6, 6)

    def test_coinbase_counts_as_one_input(self):
        t = tx(hex_txid("c4"), 1, [], [("a", 1), ("b", 1)])
        assert chainlet_of(t) == (1, 2)

    @given(st.integers(1, 40), st.integers(1, 40), st.integers(1, 10))
    def test_depends_only_on_counts(self, n_in, n_out, clamp):
        ins = [(hex_txid(f"h{i}"), 0) for i in range(n_in)]
        outs = [(f"o{i}", 1) for i in range(n_out)]
        assert chainlet_of(tx(hex_txid("c5"), 1, ins, outs), clamp) == (
            min(n_in, clamp),
            min(n_out, clamp),
        )


class TestValidation:
    def test_simple_spend_chain_valid(self):
        t1 = tx(hex_txid("v1"), 10, [], [("a", 100)])
        t2 = tx(hex_txid("v2"), 20, [(t1.txid, 0)], [("b", 90)])
        ledger = validate_ledger([t2, t1], (0, 100))
        assert [t.txid for t in ledger.transactions] == [t1.txid, t2.txid]

    def test_double_spend_lists_both_txids(self):
        t1 = tx(hex_txid("d1"), 10, [], [("a", 100)])
        t2 = tx(hex_txid("d2"), 20, [(t1.txid, 0)], [("b", 90)])
        t3 = tx(hex_txid("d3"), 30, [(t1.txid, 0)], [("c", 80)])
        with pytest.raises(ValidationError) as err:
            validate_ledger([t1, t2, t3], (0, 100))
        issues = [i for i in err.value.issues if i.code == DOUBLE_SPEND]
        assert len(issues) == 1
        assert issues[0].txid == t3.txid
        assert t2.txid in issues[0].detail

    def test_negative_fee(self):
        t1 = tx(hex_txid("f1"), 10, [], [("a", 100)])
        t2 = tx(hex_txid("f2"), 20, [(t1.txid, 0)], [("b", 101)])
        with pytest.raises(ValidationError) as err:
            validate_ledger([t1, t2], (0, 100))
        assert {i.code for i in err.value.issues} == {NEGATIVE_FEE}

    def test_dangling_input(self):
        t = tx(hex_txid("g1"), 10, [(hex_txid("nope"), 0)], [("a", 1)])
        with pytest.raises(ValidationError) as err:
            validate_ledger([t], (0, 100))
        assert {i.code for i in err.value.issues} == {DANGLING_INPUT}

    def test_out_of_window(self):
        t = tx(hex_txid("w1"), 500, [], [("a", 1)])
        with pytest.raises(ValidationError) as err:
            validate_ledger([t], (0, 100))
        assert {i.code for i in err.value.issues} == {OUT_OF_WINDOW}

    def test_duplicate_txid(self):
        t1 = tx(hex_txid("u1"), 10, [], [("a", 1)])
        t2 = tx(hex_txid("u1"), 20, [], [("b", 1)])
        with pytest.raises(ValidationError) as err:
            validate_ledger([t1, t2], (0, 100))
        assert DUPLICATE_TXID in {i.code for i in err.value.issues}

    def test_all_violations_reported_together(self):
        t1 = tx(hex_txid("m1"), 10, [], [("a", 100)])
        bad_fee = tx(hex_txid("m2"), 20, [(t1.txid, 0)], [("b", 200)])
        dangling = tx(hex_txid("m3"), 300, [(hex_txid("none"), 1)], [("c", 1)])
        with pytest.raises(ValidationError) as err:
            validate_ledger([t1, bad_fee, dangling], (0, 100))
        codes = {i.code for i in err.value.issues}
        assert codes == {NEGATIVE_FEE, DANGLING_INPUT, OUT_OF_WINDOW}

    def test_self_spend_is_dangling(self):
        txid = hex_txid("s1")
        t = tx(txid, 10, [(txid, 0)], [("a", 1)])
        with pytest.raises(ValidationError) as err:
            validate_ledger([t], (0, 100))
        assert {i.code for i in err.value.issues} == {DANGLING_INPUT}


class TestReplay:
    @pytest.mark.parametrize("seed", range(5))
    def test_replay_never_goes_negative(self, seed):
        ledger = random_test_ledger(seed, 120)
        utxo = unspent_outputs(ledger)  # raises KeyError if a spend is unbacked
        assert all(out.value >= 0 for out in utxo.values())

    def test_value_conservation(self):
        ledger = random_test_ledger(7, 150)
        minted = sum(
            out.value for t in ledger.transactions if t.is_coinbase for out in t.outputs
        )
        fees = 0
        for t in ledger.transactions:
            if not t.is_coinbase:
                fees += sum(ledger.resolve(op).value for op in t.inputs) - t.total_output
        remaining = sum(out.value for out in unspent_outputs(ledger).values())
        assert minted == remaining + fees

    def test_ledger_stats_counts(self):
        t1 = tx(hex_txid("st1"), 10, [], [("a", 5), ("b", 5)])
        t2 = tx(hex_txid("st2"), 20, [(t1.txid, 0)], [("c", 4)])
        ledger = validate_ledger([t1, t2], (0, 100))
        stats = ledger_stats(ledger, n_entities=2)
        assert (stats.n_tx, stats.n_addresses, stats.n_entities) == (2, 3, 2)
        assert stats.n_addresses >= (stats.n_entities or 0)


def test_slice_half_open_window():
    ts = [tx(hex_txid(f"sl{k}"), t, [], [("a", 1)]) for k, t in enumerate([5, 10, 15])]
    ledger = validate_ledger(ts, (0, 100))
    assert [t.timestamp for t in ledger.slice((5, 15))] == [5, 10]
    assert ledger.slice((16, 99)) == ()
