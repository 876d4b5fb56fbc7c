from __future__ import annotations

import json

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from chaintrace.ingest import (
    EmptySetError,
    ParseError,
    parse_addresses,
    parse_ledger,
    parse_listings,
    write_ledger,
)
from chaintrace.model import PrecisionError, ValidationError
from chaintrace.synthgen import GenParams, gen_background

from .conftest import hex_txid

WINDOW = (1_600_000_000, 1_600_900_000)

COINBASE_LINE = json.dumps(
    {
        "txid": hex_txid("ing:cb"),
        "time": 1_600_000_005,
        "inputs": [],
        "outputs": [{"addr": "alice", "value": 5_000_000_000}],
    },
    separators=(",", ":"),
)


class TestParseLedger:
    def test_single_coinbase(self):
        ledger = parse_ledger(COINBASE_LINE.encode())
        assert len(ledger) == 1
        assert ledger.transactions[0].is_coinbase

    def test_negative_value_reports_line(self):
        record = json.loads(COINBASE_LINE)
        record["outputs"][0]["value"] = -5
        data = COINBASE_LINE + "\n" + json.dumps(record)
        with pytest.raises(ParseError) as err:
            parse_ledger(data)
        (issue,) = err.value.issues
        assert issue.line == 2
        assert "NegativeAmount" in issue.message

    def test_unknown_field_rejected(self):
        record = json.loads(COINBASE_LINE)
        record["extra"] = 1
        with pytest.raises(ParseError):
            parse_ledger(json.dumps(record))

    def test_bad_txid_rejected(self):
        record = json.loads(COINBASE_LINE)
        record["txid"] = "zz"
        with pytest.raises(ParseError):
            parse_ledger(json.dumps(record))

    def test_bool_value_rejected(self):
        record = json.loads(COINBASE_LINE)
        record["outputs"][0]["value"] = True
        with pytest.raises(ParseError):
            parse_ledger(json.dumps(record))

    def test_not_json_reports_line(self):
        with pytest.raises(ParseError) as err:
            parse_ledger(b"not json\n")
        assert err.value.issues[0].line == 1

    def test_validation_errors_carry_line_numbers(self):
        spend = {
            "txid": hex_txid("ing:sp"),
            "time": 1_600_000_010,
            "inputs": [{"txid": hex_txid("missing"), "vout": 0}],
            "outputs": [{"addr": "bob", "value": 1}],
        }
        data = COINBASE_LINE + "\n" + json.dumps(spend)
        with pytest.raises(ValidationError) as err:
            parse_ledger(data)
        (issue,) = err.value.issues
        assert issue.line == 2

    def test_empty_ledger_needs_window(self):
        with pytest.raises(ParseError):
            parse_ledger(b"")

    def test_blank_lines_skipped(self):
        ledger = parse_ledger(("\n" + COINBASE_LINE + "\n\n").encode())
        assert len(ledger) == 1


class TestRoundTrip:
    def test_generated_file_round_trips_byte_identical(self):
        ledger, _ = gen_background(GenParams(seed=11, n_background_tx=10_000, window=(1_600_000_000, 1_603_000_000)))
        blob = write_ledger(ledger)
        reparsed = parse_ledger(blob, window=ledger.window)
        assert reparsed == ledger
        assert write_ledger(reparsed) == blob

    @settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(seed=st.integers(0, 10_000), n=st.integers(0, 60))
    def test_parse_write_identity_property(self, seed, n):
        ledger, _ = gen_background(GenParams(seed=seed, n_background_tx=n, window=WINDOW))
        blob = write_ledger(ledger)
        assert parse_ledger(blob, window=WINDOW) == ledger


class TestListings:
    HEADER = "day,market,vendor,item_id,price_btc"

    def test_exact_price_conversion(self):
        rows = f"{self.HEADER}\n2015-03-01,alpha,v1,item-1,0.067459\n"
        (listing,) = parse_listings(rows)
        assert listing.price == 6_745_900
        assert listing.day.isoformat() == "2015-03-01"

    def test_whole_btc(self):
        rows = f"{self.HEADER}\n2015-03-01,alpha,v1,item-1,1\n"
        assert parse_listings(rows)[0].price == 100_000_000

    def test_nine_decimals_rejected(self):
        rows = f"{self.HEADER}\n2015-03-01,alpha,v1,item-1,0.000000001\n"
        with pytest.raises(PrecisionError) as err:
            parse_listings(rows)
        assert "line 2" in str(err.value)

    def test_header_required(self):
        with pytest.raises(ParseError):
            parse_listings("day,price\n2015-03-01,1\n")

    def test_bad_day(self):
        rows = f"{self.HEADER}\n03/01/2015,alpha,v1,item-1,1\n"
        with pytest.raises(ParseError):
            parse_listings(rows)

    def test_zero_price_rejected(self):
        rows = f"{self.HEADER}\n2015-03-01,alpha,v1,item-1,0\n"
        with pytest.raises(ParseError):
            parse_listings(rows)

    def test_crlf_accepted(self):
        rows = f"{self.HEADER}\r\n2015-03-01,alpha,v1,item-1,0.5\r\n"
        assert parse_listings(rows)[0].price == 50_000_000


class TestAddresses:
    def test_dedup(self):
        got = parse_addresses(b"a1\na2\na1\n")
        assert got.addresses == frozenset({"a1", "a2"})

    def test_comments_only_is_empty(self):
        with pytest.raises(EmptySetError):
            parse_addresses(b"# one\n# two\n")

    def test_crlf_equals_lf(self):
        assert parse_addresses(b"a1\r\na2\r\n").addresses == parse_addresses(b"a1\na2\n").addresses

    def test_label_kept(self):
        assert parse_addresses(b"a1\n", label="fam1").label == "fam1"
