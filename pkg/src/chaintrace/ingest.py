"""Parsers and writers for the ledger line format, listings CSV, and address lists.

The ledger file is UTF-8 with one JSON object per line:

    {"txid":"<hex64>","time":<int>,"inputs":[{"txid":"<hex64>","vout":<int>}],
     "outputs":[{"addr":"<string>","value":<int satoshis>}]}

An empty ``inputs`` array marks a coinbase.  ``write_ledger`` emits the
canonical form (transactions ordered by (time, txid), fixed key order), so
``parse_ledger(write_ledger(x))`` reproduces ``x`` exactly and re-writing a
canonical file is byte-identical.
"""
from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from datetime import date
from typing import IO, Iterable, Optional, Union

from .model import (
    Ledger,
    OutPoint,
    PrecisionError,
    Transaction,
    TxOutput,
    ValidationError,
    sat_from_btc_str,
    validate_ledger,
)

_HEX64 = re.compile(r"^[0-9a-fA-F]{64}$")

Source = Union[bytes, str, IO[bytes], IO[str]]


@dataclass(frozen=True)
class ParseIssue:
    line: int  # 1-based
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


class ParseError(ValueError):
    """Malformed input; carries one issue per offending line."""

    def __init__(self, issues: list[ParseIssue]):
        super().__init__("; ".join(str(i) for i in issues))
        self.issues = issues


class EmptySetError(ValueError):
    """An address list contained no addresses."""


@dataclass(frozen=True)
class Listing:
    """One darknet-market merchandise listing for a UTC calendar day."""

    day: date
    market: str
    vendor: str
    item_id: str
    price: int  # satoshis, converted exactly from the decimal BTC column


@dataclass(frozen=True)
class BlackAddressSet:
    addresses: frozenset[str]
    label: str


def _as_lines(source: Source) -> Iterable[str]:
    if isinstance(source, (bytes, str)):
        text = source.decode("utf-8") if isinstance(source, bytes) else source
        yield from text.splitlines()
        return
    # File-like: iterate lazily so memory stays bounded per line.
    for raw in source:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        yield raw.rstrip("\r\n")


def _reject_constant(name: str) -> None:
    raise ValueError(f"non-finite number {name!r} not allowed")


def _strict_int(value: object, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{what} must be an integer")
    return value


def _parse_tx_record(obj: object) -> Transaction:
    if not isinstance(obj, dict):
        raise ValueError("record must be a JSON object")
    extra = set(obj) - {"txid", "time", "inputs", "outputs"}
    if extra:
        raise ValueError(f"unknown fields {sorted(extra)}")
    missing = {"txid", "time", "inputs", "outputs"} - set(obj)
    if missing:
        raise ValueError(f"missing fields {sorted(missing)}")
    txid = obj["txid"]
    if not isinstance(txid, str) or not _HEX64.match(txid):
        raise ValueError("txid must be 64 hex characters")
    timestamp = _strict_int(obj["time"], "time")
    if not isinstance(obj["inputs"], list) or not isinstance(obj["outputs"], list):
        raise ValueError("inputs and outputs must be arrays")
    inputs = []
    for entry in obj["inputs"]:
        if not isinstance(entry, dict) or set(entry) != {"txid", "vout"}:
            raise ValueError("input must be {txid, vout}")
        if not isinstance(entry["txid"], str) or not _HEX64.match(entry["txid"]):
            raise ValueError("input txid must be 64 hex characters")
        vout = _strict_int(entry["vout"], "vout")
        if vout < 0:
            raise ValueError("vout must be non-negative")
        inputs.append(OutPoint(entry["txid"], vout))
    outputs = []
    for entry in obj["outputs"]:
        if not isinstance(entry, dict) or set(entry) != {"addr", "value"}:
            raise ValueError("output must be {addr, value}")
        if not isinstance(entry["addr"], str) or not entry["addr"]:
            raise ValueError("addr must be a non-empty string")
        value = _strict_int(entry["value"], "value")
        if value < 0:
            raise ValueError("NegativeAmount: output value must be non-negative")
        outputs.append(TxOutput(entry["addr"], value))
    if not outputs:
        raise ValueError("transaction must have at least one output")
    return Transaction(txid, timestamp, tuple(inputs), tuple(outputs))


def parse_ledger(source: Source, window: Optional[tuple[int, int]] = None) -> Ledger:
    """Parse a ledger file and validate it.

    When ``window`` is omitted it is inferred as
    [min timestamp, max timestamp + 1).  Syntax problems raise
    :class:`ParseError` with 1-based line numbers; structural problems
    raise :class:`~chaintrace.model.ValidationError` with line numbers
    attached to each issue.
    """
    txs: list[Transaction] = []
    lines: dict[str, int] = {}
    issues: list[ParseIssue] = []
    for lineno, raw in enumerate(_as_lines(source), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw, parse_constant=_reject_constant)
            tx = _parse_tx_record(obj)
        except (ValueError, TypeError) as exc:
            issues.append(ParseIssue(lineno, str(exc)))
            continue
        txs.append(tx)
        lines.setdefault(tx.txid, lineno)
    if issues:
        raise ParseError(issues)
    if window is None:
        if not txs:
            raise ParseError([ParseIssue(1, "empty ledger requires an explicit window")])
        times = [tx.timestamp for tx in txs]
        window = (min(times), max(times) + 1)
    return validate_ledger(txs, window, lines=lines)


def write_ledger(ledger: Ledger) -> bytes:
    """Serialize a ledger to the canonical line format."""
    buf = io.StringIO()
    for tx in ledger.transactions:
        record = {
            "txid": tx.txid,
            "time": tx.timestamp,
            "inputs": [{"txid": op.txid, "vout": op.index} for op in tx.inputs],
            "outputs": [{"addr": out.address, "value": out.value} for out in tx.outputs],
        }
        buf.write(json.dumps(record, separators=(",", ":")))
        buf.write("\n")
    return buf.getvalue().encode("utf-8")


LISTING_COLUMNS = ["day", "market", "vendor", "item_id", "price_btc"]


def parse_listings(source: Source) -> list[Listing]:
    """Parse the listings CSV (header: day,market,vendor,item_id,price_btc).

    Prices are converted exactly to satoshis; more than 8 decimal places
    raises :class:`~chaintrace.model.PrecisionError`.
    """
    text = "\n".join(_as_lines(source))
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows or rows[0] != LISTING_COLUMNS:
        raise ParseError([ParseIssue(1, f"header must be {','.join(LISTING_COLUMNS)}")])
    listings: list[Listing] = []
    issues: list[ParseIssue] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(LISTING_COLUMNS):
            issues.append(ParseIssue(lineno, f"expected {len(LISTING_COLUMNS)} columns"))
            continue
        day_s, market, vendor, item_id, price_s = row
        try:
            day = date.fromisoformat(day_s)
        except ValueError:
            issues.append(ParseIssue(lineno, f"bad day {day_s!r}, expected YYYY-MM-DD"))
            continue
        try:
            price = sat_from_btc_str(price_s)
        except PrecisionError:
            raise PrecisionError(f"line {lineno}: price {price_s!r} has more than 8 decimal places")
        except ValueError as exc:
            issues.append(ParseIssue(lineno, str(exc)))
            continue
        if price <= 0:
            issues.append(ParseIssue(lineno, "price must be positive"))
            continue
        listings.append(Listing(day, market, vendor, item_id, price))
    if issues:
        raise ParseError(issues)
    return listings


def parse_addresses(source: Source, label: str = "black") -> BlackAddressSet:
    """Parse a one-address-per-line file; '#' lines are comments.

    Duplicates are dropped; an effectively empty file raises
    :class:`EmptySetError`.
    """
    addresses: set[str] = set()
    for raw in _as_lines(source):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        addresses.add(line)
    if not addresses:
        raise EmptySetError(f"no addresses in {label!r} list")
    return BlackAddressSet(frozenset(addresses), label)


__all__ = [
    "BlackAddressSet",
    "EmptySetError",
    "Listing",
    "ParseError",
    "ParseIssue",
    "parse_addresses",
    "parse_ledger",
    "parse_listings",
    "write_ledger",
    "ValidationError",
]
