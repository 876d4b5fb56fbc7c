"""Match merchandise listing prices to transaction outputs, per UTC day.

A listing matches every output of its day whose value lies within the
tolerance of the listing price.  Matches are categorized by how well the
payment hides: a single matching output is "unique", several are
"multiple"; outputs inside transactions of at most two outputs count as
payment-shaped, the rest as generic transactions.  When a multiple match
mixes both shapes the record keeps per-shape counts and is categorized as
multiple-payment, payment-shaped evidence being the stronger sale signal.
"""
from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date, datetime, timezone

from .ingest import Listing
from .model import Ledger

UNIQUE_PAYMENT = "unique-payment"
UNIQUE_TRANSACTION = "unique-transaction"
MULTIPLE_PAYMENT = "multiple-payment"
MULTIPLE_TRANSACTION = "multiple-transaction"

CATEGORIES = (UNIQUE_PAYMENT, UNIQUE_TRANSACTION, MULTIPLE_PAYMENT, MULTIPLE_TRANSACTION)

DAY_SECONDS = 86_400

# Payment-shaped transactions have at most this many outputs.
PAYMENT_MAX_OUTPUTS = 2


@dataclass(frozen=True)
class MatchedOutput:
    txid: str
    index: int
    value: int
    tx_output_count: int

    @property
    def payment_shaped(self) -> bool:
        return self.tx_output_count <= PAYMENT_MAX_OUTPUTS


@dataclass(frozen=True)
class MatchRecord:
    listing: Listing
    outputs: tuple[MatchedOutput, ...]
    category: str

    @property
    def payment_count(self) -> int:
        return sum(1 for o in self.outputs if o.payment_shaped)

    @property
    def transaction_count(self) -> int:
        return sum(1 for o in self.outputs if not o.payment_shaped)


@dataclass(frozen=True)
class SkippedListing:
    listing: Listing
    reason: str


def day_window(day: date) -> tuple[int, int]:
    start = int(datetime(day.year, day.month, day.day, tzinfo=timezone.utc).timestamp())
    return start, start + DAY_SECONDS


def _categorize(outputs: list[MatchedOutput]) -> str:
    if len(outputs) == 1:
        return UNIQUE_PAYMENT if outputs[0].payment_shaped else UNIQUE_TRANSACTION
    if any(o.payment_shaped for o in outputs):
        return MULTIPLE_PAYMENT
    return MULTIPLE_TRANSACTION


def match_listings(
    ledger: Ledger,
    listings: list[Listing],
    tolerance: int = 0,
    threads: int = 1,
) -> tuple[list[MatchRecord], list[Listing], list[SkippedListing]]:
    """Match every listing against its UTC day's outputs.

    Returns (records, unmatched, skipped): one record per listing with at
    least one match, listings whose day held no match, and listings whose
    day is not fully covered by the ledger window (reason
    "DayOutsideLedger").  Results are ordered by the input listing order
    regardless of ``threads``.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    if threads < 1:
        raise ValueError("threads must be >= 1")

    def match_one(listing: Listing):
        start, end = day_window(listing.day)
        if start < ledger.window[0] or end > ledger.window[1]:
            return SkippedListing(listing, "DayOutsideLedger")
        outputs: list[MatchedOutput] = []
        for tx in ledger.slice((start, end)):
            for index, out in enumerate(tx.outputs):
                if abs(out.value - listing.price) <= tolerance:
                    outputs.append(MatchedOutput(tx.txid, index, out.value, len(tx.outputs)))
        if not outputs:
            return listing
        return MatchRecord(listing, tuple(outputs), _categorize(outputs))

    if threads == 1:
        results = [match_one(l) for l in listings]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(match_one, listings))

    records = [r for r in results if isinstance(r, MatchRecord)]
    unmatched = [r for r in results if isinstance(r, Listing)]
    skipped = [r for r in results if isinstance(r, SkippedListing)]
    return records, unmatched, skipped


def daily_match_series(records: list[MatchRecord]) -> dict[date, dict[str, int]]:
    """Per-day counts of each category; every matched listing contributes
    to exactly one category on its listing day."""
    series: dict[date, Counter] = {}
    for rec in records:
        series.setdefault(rec.listing.day, Counter())[rec.category] += 1
    return {
        day: {cat: counts[cat] for cat in CATEGORIES}
        for day, counts in sorted(series.items())
    }
