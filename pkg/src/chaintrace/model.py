"""Core UTXO ledger data types, chainlet classification, and structural validation.

Amounts are integer satoshis everywhere (1 BTC = 100,000,000 sat).  Decimal
BTC strings coming from listings or configs are converted exactly with
:func:`sat_from_btc_str`; floats are never used for money.
"""
from __future__ import annotations

import re
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

SATS_PER_BTC = 100_000_000

# Default clamp bound for chainlet (input-count, output-count) classification.
DEFAULT_CHAINLET_CLAMP = 6

_BTC_RE = re.compile(r"^(\d+)(?:\.(\d+))?$")


class PrecisionError(ValueError):
    """A decimal BTC string carries more than 8 fractional digits."""


def sat_from_btc_str(text: str) -> int:
    """Convert a decimal BTC string to integer satoshis, exactly.

    Rejects anything that is not a plain non-negative decimal (no sign,
    no exponent) and raises :class:`PrecisionError` beyond 8 fractional
    digits, so sub-satoshi values can never be silently rounded.
    """
    m = _BTC_RE.match(text.strip())
    if not m:
        raise ValueError(f"not a plain decimal BTC amount: {text!r}")
    whole, frac = m.group(1), m.group(2) or ""
    if len(frac) > 8:
        raise PrecisionError(f"more than 8 decimal places: {text!r}")
    return int(whole) * SATS_PER_BTC + int(frac.ljust(8, "0") or "0")


def btc_str_from_sat(value: int) -> str:
    """Format satoshis as a decimal BTC string (exact, no trailing zeros)."""
    if value < 0:
        raise ValueError("negative amount")
    whole, frac = divmod(value, SATS_PER_BTC)
    if frac == 0:
        return str(whole)
    return f"{whole}.{frac:08d}".rstrip("0")


@dataclass(frozen=True)
class OutPoint:
    """Reference to one output of an earlier transaction."""

    txid: str
    index: int

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("outpoint index must be non-negative")


@dataclass(frozen=True)
class TxOutput:
    address: str
    value: int  # satoshis

    def __post_init__(self) -> None:
        if not self.address:
            raise ValueError("output address must be non-empty")
        if self.value < 0:
            raise ValueError("output value must be non-negative")


@dataclass(frozen=True)
class Transaction:
    """One ledger transaction: a set of spent outpoints and new outputs.

    An empty ``inputs`` tuple marks a coinbase (minting) transaction.
    """

    txid: str
    timestamp: int  # unix seconds
    inputs: tuple[OutPoint, ...]
    outputs: tuple[TxOutput, ...]

    def __post_init__(self) -> None:
        if not self.txid:
            raise ValueError("txid must be non-empty")
        if not self.outputs:
            raise ValueError("transaction must have at least one output")

    @property
    def is_coinbase(self) -> bool:
        return not self.inputs

    @property
    def total_output(self) -> int:
        return sum(o.value for o in self.outputs)


def chainlet_of(tx: Transaction, clamp: int = DEFAULT_CHAINLET_CLAMP) -> tuple[int, int]:
    """Clamped (input-count, output-count) shape of a transaction.

    A coinbase counts as one input so that minting never introduces a
    zero-input row into occurrence matrices.  Both counts saturate at
    ``clamp``.
    """
    if clamp < 1:
        raise ValueError("clamp must be >= 1")
    n_in = len(tx.inputs) or 1
    return min(n_in, clamp), min(len(tx.outputs), clamp)


@dataclass(frozen=True)
class Ledger:
    """Validated, ordered transaction set within a half-open time window.

    Instances are produced by :func:`validate_ledger` and are immutable;
    every non-coinbase input resolves to an earlier output, no output is
    spent twice, and all timestamps fall inside ``window``.
    """

    transactions: tuple[Transaction, ...]
    window: tuple[int, int]  # [t_start, t_end)

    @cached_property
    def by_txid(self) -> dict[str, Transaction]:
        return {tx.txid: tx for tx in self.transactions}

    @cached_property
    def _timestamps(self) -> list[int]:
        return [tx.timestamp for tx in self.transactions]

    def slice(self, window: tuple[int, int]) -> tuple[Transaction, ...]:
        """Transactions with timestamp in [window[0], window[1])."""
        lo = bisect_left(self._timestamps, window[0])
        hi = bisect_right(self._timestamps, window[1] - 1)
        return self.transactions[lo:hi]

    def resolve(self, outpoint: OutPoint) -> TxOutput:
        return self.by_txid[outpoint.txid].outputs[outpoint.index]

    def __len__(self) -> int:
        return len(self.transactions)


@dataclass(frozen=True)
class LedgerStats:
    n_tx: int
    n_addresses: int
    n_entities: Optional[int] = None  # ground-truth wallet count when known


def ledger_stats(ledger: Ledger, n_entities: Optional[int] = None) -> LedgerStats:
    """Counts of transactions and distinct addresses (inputs resolved)."""
    addresses: set[str] = set()
    for tx in ledger.transactions:
        for out in tx.outputs:
            addresses.add(out.address)
        for op in tx.inputs:
            addresses.add(ledger.resolve(op).address)
    return LedgerStats(len(ledger.transactions), len(addresses), n_entities)


# --- validation ---------------------------------------------------------

DANGLING_INPUT = "DanglingInput"
DOUBLE_SPEND = "DoubleSpend"
NEGATIVE_FEE = "NegativeFee"
OUT_OF_WINDOW = "OutOfWindow"
DUPLICATE_TXID = "DuplicateTxid"


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    txid: str
    detail: str
    line: Optional[int] = None  # set when the record came from a file

    def __str__(self) -> str:
        loc = f" (line {self.line})" if self.line is not None else ""
        return f"{self.code}: tx {self.txid}{loc}: {self.detail}"


class ValidationError(ValueError):
    """Raised by validate_ledger; carries every violation found."""

    def __init__(self, issues: list[ValidationIssue]):
        super().__init__("; ".join(str(i) for i in issues))
        self.issues = issues


def validate_ledger(
    transactions: Iterable[Transaction],
    window: tuple[int, int],
    lines: Optional[dict[str, int]] = None,
) -> Ledger:
    """Order transactions by (timestamp, txid) and check ledger invariants.

    All violations are collected before raising so a caller sees every
    dangling input, double spend, negative fee, duplicate txid, and
    out-of-window timestamp in one pass.  ``lines`` optionally maps txids
    to source line numbers for error reporting.
    """
    t_start, t_end = window
    if t_start >= t_end:
        raise ValueError("window start must precede window end")
    txs = sorted(transactions, key=lambda tx: (tx.timestamp, tx.txid))
    issues: list[ValidationIssue] = []
    lines = lines or {}

    def issue(code: str, txid: str, detail: str) -> None:
        issues.append(ValidationIssue(code, txid, detail, lines.get(txid)))

    seen: dict[str, Transaction] = {}
    spent: dict[tuple[str, int], str] = {}
    for tx in txs:
        if tx.txid in seen:
            issue(DUPLICATE_TXID, tx.txid, "txid already present")
            continue
        if not (t_start <= tx.timestamp < t_end):
            issue(OUT_OF_WINDOW, tx.txid, f"timestamp {tx.timestamp} outside [{t_start}, {t_end})")
        input_total = 0
        resolvable = True
        for op in tx.inputs:
            key = (op.txid, op.index)
            src = seen.get(op.txid)
            if src is None or op.index >= len(src.outputs):
                issue(DANGLING_INPUT, tx.txid, f"input {op.txid}:{op.index} does not resolve to an earlier output")
                resolvable = False
                continue
            if key in spent:
                issue(DOUBLE_SPEND, tx.txid, f"outpoint {op.txid}:{op.index} already spent by tx {spent[key]}")
                resolvable = False
                continue
            spent[key] = tx.txid
            input_total += src.outputs[op.index].value
        if tx.inputs and resolvable and input_total < tx.total_output:
            issue(
                NEGATIVE_FEE,
                tx.txid,
                f"outputs sum {tx.total_output} exceeds inputs sum {input_total}",
            )
        seen[tx.txid] = tx

    if issues:
        raise ValidationError(issues)
    return Ledger(tuple(txs), (t_start, t_end))


def unspent_outputs(ledger: Ledger) -> dict[OutPoint, TxOutput]:
    """Replay all spends; returns the UTXO set remaining at the end."""
    utxo: dict[OutPoint, TxOutput] = {}
    for tx in ledger.transactions:
        for op in tx.inputs:
            del utxo[op]  # guaranteed present in a validated ledger
        for i, out in enumerate(tx.outputs):
            utxo[OutPoint(tx.txid, i)] = out
    return utxo
