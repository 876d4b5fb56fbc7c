"""Anonymity metrics over a ledger window: amount crowds, chainlet-shape
crowds, the clamped occurrence matrix, and the payment audit combining them.

``amount_anonymity`` counts the transactions a payment of a given amount
hides among; ``chainlet_anonymity`` counts the transactions sharing an
exact input/output shape.  Both are defined per window and checked against
naive scans in the test suite.
"""
from __future__ import annotations

from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass
from statistics import median
from typing import Optional

import numpy as np

from .model import DEFAULT_CHAINLET_CLAMP, Ledger, Transaction, chainlet_of


def _window_txs(ledger: Ledger, window: Optional[tuple[int, int]]) -> tuple[Transaction, ...]:
    if window is None:
        return ledger.transactions
    return ledger.slice(window)


def amount_anonymity(
    ledger: Ledger,
    window: Optional[tuple[int, int]],
    amount: int,
    tolerance: int = 0,
) -> int:
    """Number of window transactions with at least one output within
    ``tolerance`` satoshis of ``amount``.  A transaction counts once no
    matter how many of its outputs match.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    txs = _window_txs(ledger, window)
    pairs = sorted((out.value, idx) for idx, tx in enumerate(txs) for out in tx.outputs)
    values = [v for v, _ in pairs]
    lo = bisect_left(values, amount - tolerance)
    hi = bisect_right(values, amount + tolerance)
    return len({pairs[k][1] for k in range(lo, hi)})


def amount_anonymity_outputs(
    ledger: Ledger,
    window: Optional[tuple[int, int]],
    amount: int,
    tolerance: int = 0,
) -> int:
    """Per-output variant: total matching outputs rather than transactions."""
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    txs = _window_txs(ledger, window)
    return sum(
        1
        for tx in txs
        for out in tx.outputs
        if abs(out.value - amount) <= tolerance
    )


def chainlet_anonymity(
    ledger: Ledger,
    window: Optional[tuple[int, int]],
    inputs: int,
    outputs: int,
) -> int:
    """Number of window transactions with exactly ``inputs`` inputs and
    ``outputs`` outputs (unclamped; coinbases count as one input)."""
    txs = _window_txs(ledger, window)
    return sum(
        1
        for tx in txs
        if (len(tx.inputs) or 1) == inputs and len(tx.outputs) == outputs
    )


@dataclass(frozen=True)
class ChainletMatrix:
    """Clamped occurrence matrix of transaction shapes.

    ``counts[i-1][o-1]`` holds the number of transactions with clamped
    shape (i, o); ``percentages`` is counts normalized by the total (all
    zeros, with ``empty`` set, when the window held no transactions).
    """

    clamp: int
    counts: np.ndarray
    percentages: np.ndarray
    total: int

    @property
    def empty(self) -> bool:
        return self.total == 0

    def count(self, i: int, o: int) -> int:
        return int(self.counts[i - 1][o - 1])

    def share(self, i: int, o: int) -> float:
        return float(self.percentages[i - 1][o - 1])


def chainlet_matrix(
    ledger: Ledger,
    window: Optional[tuple[int, int]] = None,
    clamp: int = DEFAULT_CHAINLET_CLAMP,
) -> ChainletMatrix:
    if clamp < 1:
        raise ValueError("clamp must be >= 1")
    txs = _window_txs(ledger, window)
    counts = np.zeros((clamp, clamp), dtype=np.int64)
    for tx in txs:
        i, o = chainlet_of(tx, clamp)
        counts[i - 1][o - 1] += 1
    total = int(counts.sum())
    if total:
        percentages = counts / total
    else:
        percentages = np.zeros((clamp, clamp), dtype=float)
    return ChainletMatrix(clamp, counts, percentages, total)


def denomination_histogram(
    ledger: Ledger,
    window: Optional[tuple[int, int]],
    top_k: int,
) -> list[tuple[int, int]]:
    """The ``top_k`` most frequent exact output amounts as (amount,
    frequency), most frequent first, ties broken by ascending amount."""
    if top_k < 0:
        raise ValueError("top_k must be >= 0")
    txs = _window_txs(ledger, window)
    freq = Counter(out.value for tx in txs for out in tx.outputs)
    ranked = sorted(freq.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:top_k]


def _amount_tx_frequencies(txs: tuple[Transaction, ...]) -> dict[int, int]:
    """For each distinct output amount, the number of transactions paying it."""
    freq: Counter[int] = Counter()
    for tx in txs:
        for value in {out.value for out in tx.outputs}:
            freq[value] += 1
    return dict(freq)


def _percentile_rank(values: list[int], x: int) -> float:
    if not values:
        return 0.0
    return sum(1 for v in values if v <= x) / len(values)


@dataclass(frozen=True)
class AuditReport:
    """How well a planned payment blends into a window."""

    amount: int
    shape: tuple[int, int]
    amount_crowd: int  # transactions sharing the exact amount
    chainlet_crowd: int  # transactions sharing the exact shape
    amount_percentile: float
    chainlet_percentile: float
    rule8_pass: bool  # amount is a frequent denomination
    rule10_pass: bool  # shape is <= 2 inputs and <= 2 outputs
    rule8_threshold: float


def audit_payment(
    ledger: Ledger,
    window: Optional[tuple[int, int]],
    amount: int,
    shape: tuple[int, int],
    rule8_threshold: Optional[float] = None,
) -> AuditReport:
    """Audit a payment plan against the window's crowds.

    The amount check passes when the amount's transaction crowd reaches
    ``rule8_threshold`` (default: the median crowd size over all
    denominations seen in the window); the shape check passes iff the
    shape stays within 2 inputs and 2 outputs.
    """
    txs = _window_txs(ledger, window)
    i, o = shape
    if i < 1 or o < 1:
        raise ValueError("shape must have at least one input and output")
    amount_freqs = _amount_tx_frequencies(txs)
    n = amount_freqs.get(amount, 0)
    c = chainlet_anonymity(ledger, window, i, o)
    shape_counts = Counter((len(tx.inputs) or 1, len(tx.outputs)) for tx in txs)
    threshold = rule8_threshold
    if threshold is None:
        threshold = float(median(amount_freqs.values())) if amount_freqs else 0.0
    return AuditReport(
        amount=amount,
        shape=(i, o),
        amount_crowd=n,
        chainlet_crowd=c,
        amount_percentile=_percentile_rank(list(amount_freqs.values()), n),
        chainlet_percentile=_percentile_rank(list(shape_counts.values()), c),
        # nothing is a frequent denomination in an empty window
        rule8_pass=bool(amount_freqs) and n >= threshold,
        rule10_pass=i <= 2 and o <= 2,
        rule8_threshold=threshold,
    )
