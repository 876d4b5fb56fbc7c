"""Independent brute-force oracles the implementations are checked against.

These deliberately avoid the library's indexed/BFS code paths: the taint
oracle enumerates every simple transaction path, the metric oracles are
naive scans.
"""
from __future__ import annotations

from chaintrace.model import Ledger


def taint_distance_oracle(
    ledger: Ledger,
    window: tuple[int, int],
    black: set[str],
    max_d: int,
) -> dict[str, int]:
    """Exhaustive transaction-path enumeration.

    A path T0..Tn has a black address among T0's output addresses, each
    later transaction spends from an address the previous one paid, and
    paths are explored up to depth max_d (shortest paths never repeat a
    transaction, so simple paths suffice).
    """
    txs = ledger.slice(window)
    out_addrs = [frozenset(o.address for o in tx.outputs) for tx in txs]
    in_addrs = [
        frozenset(ledger.resolve(op).address for op in tx.inputs) for tx in txs
    ]
    n = len(txs)
    best: dict[str, int] = {}

    def note(i: int, depth: int) -> None:
        for a in out_addrs[i]:
            if depth < best.get(a, max_d + 1):
                best[a] = depth

    def walk(i: int, depth: int, on_path: set[int]) -> None:
        note(i, depth)
        if depth == max_d:
            return
        for j in range(n):
            if j not in on_path and in_addrs[j] & out_addrs[i]:
                on_path.add(j)
                walk(j, depth + 1, on_path)
                on_path.discard(j)

    for i in range(n):
        if out_addrs[i] & black:
            walk(i, 0, {i})

    window_addrs = set().union(*out_addrs, *in_addrs) if txs else set()
    for a in black & window_addrs:
        best[a] = 0
    return {a: d for a, d in best.items() if d <= max_d}


def amount_anonymity_oracle(
    ledger: Ledger, window: tuple[int, int], amount: int, tolerance: int = 0
) -> int:
    count = 0
    for tx in ledger.slice(window):
        if any(abs(out.value - amount) <= tolerance for out in tx.outputs):
            count += 1
    return count


def chainlet_anonymity_oracle(
    ledger: Ledger, window: tuple[int, int], inputs: int, outputs: int
) -> int:
    count = 0
    for tx in ledger.slice(window):
        if (len(tx.inputs) or 1) == inputs and len(tx.outputs) == outputs:
            count += 1
    return count
