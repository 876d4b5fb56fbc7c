from __future__ import annotations

import hashlib
import random

import pytest

from chaintrace.model import Ledger, OutPoint, Transaction, TxOutput, validate_ledger


def hex_txid(tag: str) -> str:
    return hashlib.sha256(tag.encode()).hexdigest()


def tx(txid: str, ts: int, ins, outs) -> Transaction:
    return Transaction(
        txid,
        ts,
        tuple(OutPoint(t, i) for t, i in ins),
        tuple(TxOutput(a, v) for a, v in outs),
    )


def random_test_ledger(
    seed: int,
    n_tx: int,
    max_in: int = 3,
    max_out: int = 3,
    reuse: float = 0.6,
    coinbase_prob: float = 0.3,
) -> Ledger:
    """Small random-but-valid ledger with heavy address reuse, used to
    stress the path/linkage relation against brute-force oracles."""
    rng = random.Random(seed)
    utxos: list[tuple[str, int, int, str]] = []  # txid, vout, value, addr
    addresses: list[str] = []
    txs: list[Transaction] = []

    def pick_addr() -> str:
        if addresses and rng.random() < reuse:
            return rng.choice(addresses)
        addr = f"addr{len(addresses):05d}"
        addresses.append(addr)
        return addr

    for k in range(n_tx):
        txid = hex_txid(f"rl:{seed}:{k}")
        if not utxos or rng.random() < coinbase_prob:
            n_out = rng.randint(1, max_out)
            outs = tuple(TxOutput(pick_addr(), rng.randint(1_000, 100_000)) for _ in range(n_out))
            t = Transaction(txid, k + 1, (), outs)
        else:
            n_in = rng.randint(1, min(max_in, len(utxos)))
            picks = sorted(rng.sample(range(len(utxos)), n_in), reverse=True)
            ins = [utxos[p] for p in picks]
            for p in picks:
                del utxos[p]
            total = sum(u[2] for u in ins)
            fee = rng.randint(0, min(500, total - 1)) if total > 1 else 0
            budget = total - fee
            n_out = min(rng.randint(1, max_out), budget)
            cuts = sorted(rng.sample(range(1, budget), n_out - 1)) if n_out > 1 else []
            parts = [b - a for a, b in zip([0] + cuts, cuts + [budget])]
            outs = tuple(TxOutput(pick_addr(), v) for v in parts)
            t = Transaction(txid, k + 1, tuple(OutPoint(u[0], u[1]) for u in ins), outs)
        txs.append(t)
        for vout, out in enumerate(t.outputs):
            utxos.append((t.txid, vout, out.value, out.address))
    return validate_ledger(txs, (0, n_tx + 1))


def ledger_addresses(ledger: Ledger) -> list[str]:
    seen: dict[str, None] = {}
    for t in ledger.transactions:
        for op in t.inputs:
            seen[ledger.resolve(op).address] = None
        for out in t.outputs:
            seen[out.address] = None
    return list(seen)


@pytest.fixture
def star_ledger() -> Ledger:
    """One coinbase paying the same black address three times, each output
    spent by its own two-output transaction."""
    cb = tx(hex_txid("star:cb"), 100, [], [("black", 30), ("black", 30), ("black", 30)])
    spenders = [
        tx(hex_txid(f"star:s{i}"), 200 + i, [(cb.txid, i)], [(f"x{i}", 10), (f"y{i}", 15)])
        for i in range(3)
    ]
    return validate_ledger([cb, *spenders], (0, 1_000))


@pytest.fixture
def two_hop_ledger() -> Ledger:
    """coinbase -> black -> a -> b chain."""
    cb = tx(hex_txid("2h:cb"), 10, [], [("black", 100)])
    t1 = tx(hex_txid("2h:t1"), 20, [(cb.txid, 0)], [("a", 60), ("a2", 39)])
    t2 = tx(hex_txid("2h:t2"), 30, [(t1.txid, 0)], [("b", 59)])
    return validate_ledger([cb, t1, t2], (0, 1_000))
