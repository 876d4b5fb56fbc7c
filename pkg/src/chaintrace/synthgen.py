"""Deterministic synthetic ledger generator with labeled pattern injections.

The background generator produces a valid ledger whose chainlet-shape mix
matches a target distribution exactly (largest-remainder quotas), with
each synthetic wallet spending only its own outputs so multi-input
clustering has a ground truth.  Injection helpers append laundering and
evasion structures (peeling chains, mixing rounds, ransom motif, dusting,
price-tagged sales) and label every transaction and address they add, so
detectors can be scored against known positives.

Everything is driven by explicit integer seeds; the same seed always
produces byte-identical ledgers and labels.
"""
from __future__ import annotations

import hashlib
import heapq
import json
import random
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Mapping, Optional

from .ingest import Listing
from .model import (
    Ledger,
    OutPoint,
    Transaction,
    TxOutput,
    validate_ledger,
)

# Common round denominations, in satoshis (0.001, 0.01, 0.1, 1, 2 BTC).
ROUND_DENOMINATIONS_SAT = (100_000, 1_000_000, 10_000_000, 100_000_000, 200_000_000)

# Customary dust threshold; generated outputs never go below it.
MIN_OUTPUT_SAT = 546

FEE_RANGE_SAT = (100, 10_000)

# Chainlet shape mix resembling the long-run Bitcoin network, dominated by
# the 1-input/2-output payment shape at 57.04%.
BITCOIN_CHAINLET_MIX: dict[tuple[int, int], float] = {
    (1, 1): 0.0900,
    (1, 2): 0.5704,
    (1, 3): 0.0300,
    (1, 4): 0.0150,
    (1, 5): 0.0100,
    (1, 6): 0.0150,
    (2, 1): 0.0400,
    (2, 2): 0.0900,
    (2, 3): 0.0120,
    (2, 6): 0.0080,
    (3, 1): 0.0200,
    (3, 2): 0.0300,
    (4, 1): 0.0100,
    (4, 2): 0.0150,
    (5, 1): 0.0070,
    (5, 2): 0.0100,
    (6, 1): 0.0080,
    (6, 2): 0.0120,
    (6, 6): 0.0076,
}

# Share of ransom-payment transactions that carry a change output.
DEFAULT_RANSOM_CHANGE_PROB = 0.8606

KIND_PEELING = "peeling"
KIND_MIXING = "mixing"
KIND_RANSOM = "ransom"
KIND_DUSTING = "dusting"
KIND_SALE = "sale"


class InfeasibleParams(ValueError):
    """Generation parameters cannot produce a valid ledger."""


class NoSpentAddress(ValueError):
    """Dusting target wallet has no address with an already spent output."""


class NoActiveAddress(ValueError):
    """Dusting target wallet has no distinct address holding an unspent output."""


@dataclass(frozen=True)
class GenParams:
    seed: int
    n_background_tx: int
    window: tuple[int, int]
    chainlet_distribution: Mapping[tuple[int, int], float] = field(
        default_factory=lambda: dict(BITCOIN_CHAINLET_MIX)
    )
    wallet_count: int = 50
    round_amount_weight: float = 0.5
    specific_amount_weight: float = 0.5


@dataclass(frozen=True)
class PatternLabel:
    """Ground truth for one injected pattern."""

    pattern_id: str
    kind: str
    txids: frozenset[str]  # every transaction the injection appended
    core_txids: frozenset[str]  # the motif itself, excluding funding plumbing
    addresses: frozenset[str]
    params: dict

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "txids": sorted(self.txids),
            "core_txids": sorted(self.core_txids),
            "addresses": sorted(self.addresses),
            "params": self.params,
        }


@dataclass(frozen=True)
class GroundTruthLabels:
    """All injected-pattern labels plus the wallet ownership ground truth."""

    patterns: dict[str, PatternLabel] = field(default_factory=dict)
    wallets: dict[str, frozenset[str]] = field(default_factory=dict)

    def add(self, label: PatternLabel) -> "GroundTruthLabels":
        if label.pattern_id in self.patterns:
            raise ValueError(f"duplicate pattern id {label.pattern_id!r}")
        patterns = dict(self.patterns)
        patterns[label.pattern_id] = label
        return GroundTruthLabels(patterns, self.wallets)

    def of_kind(self, kind: str) -> list[PatternLabel]:
        return [p for _, p in sorted(self.patterns.items()) if p.kind == kind]

    def labeled_txids(self) -> frozenset[str]:
        out: set[str] = set()
        for p in self.patterns.values():
            out.update(p.txids)
        return frozenset(out)


def labels_to_json(labels: GroundTruthLabels) -> bytes:
    doc = {
        "patterns": {pid: p.to_json_obj() for pid, p in labels.patterns.items()},
        "wallets": {wid: sorted(addrs) for wid, addrs in labels.wallets.items()},
    }
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def labels_from_json(data: bytes | str) -> GroundTruthLabels:
    doc = json.loads(data)
    patterns = {
        pid: PatternLabel(
            pattern_id=pid,
            kind=obj["kind"],
            txids=frozenset(obj["txids"]),
            core_txids=frozenset(obj["core_txids"]),
            addresses=frozenset(obj["addresses"]),
            params=obj.get("params", {}),
        )
        for pid, obj in doc.get("patterns", {}).items()
    }
    wallets = {wid: frozenset(addrs) for wid, addrs in doc.get("wallets", {}).items()}
    return GroundTruthLabels(patterns, wallets)


def check_labels(ledger: Ledger, labels: GroundTruthLabels) -> None:
    """Assert that every labeled txid exists in the ledger."""
    for pid, p in labels.patterns.items():
        missing = [t for t in p.txids if t not in ledger.by_txid]
        if missing:
            raise ValueError(f"pattern {pid!r} labels missing txids {missing[:3]}")


# --- deterministic id streams --------------------------------------------


class _IdStream:
    """Deterministic txid/address factory for one generation run."""

    def __init__(self, namespace: str):
        self.namespace = namespace
        self._tx = 0
        self._addr = 0

    def txid(self) -> str:
        self._tx += 1
        return hashlib.sha256(f"{self.namespace}:tx:{self._tx}".encode()).hexdigest()

    def address(self) -> str:
        self._addr += 1
        return hashlib.sha256(f"{self.namespace}:addr:{self._addr}".encode()).hexdigest()[:40]


# --- background generation ------------------------------------------------


def _shape_quotas(distribution: Mapping[tuple[int, int], float], n: int) -> list[tuple[int, int]]:
    """Exact per-shape counts summing to n (largest remainder rounding)."""
    total = sum(distribution.values())
    if abs(total - 1.0) > 1e-9:
        raise InfeasibleParams(f"chainlet distribution sums to {total}, expected 1")
    shares = []
    for shape in sorted(distribution):
        i, o = shape
        p = distribution[shape]
        if p < 0:
            raise InfeasibleParams(f"negative probability for shape {shape}")
        if i < 1 or o < 1:
            raise InfeasibleParams(f"shape {shape} must have at least one input and output")
        exact = p * n
        shares.append((shape, int(exact), exact - int(exact)))
    base_total = sum(c for _, c, _ in shares)
    remainder = n - base_total
    if remainder < 0:
        raise InfeasibleParams("distribution probabilities overshoot 1")
    by_frac = sorted(shares, key=lambda s: (-s[2], s[0]))
    bonus = {shape: 0 for shape, _, _ in shares}
    for shape, _, _ in by_frac[:remainder]:
        bonus[shape] = 1
    quotas: list[tuple[int, int]] = []
    for shape, count, _ in shares:
        quotas.extend([shape] * (count + bonus[shape]))
    return quotas


# A wallet output at or above this value covers any background spend budget
# (max fee 10k sat plus dust floors); tracking a per-wallet count of them
# keeps spender eligibility O(1).
RICH_SAT = 20_000


class _Wallet:
    __slots__ = ("wid", "utxos", "addresses", "rich_count")

    def __init__(self, wid: str):
        self.wid = wid
        self.utxos: list[tuple[str, int, int]] = []  # (txid, vout, value)
        self.addresses: set[str] = set()
        self.rich_count = 0

    def credit(self, txid: str, vout: int, value: int) -> None:
        self.utxos.append((txid, vout, value))
        if value >= RICH_SAT:
            self.rich_count += 1

    def take(self, indexes: list[int]) -> list[tuple[str, int, int]]:
        """Remove and return the UTXOs at ``indexes`` (swap-remove, O(k))."""
        picked = []
        for k in sorted(indexes, reverse=True):
            picked.append(self.utxos[k])
            last = self.utxos.pop()
            if k < len(self.utxos):
                self.utxos[k] = last
        for _, _, value in picked:
            if value >= RICH_SAT:
                self.rich_count -= 1
        return picked


def _draw_output_value(rng: random.Random, p_round: float, max_allowed: int) -> int:
    if max_allowed < MIN_OUTPUT_SAT:
        raise InfeasibleParams("output budget below dust threshold")
    if rng.random() < p_round:
        menu = [v for v in ROUND_DENOMINATIONS_SAT if v <= max_allowed]
        if menu:
            return rng.choice(menu)
    return rng.randint(MIN_OUTPUT_SAT, max_allowed)


_COINBASE_MENU = tuple(v for v in ROUND_DENOMINATIONS_SAT if v >= 1_000_000)


def _draw_coinbase_value(rng: random.Random, p_round: float) -> int:
    # Mint healthy values so downstream spends stay solvent.
    if rng.random() < p_round:
        return rng.choice(_COINBASE_MENU)
    return rng.randint(1_000_000, 2 * ROUND_DENOMINATIONS_SAT[-1])


def gen_background(params: GenParams) -> tuple[Ledger, GroundTruthLabels]:
    """Generate a valid background ledger plus wallet ground truth.

    The realized chainlet-shape counts equal the largest-remainder quotas
    of ``chainlet_distribution`` exactly, except that a multi-input shape
    with no eligible spender wallet and no single-input shape left to
    convert into a supply coinbase is itself realized as a coinbase and
    counted as (1, outputs).  That escape hatch fires only on tiny or
    pathologically input-heavy targets; at calibration scale the realized
    mix is exact.  Shapes with one input may always be realized as
    coinbases since a coinbase classifies as one input.
    """
    if params.n_background_tx < 0:
        raise InfeasibleParams("n_background_tx must be >= 0")
    if params.wallet_count < 1:
        raise InfeasibleParams("wallet_count must be >= 1")
    if params.round_amount_weight < 0 or params.specific_amount_weight < 0:
        raise InfeasibleParams("amount weights must be >= 0")
    weight_total = params.round_amount_weight + params.specific_amount_weight
    if weight_total <= 0:
        raise InfeasibleParams("amount weights must not both be zero")
    p_round = params.round_amount_weight / weight_total
    t_start, t_end = params.window
    if t_start >= t_end:
        raise InfeasibleParams("window start must precede window end")
    n = params.n_background_tx
    if t_end - t_start < max(n, 1):
        raise InfeasibleParams("window too small for distinct timestamps")

    rng = random.Random(params.seed)
    ids = _IdStream(f"chaintrace:{params.seed}")
    pending = deque(_shape_quotas(params.chainlet_distribution, n))
    order = list(pending)
    rng.shuffle(order)
    pending = deque(order)
    timestamps = sorted(rng.sample(range(t_start, t_end), n))

    wallets = [_Wallet(f"w{idx:04d}") for idx in range(params.wallet_count)]
    max_inputs = max((i for i, _ in params.chainlet_distribution), default=1)
    low_water = 8 * max_inputs
    total_utxos = 0
    txs: list[Transaction] = []

    def fresh_output(wallet: _Wallet, value: int) -> TxOutput:
        addr = ids.address()
        wallet.addresses.add(addr)
        return TxOutput(addr, value)

    def emit_coinbase(o: int, wallet: _Wallet) -> None:
        nonlocal total_utxos
        outputs = []
        for _ in range(o):
            outputs.append(fresh_output(wallet, _draw_coinbase_value(rng, p_round)))
        tx = Transaction(ids.txid(), timestamps[len(txs)], (), tuple(outputs))
        txs.append(tx)
        for vout, out in enumerate(outputs):
            wallet.credit(tx.txid, vout, out.value)
        total_utxos += o

    def emit_spend(i: int, o: int, spender: _Wallet, fee: int) -> None:
        nonlocal total_utxos
        min_budget = o * MIN_OUTPUT_SAT + fee
        chosen = rng.sample(range(len(spender.utxos)), i)
        if sum(spender.utxos[k][2] for k in chosen) < min_budget:
            # Random pick too poor for the output floor; swap in one output
            # that covers the budget alone, or fall back to the i largest.
            chosen_set = set(chosen)
            for k, (_, _, value) in enumerate(spender.utxos):
                if value >= min_budget and k not in chosen_set:
                    chosen[0] = k
                    break
            else:
                chosen = heapq.nlargest(
                    i, range(len(spender.utxos)), key=lambda k: spender.utxos[k][2]
                )
        picked = spender.take(chosen)
        budget = sum(v for _, _, v in picked) - fee
        receiver = wallets[rng.randrange(len(wallets))]
        outputs = []
        for k in range(o - 1):
            reserve = (o - 1 - k) * MIN_OUTPUT_SAT
            value = _draw_output_value(rng, p_round, budget - reserve)
            outputs.append(fresh_output(receiver, value))
            budget -= value
        outputs.append(fresh_output(receiver, budget))
        tx = Transaction(
            ids.txid(),
            timestamps[len(txs)],
            tuple(OutPoint(t, v) for t, v, _ in picked),
            tuple(outputs),
        )
        txs.append(tx)
        for vout, out in enumerate(outputs):
            receiver.credit(tx.txid, vout, out.value)
        total_utxos += o - i

    def pick_spender(i: int, min_budget: int) -> Optional[_Wallet]:
        candidates = [w for w in wallets if len(w.utxos) >= i]
        while candidates:
            idx = rng.randrange(len(candidates))
            w = candidates[idx]
            if (min_budget <= RICH_SAT and w.rich_count >= 1) or sum(
                heapq.nlargest(i, (v for _, _, v in w.utxos))
            ) >= min_budget:
                return w
            del candidates[idx]
        return None

    while pending:
        i, o = pending.popleft()
        fee = rng.randint(*FEE_RANGE_SAT)
        spender = pick_spender(i, o * MIN_OUTPUT_SAT + fee)
        if i == 1 and (spender is None or total_utxos < low_water):
            emit_coinbase(o, wallets[rng.randrange(len(wallets))])
            continue
        if spender is not None:
            emit_spend(i, o, spender, fee)
            continue
        # Multi-input shape is stuck: realize a later single-input shape as a
        # coinbase now (aimed at the fullest wallet) and retry.  With no
        # single-input shapes left, realize this shape itself as a coinbase;
        # it then counts as (1, o), which is the only quota deviation the
        # generator makes and it is self-limiting (each one grows the
        # fullest wallet toward any input count).
        fullest = max(range(len(wallets)), key=lambda k: (len(wallets[k].utxos), -k))
        swap_idx = next((k for k, (si, _) in enumerate(pending) if si == 1), None)
        if swap_idx is None:
            emit_coinbase(o, wallets[fullest])
            continue
        _, swap_o = pending[swap_idx]
        del pending[swap_idx]
        pending.appendleft((i, o))
        emit_coinbase(swap_o, wallets[fullest])

    ledger = validate_ledger(txs, params.window)
    wallet_map = {w.wid: frozenset(w.addresses) for w in wallets if w.addresses}
    return ledger, GroundTruthLabels(patterns={}, wallets=wallet_map)


# --- injections -----------------------------------------------------------


def _append(ledger: Ledger, new_txs: list[Transaction]) -> Ledger:
    return validate_ledger(list(ledger.transactions) + new_txs, ledger.window)


def _spawn_time(rng: random.Random, window: tuple[int, int], span: int, not_before: int = 0) -> int:
    """Seeded base timestamp leaving ``span`` seconds of room before window end."""
    lo = max(window[0], not_before)
    hi = window[1] - span
    if hi <= lo:
        raise InfeasibleParams(f"window cannot fit an injection spanning {span} seconds")
    return rng.randrange(lo, hi)


def inject_peeling_chain(
    ledger: Ledger,
    length: int,
    start_amount: int,
    peel_fraction: float | str | Fraction,
    seed: int,
    pattern_id: Optional[str] = None,
) -> tuple[Ledger, PatternLabel]:
    """Append a peeling chain: ``length`` 1-in/2-out steps, each sending
    ``peel_fraction`` of the remaining value (satoshi-floored) to a fresh
    address and carrying the rest forward.  A funding coinbase of
    ``start_amount`` bootstraps the chain; chain fees are zero so the peel
    amounts follow the exact geometric sequence.
    """
    pid = pattern_id or f"{KIND_PEELING}-{seed}"
    frac = Fraction(str(peel_fraction)) if not isinstance(peel_fraction, Fraction) else peel_fraction
    if not (0 < frac < Fraction(1, 2)):
        raise InfeasibleParams("peel_fraction must be in (0, 0.5) so the peel is the smaller output")
    params = {
        "length": length,
        "start_amount": start_amount,
        "peel_fraction": str(frac),
        "seed": seed,
    }
    if length == 0:
        return ledger, PatternLabel(pid, KIND_PEELING, frozenset(), frozenset(), frozenset(), params)
    if length < 0:
        raise InfeasibleParams("length must be >= 0")

    rng = random.Random(f"peel:{seed}")
    ids = _IdStream(f"chaintrace:inject:peel:{seed}")
    base = _spawn_time(rng, ledger.window, length + 2)
    origin = ids.address()
    funding = Transaction(ids.txid(), base, (), (TxOutput(origin, start_amount),))
    new_txs = [funding]
    chain_txids = []
    addresses = {origin}
    carry_op = OutPoint(funding.txid, 0)
    remaining = start_amount
    for step in range(length):
        peel = int(remaining * frac)
        carry = remaining - peel
        if peel < 1 or carry <= peel:
            raise InfeasibleParams(
                f"start_amount too small: step {step} would peel {peel} of {remaining}"
            )
        peel_addr = ids.address()
        carry_addr = ids.address()
        addresses.update((peel_addr, carry_addr))
        outputs = [TxOutput(peel_addr, peel), TxOutput(carry_addr, carry)]
        carry_vout = 1
        if rng.random() < 0.5:
            outputs.reverse()
            carry_vout = 0
        tx = Transaction(ids.txid(), base + 1 + step, (carry_op,), tuple(outputs))
        new_txs.append(tx)
        chain_txids.append(tx.txid)
        carry_op = OutPoint(tx.txid, carry_vout)
        remaining = carry
    label = PatternLabel(
        pid,
        KIND_PEELING,
        frozenset(t.txid for t in new_txs),
        frozenset(chain_txids),
        frozenset(addresses),
        params,
    )
    return _append(ledger, new_txs), label


def inject_mixing_rounds(
    ledger: Ledger,
    participants: int,
    rounds: int,
    denomination: int,
    seed: int,
    pattern_id: Optional[str] = None,
) -> tuple[Ledger, PatternLabel]:
    """Append ``rounds`` successive mixing transactions, each taking
    ``participants`` inputs and paying ``participants`` identical
    ``denomination`` outputs to fresh addresses; round j spends round
    j-1's outputs.  Participant funding comes from per-participant
    coinbases; mixing fees are zero so the denomination is stable across
    rounds.
    """
    if participants < 1 or rounds < 1:
        raise InfeasibleParams("participants and rounds must be >= 1")
    if denomination < MIN_OUTPUT_SAT:
        raise InfeasibleParams("denomination below dust threshold")
    pid = pattern_id or f"{KIND_MIXING}-{seed}"
    rng = random.Random(f"mix:{seed}")
    ids = _IdStream(f"chaintrace:inject:mix:{seed}")
    base = _spawn_time(rng, ledger.window, participants + rounds + 1)

    new_txs: list[Transaction] = []
    addresses: set[str] = set()
    prev_ops: list[OutPoint] = []
    for p in range(participants):
        addr = ids.address()
        addresses.add(addr)
        cb = Transaction(ids.txid(), base + p, (), (TxOutput(addr, denomination),))
        new_txs.append(cb)
        prev_ops.append(OutPoint(cb.txid, 0))
    funding_txids = frozenset(t.txid for t in new_txs)
    round_txids = []
    for r in range(rounds):
        outputs = []
        for _ in range(participants):
            addr = ids.address()
            addresses.add(addr)
            outputs.append(TxOutput(addr, denomination))
        tx = Transaction(ids.txid(), base + participants + r, tuple(prev_ops), tuple(outputs))
        new_txs.append(tx)
        round_txids.append(tx.txid)
        prev_ops = [OutPoint(tx.txid, v) for v in range(participants)]
    label = PatternLabel(
        pid,
        KIND_MIXING,
        funding_txids | frozenset(round_txids),
        frozenset(round_txids),
        frozenset(addresses),
        {
            "participants": participants,
            "rounds": rounds,
            "denomination": denomination,
            "seed": seed,
        },
    )
    return _append(ledger, new_txs), label


def inject_ransom_pattern(
    ledger: Ledger,
    ransom_amount: int,
    funding_inputs: int,
    gap_seconds: int,
    seed: int,
    black_address: Optional[str] = None,
    change_prob: float = DEFAULT_RANSOM_CHANGE_PROB,
    pattern_id: Optional[str] = None,
) -> tuple[Ledger, PatternLabel]:
    """Append the two-step ransom payment motif.

    t1 gathers ``funding_inputs`` small outputs into a fresh address a1,
    paying in slightly more than the ransom so t2 can cover its fee;
    ``gap_seconds`` later, t2 spends a1 to the target address a0, with a
    change output present with probability ``change_prob``.
    """
    if funding_inputs < 1:
        raise InfeasibleParams("funding_inputs must be >= 1")
    if ransom_amount < MIN_OUTPUT_SAT:
        raise InfeasibleParams("ransom_amount below dust threshold")
    if gap_seconds < 0:
        raise InfeasibleParams("gap_seconds must be >= 0")
    pid = pattern_id or f"{KIND_RANSOM}-{seed}"
    rng = random.Random(f"ransom:{seed}")
    ids = _IdStream(f"chaintrace:inject:ransom:{seed}")
    base = _spawn_time(rng, ledger.window, gap_seconds + 601)

    has_change = rng.random() < change_prob
    change = rng.randint(MIN_OUTPUT_SAT, max(MIN_OUTPUT_SAT + 1, ransom_amount // 5)) if has_change else 0
    fee_t2 = rng.randint(*FEE_RANGE_SAT)
    fee_t1 = rng.randint(*FEE_RANGE_SAT)
    a1_value = ransom_amount + change + fee_t2

    funding_total = a1_value + fee_t1
    if funding_total < funding_inputs * MIN_OUTPUT_SAT:
        raise InfeasibleParams("ransom too small to split across funding inputs")
    share, extra = divmod(funding_total, funding_inputs)
    funding_values = [share + 1] * extra + [share] * (funding_inputs - extra)
    funding_addrs = [ids.address() for _ in range(funding_inputs)]
    funding = Transaction(
        ids.txid(),
        base,
        (),
        tuple(TxOutput(a, v) for a, v in zip(funding_addrs, funding_values)),
    )

    a1 = ids.address()
    t1 = Transaction(
        ids.txid(),
        base + 600,
        tuple(OutPoint(funding.txid, v) for v in range(funding_inputs)),
        (TxOutput(a1, a1_value),),
    )
    a0 = black_address or ids.address()
    a2 = ids.address() if has_change else None
    outputs = [TxOutput(a0, ransom_amount)]
    if has_change:
        outputs.append(TxOutput(a2, change))
    t2 = Transaction(ids.txid(), base + 600 + gap_seconds, (OutPoint(t1.txid, 0),), tuple(outputs))

    addresses = set(funding_addrs) | {a1, a0}
    if a2:
        addresses.add(a2)
    label = PatternLabel(
        pid,
        KIND_RANSOM,
        frozenset((funding.txid, t1.txid, t2.txid)),
        frozenset((t1.txid, t2.txid)),
        frozenset(addresses),
        {
            "ransom_amount": ransom_amount,
            "funding_inputs": funding_inputs,
            "gap_seconds": gap_seconds,
            "black_address": a0,
            "change_present": has_change,
            "seed": seed,
        },
    )
    return _append(ledger, [funding, t1, t2]), label


def inject_dusting(
    ledger: Ledger,
    labels: GroundTruthLabels,
    victim_wallet: str,
    dust_amount: int,
    seed: int,
    pattern_id: Optional[str] = None,
) -> tuple[Ledger, PatternLabel]:
    """Append a dusting attack against one synthetic wallet.

    A dust output is sent to a victim address whose outputs were already
    spent (a1); a later victim transaction carelessly co-spends the dust
    together with an output of a still-active address (a2), which lets
    multi-input clustering link a1 and a2.
    """
    if victim_wallet not in labels.wallets:
        raise ValueError(f"unknown wallet {victim_wallet!r}")
    if dust_amount < 1:
        raise InfeasibleParams("dust_amount must be >= 1")
    victim_addrs = labels.wallets[victim_wallet]
    pid = pattern_id or f"{KIND_DUSTING}-{seed}"
    rng = random.Random(f"dust:{seed}")
    ids = _IdStream(f"chaintrace:inject:dust:{seed}")

    spent_addrs: set[str] = set()
    unspent: dict[str, list[tuple[OutPoint, int, int]]] = {}  # addr -> (op, value, created)
    utxo: dict[OutPoint, tuple[str, int, int]] = {}
    for tx in ledger.transactions:
        for op in tx.inputs:
            addr, _, _ = utxo.pop(op)
            if addr in victim_addrs:
                spent_addrs.add(addr)
        for vout, out in enumerate(tx.outputs):
            entry = (out.address, out.value, tx.timestamp)
            utxo[OutPoint(tx.txid, vout)] = entry
    for op, (addr, value, created) in utxo.items():
        if addr in victim_addrs:
            unspent.setdefault(addr, []).append((op, value, created))

    if not spent_addrs:
        raise NoSpentAddress(f"wallet {victim_wallet!r} has no address with a spent output")
    a1 = sorted(spent_addrs)[rng.randrange(len(spent_addrs))]
    active = sorted(a for a in unspent if a != a1)
    if not active:
        raise NoActiveAddress(f"wallet {victim_wallet!r} has no distinct active address")
    a2 = active[rng.randrange(len(active))]
    op2, value2, created2 = min(unspent[a2], key=lambda e: (e[0].txid, e[0].index))

    base = _spawn_time(rng, ledger.window, 4, not_before=created2 + 1)
    attacker = ids.address()
    attacker_cb = Transaction(ids.txid(), base, (), (TxOutput(attacker, dust_amount),))
    dust_tx = Transaction(
        ids.txid(), base + 1, (OutPoint(attacker_cb.txid, 0),), (TxOutput(a1, dust_amount),)
    )
    merged_addr = ids.address()
    cospend = Transaction(
        ids.txid(),
        base + 2,
        (OutPoint(dust_tx.txid, 0), op2),
        (TxOutput(merged_addr, dust_amount + value2),),
    )
    label = PatternLabel(
        pid,
        KIND_DUSTING,
        frozenset((attacker_cb.txid, dust_tx.txid, cospend.txid)),
        frozenset((dust_tx.txid, cospend.txid)),
        frozenset((attacker, a1, a2, merged_addr)),
        {
            "victim_wallet": victim_wallet,
            "dust_amount": dust_amount,
            "spent_address": a1,
            "active_address": a2,
            "seed": seed,
        },
    )
    return _append(ledger, [attacker_cb, dust_tx, cospend]), label


def inject_sale(
    ledger: Ledger,
    listing: Listing,
    shape: tuple[int, int],
    seed: int,
    pattern_id: Optional[str] = None,
) -> tuple[Ledger, PatternLabel]:
    """Append one transaction inside the listing's UTC day containing an
    output of exactly the listing price, with the requested chainlet
    shape.  Decoy outputs never equal the price.
    """
    i, o = shape
    if i < 1 or o < 1:
        raise InfeasibleParams("shape must have at least one input and output")
    pid = pattern_id or f"{KIND_SALE}-{seed}"
    rng = random.Random(f"sale:{seed}")
    ids = _IdStream(f"chaintrace:inject:sale:{seed}:{listing.item_id}")

    day_start = int(
        datetime(listing.day.year, listing.day.month, listing.day.day, tzinfo=timezone.utc).timestamp()
    )
    day_end = day_start + 86_400
    lo = max(day_start, ledger.window[0]) + 1
    hi = min(day_end, ledger.window[1])
    if hi <= lo:
        raise InfeasibleParams(
            f"listing day {listing.day.isoformat()} does not overlap the ledger window"
        )
    sale_time = rng.randrange(lo, hi)

    decoys = []
    for _ in range(o - 1):
        v = listing.price
        while v == listing.price:
            v = rng.randint(MIN_OUTPUT_SAT, listing.price * 2 + 100_000)
        decoys.append(v)
    total_out = listing.price + sum(decoys)
    share, extra = divmod(total_out, i)
    funding_values = [share + 1] * extra + [share] * (i - extra)
    if any(v < 1 for v in funding_values):
        raise InfeasibleParams("price too small to split across inputs")
    funding_addrs = [ids.address() for _ in range(i)]
    funding = Transaction(
        ids.txid(),
        sale_time - 1,
        (),
        tuple(TxOutput(a, v) for a, v in zip(funding_addrs, funding_values)),
    )
    if funding.timestamp < ledger.window[0]:
        raise InfeasibleParams("no room for the funding transaction before the sale")

    out_specs = [(ids.address(), v) for v in decoys]
    payment_addr = ids.address()
    out_specs.insert(rng.randrange(o), (payment_addr, listing.price))
    sale = Transaction(
        ids.txid(),
        sale_time,
        tuple(OutPoint(funding.txid, v) for v in range(i)),
        tuple(TxOutput(a, v) for a, v in out_specs),
    )
    label = PatternLabel(
        pid,
        KIND_SALE,
        frozenset((funding.txid, sale.txid)),
        frozenset((sale.txid,)),
        frozenset(funding_addrs + [a for a, _ in out_specs]),
        {
            "item_id": listing.item_id,
            "day": listing.day.isoformat(),
            "price": listing.price,
            "shape": list(shape),
            "payment_address": payment_addr,
            "seed": seed,
        },
    )
    return _append(ledger, [funding, sale]), label
