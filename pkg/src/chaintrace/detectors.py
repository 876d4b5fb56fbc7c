"""Structural detectors for the ransom motif, peeling chains, and mixing
rounds, plus scoring against injected ground truth.

Each detector is a pure scan over an immutable TxGraph and returns
candidates in a deterministic order.  Widening any threshold only ever
adds candidates.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .graph import TxGraph
from .synthgen import GroundTruthLabels

DEFAULT_MIN_T1_INPUTS = 50
DEFAULT_MAX_T2_OUTPUTS = 2
DEFAULT_GAP_CENTER = 86_400
DEFAULT_GAP_SLACK = 21_600
DEFAULT_MIN_PEEL_LENGTH = 4
DEFAULT_PEEL_FRACTION_MAX = 0.3
DEFAULT_MIN_EQUAL_OUTPUTS = 5
DEFAULT_MIN_ROUNDS = 2


@dataclass(frozen=True)
class RansomCandidate:
    """A (t1, t2) pair matching the ransom payment motif.

    The feature vector is this toolkit's concrete six-field encoding of
    the motif: t1 fan-in, t1 fan-out, t2 fan-out, the funding-to-payment
    gap, the payment amount, and whether t2 carries change.
    """

    t1_txid: str
    t2_txid: str
    target_address: str
    t1_input_count: int
    t1_output_count: int
    t2_output_count: int
    gap_seconds: int
    amount: int
    change_present: bool

    @property
    def txids(self) -> frozenset[str]:
        return frozenset((self.t1_txid, self.t2_txid))

    def features(self) -> tuple[int, int, int, int, int, bool]:
        return (
            self.t1_input_count,
            self.t1_output_count,
            self.t2_output_count,
            self.gap_seconds,
            self.amount,
            self.change_present,
        )


@dataclass(frozen=True)
class PeelingChain:
    txids: tuple[str, ...]  # chain order

    @property
    def length(self) -> int:
        return len(self.txids)


@dataclass(frozen=True)
class MixingSequence:
    txids: tuple[str, ...]  # round order
    round_amounts: tuple[int, ...]

    @property
    def rounds(self) -> int:
        return len(self.txids)


Detection = Union[RansomCandidate, PeelingChain, MixingSequence]


def detect_ransom(
    graph: TxGraph,
    min_t1_inputs: int = DEFAULT_MIN_T1_INPUTS,
    max_t2_outputs: int = DEFAULT_MAX_T2_OUTPUTS,
    gap_center: int = DEFAULT_GAP_CENTER,
    gap_slack: int = DEFAULT_GAP_SLACK,
    min_amount: int = 0,
) -> list[RansomCandidate]:
    """All (t1, t2) pairs where t2 (at most ``max_t2_outputs`` outputs)
    spends an output of a wide-fan-in t1 roughly ``gap_center`` seconds
    later, paying at least ``min_amount``.  Ordered by (t2 time, t2 txid,
    t1 txid).
    """
    candidates: list[tuple[tuple, RansomCandidate]] = []
    for idx, t2 in enumerate(graph.txs):
        if t2.is_coinbase or len(t2.outputs) > max_t2_outputs:
            continue
        best = max(t2.outputs, key=lambda o: o.value)
        if best.value < min_amount:
            continue
        seen_sources: set[str] = set()
        for rin in graph.resolved_inputs[idx]:
            if rin.src_txid in seen_sources:
                continue
            seen_sources.add(rin.src_txid)
            t1_idx = graph.txid_to_idx.get(rin.src_txid)
            if t1_idx is None:
                continue
            t1 = graph.txs[t1_idx]
            if len(t1.inputs) < min_t1_inputs:
                continue
            gap = t2.timestamp - t1.timestamp
            if gap < 0 or abs(gap - gap_center) > gap_slack:
                continue
            cand = RansomCandidate(
                t1_txid=t1.txid,
                t2_txid=t2.txid,
                target_address=best.address,
                t1_input_count=len(t1.inputs),
                t1_output_count=len(t1.outputs),
                t2_output_count=len(t2.outputs),
                gap_seconds=gap,
                amount=best.value,
                change_present=len(t2.outputs) == 2,
            )
            candidates.append(((t2.timestamp, t2.txid, t1.txid), cand))
    return [cand for _, cand in sorted(candidates, key=lambda pair: pair[0])]


def _peel_step(graph: TxGraph, idx: int, frac_max: Fraction) -> Optional[int]:
    """Return the vout of the carry (larger) output when tx ``idx`` is a
    peel step, else None: one input, two outputs, strictly asymmetric
    split, smaller output at most ``frac_max`` of the input value."""
    tx = graph.txs[idx]
    if tx.is_coinbase or len(tx.inputs) != 1 or len(tx.outputs) != 2:
        return None
    v0, v1 = tx.outputs[0].value, tx.outputs[1].value
    if v0 == v1:
        return None
    small = min(v0, v1)
    input_value = graph.resolved_inputs[idx][0].value
    if Fraction(small) > frac_max * input_value:
        return None
    return 0 if v0 > v1 else 1


def detect_peeling(
    graph: TxGraph,
    min_length: int = DEFAULT_MIN_PEEL_LENGTH,
    peel_fraction_max: Union[float, str, Fraction] = DEFAULT_PEEL_FRACTION_MAX,
) -> list[PeelingChain]:
    """Maximal chains of peel steps linked through the carry output.

    A chain's next transaction is the (unique) spender of the current
    carry output; chains shorter than ``min_length`` are dropped.  Chains
    are maximal by construction so no reported chain is a sub-chain of
    another.  Ordered by first-tx (time, txid).
    """
    if min_length < 1:
        raise ValueError("min_length must be >= 1")
    frac_max = (
        peel_fraction_max
        if isinstance(peel_fraction_max, Fraction)
        else Fraction(str(peel_fraction_max))
    )
    carry_vout: dict[int, int] = {}
    for idx in range(graph.n_tx):
        vout = _peel_step(graph, idx, frac_max)
        if vout is not None:
            carry_vout[idx] = vout

    def successor(idx: int) -> Optional[int]:
        nxt = graph.spender_of.get((graph.txs[idx].txid, carry_vout[idx]))
        return nxt if nxt is not None and nxt in carry_vout else None

    # Heads: peel steps not fed by another peel step's carry output.
    fed: set[int] = set()
    for idx in carry_vout:
        nxt = successor(idx)
        if nxt is not None:
            fed.add(nxt)
    chains: list[PeelingChain] = []
    for head in sorted(carry_vout):
        if head in fed:
            continue
        chain = [head]
        cur = head
        while True:
            nxt = successor(cur)
            if nxt is None:
                break
            chain.append(nxt)
            cur = nxt
        if len(chain) >= min_length:
            chains.append(PeelingChain(tuple(graph.txs[k].txid for k in chain)))
    chains.sort(key=lambda c: (graph.txs[graph.txid_to_idx[c.txids[0]]].timestamp, c.txids[0]))
    return chains


def _equal_output_amount(tx, min_equal: int) -> Optional[int]:
    counts = Counter(o.value for o in tx.outputs)
    eligible = [(n, -v) for v, n in counts.items() if n >= min_equal]
    if not eligible:
        return None
    n, neg_v = max(eligible)
    return -neg_v


def detect_mixing(
    graph: TxGraph,
    min_equal_outputs: int = DEFAULT_MIN_EQUAL_OUTPUTS,
    min_rounds: int = DEFAULT_MIN_ROUNDS,
) -> list[MixingSequence]:
    """Maximal sequences of equal-output transactions where each round
    spends outputs of the previous one.  Transactions qualify when some
    output amount repeats at least ``min_equal_outputs`` times; sequences
    shorter than ``min_rounds`` are dropped.
    """
    if min_equal_outputs < 1 or min_rounds < 1:
        raise ValueError("thresholds must be >= 1")
    round_amount: dict[int, int] = {}
    for idx, tx in enumerate(graph.txs):
        amount = _equal_output_amount(tx, min_equal_outputs)
        if amount is not None:
            round_amount[idx] = amount

    successors: dict[int, list[int]] = {idx: [] for idx in round_amount}
    has_pred: set[int] = set()
    for idx in round_amount:
        tx = graph.txs[idx]
        nxt_set: set[int] = set()
        for vout in range(len(tx.outputs)):
            spender = graph.spender_of.get((tx.txid, vout))
            if spender is not None and spender in round_amount and spender != idx:
                nxt_set.add(spender)
        successors[idx] = sorted(nxt_set, key=lambda k: (graph.txs[k].timestamp, graph.txs[k].txid))
        has_pred.update(nxt_set)

    sequences: list[MixingSequence] = []

    def extend(path: list[int]) -> None:
        nxt = successors[path[-1]]
        if not nxt:
            if len(path) >= min_rounds:
                sequences.append(
                    MixingSequence(
                        tuple(graph.txs[k].txid for k in path),
                        tuple(round_amount[k] for k in path),
                    )
                )
            return
        for k in nxt:
            extend(path + [k])

    for start in sorted(round_amount):
        if start not in has_pred:
            extend([start])
    sequences.sort(
        key=lambda s: (graph.txs[graph.txid_to_idx[s.txids[0]]].timestamp, s.txids)
    )
    return sequences


# --- evaluation -----------------------------------------------------------


@dataclass(frozen=True)
class CandidateOutcome:
    txids: tuple[str, ...]  # sorted
    matched_pattern: Optional[str]


@dataclass(frozen=True)
class DetectionReport:
    kind: str
    true_positives: int
    false_positives: int
    false_negatives: int
    true_negatives: Optional[int]
    precision: Optional[float]
    recall: Optional[float]
    candidates: tuple[CandidateOutcome, ...]
    recalled_patterns: tuple[str, ...]
    missed_patterns: tuple[str, ...]

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "true_negatives": self.true_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "recalled_patterns": list(self.recalled_patterns),
            "missed_patterns": list(self.missed_patterns),
            "candidates": [
                {"txids": list(c.txids), "matched_pattern": c.matched_pattern}
                for c in self.candidates
            ],
        }


def evaluate(
    detections: Sequence[Detection],
    labels: GroundTruthLabels,
    kind: str,
    n_tx: Optional[int] = None,
) -> DetectionReport:
    """Score detections against the injected patterns of one kind.

    A detection is a true positive when all its transactions lie inside a
    single labeled pattern; a pattern counts as recalled when some
    detection covers all of its core transactions.  ``n_tx`` (the window's
    transaction count) enables the true-negative count: transactions
    appearing in neither labels nor detections.
    """
    kind_labels = labels.of_kind(kind)
    tp = 0
    outcomes: list[CandidateOutcome] = []
    detected_txids: set[str] = set()
    for det in detections:
        det_txids = frozenset(det.txids)
        detected_txids.update(det_txids)
        matched = next(
            (p.pattern_id for p in kind_labels if det_txids <= p.txids),
            None,
        )
        if matched is not None:
            tp += 1
        outcomes.append(CandidateOutcome(tuple(sorted(det_txids)), matched))
    fp = len(detections) - tp
    recalled = []
    missed = []
    for p in kind_labels:
        if any(p.core_txids <= frozenset(d.txids) for d in detections):
            recalled.append(p.pattern_id)
        else:
            missed.append(p.pattern_id)
    fn = len(missed)
    tn = None
    if n_tx is not None:
        labeled = set()
        for p in kind_labels:
            labeled.update(p.txids)
        tn = max(0, n_tx - len(labeled | detected_txids))
    precision = tp / (tp + fp) if (tp + fp) else None
    recall = len(recalled) / len(kind_labels) if kind_labels else None
    return DetectionReport(
        kind=kind,
        true_positives=tp,
        false_positives=fp,
        false_negatives=fn,
        true_negatives=tn,
        precision=precision,
        recall=recall,
        candidates=tuple(outcomes),
        recalled_patterns=tuple(recalled),
        missed_patterns=tuple(missed),
    )
