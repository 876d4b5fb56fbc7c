"""Subcommand CLI: reproducible ledger analyses emitting JSON/CSV.

Every run that writes an output file also writes a manifest
(<first output>.manifest.json) capturing the resolved configuration, the
seed, and SHA-256 digests of all inputs and outputs; re-running the same
command line reproduces every artifact byte-for-byte, for any --threads
value.

Amounts on the command line are satoshis when written as plain integers
and BTC when written with a decimal point ("0.067459" = 6,745,900 sat).
Timestamps are unix seconds or RFC 3339.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import random
import sys
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Optional

from . import __version__
from ._kernels import BACKEND
from .detectors import (
    DEFAULT_GAP_CENTER,
    DEFAULT_GAP_SLACK,
    DEFAULT_MAX_T2_OUTPUTS,
    DEFAULT_MIN_EQUAL_OUTPUTS,
    DEFAULT_MIN_PEEL_LENGTH,
    DEFAULT_MIN_ROUNDS,
    DEFAULT_MIN_T1_INPUTS,
    DEFAULT_PEEL_FRACTION_MAX,
    detect_mixing,
    detect_peeling,
    detect_ransom,
    evaluate,
)
from .fingerprint import CATEGORIES, daily_match_series, match_listings
from .graph import build_graph, cluster_multi_input, neighborhood_fraction, reach_counts, taint_distance
from .ingest import (
    EmptySetError,
    Listing,
    ParseError,
    parse_addresses,
    parse_ledger,
    parse_listings,
    write_ledger,
)
from .metrics import (
    amount_anonymity,
    audit_payment,
    chainlet_anonymity,
    chainlet_matrix,
    denomination_histogram,
)
from .model import (
    DEFAULT_CHAINLET_CLAMP,
    Ledger,
    PrecisionError,
    ValidationError,
    btc_str_from_sat,
    ledger_stats,
    sat_from_btc_str,
)
from .synthgen import (
    DEFAULT_RANSOM_CHANGE_PROB,
    GenParams,
    GroundTruthLabels,
    InfeasibleParams,
    NoActiveAddress,
    NoSpentAddress,
    gen_background,
    inject_dusting,
    inject_mixing_rounds,
    inject_peeling_chain,
    inject_ransom_pattern,
    inject_sale,
    labels_from_json,
    labels_to_json,
)

INJECT_KINDS = ("peeling", "mixing", "ransom", "dusting", "sale")


def parse_timestamp(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a unix timestamp or RFC 3339 time: {text!r}")
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def parse_amount(text: str) -> int:
    """Plain integers are satoshis; values with a decimal point are BTC."""
    if "." in text:
        return sat_from_btc_str(text)
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an amount: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("amount must be non-negative")
    return value


def parse_shape(text: str) -> tuple[int, int]:
    try:
        i_s, o_s = text.split(",")
        shape = (int(i_s), int(o_s))
    except ValueError:
        raise argparse.ArgumentTypeError(f"shape must be 'inputs,outputs': {text!r}")
    if shape[0] < 1 or shape[1] < 1:
        raise argparse.ArgumentTypeError("shape counts must be >= 1")
    return shape


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class Run:
    """Collects inputs/outputs of one CLI invocation for the manifest."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.inputs: dict[str, str] = {}
        self.outputs: list[Path] = []
        self.extra: dict = {}

    def read(self, path: str) -> bytes:
        p = Path(path)
        data = p.read_bytes()
        self.inputs[str(path)] = hashlib.sha256(data).hexdigest()
        return data

    def write(self, path: str, data: bytes) -> None:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(data)
        self.outputs.append(p)

    def finish(self) -> None:
        if not self.outputs:
            return
        config = {
            k: v for k, v in sorted(vars(self.args).items()) if k != "func" and v is not None
        }
        manifest = {
            "tool": "chaintrace",
            "version": __version__,
            "kernel_backend": BACKEND,
            "config": config,
            "inputs": self.inputs,
            "outputs": {str(p): _sha256(p) for p in self.outputs},
        }
        manifest.update(self.extra)
        manifest_path = (
            Path(self.args.manifest)
            if getattr(self.args, "manifest", None)
            else Path(str(self.outputs[0]) + ".manifest.json")
        )
        manifest_path.write_text(
            json.dumps(manifest, sort_keys=True, indent=2, default=str) + "\n",
            encoding="utf-8",
        )


def _csv_bytes(header: list[str], rows: list[list]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def _emit(run: Run, data: bytes, out: Optional[str]) -> None:
    if out:
        run.write(out, data)
    else:
        sys.stdout.write(data.decode("utf-8"))


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2, default=str) + "\n").encode("utf-8")


def _load_ledger(run: Run, args: argparse.Namespace) -> Ledger:
    window = None
    if args.t_from is not None or args.t_to is not None:
        if args.t_from is None or args.t_to is None:
            raise UsageError("--from and --to must be given together")
        window = (args.t_from, args.t_to)
    return parse_ledger(run.read(args.ledger), window=window)


def _analysis_window(ledger: Ledger, args: argparse.Namespace) -> tuple[int, int]:
    t_from = args.t_from if args.t_from is not None else ledger.window[0]
    t_to = args.t_to if args.t_to is not None else ledger.window[1]
    if t_from >= t_to:
        raise UsageError("--from must precede --to")
    return (t_from, t_to)


class UsageError(ValueError):
    pass


# --- subcommand implementations -------------------------------------------


def cmd_validate(run: Run, args: argparse.Namespace) -> int:
    ledger = _load_ledger(run, args)
    stats = ledger_stats(ledger)
    summary = {
        "valid": True,
        "n_tx": stats.n_tx,
        "n_addresses": stats.n_addresses,
        "window": list(ledger.window),
    }
    _emit(run, _json_bytes(summary), args.out)
    return 0


def _derived_seed(master: int, index: int) -> int:
    digest = hashlib.sha256(f"chaintrace:{master}:inject:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _auto_dust_wallet(ledger: Ledger, labels: GroundTruthLabels, dust: int, seed: int):
    last_error: Exception = NoSpentAddress("no wallets available")
    for wid in sorted(labels.wallets):
        try:
            return inject_dusting(ledger, labels, wid, dust, seed, pattern_id=f"dusting-{seed}")
        except (NoSpentAddress, NoActiveAddress) as exc:
            last_error = exc
    raise last_error


def cmd_generate(run: Run, args: argparse.Namespace) -> int:
    window = (args.t_from, args.t_to)
    params = GenParams(
        seed=args.seed,
        n_background_tx=args.n,
        window=window,
        wallet_count=args.wallets,
        round_amount_weight=args.round_weight,
        specific_amount_weight=args.specific_weight,
    )
    if args.dist_cell:
        dist: dict[tuple[int, int], float] = {}
        for cell in args.dist_cell:
            i_s, o_s, p_s = cell.split(",")
            dist[(int(i_s), int(o_s))] = float(p_s)
        params = GenParams(
            seed=params.seed,
            n_background_tx=params.n_background_tx,
            window=params.window,
            chainlet_distribution=dist,
            wallet_count=params.wallet_count,
            round_amount_weight=params.round_amount_weight,
            specific_amount_weight=params.specific_amount_weight,
        )
    ledger, labels = gen_background(params)
    for index, kind in enumerate(args.inject or []):
        child = _derived_seed(args.seed, index)
        if kind == "peeling":
            ledger, label = inject_peeling_chain(
                ledger,
                args.peel_length,
                args.peel_start,
                args.peel_fraction,
                child,
                pattern_id=f"peeling-{index}",
            )
        elif kind == "mixing":
            ledger, label = inject_mixing_rounds(
                ledger,
                args.mix_participants,
                args.mix_rounds,
                args.mix_denomination,
                child,
                pattern_id=f"mixing-{index}",
            )
        elif kind == "ransom":
            jitter_rng = random.Random(f"gap-jitter:{child}")
            gap = args.ransom_gap + jitter_rng.randint(-args.ransom_gap_jitter, args.ransom_gap_jitter)
            ledger, label = inject_ransom_pattern(
                ledger,
                args.ransom_amount,
                args.ransom_inputs,
                gap,
                child,
                change_prob=args.ransom_change_prob,
                pattern_id=f"ransom-{index}",
            )
        elif kind == "dusting":
            if args.dust_wallet:
                ledger, label = inject_dusting(
                    ledger, labels, args.dust_wallet, args.dust_amount, child,
                    pattern_id=f"dusting-{index}",
                )
            else:
                ledger, label = _auto_dust_wallet(ledger, labels, args.dust_amount, child)
                label = dataclasses.replace(label, pattern_id=f"dusting-{index}")
        elif kind == "sale":
            listing = Listing(
                day=date.fromisoformat(args.sale_day)
                if args.sale_day
                else datetime.fromtimestamp(window[0] + 86_400, tz=timezone.utc).date(),
                market="cli",
                vendor="cli",
                item_id=f"sale-{index}",
                price=args.sale_price,
            )
            ledger, label = inject_sale(ledger, listing, args.sale_shape, child, pattern_id=f"sale-{index}")
        else:
            raise UsageError(f"unknown injection kind {kind!r}")
        labels = labels.add(label)
    run.write(args.out, write_ledger(ledger))
    run.write(args.labels, labels_to_json(labels))
    run.extra["seed"] = args.seed
    return 0


def cmd_taint(run: Run, args: argparse.Namespace) -> int:
    ledger = _load_ledger(run, args)
    black = parse_addresses(run.read(args.black), label=Path(args.black).stem)
    graph = build_graph(ledger, _analysis_window(ledger, args))
    distances = taint_distance(graph, black, args.max_d)
    if args.format == "json":
        _emit(run, _json_bytes({"distances": distances}), args.out)
    else:
        rows = [[addr, d] for addr, d in sorted(distances.items(), key=lambda kv: (kv[1], kv[0]))]
        _emit(run, _csv_bytes(["address", "distance"], rows), args.out)
    return 0


def cmd_reach(run: Run, args: argparse.Namespace) -> int:
    ledger = _load_ledger(run, args)
    black = parse_addresses(run.read(args.black), label=Path(args.black).stem)
    graph = build_graph(ledger, _analysis_window(ledger, args))
    counts = reach_counts(graph, black, args.max_d)
    if args.format == "json":
        _emit(run, _json_bytes({"reach": {str(d): c for d, c in counts.items()}}), args.out)
    else:
        _emit(run, _csv_bytes(["distance", "addresses"], [[d, c] for d, c in counts.items()]), args.out)
    return 0


def cmd_cluster(run: Run, args: argparse.Namespace) -> int:
    ledger = _load_ledger(run, args)
    graph = build_graph(ledger, _analysis_window(ledger, args))
    clusters = cluster_multi_input(graph, change_heuristic=args.change_heuristic)
    if args.min_size > 1:
        clusters = [c for c in clusters if len(c) >= args.min_size]
    if args.format == "json":
        _emit(run, _json_bytes({"clusters": [sorted(c) for c in clusters]}), args.out)
    else:
        rows = [[addr, cid] for cid, members in enumerate(clusters) for addr in sorted(members)]
        _emit(run, _csv_bytes(["address", "cluster_id"], rows), args.out)
    return 0


def cmd_neighborhood(run: Run, args: argparse.Namespace) -> int:
    ledger = _load_ledger(run, args)
    seeds = parse_addresses(run.read(args.seeds), label=Path(args.seeds).stem)
    graph = build_graph(ledger, _analysis_window(ledger, args))
    fraction = neighborhood_fraction(graph, seeds, args.hops)
    _emit(run, _json_bytes({"hops": args.hops, "fraction": fraction}), args.out)
    return 0


def cmd_metrics_amount(run: Run, args: argparse.Namespace) -> int:
    ledger = _load_ledger(run, args)
    window = _analysis_window(ledger, args)
    count = amount_anonymity(ledger, window, args.amount, args.tolerance)
    _emit(
        run,
        _json_bytes(
            {
                "amount_sat": args.amount,
                "amount_btc": btc_str_from_sat(args.amount),
                "tolerance_sat": args.tolerance,
                "transactions": count,
            }
        ),
        args.out,
    )
    return 0


def cmd_metrics_chainlet(run: Run, args: argparse.Namespace) -> int:
    ledger = _load_ledger(run, args)
    window = _analysis_window(ledger, args)
    count = chainlet_anonymity(ledger, window, args.inputs, args.outputs)
    _emit(run, _json_bytes({"inputs": args.inputs, "outputs": args.outputs, "transactions": count}), args.out)
    return 0


def cmd_metrics_matrix(run: Run, args: argparse.Namespace) -> int:
    ledger = _load_ledger(run, args)
    window = _analysis_window(ledger, args)
    matrix = chainlet_matrix(ledger, window, args.clamp)
    header = ["inputs\\outputs"] + [str(o) for o in range(1, args.clamp + 1)]
    rows = []
    for i in range(1, args.clamp + 1):
        if args.counts:
            rows.append([str(i)] + [matrix.count(i, o) for o in range(1, args.clamp + 1)])
        else:
            rows.append([str(i)] + [f"{matrix.share(i, o):.6f}" for o in range(1, args.clamp + 1)])
    _emit(run, _csv_bytes(header, rows), args.out)
    return 0


def cmd_metrics_denoms(run: Run, args: argparse.Namespace) -> int:
    ledger = _load_ledger(run, args)
    window = _analysis_window(ledger, args)
    hist = denomination_histogram(ledger, window, args.top_k)
    rows = [[value, btc_str_from_sat(value), freq] for value, freq in hist]
    _emit(run, _csv_bytes(["amount_sat", "amount_btc", "frequency"], rows), args.out)
    return 0


def cmd_fingerprint(run: Run, args: argparse.Namespace) -> int:
    ledger = _load_ledger(run, args)
    listings = parse_listings(run.read(args.listings))
    records, unmatched, skipped = match_listings(ledger, listings, args.tolerance, threads=args.threads)
    rows = []
    for rec in records:
        txids = sorted({o.txid for o in rec.outputs})
        rows.append(
            [
                rec.listing.day.isoformat(),
                rec.listing.item_id,
                rec.category,
                len(rec.outputs),
                ";".join(txids),
            ]
        )
    _emit(run, _csv_bytes(["day", "item_id", "category", "match_count", "txids"], rows), args.out)
    if args.series:
        series = daily_match_series(records)
        srows = [[day.isoformat()] + [counts[c] for c in CATEGORIES] for day, counts in series.items()]
        run.write(args.series, _csv_bytes(["day", *[c.replace("-", "_") for c in CATEGORIES]], srows))
    run.extra["fingerprint_summary"] = {
        "matched": len(records),
        "unmatched": len(unmatched),
        "skipped_day_outside_ledger": len(skipped),
    }
    return 0


def cmd_detect(run: Run, args: argparse.Namespace) -> int:
    ledger = _load_ledger(run, args)
    graph = build_graph(ledger, _analysis_window(ledger, args))
    if args.pattern == "ransom":
        detections = detect_ransom(
            graph,
            min_t1_inputs=args.min_t1_inputs,
            max_t2_outputs=args.max_t2_outputs,
            gap_center=args.gap_center,
            gap_slack=args.gap_slack,
            min_amount=args.min_amount,
        )
        candidate_rows = [
            [c.t2_txid, c.t1_txid, c.target_address, c.t1_input_count, c.t2_output_count,
             c.gap_seconds, c.amount, c.change_present]
            for c in detections
        ]
        candidate_header = ["t2_txid", "t1_txid", "target_address", "t1_inputs", "t2_outputs",
                            "gap_seconds", "amount_sat", "change_present"]
    elif args.pattern == "peeling":
        detections = detect_peeling(graph, min_length=args.min_length, peel_fraction_max=args.peel_fraction_max)
        candidate_rows = [[len(c.txids), ";".join(c.txids)] for c in detections]
        candidate_header = ["length", "txids"]
    elif args.pattern == "mixing":
        detections = detect_mixing(graph, min_equal_outputs=args.min_equal_outputs, min_rounds=args.min_rounds)
        candidate_rows = [[len(c.txids), c.round_amounts[0], ";".join(c.txids)] for c in detections]
        candidate_header = ["rounds", "round_amount_sat", "txids"]
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown pattern {args.pattern!r}")

    report_obj: dict = {
        "pattern": args.pattern,
        "detections": len(detections),
    }
    if args.eval:
        if not args.labels:
            raise UsageError("--eval requires --labels")
        labels = labels_from_json(run.read(args.labels))
        report = evaluate(detections, labels, args.pattern, n_tx=graph.n_tx)
        report_obj["evaluation"] = report.to_json_obj()
        run.extra["evaluation"] = {
            "pattern": args.pattern,
            "precision": report.precision,
            "recall": report.recall,
        }
    _emit(run, _json_bytes(report_obj), args.out)
    if args.candidates:
        run.write(args.candidates, _csv_bytes(candidate_header, candidate_rows))
    return 0


def cmd_audit(run: Run, args: argparse.Namespace) -> int:
    ledger = _load_ledger(run, args)
    window = _analysis_window(ledger, args)
    report = audit_payment(ledger, window, args.amount, (args.inputs, args.outputs), args.rule8_threshold)
    _emit(
        run,
        _json_bytes(
            {
                "amount_sat": report.amount,
                "amount_btc": btc_str_from_sat(report.amount),
                "shape": list(report.shape),
                "amount_crowd": report.amount_crowd,
                "chainlet_crowd": report.chainlet_crowd,
                "amount_percentile": report.amount_percentile,
                "chainlet_percentile": report.chainlet_percentile,
                "rule8_pass": report.rule8_pass,
                "rule8_threshold": report.rule8_threshold,
                "rule10_pass": report.rule10_pass,
            }
        ),
        args.out,
    )
    return 0


# --- parser wiring ---------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, ledger: bool = True) -> None:
    if ledger:
        p.add_argument("--ledger", required=True, help="ledger file (JSON lines)")
    p.add_argument("--from", dest="t_from", type=parse_timestamp, default=None,
                   help="window start (unix seconds or RFC 3339)")
    p.add_argument("--to", dest="t_to", type=parse_timestamp, default=None,
                   help="window end, exclusive")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads; results are identical for any value")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--manifest", default=None, help="manifest path (default: <out>.manifest.json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaintrace",
        description="UTXO ledger traceability toolkit",
    )
    parser.add_argument("--version", action="version", version=f"chaintrace {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a ledger file")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("generate", help="generate a synthetic ledger with labeled injections")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True, help="background transaction count")
    p.add_argument("--out", required=True, help="ledger output path")
    p.add_argument("--labels", required=True, help="ground-truth labels output path")
    p.add_argument("--manifest", default=None)
    p.add_argument("--from", dest="t_from", type=parse_timestamp, default=1_600_000_000)
    p.add_argument("--to", dest="t_to", type=parse_timestamp, default=1_602_592_000)
    p.add_argument("--wallets", type=int, default=50)
    p.add_argument("--round-weight", type=float, default=0.5)
    p.add_argument("--specific-weight", type=float, default=0.5)
    p.add_argument("--dist-cell", action="append", default=None, metavar="I,O,P",
                   help="chainlet distribution cell, repeatable (default: built-in mix)")
    p.add_argument("--inject", action="append", choices=INJECT_KINDS, default=None,
                   help="append a labeled pattern; repeatable")
    p.add_argument("--peel-length", type=int, default=5)
    p.add_argument("--peel-start", type=parse_amount, default=100_000_000)
    p.add_argument("--peel-fraction", type=float, default=0.1)
    p.add_argument("--mix-participants", type=int, default=20)
    p.add_argument("--mix-rounds", type=int, default=2)
    p.add_argument("--mix-denomination", type=parse_amount, default=5_000_000)
    p.add_argument("--ransom-amount", type=parse_amount, default=50_000_000)
    p.add_argument("--ransom-inputs", type=int, default=150)
    p.add_argument("--ransom-gap", type=int, default=DEFAULT_GAP_CENTER)
    p.add_argument("--ransom-gap-jitter", type=int, default=3_600)
    p.add_argument("--ransom-change-prob", type=float, default=DEFAULT_RANSOM_CHANGE_PROB)
    p.add_argument("--dust-amount", type=parse_amount, default=546)
    p.add_argument("--dust-wallet", default=None)
    p.add_argument("--sale-price", type=parse_amount, default=6_745_900)
    p.add_argument("--sale-day", default=None, help="YYYY-MM-DD (default: second day of window)")
    p.add_argument("--sale-shape", type=parse_shape, default=(1, 2))
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("taint", help="distance from black addresses")
    _add_common(p)
    p.add_argument("--black", required=True, help="black address list file")
    p.add_argument("--max-d", type=int, default=3)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_taint)

    p = sub.add_parser("reach", help="address counts per taint distance")
    _add_common(p)
    p.add_argument("--black", required=True)
    p.add_argument("--max-d", type=int, default=3)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("cluster", help="multi-input address clustering")
    _add_common(p)
    p.add_argument("--min-size", type=int, default=1, help="drop clusters smaller than this")
    p.add_argument("--change-heuristic", action="store_true",
                   help="also merge fresh-address/non-round change outputs (error-prone)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("neighborhood", help="fraction of addresses within N hops of seeds")
    _add_common(p)
    p.add_argument("--seeds", required=True, help="seed address list file")
    p.add_argument("--hops", type=int, default=2)
    p.set_defaults(func=cmd_neighborhood)

    pm = sub.add_parser("metrics", help="anonymity metrics")
    msub = pm.add_subparsers(dest="metric", required=True)

    p = msub.add_parser("amount", help="transactions sharing an output amount")
    _add_common(p)
    p.add_argument("--amount", type=parse_amount, required=True)
    p.add_argument("--tolerance", type=parse_amount, default=0)
    p.set_defaults(func=cmd_metrics_amount)

    p = msub.add_parser("chainlet", help="transactions sharing an exact shape")
    _add_common(p)
    p.add_argument("--inputs", type=int, required=True)
    p.add_argument("--outputs", type=int, required=True)
    p.set_defaults(func=cmd_metrics_chainlet)

    p = msub.add_parser("matrix", aliases=["chainlet-matrix"], help="clamped occurrence matrix")
    _add_common(p)
    p.add_argument("--clamp", type=int, default=DEFAULT_CHAINLET_CLAMP)
    p.add_argument("--counts", action="store_true", help="emit raw counts instead of shares")
    p.set_defaults(func=cmd_metrics_matrix)

    p = msub.add_parser("denoms", help="most frequent output denominations")
    _add_common(p)
    p.add_argument("--top-k", type=int, default=20)
    p.set_defaults(func=cmd_metrics_denoms)

    p = sub.add_parser("fingerprint", help="match listing prices to day outputs")
    _add_common(p)
    p.add_argument("--listings", required=True, help="listings CSV")
    p.add_argument("--tolerance", type=parse_amount, default=0)
    p.add_argument("--series", default=None, help="also write per-day category counts CSV")
    p.set_defaults(func=cmd_fingerprint)

    p = sub.add_parser("detect", help="run a pattern detector")
    dsub = p.add_subparsers(dest="pattern", required=True)

    p = dsub.add_parser("ransom")
    _add_common(p)
    p.add_argument("--min-t1-inputs", type=int, default=DEFAULT_MIN_T1_INPUTS)
    p.add_argument("--max-t2-outputs", type=int, default=DEFAULT_MAX_T2_OUTPUTS)
    p.add_argument("--gap-center", type=int, default=DEFAULT_GAP_CENTER)
    p.add_argument("--gap-slack", type=int, default=DEFAULT_GAP_SLACK)
    p.add_argument("--min-amount", type=parse_amount, default=0)
    p.add_argument("--labels", default=None)
    p.add_argument("--eval", action="store_true")
    p.add_argument("--candidates", default=None, help="candidate table CSV path")
    p.set_defaults(func=cmd_detect)

    p = dsub.add_parser("peeling")
    _add_common(p)
    p.add_argument("--min-length", type=int, default=DEFAULT_MIN_PEEL_LENGTH)
    p.add_argument("--peel-fraction-max", type=float, default=DEFAULT_PEEL_FRACTION_MAX)
    p.add_argument("--labels", default=None)
    p.add_argument("--eval", action="store_true")
    p.add_argument("--candidates", default=None)
    p.set_defaults(func=cmd_detect)

    p = dsub.add_parser("mixing")
    _add_common(p)
    p.add_argument("--min-equal-outputs", type=int, default=DEFAULT_MIN_EQUAL_OUTPUTS)
    p.add_argument("--min-rounds", type=int, default=DEFAULT_MIN_ROUNDS)
    p.add_argument("--labels", default=None)
    p.add_argument("--eval", action="store_true")
    p.add_argument("--candidates", default=None)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("audit", help="audit a planned payment against a window")
    _add_common(p)
    p.add_argument("--amount", type=parse_amount, required=True)
    p.add_argument("--inputs", type=int, required=True)
    p.add_argument("--outputs", type=int, required=True)
    p.add_argument("--rule8-threshold", type=float, default=None)
    p.set_defaults(func=cmd_audit)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    run = Run(args)
    try:
        code = args.func(run, args)
        run.finish()
        return code
    except UsageError as exc:
        sys.stderr.write(json.dumps({"error": "UsageError", "message": str(exc)}) + "\n")
        return 2
    except (
        ValidationError,
        ParseError,
        PrecisionError,
        InfeasibleParams,
        EmptySetError,
        NoSpentAddress,
        NoActiveAddress,
        FileNotFoundError,
        ValueError,
    ) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ValidationError):
            payload["issues"] = [
                {"code": i.code, "txid": i.txid, "detail": i.detail, "line": i.line}
                for i in exc.issues
            ]
        if isinstance(exc, ParseError):
            payload["issues"] = [{"line": i.line, "message": i.message} for i in exc.issues]
        sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
