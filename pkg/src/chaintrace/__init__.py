"""chaintrace: UTXO ledger traceability toolkit.

Anonymity metrics, taint-distance queries, transaction fingerprinting,
laundering-pattern detectors, and a deterministic synthetic ledger
generator that injects labeled patterns for detector validation.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    DEFAULT_CHAINLET_CLAMP,
    Ledger,
    LedgerStats,
    OutPoint,
    PrecisionError,
    Transaction,
    TxOutput,
    ValidationError,
    ValidationIssue,
    btc_str_from_sat,
    chainlet_of,
    ledger_stats,
    sat_from_btc_str,
    unspent_outputs,
    validate_ledger,
)
from .ingest import (  # noqa: F401
    BlackAddressSet,
    EmptySetError,
    Listing,
    ParseError,
    parse_addresses,
    parse_ledger,
    parse_listings,
    write_ledger,
)
from .graph import (  # noqa: F401
    TxGraph,
    build_graph,
    cluster_multi_input,
    neighborhood_fraction,
    reach_counts,
    taint_distance,
)
from .metrics import (  # noqa: F401
    AuditReport,
    ChainletMatrix,
    amount_anonymity,
    amount_anonymity_outputs,
    audit_payment,
    chainlet_anonymity,
    chainlet_matrix,
    denomination_histogram,
)
from .fingerprint import (  # noqa: F401
    MatchRecord,
    daily_match_series,
    match_listings,
)
from .detectors import (  # noqa: F401
    DetectionReport,
    MixingSequence,
    PeelingChain,
    RansomCandidate,
    detect_mixing,
    detect_peeling,
    detect_ransom,
    evaluate,
)
from .synthgen import (  # noqa: F401
    BITCOIN_CHAINLET_MIX,
    GenParams,
    GroundTruthLabels,
    InfeasibleParams,
    PatternLabel,
    gen_background,
    inject_dusting,
    inject_mixing_rounds,
    inject_peeling_chain,
    inject_ransom_pattern,
    inject_sale,
    labels_from_json,
    labels_to_json,
)
