"""
Run metrics, the block-packing record and CSV emission (columns in docs/metrics.md).
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from relchain.ledger.types import WlStatement
from setup.utils import create_directory, load_json, save_json

CSV_COLUMNS = ("run_id", "workload", "mode", "batch", "n_nodes", "timeout_commit_ms", "abci_variant",
               "latency_profile", "clock", "n_txs", "bc_txs", "latency_p50_ms", "latency_p95_ms",
               "latency_mean_ms", "end_to_end_ms", "processing_ms", "inspection_ms", "blocks",
               "txs_per_block", "overhead_ratio")


@dataclass(frozen=True)
class FailedStatement:
    height: int
    tx_index: int
    statement_index: int
    text: str
    reason: str

    def __str__(self):
        return f"block {self.height} tx {self.tx_index} stmt {self.statement_index}: {self.reason} [{self.text}]"


@dataclass(frozen=True)
class PackedBlock:
    height: int
    block_time: int
    statements: Tuple[WlStatement, ...]


@dataclass
class PackingRecord:
    """The wl statements of every committed block, in commit order."""
    workload: str
    workload_params: dict
    blocks: List[PackedBlock] = field(default_factory=list)
    app_hash: str = ""

    def add(self, height, block_time, statements):
        self.blocks.append(PackedBlock(height, block_time, tuple(statements)))

    def statements(self):
        return [s for block in self.blocks for s in block.statements]

    @property
    def n_statements(self):
        return sum(len(block.statements) for block in self.blocks)

    def to_dict(self):
        return {"workload": self.workload,
                "workload_params": dict(self.workload_params),
                "app_hash": self.app_hash,
                "blocks": [{"height": block.height, "block_time": block.block_time,
                            "statements": [[s.text, s.client_id, s.seq_no] for s in block.statements]}
                           for block in self.blocks]}

    @classmethod
    def from_dict(cls, data):
        record = cls(data["workload"], dict(data["workload_params"]), app_hash=data.get("app_hash", ""))
        for entry in data["blocks"]:
            record.add(entry["height"], entry["block_time"], [WlStatement(*s) for s in entry["statements"]])
        return record

    def save(self, path):
        create_directory(Path(path).parent)
        save_json(self.to_dict(), path)

    @classmethod
    def load(cls, path):
        return cls.from_dict(load_json(path))


@dataclass
class MetricsReport:
    run_id: str
    workload: str
    mode: str
    batch: int
    n_nodes: int
    timeout_commit_ms: float
    abci_variant: str
    latency_profile: str
    clock: str
    # wl statements admitted and the bc-transactions carrying them
    n_txs: int = 0
    bc_txs: int = 0
    # per wl statement (sync modes: bc-tx latency / batch; async: first submit to block event)
    latencies_ms: List[float] = field(default_factory=list)
    # async: (height, ms since first submit, bc-txs in block)
    block_latencies: List[Tuple[int, float, int]] = field(default_factory=list)
    processing_ms: float = 0.0
    inspection_ms: float = 0.0
    blocks: int = 0
    packing: Optional[PackingRecord] = None
    failures: List[FailedStatement] = field(default_factory=list)
    app_hash: bytes = b""
    standalone_ms: Optional[float] = None
    repetition: int = 0

    @property
    def end_to_end_ms(self):
        return self.processing_ms + self.inspection_ms

    @property
    def txs_per_block(self):
        return self.bc_txs / self.blocks if self.blocks else 0.0

    @property
    def overhead_ratio(self):
        """Chain runtime over standalone replay runtime; nan until a replay was timed."""
        if not self.standalone_ms:
            return float("nan")
        return self.end_to_end_ms / self.standalone_ms

    @property
    def ok(self):
        return not self.failures

    def latency_stats(self):
        if not self.latencies_ms:
            return float("nan"), float("nan"), float("nan")
        samples = np.asarray(self.latencies_ms, dtype=float)
        return float(np.percentile(samples, 50)), float(np.percentile(samples, 95)), float(samples.mean())

    def check_conservation(self):
        """Packed statements match the admitted count and the per-block tally."""
        if self.packing is not None and self.packing.n_statements != self.n_txs:
            return False
        if self.block_latencies and sum(n for _, _, n in self.block_latencies) != self.bc_txs:
            return False
        return True

    def row(self):
        p50, p95, mean = self.latency_stats()
        return {"run_id": self.run_id, "workload": self.workload, "mode": self.mode, "batch": self.batch,
                "n_nodes": self.n_nodes, "timeout_commit_ms": self.timeout_commit_ms,
                "abci_variant": self.abci_variant, "latency_profile": self.latency_profile, "clock": self.clock,
                "n_txs": self.n_txs, "bc_txs": self.bc_txs, "latency_p50_ms": p50, "latency_p95_ms": p95,
                "latency_mean_ms": mean, "end_to_end_ms": self.end_to_end_ms, "processing_ms": self.processing_ms,
                "inspection_ms": self.inspection_ms, "blocks": self.blocks, "txs_per_block": self.txs_per_block,
                "overhead_ratio": self.overhead_ratio}


def reports_frame(reports):
    if isinstance(reports, MetricsReport):
        reports = [reports]
    return pd.DataFrame([r.row() for r in reports], columns=list(CSV_COLUMNS))


def emit_csv(reports, path):
    """Write one row per report with the fixed CSV_COLUMNS header."""
    path = Path(path)
    create_directory(path.parent)
    frame = reports_frame(reports)
    frame.to_csv(path, index=False)
    return frame
