"""
Validated configuration models and their YAML loaders.
"""
from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, ValidationError, model_validator

from relchain.errors import ConfigError
from setup.setup import CONFIGS_PATH
from setup.utils import load_yaml

MAX_BLOCK_BYTES = 21 * 1024 * 1024


class MempoolConfig(BaseModel):
    capacity: int = Field(100_000, ge=1)
    max_tx_bytes: int = Field(1024 * 1024, ge=1)
    gossip_batch: int = Field(64, ge=1)
    gossip_interval_ms: float = Field(10.0, ge=0)
    # recently committed hashes kept in memory; older ones are looked up in the ledger
    cache_size: int = Field(10_000, ge=0)


class TimeoutConfig(BaseModel):
    """Consensus timeouts in milliseconds. Round r waits base + r * delta."""
    propose: float = Field(3000.0, gt=0)
    propose_delta: float = Field(500.0, ge=0)
    prevote: float = Field(1000.0, gt=0)
    prevote_delta: float = Field(500.0, ge=0)
    precommit: float = Field(1000.0, gt=0)
    precommit_delta: float = Field(500.0, ge=0)
    # 0 disables the post-decision wait
    commit: float = Field(100.0, ge=0)

    def propose_timeout(self, round_):
        return self.propose + round_ * self.propose_delta

    def prevote_timeout(self, round_):
        return self.prevote + round_ * self.prevote_delta

    def precommit_timeout(self, round_):
        return self.precommit + round_ * self.precommit_delta


class NodeConfig(BaseModel):
    mempool: MempoolConfig = Field(default_factory=MempoolConfig)
    timeouts: TimeoutConfig = Field(default_factory=TimeoutConfig)
    max_block_bytes: int = Field(MAX_BLOCK_BYTES, ge=1024)
    create_empty_blocks: bool = False
    broadcast_tx_commit_timeout_ms: float = Field(10_000.0, gt=0)
    event_buffer: int = Field(1024, ge=1)
    trace_consensus: bool = False


class LinkLatency(BaseModel):
    base_ms: float = Field(0.0, ge=0)
    jitter_ms: float = Field(0.0, ge=0)


class LinkOverride(LinkLatency):
    src: int = Field(ge=0)
    dst: int = Field(ge=0)


class LatencyProfile(BaseModel):
    """
    Delay model of the simulated network. Nodes are placed round-robin into
    `regions`; a message between two regions uses `inter_region["A-B"]`,
    otherwise `base_ms`/`jitter_ms`. Explicit `links` override both.
    """
    name: str = "zero"
    base_ms: float = Field(0.0, ge=0)
    jitter_ms: float = Field(0.0, ge=0)
    regions: List[str] = Field(default_factory=list)
    inter_region: Dict[str, LinkLatency] = Field(default_factory=dict)
    links: List[LinkOverride] = Field(default_factory=list)
    seed: int = 0

    def region_of(self, node_id):
        if not self.regions:
            return None
        return self.regions[node_id % len(self.regions)]

    def link(self, src, dst):
        """(base_ms, jitter_ms) for messages from src to dst."""
        for override in self.links:
            if override.src == src and override.dst == dst:
                return override.base_ms, override.jitter_ms
        a, b = self.region_of(src), self.region_of(dst)
        if a is not None and a != b:
            pair = self.inter_region.get(f"{a}-{b}") or self.inter_region.get(f"{b}-{a}")
            if pair is None:
                raise ConfigError(f"latency profile {self.name!r} has no entry for regions {a}-{b}")
            return pair.base_ms, pair.jitter_ms
        return self.base_ms, self.jitter_ms


class FaultEntry(BaseModel):
    node: int = Field(ge=0)
    behavior: Literal["crash", "silent", "equivocate_proposal", "conflicting_votes"]
    start_height: int = Field(1, ge=1)
    # inclusive; None keeps the fault until the end of the run
    end_height: Optional[int] = None

    @model_validator(mode="after")
    def _check_window(self):
        if self.end_height is not None and self.end_height < self.start_height:
            raise ValueError("end_height must not precede start_height")
        return self

    def active_at(self, height):
        return self.start_height <= height and (self.end_height is None or height <= self.end_height)


class NetworkConfig(BaseModel):
    n_nodes: int = Field(4, ge=1)
    clock: Literal["virtual", "realtime"] = "virtual"
    abci_variant: Literal["builtin", "server"] = "builtin"
    # host:port of an externally started ABCI server; only with n_nodes == 1
    abci_address: Optional[str] = None
    latency: LatencyProfile = Field(default_factory=LatencyProfile)
    node: NodeConfig = Field(default_factory=NodeConfig)
    faults: List[FaultEntry] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_nodes(self):
        for fault in self.faults:
            if fault.node >= self.n_nodes:
                raise ValueError(f"fault targets node {fault.node} of a {self.n_nodes}-node network")
        if self.abci_address is not None and self.n_nodes != 1:
            raise ValueError("an external abci_address serves exactly one node")
        return self


def load_latency_profiles(path=None):
    """All named profiles of a latency profile file."""
    path = Path(path) if path is not None else CONFIGS_PATH / "latency_profiles.yaml"
    raw = load_yaml(path) or {}
    try:
        return {name: LatencyProfile(name=name, **values) for name, values in raw.items()}
    except ValidationError as e:
        raise ConfigError(f"invalid latency profile in {path}: {e}") from e


def load_latency_profile(name, seed=0, path=None):
    profiles = load_latency_profiles(path)
    if name not in profiles:
        raise ConfigError(f"unknown latency profile {name!r}; known: {sorted(profiles)}")
    return profiles[name].model_copy(update={"seed": seed})


def validated(model_cls, **values):
    """Build a model, turning pydantic validation failures into ConfigError."""
    try:
        return model_cls(**values)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


DEFAULT_SYNC_TXS = 1_000
DEFAULT_ASYNC_TXS = 10_000


class RunConfig(BaseModel):
    """One benchmark run: workload, submission mode and the network it runs on."""
    run_id: str = "run"
    workload: Literal["smallbank", "tpcc"] = "smallbank"
    # forwarded to SmallbankConfig / TpccConfig
    workload_params: Dict[str, int] = Field(default_factory=dict)
    mode: Literal["sync", "pseudo-sync", "async"] = "async"
    batch: int = Field(1, ge=1)
    n_txs: Optional[int] = Field(None, ge=1)
    latency_profile: str = "zero"
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    repetitions: int = Field(3, ge=1)
    seed: int = Field(0, ge=0)
    # async watchdog: Stall after this long without a block event
    stall_timeout_ms: float = Field(60_000.0, gt=0)
    # route OrderStatus statements through query instead of the write path
    queries: bool = False

    @model_validator(mode="after")
    def _check_mode(self):
        if self.mode == "sync" and self.batch != 1:
            raise ValueError("sync mode submits one statement per bc-transaction (batch must be 1)")
        if self.mode == "pseudo-sync" and self.batch < 2:
            raise ValueError("pseudo-sync mode batches at least two statements")
        if self.queries and self.workload != "tpcc":
            raise ValueError("query runs need read-only statements (tpcc OrderStatus)")
        if self.n_txs is None:
            self.n_txs = DEFAULT_ASYNC_TXS if self.mode == "async" else DEFAULT_SYNC_TXS
        return self

    @property
    def timeout_commit_ms(self):
        return self.network.node.timeouts.commit

    def workload_config(self):
        return {"seed": self.seed, **self.workload_params}

    def network_config(self, profiles_path=None):
        """The network section with the named latency profile resolved."""
        latency = load_latency_profile(self.latency_profile, seed=self.seed, path=profiles_path)
        return self.network.model_copy(update={"latency": latency})

    def with_point(self, dimension, value):
        """Copy of this config moved to one sweep point."""
        if dimension == "batch":
            mode = self.mode if self.mode == "async" else ("sync" if value == 1 else "pseudo-sync")
            return validated(RunConfig, **{**self.model_dump(), "batch": value, "mode": mode})
        if dimension == "timeout_commit":
            data = self.model_dump()
            data["network"]["node"]["timeouts"]["commit"] = value
            return validated(RunConfig, **data)
        if dimension == "nodes":
            data = self.model_dump()
            data["network"]["n_nodes"] = value
            return validated(RunConfig, **data)
        raise ConfigError(f"unknown sweep dimension {dimension!r}")


def load_run_config(path):
    """RunConfig from a YAML file (configs/run.yaml shows every field)."""
    raw = load_yaml(path) or {}
    return validated(RunConfig, **raw)
