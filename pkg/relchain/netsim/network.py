"""
The simulated network: a message bus with per-link delays and a handle to
spawn, drive and tear down N virtual nodes.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Tuple

from relchain.abci.client import connect_abci
from relchain.abci.server import serve_abci
from relchain.config import NetworkConfig, validated
from relchain.consensus.types import ValidatorSet
from relchain.netsim.clock import Scheduler
from relchain.netsim.faults import FaultSchedule
from relchain.netsim.latency import link_delays
from relchain.node.node import Node
from relchain.node.rpc import NodeRpc

logger = logging.getLogger(__name__)

VOTE_KINDS = ("prevote", "precommit")


@dataclass(frozen=True)
class SimReport:
    now_ms: float
    events: int
    heights: Tuple[int, ...]
    messages_sent: Dict[str, int] = field(default_factory=dict)
    messages_dropped: int = 0

    @property
    def vote_messages(self):
        return sum(self.messages_sent.get(kind, 0) for kind in VOTE_KINDS)


class Bus:
    """
    Delivers (kind, payload) messages between nodes after a sampled delay.
    Deliveries on one directed link never overtake each other.
    """

    def __init__(self, scheduler, delays):
        self.scheduler = scheduler
        self.delays = delays
        self.nodes = {}
        self.sent = Counter()
        self.dropped = 0
        self._last_delivery = {}

    def attach(self, node):
        self.nodes[node.node_id] = node

    def send(self, src, dst, kind, payload):
        if self.nodes[src].crashed or self.nodes[dst].crashed:
            self.dropped += 1
            return
        link = (src, dst)
        deliver_at = max(self.scheduler.now() + self.delays[link].sample(), self._last_delivery.get(link, 0.0))
        self._last_delivery[link] = deliver_at
        self.sent[kind] += 1
        self.scheduler.call_at(deliver_at, self._deliver, src, dst, kind, payload)

    def _deliver(self, src, dst, kind, payload):
        node = self.nodes[dst]
        if node.crashed:
            self.dropped += 1
            return
        node.deliver(src, kind, payload)


class NetworkHandle:

    def __init__(self, config, scheduler, bus, nodes, backends, servers):
        self.config = config
        self.scheduler = scheduler
        self.bus = bus
        self.nodes = nodes
        self.backends = backends
        self.servers = servers
        self.faults = FaultSchedule(config.faults)
        self.max_height = 0
        for node in nodes:
            node.on_commit = self._on_commit
        self.faults.apply(nodes, 1)

    def __len__(self):
        return len(self.nodes)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def rpc(self, index=0):
        return NodeRpc(self.nodes[index])

    def inject_byzantine(self, behavior, node_id):
        """Test harness: node follows the scripted deviation from now on."""
        node = self.nodes[node_id]
        if behavior == "crash":
            node.crash()
        else:
            node.behavior = behavior
        logger.info("node %d: injected %s", node_id, behavior)

    @property
    def honest_nodes(self):
        faulty = set(self.faults.faulty_nodes())
        return [n for n in self.nodes if n.node_id not in faulty and n.behavior is None]

    def _on_commit(self, node, height):
        if height > self.max_height:
            self.max_height = height
            if self.faults:
                self.faults.apply(self.nodes, height + 1)

    def report(self):
        return SimReport(now_ms=self.scheduler.now(),
                         events=self.scheduler.events_processed,
                         heights=tuple(n.ledger.height for n in self.nodes),
                         messages_sent=dict(self.bus.sent),
                         messages_dropped=self.bus.dropped)

    def run_until_quiescent(self, deadline_ms=None):
        self.scheduler.run_until_quiescent(deadline_ms)
        return self.report()

    def run_until_height(self, height, timeout_ms=None, nodes=None):
        """Drive the network until every given node (default: all live ones) committed height."""
        targets = nodes if nodes is not None else [n for n in self.nodes if not n.crashed]
        return self.scheduler.run_until(lambda: all(n.ledger.height >= height for n in targets), timeout_ms)

    def close(self):
        self.scheduler.close()
        for node in self.nodes:
            node.close()
        for backend in self.backends:
            backend.close()
        for server in self.servers:
            server.close()


def spawn_network(config, make_backend):
    """
    Boot config.n_nodes nodes from a common genesis.

    :param config: NetworkConfig (or a dict of its fields)
    :param make_backend: callable returning a fresh AbciBackend holding the genesis state
    """
    if not isinstance(config, NetworkConfig):
        config = validated(NetworkConfig, **config)
    scheduler = Scheduler(config.clock)
    bus = Bus(scheduler, link_delays(config.latency, config.n_nodes))
    vset = ValidatorSet.of_size(config.n_nodes)
    nodes, backends, servers = [], [], []
    for node_id in range(config.n_nodes):
        if config.abci_address is not None:
            backend = connect_abci(config.abci_address)
        elif config.abci_variant == "server":
            server = serve_abci(make_backend())
            servers.append(server)
            backend = connect_abci(server.address)
        else:
            backend = make_backend()
        backends.append(backend)
        node = Node(node_id, vset, config.node, backend, scheduler, bus)
        bus.attach(node)
        nodes.append(node)
    handle = NetworkHandle(config, scheduler, bus, nodes, backends, servers)
    for node in nodes:
        scheduler.call_soon(node.start)
    logger.info("spawned %d node(s), %s clock, %s abci, latency profile %s", config.n_nodes, config.clock,
                config.abci_variant, config.latency.name)
    return handle
