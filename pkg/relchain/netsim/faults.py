"""
Height-windowed fault schedules. The network re-evaluates the schedule
whenever the highest committed height moves.
"""
import logging

from relchain.consensus.byzantine import BEHAVIORS

logger = logging.getLogger(__name__)

CRASH = "crash"


class FaultSchedule:

    def __init__(self, entries=()):
        self.entries = list(entries)

    def __bool__(self):
        return bool(self.entries)

    def faulty_nodes(self):
        return sorted({entry.node for entry in self.entries})

    def apply(self, nodes, height):
        """Set every scheduled node's fault state for the height being decided next."""
        for entry in self.entries:
            node = nodes[entry.node]
            active = entry.active_at(height)
            if entry.behavior == CRASH:
                if active:
                    node.crash()
                elif node.crashed:
                    node.recover()
            elif entry.behavior in BEHAVIORS:
                wanted = entry.behavior if active else None
                if node.behavior != wanted:
                    logger.info("node %d: behavior %s from height %d", node.node_id, wanted or "honest", height)
                    node.behavior = wanted
