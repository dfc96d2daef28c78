"""
NewBlockHeader events and their per-subscriber streams.
"""
import logging
import threading
from collections import deque
from dataclasses import dataclass

from relchain.errors import SubscriptionOverflow
from relchain.ledger.types import BlockHeader

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NewBlockHeaderEvent:
    header: BlockHeader
    block_id: bytes

    @property
    def height(self):
        return self.header.height

    @property
    def num_txs(self):
        return self.header.num_txs


class EventStream:
    """
    Ordered event queue of one subscriber. It never drops an event silently.

    With the realtime clock the buffer holds at most `capacity` events. A
    publish into a full buffer cancels the subscription: the subscriber still
    reads what was buffered, then `next` raises SubscriptionOverflow. In
    virtual mode the subscriber and the loop share one thread, so the buffer
    grows instead.
    """

    def __init__(self, scheduler, capacity=1024):
        self.scheduler = scheduler
        self.capacity = capacity
        self._events = deque()
        self._cond = threading.Condition()
        self._closed = False
        self.overflowed = False

    def publish(self, event):
        with self._cond:
            if self._closed:
                return
            if not self.scheduler.virtual and len(self._events) >= self.capacity:
                logger.warning("event subscriber %d events behind, cancelling its subscription", len(self._events))
                self.overflowed = True
                self._closed = True
            else:
                self._events.append(event)
            self._cond.notify_all()

    def next(self, timeout_ms=None):
        """
        Next event, or None when none arrived within timeout_ms or the stream was closed.

        :raises SubscriptionOverflow: the buffered events are consumed and the subscription was cancelled
        """
        if self.scheduler.virtual:
            if not self.scheduler.run_until(lambda: bool(self._events), timeout_ms):
                return None
        with self._cond:
            if not self._cond.wait_for(lambda: self._events or self._closed,
                                       None if timeout_ms is None else timeout_ms / 1000.0):
                return None
            if self._events:
                return self._events.popleft()
            if self.overflowed:
                raise SubscriptionOverflow(f"more than {self.capacity} new block events were not consumed")
            return None

    def __len__(self):
        return len(self._events)

    def close(self):
        with self._cond:
            self._closed = True
            self._cond.notify_all()
