"""
The application-blockchain interface.

Public methods enforce the block lifecycle (begin, deliver*, end, commit,
with no interleaving of blocks) and delegate to the `_abstract` methods that
a backend implements. CheckTx, Query and Info are not part of the lifecycle.
"""
import abc
import threading
from dataclasses import dataclass
from enum import Enum

from relchain.errors import ContractViolation


class Phase(Enum):
    IDLE = "idle"
    IN_BLOCK = "in_block"
    ENDED = "ended"


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    reason: str = ""


@dataclass(frozen=True)
class AppInfo:
    app_hash: bytes
    last_height: int


class AbciBackend(object, metaclass=abc.ABCMeta):

    def __init__(self):
        self._phase = Phase.IDLE
        self._handle = None
        self._guard = threading.Lock()

    @property
    def phase(self):
        return self._phase

    def _expect(self, phase, handle, call):
        if self._phase != phase:
            raise ContractViolation(f"{call} called in phase {self._phase.value}, expected {phase.value}")
        if handle is not None and handle != self._handle:
            raise ContractViolation(f"{call} called with handle {handle}, open block is {self._handle}")

    def begin_block(self, header):
        with self._guard:
            self._expect(Phase.IDLE, None, "BeginBlock")
            self._handle = self._begin_block(header)
            self._phase = Phase.IN_BLOCK
            return self._handle

    @abc.abstractmethod
    def _begin_block(self, header):
        """Open the db-transaction of this block and return its handle."""

    def deliver_tx(self, handle, tx_bytes):
        with self._guard:
            self._expect(Phase.IN_BLOCK, handle, "DeliverTx")
            return self._deliver_tx(handle, tx_bytes)

    @abc.abstractmethod
    def _deliver_tx(self, handle, tx_bytes):
        """Execute every statement of the transaction; one ExecStatus per statement."""

    def end_block(self, handle):
        with self._guard:
            self._expect(Phase.IN_BLOCK, handle, "EndBlock")
            self._end_block(handle)
            self._phase = Phase.ENDED

    @abc.abstractmethod
    def _end_block(self, handle):
        pass

    def commit(self, handle, statuses):
        with self._guard:
            self._expect(Phase.ENDED, handle, "Commit")
            try:
                return self._commit(handle, list(statuses))
            finally:
                self._phase = Phase.IDLE
                self._handle = None

    @abc.abstractmethod
    def _commit(self, handle, statuses):
        """Commit or roll back the block's db-transaction and return the app hash."""

    def check_tx(self, tx_bytes):
        return self._check_tx(tx_bytes)

    @abc.abstractmethod
    def _check_tx(self, tx_bytes):
        pass

    def query(self, sql):
        return self._query(sql)

    @abc.abstractmethod
    def _query(self, sql):
        pass

    def info(self):
        return self._info()

    @abc.abstractmethod
    def _info(self):
        pass

    def close(self):
        pass
