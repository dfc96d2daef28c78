"""
The relational backend behind the ABCI: one db-transaction per block,
rolled back as a whole when any statement of the block failed.
"""
import itertools
import logging

from relchain.abci.interface import AbciBackend, AppInfo, CheckResult
from relchain.errors import DecodeError
from relchain.ledger.types import ExecStatus, decode_tx

logger = logging.getLogger(__name__)


class RelationalBackend(AbciBackend):

    def __init__(self, engine):
        super().__init__()
        self.engine = engine
        self._handles = itertools.count(1)
        self._height = 0
        self._last_height = 0

    def _begin_block(self, header):
        self.engine.begin(header.block_time)
        self._height = header.height
        return next(self._handles)

    def _deliver_tx(self, handle, tx_bytes):
        try:
            tx = decode_tx(tx_bytes)
        except DecodeError as e:
            return [ExecStatus.failure(f"malformed transaction: {e}")]
        return [self.engine.execute(statement.text) for statement in tx.statements]

    def _end_block(self, handle):
        pass

    def _commit(self, handle, statuses):
        failed = [s for s in statuses if not s.ok]
        if failed:
            app_hash = self.engine.rollback_block()
            logger.info("block %d rolled back: %d failed statement(s), first: %s",
                        self._height, len(failed), failed[0].reason)
        else:
            app_hash = self.engine.commit_block()
        self._last_height = self._height
        return app_hash

    def _check_tx(self, tx_bytes):
        # SQL is not validated at admission
        try:
            decode_tx(tx_bytes)
        except DecodeError as e:
            return CheckResult(False, f"malformed transaction: {e}")
        return CheckResult(True)

    def _query(self, sql):
        return self.engine.snapshot_query(sql)

    def _info(self):
        return AppInfo(self.engine.state_hash(), self._last_height)
