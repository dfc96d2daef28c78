from relchain.ledger.types import BcTransaction

SWEEP_BATCH_SIZES = tuple(2 ** k for k in range(12))  # 1 .. 2048


def batch(statements, batch_size):
    """
    Pack consecutive chunks of batch_size statements into bc-transactions,
    keeping order. The last chunk may be short; its index is the nonce.
    """
    if batch_size < 1:
        raise ValueError(f"batch size must be at least 1, got {batch_size}")
    statements = list(statements)
    return [BcTransaction(tuple(statements[start:start + batch_size]), nonce=index)
            for index, start in enumerate(range(0, len(statements), batch_size))]


def unbatch(txs):
    return [statement for tx in txs for statement in tx.statements]
