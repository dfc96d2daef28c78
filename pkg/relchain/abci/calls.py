"""
Lifecycle entry points used by the node. Transport failures of any backend
variant surface as BackendUnavailable.
"""
import functools

from relchain.errors import BackendUnavailable


def _transport_errors(fn):
    @functools.wraps(fn)
    def wrapper(backend, *args):
        try:
            return fn(backend, *args)
        except OSError as e:
            raise BackendUnavailable(f"{fn.__name__}: {e}") from e
    return wrapper


@_transport_errors
def call_begin_block(backend, header):
    return backend.begin_block(header)


@_transport_errors
def call_deliver_tx(backend, handle, tx):
    return backend.deliver_tx(handle, tx.encoded)


@_transport_errors
def call_end_block(backend, handle):
    backend.end_block(handle)


@_transport_errors
def call_commit(backend, handle, statuses):
    return backend.commit(handle, statuses)
