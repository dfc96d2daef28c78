import io

import pytest

from relchain.abci import call_begin_block, call_commit, call_deliver_tx, call_end_block, connect_abci, serve_abci
from relchain.abci.wire import MAX_FRAME, Opcode, encode_frame, read_frame
from relchain.errors import BackendUnavailable, ContractViolation, DecodeError, NotReadOnly
from relchain.ledger import ZERO_HASH, BcTransaction, BlockHeader, WlStatement
from relchain.relational import Database, Engine, parse_schema
from relchain.relational.backend import RelationalBackend

SCHEMA = "table kv\n  k int64 pk\n  v decimal\n"

BLOCKS = [
    ["UPDATE kv SET v = v + 1.5 WHERE k = 1", "UPDATE kv SET v = v - 2 WHERE k = 2; UPDATE kv SET v = v + 2 WHERE k = 3"],
    ["INSERT INTO kv VALUES (9, 0)", "UPDATE kv SET missing = 1"],
    ["INSERT INTO kv VALUES (9, 4.25)", "SELECT * FROM kv WHERE k = 9"],
]


def make_backend():
    db = Database(parse_schema(SCHEMA))
    db.load_rows("kv", [(k, 1000) for k in range(1, 6)])
    return RelationalBackend(Engine(db))


def run_blocks(backend):
    """Drive BLOCKS through backend; returns the statuses and app hash of every height."""
    out = []
    for height, texts in enumerate(BLOCKS, start=1):
        header = BlockHeader(height, ZERO_HASH, ZERO_HASH, 0, 100 * height, len(texts))
        handle = call_begin_block(backend, header)
        statuses = []
        for index, text in enumerate(texts):
            tx = BcTransaction((WlStatement(text, "test", index),), nonce=height)
            statuses.extend(call_deliver_tx(backend, handle, tx))
        call_end_block(backend, handle)
        out.append((statuses, call_commit(backend, handle, statuses)))
    return out


@pytest.fixture
def socket_backend():
    server = serve_abci(make_backend())
    backend = connect_abci(server.address)
    yield backend
    backend.close()
    server.close()


def test_socket_backend_matches_builtin(socket_backend):
    builtin = run_blocks(make_backend())
    remote = run_blocks(socket_backend)
    assert remote == builtin
    assert [all(s.ok for s in statuses) for statuses, _ in remote] == [True, False, True]
    # the failed block left the state untouched
    assert remote[1][1] == remote[0][1]
    info = socket_backend.info()
    assert info.app_hash == remote[-1][1]
    assert info.last_height == 3


def test_socket_query_and_check_tx(socket_backend):
    run_blocks(socket_backend)
    result = socket_backend.query("SELECT v FROM kv WHERE k = 9")
    assert result.rows == ((425,),)
    assert socket_backend.check_tx(BcTransaction((WlStatement("x", "c", 0),)).encoded).ok
    assert not socket_backend.check_tx(b"junk").ok


def test_remote_errors_keep_their_kind(socket_backend):
    with pytest.raises(NotReadOnly):
        socket_backend.query("UPDATE kv SET v = 0 WHERE k = 1")
    # bypass the local lifecycle check so the server has to refuse
    with pytest.raises(ContractViolation):
        socket_backend._end_block(7)


def test_one_connection_carries_lifecycle_and_queries():
    server = serve_abci(make_backend())
    backend = connect_abci(server.address)
    try:
        header = BlockHeader(1, ZERO_HASH, ZERO_HASH, 0, 100, 1)
        handle = call_begin_block(backend, header)
        statuses = call_deliver_tx(backend, handle, BcTransaction((WlStatement("UPDATE kv SET v = v + 1 WHERE k = 1",
                                                                              "test", 0),)))
        # answered between the block's frames, from the committed state
        assert backend.query("SELECT v FROM kv WHERE k = 1").rows == ((1000,),)
        call_end_block(backend, handle)
        call_commit(backend, handle, statuses)
        assert backend.query("SELECT v FROM kv WHERE k = 1").rows == ((1100,),)
        assert backend.info().last_height == 1
        assert server.connections == 1
    finally:
        backend.close()
        server.close()


def test_unreachable_server():
    server = serve_abci(make_backend())
    address = server.address
    server.close()
    with pytest.raises(BackendUnavailable):
        connect_abci(address, timeout=1.0)


def test_frame_layout():
    frame = encode_frame(Opcode.QUERY, b"abc")
    assert frame == b"\x00\x00\x00\x04\x06abc"
    assert read_frame(io.BytesIO(frame)) == (Opcode.QUERY, b"abc")
    assert read_frame(io.BytesIO(b"")) is None
    with pytest.raises(DecodeError):
        read_frame(io.BytesIO(frame[:-1]))
    with pytest.raises(DecodeError):
        read_frame(io.BytesIO((MAX_FRAME + 1).to_bytes(4, "big") + b"\x06"))
