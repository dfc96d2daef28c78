from relchain.config import TimeoutConfig
from relchain.consensus import (Broadcast, ConsensusEngine, Decide, ScheduleTimeout, Step, Timeout, ValidatorSet,
                                Vote, VoteKind, VoteSet, proposer_for)
from relchain.consensus.byzantine import CONFLICTING_VOTES, EQUIVOCATE_PROPOSAL, SILENT, outbound
from relchain.consensus.messages import decode_message, encode_message, message_kind
from relchain.consensus.types import Proposal
from relchain.ledger import ZERO_HASH, BcTransaction, Block, BlockHeader, WlStatement


class FakeApp:
    def __init__(self, txs=True, valid=True):
        self.txs = txs
        self.valid = valid

    def has_txs(self):
        return self.txs

    def build_block(self, height, round_):
        tx = BcTransaction((WlStatement(f"UPDATE t SET a = {round_}", "test", height),))
        return Block(BlockHeader(height, ZERO_HASH, ZERO_HASH, proposer_for(height, round_, ValidatorSet.of_size(4)),
                                 1000 * height, 1), (tx,))

    def validate_block(self, block):
        return self.valid


def effects_of(effects, kind):
    return [e for e in effects if isinstance(e, kind)]


def test_quorum_sizes():
    assert [ValidatorSet.of_size(n).quorum for n in (1, 2, 3, 4, 7, 10)] == [1, 2, 3, 3, 5, 7]
    assert [ValidatorSet.of_size(n).max_faulty for n in (1, 4, 7)] == [0, 1, 2]


def test_proposer_rotates_with_height_and_round():
    vset = ValidatorSet.of_size(4)
    assert [proposer_for(1, r, vset) for r in range(4)] == [1, 2, 3, 0]
    assert proposer_for(2, 0, vset) == 2


def test_voteset_keeps_first_vote_and_equivocation_evidence():
    votes = VoteSet(ValidatorSet.of_size(4))
    assert votes.add(Vote(VoteKind.PREVOTE, 1, 0, b"a" * 32, 1))
    assert not votes.add(Vote(VoteKind.PREVOTE, 1, 0, b"b" * 32, 1))
    assert not votes.add(Vote(VoteKind.PREVOTE, 1, 0, b"a" * 32, 9))
    assert votes.count(b"a" * 32) == 1
    assert len(votes.equivocations) == 1


def test_single_validator_decides_alone():
    engine = ConsensusEngine(0, ValidatorSet.of_size(1), TimeoutConfig(), FakeApp())
    effects = engine.start_height(1)
    (decide,) = effects_of(effects, Decide)
    assert decide.block.header.height == 1
    assert [v.kind for v in decide.commit] == [VoteKind.PRECOMMIT]
    assert engine.step == Step.COMMIT_WAIT


def test_waits_for_txs_before_round_zero():
    app = FakeApp(txs=False)
    engine = ConsensusEngine(0, ValidatorSet.of_size(1), TimeoutConfig(), app)
    assert engine.start_height(1) == []
    assert engine.waiting_for_txs
    app.txs = True
    assert effects_of(engine.on_txs_available(), Decide)


def test_four_validators_follow_the_vote_rules():
    vset = ValidatorSet.of_size(4)
    app = FakeApp()
    # node 1 proposes height 1, round 0
    proposer = ConsensusEngine(1, vset, TimeoutConfig(), app)
    effects = proposer.start_height(1)
    (proposal,) = [e.msg for e in effects_of(effects, Broadcast) if isinstance(e.msg, Proposal)]
    block_id = proposal.block.block_id
    prevotes = [e.msg for e in effects_of(effects, Broadcast) if isinstance(e.msg, Vote)]
    assert prevotes == [Vote(VoteKind.PREVOTE, 1, 0, block_id, 1)]

    node = ConsensusEngine(0, vset, TimeoutConfig(), app)
    node.start_height(1)
    effects = node.on_message(proposal, 1)
    assert [e.msg for e in effects_of(effects, Broadcast)] == [Vote(VoteKind.PREVOTE, 1, 0, block_id, 0)]

    node.on_message(prevotes[0], 1)
    effects = node.on_message(Vote(VoteKind.PREVOTE, 1, 0, block_id, 2), 2)
    assert Broadcast(Vote(VoteKind.PRECOMMIT, 1, 0, block_id, 0)) in effects
    assert node.state.locked_round == 0

    node.on_message(Vote(VoteKind.PRECOMMIT, 1, 0, block_id, 1), 1)
    effects = node.on_message(Vote(VoteKind.PRECOMMIT, 1, 0, block_id, 3), 3)
    (decide,) = effects_of(effects, Decide)
    assert decide.block == proposal.block
    assert sorted(v.voter_id for v in decide.commit) == [0, 1, 3]


def test_invalid_proposal_gets_a_nil_prevote():
    vset = ValidatorSet.of_size(4)
    proposal_block = FakeApp().build_block(1, 0)
    node = ConsensusEngine(0, vset, TimeoutConfig(), FakeApp(valid=False))
    node.start_height(1)
    effects = node.on_message(Proposal(1, 0, proposal_block, 1), 1)
    assert [e.msg for e in effects_of(effects, Broadcast)] == [Vote(VoteKind.PREVOTE, 1, 0, None, 0)]


def test_proposal_from_the_wrong_proposer_is_ignored():
    node = ConsensusEngine(0, ValidatorSet.of_size(4), TimeoutConfig(), FakeApp())
    node.start_height(1)
    assert node.on_message(Proposal(1, 0, FakeApp().build_block(1, 0), 2), 2) == []


def test_make_proposal():
    vset = ValidatorSet.of_size(4)
    node = ConsensusEngine(2, vset, TimeoutConfig(), FakeApp())
    node.start_height(1)
    assert node.make_proposal(0) is None
    proposal = node.make_proposal(1)
    assert (proposal.height, proposal.round, proposal.proposer_id, proposal.valid_round) == (1, 1, 2, -1)

    empty = FakeApp()
    empty.build_block = lambda height, round_: None
    node = ConsensusEngine(2, vset, TimeoutConfig(), empty)
    node.start_height(1)
    assert node.make_proposal(1) is None


def test_timeouts_move_to_the_next_round():
    node = ConsensusEngine(0, ValidatorSet.of_size(4), TimeoutConfig(), FakeApp())
    effects = node.start_height(1)
    (timeout,) = effects_of(effects, ScheduleTimeout)
    assert timeout.delay_ms == TimeoutConfig().propose
    effects = node.on_timeout(timeout.timeout)
    assert [e.msg for e in effects_of(effects, Broadcast)] == [Vote(VoteKind.PREVOTE, 1, 0, None, 0)]
    # a stale timeout does nothing
    assert node.on_timeout(Timeout(Step.PROPOSE, 1, 5)) == []
    for voter in (1, 2):
        effects = node.on_message(Vote(VoteKind.PREVOTE, 1, 0, None, voter), voter)
    assert Broadcast(Vote(VoteKind.PRECOMMIT, 1, 0, None, 0)) in effects
    for voter in (1, 2):
        effects = node.on_message(Vote(VoteKind.PRECOMMIT, 1, 0, None, voter), voter)
    (precommit_timeout,) = effects_of(effects, ScheduleTimeout)
    effects = node.on_timeout(precommit_timeout.timeout)
    assert node.round == 1
    # node 2 proposes round 1
    assert not effects_of(effects, Broadcast)
    assert effects_of(effects, ScheduleTimeout)[0].delay_ms == TimeoutConfig().propose_timeout(1)


def test_skips_to_a_round_seen_from_f_plus_one_validators():
    node = ConsensusEngine(0, ValidatorSet.of_size(4), TimeoutConfig(), FakeApp())
    node.start_height(1)
    node.on_message(Vote(VoteKind.PREVOTE, 1, 3, None, 1), 1)
    assert node.round == 0
    node.on_message(Vote(VoteKind.PREVOTE, 1, 3, None, 2), 2)
    assert node.round == 3


def test_future_heights_are_buffered():
    node = ConsensusEngine(0, ValidatorSet.of_size(4), TimeoutConfig(), FakeApp())
    node.start_height(1)
    later = Vote(VoteKind.PREVOTE, 5, 0, None, 1)
    (sync,) = node.on_message(later, 1)
    assert (sync.peer, sync.height) == (1, 1)
    # asked once per (height, peer)
    assert node.on_message(Vote(VoteKind.PREVOTE, 5, 0, None, 1), 1) == []


def test_byzantine_rewrites():
    block = FakeApp().build_block(1, 0)
    proposal = Proposal(1, 0, block, 1)
    peers = (0, 2, 3)
    assert outbound(SILENT, proposal, 0, peers) is None
    assert outbound(EQUIVOCATE_PROPOSAL, proposal, 0, peers) == proposal
    twin = outbound(EQUIVOCATE_PROPOSAL, proposal, 3, peers)
    assert twin.block.block_id != block.block_id
    vote = Vote(VoteKind.PRECOMMIT, 1, 0, block.block_id, 1)
    assert outbound(CONFLICTING_VOTES, vote, 3, peers).block_id is None
    assert outbound(CONFLICTING_VOTES, Vote(VoteKind.PREVOTE, 1, 0, None, 1), 2, peers).block_id is not None


def test_message_encoding():
    block = FakeApp().build_block(1, 0)
    for msg in (Proposal(1, 2, block, 3, valid_round=1), Vote(VoteKind.PREVOTE, 1, 0, None, 2),
                Vote(VoteKind.PRECOMMIT, 7, 1, block.block_id, 0)):
        assert decode_message(message_kind(msg), encode_message(msg)) == msg
