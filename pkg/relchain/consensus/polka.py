"""
Tendermint-style consensus for one node: propose, prevote, precommit with
locking, valid-value re-proposal and round skipping.

The engine never touches the network or the clock. Every entry point
returns a list of effects for the node to carry out. Votes of this node are
counted locally as well as broadcast, so a one-validator network decides
without sending anything.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from relchain.consensus.messages import BlockRequest, BlockResponse
from relchain.consensus.types import (ConsensusState, Proposal, Step, Timeout, Vote, VoteKind, VoteSet,
                                      proposer_for)
from relchain.ledger.types import Block

logger = logging.getLogger(__name__)
trace_logger = logging.getLogger("relchain.consensus.trace")


@dataclass(frozen=True)
class Broadcast:
    msg: object


@dataclass(frozen=True)
class SendTo:
    peer: int
    msg: object


@dataclass(frozen=True)
class ScheduleTimeout:
    timeout: Timeout
    delay_ms: float


@dataclass(frozen=True)
class RequestSync:
    """This node saw traffic for a later height from peer and should catch up."""
    peer: int
    height: int


@dataclass(frozen=True)
class Decide:
    block: Block
    round: int
    commit: Tuple[Vote, ...]


class ConsensusEngine:
    """
    :param node_id: this validator
    :param vset: ValidatorSet
    :param timeouts: TimeoutConfig
    :param app: provides build_block(height, round), validate_block(block) and has_txs()
    :param create_empty_blocks: when False round 0 only starts once txs (or peer traffic) exist
    """

    def __init__(self, node_id, vset, timeouts, app, create_empty_blocks=False, trace=False):
        self.node_id = node_id
        self.vset = vset
        self.timeouts = timeouts
        self.app = app
        self.create_empty_blocks = create_empty_blocks
        self.trace = trace
        self.state = ConsensusState(height=0)
        self._future = {}
        self._sync_asked = set()
        self._reset(0)

    # state helpers

    @property
    def height(self):
        return self.state.height

    @property
    def round(self):
        return self.state.round

    @property
    def step(self):
        return self.state.step

    @property
    def waiting_for_txs(self):
        return self._waiting

    @property
    def equivocations(self):
        return [e for vs in self._votes.values() for e in vs.equivocations]

    def _reset(self, height):
        self.state = ConsensusState(height=height)
        self._proposals = {}
        self._blocks = {}
        self._votes = {}
        self._fired = set()
        self._valid = {}
        self._decided = False
        self._waiting = False

    def _trace(self, event):
        if self.trace:
            trace_logger.info("node=%d h=%d r=%d step=%s event=%s", self.node_id, self.state.height,
                              self.state.round, self.state.step.value, event)

    def _voteset(self, round_, kind):
        key = (round_, kind)
        if key not in self._votes:
            self._votes[key] = VoteSet(self.vset)
        return self._votes[key]

    def _is_valid(self, block):
        block_id = block.block_id
        if block_id not in self._valid:
            self._valid[block_id] = bool(self.app.validate_block(block))
            if not self._valid[block_id]:
                logger.warning("node %d: invalid block %s at height %d", self.node_id, block_id.hex()[:12],
                               block.header.height)
        return self._valid[block_id]

    def _once(self, key):
        if key in self._fired:
            return False
        self._fired.add(key)
        return True

    # entry points

    def start_height(self, height):
        """Enter height with a fresh round 0 and replay messages buffered for it."""
        self._reset(height)
        self._trace("new_height")
        effects = self._start_round(0)
        for msg, sender in self._future.pop(height, []):
            effects += self._handle(msg, sender)
        for stale in [h for h in self._future if h < height]:
            del self._future[stale]
        return effects + self._evaluate()

    def on_txs_available(self):
        if not self._waiting:
            return []
        return self._start_round(0, force=True) + self._evaluate()

    def on_message(self, msg, sender):
        """Handle a Proposal, Vote or BlockResponse from sender."""
        height = msg.block.header.height if isinstance(msg, BlockResponse) else msg.height
        if height > self.state.height:
            self._future.setdefault(height, []).append((msg, sender))
            # a decided node in its commit wait simply expects the next height
            behind = height > self.state.height + 1 or not self._decided
            if behind and self._once_sync(self.state.height, sender):
                return [RequestSync(sender, self.state.height)]
            return []
        if height < self.state.height or self._decided:
            return []
        return self._handle(msg, sender) + self._evaluate()

    def on_timeout(self, timeout):
        state = self.state
        if timeout.height != state.height or timeout.round != state.round or self._decided:
            return []
        self._trace(f"timeout_{timeout.step.value}")
        if timeout.step == Step.PROPOSE and state.step == Step.PROPOSE:
            state.step = Step.PREVOTE
            return self._vote(VoteKind.PREVOTE, None) + self._evaluate()
        if timeout.step == Step.PREVOTE and state.step == Step.PREVOTE:
            state.step = Step.PRECOMMIT
            return self._vote(VoteKind.PRECOMMIT, None) + self._evaluate()
        if timeout.step == Step.PRECOMMIT:
            return self._start_round(state.round + 1) + self._evaluate()
        return []

    def mark_decided(self):
        """The node committed this height through block sync."""
        self._decided = True
        self.state.step = Step.COMMIT_WAIT

    def restart_round(self):
        """Re-arm the current round after the node was down."""
        if self._decided or self._waiting or self.state.height == 0:
            return []
        return self._start_round(self.state.round, force=True) + self._evaluate()

    def _once_sync(self, height, peer):
        key = (height, peer)
        if key in self._sync_asked:
            return False
        self._sync_asked.add(key)
        return True

    def make_proposal(self, round_):
        """Proposal for ``round_`` when this node is its proposer, else None.

        A held valid block is proposed again with its valid round. Otherwise
        the application builds a fresh block, which may be None when there is
        nothing to propose.
        """
        state = self.state
        if proposer_for(state.height, round_, self.vset) != self.node_id:
            return None
        if state.valid_block is not None:
            block, valid_round = state.valid_block, state.valid_round
        else:
            block, valid_round = self.app.build_block(state.height, round_), -1
        if block is None:
            return None
        return Proposal(state.height, round_, block, self.node_id, valid_round)

    # transitions

    def _start_round(self, round_, force=False):
        state = self.state
        state.round = round_
        state.step = Step.PROPOSE
        if round_ == 0 and not force and not self.create_empty_blocks and not self.app.has_txs():
            state.step = Step.NEW_HEIGHT
            self._waiting = True
            self._trace("wait_for_txs")
            return []
        self._waiting = False
        self._trace("new_round")
        effects = []
        proposal = self.make_proposal(round_)
        if proposal is not None:
            self._trace(f"propose {proposal.block.block_id.hex()[:12]} txs={len(proposal.block.txs)}")
            self._handle(proposal, self.node_id)
            effects.append(Broadcast(proposal))
        effects.append(ScheduleTimeout(Timeout(Step.PROPOSE, state.height, round_),
                                       self.timeouts.propose_timeout(round_)))
        return effects

    def _vote(self, kind, block_id):
        state = self.state
        vote = Vote(kind, state.height, state.round, block_id, self.node_id)
        self._voteset(state.round, kind).add(vote)
        self._trace(f"{kind.name.lower()} {block_id.hex()[:12] if block_id else 'nil'}")
        return [Broadcast(vote)]

    def _handle(self, msg, sender):
        """Record a message for the current height. Returns effects only when waiting for txs ends."""
        effects = []
        if self._waiting:
            effects = self._start_round(0, force=True)
        if isinstance(msg, Proposal):
            if msg.proposer_id != proposer_for(msg.height, msg.round, self.vset) or msg.proposer_id != sender:
                logger.warning("node %d: proposal for h=%d r=%d from non-proposer %d dropped",
                               self.node_id, msg.height, msg.round, sender)
                return effects
            existing = self._proposals.get(msg.round)
            if existing is not None:
                if existing.block.block_id != msg.block.block_id:
                    logger.warning("node %d: conflicting proposals from %d at h=%d r=%d", self.node_id,
                                   sender, msg.height, msg.round)
                return effects
            if msg.block.header.height != msg.height:
                return effects
            self._proposals[msg.round] = msg
            self._blocks[msg.block.block_id] = msg.block
        elif isinstance(msg, Vote):
            if msg.voter_id != sender:
                return effects
            self._voteset(msg.round, msg.kind).add(msg)
        elif isinstance(msg, BlockResponse):
            if ("block_request", msg.block.block_id) in self._fired:
                self._blocks[msg.block.block_id] = msg.block
        return effects

    def _evaluate(self):
        """Apply transition rules until none fires."""
        effects = []
        while not self._decided:
            fired = self._apply_one_rule()
            if fired is None:
                break
            effects += fired
        return effects

    def _apply_one_rule(self):
        state = self.state
        r = state.round

        # decision in any round
        for (round_, kind), votes in sorted(self._votes.items()):
            if kind != VoteKind.PRECOMMIT:
                continue
            block_id = votes.quorum_block()
            if block_id is None:
                continue
            block = self._blocks.get(block_id)
            if block is None:
                if self._once(("block_request", block_id)):
                    voters = [v.voter_id for v in votes.votes_for(block_id) if v.voter_id != self.node_id]
                    self._trace(f"request_block {block_id.hex()[:12]}")
                    return [SendTo(peer, BlockRequest(state.height, round_, block_id)) for peer in voters]
                continue
            if not self._is_valid(block):
                continue
            self._decided = True
            state.step = Step.COMMIT_WAIT
            self._trace(f"decide {block_id.hex()[:12]} round={round_}")
            return [Decide(block, round_, votes.votes_for(block_id))]

        # f+1 validators already in a later round
        later = {}
        for (round_, _), votes in self._votes.items():
            if round_ > r:
                later.setdefault(round_, set()).update(votes.votes)
        for round_, proposal in self._proposals.items():
            if round_ > r:
                later.setdefault(round_, set()).add(proposal.proposer_id)
        for round_ in sorted(later):
            if len(later[round_]) >= self.vset.max_faulty + 1:
                self._trace(f"skip_to_round {round_}")
                return self._start_round(round_, force=True)

        if self._waiting:
            return None

        proposal = self._proposals.get(r)
        prevotes = self._voteset(r, VoteKind.PREVOTE)

        if state.step == Step.PROPOSE and proposal is not None:
            block = proposal.block
            block_id = block.block_id
            locked_id = state.locked_block.block_id if state.locked_block is not None else None
            if proposal.valid_round == -1:
                acceptable = self._is_valid(block) and (state.locked_round == -1 or locked_id == block_id)
                state.step = Step.PREVOTE
                return self._vote(VoteKind.PREVOTE, block_id if acceptable else None)
            vr = proposal.valid_round
            if 0 <= vr < r and self._voteset(vr, VoteKind.PREVOTE).count(block_id) >= self.vset.quorum:
                acceptable = self._is_valid(block) and (state.locked_round <= vr or locked_id == block_id)
                state.step = Step.PREVOTE
                return self._vote(VoteKind.PREVOTE, block_id if acceptable else None)

        if state.step in (Step.PREVOTE, Step.PRECOMMIT) and proposal is not None:
            block = proposal.block
            if prevotes.count(block.block_id) >= self.vset.quorum and self._is_valid(block) \
                    and self._once(("polka", r)):
                self._trace(f"polka {block.block_id.hex()[:12]}")
                effects = []
                if state.step == Step.PREVOTE:
                    state.locked_block, state.locked_round = block, r
                    state.step = Step.PRECOMMIT
                    effects = self._vote(VoteKind.PRECOMMIT, block.block_id)
                state.valid_block, state.valid_round = block, r
                return effects

        if state.step == Step.PREVOTE:
            if prevotes.total >= self.vset.quorum and self._once(("prevote_timeout", r)):
                return [ScheduleTimeout(Timeout(Step.PREVOTE, state.height, r), self.timeouts.prevote_timeout(r))]
            if prevotes.count(None) >= self.vset.quorum:
                state.step = Step.PRECOMMIT
                return self._vote(VoteKind.PRECOMMIT, None)

        if self._voteset(r, VoteKind.PRECOMMIT).total >= self.vset.quorum and self._once(("precommit_timeout", r)):
            return [ScheduleTimeout(Timeout(Step.PRECOMMIT, state.height, r), self.timeouts.precommit_timeout(r))]

        return None

    def block_for(self, block_id) -> Optional[Block]:
        """A block of the current height this node has seen."""
        return self._blocks.get(block_id)
