"""
Consensus data types: validator set, proposals, votes, timeouts and the
per-round vote tallies.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Dict, Optional, Tuple

from relchain.ledger.types import Block

logger = logging.getLogger(__name__)

NIL = None


class VoteKind(IntEnum):
    PREVOTE = 1
    PRECOMMIT = 2


class Step(str, Enum):
    NEW_HEIGHT = "new_height"
    PROPOSE = "propose"
    PREVOTE = "prevote"
    PRECOMMIT = "precommit"
    COMMIT_WAIT = "commit_wait"


@dataclass(frozen=True)
class ValidatorSet:
    """Equal voting power, static membership."""
    ids: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        if not self.ids:
            raise ValueError("a validator set needs at least one validator")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate validator ids")

    @classmethod
    def of_size(cls, n):
        return cls(tuple(range(n)))

    @property
    def n(self):
        return len(self.ids)

    @property
    def quorum(self):
        """Smallest integer strictly greater than 2n/3."""
        return 2 * self.n // 3 + 1

    @property
    def max_faulty(self):
        return (self.n - 1) // 3

    def __contains__(self, validator_id):
        return validator_id in self.ids


def proposer_for(height, round_, vset):
    return vset.ids[(height + round_) % vset.n]


@dataclass(frozen=True)
class Proposal:
    height: int
    round: int
    block: Block
    proposer_id: int
    valid_round: int = -1


@dataclass(frozen=True)
class Vote:
    kind: VoteKind
    height: int
    round: int
    block_id: Optional[bytes]
    voter_id: int


@dataclass(frozen=True)
class Timeout:
    step: Step
    height: int
    round: int


@dataclass
class ConsensusState:
    height: int = 1
    round: int = 0
    step: Step = Step.NEW_HEIGHT
    locked_block: Optional[Block] = None
    locked_round: int = -1
    valid_block: Optional[Block] = None
    valid_round: int = -1


@dataclass
class VoteSet:
    """First vote per voter counts; a differing second vote is kept as equivocation evidence."""
    vset: ValidatorSet
    votes: Dict[int, Vote] = field(default_factory=dict)
    counts: Dict[Optional[bytes], int] = field(default_factory=dict)
    equivocations: list = field(default_factory=list)

    def add(self, vote):
        if vote.voter_id not in self.vset:
            logger.warning("vote from unknown validator %s dropped", vote.voter_id)
            return False
        existing = self.votes.get(vote.voter_id)
        if existing is not None:
            if existing.block_id != vote.block_id:
                self.equivocations.append((existing, vote))
                logger.warning("equivocation by validator %d at h=%d r=%d %s",
                               vote.voter_id, vote.height, vote.round, vote.kind.name.lower())
            return False
        self.votes[vote.voter_id] = vote
        self.counts[vote.block_id] = self.counts.get(vote.block_id, 0) + 1
        return True

    @property
    def total(self):
        return len(self.votes)

    def count(self, block_id):
        return self.counts.get(block_id, 0)

    def quorum_block(self):
        """Non-nil block id backed by a quorum, if any."""
        for block_id, count in self.counts.items():
            if block_id is not None and count >= self.vset.quorum:
                return block_id
        return None

    def votes_for(self, block_id):
        return tuple(v for _, v in sorted(self.votes.items()) if v.block_id == block_id)
