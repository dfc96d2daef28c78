from relchain.consensus.polka import Broadcast, ConsensusEngine, Decide, RequestSync, ScheduleTimeout, SendTo
from relchain.consensus.types import (NIL, ConsensusState, Proposal, Step, Timeout, ValidatorSet, Vote, VoteKind,
                                      VoteSet, proposer_for)
