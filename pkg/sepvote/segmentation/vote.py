"""Hard (majority) voting over per-block predictions."""

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import IntEnum

from sepvote.errors import ShapeError


class Label(IntEnum):
    """Image class. REAL is the positive class."""

    FAKE = 0
    REAL = 1

    def __str__(self) -> str:
        return self.name

    @classmethod
    def from_prob_real(cls, prob_real: float) -> "Label":
        """Argmax of the (fake, real) pair; an exact 0.5 goes to FAKE."""
        return cls.REAL if prob_real > 0.5 else cls.FAKE


@dataclass(frozen=True)
class Vote:
    label: Label
    prob_real: float

    @property
    def confidence(self) -> float:
        """Probability the voter assigned to the label it voted for."""
        return self.prob_real if self.label is Label.REAL else 1.0 - self.prob_real


@dataclass(frozen=True)
class VoteResult:
    """
    Outcome of a hard vote.

    Attributes:
        label: Winning label.
        per_voter: Every vote, in voter order.
        tally: (real_votes, fake_votes).
        tiebreak_used: True when the vote counts were equal.
    """

    label: Label
    per_voter: tuple[Vote, ...]
    tally: tuple[int, int]
    tiebreak_used: bool

    @property
    def voter_count(self) -> int:
        return len(self.per_voter)

    @property
    def score(self) -> float:
        """Mean P(real) across voters, the score used for ROC analysis."""
        return math.fsum(v.prob_real for v in self.per_voter) / len(self.per_voter)

    def to_dict(self) -> dict:
        return {
            "label": str(self.label),
            "score": self.score,
            "tally": {"real": self.tally[0], "fake": self.tally[1]},
            "tiebreak_used": self.tiebreak_used,
            "per_voter": [
                {"label": str(v.label), "prob_real": v.prob_real} for v in self.per_voter
            ],
        }


def _as_vote(item: Vote | tuple[int, float]) -> Vote:
    if isinstance(item, Vote):
        vote = item
    else:
        label, prob = item
        vote = Vote(Label(int(label)), float(prob))
    if not (0.0 <= vote.prob_real <= 1.0) or math.isnan(vote.prob_real):
        raise ShapeError(f"Voter probability must be in [0, 1], got {vote.prob_real}")
    return vote


def votes_from_probs(probs_real: Iterable[float]) -> list[Vote]:
    """Turn per-head P(real) values into votes by argmax."""
    return [Vote(Label.from_prob_real(float(p)), float(p)) for p in probs_real]


def hard_vote(per_voter: Sequence[Vote | tuple[int, float]]) -> VoteResult:
    """
    Decide the image label by majority over voter labels.

    On an exact tie the side whose voters hold the larger summed confidence in their own label
    wins. If those sums are also equal, FAKE wins.

    Args:
        per_voter: Votes, or `(label, prob_real)` pairs.

    Returns:
        The vote result.

    Raises:
        ValueError: The list is empty or a probability lies outside [0, 1].
    """
    if not per_voter:
        raise ShapeError("hard_vote needs at least one voter")
    votes = tuple(_as_vote(v) for v in per_voter)
    real = sum(1 for v in votes if v.label is Label.REAL)
    fake = len(votes) - real

    if real != fake:
        return VoteResult(Label.REAL if real > fake else Label.FAKE, votes, (real, fake), False)

    real_mass = math.fsum(v.confidence for v in votes if v.label is Label.REAL)
    fake_mass = math.fsum(v.confidence for v in votes if v.label is Label.FAKE)
    label = Label.REAL if real_mass > fake_mass else Label.FAKE
    return VoteResult(label, votes, (real, fake), True)
