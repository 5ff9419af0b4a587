"""Closed-form optimal delays.

With the channel state known at the start of each block (or the whole
sequence known in advance) the optimum is the first block ``d`` by which at
least ``S`` on-off and ``S`` off-on blocks have occurred, ``S`` being the
number of sub-messages.  With state learned only at the end of each block the
optimum lies between that value and the first on-block strictly after it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .channel import BlockKind, StateSequence, count_kind


@dataclass(frozen=True)
class RateSpec:
    """Message of ``L`` bits sent in blocks of ``N`` channel uses.

    The secrecy rate is ``L / N``; ``S = ceil(L / N)`` sub-messages are needed.
    """

    N: int
    L: int

    def __post_init__(self):
        if self.N < 1 or self.L < 1:
            raise ValueError(f"N and L must be positive, got N={self.N}, L={self.L}")

    @property
    def S(self) -> int:
        return -(-self.L // self.N)

    @property
    def pad_bits(self) -> int:
        return self.S * self.N - self.L


@dataclass(frozen=True)
class DelayResult:
    """Either a feasible block index ``d`` or infeasibility within the horizon.

    When infeasible, ``counts_at_horizon`` holds the (on-off, off-on) counts
    over the whole sequence, which tells how far short it fell.
    """

    d: Optional[int] = None
    counts_at_horizon: Optional[Tuple[int, int]] = None

    @classmethod
    def at(cls, d: int) -> "DelayResult":
        return cls(d=d)

    @classmethod
    def infeasible(cls, counts: Tuple[int, int] = None) -> "DelayResult":
        return cls(d=None, counts_at_horizon=counts)

    @property
    def feasible(self) -> bool:
        return self.d is not None

    def __str__(self):
        return str(self.d) if self.feasible else "infeasible"


def _onoff_offon(seq: StateSequence, d: int) -> Tuple[int, int]:
    return count_kind(seq, d, BlockKind.ON_OFF), count_kind(seq, d, BlockKind.OFF_ON)


def optimal_delay_zero(rate: RateSpec, seq: StateSequence) -> DelayResult:
    """Optimal delay with genie-aided or zero-block-delayed state information."""
    S = rate.S
    # the S-th on-off and S-th off-on block; the later of the two is the answer
    nth = {BlockKind.ON_OFF: None, BlockKind.OFF_ON: None}
    seen = {BlockKind.ON_OFF: 0, BlockKind.OFF_ON: 0}
    for t, kind in enumerate(seq.kinds(), start=1):
        if kind in seen:
            seen[kind] += 1
            if seen[kind] == S:
                nth[kind] = t
    if None in nth.values():
        return DelayResult.infeasible(_onoff_offon(seq, seq.horizon))
    return DelayResult.at(max(nth.values()))


def one_block_upper(d_star, seq: StateSequence) -> DelayResult:
    """First on-block strictly after ``d_star``."""
    if isinstance(d_star, DelayResult):
        if not d_star.feasible:
            return DelayResult.infeasible(d_star.counts_at_horizon)
        d_star = d_star.d
    for d in range(d_star + 1, seq.horizon + 1):
        if seq.state(d).is_on:
            return DelayResult.at(d)
    return DelayResult.infeasible(_onoff_offon(seq, seq.horizon))


def one_block_bounds(rate: RateSpec, seq: StateSequence) -> Tuple[DelayResult, DelayResult]:
    """Lower and upper bound on the optimal delay with one-block-delayed state."""
    lower = optimal_delay_zero(rate, seq)
    if not lower.feasible:
        return lower, DelayResult.infeasible(lower.counts_at_horizon)
    return lower, one_block_upper(lower.d, seq)
