"""Encoder for the case where the block state reaches the source only after the block.

The source cannot aim a packet at one relay, so it builds keys first.  While
either key queue is empty it sends uniform random packets.  A packet that
lands on an on-off block becomes a key in queue 1, known to relay 1 and the
destination but not to relay 2.  An off-on packet goes to queue 2.  On-on and
off-off packets are thrown away.  Once both queues hold a key, sub-message
``w_i`` goes out as ``w_i ^ k1[m] ^ k2[n]`` using the queue heads.  At the end
of the block the source learns who heard it:

* on-off: relay 1 now knows ``w_i ^ k2[n]``, so ``k2[n]`` is spent;
* off-on: symmetrically ``k1[m]`` is spent;
* on-on: both keys are spent;
* off-off: nobody heard it, so the same ciphertext is sent again next block.

Resending on off-off blocks is not in the pseudocode as printed; without it
``w_i`` would be lost and decoding could not be error-free.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .bitsource import BitSource
from .channel import BlockKind, ChannelState, StateSequence, classify_block
from .codec_zero import (
    BlockRecord,
    DecodeError,
    IncompleteError,
    MessagePayload,
    Transcript,
    join_sub_messages,
)
from .delay import RateSpec

KEYGEN = "keygen"
DATA = "data"
RETRANSMIT = "retransmit"
IDLE = "idle"


@dataclass
class KeyQueue:
    """FIFO of keys; ``next_index`` is the 1-based index of the head key."""

    entries: deque = field(default_factory=deque)
    next_index: int = 1

    def __len__(self):
        return len(self.entries)

    def push(self, key) -> int:
        self.entries.append(key)
        return self.next_index + len(self.entries) - 1

    @property
    def head(self):
        return self.entries[0]

    def pop(self):
        if not self.entries:
            raise AssertionError("pop from an empty key queue")
        self.next_index += 1
        return self.entries.popleft()


@dataclass
class DelayedEncoderState:
    sub_messages: tuple
    N: int
    queue1: KeyQueue = field(default_factory=KeyQueue)
    queue2: KeyQueue = field(default_factory=KeyQueue)
    i: int = 1
    # (payload, i, m, n) of a data block that fell on an off-off block
    pending: Optional[tuple] = None
    last_payload: object = None
    last_phase: Optional[str] = None
    last_label: Optional[tuple] = None

    @property
    def S(self) -> int:
        return len(self.sub_messages)

    @property
    def phase(self) -> str:
        if self.pending is not None:
            return RETRANSMIT
        return DATA if len(self.queue1) and len(self.queue2) else KEYGEN

    @property
    def finished(self) -> bool:
        return self.i > self.S

    @property
    def queue_lengths(self) -> tuple:
        return len(self.queue1), len(self.queue2)


def encoder_step(state: DelayedEncoderState, source: BitSource):
    """Choose the payload for the current block from state known through t-1."""
    if state.finished:
        raise RuntimeError("encoder already delivered every sub-message")
    phase = state.phase
    if phase == RETRANSMIT:
        payload = state.pending[0]
        label = ("data",) + state.pending[1:]
    elif phase == DATA:
        payload = state.sub_messages[state.i - 1] ^ state.queue1.head ^ state.queue2.head
        label = ("data", state.i, state.queue1.next_index, state.queue2.next_index)
    else:
        payload = source.draw(state.N)
        label = None
    state.last_payload = payload
    state.last_phase = phase
    state.last_label = label
    return payload


def end_of_block_update(state: DelayedEncoderState, payload_was_data: bool, revealed_state: ChannelState):
    """Apply the state of the block just sent, learned only now."""
    kind = classify_block(revealed_state)
    if payload_was_data:
        if kind is BlockKind.OFF_OFF:
            if state.pending is None:
                _, i, m, n = state.last_label
                state.pending = (state.last_payload, i, m, n)
            return state
        if kind in (BlockKind.ON_OFF, BlockKind.ON_ON):
            state.queue2.pop()
        if kind in (BlockKind.OFF_ON, BlockKind.ON_ON):
            state.queue1.pop()
        state.i += 1
        state.pending = None
        return state
    if kind is BlockKind.ON_OFF:
        idx = state.queue1.push(state.last_payload)
        state.last_label = ("bank", 1, idx)
    elif kind is BlockKind.OFF_ON:
        idx = state.queue2.push(state.last_payload)
        state.last_label = ("bank", 2, idx)
    else:
        state.last_label = ("discard",)
    return state


@dataclass
class DelayedTranscript(Transcript):
    mode: str = "delayed"
    # block at the end of which the encoder became ready to send w_i
    ready_blocks: list = field(default_factory=list)
    # queue lengths at each ready block
    ready_queue_lengths: list = field(default_factory=list)


def run_encoder_delayed(msg: MessagePayload, seq: StateSequence, source: BitSource) -> DelayedTranscript:
    rate = msg.rate
    state = DelayedEncoderState(sub_messages=tuple(msg.sub_messages), N=rate.N)
    blocks = []
    ready, ready_q = [], []
    delivered = []
    for t, s in enumerate(seq, start=1):
        payload = encoder_step(state, source)
        phase = state.last_phase
        i_before = state.i
        end_of_block_update(state, phase != KEYGEN, s)
        blocks.append(BlockRecord(t, s, payload, state.last_label, phase, state.queue_lengths))
        if state.i > i_before:
            delivered.append(t)
        if state.finished:
            break
        if state.pending is None and len(ready) < state.i and all(state.queue_lengths):
            ready.append(t)
            ready_q.append(state.queue_lengths)
    transcript = DelayedTranscript(
        rate, seq, blocks, None, "delayed", delivered,
        ready_blocks=ready, ready_queue_lengths=ready_q,
    )
    if not state.finished:
        raise IncompleteError(
            f"horizon {seq.horizon} ended before all {rate.S} sub-messages were delivered",
            {"i": state.i, "queue1": len(state.queue1), "queue2": len(state.queue2)},
            transcript,
        )
    transcript.completion_block = blocks[-1].t
    return transcript


def decode_delayed(y_blocks: Sequence, seq: StateSequence, rate: RateSpec):
    """Replay the queue evolution at the destination and strip both pads.

    Every banked key went out on an on-block, so the destination has it.
    """
    S = rate.S
    q1, q2 = deque(), deque()
    subs = []
    for t, y in enumerate(y_blocks, start=1):
        if len(subs) == S:
            break
        if t > seq.horizon:
            raise DecodeError(f"received block {t} beyond horizon {seq.horizon}")
        kind = seq.kind(t)
        if kind is BlockKind.OFF_OFF:
            if y is not None:
                raise DecodeError(f"block {t} is off-off but a payload was received")
            # a lost data block leaves the queues alone; its resend uses the same heads
            continue
        if y is None:
            raise DecodeError(f"block {t} is an on-block but nothing was received")
        if q1 and q2:
            subs.append(y ^ q1[0] ^ q2[0])
            if kind in (BlockKind.ON_OFF, BlockKind.ON_ON):
                q2.popleft()
            if kind in (BlockKind.OFF_ON, BlockKind.ON_ON):
                q1.popleft()
        elif kind is BlockKind.ON_OFF:
            q1.append(y)
        elif kind is BlockKind.OFF_ON:
            q2.append(y)
    if len(subs) < S:
        raise DecodeError(f"only {len(subs)} of {S} sub-messages received")
    return join_sub_messages(subs, rate)
