"""One-time-pad encoder for the case where the source knows the current block state.

The message is cut into ``S`` sub-messages of ``N`` bits.  Sub-message ``i``
is sent as ``w_i xor k_i`` on the ``i``-th on-off block (heard by relay 1
only) and its key ``k_i`` on the ``i``-th off-on block (heard by relay 2
only).  The source stays silent on on-on and off-off blocks.  Each relay sees
exactly one half of every pair, the destination sees both.

Payloads are ``N``-bit integers.  Numpy integer arrays work in their place,
evaluating many realizations at once; the secrecy oracle relies on that.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from .bitsource import BitSource
from .channel import BlockKind, ChannelState, StateSequence, classify_block, observe
from .delay import RateSpec


class DecodeError(ValueError):
    """The received blocks do not match the schedule replayed from the states."""


class IncompleteError(RuntimeError):
    """The horizon ended before every sub-message got through.

    ``transcript`` holds the blocks that were sent, ``progress`` the encoder
    counters at the end of the horizon.
    """

    def __init__(self, message, progress: dict, transcript=None):
        super().__init__(f"{message} (progress: {progress})")
        self.progress = progress
        self.transcript = transcript


def pack_bits(bits: Union[str, Sequence[int]]) -> int:
    """``"1011"`` or ``[1, 0, 1, 1]`` to the integer whose binary form it is."""
    value = 0
    for b in bits:
        b = int(b)
        if b not in (0, 1):
            raise ValueError(f"not a bit: {b!r}")
        value = (value << 1) | b
    return value


def unpack_bits(value: int, width: int) -> str:
    return format(int(value), f"0{width}b") if width else ""


@dataclass(frozen=True)
class MessagePayload:
    value: object
    rate: RateSpec
    sub_messages: tuple

    @property
    def bits(self) -> str:
        return unpack_bits(self.value, self.rate.L)


@dataclass(frozen=True)
class KeySet:
    keys: tuple


def split_message(bits, rate: RateSpec, source: BitSource) -> MessagePayload:
    """Cut an ``L``-bit message into ``S`` sub-messages of ``N`` bits.

    ``bits`` is a bit string, a bit sequence, or the message as an integer (or
    integer array) below ``2**L``.  The last sub-message is topped up with
    ``S*N - L`` fresh random bits in its low positions.
    """
    N, L, S = rate.N, rate.L, rate.S
    if isinstance(bits, (str, list, tuple)):
        if len(bits) != L:
            raise ValueError(f"message has {len(bits)} bits, expected L={L}")
        value = pack_bits(bits)
    else:
        value = bits
        if np.any(np.asarray(value) < 0) or np.any(np.asarray(value) >> L):
            raise ValueError(f"message value does not fit in L={L} bits")
    pad = rate.pad_bits
    padded = (value << pad) | source.draw(pad)
    mask = (1 << N) - 1
    subs = tuple((padded >> (N * (S - 1 - i))) & mask for i in range(S))
    return MessagePayload(value=value, rate=rate, sub_messages=subs)


def generate_keys(rate: RateSpec, source: BitSource) -> KeySet:
    return KeySet(tuple(source.draw(rate.N) for _ in range(rate.S)))


def join_sub_messages(subs: Sequence, rate: RateSpec):
    """Inverse of :func:`split_message`: concatenate and drop the padding."""
    value = 0
    for w in subs:
        value = (value << rate.N) | w
    return value >> rate.pad_bits


# -- transcripts ---------------------------------------------------------------


def _hex(payload, N):
    if payload is None:
        return "-"
    return format(int(payload), f"0{(N + 3) // 4}x")


@dataclass
class BlockRecord:
    """What happened in one block.

    ``label`` is a tuple describing the payload: ``("cipher", i)``,
    ``("key", j)``, ``("bank", q, idx)``, ``("discard",)``,
    ``("data", i, m, n)`` or ``None`` for silence.
    """

    t: int
    state: ChannelState
    x: object
    label: Optional[tuple] = None
    phase: Optional[str] = None
    queue_lengths: Optional[tuple] = None

    @property
    def kind(self) -> BlockKind:
        return classify_block(self.state)

    @property
    def z1(self):
        return observe(self.state, self.x)[0]

    @property
    def z2(self):
        return observe(self.state, self.x)[1]

    @property
    def y(self):
        return observe(self.state, self.x)[2]

    @property
    def annotation(self) -> str:
        if self.label is None:
            return "-"
        tag = self.label[0]
        if tag == "cipher":
            return f"w{self.label[1]}^k{self.label[1]}"
        if tag == "key":
            return f"k{self.label[1]}"
        if tag == "bank":
            return f"key{self.label[1]}[{self.label[2]}]"
        if tag == "discard":
            return "discard"
        if tag == "data":
            _, i, m, n = self.label
            return f"w{i}^key1[{m}]^key2[{n}]"
        return str(self.label)

    def as_dict(self, N: int) -> dict:
        d = {
            "block": self.t,
            "kind": self.kind.value,
            "x": _hex(self.x, N),
            "z1": _hex(self.z1, N),
            "z2": _hex(self.z2, N),
            "y": _hex(self.y, N),
            "annotation": self.annotation,
        }
        if self.phase is not None:
            d["phase"] = self.phase
            d["queue1"], d["queue2"] = self.queue_lengths
        return d


@dataclass
class Transcript:
    rate: RateSpec
    seq: StateSequence
    blocks: List[BlockRecord]
    completion_block: Optional[int]
    mode: str = "zero"
    # block by which sub-message i (1-based, index i-1) is fully sent
    delivery_blocks: list = field(default_factory=list)

    def y_blocks(self) -> list:
        return [b.y for b in self.blocks]

    def relay_view(self, relay: int) -> list:
        if relay == 1:
            return [b.z1 for b in self.blocks]
        if relay == 2:
            return [b.z2 for b in self.blocks]
        raise ValueError(f"relay must be 1 or 2, got {relay}")

    def to_text(self) -> str:
        rows = [b.as_dict(self.rate.N) for b in self.blocks]
        lines = [
            f"# mode={self.mode} N={self.rate.N} L={self.rate.L} S={self.rate.S} "
            f"completion={self.completion_block}"
        ]
        for r in rows:
            line = f"{r['block']} {r['kind']} x={r['x']} z1={r['z1']} z2={r['z2']} y={r['y']} {r['annotation']}"
            if "phase" in r:
                line += f" phase={r['phase']} q1={r['queue1']} q2={r['queue2']}"
            lines.append(line)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "mode": self.mode,
                "N": self.rate.N,
                "L": self.rate.L,
                "completion_block": self.completion_block,
                "blocks": [b.as_dict(self.rate.N) for b in self.blocks],
            },
            indent=2,
        )


# -- encoder / decoder ------------------------------------------------------------


def run_encoder_zero(msg: MessagePayload, keys: KeySet, seq: StateSequence, mode: str = "zero") -> Transcript:
    """Send ciphertexts on on-off blocks and keys on off-on blocks.

    Reads only ``s(t)`` at block ``t``, so it serves both the genie-aided and
    the zero-block-delayed set-up; ``mode`` is only recorded.
    """
    rate = msg.rate
    S = rate.S
    if len(keys.keys) != S:
        raise ValueError(f"need {S} keys, got {len(keys.keys)}")
    i = j = 1
    blocks = []
    cipher_at, key_at = [], []
    for t, state in enumerate(seq, start=1):
        if i > S and j > S:
            break
        kind = classify_block(state)
        if kind is BlockKind.ON_OFF and i <= S:
            blocks.append(BlockRecord(t, state, msg.sub_messages[i - 1] ^ keys.keys[i - 1], ("cipher", i)))
            cipher_at.append(t)
            i += 1
        elif kind is BlockKind.OFF_ON and j <= S:
            blocks.append(BlockRecord(t, state, keys.keys[j - 1], ("key", j)))
            key_at.append(t)
            j += 1
        else:
            blocks.append(BlockRecord(t, state, None))
    delivered = [max(c, k) for c, k in zip(cipher_at, key_at)]
    transcript = Transcript(rate, seq, blocks, None, mode, delivered)
    if i <= S or j <= S:
        raise IncompleteError(
            f"horizon {seq.horizon} ended before all {S} sub-messages were sent",
            {"i": i, "j": j},
            transcript,
        )
    transcript.completion_block = blocks[-1].t
    return transcript


def decode_zero(y_blocks: Sequence, seq: StateSequence, rate: RateSpec):
    """Recover the message from the destination's blocks.

    Replays the schedule from ``seq`` to tell ciphertext blocks from key
    blocks, then XORs each pair.  Returns the ``L``-bit message value.
    """
    S = rate.S
    ciphers, keys = [], []
    for t, y in enumerate(y_blocks, start=1):
        if len(ciphers) == S and len(keys) == S:
            break
        if t > seq.horizon:
            raise DecodeError(f"received block {t} beyond horizon {seq.horizon}")
        kind = seq.kind(t)
        if kind is BlockKind.ON_OFF and len(ciphers) < S:
            bucket = ciphers
        elif kind is BlockKind.OFF_ON and len(keys) < S:
            bucket = keys
        else:
            if y is not None:
                raise DecodeError(f"block {t}: expected silence, received a payload")
            continue
        if y is None:
            raise DecodeError(f"block {t}: expected a payload, nothing received")
        bucket.append(y)
    if len(ciphers) < S or len(keys) < S:
        raise DecodeError(
            f"only {len(ciphers)} ciphertexts and {len(keys)} keys of {S} received"
        )
    return join_sub_messages([c ^ k for c, k in zip(ciphers, keys)], rate)
