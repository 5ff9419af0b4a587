"""Exhaustive secrecy and reliability checks on small instances.

For a fixed state sequence, both encoders consume a fixed number ``R`` of
random bits (padding, keys, key-generation packets), whatever the message and
random values are.  So the joint space of a uniform ``L``-bit message and
uniform randomness has exactly ``2**(L+R)`` equally likely points.  The
oracle feeds all of them through the real encoder at once, with numpy arrays
as payloads, then counts:

* ``H(W | Z_r)`` for each relay from the exact joint counts of (message,
  relay observation);
* independence of the relay observation from the message, checked directly
  on the counts (this must agree with the entropy route);
* decoding errors over every point.

Counts are integers; the only floating-point step is the final ``log2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from .bitsource import EnumeratedBits, ZeroBits
from .channel import StateSequence
from .codec_delayed import decode_delayed, run_encoder_delayed
from .codec_zero import (
    DecodeError,
    IncompleteError,
    KeySet,
    decode_zero,
    generate_keys,
    run_encoder_zero,
    split_message,
    unpack_bits,
)
from .delay import RateSpec

DEFAULT_CAP = 2**24
TOLERANCE_BITS = 1e-9


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, cap: int):
        super().__init__(f"enumeration needs {required} points, cap is {cap}")
        self.required = required
        self.cap = cap


@dataclass(frozen=True)
class Codec:
    """An encoder/decoder pair in the form the oracle drives.

    ``encode(message, rate, seq, source)`` returns a transcript (or raises
    ``IncompleteError``); ``decode(y_blocks, seq, rate)`` returns the message.
    """

    name: str
    encode: Callable
    decode: Callable


def _encode_zero(message, rate, seq, source):
    msg = split_message(message, rate, source)
    keys = generate_keys(rate, source)
    return run_encoder_zero(msg, keys, seq)


def _encode_delayed(message, rate, seq, source):
    msg = split_message(message, rate, source)
    return run_encoder_delayed(msg, seq, source)


def _encode_key_reuse(message, rate, seq, source):
    # Negative control: every sub-message is padded with the first key.
    msg = split_message(message, rate, source)
    keys = generate_keys(rate, source)
    return run_encoder_zero(msg, KeySet((keys.keys[0],) * rate.S), seq)


CODECS = {
    "zero": Codec("zero", _encode_zero, decode_zero),
    "delayed": Codec("delayed", _encode_delayed, decode_delayed),
    "zero-keyreuse": Codec("zero-keyreuse", _encode_key_reuse, decode_zero),
}


@dataclass(frozen=True)
class SchemeUnderTest:
    codec: Union[str, Codec]
    rate: RateSpec
    seq: StateSequence

    @property
    def resolved(self) -> Codec:
        if isinstance(self.codec, Codec):
            return self.codec
        try:
            return CODECS[self.codec]
        except KeyError:
            raise ValueError(f"unknown codec {self.codec!r}") from None


def conditional_entropy_bits(messages: np.ndarray, observations: np.ndarray) -> float:
    """``H(W | Z)`` in bits for equally likely rows ``(messages[k], observations[k])``.

    Both arguments are integer arrays of equal length; each row is one
    equally likely outcome.
    """
    total = len(messages)
    _, z_id, z_count = np.unique(observations, return_inverse=True, return_counts=True)
    pair = z_id.astype(np.int64) * (int(messages.max()) + 1) + messages
    pair_vals, pair_count = np.unique(pair, return_counts=True)
    cz = z_count[pair_vals // (int(messages.max()) + 1)]
    # group pairs by the exact ratio c_z / c_wz; only the log is inexact
    ratios, weight = np.unique(np.stack([cz, pair_count], axis=1), axis=0, return_counts=True)
    acc = []
    for (c_z, c_wz), k in zip(ratios.tolist(), weight.tolist()):
        r = Fraction(c_z, c_wz)
        if r != 1:
            acc.append(k * c_wz * (math.log2(r.numerator) - math.log2(r.denominator)))
    return math.fsum(acc) / total


def observation_independent(messages: np.ndarray, observations: np.ndarray, n_messages: int) -> bool:
    """True iff every observation value occurs equally often under every message."""
    _, z_id, z_count = np.unique(observations, return_inverse=True, return_counts=True)
    pair = z_id.astype(np.int64) * n_messages + messages
    pair_vals, pair_count = np.unique(pair, return_counts=True)
    if len(pair_vals) != n_messages * len(z_count):
        return False
    return bool(np.all(pair_count * n_messages == z_count[pair_vals // n_messages]))


def _pack_columns(cols, N, size):
    """Collapse per-block payload columns into one integer id per row."""
    if not cols:
        return np.zeros(size, dtype=np.int64)
    if len(cols) * N <= 62:
        z = np.zeros(size, dtype=np.int64)
        for c in cols:
            z = (z << N) | c
        return z
    _, ids = np.unique(np.stack(cols, axis=1), axis=0, return_inverse=True)
    return ids.reshape(-1).astype(np.int64)


class Enumeration:
    """Every (message, randomness) realization pushed through one scheme."""

    def __init__(self, scheme: SchemeUnderTest, cap: int = DEFAULT_CAP):
        self.scheme = scheme
        codec = scheme.resolved
        rate, seq = scheme.rate, scheme.seq

        dry = ZeroBits()
        try:
            codec.encode(0, rate, seq, dry)
        except IncompleteError:
            pass
        self.random_bits = dry.bits_consumed
        self.size = 2 ** (rate.L + self.random_bits)
        if self.size > cap:
            raise BudgetExceeded(self.size, cap)

        idx = np.arange(self.size, dtype=np.int64)
        self.messages = idx >> self.random_bits
        randomness = idx & ((1 << self.random_bits) - 1)
        source = EnumeratedBits(randomness, self.random_bits)
        self.incomplete: Optional[IncompleteError] = None
        try:
            self.transcript = codec.encode(self.messages, rate, seq, source)
        except IncompleteError as exc:
            self.incomplete = exc
            self.transcript = exc.transcript
        if source.requests != dry.requests:
            raise AssertionError(
                f"randomness layout depends on the message or random values: "
                f"{dry.requests} vs {source.requests}"
            )
        self._codec = codec
        self._relay_obs = {}

    def _observations(self, relay: int) -> np.ndarray:
        if relay not in self._relay_obs:
            cols = [
                np.broadcast_to(z, (self.size,)).astype(np.int64)
                for z in self.transcript.relay_view(relay)
                if z is not None
            ]
            self._relay_obs[relay] = _pack_columns(cols, self.scheme.rate.N, self.size)
        return self._relay_obs[relay]

    def equivocation(self, relay: int) -> float:
        return conditional_entropy_bits(self.messages, self._observations(relay))

    def independent(self, relay: int) -> bool:
        return observation_independent(self.messages, self._observations(relay), 2**self.scheme.rate.L)

    def reliability(self) -> "Reliability":
        rate, seq = self.scheme.rate, self.scheme.seq
        if self.incomplete is not None:
            return Reliability(False, {"reason": "incomplete", "progress": self.incomplete.progress})
        try:
            decoded = self._codec.decode(self.transcript.y_blocks(), seq, rate)
        except DecodeError as exc:
            return Reliability(False, {"reason": f"decode error: {exc}"})
        wrong = np.flatnonzero(np.broadcast_to(decoded, (self.size,)) != self.messages)
        if len(wrong):
            k = int(wrong[0])
            return Reliability(False, {
                "reason": "wrong message",
                "message": unpack_bits(self.messages[k], rate.L),
                "decoded": unpack_bits(np.broadcast_to(decoded, (self.size,))[k], rate.L),
                "randomness_index": k & ((1 << self.random_bits) - 1),
            })
        return Reliability(True, None)


@dataclass(frozen=True)
class Reliability:
    passed: bool
    counterexample: Optional[dict]

    def __bool__(self):
        return self.passed


@dataclass(frozen=True)
class AchievabilityReport:
    relay1_equivocation_bits: float
    relay2_equivocation_bits: float
    target_bits: int
    reliability: Reliability
    enumeration_size: int
    verdict: str
    relay1_independent: bool
    relay2_independent: bool

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def as_dict(self) -> dict:
        d = {
            "relay1_equivocation_bits": self.relay1_equivocation_bits,
            "relay2_equivocation_bits": self.relay2_equivocation_bits,
            "target_bits": self.target_bits,
            "reliability": "pass" if self.reliability.passed else "fail",
            "enumeration_size": self.enumeration_size,
            "verdict": self.verdict,
        }
        if self.reliability.counterexample is not None:
            d["counterexample"] = self.reliability.counterexample
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def equivocation_bits(scheme: SchemeUnderTest, relay: int, cap: int = DEFAULT_CAP) -> float:
    """``H(W | Z_relay, s^D)`` in bits, by exhaustive enumeration."""
    if relay not in (1, 2):
        raise ValueError(f"relay must be 1 or 2, got {relay}")
    return Enumeration(scheme, cap).equivocation(relay)


def reliability_exhaustive(scheme: SchemeUnderTest, cap: int = DEFAULT_CAP) -> Reliability:
    return Enumeration(scheme, cap).reliability()


def check_achievability(scheme: SchemeUnderTest, cap: int = DEFAULT_CAP) -> AchievabilityReport:
    """Zero decoding error and full equivocation at both relays."""
    en = Enumeration(scheme, cap)
    target = scheme.rate.L
    h = {r: en.equivocation(r) for r in (1, 2)}
    ind = {r: en.independent(r) for r in (1, 2)}
    for r in (1, 2):
        if (abs(h[r] - target) <= TOLERANCE_BITS) != ind[r]:
            raise AssertionError(
                f"relay {r}: entropy route says {h[r]} bits but independence check says {ind[r]}"
            )
    rel = en.reliability()
    if en.incomplete is not None:
        verdict = "not-achievable (incomplete)"
    elif rel.passed and ind[1] and ind[2]:
        verdict = "pass"
    else:
        verdict = "fail"
    return AchievabilityReport(h[1], h[2], target, rel, en.size, verdict, ind[1], ind[2])
