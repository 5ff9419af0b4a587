"""Block-erasure channel states for the two source-to-relay links.

A block is described by the pair ``(s1, s2)``: ``s1 = 1`` means the link to
relay 1 delivers the whole block, ``s1 = 0`` means the block is erased.  The
destination hears everything either relay hears, since the relay-to-destination
links are noiseless.

Sequences are finite and indexed from 1, so ``seq.state(t)`` is the state of
block ``t``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np


class TraceError(ValueError):
    """Malformed trace text."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(ValueError):
    """Invalid generator configuration."""


@dataclass(frozen=True)
class ChannelState:
    s1: int
    s2: int

    def __post_init__(self):
        if self.s1 not in (0, 1) or self.s2 not in (0, 1):
            raise ValueError(f"channel states must be 0 or 1, got ({self.s1}, {self.s2})")

    @property
    def kind(self) -> "BlockKind":
        return classify_block(self)

    @property
    def is_on(self) -> bool:
        """True if at least one relay receives the block."""
        return bool(self.s1 or self.s2)

    def swapped(self) -> "ChannelState":
        return ChannelState(self.s2, self.s1)

    def __iter__(self):
        yield self.s1
        yield self.s2

    def __str__(self):
        return f"({self.s1},{self.s2})"


class BlockKind(enum.Enum):
    ON_OFF = "on-off"
    OFF_ON = "off-on"
    ON_ON = "on-on"
    OFF_OFF = "off-off"

    @property
    def state(self) -> ChannelState:
        return _KIND_TO_STATE[self]

    @classmethod
    def parse(cls, text: str) -> "BlockKind":
        key = text.strip().lower().replace("_", "-")
        aliases = {"onoff": "on-off", "offon": "off-on", "onon": "on-on", "offoff": "off-off"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown block kind {text!r}") from None

    def __str__(self):
        return self.value


# Fixed kind order used for probability vectors and counters.
KIND_ORDER = (BlockKind.ON_OFF, BlockKind.OFF_ON, BlockKind.ON_ON, BlockKind.OFF_OFF)

_KIND_TO_STATE = {
    BlockKind.ON_OFF: ChannelState(1, 0),
    BlockKind.OFF_ON: ChannelState(0, 1),
    BlockKind.ON_ON: ChannelState(1, 1),
    BlockKind.OFF_OFF: ChannelState(0, 0),
}
_STATE_TO_KIND = {(s.s1, s.s2): k for k, s in _KIND_TO_STATE.items()}


def classify_block(state: ChannelState) -> BlockKind:
    return _STATE_TO_KIND[(state.s1, state.s2)]


def observe(state: ChannelState, payload):
    """Return ``(z1, z2, y)``, what relay 1, relay 2 and the destination receive.

    ``payload`` is ``None`` when the source is silent; an erased block is also
    observed as ``None``.
    """
    z1 = payload if state.s1 else None
    z2 = payload if state.s2 else None
    y = payload if state.is_on else None
    return z1, z2, y


StateLike = Union[ChannelState, Sequence[int]]


def _as_state(s: StateLike) -> ChannelState:
    if isinstance(s, ChannelState):
        return s
    if isinstance(s, BlockKind):
        return s.state
    s1, s2 = s
    return ChannelState(int(s1), int(s2))


@dataclass(frozen=True)
class StateSequence:
    """Finite state sequence; block ``t`` (1-based) has state ``states[t-1]``."""

    states: tuple
    _prefix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        states = tuple(_as_state(s) for s in self.states)
        if not states:
            raise ValueError("a state sequence needs at least one block")
        object.__setattr__(self, "states", states)
        # _prefix[d, k] = number of blocks of kind KIND_ORDER[k] among 1..d
        hits = np.zeros((len(states) + 1, 4), dtype=np.int64)
        for t, s in enumerate(states, start=1):
            hits[t, KIND_ORDER.index(classify_block(s))] = 1
        prefix = np.cumsum(hits, axis=0)
        prefix.setflags(write=False)
        object.__setattr__(self, "_prefix", prefix)

    @classmethod
    def from_pairs(cls, pairs: Iterable[StateLike]) -> "StateSequence":
        return cls(tuple(pairs))

    @classmethod
    def from_kinds(cls, kinds: Iterable[BlockKind]) -> "StateSequence":
        return cls(tuple(k.state for k in kinds))

    @property
    def horizon(self) -> int:
        return len(self.states)

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def state(self, t: int) -> ChannelState:
        if not 1 <= t <= self.horizon:
            raise IndexError(f"block {t} outside [1, {self.horizon}]")
        return self.states[t - 1]

    def kind(self, t: int) -> BlockKind:
        return classify_block(self.state(t))

    def kinds(self) -> list:
        return [classify_block(s) for s in self.states]

    def prefix_counts(self, d: int) -> dict:
        if not 0 <= d <= self.horizon:
            raise IndexError(f"prefix length {d} outside [0, {self.horizon}]")
        return {k: int(self._prefix[d, i]) for i, k in enumerate(KIND_ORDER)}

    def truncated(self, horizon: int) -> "StateSequence":
        return StateSequence(self.states[:horizon])

    def extended(self, more: Iterable[StateLike]) -> "StateSequence":
        return StateSequence(self.states + tuple(_as_state(s) for s in more))

    def swapped(self) -> "StateSequence":
        """Exchange the roles of the two relays."""
        return StateSequence(tuple(s.swapped() for s in self.states))

    def __str__(self):
        return " ".join(str(s) for s in self.states)


def count_kind(seq: StateSequence, d: int, kind: BlockKind) -> int:
    """Number of blocks of ``kind`` among blocks ``1..d``."""
    if not 1 <= d <= seq.horizon:
        raise IndexError(f"d={d} outside [1, {seq.horizon}]")
    return int(seq._prefix[d, KIND_ORDER.index(kind)])


# -- trace files -------------------------------------------------------------


def parse_trace(text: str) -> StateSequence:
    """Parse the line-oriented trace format.

    Each non-empty line is either a ``#`` comment or ``"<s1> <s2>"`` with both
    symbols in ``{0, 1}``.
    """
    states = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise TraceError(f"expected two symbols, got {line!r}", lineno)
        if any(f not in ("0", "1") for f in fields):
            raise TraceError(f"symbols must be 0 or 1, got {line!r}", lineno)
        states.append(ChannelState(int(fields[0]), int(fields[1])))
    if not states:
        raise TraceError("trace contains no blocks")
    return StateSequence(tuple(states))


def serialize_trace(seq: StateSequence, comment: Optional[str] = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.extend(f"{s.s1} {s.s2}" for s in seq)
    return "\n".join(lines) + "\n"


def read_trace(path) -> StateSequence:
    return parse_trace(Path(path).read_text(encoding="utf-8"))


def write_trace(path, seq: StateSequence, comment: Optional[str] = None) -> None:
    Path(path).write_text(serialize_trace(seq, comment), encoding="utf-8")


# -- generators ---------------------------------------------------------------


class GeneratorMode(enum.Enum):
    IID = "iid"
    PERIODIC = "periodic-pattern"
    CONSTANT = "constant"
    TRACE_FILE = "trace-file"

    @classmethod
    def parse(cls, text: str) -> "GeneratorMode":
        key = text.strip().lower()
        if key == "periodic":
            key = "periodic-pattern"
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown generator mode {text!r}") from None


@dataclass(frozen=True)
class GeneratorSpec:
    """How to produce a state sequence.

    ``probs`` is indexed like :data:`KIND_ORDER` (on-off, off-on, on-on,
    off-off).  Randomness comes from numpy's PCG64 bit generator seeded
    through ``SeedSequence(seed)``.
    """

    mode: GeneratorMode
    probs: tuple = ()
    pattern: tuple = ()
    kind: Optional[BlockKind] = None
    path: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.mode, GeneratorMode):
            object.__setattr__(self, "mode", GeneratorMode.parse(str(self.mode)))
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}")
        if self.mode is GeneratorMode.IID:
            probs = tuple(float(p) for p in self.probs)
            if len(probs) != 4:
                raise ConfigError("iid mode needs four probabilities")
            if any(p < 0 or not np.isfinite(p) for p in probs):
                raise ConfigError(f"probabilities must be non-negative, got {probs}")
            if abs(sum(probs) - 1.0) > 1e-12:
                raise ConfigError(f"probabilities must sum to 1, got {sum(probs)!r}")
            object.__setattr__(self, "probs", probs)
        elif self.mode is GeneratorMode.PERIODIC:
            if not self.pattern:
                raise ConfigError("periodic mode needs a non-empty pattern")
            object.__setattr__(
                self, "pattern",
                tuple(k if isinstance(k, BlockKind) else BlockKind.parse(k) for k in self.pattern),
            )
        elif self.mode is GeneratorMode.CONSTANT:
            if self.kind is None:
                raise ConfigError("constant mode needs a block kind")
            if not isinstance(self.kind, BlockKind):
                object.__setattr__(self, "kind", BlockKind.parse(self.kind))
        elif self.path is None:
            raise ConfigError("trace-file mode needs a path")

    @classmethod
    def iid(cls, probs, seed=0):
        return cls(GeneratorMode.IID, probs=tuple(probs), seed=seed)

    @classmethod
    def periodic(cls, pattern, seed=0):
        return cls(GeneratorMode.PERIODIC, pattern=tuple(pattern), seed=seed)

    @classmethod
    def constant(cls, kind, seed=0):
        return cls(GeneratorMode.CONSTANT, kind=kind, seed=seed)

    @classmethod
    def trace_file(cls, path, seed=0):
        return cls(GeneratorMode.TRACE_FILE, path=str(path), seed=seed)


def generate_sequence(spec: GeneratorSpec, horizon: int) -> StateSequence:
    if horizon < 1:
        raise ConfigError(f"horizon must be positive, got {horizon}")
    if spec.mode is GeneratorMode.IID:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
        idx = rng.choice(4, size=horizon, p=np.asarray(spec.probs) / sum(spec.probs))
        return StateSequence.from_kinds(KIND_ORDER[i] for i in idx)
    if spec.mode is GeneratorMode.PERIODIC:
        p = spec.pattern
        return StateSequence.from_kinds(p[t % len(p)] for t in range(horizon))
    if spec.mode is GeneratorMode.CONSTANT:
        return StateSequence.from_kinds([spec.kind] * horizon)
    seq = read_trace(spec.path)
    if seq.horizon < horizon:
        raise ConfigError(f"{spec.path} has {seq.horizon} blocks, fewer than horizon {horizon}")
    return seq.truncated(horizon)
