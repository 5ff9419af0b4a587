"""Delay-optimal secure message delivery over a two-relay block-erasure network."""

from .channel import (
    BlockKind,
    ChannelState,
    ConfigError,
    GeneratorSpec,
    StateSequence,
    TraceError,
    classify_block,
    count_kind,
    generate_sequence,
    parse_trace,
    serialize_trace,
)
from .delay import DelayResult, RateSpec, one_block_bounds, one_block_upper, optimal_delay_zero
from .codec_zero import DecodeError, IncompleteError, decode_zero, run_encoder_zero, split_message
from .codec_delayed import decode_delayed, run_encoder_delayed
from .secrecy import SchemeUnderTest, check_achievability, equivocation_bits, reliability_exhaustive

__version__ = "0.1.0"
